#include "qpj/svd2.hpp"

#include <cmath>

#include "qpj/errors.hpp"

namespace qpj {

namespace {

// (x, y) -> (-conj y, conj x): orthogonal to (x, y) with det[v, perp v] = |v|^2.
Vec2 perp(const Vec2& v) { return {-std::conj(v[1]), std::conj(v[0])}; }

Vec2 scale(const Vec2& v, cplx s) { return {v[0] * s, v[1] * s}; }

// Unit phase that makes the first nonzero component real positive.
cplx normalizing_phase(const Vec2& v) {
  const cplx lead = std::abs(v[0]) > 0.0 ? v[0] : v[1];
  const double m = std::abs(lead);
  return m > 0.0 ? std::conj(lead) / m : cplx(1.0);
}

}  // namespace

Svd2 svd2(const Mat2& a) {
  const double big = std::max({std::abs(a.a), std::abs(a.b), std::abs(a.c), std::abs(a.d)});
  if (big == 0.0) throw DomainError("svd2 of the zero matrix");
  // Work on a/big so that A^H A cannot overflow.
  const Mat2 m = a * (1.0 / big);
  const double p = std::norm(m.a) + std::norm(m.c);
  const double r = std::norm(m.b) + std::norm(m.d);
  const cplx q = std::conj(m.a) * m.b + std::conj(m.c) * m.d;
  const double half_diff = 0.5 * (p - r);
  const double h = std::hypot(half_diff, std::abs(q));
  const double lam = 0.5 * (p + r) + h;

  // Eigenvector of A^H A for lam, taking the better-conditioned branch.
  Vec2 c1{q, cplx(h - half_diff)};  // (q, lam - p)
  Vec2 c2{cplx(h + half_diff), std::conj(q)};  // (lam - r, conj q)
  Vec2 u = norm(c1) >= norm(c2) ? c1 : c2;
  double nu = norm(u);
  if (nu <= 1e-300 || nu <= 1e-15 * lam) {
    u = {1.0, 0.0};
    nu = 1.0;
  }
  u = scale(u, 1.0 / nu);
  u = scale(u, normalizing_phase(u));

  Svd2 out;
  out.u_plus = u;
  const Vec2 au = m * u;
  const double s_max_unit = norm(au);
  out.s_max = s_max_unit * big;
  out.v_plus = scale(au, 1.0 / s_max_unit);

  const cplx det_unit = m.det();
  const double det_abs = std::abs(det_unit);
  const double s_min_unit = det_abs / s_max_unit;
  out.s_min = s_min_unit * big;

  Vec2 um = perp(out.u_plus);
  const cplx phase = normalizing_phase(um);
  out.u_minus = scale(um, phase);
  // A perp(u+) = (det A / s_max) perp(v+), from det[A u+, A u-] = det A det[u+, u-].
  const cplx det_phase = det_abs > 0.0 ? det_unit / det_abs : cplx(1.0);
  out.v_minus = scale(perp(out.v_plus), det_phase * phase);
  return out;
}

Mat2 random_sl2(Rng& rng) {
  for (;;) {
    Mat2 m{cplx(rng.normal(), rng.normal()), cplx(rng.normal(), rng.normal()),
           cplx(rng.normal(), rng.normal()), cplx(rng.normal(), rng.normal())};
    const cplx dt = m.det();
    if (std::abs(dt) < 1e-6) continue;
    return m * (1.0 / std::sqrt(dt));
  }
}

Vec2 random_unit_vector(Rng& rng) {
  for (;;) {
    Vec2 v{cplx(rng.normal(), rng.normal()), cplx(rng.normal(), rng.normal())};
    const double nv = norm(v);
    if (nv > 1e-12) return scale(v, 1.0 / nv);
  }
}

Mat2 random_unitary(Rng& rng) {
  const Vec2 c0 = random_unit_vector(rng);
  const double t = kTwoPi * rng.uniform();
  const Vec2 c1 = scale(perp(c0), std::polar(1.0, t));
  return {c0[0], c1[0], c0[1], c1[1]};
}

}  // namespace qpj
