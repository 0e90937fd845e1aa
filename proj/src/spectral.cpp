#include "qpj/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qpj/errors.hpp"
#include "qpj/parallel.hpp"

namespace qpj {

namespace {

constexpr double kPivotGuard = 1e-300;

// LDL^T pivots of T - e I. A zero pivot is replaced by the one-sided limit that matches
// the counting convention: +guard for e - 0 (strict), -guard for e + 0 (inclusive).
std::size_t negative_pivots(const SymmetricTridiagonal& t, double e, double zero_sign) {
  const std::size_t n = t.diag.size();
  std::size_t count = 0;
  double q = t.diag[0] - e;
  for (std::size_t i = 0;; ++i) {
    if (q == 0.0) q = zero_sign * kPivotGuard;
    if (q < 0.0) ++count;
    if (i + 1 == n) break;
    const double off = t.offdiag_abs[i];
    q = (t.diag[i + 1] - e) - off * off / q;
  }
  return count;
}

double eigen_tolerance(const SymmetricTridiagonal& t) {
  auto [lo, hi] = gershgorin(t);
  const double radius = std::max({1.0, std::abs(lo), std::abs(hi)});
  return 2.5e-13 * radius;
}

// Smallest lambda in (lo, hi] with count_at_or_below(lambda) >= k.
double bisect(const SymmetricTridiagonal& t, std::size_t k, double lo, double hi, double tol) {
  for (int it = 0; it < 200 && hi - lo > tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (sturm_count_at_or_below(t, mid) >= k) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

JacobiSample build(const JacobiModel& model, const PhasePoint& x, std::size_t n) {
  if (n < 1) throw DomainError("build needs n >= 1");
  if (x.logr != 0.0) throw DomainError("Jacobi samples are built on the unit circle");
  JacobiSample s;
  s.diag.resize(n);
  s.offdiag.resize(n - 1);
  const cplx z0 = x.z();
  for (std::size_t j = 0; j < n; ++j) {
    const cplx zj = z0 * rotation(model.omega, static_cast<long long>(j));
    const cplx aj = model.a.at(zj, std::conj(zj));
    s.diag[j] = aj.real();
    s.max_diag_imag = std::max(s.max_diag_imag, std::abs(aj.imag()));
    if (j + 1 < n) {
      const cplx zn = z0 * rotation(model.omega, static_cast<long long>(j + 1));
      s.offdiag[j] = model.b.at(zn, std::conj(zn));
    }
  }
  return s;
}

SymmetricTridiagonal gauge_to_real(const JacobiSample& sample) {
  double scale = 1.0;
  for (double d : sample.diag) scale = std::max(scale, std::abs(d));
  if (sample.max_diag_imag > 1e-10 * scale) {
    throw DomainError("Jacobi sample is not Hermitian (complex diagonal)");
  }
  SymmetricTridiagonal t;
  t.diag = sample.diag;
  t.offdiag_abs.resize(sample.offdiag.size());
  for (std::size_t i = 0; i < sample.offdiag.size(); ++i) {
    t.offdiag_abs[i] = std::abs(sample.offdiag[i]);
  }
  return t;
}

std::size_t sturm_count(const SymmetricTridiagonal& t, double e) {
  return negative_pivots(t, e, +1.0);
}

std::size_t sturm_count_at_or_below(const SymmetricTridiagonal& t, double e) {
  return negative_pivots(t, e, -1.0);
}

std::pair<double, double> gershgorin(const SymmetricTridiagonal& t) {
  const std::size_t n = t.diag.size();
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t i = 0; i < n; ++i) {
    double r = 0.0;
    if (i > 0) r += t.offdiag_abs[i - 1];
    if (i + 1 < n) r += t.offdiag_abs[i];
    lo = std::min(lo, t.diag[i] - r);
    hi = std::max(hi, t.diag[i] + r);
  }
  return {lo, hi};
}

double eigenvalue(const SymmetricTridiagonal& t, std::size_t k) {
  if (k < 1 || k > t.diag.size()) throw DomainError("eigenvalue index out of range");
  auto [lo, hi] = gershgorin(t);
  const double pad = 1e-12 * std::max({1.0, std::abs(lo), std::abs(hi)});
  return bisect(t, k, lo - pad, hi + pad, eigen_tolerance(t));
}

std::vector<double> eigenvalues_in(const SymmetricTridiagonal& t, const SpectrumWindow& w) {
  if (!(w.radius >= 0.0)) throw DomainError("window radius must be nonnegative");
  const double lo = w.center - w.radius;
  const double hi = w.center + w.radius;
  const std::size_t below = sturm_count_at_or_below(t, lo);
  const std::size_t upto = sturm_count_at_or_below(t, hi);
  const double tol = eigen_tolerance(t);
  std::vector<double> out;
  out.reserve(upto - below);
  for (std::size_t k = below + 1; k <= upto; ++k) {
    const double ev = bisect(t, k, lo, hi, tol);
    out.push_back(std::clamp(ev, std::nextafter(lo, hi), hi));
  }
  return out;
}

std::vector<double> eigenvalues_in(const JacobiSample& sample, const SpectrumWindow& w) {
  return eigenvalues_in(gauge_to_real(sample), w);
}

std::vector<double> all_eigenvalues(const SymmetricTridiagonal& t) {
  auto [lo, hi] = gershgorin(t);
  const double pad = 1e-9 * std::max({1.0, std::abs(lo), std::abs(hi)});
  return eigenvalues_in(t, {0.5 * (lo + hi), 0.5 * (hi - lo) + pad});
}

namespace {

// (cur, prev) = (f_k, f_{k-1}) * 2^-exp2 along f_k = alpha f_{k-1} - beta f_{k-2}.
class ScaledRecursion {
 public:
  void step(cplx alpha, cplx beta) {
    const cplx next = alpha * cur_ - beta * prev_;
    prev_ = cur_;
    cur_ = next;
    const double big = std::max({std::abs(cur_.real()), std::abs(cur_.imag()),
                                 std::abs(prev_.real()), std::abs(prev_.imag())});
    if (big == 0.0 || !std::isfinite(big)) return;
    int e = 0;
    std::frexp(big, &e);
    if (e != 0) {
      const double s = std::ldexp(1.0, -e);
      cur_ *= s;
      prev_ *= s;
      exp2_ += e;
    }
  }

  CharPolyEval result() const {
    CharPolyEval out;
    const double m = std::abs(cur_);
    if (m == 0.0) {
      out.log_abs = -std::numeric_limits<double>::infinity();
      out.underflowed = true;
      return out;
    }
    out.log_abs = std::log(m) + static_cast<double>(exp2_) * 0.69314718055994530942;
    out.phase = cur_ / m;
    return out;
  }

 private:
  cplx cur_ = 1.0;
  cplx prev_ = 0.0;
  long long exp2_ = 0;
};

}  // namespace

CharPolyEval charpoly(const JacobiModel& model, const PhasePoint& p, cplx energy, std::size_t n,
                      const Orbit* orbit) {
  if (orbit && (orbit->length() < n || orbit->omega() != model.omega)) orbit = nullptr;
  const cplx z0 = p.z();
  const cplx w0 = 1.0 / z0;
  ScaledRecursion rec;
  for (std::size_t k = 0; k < n; ++k) {
    const cplx rot = orbit ? orbit->rotation(k) : rotation(model.omega, static_cast<long long>(k));
    const cplx z = z0 * rot;
    const cplx w = w0 * std::conj(rot);
    rec.step(model.a.at(z, w) - energy, model.b_tilde.at(z, w) * model.b.at(z, w));
  }
  return rec.result();
}

SiteTable site_table(const JacobiModel& model, const PhasePoint& p, std::size_t n) {
  SiteTable t;
  t.a.resize(n);
  t.beta.resize(n);
  const cplx z0 = p.z();
  const cplx w0 = 1.0 / z0;
  for (std::size_t k = 0; k < n; ++k) {
    const cplx rot = rotation(model.omega, static_cast<long long>(k));
    const cplx z = z0 * rot;
    const cplx w = w0 * std::conj(rot);
    t.a[k] = model.a.at(z, w);
    t.beta[k] = model.b_tilde.at(z, w) * model.b.at(z, w);
  }
  return t;
}

CharPolyEval charpoly(const SiteTable& sites, cplx energy) {
  ScaledRecursion rec;
  for (std::size_t k = 0; k < sites.a.size(); ++k) rec.step(sites.a[k] - energy, sites.beta[k]);
  return rec.result();
}

WindowCountResult max_window_count(const JacobiModel& model, std::size_t n, double e0, double c1,
                                   std::size_t x_grid) {
  if (n < 2) throw DomainError("max_window_count needs n >= 2");
  if (!(c1 > 0.0)) throw DomainError("max_window_count needs C1 > 0");
  if (x_grid < 1) throw DomainError("max_window_count needs a nonempty x grid");
  WindowCountResult out;
  out.radius = std::pow(static_cast<double>(n), -c1);
  out.rows.resize(x_grid);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  parallel_for(x_grid, [&](std::size_t i) {
    const double x = static_cast<double>(i) / static_cast<double>(x_grid);
    const SymmetricTridiagonal t = gauge_to_real(build(model, {x, 0.0}, n));
    WindowCountRow row;
    row.x = x;
    row.count = eigenvalues_in(t, {e0, out.radius}).size();
    const std::size_t k = sturm_count_at_or_below(t, e0);
    row.below = k >= 1 ? eigenvalue(t, k) : nan;
    row.above = k < n ? eigenvalue(t, k + 1) : nan;
    out.rows[i] = row;
  });
  out.max_count = out.rows.front().count;
  out.argmax_x = out.rows.front().x;
  for (const auto& row : out.rows) {
    if (row.count > out.max_count) {
      out.max_count = row.count;
      out.argmax_x = row.x;
    }
  }
  return out;
}

}  // namespace qpj
