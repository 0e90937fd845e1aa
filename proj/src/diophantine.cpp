#include "qpj/diophantine.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "qpj/errors.hpp"

namespace qpj {

namespace {

constexpr double kMaxQuotient = 1e12;
constexpr std::int64_t kSmallDenominator = 1000000;

// omega = num / 2^shift exactly.
struct Dyadic {
  int128 num = 0;
  int shift = 0;
};

Dyadic dyadic(double omega) {
  if (!(omega > 0.0 && omega < 1.0)) throw DomainError("omega must lie in (0, 1)");
  int e = 0;
  const double m = std::frexp(omega, &e);  // omega = m 2^e, m in [0.5, 1)
  Dyadic d;
  d.num = static_cast<int128>(std::ldexp(m, 53));
  d.shift = 53 - e;
  while ((d.num & 1) == 0) {
    d.num >>= 1;
    --d.shift;
  }
  if (d.shift > 120) throw PrecisionExhaustedError("omega too small for exact arithmetic");
  return d;
}

}  // namespace

ContinuedFraction expand(double omega, std::size_t terms) {
  const Dyadic d = dyadic(omega);
  int128 num = d.num;
  int128 den = static_cast<int128>(1) << d.shift;
  ContinuedFraction cf;
  cf.omega = omega;
  int128 p_prev = 0, p = 1;  // p_{-2}, p_{-1}
  int128 q_prev = 1, q = 0;
  while (cf.quotients.size() < terms) {
    const int128 a = num / den;
    const int128 rem = num - a * den;
    if (static_cast<double>(a) > kMaxQuotient) {
      cf.precision_exhausted = true;
      break;
    }
    const int128 p_new = a * p + p_prev;
    const int128 q_new = a * q + q_prev;
    p_prev = p;
    p = p_new;
    q_prev = q;
    q = q_new;
    cf.quotients.push_back(static_cast<std::int64_t>(a));
    cf.p.push_back(p);
    cf.q.push_back(q);
    if (rem == 0) break;
    num = den;
    den = rem;
  }
  const bool stopped = cf.precision_exhausted || (cf.quotients.size() < terms);
  if (stopped && !cf.q.empty() && cf.q.back() <= kSmallDenominator) {
    throw RationalError(static_cast<std::int64_t>(cf.q.back()));
  }
  return cf;
}

double torus_norm(double omega, std::int64_t n) {
  if (n < 1) throw DomainError("torus_norm needs n >= 1");
  if (!(omega > 0.0 && omega < 1.0)) {
    omega -= std::floor(omega);
    if (omega == 0.0) return 0.0;
  }
  const Dyadic d = dyadic(omega);
  const int128 den = static_cast<int128>(1) << d.shift;
  // n < 2^63 and num < 2^53, so the product fits.
  const int128 r = (static_cast<int128>(n) * d.num) & (den - 1);
  const int128 other = den - r;
  const int128 best = r < other ? r : other;
  return std::ldexp(static_cast<double>(best), -d.shift);
}

DiophantineCheck verify(double omega, double C_omega, double alpha, std::int64_t N) {
  if (N < 1 || N > 100000000) throw DomainError("verify needs 1 <= N <= 1e8");
  if (!(alpha > 1.0)) throw DomainError("alpha must exceed 1");
  DiophantineCheck out;
  out.C_omega = C_omega;
  out.alpha = alpha;
  out.N = N;
  out.worst_ratio = std::numeric_limits<double>::infinity();
  auto scan = [&](std::int64_t n) {
    if (n < 1 || n > N) return;
    const double dn = static_cast<double>(n);
    const double ratio = torus_norm(omega, n) * dn * std::pow(std::log(dn + 1.0), alpha);
    if (ratio < out.worst_ratio) {
      out.worst_ratio = ratio;
      out.worst_n = n;
    }
  };
  const ContinuedFraction cf = expand(omega, 96);
  if (cf.precision_exhausted && cf.q.back() < static_cast<int128>(N)) {
    throw PrecisionExhaustedError("continued fraction exhausted at q = " +
                                  std::to_string(static_cast<long long>(cf.q.back())) +
                                  " below the horizon");
  }
  const std::int64_t q2 = cf.q.size() > 2 ? static_cast<std::int64_t>(
                                                std::min<int128>(cf.q[2], static_cast<int128>(N)))
                                          : N;
  for (std::int64_t n = 1; n < q2; ++n) scan(n);
  for (const int128 q : cf.q) {
    if (q > static_cast<int128>(N)) break;
    scan(static_cast<std::int64_t>(q));
  }
  out.ok = out.worst_ratio >= C_omega;
  return out;
}

}  // namespace qpj
