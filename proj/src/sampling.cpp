#include "qpj/sampling.hpp"

#include <algorithm>
#include <cmath>

#include "qpj/errors.hpp"

namespace qpj {

double frac(double x) {
  double f = x - std::floor(x);
  // x slightly below an integer can round up to exactly 1
  return f >= 1.0 ? 0.0 : f;
}

double frac_mul(long long k, double omega) {
  const double kd = static_cast<double>(k);
  const double p = kd * omega;
  const double err = std::fma(kd, omega, -p);
  return frac(frac(p) + err);
}

cplx PhasePoint::z() const {
  const double r = std::exp(logr);
  const double t = kTwoPi * x;
  return {r * std::cos(t), r * std::sin(t)};
}

PhasePoint PhasePoint::from_complex(cplx z) {
  if (z == cplx(0.0)) throw DomainError("phase point at the origin");
  return {frac(std::arg(z) / kTwoPi), std::log(std::abs(z))};
}

void AnnulusConfig::validate() const {
  if (!(0.0 < rho0 && rho0 < rho0p && rho0p < rho0pp)) {
    throw DomainError("annulus radii must satisfy 0 < rho0 < rho0' < rho0''");
  }
}

bool AnnulusConfig::contains(double logr) const {
  return std::expm1(std::abs(logr)) < rho0pp;
}

SamplingFunction::SamplingFunction(const std::map<int, cplx>& coeffs) {
  int d = 0;
  for (const auto& [k, c] : coeffs) {
    if (c != cplx(0.0)) d = std::max(d, std::abs(k));
  }
  degree_ = d;
  coeffs_.assign(2 * d + 1, cplx(0.0));
  for (const auto& [k, c] : coeffs) {
    if (std::abs(k) <= d) coeffs_[k + d] = c;
  }
}

SamplingFunction SamplingFunction::constant(cplx c) { return SamplingFunction({{0, c}}); }

SamplingFunction SamplingFunction::monomial(int k, cplx c) { return SamplingFunction({{k, c}}); }

SamplingFunction SamplingFunction::from_triples(
    const std::vector<std::array<double, 3>>& triples) {
  std::map<int, cplx> coeffs;
  for (const auto& t : triples) {
    const double deg = t[0];
    if (deg != std::round(deg)) throw DomainError("non-integer Laurent degree");
    coeffs[static_cast<int>(deg)] += cplx(t[1], t[2]);
  }
  return SamplingFunction(coeffs);
}

std::vector<std::array<double, 3>> SamplingFunction::triples() const {
  std::vector<std::array<double, 3>> out;
  for (int k = -degree_; k <= degree_; ++k) {
    const cplx c = coefficient(k);
    if (c != cplx(0.0)) out.push_back({double(k), c.real(), c.imag()});
  }
  return out;
}

cplx SamplingFunction::coefficient(int k) const {
  if (std::abs(k) > degree_) return 0.0;
  return coeffs_[k + degree_];
}

cplx SamplingFunction::at(cplx z, cplx w) const {
  const int d = degree_;
  cplx s = coeffs_[2 * d];
  for (int k = d - 1; k >= 0; --k) s = s * z + coeffs_[k + d];
  if (d == 0) return s;
  cplx t = coeffs_[0];
  for (int k = d - 1; k >= 1; --k) t = t * w + coeffs_[d - k];
  return s + t * w;
}

SamplingFunction SamplingFunction::reflect() const {
  std::map<int, cplx> out;
  for (int k = -degree_; k <= degree_; ++k) out[k] = std::conj(coefficient(-k));
  return SamplingFunction(out);
}

SamplingFunction SamplingFunction::plus_constant(cplx c) const {
  std::map<int, cplx> out;
  for (int k = -degree_; k <= degree_; ++k) out[k] = coefficient(k);
  out[0] += c;
  return SamplingFunction(out);
}

bool SamplingFunction::operator==(const SamplingFunction& other) const {
  return degree_ == other.degree_ && coeffs_ == other.coeffs_;
}

cplx evaluate(const SamplingFunction& f, const PhasePoint& p, const AnnulusConfig& annulus) {
  if (!annulus.contains(p.logr)) {
    throw DomainError("phase point with logr=" + std::to_string(p.logr) +
                      " lies outside the annulus");
  }
  return f(p);
}

cplx rotation(double omega, long long j) {
  const double t = kTwoPi * frac_mul(j, omega);
  return {std::cos(t), std::sin(t)};
}

Orbit::Orbit(double omega, std::size_t length) : omega_(omega), rot_(length) {
  for (std::size_t j = 0; j < length; ++j) rot_[j] = qpj::rotation(omega, static_cast<long long>(j));
}

JacobiModel JacobiModel::extended_harper(double l1, double l2, double l3, double omega) {
  auto [a, b] = harper_preset(l1, l2, l3, omega);
  return JacobiModel(std::move(a), std::move(b), omega);
}

JacobiModel JacobiModel::almost_mathieu(double lambda, double omega) {
  return JacobiModel(SamplingFunction({{1, lambda}, {-1, lambda}}), SamplingFunction::constant(1.0),
                     omega);
}

std::pair<SamplingFunction, SamplingFunction> harper_preset(double l1, double l2, double l3,
                                                             double omega) {
  if (l1 == 0.0 && l2 == 0.0 && l3 == 0.0) {
    throw DomainError("extended Harper preset needs a nonzero lambda");
  }
  const double half = 0.5 * kTwoPi * omega;  // pi * omega
  SamplingFunction a({{1, 1.0}, {-1, 1.0}});
  SamplingFunction b({{1, l1 * std::polar(1.0, -half)}, {0, l2}, {-1, l3 * std::polar(1.0, half)}});
  return {a, b};
}

BirkhoffSum birkhoff_log_abs(const SamplingFunction& f, const PhasePoint& p, double omega,
                             std::size_t n, double zero_tol) {
  if (n < 1) throw DomainError("birkhoff_log_abs needs n >= 1");
  BirkhoffSum out;
  const cplx z0 = p.z();
  for (std::size_t k = 0; k < n; ++k) {
    const double m = std::abs(f.at(z0 * rotation(omega, static_cast<long long>(k))));
    if (m <= zero_tol) {
      ++out.excluded;
    } else {
      out.sum += std::log(m);
    }
  }
  return out;
}

namespace {

constexpr double kLogFloor = -690.77552789821368;  // log(1e-300)
constexpr double kNearZero = 1e-8;
constexpr int kGradingLevels = 20;

// 8-point Gauss-Legendre on [-1, 1].
constexpr std::array<double, 4> kGlNodes = {0.1834346424956498, 0.5255324099163290,
                                            0.7966664774136267, 0.9602898564975363};
constexpr std::array<double, 4> kGlWeights = {0.3626837833783620, 0.3137066458778873,
                                              0.2223810344533745, 0.1012285362903763};

struct LogAbsIntegrand {
  const SamplingFunction& f;
  double r;
  double operator()(double x) const {
    const double t = kTwoPi * x;
    const cplx z(r * std::cos(t), r * std::sin(t));
    const double m = std::abs(f.at(z));
    return m > 0.0 ? std::max(std::log(m), kLogFloor) : kLogFloor;
  }
};

double gauss(const LogAbsIntegrand& g, double lo, double hi) {
  const double mid = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  double s = 0.0;
  for (std::size_t i = 0; i < kGlNodes.size(); ++i) {
    s += kGlWeights[i] * (g(mid - half * kGlNodes[i]) + g(mid + half * kGlNodes[i]));
  }
  return s * half;
}

// Integral over [s, s + len) (len may be negative) graded geometrically toward s.
double graded(const LogAbsIntegrand& g, double s, double len) {
  double total = 0.0;
  double outer = 1.0;
  for (int k = 0; k < kGradingLevels; ++k) {
    const double inner = 0.5 * outer;
    total += gauss(g, s + inner * len, s + outer * len);
    outer = inner;
  }
  total += gauss(g, s, s + outer * len);
  return len > 0 ? total : -total;
}

}  // namespace

double mean_log_abs(const SamplingFunction& f, double logr, std::size_t grid, double zero_tol) {
  if (grid < 16) throw DomainError("mean_log_abs needs grid >= 16");
  const LogAbsIntegrand g{f, std::exp(logr)};
  const double h = 1.0 / static_cast<double>(grid);
  std::vector<double> v(grid);
  std::vector<bool> near(grid);
  std::size_t degenerate = 0;
  for (std::size_t i = 0; i < grid; ++i) {
    const double x = static_cast<double>(i) * h;
    const double t = kTwoPi * x;
    const double m = std::abs(f.at(cplx(g.r * std::cos(t), g.r * std::sin(t))));
    if (m <= zero_tol) ++degenerate;
    near[i] = m < kNearZero;
    v[i] = m > 0.0 ? std::max(std::log(m), kLogFloor) : kLogFloor;
  }
  if (degenerate == grid) throw DegenerateFunctionError("|f| below zero_tol on the whole grid");

  double total = 0.0;
  for (double vi : v) total += vi;
  total *= h;
  // Replace the trapezoid on each panel touching a near-zero node.
  for (std::size_t i = 0; i < grid; ++i) {
    const std::size_t j = (i + 1) % grid;
    if (!near[i] && !near[j]) continue;
    const double lo = static_cast<double>(i) * h;
    total -= 0.5 * h * (v[i] + v[j]);
    if (near[i] && near[j]) {
      total += graded(g, lo, 0.5 * h) + graded(g, lo + h, -0.5 * h);
    } else if (near[i]) {
      total += graded(g, lo, h);
    } else {
      total += graded(g, lo + h, -h);
    }
  }
  return total;
}

}  // namespace qpj
