#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <map>
#include <utility>
#include <vector>

namespace qpj {

using cplx = std::complex<double>;

inline constexpr double kTwoPi = 6.283185307179586476925286766559;
inline constexpr double kDefaultZeroTol = 1e-12;

// frac(k * omega) in [0, 1), with the rounding error of the product folded back in.
double frac_mul(long long k, double omega);
double frac(double x);

// Point z = exp(logr) * exp(2 pi i x) of an annulus around the unit circle.
struct PhasePoint {
  double x = 0.0;
  double logr = 0.0;

  // z + k*omega in the multiplicative convention z * exp(2 pi i k omega).
  PhasePoint shifted(long long k, double omega) const {
    return {frac(x + frac_mul(k, omega)), logr};
  }
  cplx z() const;
  static PhasePoint from_complex(cplx z);
};

// Nested radii rho0 < rho0' < rho0'' of the annulus of analyticity.
struct AnnulusConfig {
  double rho0 = 0.25;
  double rho0p = 0.5;
  double rho0pp = 0.75;

  void validate() const;
  bool contains(double logr) const;
};

// Laurent trigonometric polynomial sum_k c_k z^k, k in [-d, d].
class SamplingFunction {
 public:
  SamplingFunction() : SamplingFunction(constant(0.0)) {}
  explicit SamplingFunction(const std::map<int, cplx>& coeffs);

  static SamplingFunction constant(cplx c);
  static SamplingFunction monomial(int k, cplx c = 1.0);
  // Serialized form: (degree, re, im) triples.
  static SamplingFunction from_triples(const std::vector<std::array<double, 3>>& triples);
  std::vector<std::array<double, 3>> triples() const;

  int degree() const noexcept { return degree_; }
  cplx coefficient(int k) const;

  // w must be 1/z; callers that already have it skip a division.
  cplx at(cplx z, cplx w) const;
  cplx at(cplx z) const { return at(z, 1.0 / z); }
  cplx operator()(const PhasePoint& p) const { return at(p.z()); }

  // conj(f(1/conj z)): coefficients conj(c_{-k}).
  SamplingFunction reflect() const;
  SamplingFunction plus_constant(cplx c) const;

  bool operator==(const SamplingFunction& other) const;

 private:
  int degree_ = 0;
  std::vector<cplx> coeffs_;  // index k + degree_
};

// Checked evaluation: throws DomainError outside the annulus.
cplx evaluate(const SamplingFunction& f, const PhasePoint& p, const AnnulusConfig& annulus = {});

// Table of exp(2 pi i frac(j omega)), j = 0..length-1.
class Orbit {
 public:
  Orbit(double omega, std::size_t length);
  double omega() const noexcept { return omega_; }
  std::size_t length() const noexcept { return rot_.size(); }
  cplx rotation(std::size_t j) const { return rot_[j]; }

 private:
  double omega_;
  std::vector<cplx> rot_;
};

cplx rotation(double omega, long long j);

// The pair (a, b) sampled along the rotation by omega, plus b~ = reflect(b).
struct JacobiModel {
  SamplingFunction a;
  SamplingFunction b;
  SamplingFunction b_tilde;
  double omega = 0.0;

  JacobiModel() = default;
  JacobiModel(SamplingFunction a_, SamplingFunction b_, double omega_)
      : a(std::move(a_)), b(std::move(b_)), b_tilde(b.reflect()), omega(omega_) {}

  static JacobiModel extended_harper(double l1, double l2, double l3, double omega);
  // a = 2 lambda cos(2 pi x), b = 1.
  static JacobiModel almost_mathieu(double lambda, double omega);
};

// a(x) = 2cos(2 pi x), b(x) = l1 e^{2pi i(x - w/2)} + l2 + l3 e^{-2pi i(x - w/2)}.
std::pair<SamplingFunction, SamplingFunction> harper_preset(double l1, double l2, double l3,
                                                             double omega);

struct BirkhoffSum {
  double sum = 0.0;
  std::size_t excluded = 0;
};

// sum_{k<n} log|f(p + k omega)|, skipping (and counting) terms with |f| <= zero_tol.
BirkhoffSum birkhoff_log_abs(const SamplingFunction& f, const PhasePoint& p, double omega,
                             std::size_t n, double zero_tol = kDefaultZeroTol);

// int_0^1 log|f(e^{logr} e^{2 pi i x})| dx on a uniform grid, with graded refinement of
// panels next to near-zeros of f.
double mean_log_abs(const SamplingFunction& f, double logr, std::size_t grid,
                    double zero_tol = kDefaultZeroTol);

}  // namespace qpj
