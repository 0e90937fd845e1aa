#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "qpj/cocycle.hpp"

namespace qpj {

// Uniform phase grid x_i = (i + theta) / size with one seeded offset theta.
struct PhaseGrid {
  std::size_t size = 1024;
  std::uint64_t seed = 0;

  double offset() const;
  double point(std::size_t i) const;
};

struct LyapunovEstimate {
  std::size_t n = 0;
  double r = 1.0;
  std::size_t grid = 0;
  double L_a = 0.0;
  double L_plain = 0.0;
  double L_u = 0.0;
  double D = 0.0;
  double D_tilde = 0.0;
  double excluded_fraction = 0.0;
};

// Per-point log-norms log||M_n(x)|| over a phase grid; points where a plain or unimodular
// step hits a b-zero are flagged and left out of every average.
struct CocycleSamples {
  std::vector<double> x;
  std::vector<double> log_norm_a;
  std::vector<double> log_norm_plain;  // empty unless requested
  std::vector<double> log_norm_u;      // empty unless requested
  std::vector<double> log_f_a;         // log|f_n^a(x)|
  std::vector<char> excluded;
  std::size_t excluded_count = 0;

  double excluded_fraction() const {
    return x.empty() ? 0.0 : static_cast<double>(excluded_count) / static_cast<double>(x.size());
  }
  // Mean of values over non-excluded points with finite value.
  double mean(const std::vector<double>& values) const;
};

struct SampleRequest {
  bool plain = false;
  bool unimodular = false;
};

CocycleSamples sample_cocycle(const JacobiModel& model, cplx energy, double logr, std::size_t n,
                              const PhaseGrid& grid, SampleRequest request = {},
                              double zero_tol = kDefaultZeroTol);

// L_n^a, L_n, L_n^u at radius r plus D(r), D~(r). Throws UnreliableEstimateError when more
// than 10% of the grid is excluded.
LyapunovEstimate estimate(const JacobiModel& model, cplx energy, double r, std::size_t n,
                          const PhaseGrid& grid, double zero_tol = kDefaultZeroTol);

double estimate_analytic(const JacobiModel& model, cplx energy, double r, std::size_t n,
                         const PhaseGrid& grid);

struct ConvergenceProfile {
  std::vector<std::size_t> n;
  std::vector<double> L_a;
  double L_ref = 0.0;
  std::vector<double> scaled;  // (L_a(n) - L_ref) n / (log n)^2
  double empirical_constant = 0.0;  // max of scaled
  double positive_ratio = 0.0;      // max/min over positive scaled entries (0 if none)
};

ConvergenceProfile convergence_profile(const JacobiModel& model, cplx energy, double r,
                                       const std::vector<std::size_t>& n_list,
                                       const PhaseGrid& grid);

enum class DeviationStatistic { norm_a, norm_u, entry_a };
const char* to_string(DeviationStatistic s);
DeviationStatistic deviation_statistic_from(const std::string& name);

// |statistic(x) - grid mean| at each point, so that several thresholds share one sample.
struct DeviationSamples {
  std::size_t n = 0;
  DeviationStatistic statistic = DeviationStatistic::norm_a;
  std::size_t grid = 0;
  std::uint64_t seed = 0;
  double mean = 0.0;
  std::vector<double> deviation;  // +inf where log|f| = -inf
  std::size_t excluded = 0;

  double max_deviation() const;
};

struct DeviationReport {
  std::size_t n = 0;
  double delta = 0.0;
  DeviationStatistic statistic = DeviationStatistic::norm_a;
  double empirical_measure = 0.0;
  std::size_t grid = 0;
  std::uint64_t seed = 0;
  double excluded_fraction = 0.0;
};

DeviationSamples sample_deviation(const JacobiModel& model, cplx energy, std::size_t n,
                                  DeviationStatistic statistic, const PhaseGrid& grid);
DeviationReport measure(const DeviationSamples& samples, double delta);

// Fraction of the grid where the deviation of the statistic exceeds delta * n.
DeviationReport deviation_measure(const JacobiModel& model, cplx energy, std::size_t n,
                                  double delta, DeviationStatistic statistic,
                                  const PhaseGrid& grid);

struct UpperBoundRow {
  std::size_t n = 0;
  double max_dev = 0.0;  // max_x log||M^a_n(x)|| - n L_n^a
  double bound = 0.0;    // C_fit (log n)^p
  double scaled = 0.0;   // max_dev / (log n)^p
};

struct UpperBoundReport {
  std::vector<UpperBoundRow> rows;
  double c_fit = 0.0;
  double p = 0.0;
  bool ok = true;
};

double max_norm_deviation(const JacobiModel& model, cplx energy, std::size_t n,
                          const PhaseGrid& grid);
// C_fit fitted at the smallest n; ok when max_dev <= bound at every larger n.
UpperBoundReport uniform_upper_check(const JacobiModel& model, cplx energy,
                                     const std::vector<std::size_t>& n_list, const PhaseGrid& grid,
                                     double p);

struct EntryMeanResult {
  double mean_log_f = 0.0;
  double nL_a = 0.0;
  double gap = 0.0;
};

EntryMeanResult entry_mean_check(const JacobiModel& model, cplx energy, std::size_t n,
                                 const PhaseGrid& grid);

enum class InverseNormCondition {
  // |log||(M^u_j)^-1|| - jL| <= N^sigma; coincides with the norm condition for SL(2)
  deviation,
  // log||(M^u_j)^-1|| <= N^sigma as literally required of the good set
  absolute,
};

struct GoodSetSpec {
  std::size_t N = 50;
  double sigma = 0.5;
  double L = std::numeric_limits<double>::quiet_NaN();  // NaN: estimate L^u_{2N}
  double D = std::numeric_limits<double>::quiet_NaN();  // NaN: quadrature of log|b|
  InverseNormCondition inverse = InverseNormCondition::deviation;
  double budget = 5e8;  // max (4N+1) N grid cocycle steps
};

struct GoodSetReport {
  double complement_measure = 0.0;
  double L = 0.0;
  double D = 0.0;
  double threshold = 0.0;  // N^sigma
  std::size_t failed_norm = 0, failed_inverse = 0, failed_b = 0, excluded = 0;
};

GoodSetReport good_set_measure(const GoodSetSpec& spec, const JacobiModel& model, cplx energy,
                               const PhaseGrid& grid);

// Fraction of the grid with log|f_l(x)| <= threshold_log, f_l = f_l^a / prod_{j=1..l} b(x+jw).
double smallness_measure(const JacobiModel& model, cplx energy, std::size_t l,
                         double threshold_log, const PhaseGrid& grid,
                         double zero_tol = kDefaultZeroTol);

// max over |E - E0| = n^-radius_exponent (circle_points samples) of n |L_n^a(E) - L_n^a(E0)|.
double energy_continuity(const JacobiModel& model, cplx e0, std::size_t n, double radius_exponent,
                         const PhaseGrid& grid, std::size_t circle_points = 16);

struct RadiusContinuity {
  double diff = 0.0;   // |L_n^a(r1) - L_n^a(r2)|
  double ratio = 0.0;  // diff / |r1 - r2|
};

RadiusContinuity radius_continuity(const JacobiModel& model, cplx energy, std::size_t n, double r1,
                                   double r2, const PhaseGrid& grid);

struct AlmostInvariance {
  double lhs = 0.0;     // |log||M^a_n(x)|| - (1/l) sum_{k<l} log||M^a_n(x + k w)|||
  double lambda = 0.0;  // max_j log||S_j|| + max_j log||S_j^-1|| over the steps involved
  std::size_t l = 0;
};

AlmostInvariance almost_invariance(const JacobiModel& model, cplx energy, const PhasePoint& x,
                                   std::size_t n, std::size_t l);

}  // namespace qpj
