#include "qpj/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qpj/errors.hpp"
#include "qpj/parallel.hpp"
#include "qpj/random.hpp"

namespace qpj {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kMinQuadGrid = 4096;

void require(bool ok, const char* what) {
  if (!ok) throw DomainError(what);
}

std::vector<double> grid_means(const JacobiModel& model, cplx energy, std::size_t n,
                               const PhaseGrid& grid, std::vector<double>* log_norms) {
  const CocycleSamples s = sample_cocycle(model, energy, 0.0, n, grid);
  if (log_norms) *log_norms = s.log_norm_a;
  return {s.mean(s.log_norm_a), s.mean(s.log_f_a)};
}

}  // namespace

double PhaseGrid::offset() const {
  Rng rng(seed);
  return rng.uniform();
}

double PhaseGrid::point(std::size_t i) const {
  return (static_cast<double>(i) + offset()) / static_cast<double>(size);
}

double CocycleSamples::mean(const std::vector<double>& values) const {
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (excluded[i] || !std::isfinite(values[i])) continue;
    sum += values[i];
    ++count;
  }
  return count ? sum / static_cast<double>(count) : std::numeric_limits<double>::quiet_NaN();
}

CocycleSamples sample_cocycle(const JacobiModel& model, cplx energy, double logr, std::size_t n,
                              const PhaseGrid& grid, SampleRequest request, double zero_tol) {
  require(n >= 1, "n must be at least 1");
  require(grid.size >= 1, "grid must be nonempty");
  const std::size_t g = grid.size;
  const double theta = grid.offset();
  const Orbit orbit(model.omega, n + 1);

  CocycleSamples s;
  s.x.resize(g);
  s.log_norm_a.assign(g, 0.0);
  s.log_f_a.assign(g, 0.0);
  if (request.plain) s.log_norm_plain.assign(g, 0.0);
  if (request.unimodular) s.log_norm_u.assign(g, 0.0);
  s.excluded.assign(g, 0);

  ProductOptions opt;
  opt.zero_tol = zero_tol;
  opt.orbit = &orbit;

  parallel_for(g, [&](std::size_t i) {
    const double x = (static_cast<double>(i) + theta) / static_cast<double>(g);
    s.x[i] = x;
    const PhasePoint p{x, logr};
    const CocycleProduct pa = product(CocycleKind::analytic, model, p, energy, n, opt);
    s.log_norm_a[i] = pa.log_norm();
    s.log_f_a[i] = entry_f(pa, EntryKind::f_a).log_abs;
    try {
      if (request.plain) {
        s.log_norm_plain[i] = product(CocycleKind::plain, model, p, energy, n, opt).log_norm();
      }
      if (request.unimodular) {
        s.log_norm_u[i] = product(CocycleKind::unimodular, model, p, energy, n, opt).log_norm();
      }
    } catch (const SingularStepError&) {
      s.excluded[i] = 1;
    }
  });
  for (char e : s.excluded) s.excluded_count += e ? 1 : 0;
  return s;
}

LyapunovEstimate estimate(const JacobiModel& model, cplx energy, double r, std::size_t n,
                          const PhaseGrid& grid, double zero_tol) {
  require(grid.size >= 64, "estimate needs grid >= 64");
  require(r > 0.0, "radius must be positive");
  const double logr = std::log(r);
  const CocycleSamples s =
      sample_cocycle(model, energy, logr, n, grid, {true, true}, zero_tol);
  LyapunovEstimate out;
  out.n = n;
  out.r = r;
  out.grid = grid.size;
  out.excluded_fraction = s.excluded_fraction();
  if (out.excluded_fraction > 0.1) throw UnreliableEstimateError(out.excluded_fraction);
  const double dn = static_cast<double>(n);
  out.L_a = s.mean(s.log_norm_a) / dn;
  out.L_plain = s.mean(s.log_norm_plain) / dn;
  out.L_u = s.mean(s.log_norm_u) / dn;
  const std::size_t quad = std::max(grid.size, kMinQuadGrid);
  out.D = mean_log_abs(model.b, logr, quad, zero_tol);
  out.D_tilde = mean_log_abs(model.b_tilde, logr, quad, zero_tol);
  return out;
}

double estimate_analytic(const JacobiModel& model, cplx energy, double r, std::size_t n,
                         const PhaseGrid& grid) {
  require(r > 0.0, "radius must be positive");
  const CocycleSamples s = sample_cocycle(model, energy, std::log(r), n, grid);
  return s.mean(s.log_norm_a) / static_cast<double>(n);
}

ConvergenceProfile convergence_profile(const JacobiModel& model, cplx energy, double r,
                                       const std::vector<std::size_t>& n_list,
                                       const PhaseGrid& grid) {
  require(!n_list.empty(), "n_list is empty");
  for (std::size_t i = 1; i < n_list.size(); ++i) {
    require(n_list[i] > n_list[i - 1], "n_list must be increasing");
  }
  ConvergenceProfile out;
  out.n = n_list;
  for (std::size_t n : n_list) out.L_a.push_back(estimate_analytic(model, energy, r, n, grid));
  out.L_ref = out.L_a.back();
  double pos_max = 0.0;
  double pos_min = kInf;
  out.empirical_constant = -kInf;
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    const double dn = static_cast<double>(n_list[i]);
    const double lg = std::log(dn);
    const double v = lg > 0.0 ? (out.L_a[i] - out.L_ref) * dn / (lg * lg) : 0.0;
    out.scaled.push_back(v);
    out.empirical_constant = std::max(out.empirical_constant, v);
    if (v > 0.0) {
      pos_max = std::max(pos_max, v);
      pos_min = std::min(pos_min, v);
    }
  }
  out.positive_ratio = pos_max > 0.0 ? pos_max / pos_min : 0.0;
  return out;
}

const char* to_string(DeviationStatistic s) {
  switch (s) {
    case DeviationStatistic::norm_a:
      return "norm_a";
    case DeviationStatistic::norm_u:
      return "norm_u";
    case DeviationStatistic::entry_a:
      return "entry_a";
  }
  return "?";
}

DeviationStatistic deviation_statistic_from(const std::string& name) {
  if (name == "norm_a") return DeviationStatistic::norm_a;
  if (name == "norm_u") return DeviationStatistic::norm_u;
  if (name == "entry_a") return DeviationStatistic::entry_a;
  throw DomainError("unknown deviation statistic '" + name + "'");
}

double DeviationSamples::max_deviation() const {
  double m = 0.0;
  for (double d : deviation) m = std::max(m, d);
  return m;
}

DeviationSamples sample_deviation(const JacobiModel& model, cplx energy, std::size_t n,
                                  DeviationStatistic statistic, const PhaseGrid& grid) {
  require(grid.size >= 1024, "deviation statistics need grid >= 1024");
  const bool uni = statistic == DeviationStatistic::norm_u;
  const CocycleSamples s = sample_cocycle(model, energy, 0.0, n, grid, {false, uni});
  const std::vector<double>& values = statistic == DeviationStatistic::norm_a   ? s.log_norm_a
                                      : statistic == DeviationStatistic::norm_u ? s.log_norm_u
                                                                                : s.log_f_a;
  DeviationSamples out;
  out.n = n;
  out.statistic = statistic;
  out.grid = grid.size;
  out.seed = grid.seed;
  out.mean = s.mean(values);
  out.excluded = s.excluded_count;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (s.excluded[i]) continue;
    out.deviation.push_back(std::isfinite(values[i]) ? std::abs(values[i] - out.mean) : kInf);
  }
  return out;
}

DeviationReport measure(const DeviationSamples& samples, double delta) {
  DeviationReport out;
  out.n = samples.n;
  out.delta = delta;
  out.statistic = samples.statistic;
  out.grid = samples.grid;
  out.seed = samples.seed;
  const double total = static_cast<double>(samples.deviation.size() + samples.excluded);
  out.excluded_fraction = total > 0 ? static_cast<double>(samples.excluded) / total : 0.0;
  const double cut = delta * static_cast<double>(samples.n);
  std::size_t hits = 0;
  for (double d : samples.deviation) hits += d > cut ? 1 : 0;
  out.empirical_measure =
      samples.deviation.empty()
          ? 0.0
          : static_cast<double>(hits) / static_cast<double>(samples.deviation.size());
  return out;
}

DeviationReport deviation_measure(const JacobiModel& model, cplx energy, std::size_t n,
                                  double delta, DeviationStatistic statistic,
                                  const PhaseGrid& grid) {
  return measure(sample_deviation(model, energy, n, statistic, grid), delta);
}

double max_norm_deviation(const JacobiModel& model, cplx energy, std::size_t n,
                          const PhaseGrid& grid) {
  require(grid.size >= 1024, "uniform upper check needs grid >= 1024");
  std::vector<double> norms;
  const double mean = grid_means(model, energy, n, grid, &norms)[0];
  double m = -kInf;
  for (double v : norms) m = std::max(m, v - mean);
  return m;
}

UpperBoundReport uniform_upper_check(const JacobiModel& model, cplx energy,
                                     const std::vector<std::size_t>& n_list, const PhaseGrid& grid,
                                     double p) {
  require(!n_list.empty(), "n_list is empty");
  UpperBoundReport out;
  out.p = p;
  for (std::size_t n : n_list) {
    require(n >= 2, "uniform upper check needs n >= 2");
    UpperBoundRow row;
    row.n = n;
    row.max_dev = max_norm_deviation(model, energy, n, grid);
    row.scaled = row.max_dev / std::pow(std::log(static_cast<double>(n)), p);
    out.rows.push_back(row);
  }
  out.c_fit = out.rows.front().scaled;
  for (std::size_t i = 0; i < out.rows.size(); ++i) {
    UpperBoundRow& row = out.rows[i];
    row.bound = out.c_fit * std::pow(std::log(static_cast<double>(row.n)), p);
    if (i > 0 && row.max_dev > row.bound) out.ok = false;
  }
  return out;
}

EntryMeanResult entry_mean_check(const JacobiModel& model, cplx energy, std::size_t n,
                                 const PhaseGrid& grid) {
  require(grid.size >= 1024, "entry mean check needs grid >= 1024");
  const std::vector<double> m = grid_means(model, energy, n, grid, nullptr);
  EntryMeanResult out;
  out.nL_a = m[0];
  out.mean_log_f = m[1];
  out.gap = std::abs(out.mean_log_f - out.nL_a);
  return out;
}

GoodSetReport good_set_measure(const GoodSetSpec& spec, const JacobiModel& model, cplx energy,
                               const PhaseGrid& grid) {
  require(grid.size >= 1024, "good set measure needs grid >= 1024");
  require(spec.N >= 1, "N must be at least 1");
  require(spec.sigma > 0.0 && spec.sigma < 1.0, "sigma must lie in (0, 1)");
  const double N = static_cast<double>(spec.N);
  const double work = (4.0 * N + 1.0) * N * static_cast<double>(grid.size);
  if (work > spec.budget) {
    throw BudgetExceededError("good set measure needs " + std::to_string(work) +
                              " steps, budget is " + std::to_string(spec.budget));
  }
  GoodSetReport out;
  out.threshold = std::pow(N, spec.sigma);
  out.D = std::isnan(spec.D) ? mean_log_abs(model.b, 0.0, std::max(grid.size, kMinQuadGrid))
                             : spec.D;
  if (std::isnan(spec.L)) {
    const CocycleSamples s =
        sample_cocycle(model, energy, 0.0, 2 * spec.N, grid, {false, true});
    out.L = s.mean(s.log_norm_u) / (2.0 * N);
  } else {
    out.L = spec.L;
  }

  const long long reach = 2 * static_cast<long long>(spec.N);
  const Orbit orbit(model.omega, spec.N + 1);
  ProductOptions opt;
  opt.orbit = &orbit;
  const double theta = grid.offset();
  const double L = out.L;
  const double D = out.D;
  const double tau = out.threshold;
  // 0 good, 1 norm, 2 inverse norm, 3 log|b|, 4 singular step
  std::vector<char> verdict(grid.size, 0);

  parallel_for(grid.size, [&](std::size_t i) {
    const PhasePoint x{(static_cast<double>(i) + theta) / static_cast<double>(grid.size), 0.0};
    for (long long l = -reach; l <= reach; ++l) {
      const PhasePoint y = x.shifted(l, model.omega);
      const double lb = std::log(std::abs(model.b(y)));
      if (!(std::abs(lb - D) <= tau)) {
        verdict[i] = 3;
        return;
      }
    }
    try {
      for (long long l = -reach; l <= reach; ++l) {
        CocycleStepper st(CocycleKind::unimodular, model, x.shifted(l, model.omega), energy, opt);
        for (std::size_t j = 1; j <= spec.N; ++j) {
          st.step();
          const double ln = st.log_norm();
          const double jl = static_cast<double>(j) * L;
          if (!(std::abs(ln - jl) <= tau)) {
            verdict[i] = 1;
            return;
          }
          // For |det| = 1, ||M^-1|| = ||M||.
          const double inv = ln - st.log_abs_det();
          const double inv_dev =
              spec.inverse == InverseNormCondition::deviation ? std::abs(inv - jl) : inv;
          if (!(inv_dev <= tau)) {
            verdict[i] = 2;
            return;
          }
        }
      }
    } catch (const SingularStepError&) {
      verdict[i] = 4;
    }
  });

  std::size_t bad = 0;
  for (char v : verdict) {
    switch (v) {
      case 1:
        ++out.failed_norm;
        break;
      case 2:
        ++out.failed_inverse;
        break;
      case 3:
        ++out.failed_b;
        break;
      case 4:
        ++out.excluded;
        break;
      default:
        break;
    }
    bad += v ? 1 : 0;
  }
  out.complement_measure = static_cast<double>(bad) / static_cast<double>(grid.size);
  return out;
}

double smallness_measure(const JacobiModel& model, cplx energy, std::size_t l,
                         double threshold_log, const PhaseGrid& grid, double zero_tol) {
  require(grid.size >= 1024, "smallness measure needs grid >= 1024");
  require(l >= 1, "l must be at least 1");
  const CocycleSamples s = sample_cocycle(model, energy, 0.0, l, grid);
  std::vector<char> state(grid.size, 0);  // 0 above, 1 small, 2 excluded
  parallel_for(grid.size, [&](std::size_t i) {
    const PhasePoint x{s.x[i], 0.0};
    const BirkhoffSum sb =
        birkhoff_log_abs(model.b, x.shifted(1, model.omega), model.omega, l, zero_tol);
    if (sb.excluded) {
      state[i] = 2;
      return;
    }
    state[i] = s.log_f_a[i] - sb.sum <= threshold_log ? 1 : 0;
  });
  std::size_t small = 0, kept = 0;
  for (char v : state) {
    if (v == 2) continue;
    ++kept;
    small += v;
  }
  return kept ? static_cast<double>(small) / static_cast<double>(kept) : 0.0;
}

double energy_continuity(const JacobiModel& model, cplx e0, std::size_t n, double radius_exponent,
                         const PhaseGrid& grid, std::size_t circle_points) {
  require(circle_points >= 1, "circle_points must be at least 1");
  const double dn = static_cast<double>(n);
  const double radius = std::isinf(radius_exponent) && radius_exponent > 0.0
                            ? 0.0
                            : std::pow(dn, -radius_exponent);
  if (radius == 0.0) return 0.0;
  const double l0 = estimate_analytic(model, e0, 1.0, n, grid);
  double out = 0.0;
  for (std::size_t k = 0; k < circle_points; ++k) {
    const double t = kTwoPi * static_cast<double>(k) / static_cast<double>(circle_points);
    const cplx e = e0 + radius * cplx(std::cos(t), std::sin(t));
    out = std::max(out, dn * std::abs(estimate_analytic(model, e, 1.0, n, grid) - l0));
  }
  return out;
}

RadiusContinuity radius_continuity(const JacobiModel& model, cplx energy, std::size_t n, double r1,
                                   double r2, const PhaseGrid& grid) {
  RadiusContinuity out;
  out.diff = std::abs(estimate_analytic(model, energy, r1, n, grid) -
                      estimate_analytic(model, energy, r2, n, grid));
  out.ratio = r1 == r2 ? 0.0 : out.diff / std::abs(r1 - r2);
  return out;
}

AlmostInvariance almost_invariance(const JacobiModel& model, cplx energy, const PhasePoint& x,
                                   std::size_t n, std::size_t l) {
  require(n >= 1 && l >= 1, "n and l must be at least 1");
  AlmostInvariance out;
  out.l = l;
  const double base = product(CocycleKind::analytic, model, x, energy, n).log_norm();
  double avg = 0.0;
  for (std::size_t k = 0; k < l; ++k) {
    avg += product(CocycleKind::analytic, model, x.shifted(static_cast<long long>(k), model.omega),
                   energy, n)
               .log_norm();
  }
  avg /= static_cast<double>(l);
  out.lhs = std::abs(base - avg);
  double fwd = -kInf, inv = -kInf;
  for (std::size_t j = 0; j < n + l; ++j) {
    const Mat2 s = step_matrix(CocycleKind::analytic, model, x, j, energy);
    const double nrm = std::log(operator_norm(s));
    fwd = std::max(fwd, nrm);
    inv = std::max(inv, nrm - std::log(std::abs(s.det())));
  }
  out.lambda = fwd + inv;
  return out;
}

}  // namespace qpj
