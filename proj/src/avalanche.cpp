#include "qpj/avalanche.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qpj/errors.hpp"
#include "qpj/svd2.hpp"

namespace qpj {

namespace {

constexpr double kDetSlack = 1e-8;

struct ThreeTerm {
  double value = 0.0;
  std::vector<double> single;  // log||A_j||
  std::vector<double> pair;    // log||A_{j+1} A_j||
};

ThreeTerm three_term(const std::vector<ScaledMatrix>& a) {
  const std::size_t m = a.size();
  ThreeTerm t;
  t.single.resize(m);
  for (std::size_t j = 0; j < m; ++j) t.single[j] = a[j].log_norm();
  t.pair.resize(m - 1);
  for (std::size_t j = 0; j + 1 < m; ++j) t.pair[j] = (a[j + 1] * a[j]).log_norm();
  ScaledMatrix full = a[0];
  for (std::size_t j = 1; j < m; ++j) full = a[j] * full;
  double v = full.log_norm();
  for (std::size_t j = 1; j + 1 < m; ++j) v += t.single[j];
  for (double p : t.pair) v -= p;
  t.value = v;
  return t;
}

}  // namespace

ApReport ap_check(const ApInput& input, double c0) {
  const std::size_t m = input.matrices.size();
  if (m < 2) throw DomainError("avalanche check needs at least two matrices");
  if (input.log_abs_dets && input.log_abs_dets->size() != m) {
    throw DomainError("log_abs_dets size does not match the chain");
  }
  ApReport r;
  r.hyp_det_ok = true;
  for (std::size_t j = 0; j < m; ++j) {
    const double ld = input.log_abs_dets ? (*input.log_abs_dets)[j]
                                         : input.matrices[j].direct_log_abs_det();
    if (ld > kDetSlack) r.hyp_det_ok = false;
  }
  const ThreeTerm t = three_term(input.matrices);
  r.min_log_norm = *std::min_element(t.single.begin(), t.single.end());
  const double log_mu = std::log(input.mu);
  r.hyp_norm_ok = input.mu > static_cast<double>(m) && r.min_log_norm >= log_mu - 1e-12;
  r.worst_pair_defect = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j + 1 < m; ++j) {
    const double defect = t.single[j + 1] + t.single[j] - t.pair[j];
    if (defect > r.worst_pair_defect) {
      r.worst_pair_defect = defect;
      r.worst_pair_index = j;
    }
  }
  r.hyp_pair_ok = r.worst_pair_defect < 0.5 * log_mu;
  r.three_term = t.value;
  r.lhs_discrepancy = std::abs(t.value);
  r.bound = c0 * static_cast<double>(m) / input.mu;
  return r;
}

ApInput random_hyperbolic_chain(Rng& rng, std::size_t m, double mu, double spread) {
  ApInput in;
  in.mu = mu;
  for (std::size_t j = 0; j < m; ++j) {
    const double s = mu * std::exp(spread * rng.uniform());
    const Mat2 u = random_unitary(rng);
    const Mat2 v = random_unitary(rng);
    const Mat2 d{s, 0.0, 0.0, 1.0 / s};
    in.matrices.push_back(ScaledMatrix::from(u * d * v));
  }
  return in;
}

ApFuzzSummary ap_fuzz(std::uint64_t seed, std::size_t accepted, std::size_t max_m, double mu_lo,
                      double mu_hi) {
  if (max_m < 2) throw DomainError("chains need at least two matrices");
  if (!(mu_lo > 1.0 && mu_hi >= mu_lo)) throw DomainError("need 1 < mu_lo <= mu_hi");
  Rng rng(seed);
  ApFuzzSummary out;
  while (out.accepted < accepted) {
    const std::size_t m = 2 + static_cast<std::size_t>(rng.uniform() * static_cast<double>(max_m - 1));
    const double mu = mu_lo * std::exp(rng.uniform() * std::log(mu_hi / mu_lo));
    const ApInput in = random_hyperbolic_chain(rng, m, mu);
    const ApReport r = ap_check(in, 1.0);
    if (!r.hypotheses_ok()) {
      if (++out.rejected > 1000 * accepted) throw DomainError("hypotheses almost never hold");
      continue;
    }
    ++out.accepted;
    out.worst_ratio = std::max(out.worst_ratio, r.lhs_discrepancy / r.bound);
  }
  return out;
}

BlockPlan make_block_plan(std::size_t n, double l) {
  if (!(l >= 1.0)) throw DomainError("block length must be at least 1");
  if (static_cast<double>(n) < 2.0 * l) throw DomainError("block plan needs n >= 2l");
  const auto base = static_cast<std::size_t>(std::ceil(l));
  const std::size_t m = n / base;
  BlockPlan plan;
  plan.n = n;
  plan.lengths.assign(m, base);
  plan.lengths.back() = n - (m - 1) * base;
  plan.starts.assign(m + 1, 0);
  for (std::size_t k = 0; k < m; ++k) plan.starts[k + 1] = plan.starts[k] + plan.lengths[k];
  return plan;
}

AppliedApResult ap_on_cocycle(const JacobiModel& model, cplx energy, const PhasePoint& x,
                              const BlockPlan& plan, double zero_tol) {
  const std::size_t m = plan.blocks();
  if (m < 2) throw DomainError("avalanche driver needs at least two blocks");
  ProductOptions opts;
  opts.zero_tol = zero_tol;
  ApInput in_u;
  std::vector<ScaledMatrix> blocks_a;
  std::vector<double> dets;
  for (std::size_t j = 0; j < m; ++j) {
    const PhasePoint pj = x.shifted(static_cast<long long>(plan.starts[j]), model.omega);
    const CocycleProduct u =
        product(CocycleKind::unimodular, model, pj, energy, plan.lengths[j], opts);
    const CocycleProduct a = product(CocycleKind::analytic, model, pj, energy, plan.lengths[j], opts);
    in_u.matrices.push_back(u.value);
    dets.push_back(u.log_abs_det());
    blocks_a.push_back(a.value);
  }
  double min_log = std::numeric_limits<double>::infinity();
  for (const auto& b : in_u.matrices) min_log = std::min(min_log, b.log_norm());
  in_u.mu = std::exp(min_log);
  in_u.log_abs_dets = dets;

  AppliedApResult out;
  out.report_u = ap_check(in_u);
  out.three_term_a = three_term(blocks_a).value;
  out.transported_discrepancy_a = std::abs(out.report_u.three_term - out.three_term_a);
  return out;
}

}  // namespace qpj
