#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "qpj/cocycle.hpp"
#include "qpj/random.hpp"

namespace qpj {

// Multiplicative constant of the avalanche bound C0 * m / mu, fixed from a seeded fuzz
// calibration (tools/qpjlab calibrate-ap reproduces it).
inline constexpr double kAvalancheC0 = 10.0;

struct ApInput {
  std::vector<ScaledMatrix> matrices;  // A_1 .. A_m
  double mu = 0.0;
  // log|det A_j| when known independently of the stored entries (long cocycle blocks).
  std::optional<std::vector<double>> log_abs_dets;
};

struct ApReport {
  bool hyp_det_ok = false;
  bool hyp_norm_ok = false;
  bool hyp_pair_ok = false;
  double lhs_discrepancy = 0.0;
  double bound = 0.0;
  std::size_t worst_pair_index = 0;  // j (0-based) maximizing the pair defect of (A_j, A_{j+1})
  double worst_pair_defect = 0.0;
  double min_log_norm = 0.0;
  double three_term = 0.0;  // signed expression whose modulus is lhs_discrepancy

  bool hypotheses_ok() const { return hyp_det_ok && hyp_norm_ok && hyp_pair_ok; }
};

ApReport ap_check(const ApInput& input, double c0 = kAvalancheC0);

// A_j = U_j diag(s_j, 1/s_j) V_j with Haar-random U_j, V_j and s_j = mu e^{t_j},
// t_j uniform in [0, spread). Callers filter on hypotheses_ok().
ApInput random_hyperbolic_chain(Rng& rng, std::size_t m, double mu, double spread = 1.0);

struct ApFuzzSummary {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  double worst_ratio = 0.0;  // max lhs_discrepancy / (m / mu) over accepted chains
};

// Draws chains until `accepted` pass every hypothesis; m uniform in [2, max_m], mu
// log-uniform in [mu_lo, mu_hi].
ApFuzzSummary ap_fuzz(std::uint64_t seed, std::size_t accepted, std::size_t max_m, double mu_lo,
                      double mu_hi);

struct BlockPlan {
  std::size_t n = 0;
  std::vector<std::size_t> lengths;
  std::vector<std::size_t> starts;  // s_0 = 0, s_k = l_1 + ... + l_k (size m + 1)

  std::size_t blocks() const noexcept { return lengths.size(); }
};

// Blocks of length ceil(l) with the last one absorbing the remainder.
BlockPlan make_block_plan(std::size_t n, double l);

struct AppliedApResult {
  ApReport report_u;
  double three_term_a = 0.0;
  double transported_discrepancy_a = 0.0;
};

// A_j = M^u_{l_j}(x + s_{j-1} w); the same three-term expression is evaluated with M^a
// blocks and compared.
AppliedApResult ap_on_cocycle(const JacobiModel& model, cplx energy, const PhasePoint& x,
                              const BlockPlan& plan, double zero_tol = kDefaultZeroTol);

}  // namespace qpj
