#include <cmath>

#include "doctest.h"
#include "qpj/avalanche.hpp"
#include "qpj/errors.hpp"
#include "qpj/svd2.hpp"

using namespace qpj;

namespace {

const double kGolden = (std::sqrt(5.0) - 1.0) / 2.0;

ApInput diagonal_chain(double mu, std::size_t m) {
  ApInput in;
  in.mu = mu;
  for (std::size_t j = 0; j < m; ++j) in.matrices.push_back(ScaledMatrix::from({mu, 0.0, 0.0, 1.0 / mu}));
  return in;
}

}  // namespace

TEST_CASE("diagonal chain telescopes") {
  const ApReport r = ap_check(diagonal_chain(1e6, 10));
  CHECK(r.hypotheses_ok());
  CHECK(r.lhs_discrepancy < 1e-12);
  CHECK(r.bound == doctest::Approx(10.0 * 10 / 1e6));
  const ApReport exact = ap_check(diagonal_chain(1048576.0, 10));
  CHECK(exact.lhs_discrepancy < 1e-12);
}

TEST_CASE("a rotation breaks the pair hypothesis at its index") {
  ApInput in = diagonal_chain(1e6, 10);
  // rotation by pi/2 composed with a hyperbolic factor keeps the single norms
  in.matrices[4] = ScaledMatrix::from(Mat2{0.0, -1.0, 1.0, 0.0} * Mat2{1e6, 0.0, 0.0, 1e-6});
  const ApReport r = ap_check(in);
  CHECK(r.hyp_det_ok);
  CHECK(r.hyp_norm_ok);
  CHECK_FALSE(r.hyp_pair_ok);
  CHECK((r.worst_pair_index == 3 || r.worst_pair_index == 4));
}

TEST_CASE("hypothesis flags") {
  ApInput big_det = diagonal_chain(1e6, 4);
  big_det.matrices[1] = ScaledMatrix::from({2e6, 0.0, 0.0, 1.0 / 1e6});
  CHECK_FALSE(ap_check(big_det).hyp_det_ok);
  ApInput short_mu = diagonal_chain(3.0, 5);
  CHECK_FALSE(ap_check(short_mu).hyp_norm_ok);
  ApInput weak = diagonal_chain(1e6, 4);
  weak.mu = 2e6;
  CHECK_FALSE(ap_check(weak).hyp_norm_ok);
  CHECK_THROWS_AS(ap_check(diagonal_chain(1e6, 1)), DomainError);
}

TEST_CASE("random hyperbolic chains stay under the bound") {
  const ApFuzzSummary s = ap_fuzz(61, 500, 100, 1e3, 1e8);
  CHECK(s.accepted == 500);
  CHECK(s.worst_ratio <= kAvalancheC0);
  MESSAGE("worst discrepancy * mu / m = " << s.worst_ratio);
}

TEST_CASE("unitary conjugation invariance") {
  Rng rng(62);
  const ApInput in = random_hyperbolic_chain(rng, 12, 1e4);
  const Mat2 u = random_unitary(rng);
  ApInput conj = in;
  for (ScaledMatrix& a : conj.matrices) {
    a = ScaledMatrix::from(u.adjoint()) * a * ScaledMatrix::from(u);
  }
  const ApReport r1 = ap_check(in), r2 = ap_check(conj);
  CHECK(std::abs(r1.three_term - r2.three_term) < 1e-10);
  CHECK(std::abs(r1.worst_pair_defect - r2.worst_pair_defect) < 1e-10);
  CHECK(std::abs(r1.min_log_norm - r2.min_log_norm) < 1e-10);
}

TEST_CASE("block plans") {
  const BlockPlan p1 = make_block_plan(100, 10);
  CHECK(p1.lengths == std::vector<std::size_t>(10, 10));
  CHECK(p1.starts.front() == 0);
  CHECK(p1.starts.back() == 100);
  const BlockPlan p2 = make_block_plan(105, 10);
  CHECK(p2.blocks() == 10);
  CHECK(p2.lengths.back() == 15);
  CHECK(make_block_plan(25, 10).lengths == std::vector<std::size_t>{10, 15});
  CHECK_THROWS_AS(make_block_plan(19, 10), DomainError);
  CHECK_THROWS_AS(make_block_plan(19, 0.5), DomainError);
  for (double l : {3.0, 7.5, 12.2, 40.0}) {
    for (std::size_t n : {100u, 333u, 2000u}) {
      const BlockPlan p = make_block_plan(n, l);
      std::size_t total = 0;
      for (std::size_t len : p.lengths) {
        CHECK(static_cast<double>(len) >= l);
        CHECK(static_cast<double>(len) <= 3 * l);
        total += len;
      }
      CHECK(total == n);
    }
  }
}

TEST_CASE("avalanche on the free hyperbolic cocycle") {
  const JacobiModel f(SamplingFunction::constant(0.0), SamplingFunction::constant(1.0), kGolden);
  for (double l : {5.0, 8.0, 20.0}) {
    const AppliedApResult r = ap_on_cocycle(f, 3.0, PhasePoint{0.2, 0.0}, make_block_plan(400, l));
    CHECK(r.report_u.hypotheses_ok());
    CHECK(r.report_u.lhs_discrepancy <= r.report_u.bound);
    CHECK(r.transported_discrepancy_a < 1e-6);
  }
  const AppliedApResult two = ap_on_cocycle(f, 3.0, PhasePoint{0.2, 0.0}, make_block_plan(40, 20));
  CHECK(two.report_u.lhs_discrepancy == 0.0);
}

TEST_CASE("avalanche on extended Harper at a gap energy") {
  const JacobiModel m = JacobiModel::extended_harper(0.3, 1.0, 0.2, kGolden);
  for (double x : {0.1, 0.5, 0.77}) {
    const AppliedApResult r = ap_on_cocycle(m, -1.0, PhasePoint{x, 0.0}, make_block_plan(2000, 40));
    CHECK(r.report_u.hypotheses_ok());
    CHECK(r.report_u.lhs_discrepancy <= r.report_u.bound);
    CHECK(r.transported_discrepancy_a < 1e-6);
  }
}
