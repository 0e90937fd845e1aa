#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "qpj/errors.hpp"
#include "qpj/random.hpp"
#include "qpj/spectral.hpp"

using namespace qpj;

namespace {

const double kGolden = (std::sqrt(5.0) - 1.0) / 2.0;

JacobiModel free_model() {
  return JacobiModel(SamplingFunction::constant(0.0), SamplingFunction::constant(1.0), kGolden);
}

JacobiSample random_sample(Rng& rng, std::size_t n) {
  JacobiSample s;
  for (std::size_t i = 0; i < n; ++i) s.diag.push_back(rng.uniform(-3.0, 3.0));
  for (std::size_t i = 0; i + 1 < n; ++i) s.offdiag.push_back({rng.normal(), rng.normal()});
  return s;
}

}  // namespace

TEST_CASE("build") {
  const JacobiSample s1 = build(JacobiModel::extended_harper(0.3, 1, 0.2, kGolden), {0.2, 0.0}, 1);
  CHECK(s1.size() == 1);
  CHECK(s1.offdiag.empty());
  CHECK(s1.diag[0] == doctest::Approx(2 * std::cos(kTwoPi * 0.2)));
  const JacobiSample s2 = build(free_model(), {0.0, 0.0}, 2);
  const Eigen::MatrixXcd h = oracle::dense(s2);
  CHECK(std::abs(h(0, 1) + 1.0) < 1e-15);
  CHECK(std::abs(h(1, 0) + 1.0) < 1e-15);
  CHECK(std::abs(h(0, 0)) == 0.0);
  const JacobiSample s3 = build(JacobiModel::extended_harper(0, 1, 0, kGolden), {0.0, 0.0}, 3);
  for (int j = 0; j < 3; ++j) {
    CHECK(std::abs(s3.diag[j] - 2 * std::cos(kTwoPi * j * kGolden)) < 1e-13);
  }
  CHECK_THROWS_AS(build(free_model(), {0.0, 0.1}, 3), DomainError);
}

TEST_CASE("gauge to real") {
  JacobiSample s;
  s.diag = {0.0, 0.0};
  s.offdiag = {cplx(0.0, 1.0)};
  const SymmetricTridiagonal t = gauge_to_real(s);
  CHECK(t.offdiag_abs[0] == 1.0);
  CHECK(all_eigenvalues(t)[0] == doctest::Approx(-1.0));
  CHECK(all_eigenvalues(t)[1] == doctest::Approx(1.0));
  JacobiSample neg;
  neg.diag = {0.5, 1.0, -1.0};
  neg.offdiag = {-2.0, -0.5};
  const SymmetricTridiagonal tn = gauge_to_real(neg);
  CHECK(tn.offdiag_abs[0] == 2.0);
  const std::vector<double> ref = oracle::hermitian_eigenvalues(oracle::dense(neg));
  for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(all_eigenvalues(tn)[i] - ref[i]) < 1e-12);
  JacobiSample bad = neg;
  bad.max_diag_imag = 0.1;
  CHECK_THROWS_AS(gauge_to_real(bad), DomainError);

  Rng rng(41);
  const JacobiSample r = random_sample(rng, 64);
  const std::vector<double> want = oracle::hermitian_eigenvalues(oracle::dense(r));
  const std::vector<double> got = all_eigenvalues(gauge_to_real(r));
  for (std::size_t i = 0; i < 64; ++i) CHECK(std::abs(got[i] - want[i]) < 1e-10);
}

TEST_CASE("Sturm counts") {
  Rng rng(42);
  const SymmetricTridiagonal t = gauge_to_real(random_sample(rng, 40));
  const auto [lo, hi] = gershgorin(t);
  CHECK(sturm_count(t, lo - 1e-9) == 0);
  CHECK(sturm_count(t, hi + 1e-9) == 40);
  std::size_t prev = 0;
  for (double e = lo - 1.0; e <= hi + 1.0; e += 0.01) {
    const std::size_t c = sturm_count(t, e);
    CHECK(c >= prev);
    prev = c;
  }
  const SymmetricTridiagonal f = gauge_to_real(build(free_model(), {0.0, 0.0}, 2));
  CHECK(sturm_count(f, 0.0) == 1);
  // exact hits: eigenvalue 1 is not strictly below 1 but is at or below it
  CHECK(sturm_count(f, 1.0) == 1);
  CHECK(sturm_count_at_or_below(f, 1.0) == 2);
  CHECK(sturm_count_at_or_below(f, -1.0) == 1);
  SymmetricTridiagonal zero{{0.0, 0.0, 0.0}, {0.0, 0.0}};
  CHECK(sturm_count(zero, 0.0) == 0);
  CHECK(sturm_count_at_or_below(zero, 0.0) == 3);
}

TEST_CASE("eigenvalues in windows") {
  const SymmetricTridiagonal f = gauge_to_real(build(free_model(), {0.0, 0.0}, 2));
  const std::vector<double> w = eigenvalues_in(f, {1.0, 0.5});
  REQUIRE(w.size() == 1);
  CHECK(std::abs(w[0] - 1.0) < 1e-12);
  // half-open window (E0 - r, E0 + r]
  CHECK(eigenvalues_in(f, {0.5, 0.5}).size() == 1);
  CHECK(eigenvalues_in(f, {1.5, 0.5}).size() == 0);
  CHECK(eigenvalues_in(f, {0.0, 1e9}).size() == 2);
  CHECK(eigenvalues_in(f, {0.3, 0.0}).empty());

  const JacobiSample h = build(JacobiModel::extended_harper(0.3, 1, 0.2, kGolden), {0.37, 0.0}, 64);
  const std::vector<double> ref = oracle::hermitian_eigenvalues(oracle::dense(h));
  Rng rng(43);
  for (int i = 0; i < 100; ++i) {
    const double c = rng.uniform(-3.5, 3.5), r = std::exp(rng.uniform(-6.0, 0.5));
    const std::size_t want = static_cast<std::size_t>(std::count_if(
        ref.begin(), ref.end(), [&](double e) { return e > c - r && e <= c + r; }));
    const std::vector<double> got = eigenvalues_in(h, {c, r});
    CHECK(got.size() == want);
    CHECK(std::is_sorted(got.begin(), got.end()));
    for (double e : got) {
      CHECK(e > c - r);
      CHECK(e <= c + r);
      const double nearest = *std::min_element(ref.begin(), ref.end(), [&](double a, double b) {
        return std::abs(a - e) < std::abs(b - e);
      });
      CHECK(std::abs(nearest - e) < 1e-12 * 4);
    }
  }
}

TEST_CASE("gauge phases do not change the spectrum") {
  Rng rng(44);
  JacobiSample s = random_sample(rng, 30);
  const std::vector<double> before = eigenvalues_in(s, {0.0, 10.0});
  for (cplx& b : s.offdiag) b *= std::polar(1.0, kTwoPi * rng.uniform());
  const std::vector<double> after = eigenvalues_in(s, {0.0, 10.0});
  REQUIRE(before.size() == after.size());
  for (std::size_t i = 0; i < before.size(); ++i) CHECK(std::abs(before[i] - after[i]) < 1e-10);
}

TEST_CASE("characteristic polynomial") {
  const JacobiModel m = JacobiModel::extended_harper(0.3, 1, 0.2, kGolden);
  const PhasePoint p{0.44, 0.0};
  const CharPolyEval f1 = charpoly(m, p, 0.3, 1);
  CHECK(std::abs(std::exp(f1.log_abs) * f1.phase - (m.a(p) - 0.3)) < 1e-14);
  const CharPolyEval f0 = charpoly(m, p, 0.3, 0);
  CHECK(f0.log_abs == 0.0);
  const CharPolyEval f2 = charpoly(free_model(), p, cplx(0.5, 0.2), 2);
  const cplx e(0.5, 0.2);
  CHECK(std::abs(std::exp(f2.log_abs) * f2.phase - (e * e - 1.0)) < 1e-14);

  Rng rng(45);
  for (int i = 0; i < 20; ++i) {
    const std::size_t n = 1 + static_cast<std::size_t>(rng.uniform() * 64);
    const PhasePoint x{rng.uniform(), 0.0};
    const double E = rng.uniform(-3, 3);
    const JacobiSample s = build(m, x, n);
    Eigen::MatrixXcd h = oracle::dense(s);
    h -= E * Eigen::MatrixXcd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    const CharPolyEval f = charpoly(m, x, E, n);
    CHECK(std::abs(std::abs(f.phase) - 1.0) < 1e-14);
    CHECK(std::abs(f.phase.imag()) < 1e-10);
    CHECK(std::abs(f.log_abs - oracle::log_abs_det(h)) <= 1e-8 * std::max(1.0, std::abs(f.log_abs)));
  }
  // the site-table form agrees with the direct one
  const SiteTable sites = site_table(m, PhasePoint{0.1, 0.1}, 300);
  const CharPolyEval a = charpoly(sites, cplx(0.2, 0.3));
  const CharPolyEval b = charpoly(m, PhasePoint{0.1, 0.1}, cplx(0.2, 0.3), 300);
  CHECK(std::abs(a.log_abs - b.log_abs) < 1e-12 * std::abs(b.log_abs));
}

TEST_CASE("charpoly changes sign at every eigenvalue") {
  const JacobiModel m = JacobiModel::extended_harper(0.3, 1, 0.2, kGolden);
  const PhasePoint x{0.27, 0.0};
  const std::size_t n = 48;
  const std::vector<double> ev = all_eigenvalues(gauge_to_real(build(m, x, n)));
  for (std::size_t i = 0; i < ev.size(); ++i) {
    const double gap = std::min(i > 0 ? ev[i] - ev[i - 1] : 1.0, i + 1 < n ? ev[i + 1] - ev[i] : 1.0);
    if (gap < 1e-7) continue;
    const CharPolyEval lo = charpoly(m, x, ev[i] - 1e-8, n);
    const CharPolyEval hi = charpoly(m, x, ev[i] + 1e-8, n);
    CHECK(lo.phase.real() * hi.phase.real() < 0.0);
  }
}

TEST_CASE("window counts on the free case") {
  const WindowCountResult r = max_window_count(free_model(), 100, 0.0, 2.0, 64);
  CHECK(r.rows.size() == 64);
  CHECK(r.max_count <= 2);
  CHECK(r.radius == doctest::Approx(1e-4));
  // eigenvalues of the free matrix are 2cos(pi k / (n + 1))
  for (const WindowCountRow& row : r.rows) {
    CHECK(std::abs(row.below - 2 * std::cos(kTwoPi / 2 * 51.0 / 101.0)) < 1e-12);
    CHECK(std::abs(row.above - 2 * std::cos(kTwoPi / 2 * 50.0 / 101.0)) < 1e-12);
  }
  const WindowCountResult tiny = max_window_count(free_model(), 100, 0.01, 40.0, 8);
  CHECK(tiny.max_count == 0);
  CHECK_THROWS_AS(max_window_count(free_model(), 1, 0.0, 2.0, 8), DomainError);
}
