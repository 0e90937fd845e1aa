// Desk-scale acceptance probes. One PASS/FAIL line per criterion; exit status 1 if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "lemmas.hpp"
#include "oracles.hpp"
#include "qpj/avalanche.hpp"
#include "qpj/errors.hpp"
#include "qpj/experiment.hpp"
#include "qpj/lyapunov.hpp"
#include "qpj/random.hpp"
#include "qpj/spectral.hpp"
#include "qpj/zeros.hpp"

using namespace qpj;

namespace {

const double kGolden = (std::sqrt(5.0) - 1.0) / 2.0;
// In a spectral gap of the preset, where the exponent is clearly positive.
const double kGapEnergy = -1.0;

JacobiModel harper() { return JacobiModel::extended_harper(0.3, 1.0, 0.2, kGolden); }

JacobiModel free_model() {
  return JacobiModel(SamplingFunction::constant(0.0), SamplingFunction::constant(1.0), kGolden);
}

JacobiModel random_preset(Rng& rng) {
  const double u = rng.uniform();
  if (u < 0.4) return harper();
  if (u < 0.7) return JacobiModel::almost_mathieu(rng.uniform(0.2, 3.0), kGolden);
  if (u < 0.85) return free_model();
  return JacobiModel::extended_harper(rng.uniform(0.0, 1.0), rng.uniform(0.2, 1.5),
                                      rng.uniform(0.0, 1.0), std::sqrt(2.0) - 1.0);
}

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

// 1
Outcome identities() {
  Rng rng(1001);
  double worst_rel = 0.0, worst_u = 0.0, worst_det = 0.0, worst_entry = 0.0, worst_comp = 0.0;
  for (int t = 0; t < 200; ++t) {
    const JacobiModel m = random_preset(rng);
    const PhasePoint p{rng.uniform(), 0.0};
    const cplx e{rng.uniform(-4, 4), rng.uniform() < 0.3 ? rng.uniform(-0.5, 0.5) : 0.0};
    const std::size_t n = 1 + static_cast<std::size_t>(rng.uniform() * 2048);
    const CocycleProduct a = product(CocycleKind::analytic, m, p, e, n);
    const CocycleProduct pl = product(CocycleKind::plain, m, p, e, n);
    const CocycleProduct u = product(CocycleKind::unimodular, m, p, e, n);
    const double s = birkhoff_log_abs(m.b, p.shifted(1, m.omega), m.omega, n).sum;
    const double st = birkhoff_log_abs(m.b_tilde, p, m.omega, n).sum;
    worst_rel = std::max(worst_rel, std::abs(pl.log_norm() - (a.log_norm() - s)));
    worst_u = std::max(worst_u, std::abs(u.log_norm() - (a.log_norm() - 0.5 * (s + st))));
    worst_det = std::max(worst_det, std::abs(std::exp(u.log_abs_det()) - 1.0));
    const CharPolyEval cp = charpoly(m, p, e, n);
    const double entry = entry_f(a, EntryKind::f_a).log_abs;
    worst_entry = std::max(worst_entry, std::abs(cp.log_abs - entry) / std::max(1.0, std::abs(entry)));
    const std::size_t n1 = 1 + static_cast<std::size_t>(rng.uniform() * (n > 1 ? n - 1 : 1));
    if (n1 < n) {
      const CocycleProduct right = product(CocycleKind::analytic, m, p, e, n1);
      const CocycleProduct left =
          product(CocycleKind::analytic, m, p.shifted(static_cast<long long>(n1), m.omega), e, n - n1);
      const CocycleProduct c = compose(left, right);
      double diff = std::abs(c.log_norm() - a.log_norm());
      // entries relative to the norm
      const double scale = a.log_norm();
      for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
          const cplx x = c.value.m.at(i, j) * std::exp(c.value.logscale - scale);
          const cplx y = a.value.m.at(i, j) * std::exp(a.value.logscale - scale);
          diff = std::max(diff, std::abs(x - y));
        }
      }
      worst_comp = std::max(worst_comp, diff);
    }
  }
  Outcome o;
  o.pass = worst_rel <= 1e-6 && worst_u <= 1e-6 && worst_det <= 1e-8 && worst_entry <= 1e-8 &&
           worst_comp <= 1e-8;
  o.detail = fmt("plain %.1e unimodular %.1e |det|-1 %.1e charpoly %.1e", worst_rel, worst_u,
                 worst_det, worst_entry) +
             fmt(" compose %.1e", worst_comp);
  return o;
}

JacobiSample random_sample(Rng& rng, std::size_t n) {
  if (rng.uniform() < 0.5) {
    JacobiSample s;
    for (std::size_t i = 0; i < n; ++i) s.diag.push_back(rng.uniform(-3.0, 3.0));
    for (std::size_t i = 0; i + 1 < n; ++i) s.offdiag.push_back({rng.normal(), rng.normal()});
    return s;
  }
  return build(random_preset(rng), PhasePoint{rng.uniform(), 0.0}, n);
}

// 2
Outcome eigensolver() {
  Rng rng(1002);
  double worst = 0.0;
  std::size_t mismatched = 0, windows = 0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 1 + static_cast<std::size_t>(rng.uniform() * 128);
    const JacobiSample s = random_sample(rng, n);
    const SymmetricTridiagonal tri = gauge_to_real(s);
    const std::vector<double> mine = all_eigenvalues(tri);
    const std::vector<double> ref = oracle::hermitian_eigenvalues(oracle::dense(s));
    for (std::size_t k = 0; k < n; ++k) worst = std::max(worst, std::abs(mine[k] - ref[k]));
    const auto [lo, hi] = gershgorin(tri);
    for (int w = 0; w < 100; ++w) {
      const SpectrumWindow win{rng.uniform(lo - 0.5, hi + 0.5), std::exp(rng.uniform(-6.0, 1.0))};
      const std::size_t want = static_cast<std::size_t>(
          std::count_if(ref.begin(), ref.end(), [&](double v) {
            return v > win.center - win.radius && v <= win.center + win.radius;
          }));
      if (eigenvalues_in(tri, win).size() != want) ++mismatched;
      ++windows;
    }
  }
  Outcome o;
  o.pass = worst <= 1e-10 && mismatched == 0;
  o.detail = fmt("max |dE| %.1e, %g of %g window counts differ", worst,
                 static_cast<double>(mismatched), static_cast<double>(windows));
  return o;
}

// 3
Outcome svd_lemmas() {
  const lemmas::FuzzResult d = lemmas::direction_lemma(1003, 100000, 1 + 1e-6);
  const lemmas::FuzzResult w = lemmas::wedge_triangle(1004, 100000, 1 + 1e-6);
  Outcome o;
  o.pass = d.violations == 0 && w.violations == 0;
  o.detail = fmt("directions: %g violations, worst ratio %.4f; wedge: %g violations, worst ratio %.4f",
                 static_cast<double>(d.violations), d.worst_ratio,
                 static_cast<double>(w.violations), w.worst_ratio);
  return o;
}

// 4
Outcome avalanche() {
  const ApFuzzSummary s = ap_fuzz(1005, 10000, 16, 50.0, 1e8);
  Rng rng(1006);
  double worst_transport = 0.0;
  std::size_t hyp_fail = 0;
  for (int t = 0; t < 40; ++t) {
    const bool free = t % 4 == 0;
    const JacobiModel m = free ? free_model() : harper();
    const double e = free ? 3.0 : kGapEnergy;
    // past l ~ 40 the bound m / mu falls below the rounding of log-norms of size n L
    const double l = free ? rng.uniform(5, 20) : rng.uniform(15, 35);
    const std::size_t n = static_cast<std::size_t>(l * rng.uniform(3, 30));
    const AppliedApResult r = ap_on_cocycle(m, e, PhasePoint{rng.uniform(), 0.0}, make_block_plan(n, l));
    worst_transport = std::max(worst_transport, r.transported_discrepancy_a);
    if (!r.report_u.hypotheses_ok() || r.report_u.lhs_discrepancy > r.report_u.bound) ++hyp_fail;
  }
  Outcome o;
  o.pass = s.worst_ratio <= kAvalancheC0 && worst_transport <= 1e-6;
  o.detail = fmt("%g chains, max discrepancy / (m/mu) = %.3g; transport %.1e; cocycle runs off-bound %g",
                 static_cast<double>(s.accepted), s.worst_ratio, worst_transport,
                 static_cast<double>(hyp_fail));
  return o;
}

// 5
Outcome jensen() {
  Rng rng(1007);
  int done = 0, tried = 0;
  double worst = 0.0;
  while (done < 50 && tried < 500) {
    ++tried;
    const JacobiModel m = random_preset(rng);
    const std::size_t n = 1 + static_cast<std::size_t>(rng.uniform() * 16);
    const PhasePoint x{rng.uniform(), 0.0};
    const cplx e1{rng.uniform(-3, 3), rng.uniform(-0.1, 0.1)};
    const double R = rng.uniform(0.05, 0.4);
    const std::vector<double> ev = oracle::hermitian_eigenvalues(oracle::dense(build(m, x, n)));
    double gap = 1.0;
    for (double z : ev) gap = std::min(gap, std::abs(std::abs(cplx(z) - e1) - 4 * R));
    if (gap <= 1e-3) continue;
    const JensenResult r = jensen_check(m, x, n, e1, R, 1 << 16);
    if (r.attempts != 1) continue;
    worst = std::max(worst, std::abs(r.lhs - r.rhs));
    ++done;
  }
  Outcome o;
  o.pass = done == 50 && worst <= 1e-6;
  o.detail = fmt("%g cases, max |lhs - rhs| %.1e", done, worst);
  return o;
}

// 6
Outcome winding() {
  Rng rng(1008);
  int done = 0, tried = 0, wrong = 0;
  while (done < 50 && tried < 500) {
    ++tried;
    const JacobiModel m = random_preset(rng);
    const std::size_t n = 1 + static_cast<std::size_t>(rng.uniform() * 8);
    const cplx e{rng.uniform(-3, 3), rng.uniform(-0.2, 0.2)};
    const Disk d = Disk::around(rng.uniform(), rng.uniform(0.05, 0.4));
    double gap = 1.0;
    long want = 0;
    for (const cplx& r : oracle::charpoly_roots_in_z(m, e, n)) {
      const double dist = std::abs(r - d.center);
      gap = std::min(gap, std::abs(dist - d.radius));
      if (dist < d.radius) ++want;
    }
    if (gap <= 1e-3) continue;
    if (winding_count(m, e, n, d).count != want) ++wrong;
    ++done;
  }
  Outcome o;
  o.pass = done == 50 && wrong == 0;
  o.detail = fmt("%g cases, %g mismatches", done, wrong);
  return o;
}

// 7
Outcome lyapunov_values() {
  Rng rng(1009);
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    const double r = t % 2 ? std::exp(rng.uniform(-0.3, 0.3)) : 1.0;
    const cplx e{rng.uniform(-3, 3), t % 3 ? 0.0 : rng.uniform(-0.3, 0.3)};
    const LyapunovEstimate est = estimate(harper(), e, r, 200, PhaseGrid{512, rng.bits()});
    worst = std::max(worst, std::abs(est.L_plain - (-est.D + est.L_a)));
    worst = std::max(worst, std::abs(est.L_u - (-(est.D + est.D_tilde) / 2 + est.L_a)));
  }
  const LyapunovEstimate f = estimate(free_model(), 3.0, 1.0, 1000, PhaseGrid{4096, 1010});
  worst = std::max(worst, std::abs(f.L_plain - (-f.D + f.L_a)));
  worst = std::max(worst, std::abs(f.L_u - (-(f.D + f.D_tilde) / 2 + f.L_a)));
  const double exact = std::log((3.0 + std::sqrt(5.0)) / 2.0);
  Outcome o;
  o.pass = worst <= 1e-6 && std::abs(f.L_a - exact) <= 1e-3;
  o.detail = fmt("relations %.1e; free L = %.6f vs %.6f", worst, f.L_a, exact);
  return o;
}

// 8
Outcome convergence() {
  std::vector<std::size_t> ns;
  for (int k = 0; k <= 7; ++k) ns.push_back(25u << k);
  const ConvergenceProfile p = convergence_profile(harper(), kGapEnergy, 1.0, ns, PhaseGrid{4096, 1011});
  Outcome o;
  o.pass = std::isfinite(p.empirical_constant) && p.positive_ratio <= 50.0 && p.positive_ratio > 0.0;
  std::string scaled;
  for (std::size_t i = 0; i + 1 < p.scaled.size(); ++i) scaled += fmt(" %.4f", p.scaled[i]);
  o.detail = fmt("E = %.2f, L_ref %.5f, C fit %.4f, max/min %.2f; scaled", kGapEnergy, p.L_ref,
                 p.empirical_constant, p.positive_ratio) +
             scaled;
  return o;
}

// Energies in the observed spectrum: eigenvalue quantiles of H^(1600)(0.123).
std::vector<double> spectrum_energies(const JacobiModel& m) {
  const std::vector<double> ev = all_eigenvalues(gauge_to_real(build(m, PhasePoint{0.123, 0.0}, 1600)));
  std::vector<double> out;
  for (double q : {0.1, 0.3, 0.5, 0.7, 0.9}) out.push_back(ev[static_cast<std::size_t>(q * (ev.size() - 1))]);
  return out;
}

// 9
Outcome main_count() {
  const JacobiModel m = harper();
  const std::vector<double> energies = spectrum_energies(m);
  Rng rng(1012);
  bool ok = true;
  std::string detail;
  for (std::size_t n : {100u, 400u, 1600u}) {
    const double bound = std::pow(std::log(static_cast<double>(n)), 3);
    std::size_t worst_window = 0;
    long worst_winding = 0;
    for (double e0 : energies) {
      worst_window = std::max(worst_window, max_window_count(m, n, e0, 2.0, 512).max_count);
    }
    for (int i = 0; i < 50; ++i) {
      const double e0 = energies[static_cast<std::size_t>(i) % energies.size()];
      const WindingResult w =
          winding_count_perturbed(m, e0, n, Disk::around(rng.uniform(), 1.0 / static_cast<double>(n)));
      worst_winding = std::max(worst_winding, w.count);
    }
    ok = ok && static_cast<double>(worst_window) <= bound && static_cast<double>(worst_winding) <= bound;
    detail += fmt("n=%g window %g winding %g bound %.0f; ", static_cast<double>(n),
                  static_cast<double>(worst_window), static_cast<double>(worst_winding), bound);
  }
  Outcome o;
  o.pass = ok;
  o.detail = detail + fmt("E0 from %.3f to %.3f", energies.front(), energies.back());
  return o;
}

// 10
Outcome ldt_decay() {
  const PhaseGrid grid{8192, 1013};
  std::vector<double> h, f, fine;
  for (std::size_t n : {250u, 500u, 1000u, 2000u}) {
    const DeviationSamples s = sample_deviation(harper(), kGapEnergy, n, DeviationStatistic::norm_a, grid);
    h.push_back(measure(s, 0.05).empirical_measure);
    fine.push_back(measure(s, 0.002).empirical_measure);
    f.push_back(deviation_measure(free_model(), 3.0, n, 0.05, DeviationStatistic::norm_a, grid)
                    .empirical_measure);
  }
  bool ok = true;
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (i > 0 && h[i] > h[i - 1]) ok = false;
    if (f[i] != 0.0) ok = false;
  }
  Outcome o;
  o.pass = ok;
  o.detail = fmt("preset %.5f %.5f %.5f %.5f", h[0], h[1], h[2], h[3]) +
             fmt("; free %g %g %g %g", f[0], f[1], f[2], f[3]) +
             fmt("; preset at delta 0.002 (not asserted) %.5f %.5f %.5f %.5f", fine[0], fine[1],
                 fine[2], fine[3]);
  return o;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// 11
Outcome determinism(const std::string& config_path) {
  std::ifstream in(config_path);
  if (!in) return {false, "cannot read " + config_path};
  const nlohmann::json j = nlohmann::json::parse(in);
  ExperimentConfig a = config_from_json(j);
  ExperimentConfig b = a;
  const auto base = std::filesystem::temp_directory_path() / "qpj_acceptance_determinism";
  std::filesystem::remove_all(base);
  a.output = (base / "first").string();
  b.output = (base / "second").string();
  const ResultManifest ma = run(a);
  const ResultManifest mb = run(b);
  std::size_t same = 0, files = 0;
  for (const ManifestRow& r : ma.rows) {
    ++files;
    const std::string x = slurp(std::filesystem::path(a.output) / r.output_file);
    const std::string y = slurp(std::filesystem::path(b.output) / r.output_file);
    if (!x.empty() && x == y) ++same;
  }
  Outcome o;
  o.pass = files == a.experiments.size() && same == files && ma.config_hash == mb.config_hash &&
           mb.rows.size() == files;
  o.detail = fmt("%g of %g CSVs byte-identical, %g row errors", static_cast<double>(same),
                 static_cast<double>(files), static_cast<double>(ma.error_count()));
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string config = argc > 1 ? argv[1] : "configs/acceptance.json";
  struct Criterion {
    int id;
    const char* name;
    double budget_seconds;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "identity suite", 60, identities},
      {2, "eigensolver oracle", 120, eigensolver},
      {3, "SVD and wedge lemma fuzz", 60, svd_lemmas},
      {4, "avalanche principle", 120, avalanche},
      {5, "Jensen cross-check", 120, jensen},
      {6, "winding counts vs companion roots", 60, winding},
      {7, "Lyapunov relations and free value", 120, lyapunov_values},
      {8, "convergence-rate probe", 600, convergence},
      {9, "eigenvalue count probe", 900, main_count},
      {10, "LDT decay probe", 600, ldt_decay},
      {11, "determinism", 600, [&] { return determinism(config); }},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > c.budget_seconds) {
      o.pass = false;
      o.detail += fmt(" [over the %.0f s budget]", c.budget_seconds);
    }
    if (!o.pass) ++failed;
    std::printf("%s %2d %s (%.1f s): %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, secs,
                o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
