// qpjlab: command-line front end for the experiment runner.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "qpj/avalanche.hpp"
#include "qpj/cocycle.hpp"
#include "qpj/errors.hpp"
#include "qpj/experiment.hpp"
#include "qpj/lyapunov.hpp"
#include "qpj/random.hpp"
#include "qpj/spectral.hpp"

namespace {

using nlohmann::json;

json load_config(const std::string& path, const std::vector<std::string>& overrides) {
  json j = json::object();
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw qpj::ConfigError("--config", "cannot open " + path);
    j = json::parse(in, nullptr, true, true);
  }
  for (const std::string& s : overrides) qpj::apply_override(j, s);
  return j;
}

int run_config(qpj::ExperimentConfig cfg, bool print) {
  const qpj::ResultManifest m = qpj::run(cfg);
  for (const qpj::ManifestRow& r : m.rows) {
    if (print) {
      std::ifstream in(cfg.output + "/" + r.output_file);
      std::cout << in.rdbuf();
    }
    std::fprintf(stderr, "%s: %zu rows, %zu errors, %.2fs -> %s/%s\n", r.experiment.c_str(),
                 r.rows, r.errors.size(), r.wall_seconds, cfg.output.c_str(),
                 r.output_file.c_str());
    for (const qpj::RowError& e : r.errors) {
      std::fprintf(stderr, "  row %zu (%s): %s\n", e.row, e.params.c_str(), e.message.c_str());
    }
  }
  return m.error_count() == 0 ? 0 : 1;
}

bool check(const char* name, bool ok) {
  std::printf("%s %s\n", ok ? "PASS" : "FAIL", name);
  return ok;
}

// Quick consistency checks on the installed build.
int selftest() {
  using namespace qpj;
  bool all = true;
  const JacobiModel model = JacobiModel::extended_harper(0.3, 1.0, 0.2, (std::sqrt(5.0) - 1) / 2);
  Rng rng(7);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const PhasePoint p{rng.uniform(), 0.0};
    const cplx e{rng.uniform(-3.0, 3.0), 0.0};
    const std::size_t n = 1 + static_cast<std::size_t>(rng.uniform() * 500);
    const double la = product(CocycleKind::analytic, model, p, e, n).log_norm();
    const double lp = product(CocycleKind::plain, model, p, e, n).log_norm();
    const double s = birkhoff_log_abs(model.b, p.shifted(1, model.omega), model.omega, n).sum;
    worst = std::max(worst, std::abs(lp - (la - s)));
  }
  all &= check("normalization identity", worst < 1e-6);
  const PhasePoint p{0.123, 0.0};
  const CharPolyEval f = charpoly(model, p, 0.4, 64);
  const EntryValue g =
      entry_f(product(CocycleKind::analytic, model, p, 0.4, 64), EntryKind::f_a);
  all &= check("characteristic polynomial entry", std::abs(f.log_abs - g.log_abs) < 1e-8);
  const JacobiModel free(SamplingFunction::constant(0.0), SamplingFunction::constant(1.0), 0.5);
  const double l = estimate(free, 3.0, 1.0, 400, {256, 1}).L_a;
  all &= check("free hyperbolic exponent", std::abs(l - std::log((3 + std::sqrt(5.0)) / 2)) < 1e-2);
  const ApFuzzSummary ap = ap_fuzz(11, 200, 8, 50.0, 1e6);
  all &= check("avalanche fuzz", ap.worst_ratio <= kAvalancheC0);
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical experiments for quasiperiodic Jacobi cocycles"};
  app.require_subcommand(1);
  std::string config_path;
  std::vector<std::string> overrides;
  bool print = false;

  CLI::App* run_cmd = app.add_subcommand("run", "run every experiment listed in the config");
  run_cmd->add_option("-c,--config", config_path, "JSON config file")->required();
  run_cmd->add_option("--set", overrides, "override a config field, dotted.path=value");

  std::vector<CLI::App*> experiments;
  for (const std::string& name : qpj::experiment_names()) {
    CLI::App* sub = app.add_subcommand(name, "run the " + name + " experiment");
    sub->add_option("-c,--config", config_path, "JSON config file");
    sub->add_option("--set", overrides, "override a config field, dotted.path=value");
    sub->add_flag("-p,--print", print, "print the CSV on stdout");
    experiments.push_back(sub);
  }

  CLI::App* dump_cmd = app.add_subcommand("config", "print the effective config");
  dump_cmd->add_option("-c,--config", config_path, "JSON config file");
  dump_cmd->add_option("--set", overrides, "override a config field, dotted.path=value");

  CLI::App* self_cmd = app.add_subcommand("selftest", "quick consistency checks");

  std::uint64_t seed = 1;
  std::size_t chains = 10000;
  CLI::App* cal_cmd = app.add_subcommand("calibrate-ap", "worst avalanche ratio over random chains");
  cal_cmd->add_option("--seed", seed);
  cal_cmd->add_option("--chains", chains);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (self_cmd->parsed()) return selftest();
    if (cal_cmd->parsed()) {
      const qpj::ApFuzzSummary s = qpj::ap_fuzz(seed, chains, 16, 50.0, 1e8);
      std::printf("accepted=%zu rejected=%zu worst_ratio=%.17g constant=%.17g\n", s.accepted,
                  s.rejected, s.worst_ratio, qpj::kAvalancheC0);
      return 0;
    }
    qpj::ExperimentConfig cfg = qpj::config_from_json(load_config(config_path, overrides));
    if (dump_cmd->parsed()) {
      std::cout << qpj::to_json(cfg).dump(2) << '\n';
      return 0;
    }
    if (run_cmd->parsed()) return run_config(cfg, false);
    for (CLI::App* sub : experiments) {
      if (sub->parsed()) {
        cfg.experiments = {sub->get_name()};
        return run_config(cfg, print);
      }
    }
  } catch (const qpj::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  }
  return 0;
}
