#include "qpj/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "qpj/avalanche.hpp"
#include "qpj/diophantine.hpp"
#include "qpj/errors.hpp"
#include "qpj/lyapunov.hpp"
#include "qpj/parallel.hpp"
#include "qpj/random.hpp"
#include "qpj/spectral.hpp"
#include "qpj/zeros.hpp"

namespace qpj {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

const std::set<std::string> kConfigKeys = {
    "schema_version", "model",         "omega",          "energies",   "n",
    "grid",           "x_grid",        "quad",           "samples",    "zero_tol",
    "radius",         "block_length",  "jensen_radius",  "exponents",  "delta",
    "statistics",     "horizon",       "goodset_budget", "goodset_inverse",
    "seed",           "workers",       "output",         "experiments"};

template <class T>
void read(const json& j, const char* key, T& out, const std::string& prefix = "") {
  auto it = j.find(key);
  if (it == j.end()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(prefix + key, e.what());
  }
}

void check_keys(const json& j, const std::set<std::string>& keys, const std::string& prefix) {
  if (!j.is_object()) throw ConfigError(prefix.empty() ? "<root>" : prefix, "expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!keys.count(it.key())) throw ConfigError(prefix + it.key(), "unknown field");
  }
}

json energy_to_json(cplx e) {
  if (e.imag() == 0.0) return e.real();
  return json::array({e.real(), e.imag()});
}

cplx energy_from_json(const json& j, const std::string& field) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
    return {j[0].get<double>(), j[1].get<double>()};
  }
  throw ConfigError(field, "energy must be a number or [re, im]");
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string energy_label(cplx e) {
  return "E=" + format_double(e.real()) + (e.imag() != 0.0 ? "+" + format_double(e.imag()) + "i" : "");
}

PhaseGrid phase_grid(const ExperimentConfig& c) { return {c.grid, c.seed}; }

// Random phases in [0, 1) for experiments that sample individual points.
std::vector<double> random_phases(const ExperimentConfig& c, const std::string& salt) {
  Rng rng(c.seed ^ fnv1a(salt));
  std::vector<double> out(c.samples);
  for (double& x : out) x = rng.uniform();
  return out;
}

struct Context {
  const ExperimentConfig& c;
  JacobiModel model;
  ManifestRow& record;
  std::size_t row_index = 0;

  void fail(CsvTable::Row& row, const std::string& params, const std::exception& e) {
    record.errors.push_back({row_index, params, e.what()});
    row.fail();
  }
  void excluded(double f) { record.max_excluded_fraction = std::max(record.max_excluded_fraction, f); }
};

// Runs body(row) for one CSV row, turning library errors into a failed row.
template <class Body>
void guarded(Context& ctx, CsvTable& table, std::vector<std::string> prefix_cells,
             const std::string& params, Body body) {
  CsvTable::Row row = table.row();
  for (const std::string& s : prefix_cells) row.text(s);
  try {
    body(row);
    row.end();
  } catch (const Error& e) {
    ctx.fail(row, params, e);
  }
  ++ctx.row_index;
}

std::string fmt(double v) { return format_double(v); }
std::string fmt(std::size_t v) { return std::to_string(v); }

void lyapunov_rows(Context& ctx, CsvTable& t) {
  for (cplx e : ctx.c.energies) {
    for (std::size_t n : ctx.c.n) {
      guarded(ctx, t, {fmt(e.real()), fmt(e.imag()), fmt(n), fmt(ctx.c.radius), fmt(ctx.c.grid),
                       std::to_string(ctx.c.seed)},
              energy_label(e) + " n=" + fmt(n), [&](CsvTable::Row& row) {
                const LyapunovEstimate est =
                    estimate(ctx.model, e, ctx.c.radius, n, phase_grid(ctx.c), ctx.c.zero_tol);
                ctx.excluded(est.excluded_fraction);
                row.num(est.L_a).num(est.L_plain).num(est.L_u).num(est.D).num(est.D_tilde);
                row.num(std::abs(est.L_plain - (est.L_a - est.D)));
                row.num(std::abs(est.L_u - (est.L_a - 0.5 * (est.D + est.D_tilde))));
                row.num(est.excluded_fraction);
              });
    }
  }
}

void deviation_rows(Context& ctx, CsvTable& t, const std::vector<std::string>& statistics,
                    bool with_entry_mean) {
  for (const std::string& name : statistics) {
    const DeviationStatistic stat = deviation_statistic_from(name);
    for (cplx e : ctx.c.energies) {
      for (std::size_t n : ctx.c.n) {
        DeviationSamples samples;
        EntryMeanResult mean;
        std::string sample_error;
        try {
          samples = sample_deviation(ctx.model, e, n, stat, phase_grid(ctx.c));
          if (with_entry_mean) mean = entry_mean_check(ctx.model, e, n, phase_grid(ctx.c));
        } catch (const Error& err) {
          sample_error = err.what();
        }
        for (double delta : ctx.c.delta) {
          guarded(ctx, t, {name, fmt(n), fmt(delta), fmt(ctx.c.grid), std::to_string(ctx.c.seed),
                           fmt(e.real()), fmt(e.imag())},
                  name + " " + energy_label(e) + " n=" + fmt(n) + " delta=" + fmt(delta),
                  [&](CsvTable::Row& row) {
                    if (!sample_error.empty()) throw Error(sample_error);
                    const DeviationReport r = measure(samples, delta);
                    ctx.excluded(r.excluded_fraction);
                    row.num(r.empirical_measure).num(samples.max_deviation());
                    row.num(samples.mean).num(r.excluded_fraction);
                    if (with_entry_mean) row.num(mean.mean_log_f).num(mean.nL_a).num(mean.gap);
                  });
        }
      }
    }
  }
}

void convergence_rows(Context& ctx, CsvTable& t) {
  for (cplx e : ctx.c.energies) {
    ConvergenceProfile prof;
    std::string err;
    try {
      prof = convergence_profile(ctx.model, e, ctx.c.radius, ctx.c.n, phase_grid(ctx.c));
    } catch (const Error& ex) {
      err = ex.what();
    }
    for (std::size_t i = 0; i < ctx.c.n.size(); ++i) {
      guarded(ctx, t, {fmt(e.real()), fmt(e.imag()), fmt(ctx.c.n[i]), fmt(ctx.c.grid),
                       std::to_string(ctx.c.seed)},
              energy_label(e) + " n=" + fmt(ctx.c.n[i]), [&](CsvTable::Row& row) {
                if (!err.empty()) throw Error(err);
                row.num(prof.L_a[i]).num(prof.L_ref).num(prof.scaled[i]);
                row.num(prof.empirical_constant).num(prof.positive_ratio);
              });
    }
  }
}

void upper_rows(Context& ctx, CsvTable& t) {
  for (cplx e : ctx.c.energies) {
    UpperBoundReport rep;
    std::string err;
    try {
      rep = uniform_upper_check(ctx.model, e, ctx.c.n, phase_grid(ctx.c), ctx.c.exponents.p);
    } catch (const Error& ex) {
      err = ex.what();
    }
    for (std::size_t i = 0; i < ctx.c.n.size(); ++i) {
      guarded(ctx, t, {fmt(e.real()), fmt(e.imag()), fmt(ctx.c.n[i]), fmt(ctx.c.grid),
                       std::to_string(ctx.c.seed)},
              energy_label(e) + " n=" + fmt(ctx.c.n[i]), [&](CsvTable::Row& row) {
                if (!err.empty()) throw Error(err);
                const UpperBoundRow& r = rep.rows[i];
                row.num(r.max_dev).num(r.bound).num(r.scaled).num(rep.c_fit);
                row.integer(rep.ok ? 1 : 0);
              });
    }
  }
}

void avalanche_rows(Context& ctx, CsvTable& t) {
  const std::vector<double> xs = random_phases(ctx.c, "avalanche");
  for (cplx e : ctx.c.energies) {
    for (std::size_t n : ctx.c.n) {
      const double l = ctx.c.block_length > 0.0 ? ctx.c.block_length
                                                 : std::max(1.0, static_cast<double>(n) / 8.0);
      for (double x : xs) {
        guarded(ctx, t, {fmt(e.real()), fmt(e.imag()), fmt(n), fmt(x), fmt(l)},
                energy_label(e) + " n=" + fmt(n) + " x=" + fmt(x), [&](CsvTable::Row& row) {
                  const BlockPlan plan = make_block_plan(n, l);
                  const AppliedApResult r =
                      ap_on_cocycle(ctx.model, e, PhasePoint{x, 0.0}, plan, ctx.c.zero_tol);
                  const ApReport& u = r.report_u;
                  row.integer(static_cast<long long>(plan.blocks()));
                  row.num(std::exp(u.min_log_norm));
                  row.integer(u.hyp_det_ok).integer(u.hyp_norm_ok).integer(u.hyp_pair_ok);
                  row.num(u.lhs_discrepancy).num(u.bound).num(u.three_term);
                  row.num(r.three_term_a).num(r.transported_discrepancy_a);
                });
      }
    }
  }
}

void eigcount_rows(Context& ctx, CsvTable& t) {
  for (cplx e : ctx.c.energies) {
    for (std::size_t n : ctx.c.n) {
      WindowCountResult res;
      std::string err;
      try {
        if (e.imag() != 0.0) throw DomainError("eigcount needs a real energy");
        res = max_window_count(ctx.model, n, e.real(), ctx.c.exponents.C1, ctx.c.x_grid);
      } catch (const Error& ex) {
        err = ex.what();
      }
      for (std::size_t i = 0; i < ctx.c.x_grid; ++i) {
        const double x = static_cast<double>(i) / static_cast<double>(ctx.c.x_grid);
        guarded(ctx, t, {fmt(e.real()), fmt(n), fmt(x)},
                energy_label(e) + " n=" + fmt(n) + " x=" + fmt(x), [&](CsvTable::Row& row) {
                  if (!err.empty()) throw Error(err);
                  const WindowCountRow& r = res.rows[i];
                  row.num(res.radius).integer(static_cast<long long>(r.count));
                  row.num(r.below).num(r.above).integer(static_cast<long long>(res.max_count));
                  row.num(std::pow(std::log(static_cast<double>(n)), 3.0));
                });
      }
    }
  }
}

void zerocount_rows(Context& ctx, CsvTable& t) {
  const std::vector<double> xs = random_phases(ctx.c, "zerocount");
  for (cplx e : ctx.c.energies) {
    for (std::size_t n : ctx.c.n) {
      std::vector<WindingResult> res(xs.size());
      std::vector<std::string> errs(xs.size());
      parallel_for(xs.size(), [&](std::size_t i) {
        try {
          res[i] = winding_count_perturbed(ctx.model, e, n,
                                           Disk::around(xs[i], 1.0 / static_cast<double>(n)));
        } catch (const Error& ex) {
          errs[i] = ex.what();
        }
      });
      for (std::size_t i = 0; i < xs.size(); ++i) {
        guarded(ctx, t, {fmt(e.real()), fmt(e.imag()), fmt(n), fmt(xs[i])},
                energy_label(e) + " n=" + fmt(n) + " x0=" + fmt(xs[i]), [&](CsvTable::Row& row) {
                  if (!errs[i].empty()) throw Error(errs[i]);
                  row.num(res[i].radius).integer(res[i].count);
                  row.integer(static_cast<long long>(res[i].contour_samples));
                  row.num(std::pow(std::log(static_cast<double>(n)), 3.0));
                });
      }
    }
  }
}

void jensen_rows(Context& ctx, CsvTable& t) {
  const std::vector<double> xs = random_phases(ctx.c, "jensen");
  for (cplx e : ctx.c.energies) {
    for (std::size_t n : ctx.c.n) {
      for (double x : xs) {
        guarded(ctx, t, {fmt(e.real()), fmt(e.imag()), fmt(n), fmt(x)},
                energy_label(e) + " n=" + fmt(n) + " x=" + fmt(x), [&](CsvTable::Row& row) {
                  const JensenResult r = jensen_check(ctx.model, PhasePoint{x, 0.0}, n, e,
                                                      ctx.c.jensen_radius, ctx.c.quad);
                  row.num(r.radius).num(r.lhs).num(r.rhs).num(std::abs(r.lhs - r.rhs));
                  row.integer(static_cast<long long>(r.zeros_inside)).integer(r.attempts);
                });
      }
    }
  }
}

void goodset_rows(Context& ctx, CsvTable& t) {
  for (cplx e : ctx.c.energies) {
    for (std::size_t n : ctx.c.n) {
      guarded(ctx, t, {fmt(e.real()), fmt(e.imag()), fmt(n), fmt(ctx.c.exponents.sigma),
                       fmt(ctx.c.grid), std::to_string(ctx.c.seed), ctx.c.goodset_inverse},
              energy_label(e) + " N=" + fmt(n), [&](CsvTable::Row& row) {
                GoodSetSpec spec;
                spec.N = n;
                spec.sigma = ctx.c.exponents.sigma;
                spec.budget = ctx.c.goodset_budget;
                spec.inverse = ctx.c.goodset_inverse == "absolute"
                                   ? InverseNormCondition::absolute
                                   : InverseNormCondition::deviation;
                const GoodSetReport r = good_set_measure(spec, ctx.model, e, phase_grid(ctx.c));
                ctx.excluded(static_cast<double>(r.excluded) / static_cast<double>(ctx.c.grid));
                row.num(r.L).num(r.D).num(r.threshold).num(r.complement_measure);
                row.integer(static_cast<long long>(r.failed_norm));
                row.integer(static_cast<long long>(r.failed_inverse));
                row.integer(static_cast<long long>(r.failed_b));
                row.integer(static_cast<long long>(r.excluded));
              });
    }
  }
}

void diophantine_rows(Context& ctx, CsvTable& t) {
  const double omega = ctx.model.omega;
  const Exponents& x = ctx.c.exponents;
  DiophantineCheck check;
  ContinuedFraction cf;
  std::string err;
  try {
    check = verify(omega, x.C_omega, x.alpha, ctx.c.horizon);
    cf = expand(omega, 96);
  } catch (const Error& ex) {
    err = ex.what();
  }
  if (!err.empty()) {
    guarded(ctx, t, {}, "omega=" + fmt(omega), [&](CsvTable::Row&) { throw Error(err); });
    return;
  }
  for (std::size_t s = 0; s < cf.size(); ++s) {
    const auto q = static_cast<long long>(cf.q[s]);
    if (q > ctx.c.horizon) break;
    guarded(ctx, t, {std::to_string(s)}, "s=" + std::to_string(s), [&](CsvTable::Row& row) {
      const double norm = torus_norm(omega, q);
      const double dq = static_cast<double>(q);
      row.integer(cf.quotients[s]).integer(static_cast<long long>(cf.p[s])).integer(q);
      row.num(norm).num(norm * dq * std::pow(std::log(dq + 1.0), x.alpha));
      row.num(x.C_omega).integer(check.ok ? 1 : 0).integer(check.worst_n).num(check.worst_ratio);
    });
  }
}

std::vector<std::string> header_for(const std::string& name) {
  if (name == "lyapunov") {
    return {"E_re", "E_im", "n", "r", "grid", "seed", "L_a", "L_plain", "L_u", "D", "D_tilde",
            "plain_identity_err", "unimodular_identity_err", "excluded_fraction", "status"};
  }
  if (name == "ldt") {
    return {"statistic", "n", "delta", "grid", "seed", "E_re", "E_im", "empirical_measure",
            "max_deviation", "mean", "excluded_fraction", "status"};
  }
  if (name == "entries-ldt") {
    return {"statistic", "n",    "delta",      "grid", "seed",       "E_re",
            "E_im",      "empirical_measure",  "max_deviation",      "mean",
            "excluded_fraction", "mean_log_f", "nL_a", "gap",        "status"};
  }
  if (name == "convergence") {
    return {"E_re", "E_im", "n", "grid", "seed", "L_a", "L_ref", "scaled", "empirical_constant",
            "positive_ratio", "status"};
  }
  if (name == "upper") {
    return {"E_re", "E_im", "n", "grid", "seed", "max_dev", "bound", "scaled", "c_fit", "ok",
            "status"};
  }
  if (name == "avalanche") {
    return {"E_re",    "E_im",     "n",           "x",           "block_length",
            "m",       "mu",       "det_ok",      "norm_ok",     "pair_ok",
            "discrepancy", "bound", "three_term_u", "three_term_a", "transport_err", "status"};
  }
  if (name == "eigcount") {
    return {"E0", "n", "x", "radius", "count", "below", "above", "max_count", "log_n_cubed",
            "status"};
  }
  if (name == "zerocount") {
    return {"E_re", "E_im", "n", "x0", "radius", "count", "contour_samples", "log_n_cubed",
            "status"};
  }
  if (name == "jensen") {
    return {"E_re", "E_im", "n", "x", "R", "lhs", "rhs", "abs_diff", "zeros_inside", "attempts",
            "status"};
  }
  if (name == "goodset") {
    return {"E_re", "E_im", "N", "sigma", "grid", "seed", "inverse", "L", "D", "threshold",
            "complement_measure", "failed_norm", "failed_inverse", "failed_b", "excluded",
            "status"};
  }
  if (name == "diophantine") {
    return {"s", "quotient", "p", "q", "torus_norm", "ratio", "C_omega", "ok", "worst_n",
            "worst_ratio", "status"};
  }
  throw ConfigError("experiments", "unknown experiment '" + name + "'");
}

}  // namespace

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = {
      "lyapunov", "ldt",     "entries-ldt", "convergence", "upper",       "avalanche",
      "eigcount", "zerocount", "jensen",    "goodset",     "diophantine"};
  return names;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CsvTable::Row& CsvTable::Row::num(double v) {
  cells_.push_back(format_double(v));
  return *this;
}

CsvTable::Row& CsvTable::Row::integer(long long v) {
  cells_.push_back(std::to_string(v));
  return *this;
}

CsvTable::Row& CsvTable::Row::text(const std::string& v) {
  cells_.push_back(v);
  return *this;
}

void CsvTable::Row::end() {
  const std::size_t width = table_->header_.size();
  if (cells_.size() + 1 != width) {
    throw Error("csv row has " + std::to_string(cells_.size()) + " cells, header expects " +
                std::to_string(width - 1));
  }
  cells_.push_back("ok");
  table_->rows_.push_back(std::move(cells_));
}

void CsvTable::Row::fail() {
  const std::size_t width = table_->header_.size();
  while (cells_.size() + 1 < width) cells_.push_back("nan");
  cells_.resize(width - 1);
  cells_.push_back("error");
  table_->rows_.push_back(std::move(cells_));
}

std::string CsvTable::str() const {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  line(header_);
  for (const auto& r : rows_) line(r);
  return out;
}

json to_json(const ExperimentConfig& c) {
  json model = {{"preset", c.model.preset}, {"lambda", c.model.lambda}};
  if (c.model.preset == "custom") {
    model["a"] = c.model.a;
    model["b"] = c.model.b;
  }
  json omega = {{"name", c.omega.name}};
  if (!std::isnan(c.omega.value)) omega["value"] = c.omega.value;
  if (!c.omega.cf.empty()) omega["cf"] = c.omega.cf;
  json energies = json::array();
  for (cplx e : c.energies) energies.push_back(energy_to_json(e));
  const Exponents& x = c.exponents;
  return {{"schema_version", c.schema_version},
          {"model", model},
          {"omega", omega},
          {"energies", energies},
          {"n", c.n},
          {"grid", c.grid},
          {"x_grid", c.x_grid},
          {"quad", c.quad},
          {"samples", c.samples},
          {"zero_tol", c.zero_tol},
          {"radius", c.radius},
          {"block_length", c.block_length},
          {"jensen_radius", c.jensen_radius},
          {"exponents",
           {{"p", x.p}, {"C1", x.C1}, {"sigma", x.sigma}, {"alpha", x.alpha}, {"C_omega", x.C_omega}}},
          {"delta", c.delta},
          {"statistics", c.statistics},
          {"horizon", c.horizon},
          {"goodset_budget", c.goodset_budget},
          {"goodset_inverse", c.goodset_inverse},
          {"seed", c.seed},
          {"workers", c.workers},
          {"output", c.output},
          {"experiments", c.experiments}};
}

ExperimentConfig config_from_json(const json& j) {
  check_keys(j, kConfigKeys, "");
  ExperimentConfig c;
  read(j, "schema_version", c.schema_version);
  if (auto it = j.find("model"); it != j.end()) {
    check_keys(*it, {"preset", "lambda", "a", "b"}, "model.");
    read(*it, "preset", c.model.preset, "model.");
    read(*it, "lambda", c.model.lambda, "model.");
    read(*it, "a", c.model.a, "model.");
    read(*it, "b", c.model.b, "model.");
  }
  if (auto it = j.find("omega"); it != j.end()) {
    if (it->is_number()) {
      c.omega.name = "value";
      c.omega.value = it->get<double>();
    } else {
      check_keys(*it, {"name", "value", "cf"}, "omega.");
      read(*it, "name", c.omega.name, "omega.");
      read(*it, "value", c.omega.value, "omega.");
      read(*it, "cf", c.omega.cf, "omega.");
    }
  }
  if (auto it = j.find("energies"); it != j.end()) {
    c.energies.clear();
    if (!it->is_array()) {
      c.energies.push_back(energy_from_json(*it, "energies"));
    } else {
      for (std::size_t i = 0; i < it->size(); ++i) {
        c.energies.push_back(energy_from_json((*it)[i], "energies[" + std::to_string(i) + "]"));
      }
    }
  }
  if (auto it = j.find("n"); it != j.end() && it->is_number()) {
    c.n = {it->get<std::size_t>()};
  } else {
    read(j, "n", c.n);
  }
  read(j, "grid", c.grid);
  read(j, "x_grid", c.x_grid);
  read(j, "quad", c.quad);
  read(j, "samples", c.samples);
  read(j, "zero_tol", c.zero_tol);
  read(j, "radius", c.radius);
  read(j, "block_length", c.block_length);
  read(j, "jensen_radius", c.jensen_radius);
  if (auto it = j.find("exponents"); it != j.end()) {
    check_keys(*it, {"p", "C1", "sigma", "alpha", "C_omega"}, "exponents.");
    read(*it, "p", c.exponents.p, "exponents.");
    read(*it, "C1", c.exponents.C1, "exponents.");
    read(*it, "sigma", c.exponents.sigma, "exponents.");
    read(*it, "alpha", c.exponents.alpha, "exponents.");
    read(*it, "C_omega", c.exponents.C_omega, "exponents.");
  }
  read(j, "delta", c.delta);
  read(j, "statistics", c.statistics);
  read(j, "horizon", c.horizon);
  read(j, "goodset_budget", c.goodset_budget);
  read(j, "goodset_inverse", c.goodset_inverse);
  read(j, "seed", c.seed);
  read(j, "workers", c.workers);
  read(j, "output", c.output);
  read(j, "experiments", c.experiments);
  validate(c);
  return c;
}

void validate(const ExperimentConfig& c) {
  if (c.schema_version != kSchemaVersion) {
    throw ConfigError("schema_version", "expected " + std::to_string(kSchemaVersion));
  }
  const std::string& p = c.model.preset;
  if (p == "extended_harper") {
    if (c.model.lambda.size() != 3) throw ConfigError("model.lambda", "needs three couplings");
  } else if (p == "almost_mathieu") {
    if (c.model.lambda.size() != 1) throw ConfigError("model.lambda", "needs one coupling");
  } else if (p == "custom") {
    if (c.model.b.empty()) throw ConfigError("model.b", "custom model needs b coefficients");
  } else if (p != "free") {
    throw ConfigError("model.preset", "unknown preset '" + p + "'");
  }
  try {
    expand(resolve_omega(c.omega), 40);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError("omega", e.what());
  }
  if (c.energies.empty()) throw ConfigError("energies", "must not be empty");
  if (c.n.empty()) throw ConfigError("n", "must not be empty");
  for (std::size_t n : c.n) {
    if (n < 1) throw ConfigError("n", "entries must be at least 1");
  }
  if (c.grid < 64) throw ConfigError("grid", "must be at least 64");
  if (c.x_grid < 1) throw ConfigError("x_grid", "must be at least 1");
  if (c.quad < 16) throw ConfigError("quad", "must be at least 16");
  if (c.samples < 1) throw ConfigError("samples", "must be at least 1");
  if (!(c.zero_tol >= 0.0)) throw ConfigError("zero_tol", "must be nonnegative");
  if (!(c.radius > 0.0)) throw ConfigError("radius", "must be positive");
  if (!(c.block_length >= 0.0)) throw ConfigError("block_length", "must be nonnegative");
  if (!(c.jensen_radius > 0.0)) throw ConfigError("jensen_radius", "must be positive");
  const Exponents& x = c.exponents;
  if (!(x.sigma > 0.0 && x.sigma < 1.0)) throw ConfigError("exponents.sigma", "must lie in (0, 1)");
  if (!(x.alpha > 1.0)) throw ConfigError("exponents.alpha", "must exceed 1");
  if (!(x.C_omega >= 0.0)) throw ConfigError("exponents.C_omega", "must be nonnegative");
  if (!(x.C1 > 0.0)) throw ConfigError("exponents.C1", "must be positive");
  for (double d : c.delta) {
    if (!(d >= 0.0)) throw ConfigError("delta", "entries must be nonnegative");
  }
  for (const std::string& s : c.statistics) {
    if (s != "norm_a" && s != "norm_u" && s != "entry_a") {
      throw ConfigError("statistics", "unknown statistic '" + s + "'");
    }
  }
  if (c.horizon < 1 || c.horizon > 100000000) throw ConfigError("horizon", "must lie in [1, 1e8]");
  if (!(c.goodset_budget > 0.0)) throw ConfigError("goodset_budget", "must be positive");
  if (c.goodset_inverse != "deviation" && c.goodset_inverse != "absolute") {
    throw ConfigError("goodset_inverse", "must be deviation or absolute");
  }
  if (c.output.empty()) throw ConfigError("output", "must not be empty");
  const auto& names = experiment_names();
  for (const std::string& e : c.experiments) {
    if (std::find(names.begin(), names.end(), e) == names.end()) {
      throw ConfigError("experiments", "unknown experiment '" + e + "'");
    }
    if (std::count(c.experiments.begin(), c.experiments.end(), e) > 1) {
      throw ConfigError("experiments", "'" + e + "' listed twice");
    }
  }
}

void apply_override(json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError(assignment, "override must look like path=value");
  }
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  json* node = &j;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? dot : dot - start);
    if (key.empty()) throw ConfigError(path, "empty path component");
    if (!node->is_object()) *node = json::object();
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    node = &(*node)[key];
    start = dot + 1;
  }
}

double resolve_omega(const OmegaSpec& spec) {
  if (spec.name == "golden") return (std::sqrt(5.0) - 1.0) / 2.0;
  if (spec.name == "silver") return std::sqrt(2.0) - 1.0;
  if (spec.name == "value") {
    if (!(spec.value > 0.0 && spec.value < 1.0)) throw ConfigError("omega.value", "must lie in (0, 1)");
    return spec.value;
  }
  if (spec.name == "cf") {
    if (spec.cf.empty()) throw ConfigError("omega.cf", "needs partial quotients");
    double x = (std::sqrt(5.0) - 1.0) / 2.0;
    for (auto it = spec.cf.rbegin(); it != spec.cf.rend(); ++it) {
      if (*it < 1) throw ConfigError("omega.cf", "partial quotients must be positive");
      x = 1.0 / (static_cast<double>(*it) + x);
    }
    return x;
  }
  throw ConfigError("omega.name", "unknown frequency '" + spec.name + "'");
}

JacobiModel make_model(const ModelSpec& spec, double omega) {
  if (spec.preset == "extended_harper") {
    return JacobiModel::extended_harper(spec.lambda.at(0), spec.lambda.at(1), spec.lambda.at(2),
                                        omega);
  }
  if (spec.preset == "almost_mathieu") return JacobiModel::almost_mathieu(spec.lambda.at(0), omega);
  if (spec.preset == "free") {
    return JacobiModel(SamplingFunction::constant(0.0), SamplingFunction::constant(1.0), omega);
  }
  return JacobiModel(SamplingFunction::from_triples(spec.a), SamplingFunction::from_triples(spec.b),
                     omega);
}

std::string config_hash(const ExperimentConfig& c) {
  // where and how fast the results are written does not change them
  json hashed = to_json(c);
  hashed.erase("output");
  hashed.erase("workers");
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a(hashed.dump())));
  return buf;
}

std::size_t ResultManifest::error_count() const {
  std::size_t total = 0;
  for (const ManifestRow& r : rows) total += r.errors.size();
  return total;
}

json ResultManifest::to_json() const {
  json out = {{"schema_version", kSchemaVersion},
              {"config_hash", config_hash},
              {"tool_version", tool_version},
              {"runs", json::array()}};
  for (const ManifestRow& r : rows) {
    json errors = json::array();
    for (const RowError& e : r.errors) {
      errors.push_back({{"row", e.row}, {"params", e.params}, {"message", e.message}});
    }
    out["runs"].push_back({{"experiment", r.experiment},
                           {"output", r.output_file},
                           {"wall_seconds", r.wall_seconds},
                           {"rows", r.rows},
                           {"max_excluded_fraction", r.max_excluded_fraction},
                           {"errors", errors}});
  }
  return out;
}

CsvTable run_experiment(const std::string& name, const ExperimentConfig& c, ManifestRow& record) {
  CsvTable table(header_for(name));
  record.experiment = name;
  JacobiModel model = make_model(c.model, resolve_omega(c.omega));
  Context ctx{c, std::move(model), record};
  if (name == "lyapunov") {
    lyapunov_rows(ctx, table);
  } else if (name == "ldt") {
    deviation_rows(ctx, table, c.statistics, false);
  } else if (name == "entries-ldt") {
    deviation_rows(ctx, table, {"entry_a"}, true);
  } else if (name == "convergence") {
    convergence_rows(ctx, table);
  } else if (name == "upper") {
    upper_rows(ctx, table);
  } else if (name == "avalanche") {
    avalanche_rows(ctx, table);
  } else if (name == "eigcount") {
    eigcount_rows(ctx, table);
  } else if (name == "zerocount") {
    zerocount_rows(ctx, table);
  } else if (name == "jensen") {
    jensen_rows(ctx, table);
  } else if (name == "goodset") {
    goodset_rows(ctx, table);
  } else if (name == "diophantine") {
    diophantine_rows(ctx, table);
  }
  record.rows = table.size();
  return table;
}

ResultManifest run(const ExperimentConfig& c) {
  validate(c);
  set_worker_count(c.workers);
  ResultManifest manifest;
  manifest.config_hash = config_hash(c);
  namespace fs = std::filesystem;
  fs::create_directories(c.output);
  for (const std::string& name : c.experiments) {
    ManifestRow record;
    const auto t0 = std::chrono::steady_clock::now();
    const CsvTable table = run_experiment(name, c, record);
    record.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    record.output_file = name + ".csv";
    std::ofstream out(fs::path(c.output) / record.output_file, std::ios::binary);
    out << table.str();
    manifest.rows.push_back(std::move(record));
  }
  std::ofstream mf(fs::path(c.output) / "manifest.json", std::ios::binary);
  mf << manifest.to_json().dump(2) << '\n';
  return manifest;
}

}  // namespace qpj
