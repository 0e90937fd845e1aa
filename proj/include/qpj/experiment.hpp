#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "json.hpp"
#include "qpj/sampling.hpp"

namespace qpj {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kToolVersion = "qpjlab 1.0.0";

struct ModelSpec {
  // extended_harper (lambda = l1, l2, l3), almost_mathieu (lambda = coupling), free
  // (a = 0, b = 1), custom (a and b as (degree, re, im) triples)
  std::string preset = "extended_harper";
  std::vector<double> lambda{0.3, 1.0, 0.2};
  std::vector<std::array<double, 3>> a, b;
};

struct OmegaSpec {
  // golden, silver, value, or cf (omega = [0; cf..., 1, 1, 1, ...])
  std::string name = "golden";
  double value = std::numeric_limits<double>::quiet_NaN();
  std::vector<std::int64_t> cf;
};

struct Exponents {
  double p = 2.0;
  double C1 = 2.0;
  double sigma = 0.5;
  double alpha = 2.0;
  double C_omega = 0.1;
};

struct ExperimentConfig {
  int schema_version = kSchemaVersion;
  ModelSpec model;
  OmegaSpec omega;
  std::vector<cplx> energies{0.0};
  std::vector<std::size_t> n{100};
  std::size_t grid = 2048;     // phase grid for averages and measures
  std::size_t x_grid = 512;    // phase grid for eigenvalue counts
  std::size_t quad = 65536;    // contour quadrature for jensen
  std::size_t samples = 50;    // random phases for zerocount, jensen, avalanche
  double zero_tol = kDefaultZeroTol;
  double radius = 1.0;         // r for lyapunov
  double block_length = 0.0;   // avalanche block length; 0 picks n / 8
  double jensen_radius = 0.05;
  Exponents exponents;
  std::vector<double> delta{0.05};
  std::vector<std::string> statistics{"norm_a"};
  std::int64_t horizon = 1000000;  // diophantine N
  double goodset_budget = 5e8;
  std::string goodset_inverse = "deviation";  // or absolute
  std::uint64_t seed = 20240601;
  std::size_t workers = 0;
  std::string output = "qpj_out";
  std::vector<std::string> experiments;
};

const std::vector<std::string>& experiment_names();

nlohmann::json to_json(const ExperimentConfig& c);
// Missing fields keep their defaults; wrong types or values throw ConfigError naming the field.
ExperimentConfig config_from_json(const nlohmann::json& j);
void validate(const ExperimentConfig& c);

// "a.b.c=value" with value parsed as JSON when possible, else as a string.
void apply_override(nlohmann::json& j, const std::string& assignment);

JacobiModel make_model(const ModelSpec& spec, double omega);
double resolve_omega(const OmegaSpec& spec);

std::string config_hash(const ExperimentConfig& c);

struct RowError {
  std::size_t row = 0;
  std::string params;
  std::string message;
};

struct ManifestRow {
  std::string experiment;
  std::string output_file;
  double wall_seconds = 0.0;
  std::size_t rows = 0;
  double max_excluded_fraction = 0.0;
  std::vector<RowError> errors;
};

struct ResultManifest {
  std::string config_hash;
  std::string tool_version = kToolVersion;
  std::vector<ManifestRow> rows;

  std::size_t error_count() const;
  nlohmann::json to_json() const;
};

// Fixed-column CSV with 17 significant digits.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  class Row {
   public:
    Row& num(double v);
    Row& integer(long long v);
    Row& text(const std::string& v);
    void end();
    // Pads the remaining value columns with nan and marks the row as failed.
    void fail();

   private:
    friend class CsvTable;
    explicit Row(CsvTable* t) : table_(t) {}
    CsvTable* table_;
    std::vector<std::string> cells_;
  };

  Row row() { return Row(this); }
  std::size_t size() const noexcept { return rows_.size(); }
  std::string str() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

std::string format_double(double v);

// Computes one experiment into a table, recording per-row failures.
CsvTable run_experiment(const std::string& name, const ExperimentConfig& c, ManifestRow& record);

// Runs every listed experiment in order, writes <output>/<name>.csv and
// <output>/manifest.json.
ResultManifest run(const ExperimentConfig& c);

}  // namespace qpj
