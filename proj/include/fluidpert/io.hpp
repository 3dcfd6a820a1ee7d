#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "fluidpert/core.hpp"

namespace fluidpert {

using Json = nlohmann::json;

/// Raw contents of a model file {"A": [[...]], "c": [...], "labels": [...]}.
struct ModelInput {
  Matrix A;
  Vector c;
  std::vector<std::string> labels;
};

/// Throws IO (unreadable file) or Parse (bad JSON / shape).
ModelInput load_model_file(const std::string& path);
ModelInput parse_model(const Json& j);

/// Raw contents of a perturbation file
/// {"kind": "generator"|"rate", "direction": [[...]] | [...]}.
struct PerturbationInput {
  PerturbationKind kind = PerturbationKind::Generator;
  Matrix generator_direction;
  Vector rate_direction;
};

PerturbationInput load_perturbation_file(const std::string& path);
PerturbationInput parse_perturbation(const Json& j);

/// Validates the direction against the model and classifies the regime.
PerturbationSpec make_perturbation(const FluidModel& model,
                                   const PerturbationInput& input);

Json model_to_json(const Matrix& a, const Vector& c,
                   const std::vector<std::string>& labels = {});

/// Labels for every phase, falling back to "phase<i>" (1-based).
std::vector<std::string> phase_labels(const FluidModel& model);

/// %.17g, round-trip safe.
std::string format_number(double v);

/// Minimal CSV emitter: comma separated, fields containing commas or quotes
/// are quoted.
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}
  void header(const std::vector<std::string>& names);
  CsvWriter& field(const std::string& s);
  CsvWriter& field(double v);
  void end_row();

 private:
  std::ostream& out_;
  bool first_ = true;
};

/// Writes one row per matrix row: row label, then entries.
void write_matrix_csv(std::ostream& out, const Matrix& m,
                      const std::vector<std::string>& row_labels,
                      const std::vector<std::string>& col_labels,
                      const std::string& corner = "row");

Json matrix_to_json(const Matrix& m);

/// Provenance record written next to every output.
struct RunManifest {
  std::string command;
  std::vector<std::string> inputs;
  Json options = Json::object();
  Json diagnostics = Json::object();
  double wall_time_s = 0.0;

  Json to_json() const;
};

std::string tool_version();

/// Writes `text` to `path`, throwing IO on failure.
void write_text_file(const std::string& path, const std::string& text);

}  // namespace fluidpert
