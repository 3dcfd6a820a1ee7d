#include "fluidpert/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "fluidpert/errors.hpp"

namespace fluidpert {
namespace {

Json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IO, "cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::Parse, path + ": " + e.what());
  }
}

Vector to_vector(const Json& j, const char* what) {
  if (!j.is_array()) throw Error(ErrorCode::Parse, std::string(what) + " must be an array");
  Vector v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) {
      throw Error(ErrorCode::Parse, std::string(what) + " entries must be numbers");
    }
    v(i) = j[i].get<double>();
  }
  return v;
}

Matrix to_matrix(const Json& j, const char* what) {
  if (!j.is_array()) throw Error(ErrorCode::Parse, std::string(what) + " must be an array of rows");
  const std::size_t rows = j.size();
  const std::size_t cols = rows == 0 ? 0 : j[0].size();
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    const Vector row = to_vector(j[i], what);
    if (static_cast<std::size_t>(row.size()) != cols) {
      throw Error(ErrorCode::Parse, std::string(what) + " rows differ in length");
    }
    m.row(i) = row.transpose();
  }
  return m;
}

}  // namespace

ModelInput parse_model(const Json& j) {
  if (!j.is_object() || !j.contains("A") || !j.contains("c")) {
    throw Error(ErrorCode::Parse, "model needs fields \"A\" and \"c\"");
  }
  ModelInput in;
  in.A = to_matrix(j.at("A"), "A");
  in.c = to_vector(j.at("c"), "c");
  if (j.contains("labels")) {
    const Json& l = j.at("labels");
    if (!l.is_array()) throw Error(ErrorCode::Parse, "labels must be an array");
    for (const Json& s : l) {
      if (!s.is_string()) throw Error(ErrorCode::Parse, "labels must be strings");
      in.labels.push_back(s.get<std::string>());
    }
  }
  return in;
}

ModelInput load_model_file(const std::string& path) {
  return parse_model(read_json(path));
}

PerturbationInput parse_perturbation(const Json& j) {
  if (!j.is_object() || !j.contains("kind") || !j.contains("direction") ||
      !j.at("kind").is_string()) {
    throw Error(ErrorCode::Parse, "perturbation needs \"kind\" and \"direction\"");
  }
  PerturbationInput in;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "generator") {
    in.kind = PerturbationKind::Generator;
    in.generator_direction = to_matrix(j.at("direction"), "direction");
  } else if (kind == "rate") {
    in.kind = PerturbationKind::Rate;
    in.rate_direction = to_vector(j.at("direction"), "direction");
  } else {
    throw Error(ErrorCode::Parse, "kind must be \"generator\" or \"rate\"");
  }
  return in;
}

PerturbationInput load_perturbation_file(const std::string& path) {
  return parse_perturbation(read_json(path));
}

PerturbationSpec make_perturbation(const FluidModel& model,
                                   const PerturbationInput& input) {
  if (input.kind == PerturbationKind::Generator) {
    return make_generator_perturbation(model, input.generator_direction);
  }
  return make_rate_perturbation(model, input.rate_direction);
}

Json model_to_json(const Matrix& a, const Vector& c,
                   const std::vector<std::string>& labels) {
  Json j;
  j["A"] = matrix_to_json(a);
  j["c"] = std::vector<double>(c.data(), c.data() + c.size());
  if (!labels.empty()) j["labels"] = labels;
  return j;
}

std::vector<std::string> phase_labels(const FluidModel& model) {
  std::vector<std::string> out = model.labels();
  if (out.size() != static_cast<std::size_t>(model.size())) {
    out.clear();
    for (Eigen::Index i = 0; i < model.size(); ++i) {
      out.push_back("phase" + std::to_string(i + 1));
    }
  }
  return out;
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void CsvWriter::header(const std::vector<std::string>& names) {
  for (const auto& n : names) field(n);
  end_row();
}

CsvWriter& CsvWriter::field(const std::string& s) {
  if (!first_) out_ << ',';
  first_ = false;
  if (s.find_first_of(",\"\n") == std::string::npos) {
    out_ << s;
  } else {
    out_ << '"';
    for (char ch : s) {
      if (ch == '"') out_ << '"';
      out_ << ch;
    }
    out_ << '"';
  }
  return *this;
}

CsvWriter& CsvWriter::field(double v) { return field(format_number(v)); }

void CsvWriter::end_row() {
  out_ << '\n';
  first_ = true;
}

void write_matrix_csv(std::ostream& out, const Matrix& m,
                      const std::vector<std::string>& row_labels,
                      const std::vector<std::string>& col_labels,
                      const std::string& corner) {
  CsvWriter csv(out);
  csv.field(corner);
  for (const auto& c : col_labels) csv.field(c);
  csv.end_row();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    csv.field(row_labels.at(i));
    for (Eigen::Index j = 0; j < m.cols(); ++j) csv.field(m(i, j));
    csv.end_row();
  }
}

Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

Json RunManifest::to_json() const {
  Json j;
  j["command"] = command;
  j["inputs"] = inputs;
  j["options"] = options;
  j["tool_version"] = tool_version();
  j["wall_time_s"] = wall_time_s;
  j["diagnostics"] = diagnostics;
  return j;
}

std::string tool_version() { return "fluidpert 0.1.0"; }

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IO, "cannot write " + path);
  out << text;
  if (!out) throw Error(ErrorCode::IO, "write failed for " + path);
}

}  // namespace fluidpert
