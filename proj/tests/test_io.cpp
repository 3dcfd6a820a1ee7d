#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fluidpert/errors.hpp"
#include "fluidpert/io.hpp"

using namespace fluidpert;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::Singular;
}

}  // namespace

TEST(ParseModel, Fields) {
  const ModelInput in = parse_model(Json::parse(
      R"({"A": [[-1, 1], [2, -2]], "c": [0.5, -1], "labels": ["a", "b"]})"));
  EXPECT_EQ(in.A(1, 0), 2.0);
  EXPECT_EQ(in.c(0), 0.5);
  EXPECT_EQ(in.labels, (std::vector<std::string>{"a", "b"}));
  EXPECT_TRUE(parse_model(Json::parse(R"({"A": [[0]], "c": [1]})")).labels.empty());
}

TEST(ParseModel, Errors) {
  EXPECT_EQ(code_of([] { parse_model(Json::parse(R"({"A": [[0]]})")); }), ErrorCode::Parse);
  EXPECT_EQ(code_of([] { parse_model(Json::parse(R"({"A": [[0, 1], [1]], "c": [1, 1]})")); }),
            ErrorCode::Parse);
  EXPECT_EQ(code_of([] { parse_model(Json::parse(R"({"A": [["x"]], "c": [1]})")); }),
            ErrorCode::Parse);
  EXPECT_EQ(code_of([] { parse_model(Json::parse(R"({"A": [[0]], "c": [1], "labels": [3]})")); }),
            ErrorCode::Parse);
  EXPECT_EQ(code_of([] { load_model_file("/nonexistent/model.json"); }), ErrorCode::IO);
  EXPECT_EQ(code_of([] { load_model_file(DATA_DIR "/not_json.json"); }), ErrorCode::Parse);
}

TEST(ParsePerturbation, Kinds) {
  const PerturbationInput g =
      parse_perturbation(Json::parse(R"({"kind": "generator", "direction": [[-1, 1], [0, 0]]})"));
  EXPECT_EQ(g.kind, PerturbationKind::Generator);
  EXPECT_EQ(g.generator_direction(0, 1), 1.0);
  const PerturbationInput r =
      parse_perturbation(Json::parse(R"({"kind": "rate", "direction": [0.5, 0]})"));
  EXPECT_EQ(r.kind, PerturbationKind::Rate);
  EXPECT_EQ(r.rate_direction(0), 0.5);
  EXPECT_EQ(code_of([] { load_perturbation_file(DATA_DIR "/bad_kind.json"); }), ErrorCode::Parse);
  EXPECT_EQ(code_of([] { parse_perturbation(Json::parse(R"({"kind": "rate"})")); }),
            ErrorCode::Parse);
}

TEST(ModelJson, RoundTrip) {
  Matrix a(2, 2);
  a << -0.1, 0.1, 1.0 / 3.0, -1.0 / 3.0;
  Vector c(2);
  c << 1e-17, -2.5;
  const ModelInput back = parse_model(Json::parse(model_to_json(a, c, {"x", "y"}).dump()));
  EXPECT_EQ(back.A, a);
  EXPECT_EQ(back.c, c);
  EXPECT_EQ(back.labels, (std::vector<std::string>{"x", "y"}));
}

TEST(Labels, Fallback) {
  Matrix a(2, 2);
  a << -1, 1, 1, -1;
  Vector c(2);
  c << 1, -1;
  EXPECT_EQ(phase_labels(validate_model(a, c)), (std::vector<std::string>{"phase1", "phase2"}));
  EXPECT_EQ(phase_labels(validate_model(a, c, {"u", "d"})), (std::vector<std::string>{"u", "d"}));
}

TEST(Csv, NumbersRoundTripAt17Digits) {
  EXPECT_EQ(format_number(0.1), "0.10000000000000001");
  EXPECT_EQ(format_number(1.0), "1");
  EXPECT_EQ(format_number(-2.5e-12), "-2.4999999999999998e-12");
  for (double v : {1.0 / 3.0, 2.0 / 7.0, 1e-300, -123456.789}) {
    EXPECT_EQ(std::stod(format_number(v)), v);
  }
}

TEST(Csv, QuotingAndRows) {
  std::ostringstream s;
  CsvWriter w(s);
  w.header({"a", "b,c"});
  w.field("say \"hi\"").field(0.5);
  w.end_row();
  EXPECT_EQ(s.str(), "a,\"b,c\"\n\"say \"\"hi\"\"\",0.5\n");
}

TEST(Csv, MatrixLayout) {
  Matrix m(2, 2);
  m << 1, 2, 3, 4;
  std::ostringstream s;
  write_matrix_csv(s, m, {"r1", "r2"}, {"c1", "c2"});
  EXPECT_EQ(s.str(), "row,c1,c2\nr1,1,2\nr2,3,4\n");
}

TEST(Manifest, Fields) {
  RunManifest m;
  m.command = "psi";
  m.inputs = {"model.json"};
  m.options = {{"tol", 1e-12}};
  const Json j = m.to_json();
  EXPECT_EQ(j["command"], "psi");
  EXPECT_EQ(j["inputs"][0], "model.json");
  EXPECT_EQ(j["tool_version"], tool_version());
  EXPECT_TRUE(j.contains("wall_time_s"));
  EXPECT_TRUE(j.contains("diagnostics"));
}

TEST(Files, WriteAndFail) {
  const std::string path =
      (std::filesystem::temp_directory_path() / "fluidpert_io_test.txt").string();
  write_text_file(path, "hello\n");
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "hello");
  std::remove(path.c_str());
  EXPECT_EQ(code_of([] { write_text_file("/nonexistent/dir/x.txt", "x"); }), ErrorCode::IO);
}
