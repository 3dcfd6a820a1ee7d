// fluidpert command-line front end.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <fstream>
#include <optional>
#include <iostream>
#include <sstream>

#include "fluidpert/bench.hpp"
#include "fluidpert/density.hpp"
#include "fluidpert/errors.hpp"
#include "fluidpert/io.hpp"
#include "fluidpert/perturb.hpp"
#include "fluidpert/riccati.hpp"
#include "fluidpert/simulate.hpp"

using namespace fluidpert;

namespace {

struct Options {
  std::string model_path;
  std::string pert_path;
  std::string out;
  std::string case_id;
  std::string eps_grid = "1e-4:1e-2:20";
  std::string x_grid = "0.5:5:10";
  std::string mode = "psi";
  std::vector<double> eps_check;
  double tol = 1e-12;
  double drift = kCaseDrift;
  double max_time = 1e4;
  double bin_width = 0.1;
  int bins = 100;
  std::int64_t replications = 10000;
  std::uint64_t seed = 1;
  bool json = false;
  bool csv = false;
};

struct Grid {
  double a;
  double b;
  int n;
};

Grid parse_grid(const std::string& text, const char* flag) {
  std::istringstream in(text);
  Grid g{};
  char c1 = 0;
  char c2 = 0;
  if (!(in >> g.a >> c1 >> g.b >> c2 >> g.n) || c1 != ':' || c2 != ':' || g.n < 1 ||
      !in.eof()) {
    throw Error(ErrorCode::Parse, std::string(flag) + " expects A:B:N, got '" + text + "'");
  }
  return g;
}

std::vector<std::string> select(const std::vector<std::string>& labels,
                                const IndexList& idx) {
  std::vector<std::string> out;
  for (auto i : idx) out.push_back(labels[i]);
  return out;
}

// Sends a CSV body to --out (manifest beside it) or to stdout (manifest on
// stderr).
void emit_csv(const Options& o, const std::string& body, RunManifest manifest,
              std::chrono::steady_clock::time_point start) {
  manifest.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (o.out.empty()) {
    std::cout << body;
    std::cerr << manifest.to_json().dump() << '\n';
  } else {
    write_text_file(o.out, body);
    write_text_file(o.out + ".manifest.json", manifest.to_json().dump(2) + "\n");
  }
}

void emit_json(const Options& o, Json body, RunManifest manifest,
               std::chrono::steady_clock::time_point start) {
  manifest.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  body["manifest"] = manifest.to_json();
  if (o.out.empty()) {
    std::cout << body.dump(2) << '\n';
  } else {
    write_text_file(o.out, body.dump(2) + "\n");
    write_text_file(o.out + ".manifest.json", manifest.to_json().dump(2) + "\n");
  }
}

FluidModel load_model(const std::string& path) {
  const ModelInput in = load_model_file(path);
  return validate_model(in.A, in.c, in.labels);
}

int cmd_validate(const Options& o, RunManifest m, std::chrono::steady_clock::time_point t0) {
  const FluidModel model = load_model(o.model_path);
  const auto labels = phase_labels(model);
  const RowVector xi = stationary_phase_dist(model);
  const double drift = mean_drift(model);
  Json body;
  body["valid"] = true;
  body["phases"] = model.size();
  body["labels"] = labels;
  body["partition"] = {{"plus", select(labels, model.partition().plus)},
                       {"zero", select(labels, model.partition().zero)},
                       {"minus", select(labels, model.partition().minus)}};
  body["xi"] = std::vector<double>(xi.data(), xi.data() + xi.size());
  body["drift"] = drift;
  body["recurrent"] = drift < 0.0;
  if (o.csv) {
    std::ostringstream s;
    CsvWriter csv(s);
    csv.header({"phase", "label", "rate", "class", "xi"});
    for (Eigen::Index i = 0; i < model.size(); ++i) {
      const double c = model.rates()(i);
      csv.field(std::to_string(i + 1)).field(labels[i]).field(c)
          .field(c > 0 ? "plus" : c < 0 ? "minus" : "zero").field(xi(i));
      csv.end_row();
    }
    m.diagnostics = {{"drift", drift}};
    emit_csv(o, s.str(), m, t0);
  } else {
    emit_json(o, body, m, t0);
  }
  return 0;
}

int cmd_psi(const Options& o, RunManifest m, std::chrono::steady_clock::time_point t0) {
  const FluidModel model = load_model(o.model_path);
  NewtonOptions opts;
  opts.tol = o.tol;
  const PsiSolution sol = solve_psi(model, opts);
  const auto labels = phase_labels(model);
  const auto rows = select(labels, sol.rows);
  const auto cols = select(labels, sol.cols);
  m.diagnostics = {{"iterations", sol.iterations},
                   {"residual", sol.residual},
                   {"residual_history", sol.residual_history}};
  if (o.csv) {
    std::ostringstream s;
    CsvWriter csv(s);
    csv.field("row");
    for (const auto& c : cols) csv.field(c);
    csv.field("row_sum").field("residual");
    csv.end_row();
    for (Eigen::Index i = 0; i < sol.psi.rows(); ++i) {
      csv.field(rows[i]);
      for (Eigen::Index j = 0; j < sol.psi.cols(); ++j) csv.field(sol.psi(i, j));
      csv.field(sol.psi.row(i).sum()).field(sol.residual);
      csv.end_row();
    }
    if (!o.out.empty()) {
      std::ostringstream u, k;
      write_matrix_csv(u, sol.U, cols, cols);
      write_matrix_csv(k, sol.K, rows, rows);
      write_text_file(o.out + ".U.csv", u.str());
      write_text_file(o.out + ".K.csv", k.str());
    }
    emit_csv(o, s.str(), m, t0);
  } else {
    Json body;
    body["rows"] = rows;
    body["cols"] = cols;
    body["psi"] = matrix_to_json(sol.psi);
    body["U"] = matrix_to_json(sol.U);
    body["K"] = matrix_to_json(sol.K);
    const Vector rs = sol.psi.rowwise().sum();
    body["row_sums"] = std::vector<double>(rs.data(), rs.data() + rs.size());
    body["residual"] = sol.residual;
    body["iterations"] = sol.iterations;
    emit_json(o, body, m, t0);
  }
  return 0;
}

int cmd_perturb(const Options& o, RunManifest m, std::chrono::steady_clock::time_point t0) {
  const FluidModel model = load_model(o.model_path);
  const PerturbationSpec spec = make_perturbation(model, load_perturbation_file(o.pert_path));
  NewtonOptions opts;
  opts.tol = o.tol;
  const PsiSolution base = solve_psi(model, opts);
  const PsiExpansion e = expand(model, base, spec);
  const auto labels = phase_labels(model);
  const auto rows = select(labels, e.rows);
  const auto cols = select(labels, e.cols);

  Json checks = Json::array();
  for (double eps : o.eps_check) {
    const PsiSolution pe = solve_psi_at(model, spec, eps, opts);
    const ErrorNorms n = error_norms(pe.psi, e, eps);
    auto num = [](double v) { return std::isnan(v) ? Json(nullptr) : Json(v); };
    checks.push_back({{"eps", eps},
                      {"E_plus", num(n.E_plus)},
                      {"E_oplus", num(n.E_oplus)},
                      {"E_inf", num(n.E_inf)},
                      {"E_minus", num(n.E_minus)},
                      {"E_ominus", num(n.E_ominus)}});
  }
  std::vector<std::string> aux_names;
  for (const auto& [name, _] : e.aux) aux_names.push_back(name);
  m.diagnostics = {{"regime", to_string(e.regime)},
                   {"newton_iterations", base.iterations},
                   {"residual", base.residual},
                   {"aux_blocks", aux_names},
                   {"eps_check", checks}};
  if (o.csv) {
    std::ostringstream s;
    CsvWriter csv(s);
    csv.header({"matrix", "row", "col", "value"});
    auto put = [&](const std::string& name, const Matrix& x, bool labelled) {
      for (Eigen::Index i = 0; i < x.rows(); ++i) {
        for (Eigen::Index j = 0; j < x.cols(); ++j) {
          csv.field(name);
          csv.field(labelled ? rows[i] : std::to_string(i + 1));
          csv.field(labelled ? cols[j] : std::to_string(j + 1));
          csv.field(x(i, j));
          csv.end_row();
        }
      }
    };
    put("psi_bar", e.psi_bar, true);
    put("psi1", e.psi1, true);
    for (const auto& [name, x] : e.aux) put(name, x, false);
    emit_csv(o, s.str(), m, t0);
  } else {
    Json body;
    body["regime"] = to_string(e.regime);
    body["rows"] = rows;
    body["cols"] = cols;
    body["psi_bar"] = matrix_to_json(e.psi_bar);
    body["psi1"] = matrix_to_json(e.psi1);
    Json aux = Json::object();
    for (const auto& [name, x] : e.aux) aux[name] = matrix_to_json(x);
    body["aux"] = aux;
    body["eps_check"] = checks;
    emit_json(o, body, m, t0);
  }
  return 0;
}

int cmd_density(const Options& o, RunManifest m, std::chrono::steady_clock::time_point t0) {
  const FluidModel model = load_model(o.model_path);
  const Grid g = parse_grid(o.x_grid, "--x");
  std::optional<PerturbationSpec> spec;
  if (!o.pert_path.empty()) {
    spec = make_perturbation(model, load_perturbation_file(o.pert_path));
    if (spec->kind != PerturbationKind::Generator) {
      throw Error(ErrorCode::NotGeneratorKind,
                  "density corrections need a generator perturbation");
    }
  }
  NewtonOptions opts;
  opts.tol = o.tol;
  const PsiSolution base = solve_psi(model, opts);
  const StationaryLaw law = stationary_law(model, base);
  std::optional<FirstOrderLaw> fol;
  if (spec) fol = first_order_law(model, base, law, *spec);

  const auto labels = phase_labels(model);
  std::ostringstream s;
  CsvWriter csv(s);
  csv.field("x");
  for (const auto& l : labels) csv.field("pi_" + l);
  if (fol) {
    for (const auto& l : labels) csv.field("pi1_" + l);
  }
  csv.end_row();
  for (double x : linear_grid(g.a, g.b, g.n)) {
    csv.field(x);
    const RowVector p = density_at(law, x);
    for (Eigen::Index j = 0; j < p.size(); ++j) csv.field(p(j));
    if (fol) {
      const RowVector p1 = density1_at(*fol, law, x);
      for (Eigen::Index j = 0; j < p1.size(); ++j) csv.field(p1(j));
    }
    csv.end_row();
  }
  const RowVector atoms = law.atoms();
  m.diagnostics = {{"atoms", std::vector<double>(atoms.data(), atoms.data() + atoms.size())},
                   {"continuous_mass", law.continuous_mass()},
                   {"total_mass", law.continuous_mass() + atoms.sum()},
                   {"newton_iterations", base.iterations}};
  if (o.json) {
    Json body;
    body["csv"] = s.str();
    emit_json(o, body, m, t0);
  } else {
    emit_csv(o, s.str(), m, t0);
  }
  return 0;
}

int cmd_case(const Options& o, RunManifest m, std::chrono::steady_clock::time_point t0) {
  make_case(o.case_id, o.drift);  // UnknownCase before any work
  const Grid g = parse_grid(o.eps_grid, "--eps-grid");
  const CaseResult r = run_case(o.case_id, log_grid(g.a, g.b, g.n), o.drift);

  std::ostringstream s;
  CsvWriter csv(s);
  csv.header({"case_id", "eps", "E_plus", "E_oplus", "E_inf", "slope"});
  for (std::size_t i = 0; i < r.eps_grid.size(); ++i) {
    csv.field(r.case_id).field(r.eps_grid[i]).field(r.E_plus[i]).field(r.E_oplus[i])
        .field(r.E_inf[i]).field(r.fit.slope);
    csv.end_row();
  }

  std::ostringstream summary;
  char line[200];
  std::snprintf(line, sizeof line, "case %s  regime %s  r- = %.6g  slope %.3f  R^2 %.4f\n",
                r.case_id.c_str(), to_string(r.regime), r.r_minus, r.fit.slope,
                r.fit.r_squared);
  summary << line;
  Json cells = Json::array();
  for (const CellCheck& c : r.cells) {
    std::snprintf(line, sizeof line, "  %-8s eps=%.0e  computed %.3g  reference %.3g  %s\n",
                  c.cell.norm.c_str(), c.cell.eps, c.computed, c.cell.value,
                  c.pass ? "PASS" : "FAIL");
    summary << line;
    cells.push_back({{"norm", c.cell.norm},
                     {"eps", c.cell.eps},
                     {"computed", c.computed},
                     {"reference", c.cell.value},
                     {"rel_error", c.rel_error},
                     {"pass", c.pass}});
  }
  m.diagnostics = {{"regime", to_string(r.regime)},
                   {"r_minus", r.r_minus},
                   {"slope", r.fit.slope},
                   {"r_squared", r.fit.r_squared},
                   {"newton_iterations", r.newton_iterations},
                   {"cells", cells}};
  if (o.json) {
    Json body;
    body["case_id"] = r.case_id;
    body["eps"] = r.eps_grid;
    auto nan_safe = [](const std::vector<double>& v) {
      Json a = Json::array();
      for (double x : v) a.push_back(std::isnan(x) ? Json(nullptr) : Json(x));
      return a;
    };
    body["E_plus"] = nan_safe(r.E_plus);
    body["E_oplus"] = nan_safe(r.E_oplus);
    body["E_inf"] = nan_safe(r.E_inf);
    body["E_minus"] = nan_safe(r.E_minus);
    body["E_ominus"] = nan_safe(r.E_ominus);
    body["slope"] = r.fit.slope;
    emit_json(o, body, m, t0);
    std::cerr << summary.str();
  } else {
    emit_csv(o, s.str(), m, t0);
    (o.out.empty() ? std::cerr : std::cout) << summary.str();
  }
  return 0;
}

int cmd_simulate(const Options& o, RunManifest m, std::chrono::steady_clock::time_point t0) {
  const FluidModel model = load_model(o.model_path);
  SimConfig cfg;
  cfg.replications = o.replications;
  cfg.seed = o.seed;
  cfg.max_time = o.max_time;
  const auto labels = phase_labels(model);
  std::ostringstream s;
  CsvWriter csv(s);
  if (o.mode == "psi") {
    const PsiEstimate est = estimate_psi(model, cfg);
    csv.header({"row", "col", "estimate", "stderr"});
    for (Eigen::Index i = 0; i < est.estimate.rows(); ++i) {
      for (Eigen::Index j = 0; j < est.estimate.cols(); ++j) {
        csv.field(labels[model.partition().plus[i]])
            .field(labels[model.partition().minus[j]])
            .field(est.estimate(i, j))
            .field(est.std_error(i, j));
        csv.end_row();
      }
    }
    m.diagnostics = {{"censored_fraction", est.censored_fraction}};
  } else if (o.mode == "density") {
    cfg.burn_in = 0.01 * cfg.max_time;
    const DensityHistogram h = estimate_density(model, cfg, {o.bin_width, o.bins});
    csv.field("x_lo").field("x_hi");
    for (const auto& l : labels) csv.field("density_" + l);
    csv.end_row();
    for (int b = 0; b < o.bins; ++b) {
      csv.field(h.edges(b)).field(h.edges(b + 1));
      for (Eigen::Index j = 0; j < h.density.cols(); ++j) csv.field(h.density(b, j));
      csv.end_row();
    }
    m.diagnostics = {
        {"atoms", std::vector<double>(h.atoms.data(), h.atoms.data() + h.atoms.size())},
        {"overflow",
         std::vector<double>(h.overflow.data(), h.overflow.data() + h.overflow.size())},
        {"observed_time", h.observed_time}};
  } else {
    throw Error(ErrorCode::Parse, "--mode must be psi or density");
  }
  emit_csv(o, s.str(), m, t0);
  return 0;
}

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::IO:
    case ErrorCode::Parse:
    case ErrorCode::UnknownCase:
      return 2;
    default:
      return 1;
  }
}

void print_error(std::string_view code, const std::string& message) {
  Json err;
  err["error"] = {{"code", code}, {"message", message}};
  std::cout << err.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fluid queue first-return matrices and their perturbation expansions"};
  app.require_subcommand(1);
  Options o;

  auto add_format = [&](CLI::App* sub) {
    auto* j = sub->add_flag("--json", o.json, "JSON output");
    auto* c = sub->add_flag("--csv", o.csv, "CSV output");
    j->excludes(c);
    sub->add_option("--out", o.out, "Output file (manifest written beside it)");
  };

  auto* validate = app.add_subcommand("validate", "Check a model, print partition, xi, drift");
  validate->add_option("model", o.model_path)->required();
  add_format(validate);

  auto* psi = app.add_subcommand("psi", "Solve for Psi, U and K");
  psi->add_option("model", o.model_path)->required();
  psi->add_option("--tol", o.tol, "Newton tolerance");
  add_format(psi);

  auto* perturb = app.add_subcommand("perturb", "First-order expansion of Psi");
  perturb->add_option("model", o.model_path)->required();
  perturb->add_option("perturbation", o.pert_path)->required();
  perturb->add_option("--tol", o.tol, "Newton tolerance");
  perturb->add_option("--eps-check", o.eps_check, "Compare with direct solves at these eps");
  add_format(perturb);

  auto* density = app.add_subcommand("density", "Stationary density on a grid");
  density->add_option("model", o.model_path)->required();
  density->add_option("perturbation", o.pert_path);
  density->add_option("--x", o.x_grid, "Linear grid A:B:N");
  density->add_option("--tol", o.tol, "Newton tolerance");
  add_format(density);

  auto* bench_case = app.add_subcommand("case", "Run a benchmark case");
  bench_case->add_option("--id", o.case_id, "1a, 2a, 3a, 1b, 2b or 3b")->required();
  bench_case->add_option("--eps-grid", o.eps_grid, "Log grid A:B:N");
  bench_case->add_option("--drift", o.drift, "Calibration target drift");
  add_format(bench_case);

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo estimates");
  simulate->add_option("model", o.model_path)->required();
  simulate->add_option("--mode", o.mode, "psi or density");
  simulate->add_option("--replications", o.replications)->check(CLI::PositiveNumber);
  simulate->add_option("--seed", o.seed);
  simulate->add_option("--max-time", o.max_time)->check(CLI::PositiveNumber);
  simulate->add_option("--bin-width", o.bin_width)->check(CLI::PositiveNumber);
  simulate->add_option("--bins", o.bins)->check(CLI::PositiveNumber);
  add_format(simulate);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("Usage", e.what());
    return 2;
  }

  const auto start = std::chrono::steady_clock::now();
  RunManifest manifest;
  CLI::App* sub = app.get_subcommands().front();
  manifest.command = sub->get_name();
  for (const auto& p : {o.model_path, o.pert_path}) {
    if (!p.empty()) manifest.inputs.push_back(p);
  }
  manifest.options = {{"tol", o.tol},          {"eps_grid", o.eps_grid},
                      {"x", o.x_grid},         {"seed", o.seed},
                      {"replications", o.replications},
                      {"max_time", o.max_time}, {"drift", o.drift},
                      {"eps_check", o.eps_check}, {"id", o.case_id},
                      {"mode", o.mode},        {"out", o.out},
                      {"format", o.csv ? "csv" : o.json ? "json" : "default"}};

  try {
    const std::string name = sub->get_name();
    if (name == "validate") return cmd_validate(o, manifest, start);
    if (name == "psi") return cmd_psi(o, manifest, start);
    if (name == "perturb") return cmd_perturb(o, manifest, start);
    if (name == "density") return cmd_density(o, manifest, start);
    if (name == "case") return cmd_case(o, manifest, start);
    return cmd_simulate(o, manifest, start);
  } catch (const Error& e) {
    print_error(to_string(e.code()), e.what());
    return exit_code(e.code());
  } catch (const std::exception& e) {
    print_error("Internal", e.what());
    return 1;
  }
}
