// Command-line driver: exact counts, typical tables, heuristic estimates,
// Delta curves and grid sweeps, with deterministic CSV/JSON emission.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "bct/asymptotics.hpp"
#include "bct/exact_count.hpp"
#include "bct/experiments.hpp"
#include "bct/independence.hpp"
#include "bct/margins.hpp"
#include "bct/typical_table.hpp"
#include "bct/version.hpp"

namespace {

constexpr int exit_ok = 0;
constexpr int exit_domain = 2;
constexpr int exit_no_convergence = 3;
constexpr int exit_resource = 4;

struct MarginInput {
  std::vector<int> rows, cols;
  std::string margins_file;
  int n = 0;
  double delta = 0.0, B = 0.0, C = 0.0;

  void attach(CLI::App* cmd) {
    cmd->add_option("--rows", rows, "Row margins, comma separated")->delimiter(',');
    cmd->add_option("--cols", cols, "Column margins, comma separated")->delimiter(',');
    cmd->add_option("--margins-file", margins_file, "JSON file with {\"rows\":[],\"cols\":[]}");
    cmd->add_option("--n", n, "Family size parameter n");
    cmd->add_option("--delta", delta, "Family exponent delta in (0,1)");
    cmd->add_option("--B", B, "Family parameter B");
    cmd->add_option("--C", C, "Family parameter C");
  }

  bct::MarginPair resolve() const {
    if (!margins_file.empty()) {
      std::ifstream f(margins_file);
      if (!f) throw std::domain_error("cannot open margins file: " + margins_file);
      nlohmann::json j;
      f >> j;
      return j.get<bct::MarginPair>();
    }
    if (!rows.empty() || !cols.empty()) {
      if (rows.empty() || cols.empty())
        throw std::domain_error("--rows and --cols must be given together");
      return bct::make_margins(rows, cols);
    }
    if (n > 0) return bct::build_family_margins(bct::FamilyParams{n, delta, B, C});
    throw std::domain_error("no margins given: use --rows/--cols, --margins-file or --n/--delta/--B/--C");
  }

  nlohmann::json config_json() const {
    nlohmann::json j;
    if (!margins_file.empty()) j["margins_file"] = margins_file;
    if (!rows.empty()) j["rows"] = rows;
    if (!cols.empty()) j["cols"] = cols;
    if (n > 0) j["family"] = bct::FamilyParams{n, delta, B, C};
    return j;
  }
};

void emit(const std::string& out_path, const std::string& text, const nlohmann::json& config,
          bool sidecar) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(out_path, std::ios::binary);
  if (!f) throw std::domain_error("cannot open output file: " + out_path);
  f << text;
  if (sidecar) bct::write_sidecar(out_path, config);
}

std::string rows_to_string(const Eigen::VectorXi& v) {
  std::ostringstream os;
  for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  return os.str();
}

int run(int argc, char** argv) {
  CLI::App app{"binary contingency tables: exact counts, typical tables, heuristic comparison"};
  app.require_subcommand(1);
  app.set_version_flag("--version", bct::version);

  std::string out_path;
  std::string format = "text";
  double tol = 1e-10;
  double gamma = 1.0;
  int threads = 1;
  int max_iterations = 100000;
  double time_budget = 60.0;
  bool no_collapse = false;

  const auto add_common = [&](CLI::App* cmd, const std::string& default_format) {
    cmd->add_option("--out", out_path, "Output path (default: stdout)");
    cmd->add_option("--format", format, "Output format")->default_val(default_format);
    cmd->add_option("--tol", tol, "Typical-table margin tolerance")->default_val(1e-10);
    cmd->add_option("--gamma", gamma, "Constant in the lower entropy bound")->default_val(1.0);
    cmd->add_option("--threads", threads, "Worker threads for grid commands")->default_val(1);
    cmd->add_option("--max-iterations", max_iterations, "Solver sweep cap")->default_val(100000);
    cmd->add_option("--time-budget", time_budget, "Per-solve wall-clock budget in seconds (0 = off)")
        ->default_val(60.0);
    cmd->add_flag("--no-collapse", no_collapse, "Disable symmetry collapsing in the solver");
  };
  const auto solve_options = [&]() {
    bct::SolveOptions o;
    o.tolerance = tol;
    o.max_iterations = max_iterations;
    o.collapse_symmetry = !no_collapse;
    o.time_budget_seconds = time_budget;
    return o;
  };

  // count
  auto* cmd_count = app.add_subcommand("count", "Exact count with heuristic and entropy bounds");
  MarginInput count_in;
  count_in.attach(cmd_count);
  std::size_t max_states = bct::DpOptions{}.max_states;
  cmd_count->add_option("--max-states", max_states, "State cap for the counting DP");
  add_common(cmd_count, "text");

  // typical
  auto* cmd_typical = app.add_subcommand("typical", "Solve the maximum-entropy typical table");
  MarginInput typical_in;
  typical_in.attach(cmd_typical);
  add_common(cmd_typical, "json");

  // heuristic
  auto* cmd_heuristic = app.add_subcommand("heuristic", "Independence-heuristic estimate ln I");
  MarginInput heuristic_in;
  heuristic_in.attach(cmd_heuristic);
  add_common(cmd_heuristic, "text");

  // delta
  auto* cmd_delta = app.add_subcommand("delta", "Correlation-ratio exponent Delta(B, C)");
  double dB = 0.0, dC = 0.0, d_delta = 0.5;
  cmd_delta->add_option("--B", dB, "B value")->required();
  cmd_delta->add_option("--C", dC, "C value")->required();
  cmd_delta->add_option("--delta", d_delta, "Exponent delta for the expansion records")
      ->default_val(0.5);
  add_common(cmd_delta, "text");

  // figure1
  auto* cmd_fig = app.add_subcommand("figure1", "Delta-vs-B curves for fixed C values");
  std::vector<double> fig_c{0.5, 0.25, 0.625, 0.125};
  int fig_resolution = 200;
  cmd_fig->add_option("--C", fig_c, "C values, comma separated")->delimiter(',');
  cmd_fig->add_option("--resolution", fig_resolution, "Samples per curve")->default_val(200);
  add_common(cmd_fig, "csv");

  // convergence
  auto* cmd_conv = app.add_subcommand("convergence", "Finite-n typical-table block convergence");
  std::vector<int> conv_n{50, 100, 200, 400};
  double conv_delta = 0.5, conv_B = 0.5, conv_C = 0.5;
  cmd_conv->add_option("--n", conv_n, "n values, comma separated")->delimiter(',');
  cmd_conv->add_option("--delta", conv_delta, "Family exponent delta")->default_val(0.5);
  cmd_conv->add_option("--B", conv_B, "Family parameter B")->default_val(0.5);
  cmd_conv->add_option("--C", conv_C, "Family parameter C")->default_val(0.5);
  add_common(cmd_conv, "csv");

  // sweep
  auto* cmd_sweep = app.add_subcommand("sweep", "Identity and bound checks over a (B, C) grid");
  int sw_b = 100, sw_c = 100;
  double sw_cmax = 0.75;
  cmd_sweep->add_option("--b-points", sw_b, "Grid points in B")->default_val(100);
  cmd_sweep->add_option("--c-points", sw_c, "Grid points in C")->default_val(100);
  cmd_sweep->add_option("--c-max", sw_cmax, "Upper end of the C range")->default_val(0.75);
  add_common(cmd_sweep, "csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_domain;
  }

  if (cmd_count->parsed()) {
    const bct::MarginPair margins = count_in.resolve();
    bct::DpOptions dp_opt;
    dp_opt.max_states = max_states;
    const bct::CountReport rep = bct::run_count_report(margins, gamma, solve_options(), dp_opt);
    nlohmann::json config = count_in.config_json();
    config["gamma"] = gamma;
    if (format == "json") {
      nlohmann::json j = bct::to_json(rep);
      j["rows"] = rows_to_string(margins.rows);
      j["cols"] = rows_to_string(margins.cols);
      emit(out_path, j.dump(2) + "\n", config, true);
    } else {
      std::ostringstream os;
      os << "rows: " << rows_to_string(margins.rows) << '\n'
         << "cols: " << rows_to_string(margins.cols) << '\n';
      if (!rep.feasible) os << "infeasible\n";
      os << "count: " << rep.count_decimal << '\n'
         << "log_count: " << bct::format_double(rep.log_count) << '\n'
         << "log_independence: " << bct::format_double(rep.log_independence) << '\n'
         << "rho: " << bct::format_double(rep.rho) << '\n'
         << "entropy_upper_log: " << bct::format_double(rep.entropy_upper_log) << '\n'
         << "barvinok_lower_log(gamma=" << bct::format_double(rep.gamma)
         << "): " << bct::format_double(rep.barvinok_lower_log) << '\n';
      emit(out_path, os.str(), config, true);
    }
    return rep.feasible ? exit_ok : exit_domain;
  }

  if (cmd_typical->parsed()) {
    const bct::MarginPair margins = typical_in.resolve();
    const bct::TypicalTable table = bct::solve_typical_table(margins, solve_options());
    nlohmann::json j = bct::to_json(table);
    emit(out_path, j.dump(2) + "\n", typical_in.config_json(), true);
    return exit_ok;
  }

  if (cmd_heuristic->parsed()) {
    const bct::MarginPair margins = heuristic_in.resolve();
    const bct::HeuristicResult h = bct::log_heuristic(margins);
    if (format == "json") {
      nlohmann::json j{{"log_estimate", h.log_estimate}, {"N", h.total}};
      emit(out_path, j.dump(2) + "\n", heuristic_in.config_json(), true);
    } else {
      std::ostringstream os;
      os << "log_estimate: " << bct::format_double(h.log_estimate) << '\n'
         << "N: " << h.total << '\n';
      emit(out_path, os.str(), heuristic_in.config_json(), true);
    }
    return exit_ok;
  }

  if (cmd_delta->parsed()) {
    const bct::DeltaResult r = bct::delta_result(dB, dC);
    const double tight = bct::delta_lower_bound_tight(dC);
    if (format == "json") {
      const bct::FamilyParams p{1, d_delta, dB, dC};
      nlohmann::json j{{"B", dB},
                       {"C", dC},
                       {"delta", r.delta},
                       {"lower_bound", r.lower_bound},
                       {"lower_bound_tight", tight},
                       {"upper_bound", 0.0},
                       {"gamma_c", r.gamma_c},
                       {"log_count_expansion", bct::log_count_expansion(p)},
                       {"log_heuristic_expansion", bct::log_heuristic_expansion(p)}};
      emit(out_path, j.dump(2) + "\n", j, true);
    } else {
      std::ostringstream os;
      os << "delta: " << bct::format_double(r.delta) << '\n'
         << "lower_bound: " << bct::format_double(r.lower_bound) << '\n'
         << "lower_bound_tight: " << bct::format_double(tight) << '\n'
         << "upper_bound: 0\n"
         << "gamma_c: " << bct::format_double(r.gamma_c) << '\n';
      emit(out_path, os.str(), nlohmann::json{{"B", dB}, {"C", dC}}, true);
    }
    return exit_ok;
  }

  if (cmd_fig->parsed()) {
    const auto rows = bct::run_figure1(fig_c, fig_resolution);
    nlohmann::json config{{"C", fig_c}, {"resolution", fig_resolution}};
    std::ostringstream os;
    if (format == "json") {
      nlohmann::json arr = nlohmann::json::array();
      for (const auto& r : rows) arr.push_back({{"C", r.C}, {"B", r.B}, {"delta", r.delta}});
      os << arr.dump(2) << '\n';
    } else {
      bct::figure1_csv(os, rows);
    }
    emit(out_path, os.str(), config, true);
    return exit_ok;
  }

  if (cmd_conv->parsed()) {
    const bct::FamilyParams base{conv_n.empty() ? 0 : conv_n.front(), conv_delta, conv_B, conv_C};
    const auto rows = bct::run_convergence(base, conv_n, solve_options());
    nlohmann::json config{{"n", conv_n}, {"delta", conv_delta}, {"B", conv_B}, {"C", conv_C},
                          {"tol", tol}};
    std::ostringstream os;
    if (format == "json") {
      nlohmann::json arr = nlohmann::json::array();
      for (const auto& r : rows)
        arr.push_back({{"n", r.n},
                       {"solved", r.solved},
                       {"z1", r.z1},
                       {"z2", r.z2},
                       {"z3", r.z3},
                       {"z1_err_scaled", r.z1_err_scaled},
                       {"z2_err_scaled", r.z2_err_scaled},
                       {"z3_err_scaled", r.z3_err_scaled},
                       {"gZ", r.g},
                       {"expansion_prediction", r.expansion_prediction},
                       {"scaled_residual", r.scaled_residual},
                       {"block_identity_gap", r.block_identity_gap},
                       {"error", r.error}});
      os << arr.dump(2) << '\n';
    } else {
      bct::convergence_csv(os, rows);
    }
    emit(out_path, os.str(), config, true);
    const bool all_solved = std::all_of(rows.begin(), rows.end(),
                                        [](const auto& r) { return r.solved; });
    return all_solved ? exit_ok : exit_no_convergence;
  }

  if (cmd_sweep->parsed()) {
    const bct::SweepResult sweep = bct::run_sweep(sw_c, sw_b, sw_cmax, threads);
    nlohmann::json config{{"b_points", sw_b}, {"c_points", sw_c}, {"c_max", sw_cmax}};
    std::ostringstream os;
    if (format == "json") {
      nlohmann::json arr = nlohmann::json::array();
      for (const auto& r : sweep.rows)
        arr.push_back({{"B", r.B},
                       {"C", r.C},
                       {"domain_ok", r.domain_ok},
                       {"delta", r.delta},
                       {"lower_bound", r.lower_bound},
                       {"gamma_c", r.gamma_c},
                       {"x_value", r.x_value},
                       {"identity_residual", r.identity_residual},
                       {"bounds_ok", r.bounds_ok}});
      os << arr.dump(2) << '\n';
    } else {
      bct::sweep_csv(os, sweep);
    }
    emit(out_path, os.str(), config, true);
    std::cerr << "sweep: " << sweep.rows.size() << " points, max identity residual "
              << bct::format_double(sweep.max_identity_residual) << ", flagged "
              << sweep.flagged_points << '\n';
    return exit_ok;
  }

  return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const bct::resource_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_resource;
  } catch (const bct::convergence_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_no_convergence;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_domain;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_domain;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << '\n';
    return 1;
  }
}
