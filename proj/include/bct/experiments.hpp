#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "bct/asymptotics.hpp"
#include "bct/exact_count.hpp"
#include "bct/independence.hpp"
#include "bct/margins.hpp"
#include "bct/typical_table.hpp"
#include "bct/version.hpp"

namespace bct {

// Deterministic float formatting: 15 significant digits, '.' separator,
// locale-independent. Identical configs must yield byte-identical output.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 15);
  return std::string(buf, res.ptr);
}

inline void write_csv(std::ostream& os, const std::vector<std::string>& header,
                      const std::vector<std::vector<std::string>>& rows) {
  for (std::size_t k = 0; k < header.size(); ++k) os << (k ? "," : "") << header[k];
  os << '\n';
  for (const auto& row : rows) {
    for (std::size_t k = 0; k < row.size(); ++k) os << (k ? "," : "") << row[k];
    os << '\n';
  }
}

// Reproducibility sidecar: full config plus library version, next to the
// main output file.
inline void write_sidecar(const std::string& out_path, const nlohmann::json& config) {
  nlohmann::json j{{"config", config}, {"library_version", version}};
  std::ofstream f(out_path + ".meta.json");
  f << j.dump(2) << '\n';
}

namespace detail {

// Ordered parallel map: results land in their slot, output order is fixed.
template <typename Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn) {
  if (threads <= 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  const std::size_t nt = std::min<std::size_t>(threads, count);
  std::vector<std::thread> pool;
  pool.reserve(nt);
  for (std::size_t t = 0; t < nt; ++t)
    pool.emplace_back([&, t] {
      for (std::size_t i = t; i < count; i += nt) fn(i);
    });
  for (auto& th : pool) th.join();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// figure1: Delta as a function of B for fixed values of C
// ---------------------------------------------------------------------------

struct Figure1Row {
  double C = 0.0;
  double B = 0.0;
  double delta = 0.0;
};

/// Samples B uniformly on (0, bmax(C)) at the requested resolution for each
/// C; B = 1 is always included so the zero of Delta appears exactly.
inline std::vector<Figure1Row> run_figure1(const std::vector<double>& c_values, int b_resolution) {
  if (c_values.empty() || b_resolution < 1)
    throw std::domain_error("figure1: need at least one C and a positive resolution");
  // every C must be admissible (with the B = 1 sample) before any output
  for (double C : c_values) require_asymptotic_admissible(1.0, C);
  std::vector<Figure1Row> rows;
  for (double C : c_values) {
    const double top = bmax(C);
    std::vector<double> bs;
    bs.reserve(b_resolution + 1);
    for (int k = 0; k < b_resolution; ++k) bs.push_back(top * double(k + 1) / double(b_resolution + 1));
    bs.push_back(1.0);
    std::sort(bs.begin(), bs.end());
    bs.erase(std::unique(bs.begin(), bs.end()), bs.end());
    for (double B : bs) rows.push_back(Figure1Row{C, B, delta(B, C)});
  }
  return rows;
}

inline void figure1_csv(std::ostream& os, const std::vector<Figure1Row>& rows) {
  std::vector<std::vector<std::string>> out;
  out.reserve(rows.size());
  for (const auto& r : rows)
    out.push_back({format_double(r.C), format_double(r.B), format_double(r.delta)});
  write_csv(os, {"C", "B", "delta"}, out);
}

// ---------------------------------------------------------------------------
// convergence: finite-n typical-table blocks against their limits
// ---------------------------------------------------------------------------

struct ConvergenceRow {
  int n = 0;
  bool solved = false;
  double z1 = 0.0, z2 = 0.0, z3 = 0.0;  // corner, edge, bulk block values
  double z1_err_scaled = 0.0;           // |z1 - z11*| n^{1-delta}, etc.
  double z2_err_scaled = 0.0;
  double z3_err_scaled = 0.0;
  double g = 0.0;
  double expansion_prediction = 0.0;
  double scaled_residual = 0.0;  // |g - prediction| / max(n^{3delta-1}, n)
  double block_identity_gap = 0.0;  // |g - block-sum form|
  std::string error;
};

/// One row per n: solve the family typical table, compare the three block
/// values with their limits, and compare g(Z) against the three-term
/// expansion. Solver failures are recorded per row and the run continues.
inline std::vector<ConvergenceRow> run_convergence(const FamilyParams& base,
                                                   const std::vector<int>& n_values,
                                                   const SolveOptions& opt = {}) {
  if (n_values.empty()) throw std::domain_error("convergence: need at least one n");
  validate_family(base);
  const BlockPrediction limits = finite_n_typical_prediction(base);

  std::vector<ConvergenceRow> rows;
  for (int n : n_values) {
    FamilyParams p = base;
    p.n = n;
    ConvergenceRow row;
    row.n = n;
    try {
      const MarginPair margins = build_family_margins(p);
      const TypicalTable t = solve_typical_table(margins, opt);
      const auto s = static_cast<Eigen::Index>(std::floor(std::pow(double(n), p.delta)));
      row.z1 = t.entries(0, 0);
      row.z2 = t.entries(0, s);
      row.z3 = t.entries(s, s);
      const double scale = std::pow(double(n), 1.0 - p.delta);
      row.z1_err_scaled = std::abs(row.z1 - limits.corner) * scale;
      row.z2_err_scaled = std::abs(row.z2 - limits.edge) * scale;
      row.z3_err_scaled = std::abs(row.z3 - limits.bulk) * scale;
      row.g = t.entropy_value;
      const ExpansionCoeffs coeffs = log_count_expansion(p);
      row.expansion_prediction = evaluate_expansion(coeffs, double(n), p.delta);
      row.scaled_residual = std::abs(row.g - row.expansion_prediction) /
                            std::max(std::pow(double(n), 3.0 * p.delta - 1.0), double(n));
      const double sd = double(s);
      const double block_sum = double(n) * double(n) * bernoulli_entropy(row.z3) +
                               2.0 * double(n) * sd * bernoulli_entropy(row.z2) +
                               sd * sd * bernoulli_entropy(row.z1);
      row.block_identity_gap = std::abs(row.g - block_sum);
      row.solved = true;
    } catch (const convergence_error& e) {
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

inline void convergence_csv(std::ostream& os, const std::vector<ConvergenceRow>& rows) {
  std::vector<std::vector<std::string>> out;
  out.reserve(rows.size());
  for (const auto& r : rows)
    out.push_back({std::to_string(r.n), r.solved ? "1" : "0", format_double(r.z1),
                   format_double(r.z2), format_double(r.z3), format_double(r.z1_err_scaled),
                   format_double(r.z2_err_scaled), format_double(r.z3_err_scaled),
                   format_double(r.g), format_double(r.expansion_prediction),
                   format_double(r.scaled_residual), format_double(r.block_identity_gap)});
  write_csv(os,
            {"n", "solved", "z1", "z2", "z3", "z1_err_scaled", "z2_err_scaled", "z3_err_scaled",
             "gZ", "expansion_prediction", "scaled_residual", "block_identity_gap"},
            out);
}

// ---------------------------------------------------------------------------
// sweep: Delta, bounds and the coefficient identity over a (B, C) grid
// ---------------------------------------------------------------------------

struct SweepRow {
  double B = 0.0, C = 0.0;
  bool domain_ok = false;
  double delta = 0.0;
  double lower_bound = 0.0;
  double gamma_c = 0.0;
  double x_value = 0.0;
  double identity_residual = 0.0;  // |delta - (count c_n2d - heuristic c_n2d)|
  bool bounds_ok = false;          // lower < delta <= 0
};

struct SweepResult {
  std::vector<SweepRow> rows;
  double max_identity_residual = 0.0;
  int flagged_points = 0;  // rows that failed a domain check
};

/// Cell-centred grid over (0, c_max) x (0, bmax(C)); each point evaluates
/// Delta twice (closed form and coefficient difference) and the published
/// lower-bound sandwich.
inline SweepResult run_sweep(int c_points, int b_points, double c_max = 0.75, int threads = 1) {
  if (c_points < 1 || b_points < 1) throw std::domain_error("sweep: empty grid");
  if (!(c_max > 0.0 && c_max <= 0.75)) throw std::domain_error("sweep: c_max must lie in (0, 3/4]");
  SweepResult result;
  result.rows.resize(std::size_t(c_points) * std::size_t(b_points));

  detail::parallel_for(result.rows.size(), threads, [&](std::size_t idx) {
    const int ci = static_cast<int>(idx) / b_points;
    const int bi = static_cast<int>(idx) % b_points;
    const double C = c_max * (ci + 0.5) / c_points;
    SweepRow row;
    row.C = C;
    try {
      const double top = bmax(C);
      const double B = top * (bi + 0.5) / b_points;
      row.B = B;
      row.delta = delta(B, C);
      row.gamma_c = gamma_c(C);
      row.lower_bound = delta_bounds(C).lower;
      row.x_value = (B * B * C - 2.0 * B * C + 1.0) / (1.0 - C);
      FamilyParams p{64, 0.5, B, C};
      row.identity_residual =
          std::abs(row.delta - (log_count_expansion(p).c_n2d - log_heuristic_expansion(p).c_n2d));
      row.bounds_ok = (row.lower_bound < row.delta) && (row.delta <= 0.0);
      row.domain_ok = true;
    } catch (const std::domain_error&) {
      row.domain_ok = false;
    }
    result.rows[idx] = row;
  });

  for (const auto& r : result.rows) {
    if (!r.domain_ok) {
      ++result.flagged_points;
      continue;
    }
    result.max_identity_residual = std::max(result.max_identity_residual, r.identity_residual);
  }
  return result;
}

inline void sweep_csv(std::ostream& os, const SweepResult& sweep) {
  std::vector<std::vector<std::string>> out;
  out.reserve(sweep.rows.size());
  for (const auto& r : sweep.rows)
    out.push_back({format_double(r.B), format_double(r.C), r.domain_ok ? "1" : "0",
                   format_double(r.delta), format_double(r.lower_bound),
                   format_double(r.gamma_c), format_double(r.x_value),
                   format_double(r.identity_residual), r.bounds_ok ? "1" : "0"});
  write_csv(os,
            {"B", "C", "domain_ok", "delta", "lower_bound", "gamma_c", "x_value",
             "identity_residual", "bounds_ok"},
            out);
}

// ---------------------------------------------------------------------------
// count: full report for one explicitly countable instance
// ---------------------------------------------------------------------------

struct CountReport {
  bool feasible = false;
  std::string count_decimal = "0";
  double log_count = neg_infinity;
  double log_independence = 0.0;
  double rho = 0.0;              // NaN when a margin is zero
  double entropy_upper_log = 0.0;  // g(Z)
  double barvinok_lower_log = 0.0;
  double gamma = 1.0;
  int solver_iterations = 0;
  double solver_residual = 0.0;
};

inline CountReport run_count_report(const MarginPair& margins, double gamma = 1.0,
                                    const SolveOptions& solve_opt = {},
                                    const DpOptions& dp_opt = {}) {
  validate_margins(margins);
  CountReport rep;
  rep.gamma = gamma;

  const CountResult exact = count_dp(margins, dp_opt);
  rep.feasible = exact.count != 0;
  rep.count_decimal = exact.count.str();
  rep.log_count = exact.log_count;
  rep.log_independence = log_heuristic(margins).log_estimate;
  const bool positive_margins =
      (margins.rows.array() > 0).all() && (margins.cols.array() > 0).all();
  rep.rho = positive_margins ? std::exp(rep.log_count - rep.log_independence)
                             : std::numeric_limits<double>::quiet_NaN();

  if (rep.feasible) {
    const TypicalTable t = solve_typical_table(margins, solve_opt);
    const BarvinokBounds b = barvinok_bounds(t, gamma);
    rep.entropy_upper_log = b.upper_log;
    rep.barvinok_lower_log = b.lower_log;
    rep.solver_iterations = t.iterations;
    rep.solver_residual = t.residual;
  } else {
    rep.entropy_upper_log = std::numeric_limits<double>::quiet_NaN();
    rep.barvinok_lower_log = std::numeric_limits<double>::quiet_NaN();
  }
  return rep;
}

inline nlohmann::json to_json(const CountReport& r) {
  return nlohmann::json{{"feasible", r.feasible},
                        {"count", r.count_decimal},
                        {"log_count", r.log_count},
                        {"log_independence", r.log_independence},
                        {"rho", r.rho},
                        {"entropy_upper_log", r.entropy_upper_log},
                        {"barvinok_lower_log", r.barvinok_lower_log},
                        {"gamma", r.gamma},
                        {"solver_iterations", r.solver_iterations},
                        {"solver_residual", r.solver_residual}};
}

}  // namespace bct
