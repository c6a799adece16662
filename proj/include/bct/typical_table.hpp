#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "bct/margins.hpp"
#include "bct/numeric.hpp"

namespace bct {

struct infeasible_error : std::domain_error {
  using std::domain_error::domain_error;
};

// Feasible margins whose polytope has forced entries beyond whole forced
// rows/columns; the dual parametrization has no finite solution there.
struct empty_interior_error : std::domain_error {
  using std::domain_error::domain_error;
};

struct convergence_error : std::runtime_error {
  double residual;
  convergence_error(const std::string& msg, double r) : std::runtime_error(msg), residual(r) {}
};

/// Maximizer of the Bernoulli entropy g(X) = sum f(X_ij) over the
/// transportation polytope { X in [0,1]^{mn} : row sums r, column sums c }.
/// Entries satisfy z_ij = logistic(row_duals[i] + col_duals[j]); duals of
/// eliminated (forced) lines are +-infinity.
struct TypicalTable {
  Eigen::MatrixXd entries;
  Eigen::VectorXd row_duals;
  Eigen::VectorXd col_duals;
  double entropy_value = 0.0;
  double residual = 0.0;  // max margin violation of `entries`
  int iterations = 0;     // alternating sweeps used
};

struct SolveOptions {
  double tolerance = 1e-10;         // max margin violation
  int max_iterations = 100000;      // alternating sweeps
  bool collapse_symmetry = true;    // solve one unknown per distinct margin value
  double time_budget_seconds = 60.0;  // 0 disables the wall-clock guard
};

inline double entropy(const TypicalTable& t) {
  CompensatedSum g;
  for (Eigen::Index j = 0; j < t.entries.cols(); ++j)
    for (Eigen::Index i = 0; i < t.entries.rows(); ++i) g.add(bernoulli_entropy(t.entries(i, j)));
  return g.value();
}

namespace detail {

struct DualClass {
  int margin = 0;                // common line sum
  std::vector<int> members;      // original indices
  double dual = 0.0;
};

// Solve sum_b w_b logistic(t + beta_b) = target for t. The map is strictly
// increasing from 0 to sum w_b, so a sign-changing bracket always exists for
// interior targets; Newton steps are clipped to the bracket.
inline double solve_dual_1d(const std::vector<double>& beta, const std::vector<double>& w,
                            double target, double t0, double ftol) {
  const auto eval = [&](double t, double& deriv) {
    double s = 0.0;
    deriv = 0.0;
    for (std::size_t b = 0; b < beta.size(); ++b) {
      const double z = logistic(t + beta[b]);
      s += w[b] * z;
      deriv += w[b] * z * (1.0 - z);
    }
    return s;
  };

  double deriv = 0.0;
  double lo = t0, hi = t0;
  double flo = eval(lo, deriv) - target;
  double step = 1.0;
  while (flo > 0.0) {
    lo -= step;
    step *= 2.0;
    flo = eval(lo, deriv) - target;
    if (step > 1e18) break;
  }
  step = 1.0;
  double fhi = eval(hi, deriv) - target;
  while (fhi < 0.0) {
    hi += step;
    step *= 2.0;
    fhi = eval(hi, deriv) - target;
    if (step > 1e18) break;
  }

  double t = std::clamp(t0, lo, hi);
  for (int it = 0; it < 160; ++it) {
    const double f = eval(t, deriv) - target;
    if (std::abs(f) <= ftol) return t;
    if (f > 0.0)
      hi = t;
    else
      lo = t;
    double tn = deriv > 0.0 ? t - f / deriv : 0.5 * (lo + hi);
    if (!(tn > lo && tn < hi)) tn = 0.5 * (lo + hi);
    if (hi - lo <= 8.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t)))
      return t;
    t = tn;
  }
  return t;
}

// Iteratively fix rows/columns with margin 0 or equal to the number of still
// active opposite lines; those entries are forced and carry no entropy.
struct Elimination {
  std::vector<int> live_rows, live_cols;
  Eigen::VectorXi red_rows, red_cols;  // margins of the surviving subproblem
  Eigen::MatrixXd entries;             // forced values filled, live part NaN
  Eigen::VectorXd row_duals, col_duals;
};

inline Elimination eliminate_forced_lines(const MarginPair& m) {
  const int mr = static_cast<int>(m.row_count());
  const int nc = static_cast<int>(m.col_count());
  Elimination e;
  e.entries = Eigen::MatrixXd::Constant(mr, nc, std::numeric_limits<double>::quiet_NaN());
  e.row_duals = Eigen::VectorXd::Zero(mr);
  e.col_duals = Eigen::VectorXd::Zero(nc);

  std::vector<long long> r(m.rows.data(), m.rows.data() + mr);
  std::vector<long long> c(m.cols.data(), m.cols.data() + nc);
  std::vector<bool> row_live(mr, true), col_live(nc, true);
  int rows_left = mr, cols_left = nc;

  bool changed = true;
  while (changed) {
    changed = false;
    for (int i = 0; i < mr; ++i) {
      if (!row_live[i]) continue;
      if (r[i] < 0 || r[i] > cols_left) throw infeasible_error("margins are infeasible");
      if (r[i] == 0 || r[i] == cols_left) {
        const double v = (r[i] == 0) ? 0.0 : 1.0;
        for (int j = 0; j < nc; ++j)
          if (col_live[j]) {
            e.entries(i, j) = v;
            c[j] -= static_cast<long long>(v);
          }
        e.row_duals[i] = (v == 0.0) ? neg_infinity : pos_infinity;
        row_live[i] = false;
        --rows_left;
        changed = true;
      }
    }
    for (int j = 0; j < nc; ++j) {
      if (!col_live[j]) continue;
      if (c[j] < 0 || c[j] > rows_left) throw infeasible_error("margins are infeasible");
      if (c[j] == 0 || c[j] == rows_left) {
        const double v = (c[j] == 0) ? 0.0 : 1.0;
        for (int i = 0; i < mr; ++i)
          if (row_live[i]) {
            e.entries(i, j) = v;
            r[i] -= static_cast<long long>(v);
          }
        e.col_duals[j] = (v == 0.0) ? neg_infinity : pos_infinity;
        col_live[j] = false;
        --cols_left;
        changed = true;
      }
    }
  }

  for (int i = 0; i < mr; ++i)
    if (row_live[i]) e.live_rows.push_back(i);
  for (int j = 0; j < nc; ++j)
    if (col_live[j]) e.live_cols.push_back(j);
  e.red_rows.resize(e.live_rows.size());
  e.red_cols.resize(e.live_cols.size());
  for (std::size_t k = 0; k < e.live_rows.size(); ++k)
    e.red_rows[k] = static_cast<int>(r[e.live_rows[k]]);
  for (std::size_t k = 0; k < e.live_cols.size(); ++k)
    e.red_cols[k] = static_cast<int>(c[e.live_cols[k]]);
  return e;
}

inline std::vector<DualClass> group_lines(const Eigen::VectorXi& margins, bool collapse) {
  std::vector<DualClass> classes;
  if (collapse) {
    std::vector<int> order(margins.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = static_cast<int>(k);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return margins[a] > margins[b]; });
    for (int idx : order) {
      if (!classes.empty() && classes.back().margin == margins[idx])
        classes.back().members.push_back(idx);
      else
        classes.push_back(DualClass{margins[idx], {idx}, 0.0});
    }
  } else {
    for (Eigen::Index k = 0; k < margins.size(); ++k)
      classes.push_back(DualClass{margins[k], {static_cast<int>(k)}, 0.0});
  }
  return classes;
}

}  // namespace detail

/// Solve for the typical table by minimizing the smooth convex dual
///   sum_ij log(1 + e^{a_i + b_j}) - sum_i r_i a_i - sum_j c_j b_j
/// with alternating exact one-dimensional updates. Whole forced lines
/// (margin 0 or full) are eliminated beforehand; remaining margins must give
/// a polytope with non-empty interior. Duals are normalized so the surviving
/// column duals have mean zero.
inline TypicalTable solve_typical_table(const MarginPair& m, const SolveOptions& opt = {}) {
  validate_margins(m);
  auto elim = detail::eliminate_forced_lines(m);

  TypicalTable out;
  out.row_duals = elim.row_duals;
  out.col_duals = elim.col_duals;

  const std::size_t m_red = elim.live_rows.size();
  const std::size_t n_red = elim.live_cols.size();

  if (m_red > 0) {
    const MarginPair reduced{elim.red_rows, elim.red_cols};
    if (!is_feasible(reduced)) throw infeasible_error("margins are infeasible");
    if (!has_interior(reduced))
      throw empty_interior_error(
          "margins force a block decomposition; no interior typical table exists");

    auto row_cls = detail::group_lines(elim.red_rows, opt.collapse_symmetry);
    auto col_cls = detail::group_lines(elim.red_cols, opt.collapse_symmetry);
    std::vector<double> row_w(row_cls.size()), col_w(col_cls.size());
    for (std::size_t a = 0; a < row_cls.size(); ++a)
      row_w[a] = static_cast<double>(row_cls[a].members.size());
    for (std::size_t b = 0; b < col_cls.size(); ++b)
      col_w[b] = static_cast<double>(col_cls[b].members.size());

    for (auto& rc : row_cls) rc.dual = logit(double(rc.margin) / double(n_red));
    for (auto& cc : col_cls) cc.dual = logit(double(cc.margin) / double(m_red));

    const double ftol = std::max(1e-13, 1e-3 * opt.tolerance);
    std::vector<double> alphas(row_cls.size()), betas(col_cls.size());
    const auto t_start = std::chrono::steady_clock::now();

    double residual = pos_infinity;
    int sweep = 0;
    for (; sweep < opt.max_iterations; ++sweep) {
      for (std::size_t b = 0; b < col_cls.size(); ++b) betas[b] = col_cls[b].dual;
      for (auto& rc : row_cls)
        rc.dual = detail::solve_dual_1d(betas, col_w, double(rc.margin), rc.dual, ftol);

      for (std::size_t a = 0; a < row_cls.size(); ++a) alphas[a] = row_cls[a].dual;
      for (auto& cc : col_cls)
        cc.dual = detail::solve_dual_1d(alphas, row_w, double(cc.margin), cc.dual, ftol);

      // columns were just solved to ftol; rows carry the sweep's error
      residual = 0.0;
      for (const auto& rc : row_cls) {
        double s = 0.0;
        for (std::size_t b = 0; b < col_cls.size(); ++b)
          s += col_w[b] * logistic(rc.dual + col_cls[b].dual);
        residual = std::max(residual, std::abs(s - double(rc.margin)));
      }
      residual = std::max(residual, ftol);
      if (residual <= 0.5 * opt.tolerance) {
        ++sweep;
        break;
      }
      if (opt.time_budget_seconds > 0.0) {
        const std::chrono::duration<double> used = std::chrono::steady_clock::now() - t_start;
        if (used.count() > opt.time_budget_seconds)
          throw convergence_error("typical table solve exceeded time budget; residual=" +
                                      std::to_string(residual),
                                  residual);
      }
    }
    if (residual > opt.tolerance)
      throw convergence_error(
          "typical table solve did not converge; residual=" + std::to_string(residual), residual);
    out.iterations = sweep;

    // gauge: mean of surviving column duals is zero
    double shift = 0.0;
    for (std::size_t b = 0; b < col_cls.size(); ++b) shift += col_w[b] * col_cls[b].dual;
    shift /= static_cast<double>(n_red);
    for (auto& cc : col_cls) cc.dual -= shift;
    for (auto& rc : row_cls) rc.dual += shift;

    for (const auto& rc : row_cls)
      for (int i : rc.members) out.row_duals[elim.live_rows[i]] = rc.dual;
    for (const auto& cc : col_cls)
      for (int j : cc.members) out.col_duals[elim.live_cols[j]] = cc.dual;

    for (std::size_t a = 0; a < m_red; ++a)
      for (std::size_t b = 0; b < n_red; ++b)
        elim.entries(elim.live_rows[a], elim.live_cols[b]) =
            logistic(out.row_duals[elim.live_rows[a]] + out.col_duals[elim.live_cols[b]]);
  }

  out.entries = std::move(elim.entries);

  double res = 0.0;
  for (Eigen::Index i = 0; i < out.entries.rows(); ++i)
    res = std::max(res, std::abs(out.entries.row(i).sum() - double(m.rows[i])));
  for (Eigen::Index j = 0; j < out.entries.cols(); ++j)
    res = std::max(res, std::abs(out.entries.col(j).sum() - double(m.cols[j])));
  out.residual = res;
  out.entropy_value = entropy(out);
  return out;
}

/// Two-sided enclosure of ln |M(r,c)| from the typical table:
///   g(Z) - gamma (m+n) ln(mn)  <=  ln |M(r,c)|  <=  g(Z).
/// The constant gamma is caller-supplied; no specific value is asserted.
struct BarvinokBounds {
  double lower_log = 0.0;
  double upper_log = 0.0;
};

inline BarvinokBounds barvinok_bounds(const TypicalTable& t, double gamma) {
  if (gamma < 0.0) throw std::domain_error("barvinok_bounds: gamma must be >= 0");
  const double mn = double(t.entries.rows()) * double(t.entries.cols());
  const double penalty =
      gamma * (double(t.entries.rows()) + double(t.entries.cols())) * std::log(mn);
  return BarvinokBounds{t.entropy_value - penalty, t.entropy_value};
}

inline BarvinokBounds barvinok_bounds(const MarginPair& m, double gamma,
                                      const SolveOptions& opt = {}) {
  return barvinok_bounds(solve_typical_table(m, opt), gamma);
}

/// Distinct entry values with multiplicities (values closer than `tol` are
/// merged). Family margins give the expected block structure summary.
inline std::vector<std::pair<double, long long>> entry_value_groups(const TypicalTable& t,
                                                                    double tol = 1e-9) {
  std::vector<double> vals(t.entries.data(), t.entries.data() + t.entries.size());
  std::sort(vals.begin(), vals.end());
  std::vector<std::pair<double, long long>> groups;
  for (double v : vals) {
    if (!groups.empty() && v - groups.back().first <= tol)
      ++groups.back().second;
    else
      groups.emplace_back(v, 1);
  }
  return groups;
}

inline nlohmann::json to_json(const TypicalTable& t) {
  const auto dual_array = [](const Eigen::VectorXd& v) {
    nlohmann::json a = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      if (std::isfinite(v[i]))
        a.push_back(v[i]);
      else
        a.push_back(v[i] > 0 ? "inf" : "-inf");
    }
    return a;
  };
  nlohmann::json blocks = nlohmann::json::array();
  for (const auto& [value, count] : entry_value_groups(t))
    blocks.push_back({{"value", value}, {"count", count}});
  return nlohmann::json{{"rows", t.entries.rows()},         {"cols", t.entries.cols()},
                        {"row_duals", dual_array(t.row_duals)}, {"col_duals", dual_array(t.col_duals)},
                        {"entropy_value", t.entropy_value},  {"residual", t.residual},
                        {"iterations", t.iterations},        {"blocks", blocks}};
}

}  // namespace bct
