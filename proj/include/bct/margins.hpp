#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "bct/numeric.hpp"

namespace bct {

/// Row/column margin vectors of an m x n 0-1 matrix class.
/// Stored in the order given; feasibility tests sort internal copies.
struct MarginPair {
  Eigen::VectorXi rows;  // length m
  Eigen::VectorXi cols;  // length n

  Eigen::Index row_count() const { return rows.size(); }
  Eigen::Index col_count() const { return cols.size(); }
  long long total() const { return rows.cast<long long>().sum(); }
};

inline MarginPair make_margins(const std::vector<int>& rows, const std::vector<int>& cols) {
  MarginPair m;
  m.rows = Eigen::Map<const Eigen::VectorXi>(rows.data(), static_cast<Eigen::Index>(rows.size()));
  m.cols = Eigen::Map<const Eigen::VectorXi>(cols.data(), static_cast<Eigen::Index>(cols.size()));
  return m;
}

// Structural invariants: non-empty, non-negative, equal totals. Margins that
// exceed the opposite dimension are legal here and simply infeasible.
inline void validate_margins(const MarginPair& m) {
  if (m.rows.size() == 0 || m.cols.size() == 0)
    throw std::domain_error("margins: need at least one row and one column");
  if ((m.rows.array() < 0).any() || (m.cols.array() < 0).any())
    throw std::domain_error("margins: negative entry");
  if (m.rows.cast<long long>().sum() != m.cols.cast<long long>().sum())
    throw std::domain_error("margins: row and column totals differ");
}

inline MarginPair transposed(const MarginPair& m) { return MarginPair{m.cols, m.rows}; }

// Complementation r_i -> n - r_i, c_j -> m - c_j (bit-flip of every table).
inline MarginPair complemented(const MarginPair& m) {
  const int n = static_cast<int>(m.cols.size());
  const int mm = static_cast<int>(m.rows.size());
  MarginPair out;
  out.rows = Eigen::VectorXi::Constant(m.rows.size(), n) - m.rows;
  out.cols = Eigen::VectorXi::Constant(m.cols.size(), mm) - m.cols;
  return out;
}

/// Gale-Ryser feasibility: a 0-1 matrix with these margins exists iff the
/// sorted row margins are dominated by the conjugate of the column margins.
inline bool is_feasible(const MarginPair& m) {
  validate_margins(m);
  const auto n = m.cols.size();
  const auto mm = m.rows.size();
  if ((m.rows.array() > int(n)).any() || (m.cols.array() > int(mm)).any()) return false;

  std::vector<int> r(m.rows.data(), m.rows.data() + mm);
  std::sort(r.begin(), r.end(), std::greater<int>());

  // conjugate partial sums: T_k = sum_j min(c_j, k)
  long long head = 0;
  for (std::size_t k = 1; k <= r.size(); ++k) {
    head += r[k - 1];
    long long tk = 0;
    for (Eigen::Index j = 0; j < n; ++j) tk += std::min<long long>(m.cols[j], k);
    if (head > tk) return false;
  }
  return true;
}

/// True iff the transportation polytope over [0,1]^{mn} with these margins
/// has non-empty interior, i.e. no entry takes the same value in every
/// 0-1 matrix of the class. Uses the structure-matrix criterion
///   t_{kl} = kl + sum_{i>k} r_i - sum_{j<=l} c_j  (margins sorted descending):
/// the class is non-empty iff t_{kl} >= 0 everywhere, and an invariant
/// (forced) position exists iff t_{kl} = 0 somewhere off the two trivial
/// corners (m,0) and (0,n).
inline bool has_interior(const MarginPair& m) {
  validate_margins(m);
  if (!is_feasible(m)) return false;
  const auto mm = m.rows.size();
  const auto n = m.cols.size();
  std::vector<long long> r(m.rows.data(), m.rows.data() + mm);
  std::vector<long long> c(m.cols.data(), m.cols.data() + n);
  std::sort(r.begin(), r.end(), std::greater<long long>());
  std::sort(c.begin(), c.end(), std::greater<long long>());

  std::vector<long long> rtail(mm + 1, 0);  // sum_{i>k} r_i
  for (Eigen::Index k = mm; k-- > 0;) rtail[k] = rtail[k + 1] + r[k];
  long long chead = 0;  // sum_{j<=l} c_j
  for (Eigen::Index l = 0; l <= n; ++l) {
    if (l > 0) chead += c[l - 1];
    for (Eigen::Index k = 0; k <= mm; ++k) {
      if ((k == mm && l == 0) || (k == 0 && l == n)) continue;
      const long long t = k * l + rtail[k] - chead;
      if (t <= 0) return false;  // t < 0 cannot happen for feasible margins
    }
  }
  return true;
}

/// Upper end of the admissible B-range: 1 / (sqrt(C/3 - C^2/3) + C).
/// Strictly decreasing on (0, 3/4) with bmax(C) > 1 and bmax(C)*C < 1.
inline double bmax(double C) {
  if (!(C > 0.0 && C < 0.75)) throw std::domain_error("bmax: C must lie in (0, 3/4)");
  return 1.0 / (std::sqrt(C / 3.0 - C * C / 3.0) + C);
}

/// Parameters (n, delta, B, C) of the two-valued margin family.
struct FamilyParams {
  int n = 0;
  double delta = 0.0;
  double B = 0.0;
  double C = 0.0;
};

inline void validate_family(const FamilyParams& p) {
  if (p.n < 1) throw std::domain_error("family: n must be a positive integer");
  if (!(p.delta > 0.0 && p.delta < 1.0)) throw std::domain_error("family: delta must lie in (0,1)");
  if (!(p.B > 0.0)) throw std::domain_error("family: B must be positive");
  if (!(p.C > 0.0)) throw std::domain_error("family: C must be positive");
}

// Hypotheses of the enumeration asymptotics: 0 < C < 3/4 and 0 < B < bmax(C),
// strict with margin eps so logs near the boundary stay well-conditioned.
inline void require_asymptotic_admissible(double B, double C, double eps = 1e-9) {
  if (!(C > eps && C < 0.75 - eps))
    throw std::domain_error("admissibility: C must lie strictly inside (0, 3/4)");
  if (!(B > eps && B < bmax(C) - eps))
    throw std::domain_error("admissibility: B must lie strictly inside (0, bmax(C))");
}

// Hypotheses of the heuristic expansion: 0 < C < 1 and 0 < B < 1/C.
inline void require_heuristic_admissible(double B, double C, double eps = 1e-9) {
  if (!(C > eps && C < 1.0 - eps))
    throw std::domain_error("admissibility: C must lie strictly inside (0, 1)");
  if (!(B > eps && B * C < 1.0 - eps))
    throw std::domain_error("admissibility: B must lie strictly inside (0, 1/C)");
}

/// Margins with floor(n^delta) rows and columns of sum floor(BCn) followed by
/// n rows and columns of sum floor(Cn). Rejects parameters that would produce
/// a zero margin or a margin exceeding the dimension.
inline MarginPair build_family_margins(const FamilyParams& p) {
  validate_family(p);
  const long long s = static_cast<long long>(std::floor(std::pow(double(p.n), p.delta)));
  const long long a = static_cast<long long>(std::floor(p.B * p.C * p.n));
  const long long c = static_cast<long long>(std::floor(p.C * p.n));
  if (a < 1 || c < 1) throw std::domain_error("family margins: floor(BCn) and floor(Cn) must be >= 1");
  const long long dim = s + p.n;
  if (a > dim || c > dim) throw std::domain_error("family margins: margin exceeds dimension");

  MarginPair m;
  m.rows.resize(dim);
  m.rows.head(s).setConstant(static_cast<int>(a));
  m.rows.tail(p.n).setConstant(static_cast<int>(c));
  m.cols = m.rows;
  return m;
}

// --- JSON forms: {"rows":[...], "cols":[...]} and {"n":..,"delta":..,"B":..,"C":..} ---

inline void to_json(nlohmann::json& j, const MarginPair& m) {
  j = nlohmann::json{{"rows", std::vector<int>(m.rows.data(), m.rows.data() + m.rows.size())},
                     {"cols", std::vector<int>(m.cols.data(), m.cols.data() + m.cols.size())}};
}

inline void from_json(const nlohmann::json& j, MarginPair& m) {
  const auto rows = j.at("rows").get<std::vector<int>>();
  const auto cols = j.at("cols").get<std::vector<int>>();
  m = make_margins(rows, cols);
}

inline void to_json(nlohmann::json& j, const FamilyParams& p) {
  j = nlohmann::json{{"n", p.n}, {"delta", p.delta}, {"B", p.B}, {"C", p.C}};
}

inline void from_json(const nlohmann::json& j, FamilyParams& p) {
  p.n = j.at("n").get<int>();
  p.delta = j.at("delta").get<double>();
  p.B = j.at("B").get<double>();
  p.C = j.at("C").get<double>();
}

}  // namespace bct
