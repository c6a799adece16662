#pragma once

#include <cmath>

#include "bct/bigint.hpp"
#include "bct/margins.hpp"

namespace bct {

/// Independence-heuristic estimate in log space.
struct HeuristicResult {
  double log_estimate = 0.0;  // ln I(r,c)
  long long total = 0;        // N, total sum of entries
};

/// ln I(r,c) = -ln C(mn,N) + sum_i ln C(n,r_i) + sum_j ln C(m,c_j),
/// evaluated with log-gamma so it scales to dimensions in the thousands.
/// N = 0 and N = mn collapse to ln I = 0 (the empty/full matrix is unique).
inline HeuristicResult log_heuristic(const MarginPair& m) {
  validate_margins(m);
  const long long mr = m.row_count();
  const long long nc = m.col_count();
  const long long N = m.total();
  double v = -log_binomial(mr * nc, N);
  for (Eigen::Index i = 0; i < m.rows.size(); ++i) v += log_binomial(nc, m.rows[i]);
  for (Eigen::Index j = 0; j < m.cols.size(); ++j) v += log_binomial(mr, m.cols[j]);
  return HeuristicResult{v, N};
}

/// Same quantity through exact integer arithmetic: ln of the big-rational
///   prod C(n,r_i) prod C(m,c_j) / C(mn,N).
/// Reference path for moderate sizes; cost grows with the factorials involved.
inline double log_heuristic_exact(const MarginPair& m) {
  validate_margins(m);
  const long long mr = m.row_count();
  const long long nc = m.col_count();
  const long long N = m.total();
  bigint num = 1;
  for (Eigen::Index i = 0; i < m.rows.size(); ++i) num *= binomial_big(nc, m.rows[i]);
  for (Eigen::Index j = 0; j < m.cols.size(); ++j) num *= binomial_big(mr, m.cols[j]);
  const bigint den = binomial_big(mr * nc, N);
  return log_big(num) - log_big(den);
}

}  // namespace bct
