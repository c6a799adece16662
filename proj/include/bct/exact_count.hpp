#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "bct/bigint.hpp"
#include "bct/independence.hpp"
#include "bct/margins.hpp"

namespace bct {

// DP state space exceeded the configured cap.
struct resource_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Exact number of 0-1 matrices in the margin class, with its natural log
/// (log_count is -inf when the class is empty).
struct CountResult {
  bigint count;
  double log_count = neg_infinity;
};

inline CountResult make_count_result(bigint c) {
  CountResult r;
  r.log_count = log_big(c);
  r.count = std::move(c);
  return r;
}

/// Exhaustive enumeration of all 2^{mn} binary matrices. Oracle only:
/// requires m*n <= 25.
inline CountResult count_brute_force(const MarginPair& m) {
  validate_margins(m);
  const int mr = static_cast<int>(m.row_count());
  const int nc = static_cast<int>(m.col_count());
  if (mr * nc > 25) throw std::domain_error("count_brute_force: m*n must be <= 25");

  const std::uint64_t row_mask = (std::uint64_t(1) << nc) - 1;
  bigint total = 0;
  const std::uint64_t end = std::uint64_t(1) << (mr * nc);
  for (std::uint64_t mask = 0; mask < end; ++mask) {
    bool ok = true;
    for (int i = 0; i < mr; ++i) {
      const auto bits = (mask >> (i * nc)) & row_mask;
      if (std::popcount(bits) != m.rows[i]) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    for (int j = 0; j < nc && ok; ++j) {
      int s = 0;
      for (int i = 0; i < mr; ++i) s += int((mask >> (i * nc + j)) & 1);
      ok = (s == m.cols[j]);
    }
    if (ok) ++total;
  }
  return make_count_result(total);
}

struct DpOptions {
  std::size_t max_states = 4'000'000;
};

namespace detail {

// Residual multiset encoded as (value, multiplicity) pairs, value descending,
// zero-residual classes dropped. Deterministic key for hashing/memoization.
using ResidualKey = std::vector<std::int32_t>;

struct ResidualKeyHash {
  std::size_t operator()(const ResidualKey& v) const noexcept {
    std::size_t h = 1469598103934665603ull;
    for (auto x : v) {
      h ^= static_cast<std::uint32_t>(x);
      h *= 1099511628211ull;
    }
    return h;
  }
};

inline ResidualKey canonical_key(std::map<int, int, std::greater<int>>& classes) {
  ResidualKey k;
  k.reserve(2 * classes.size());
  for (const auto& [v, mult] : classes)
    if (v > 0 && mult > 0) {
      k.push_back(v);
      k.push_back(mult);
    }
  return k;
}

// Binomials C(a,b); cached Pascal rows while they fit unsigned 64-bit
// (a <= 61), exact big integers beyond.
inline bigint class_binomial(int a, int b) {
  if (a > 61) return binomial_big(a, b);
  static thread_local std::vector<std::vector<std::uint64_t>> pascal;
  if (static_cast<int>(pascal.size()) <= a) {
    for (int i = static_cast<int>(pascal.size()); i <= a; ++i) {
      std::vector<std::uint64_t> row(i + 1, 1);
      for (int j = 1; j < i; ++j) row[j] = pascal[i - 1][j - 1] + pascal[i - 1][j];
      pascal.push_back(std::move(row));
    }
  }
  return (b < 0 || b > a) ? bigint(0) : bigint(pascal[a][b]);
}

}  // namespace detail

/// Exact count by a column-by-column dynamic program over residual row-sum
/// multisets. Columns are consumed in decreasing sum order; rows with equal
/// residual are compressed into one class, so the transition for a column of
/// sum s distributes s ones over classes with multiplicity C(class size, k).
/// Returns 0 exactly when the margins are infeasible.
inline CountResult count_dp(const MarginPair& m, const DpOptions& opt = {}) {
  validate_margins(m);
  const int nc = static_cast<int>(m.col_count());
  const int mr = static_cast<int>(m.row_count());
  if ((m.rows.array() > nc).any() || (m.cols.array() > mr).any())
    return make_count_result(0);

  std::vector<int> cols(m.cols.data(), m.cols.data() + nc);
  std::sort(cols.begin(), cols.end(), std::greater<int>());
  while (!cols.empty() && cols.back() == 0) cols.pop_back();  // zero columns are free

  std::map<int, int, std::greater<int>> init;
  for (int i = 0; i < mr; ++i)
    if (m.rows[i] > 0) ++init[m.rows[i]];

  using Level = std::unordered_map<detail::ResidualKey, bigint, detail::ResidualKeyHash>;
  Level cur;
  cur.emplace(detail::canonical_key(init), bigint(1));

  for (std::size_t jc = 0; jc < cols.size(); ++jc) {
    const int s = cols[jc];
    const int rem_after = static_cast<int>(cols.size() - jc - 1);
    Level next;
    for (const auto& [key, ways] : cur) {
      // unpack classes
      std::vector<std::pair<int, int>> cls;
      for (std::size_t t = 0; t < key.size(); t += 2) cls.emplace_back(key[t], key[t + 1]);

      // residual capacity from class index ci onward
      std::vector<int> cap(cls.size() + 1, 0);
      for (std::size_t ci = cls.size(); ci-- > 0;)
        cap[ci] = cap[ci + 1] + cls[ci].second;

      std::vector<int> picked(cls.size(), 0);
      std::function<void(std::size_t, int, bigint)> place =
          [&](std::size_t ci, int left, bigint coeff) {
            if (left == 0) {
              std::map<int, int, std::greater<int>> nxt;
              bool dead = false;
              for (std::size_t t = 0; t < cls.size(); ++t) {
                const auto [v, mult] = cls[t];
                const int stay = mult - picked[t];
                if (stay > 0) {
                  if (v > rem_after) { dead = true; break; }
                  nxt[v] += stay;
                }
                if (picked[t] > 0 && v - 1 > 0) {
                  if (v - 1 > rem_after) { dead = true; break; }
                  nxt[v - 1] += picked[t];
                }
              }
              if (!dead) {
                auto& slot = next[detail::canonical_key(nxt)];
                slot += coeff;
              }
              return;
            }
            if (ci >= cls.size() || cap[ci] < left) return;
            const auto [v, mult] = cls[ci];
            const int hi = std::min(mult, left);
            const int lo = std::max(0, left - cap[ci + 1]);
            for (int k = lo; k <= hi; ++k) {
              picked[ci] = k;
              place(ci + 1, left - k, coeff * detail::class_binomial(mult, k));
            }
            picked[ci] = 0;
          };
      place(0, s, ways);
      if (next.size() > opt.max_states)
        throw resource_error("count_dp: state space exceeded cap");
    }
    cur = std::move(next);
    if (cur.empty()) return make_count_result(0);
  }

  const detail::ResidualKey done;  // all residuals zero
  auto it = cur.find(done);
  return make_count_result(it == cur.end() ? bigint(0) : it->second);
}

/// Independent second exact algorithm: top-down recursion inserting one row
/// at a time, memoized on the multiset of residual column sums. Cross-check
/// for count_dp on instances beyond brute-force reach.
inline CountResult count_row_memo(const MarginPair& m, const DpOptions& opt = {}) {
  validate_margins(m);
  const int nc = static_cast<int>(m.col_count());
  const int mr = static_cast<int>(m.row_count());
  if ((m.rows.array() > nc).any() || (m.cols.array() > mr).any())
    return make_count_result(0);

  std::vector<int> rows(m.rows.data(), m.rows.data() + mr);
  std::sort(rows.begin(), rows.end(), std::greater<int>());
  while (!rows.empty() && rows.back() == 0) rows.pop_back();

  std::map<int, int, std::greater<int>> cols0;
  for (int j = 0; j < nc; ++j)
    if (m.cols[j] > 0) ++cols0[m.cols[j]];

  struct MemoHash {
    std::size_t operator()(const std::pair<int, detail::ResidualKey>& p) const noexcept {
      return detail::ResidualKeyHash{}(p.second) * 31 + std::size_t(p.first);
    }
  };
  std::unordered_map<std::pair<int, detail::ResidualKey>, bigint, MemoHash> memo;

  std::function<bigint(std::size_t, std::map<int, int, std::greater<int>>&)> go =
      [&](std::size_t depth, std::map<int, int, std::greater<int>>& cols) -> bigint {
    if (depth == rows.size()) {
      return cols.empty() ? bigint(1) : bigint(0);
    }
    const int rows_left = static_cast<int>(rows.size() - depth);
    for (const auto& [v, mult] : cols)
      if (v > rows_left) return 0;

    auto key = std::make_pair(static_cast<int>(depth), detail::canonical_key(cols));
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    if (memo.size() > opt.max_states)
      throw resource_error("count_row_memo: memo table exceeded cap");

    const int target = rows[depth];
    std::vector<std::pair<int, int>> cls(cols.begin(), cols.end());
    std::vector<int> cap(cls.size() + 1, 0);
    for (std::size_t ci = cls.size(); ci-- > 0;) cap[ci] = cap[ci + 1] + cls[ci].second;

    bigint total = 0;
    std::vector<int> picked(cls.size(), 0);
    std::function<void(std::size_t, int)> choose = [&](std::size_t ci, int left) {
      if (left == 0) {
        std::map<int, int, std::greater<int>> nxt;
        bigint coeff = 1;
        for (std::size_t t = 0; t < cls.size(); ++t) {
          const auto [v, mult] = cls[t];
          coeff *= detail::class_binomial(mult, picked[t]);
          if (mult - picked[t] > 0) nxt[v] += mult - picked[t];
          if (picked[t] > 0 && v - 1 > 0) nxt[v - 1] += picked[t];
        }
        total += coeff * go(depth + 1, nxt);
        return;
      }
      if (ci >= cls.size() || cap[ci] < left) return;
      const int hi = std::min(cls[ci].second, left);
      const int lo = std::max(0, left - cap[ci + 1]);
      for (int k = lo; k <= hi; ++k) {
        picked[ci] = k;
        choose(ci + 1, left - k);
      }
      picked[ci] = 0;
    };
    choose(0, target);

    memo.emplace(std::move(key), total);
    return total;
  };

  bigint result = go(0, cols0);
  return make_count_result(std::move(result));
}

/// Exact correlation ratio |M(r,c)| / I(r,c), evaluated in log space.
/// Margins must be strictly positive (the heuristic presumes positive
/// margins); infeasible margins give ratio 0.
inline double correlation_ratio_exact(const MarginPair& m, const DpOptions& opt = {}) {
  validate_margins(m);
  if ((m.rows.array() <= 0).any() || (m.cols.array() <= 0).any())
    throw std::domain_error("correlation_ratio_exact: margins must be positive");
  const CountResult exact = count_dp(m, opt);
  if (exact.count == 0) return 0.0;
  const HeuristicResult h = log_heuristic(m);
  return std::exp(exact.log_count - h.log_estimate);
}

}  // namespace bct
