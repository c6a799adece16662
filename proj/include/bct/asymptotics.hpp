#pragma once

#include <cmath>
#include <stdexcept>

#include "json.hpp"

#include "bct/margins.hpp"
#include "bct/numeric.hpp"

namespace bct {

/// Limiting corner entry of the family typical table:
///   z11* = B^2 (1-C) / (B^2 - 2B + 1/C), strictly inside (0,1).
inline double z11_star(double B, double C) {
  require_asymptotic_admissible(B, C);
  return B * B * (1.0 - C) / (B * B - 2.0 * B + 1.0 / C);
}

/// Coefficients of n^2, n^{1+delta}, n^{2delta} in a log-count or
/// log-heuristic expansion, with the remainder exponents (3delta-1, 1); the
/// n-power remainder carries a log n factor. When 2delta <= 1 the n^{2delta}
/// term is formally dominated by the remainder and is flagged as such.
struct ExpansionCoeffs {
  double c_n2 = 0.0;
  double c_n1d = 0.0;
  double c_n2d = 0.0;
  std::pair<double, double> error_exponents{0.0, 1.0};
  bool remainder_has_log = true;
  bool dominated_by_error = false;
};

inline double evaluate_expansion(const ExpansionCoeffs& e, double n, double delta) {
  return e.c_n2 * n * n + e.c_n1d * std::pow(n, 1.0 + delta) + e.c_n2d * std::pow(n, 2.0 * delta);
}

// JSON record keyed by exponent.
inline void to_json(nlohmann::json& j, const ExpansionCoeffs& e) {
  j = nlohmann::json{{"n^2", e.c_n2},
                     {"n^(1+delta)", e.c_n1d},
                     {"n^(2delta)", e.c_n2d},
                     {"error_exponents", {e.error_exponents.first, e.error_exponents.second}},
                     {"remainder_has_log", e.remainder_has_log},
                     {"dominated_by_error", e.dominated_by_error}};
}

namespace detail {

inline ExpansionCoeffs with_error_terms(ExpansionCoeffs e, double delta) {
  e.error_exponents = {3.0 * delta - 1.0, 1.0};
  e.remainder_has_log = true;
  e.dominated_by_error = (2.0 * delta <= 1.0);
  return e;
}

}  // namespace detail

/// Log-count expansion for the family margins (closed form):
///   f(C) n^2 + [2f(BC) - BC log((1-C)/C)] n^{1+delta}
///   + [f(z11*) + z11* log((1-C)/C * (BC)^2/(1-BC)^2) - B^2C/(2(1-C))] n^{2delta}.
inline ExpansionCoeffs log_count_expansion(const FamilyParams& p) {
  validate_family(p);
  require_asymptotic_admissible(p.B, p.C);
  const double B = p.B, C = p.C;
  const double zs = z11_star(B, C);
  ExpansionCoeffs e;
  e.c_n2 = bernoulli_entropy(C);
  e.c_n1d = 2.0 * bernoulli_entropy(B * C) - (B * C) * std::log((1.0 - C) / C);
  e.c_n2d = bernoulli_entropy(zs) +
            zs * std::log(((1.0 - C) / C) * (B * C) * (B * C) / ((1.0 - B * C) * (1.0 - B * C))) -
            B * B * C / (2.0 * (1.0 - C));
  return detail::with_error_terms(e, p.delta);
}

/// Same coefficients assembled from the block Taylor route: expand
/// f(bulk), f(edge), f(corner) around C, BC, z11* with the exact first- and
/// second-order terms of the block margin equations, then collect powers.
/// Independent evaluation path used to cross-check the closed form.
inline ExpansionCoeffs log_count_expansion_block_taylor(const FamilyParams& p) {
  validate_family(p);
  require_asymptotic_admissible(p.B, p.C);
  const double B = p.B, C = p.C;
  const double zs = z11_star(B, C);
  // bulk deviation: C - z3 = BC t - z11* t^2 + ..., edge: BC - z2 = z11* t (t = n^{delta-1})
  ExpansionCoeffs e;
  e.c_n2 = bernoulli_entropy(C);
  e.c_n1d = 2.0 * bernoulli_entropy(B * C) - bernoulli_entropy_d1(C) * (B * C);
  e.c_n2d = bernoulli_entropy(zs) + bernoulli_entropy_d1(C) * zs +
            0.5 * bernoulli_entropy_d2(C) * (B * C) * (B * C) -
            2.0 * bernoulli_entropy_d1(B * C) * zs;
  return detail::with_error_terms(e, p.delta);
}

/// Log of the independence-heuristic estimate for the family margins
/// (closed form):
///   f(C) n^2 + [2f(BC) - BC log((1-C)/C)] n^{1+delta}
///   + [(B^2C - 4BC + 2C)/(2(1-C)) + log(1-C) - 2 log(1-BC)] n^{2delta}.
inline ExpansionCoeffs log_heuristic_expansion(const FamilyParams& p) {
  validate_family(p);
  require_heuristic_admissible(p.B, p.C);
  const double B = p.B, C = p.C;
  ExpansionCoeffs e;
  e.c_n2 = bernoulli_entropy(C);
  e.c_n1d = 2.0 * bernoulli_entropy(B * C) - (B * C) * std::log((1.0 - C) / C);
  e.c_n2d = (B * B * C - 4.0 * B * C + 2.0 * C) / (2.0 * (1.0 - C)) + std::log(1.0 - C) -
            2.0 * std::log(1.0 - B * C);
  return detail::with_error_terms(e, p.delta);
}

/// Same coefficients assembled term by term from the Stirling form
///   ln I = N ln N + (mn-N) ln(mn-N) - sum r_i ln r_i - sum (n-r_i) ln(n-r_i)
///          - sum c_j ln c_j - sum (m-c_j) ln(m-c_j) + O((m+n) log mn)
/// with each log expanded to second order in n^{delta-1}. The ln n
/// multipliers must cancel power by power; their residual is verified.
inline ExpansionCoeffs log_heuristic_expansion_stirling(const FamilyParams& p) {
  validate_family(p);
  require_heuristic_admissible(p.B, p.C);
  const double B = p.B, C = p.C;
  const double BC = B * C;
  const double lC = std::log(C), l1C = std::log(1.0 - C);
  const double lBC = std::log(BC), l1BC = std::log(1.0 - BC);

  struct Acc {
    double c = 0.0;    // constant part
    double ln = 0.0;   // multiplier of log n
  };
  Acc n2, n1d, n2d;

  // N ln N, N = C n^2 + BC n^{1+delta}
  n2.c += C * lC;
  n2.ln += 2.0 * C;
  n1d.c += BC * lC + B * C;
  n1d.ln += 2.0 * BC;
  n2d.c += B * B * C / 2.0;

  // (mn - N) ln(mn - N), mn - N = (1-C) n^2 + (2-BC) n^{1+delta} + n^{2delta}
  const double a1 = (2.0 - BC) / (1.0 - C);
  const double a2 = (-2.0 - 2.0 * C + 4.0 * BC - B * B * C * C) / (2.0 * (1.0 - C) * (1.0 - C));
  n2.c += (1.0 - C) * l1C;
  n2.ln += 2.0 * (1.0 - C);
  n1d.c += (2.0 - BC) * l1C + (2.0 - BC);
  n1d.ln += 2.0 * (2.0 - BC);
  n2d.c += l1C + (2.0 - BC) * a1 + (1.0 - C) * a2;
  n2d.ln += 2.0;

  // -2 sum over the small-margin lines: r ln r and (D - r) ln(D - r)
  n1d.c -= 2.0 * BC * lBC;
  n1d.ln -= 2.0 * BC;
  n1d.c -= 2.0 * (1.0 - BC) * l1BC;
  n1d.ln -= 2.0 * (1.0 - BC);
  n2d.c -= 2.0 * (1.0 + l1BC);
  n2d.ln -= 2.0;

  // -2 sum over the bulk lines
  n2.c -= 2.0 * C * lC;
  n2.ln -= 2.0 * C;
  n2.c -= 2.0 * (1.0 - C) * l1C;
  n2.ln -= 2.0 * (1.0 - C);
  n1d.c -= 2.0 * (1.0 + l1C);
  n1d.ln -= 2.0;
  n2d.c -= 1.0 / (1.0 - C);

  if (std::abs(n2.ln) + std::abs(n1d.ln) + std::abs(n2d.ln) > 1e-9)
    throw std::logic_error("heuristic expansion: log n terms failed to cancel");

  ExpansionCoeffs e;
  e.c_n2 = n2.c;
  e.c_n1d = n1d.c;
  e.c_n2d = n2d.c;
  return detail::with_error_terms(e, p.delta);
}

/// Limit exponent of the correlation ratio at scale n^{2delta}:
///   Delta_{B,C} = 1 - x + log x,  x = (B^2 C - 2BC + 1)/(1 - C).
/// Equals the difference of the two n^{2delta} coefficients; zero iff B = 1.
inline double delta(double B, double C) {
  require_asymptotic_admissible(B, C);
  const double x = (B * B * C - 2.0 * B * C + 1.0) / (1.0 - C);
  return 1.0 - x + std::log(x);
}

/// Value of x = (B^2C - 2BC + 1)/(1-C) at the upper end B = bmax(C).
inline double gamma_c(double C) {
  if (!(C > 0.0 && C < 0.75)) throw std::domain_error("gamma_c: C must lie in (0, 3/4)");
  const double b = std::sqrt(C / 3.0 - C * C / 3.0) + C;  // 1 / bmax(C)
  return (C - 2.0 * C * b + b * b) / ((1.0 - C) * b * b);
}

/// Classical enclosure of Delta over B in (0, bmax(C)):
///   min(-1/C + log(1/C) + 1, -gamma_c + log gamma_c + 1) < Delta <= 0.
/// The first candidate is loose for C < 1/2 and incorrect for C > 1/2;
/// see delta_lower_bound_tight for the attained-infimum form.
struct DeltaBounds {
  double lower = 0.0;
  double upper = 0.0;
};

inline DeltaBounds delta_bounds(double C) {
  if (!(C > 0.0 && C < 0.75)) throw std::domain_error("delta_bounds: C must lie in (0, 3/4)");
  const double cand_b0 = -1.0 / C + std::log(1.0 / C) + 1.0;
  const double gc = gamma_c(C);
  const double cand_bmax = -gc + std::log(gc) + 1.0;
  return DeltaBounds{std::min(cand_b0, cand_bmax), 0.0};
}

/// Tight lower bound: x(B) = 1 + C(B-1)^2/(1-C) increases with |B-1|, so the
/// infimum of Delta = 1 - x + log x over B in (0, bmax) is approached at an
/// endpoint, where x tends to 1/(1-C) (B -> 0) or gamma_c (B -> bmax).
inline double delta_lower_bound_tight(double C) {
  if (!(C > 0.0 && C < 0.75))
    throw std::domain_error("delta_lower_bound_tight: C must lie in (0, 3/4)");
  const double x0 = 1.0 / (1.0 - C);
  const double cand_b0 = 1.0 - x0 + std::log(x0);
  const double gc = gamma_c(C);
  const double cand_bmax = 1.0 - gc + std::log(gc);
  return std::min(cand_b0, cand_bmax);
}

struct DeltaResult {
  double delta = 0.0;
  double lower_bound = 0.0;
  double gamma_c = 0.0;
};

inline DeltaResult delta_result(double B, double C) {
  return DeltaResult{bct::delta(B, C), delta_bounds(C).lower, bct::gamma_c(C)};
}

/// Limiting block values of the family typical table with the n^{delta-1}
/// error form. The bulk constant BC is exact; the corner and edge constants
/// have no closed form here and are estimated empirically by the
/// convergence experiment.
struct BlockPrediction {
  double corner = 0.0;  // z11*
  double edge = 0.0;    // BC
  double bulk = 0.0;    // C
  double bulk_error_constant = 0.0;  // exactly BC
  double error_exponent = 0.0;       // delta - 1
};

inline BlockPrediction finite_n_typical_prediction(const FamilyParams& p) {
  validate_family(p);
  require_asymptotic_admissible(p.B, p.C);
  BlockPrediction bp;
  bp.corner = z11_star(p.B, p.C);
  bp.edge = p.B * p.C;
  bp.bulk = p.C;
  bp.bulk_error_constant = p.B * p.C;
  bp.error_exponent = p.delta - 1.0;
  return bp;
}

}  // namespace bct
