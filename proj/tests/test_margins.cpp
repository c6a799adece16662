#include <random>

#include "doctest.h"

#include "bct/margins.hpp"
#include "support/oracles.hpp"

using bct::make_margins;

TEST_CASE("family margins: two-valued construction") {
  const auto m = bct::build_family_margins({4, 0.5, 0.5, 0.5});
  REQUIRE(m.rows.size() == 6);
  CHECK(m.rows[0] == 1);
  CHECK(m.rows[1] == 1);
  for (int i = 2; i < 6; ++i) CHECK(m.rows[i] == 2);
  CHECK(m.cols == m.rows);

  const auto u = bct::build_family_margins({9, 0.5, 1.0, 1.0 / 3.0});
  REQUIRE(u.rows.size() == 12);
  for (Eigen::Index i = 0; i < u.rows.size(); ++i) CHECK(u.rows[i] == 3);

  const auto big = bct::build_family_margins({100, 0.5, 0.5, 0.5});
  REQUIRE(big.rows.size() == 110);
  for (int i = 0; i < 10; ++i) CHECK(big.rows[i] == 25);
  for (int i = 10; i < 110; ++i) CHECK(big.rows[i] == 50);
}

TEST_CASE("family margins: rejected parameters") {
  CHECK_THROWS_AS(bct::build_family_margins({4, 0.5, 0.1, 0.5}), std::domain_error);  // floor(BCn)=0
  CHECK_THROWS_AS(bct::build_family_margins({2, 0.5, 0.5, 0.4}), std::domain_error);  // floor(Cn)=0
  CHECK_THROWS_AS(bct::build_family_margins({4, 0.1, 2.2, 0.9}), std::domain_error);  // margin > dim
  CHECK_THROWS_AS(bct::build_family_margins({0, 0.5, 0.5, 0.5}), std::domain_error);
  CHECK_THROWS_AS(bct::build_family_margins({4, 1.5, 0.5, 0.5}), std::domain_error);
  CHECK_THROWS_AS(bct::build_family_margins({4, 0.5, -1.0, 0.5}), std::domain_error);
}

TEST_CASE("margin validation") {
  CHECK_THROWS_AS(bct::validate_margins(make_margins({}, {1})), std::domain_error);
  CHECK_THROWS_AS(bct::validate_margins(make_margins({-1, 1}, {0})), std::domain_error);
  CHECK_THROWS_AS(bct::validate_margins(make_margins({2, 1}, {1, 1})), std::domain_error);
  CHECK_NOTHROW(bct::validate_margins(make_margins({0, 0}, {0})));
}

TEST_CASE("bmax: values and domain") {
  CHECK(bct::bmax(0.25) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(bct::bmax(0.5) == doctest::Approx(1.2679491924311228).epsilon(1e-15));
  CHECK(bct::bmax(0.125) == doctest::Approx(3.1651513899116805).epsilon(1e-12));
  CHECK_THROWS_AS(bct::bmax(0.0), std::domain_error);
  CHECK_THROWS_AS(bct::bmax(0.75), std::domain_error);
  CHECK_THROWS_AS(bct::bmax(-0.1), std::domain_error);
}

TEST_CASE("bmax: decreasing, above one, product below one") {
  double prev = bct::bmax(1e-4);
  for (int k = 1; k <= 300; ++k) {
    const double C = 0.7498 * k / 300.0 + 1e-4;
    const double b = bct::bmax(C);
    CHECK(b < prev);
    CHECK(b > 1.0);
    CHECK(b * C < 1.0);
    prev = b;
  }
}

TEST_CASE("is_feasible: examples") {
  CHECK(bct::is_feasible(make_margins({1, 1}, {1, 1})));
  CHECK(bct::is_feasible(make_margins({3, 0}, {1, 1, 1})));
  CHECK(bct::is_feasible(make_margins({2, 2}, {2, 1, 1})));
  CHECK_FALSE(bct::is_feasible(make_margins({2, 2}, {3, 1})));  // column sum exceeds m
  CHECK_FALSE(bct::is_feasible(make_margins({3, 1}, {2, 2})));  // Gale-Ryser violation
}

namespace {

// odometer over integer vectors with entries in [0, base]
bool next_vector(Eigen::VectorXi& v, int base) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (v[i] < base) {
      ++v[i];
      return true;
    }
    v[i] = 0;
  }
  return false;
}

}  // namespace

TEST_CASE("is_feasible agrees with brute-force count > 0") {
  // exhaustive over all equal-sum margin pairs with m, n <= 3
  for (int m = 1; m <= 3; ++m)
    for (int n = 1; n <= 3; ++n) {
      Eigen::VectorXi rows = Eigen::VectorXi::Zero(m);
      do {
        Eigen::VectorXi cols = Eigen::VectorXi::Zero(n);
        do {
          if (rows.sum() != cols.sum()) continue;
          const bct::MarginPair mp{rows, cols};
          CHECK(bct::is_feasible(mp) == (oracles::enumerate_tables(mp).count > 0));
        } while (next_vector(cols, m));
      } while (next_vector(rows, n));
    }

  // randomized up to 20 cells
  std::mt19937 rng(12345);
  for (int t = 0; t < 200; ++t) {
    std::uniform_int_distribution<int> md(1, 5);
    const int m = md(rng);
    std::uniform_int_distribution<int> nd(1, 20 / m);
    const auto mp = oracles::random_margin_vectors(rng, m, nd(rng));
    CHECK(bct::is_feasible(mp) == (oracles::enumerate_tables(mp).count > 0));
  }
}

TEST_CASE("has_interior matches the forced-entry oracle") {
  std::mt19937 rng(777);
  int interior_seen = 0, flat_seen = 0;
  for (int t = 0; t < 300; ++t) {
    std::uniform_int_distribution<int> md(1, 4), nd(1, 4);
    const auto mp = (t % 2 == 0) ? oracles::random_matrix_margins(rng, md(rng), nd(rng))
                                 : oracles::random_margin_vectors(rng, md(rng), nd(rng));
    const auto e = oracles::enumerate_tables(mp);
    const bool oracle = e.count > 0 && (e.min_entry.array() != e.max_entry.array()).all();
    CHECK(bct::has_interior(mp) == oracle);
    (oracle ? interior_seen : flat_seen) += 1;
  }
  CHECK(interior_seen >= 15);  // the sample must exercise both outcomes
  CHECK(flat_seen >= 15);

  CHECK(bct::has_interior(make_margins({1, 1}, {1, 1})));
  CHECK_FALSE(bct::has_interior(make_margins({3, 3, 1, 1}, {3, 3, 1, 1})));  // forced block
  CHECK_FALSE(bct::has_interior(make_margins({3, 0}, {1, 1, 1})));           // forced lines
}

TEST_CASE("family margins are feasible across admissible parameters") {
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> cd(0.02, 0.73), ud(0.05, 0.95);
  const double deltas[] = {0.3, 0.5, 0.7, 0.9};
  const int ns[] = {4, 7, 12, 30, 80};
  int built = 0;
  for (int t = 0; t < 400; ++t) {
    const double C = cd(rng);
    const double B = ud(rng) * bct::bmax(C);
    const bct::FamilyParams p{ns[t % 5], deltas[t % 4], B, C};
    bct::MarginPair m;
    try {
      m = bct::build_family_margins(p);
    } catch (const std::domain_error&) {
      continue;  // zero-margin floors at small n
    }
    ++built;
    CHECK_NOTHROW(bct::validate_margins(m));
    CHECK(bct::is_feasible(m));
  }
  CHECK(built > 200);
}

TEST_CASE("margin JSON round trip") {
  const auto m = make_margins({2, 0, 3}, {1, 2, 1, 1});
  const nlohmann::json j = m;
  CHECK(j["rows"] == nlohmann::json({2, 0, 3}));
  const auto back = j.get<bct::MarginPair>();
  CHECK(back.rows == m.rows);
  CHECK(back.cols == m.cols);

  const bct::FamilyParams p{50, 0.5, 0.75, 0.25};
  const nlohmann::json pj = p;
  const auto pback = pj.get<bct::FamilyParams>();
  CHECK(pback.n == 50);
  CHECK(pback.delta == 0.5);
  CHECK(pback.B == 0.75);
  CHECK(pback.C == 0.25);
}

TEST_CASE("transpose and complement helpers") {
  const auto m = make_margins({2, 1}, {1, 1, 1});
  const auto t = bct::transposed(m);
  CHECK(t.rows == m.cols);
  const auto c = bct::complemented(m);
  CHECK(c.rows[0] == 1);  // n - 2
  CHECK(c.rows[1] == 2);
  CHECK(c.cols[0] == 1);  // m - 1
  CHECK(bct::is_feasible(c) == bct::is_feasible(m));
}
