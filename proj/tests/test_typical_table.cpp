#include <random>

#include "doctest.h"

#include "bct/exact_count.hpp"
#include "bct/typical_table.hpp"
#include "support/oracles.hpp"

using bct::make_margins;

TEST_CASE("bernoulli entropy: values and domain") {
  CHECK(bct::bernoulli_entropy(0.5) == doctest::Approx(M_LN2).epsilon(1e-15));
  CHECK(bct::bernoulli_entropy(0.0) == 0.0);
  CHECK(bct::bernoulli_entropy(1.0) == 0.0);
  CHECK(bct::bernoulli_entropy(0.25) ==
        doctest::Approx(0.25 * std::log(4.0) + 0.75 * std::log(4.0 / 3.0)).epsilon(1e-15));
  CHECK_THROWS_AS(bct::bernoulli_entropy(-0.1), std::domain_error);
  CHECK_THROWS_AS(bct::bernoulli_entropy(1.1), std::domain_error);
}

TEST_CASE("typical table: 2x2 with unit margins is flat one-half") {
  const auto t = bct::solve_typical_table(make_margins({1, 1}, {1, 1}));
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) CHECK(t.entries(i, j) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(t.entropy_value == doctest::Approx(4.0 * M_LN2).epsilon(1e-13));
  CHECK(t.residual <= 1e-10);
  // gauge: column duals have mean zero, so both vanish here
  CHECK(std::abs(t.col_duals[0]) < 1e-12);
  CHECK(std::abs(t.row_duals[0]) < 1e-10);
}

TEST_CASE("typical table: uniform margins give the constant table k/n") {
  const auto t = bct::solve_typical_table(make_margins({2, 2, 2}, {2, 2, 2}));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      CHECK(t.entries(i, j) == doctest::Approx(2.0 / 3.0).epsilon(1e-11));
  CHECK(t.entropy_value ==
        doctest::Approx(9.0 * bct::bernoulli_entropy(2.0 / 3.0)).epsilon(1e-12));
}

TEST_CASE("typical table: family instance matches the projected-gradient oracle") {
  const auto m = make_margins({1, 1, 2, 2, 2, 2}, {1, 1, 2, 2, 2, 2});
  const auto t = bct::solve_typical_table(m);
  const auto pg = oracles::projected_gradient_maximizer(m);
  CHECK((t.entries - pg).cwiseAbs().maxCoeff() < 1e-6);
  // three-value block structure
  CHECK(t.entries(0, 0) == doctest::Approx(t.entries(1, 1)).epsilon(1e-10));
  CHECK(t.entries(0, 2) == doctest::Approx(t.entries(5, 0)).epsilon(1e-10));
  CHECK(t.entries(2, 2) == doctest::Approx(t.entries(4, 5)).epsilon(1e-10));
  CHECK(bct::entry_value_groups(t).size() == 3);
  CHECK(t.entropy_value == doctest::Approx(20.07804768566986).epsilon(1e-9));
}

TEST_CASE("typical table: random instance agrees with the primal oracle") {
  const auto m = make_margins({2, 1, 3}, {2, 2, 1, 1});
  const auto t = bct::solve_typical_table(m);
  const auto pg = oracles::projected_gradient_maximizer(m);
  CHECK((t.entries - pg).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("typical table: KKT and margin residuals on random instances") {
  std::mt19937 rng(1133);
  for (int t = 0; t < 25; ++t) {
    const auto mp = oracles::random_interior_margins(rng, 12, 12);
    const auto table = bct::solve_typical_table(mp);
    CHECK(table.residual <= 1e-10);
    double kkt = 0.0;
    for (Eigen::Index i = 0; i < mp.rows.size(); ++i)
      for (Eigen::Index j = 0; j < mp.cols.size(); ++j) {
        const double z = table.entries(i, j);
        kkt = std::max(kkt, std::abs(std::log((1.0 - z) / z) + table.row_duals[i] +
                                     table.col_duals[j]));
      }
    CHECK(kkt <= 1e-8);
    // entries reproduce from the duals
    for (Eigen::Index i = 0; i < mp.rows.size(); ++i)
      for (Eigen::Index j = 0; j < mp.cols.size(); ++j)
        CHECK(table.entries(i, j) ==
              doctest::Approx(bct::logistic(table.row_duals[i] + table.col_duals[j]))
                  .epsilon(1e-12));
    CHECK(bct::entropy(table) == doctest::Approx(table.entropy_value).epsilon(1e-12));
  }
}

TEST_CASE("typical table: equal margins get equal lines") {
  std::mt19937 rng(7);
  const auto mp = make_margins({3, 1, 3, 2}, {2, 2, 2, 2, 1});
  const auto t = bct::solve_typical_table(mp);
  CHECK((t.entries.row(0) - t.entries.row(2)).cwiseAbs().maxCoeff() < 1e-9);
  for (int j = 0; j < 4; ++j)
    CHECK(t.entries(1, j) == doctest::Approx(t.entries(1, 0)).epsilon(1e-9));
}

TEST_CASE("typical table: transposing margins transposes the table") {
  const auto mp = make_margins({3, 1, 2}, {2, 2, 1, 1});
  const auto a = bct::solve_typical_table(mp);
  const auto b = bct::solve_typical_table(bct::transposed(mp));
  CHECK((a.entries - b.entries.transpose()).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("typical table: forced lines are eliminated exactly") {
  const auto t = bct::solve_typical_table(make_margins({3, 0}, {1, 1, 1}));
  for (int j = 0; j < 3; ++j) {
    CHECK(t.entries(0, j) == 1.0);
    CHECK(t.entries(1, j) == 0.0);
  }
  CHECK(t.residual == 0.0);
  CHECK(t.entropy_value == 0.0);
  CHECK(t.row_duals[0] == bct::pos_infinity);
  CHECK(t.row_duals[1] == bct::neg_infinity);

  // full column forces, remainder solves as a 2x2
  const auto u = bct::solve_typical_table(make_margins({2, 2}, {2, 1, 1}));
  CHECK(u.entries(0, 0) == 1.0);
  CHECK(u.entries(1, 0) == 1.0);
  CHECK(u.entries(0, 1) == doctest::Approx(0.5).epsilon(1e-11));
  CHECK(u.entries(1, 2) == doctest::Approx(0.5).epsilon(1e-11));
}

TEST_CASE("typical table: infeasible and forced-block margins raise") {
  CHECK_THROWS_AS(bct::solve_typical_table(make_margins({2, 2}, {3, 1})), bct::infeasible_error);
  CHECK_THROWS_AS(bct::solve_typical_table(make_margins({3, 1}, {2, 2})), bct::infeasible_error);
  CHECK_THROWS_AS(bct::solve_typical_table(make_margins({3, 3, 1, 1}, {3, 3, 1, 1})),
                  bct::empty_interior_error);
}

TEST_CASE("typical table: iteration cap raises a convergence error with residual") {
  bct::SolveOptions opt;
  opt.max_iterations = 0;
  try {
    bct::solve_typical_table(make_margins({1, 1}, {1, 1}), opt);
    FAIL("expected convergence_error");
  } catch (const bct::convergence_error& e) {
    CHECK(std::isinf(e.residual));
  }
}

TEST_CASE("typical table: collapsed and generic paths agree") {
  const auto fam = bct::build_family_margins({10, 0.5, 0.5, 0.5});
  bct::SolveOptions generic;
  generic.collapse_symmetry = false;
  const auto a = bct::solve_typical_table(fam);
  const auto b = bct::solve_typical_table(fam, generic);
  CHECK((a.entries - b.entries).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(a.entropy_value == doctest::Approx(b.entropy_value).epsilon(1e-12));
}

TEST_CASE("entropy upper bound dominates random polytope points") {
  for (const auto& mp : {make_margins({2, 2, 2}, {2, 2, 2}), make_margins({2, 1, 3}, {2, 2, 1, 1})}) {
    const auto t = bct::solve_typical_table(mp);
    const auto e = oracles::enumerate_tables(mp, true);
    REQUIRE(e.count > 1);
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int k = 0; k < 100; ++k) {
      // random convex mixture of up to four vertices
      Eigen::MatrixXd X = Eigen::MatrixXd::Zero(mp.rows.size(), mp.cols.size());
      double wsum = 0.0;
      for (int pick = 0; pick < 4; ++pick) {
        const double w = unif(rng);
        X += w * e.tables[std::uniform_int_distribution<std::size_t>(0, e.tables.size() - 1)(rng)];
        wsum += w;
      }
      X /= wsum;
      double g = 0.0;
      for (Eigen::Index i = 0; i < X.rows(); ++i)
        for (Eigen::Index j = 0; j < X.cols(); ++j) g += bct::bernoulli_entropy(X(i, j));
      CHECK(g <= t.entropy_value + 1e-9);
    }
  }
}

TEST_CASE("barvinok bounds: enclosure and degenerate gamma") {
  const auto m2 = make_margins({1, 1}, {1, 1});
  const auto b = bct::barvinok_bounds(m2, 1.0);
  CHECK(b.upper_log == doctest::Approx(4.0 * M_LN2).epsilon(1e-12));
  CHECK(b.lower_log == doctest::Approx(4.0 * M_LN2 - 4.0 * std::log(4.0)).epsilon(1e-12));
  const double exact = bct::count_dp(m2).log_count;
  CHECK(exact <= b.upper_log + 1e-9);
  CHECK(exact >= b.lower_log - 1e-9);

  const auto m3 = make_margins({2, 2, 2}, {2, 2, 2});
  const auto b3 = bct::barvinok_bounds(m3, 1.0);
  CHECK(b3.upper_log == doctest::Approx(9.0 * bct::bernoulli_entropy(2.0 / 3.0)).epsilon(1e-12));
  CHECK(std::log(6.0) <= b3.upper_log);

  const auto b0 = bct::barvinok_bounds(m3, 0.0);
  CHECK(b0.lower_log == b0.upper_log);
  CHECK_THROWS_AS(bct::barvinok_bounds(m3, -1.0), std::domain_error);
}

TEST_CASE("typical table JSON carries duals, blocks and diagnostics") {
  const auto t = bct::solve_typical_table(make_margins({1, 1, 2, 2, 2, 2}, {1, 1, 2, 2, 2, 2}));
  const auto j = bct::to_json(t);
  CHECK(j["blocks"].size() == 3);
  CHECK(j["row_duals"].size() == 6);
  CHECK(j.contains("entropy_value"));
  CHECK(j.contains("residual"));
  CHECK(j.contains("iterations"));

  const auto forced = bct::to_json(bct::solve_typical_table(make_margins({3, 0}, {1, 1, 1})));
  CHECK(forced["row_duals"][0] == "inf");
  CHECK(forced["row_duals"][1] == "-inf");
}
