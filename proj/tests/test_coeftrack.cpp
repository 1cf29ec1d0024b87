#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "oracles.hpp"
#include "vanish/coeftrack.hpp"

#include <cmath>
#include <random>

using namespace vanish;

namespace {

CoefficientVector flat(const MonomialBasis& basis, std::initializer_list<double> values) {
   Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
   Eigen::Index i = 0;
   for (double x : values) v[i++] = x;
   return CoefficientVector::from_dense(basis, v);
}

Eigen::VectorXd random_flat(int n, int t, std::mt19937_64& rng) {
   return oracle::gaussian(static_cast<Eigen::Index>(monomial_count(n, t, true)), 1, rng);
}

} // namespace

TEST_CASE("coefficient vector basics") {
   MonomialBasis b(2);
   CoefficientVector h = flat(b, {1, -1, 0, 0, 2, 0});  // 1 - x + 2xy
   REQUIRE(h.blocks.size() == 3);
   CHECK(h.blocks[1].size() == 2);
   CHECK(h.norm() == doctest::Approx(std::sqrt(6.0)));
   CHECK(h.degree() == 2);
   CHECK(h.length() == 6);
   Eigen::VectorXd d = h.dense(b);
   Eigen::VectorXd want(6);
   want << 1, -1, 0, 0, 2, 0;
   CHECK((d - want).norm() == 0.0);
   CHECK(h.dense(b, nullptr, 3).size() == 10);

   CoefficientVector zero = flat(b, {0, 0, 0});
   CHECK(zero.degree() == -1);
   CHECK(zero.norm() == 0.0);
   CHECK_THROWS_AS(CoefficientVector::from_dense(b, Eigen::VectorXd::Zero(4)), std::invalid_argument);
}

TEST_CASE("coefficient matrix append zero-fills missing degrees") {
   MonomialBasis b(2);
   auto low = CoefficientMatrix::from_columns({flat(b, {1, 2, 3})});
   auto high = CoefficientMatrix::from_columns({flat(b, {0, 1, 0, 4, 5, 6})});
   low.append(high);
   CHECK(low.cols() == 2);
   CHECK(low.top_degree() == 2);
   CHECK(low.block(2).col(0).norm() == 0.0);
   CHECK((low.column(1).dense(b) - high.column(0).dense(b)).norm() == 0.0);
   CHECK(low.length() == 6);
}

TEST_CASE("combine") {
   MonomialBasis b(2);
   std::mt19937_64 rng(1);
   auto c = CoefficientMatrix::from_columns(
       {CoefficientVector::from_dense(b, random_flat(2, 2, rng)), CoefficientVector::from_dense(b, random_flat(2, 2, rng))});
   auto same = combine(c, Eigen::MatrixXd::Identity(2, 2));
   for (int j = 0; j < 2; ++j) CHECK((same.column(j).dense(b) - c.column(j).dense(b)).norm() == 0.0);
   auto zero = combine(c, Eigen::MatrixXd::Zero(2, 3));
   CHECK(zero.cols() == 3);
   CHECK(zero.column_norms().norm() == 0.0);
   CHECK_THROWS_AS(combine(c, Eigen::MatrixXd::Zero(3, 1)), std::invalid_argument);

   auto toy = CoefficientMatrix::from_columns({flat(b, {-0.05, 1, 0}), flat(b, {-0.05, 0, 1})});
   Eigen::MatrixXd v(2, 1);
   v << -std::sqrt(0.5), std::sqrt(0.5);
   Eigen::VectorXd g = combine(toy, v).column(0).dense(b);
   CHECK(std::abs(g[0]) <= 1e-15);
   CHECK(g[1] == doctest::Approx(-0.70710678));
   CHECK(g[2] == doctest::Approx(0.70710678));
}

TEST_CASE("subtract_combination matches dense arithmetic") {
   MonomialBasis b(3);
   std::mt19937_64 rng(2);
   std::vector<CoefficientVector> cs, fs;
   for (int j = 0; j < 3; ++j) cs.push_back(CoefficientVector::from_dense(b, random_flat(3, 2, rng)));
   for (int j = 0; j < 2; ++j) fs.push_back(CoefficientVector::from_dense(b, random_flat(3, 1, rng)));
   auto c = CoefficientMatrix::from_columns(cs);
   auto f = CoefficientMatrix::from_columns(fs);
   Eigen::MatrixXd w = oracle::gaussian(2, 3, rng);
   auto r = subtract_combination(c, f, w);
   for (int j = 0; j < 3; ++j) {
      Eigen::VectorXd want = cs[static_cast<std::size_t>(j)].dense(b);
      for (int i = 0; i < 2; ++i) want -= w(i, j) * fs[static_cast<std::size_t>(i)].dense(b, nullptr, 2);
      CHECK((r.column(j).dense(b) - want).norm() <= 1e-14);
   }
}

TEST_CASE("multiply_by_linear examples") {
   MonomialBasis b(2);
   std::mt19937_64 rng(3);
   CoefficientVector q = CoefficientVector::from_dense(b, random_flat(2, 3, rng));
   CoefficientVector one = flat(b, {1, 0, 0});
   CHECK((multiply_by_linear(b, one, q).dense(b, nullptr, 4) - q.dense(b, nullptr, 4)).norm() == 0.0);

   CoefficientVector p = flat(b, {-0.05, 1, 0});
   Eigen::VectorXd sq = multiply_by_linear(b, p, p).dense(b);
   Eigen::VectorXd want(6);
   want << 0.0025, -0.1, 0, 1, 0, 0;
   CHECK((sq - want).norm() <= 1e-15);

   const double h = std::sqrt(0.5);
   CoefficientVector f2 = flat(b, {-0.1 * h, h, h});
   CoefficientVector f2sq = multiply_by_linear(b, f2, f2);
   CHECK(f2sq.blocks[2][0] == doctest::Approx(0.5));
   CHECK(f2sq.blocks[2][1] == doctest::Approx(1.0));
   CHECK(f2sq.blocks[2][2] == doctest::Approx(0.5));

   CHECK_THROWS_AS(multiply_by_linear(b, q, q), std::invalid_argument);
}

TEST_CASE("expand_oracle examples") {
   MonomialBasis b1(1);
   Eigen::VectorXd d = expand_oracle(1, flat(b1, {1, -1}), flat(b1, {1, 1})).dense(b1);
   REQUIRE(d.size() == 3);
   CHECK(d[0] == 1);
   CHECK(d[1] == 0);
   CHECK(d[2] == -1);

   MonomialBasis b2(2);
   CoefficientVector s = flat(b2, {0, 1, 1});
   CoefficientVector sq = expand_oracle(2, s, s);
   CHECK(sq.blocks[2][0] == 1);
   CHECK(sq.blocks[2][1] == 2);
   CHECK(sq.blocks[2][2] == 1);
}

TEST_CASE("propagation equals brute-force expansion") {
   std::mt19937_64 rng(4);
   for (int trial = 0; trial < 200; ++trial) {
      const int n = 1 + trial % 3;
      const int t = trial % 5;
      MonomialBasis b(n);
      Eigen::VectorXd pf = random_flat(n, 1, rng), qf = random_flat(n, t, rng);
      CoefficientVector p = CoefficientVector::from_dense(b, pf), q = CoefficientVector::from_dense(b, qf);
      Eigen::VectorXd ours = multiply_by_linear(b, p, q).dense(b, nullptr, t + 1);
      Eigen::VectorXd ref = oracle::to_flat(n, oracle::multiply(oracle::from_flat(n, pf), oracle::from_flat(n, qf)), t + 1);
      CHECK((ours - ref).cwiseAbs().maxCoeff() <= 1e-12);
      CHECK((expand_oracle(n, p, q).dense(b, nullptr, t + 1) - ref).cwiseAbs().maxCoeff() <= 1e-12);
   }
}

TEST_CASE("expand_oracle handles higher-degree factors") {
   std::mt19937_64 rng(5);
   MonomialBasis b(2);
   Eigen::VectorXd pf = random_flat(2, 3, rng), qf = random_flat(2, 3, rng);
   Eigen::VectorXd ref = oracle::to_flat(2, oracle::multiply(oracle::from_flat(2, pf), oracle::from_flat(2, qf)), 6);
   Eigen::VectorXd got = expand_oracle(2, CoefficientVector::from_dense(b, pf), CoefficientVector::from_dense(b, qf))
                             .dense(b, nullptr, 6);
   CHECK((got - ref).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("truncated multiplication drops unselected coefficients") {
   MonomialBasis b(2);
   std::mt19937_64 rng(6);
   TruncationState trunc(0.5);
   trunc.push(DegreeSelection{}, 1);
   trunc.push(DegreeSelection{false, {1}, 0.9}, 2);  // keep y only
   CHECK(trunc.truncated());
   CHECK(trunc.gamma_product() == doctest::Approx(0.9));
   CHECK(trunc.gamma_product_before(1) == 1.0);

   Eigen::VectorXd pf = random_flat(2, 1, rng);
   CoefficientVector p = CoefficientVector::from_dense(b, pf);
   CoefficientVector q;
   q.blocks = {Eigen::VectorXd::Constant(1, 0.3), Eigen::VectorXd::Constant(1, -1.2)};
   CoefficientVector out = multiply_by_linear(b, p, q, &trunc);
   REQUIRE(out.blocks.size() == 3);
   CHECK(out.blocks[1].size() == 1);
   CHECK(out.blocks[2].size() == 3);

   Eigen::VectorXd qdense = q.dense(b, &trunc);
   CHECK(qdense[1] == 0.0);
   Eigen::VectorXd ref = oracle::to_flat(2, oracle::multiply(oracle::from_flat(2, pf), oracle::from_flat(2, qdense)), 2);
   ref[1] = 0.0;  // x is not selected at degree 1
   CHECK((out.dense(b, &trunc) - ref).cwiseAbs().maxCoeff() <= 1e-14);

   // p may also arrive restricted to the degree-1 selection.
   CoefficientVector p_short = p;
   p_short.blocks[1] = Eigen::VectorXd::Constant(1, pf[2]);
   CoefficientVector out_short = multiply_by_linear(b, p_short, q, &trunc);
   Eigen::VectorXd p_dropped = pf;
   p_dropped[1] = 0.0;
   Eigen::VectorXd ref_short =
       oracle::to_flat(2, oracle::multiply(oracle::from_flat(2, p_dropped), oracle::from_flat(2, qdense)), 2);
   ref_short[1] = 0.0;
   CHECK((out_short.dense(b, &trunc) - ref_short).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("gram") {
   MonomialBasis b(2);
   auto ortho = CoefficientMatrix::from_columns({flat(b, {1, 0, 0}), flat(b, {0, 0, 1})});
   CHECK((gram(ortho) - Eigen::MatrixXd::Identity(2, 2)).norm() == 0.0);
   auto single = CoefficientMatrix::from_columns({flat(b, {1, 2, 2})});
   CHECK(gram(single)(0, 0) == doctest::Approx(9.0));
   auto toy = CoefficientMatrix::from_columns({flat(b, {-2.00, -0.096, -0.0963, 0.5, 1, 0.5})});
   CHECK(std::abs(gram(toy)(0, 0) - 5.51) <= 0.01);

   std::mt19937_64 rng(7);
   for (int trial = 0; trial < 20; ++trial) {
      std::vector<CoefficientVector> cols;
      for (int j = 0; j < 4; ++j) cols.push_back(CoefficientVector::from_dense(b, random_flat(2, 2, rng)));
      cols.push_back(cols[0]);
      Eigen::MatrixXd g = gram(CoefficientMatrix::from_columns(cols));
      CHECK((g - g.transpose()).norm() == 0.0);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
      CHECK(es.eigenvalues().minCoeff() >= -1e-10 * g.trace());
   }
}

TEST_CASE("truncate_select examples") {
   Eigen::MatrixXd delta(3, 1);
   delta << 3, 4, 0;
   auto s = truncate_select(delta, 0.8);
   CHECK_FALSE(s.full);
   CHECK(s.kept == std::vector<Index>{1});
   CHECK(s.gamma == doctest::Approx(0.8));

   auto all = truncate_select(delta, 1.0);
   CHECK(all.full);
   CHECK(all.gamma == 1.0);

   Eigen::MatrixXd two(5, 2);
   two << 1, 0, 0, 2, 3, 0, 0, 0.5, 0.1, 0.1;
   auto floor = truncate_select(two, 0.0);
   CHECK(floor.kept.size() == 2);
   CHECK(floor.kept == std::vector<Index>{1, 2});

   Eigen::MatrixXd tie(3, 1);
   tie << 1, 1, 1;
   CHECK(truncate_select(tie, 0.0).kept == std::vector<Index>{0});

   CHECK_THROWS_AS(truncate_select(Eigen::MatrixXd::Zero(3, 1), 0.5), std::domain_error);
   CHECK_THROWS_AS(truncate_select(delta, 1.5), std::invalid_argument);
}

TEST_CASE("truncate_select budget, floor and gamma") {
   std::mt19937_64 rng(8);
   std::uniform_real_distribution<double> unit(0.0, 1.0);
   for (int trial = 0; trial < 100; ++trial) {
      const Eigen::Index rows = 3 + trial % 10, cols = 1 + trial % 3;
      Eigen::MatrixXd block = oracle::gaussian(rows, cols, rng);
      const double theta = unit(rng);
      auto s = truncate_select(block, theta);
      Eigen::VectorXd d2 = block.rowwise().squaredNorm();
      const double total = d2.sum();
      std::vector<Index> kept = s.kept;
      if (s.full) {
         kept.resize(static_cast<std::size_t>(rows));
         for (Eigen::Index i = 0; i < rows; ++i) kept[static_cast<std::size_t>(i)] = static_cast<Index>(i);
      }
      CHECK(kept.size() >= static_cast<std::size_t>(cols));
      double mass = 0.0;
      for (Index i : kept) mass += d2[static_cast<Eigen::Index>(i)];
      if (kept.size() > static_cast<std::size_t>(cols)) CHECK(mass <= theta * theta * total * (1 + 1e-12));
      CHECK(s.gamma == doctest::Approx(std::sqrt(mass / total)));
      CHECK(s.gamma > 0.0);
      CHECK(s.gamma <= 1.0);
      // Kept rows are the heaviest ones.
      double lightest_kept = 1e300, heaviest_dropped = 0.0;
      for (Eigen::Index i = 0; i < rows; ++i) {
         const bool in = std::find(kept.begin(), kept.end(), static_cast<Index>(i)) != kept.end();
         if (in) lightest_kept = std::min(lightest_kept, d2[i]);
         else heaviest_dropped = std::max(heaviest_dropped, d2[i]);
      }
      CHECK(lightest_kept >= heaviest_dropped);
      // Truncation never increases a norm.
      Eigen::MatrixXd kept_rows = restrict_rows(block, s);
      for (Eigen::Index j = 0; j < cols; ++j) CHECK(kept_rows.col(j).norm() <= block.col(j).norm());
   }
}

TEST_CASE("truncated normalization matrix") {
   MonomialBasis b(2);
   auto c = CoefficientMatrix::from_columns({flat(b, {0.8, 0, 0})});
   CHECK(truncated_normalization_matrix(c, 1.0)(0, 0) == doctest::Approx(0.64));
   CHECK(truncated_normalization_matrix(c, 0.8)(0, 0) == doctest::Approx(0.8));
   CHECK_THROWS_AS(truncated_normalization_matrix(c, 0.0), std::invalid_argument);

   std::mt19937_64 rng(9);
   auto full = CoefficientMatrix::from_columns(
       {CoefficientVector::from_dense(b, random_flat(2, 2, rng)), CoefficientVector::from_dense(b, random_flat(2, 2, rng))});
   CHECK((truncated_normalization_matrix(full, 1.0) - gram(full)).norm() == 0.0);
}

TEST_CASE("truncation state validation") {
   CHECK_THROWS_AS(TruncationState(1.2), std::invalid_argument);
   TruncationState s(0.5);
   CHECK_FALSE(s.truncated());
   CHECK(s.gamma_product() == 1.0);
   CHECK_THROWS_AS(s.push(DegreeSelection{false, {2, 1}, 0.5}, 3), std::invalid_argument);
   CHECK_THROWS_AS(s.push(DegreeSelection{false, {0}, 0.0}, 3), std::invalid_argument);
   CHECK_THROWS_AS(s.selection(4), std::out_of_range);
}
