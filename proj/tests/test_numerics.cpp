#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "oracles.hpp"
#include "vanish/numerics.hpp"

#include <cmath>
#include <limits>
#include <random>

using namespace vanish;

namespace {

Eigen::MatrixXd toy_c1() {
   Eigen::MatrixXd x = oracle::toy_points();
   return x.rowwise() - x.colwise().mean();
}

void check_sign_convention(const Eigen::MatrixXd& v) {
   for (Eigen::Index j = 0; j < v.cols(); ++j) {
      Eigen::Index arg = 0;
      v.col(j).cwiseAbs().maxCoeff(&arg);
      CHECK(v(arg, j) > 0);
   }
}

} // namespace

TEST_CASE("sym_eig on the toy degree-1 Gram matrix") {
   Eigen::MatrixXd c = toy_c1();
   auto e = sym_eig(c.transpose() * c);
   CHECK(std::abs(e.eigenvalues[0] - 0.01) <= 0.005);
   CHECK(std::abs(e.eigenvalues[1] - 8.01) <= 0.005);
}

TEST_CASE("sym_eig trivial cases") {
   auto i3 = sym_eig(Eigen::MatrixXd::Identity(3, 3));
   CHECK((i3.eigenvalues - Eigen::VectorXd::Ones(3)).norm() <= 1e-14);

   Eigen::MatrixXd d = Eigen::Vector2d(9, 4).asDiagonal();
   auto e = sym_eig(d);
   CHECK(e.eigenvalues[0] == doctest::Approx(4));
   CHECK(e.eigenvalues[1] == doctest::Approx(9));
   CHECK(std::abs(e.eigenvectors(1, 0)) == doctest::Approx(1));
   CHECK(std::abs(e.eigenvectors(0, 1)) == doctest::Approx(1));
   check_sign_convention(e.eigenvectors);
}

TEST_CASE("sym_eig residuals, ordering and clamping") {
   std::mt19937_64 rng(2);
   for (int trial = 0; trial < 30; ++trial) {
      const int dim = 1 + trial % 7;
      Eigen::MatrixXd g = oracle::gaussian(dim, std::max(1, dim - 2), rng);
      Eigen::MatrixXd a = g * g.transpose();
      auto e = sym_eig(a);
      const double scale = a.norm();
      for (Eigen::Index i = 0; i < dim; ++i) {
         CHECK(e.eigenvalues[i] >= 0.0);
         if (i > 0) CHECK(e.eigenvalues[i] >= e.eigenvalues[i - 1]);
         CHECK((a * e.eigenvectors.col(i) - e.eigenvalues[i] * e.eigenvectors.col(i)).norm() <= 1e-8 * scale);
         CHECK(e.eigenvectors.col(i).norm() == doctest::Approx(1.0));
      }
      check_sign_convention(e.eigenvectors);
      auto again = sym_eig(a);
      CHECK((again.eigenvectors - e.eigenvectors).norm() == 0.0);
   }
}

TEST_CASE("sym_eig rejects bad input") {
   Eigen::MatrixXd neg = Eigen::Vector2d(-1, 1).asDiagonal();
   CHECK_THROWS(sym_eig(neg));
   Eigen::MatrixXd nan = Eigen::MatrixXd::Identity(2, 2);
   nan(0, 1) = std::numeric_limits<double>::quiet_NaN();
   CHECK_THROWS_AS(sym_eig(nan), std::invalid_argument);
}

TEST_CASE("regularization scheme") {
   Eigen::MatrixXd b = Eigen::Vector3d(1, 2, 3).asDiagonal();
   auto r = Regularization::from_multiplier(1e-6, b);
   CHECK(r.realized_alpha == doctest::Approx(2e-6));
   CHECK(Regularization::from_multiplier(0.0, b).realized_alpha == 0.0);
   CHECK(Regularization::from_multiplier(1.0, Eigen::MatrixXd::Zero(3, 3)).realized_alpha == 0.0);
   CHECK(Regularization::absolute(0.5, b).realized_alpha == 0.5);
   CHECK_THROWS_AS(Regularization::from_multiplier(-1.0, b), std::invalid_argument);
}

TEST_CASE("gen_sym_eig with B = I matches sym_eig") {
   std::mt19937_64 rng(4);
   Eigen::MatrixXd g = oracle::gaussian(5, 5, rng);
   Eigen::MatrixXd a = g * g.transpose();
   auto s = sym_eig(a);
   auto gen = gen_sym_eig(a, Eigen::MatrixXd::Identity(5, 5), Regularization::none());
   CHECK((s.eigenvalues - gen.eigenvalues).norm() <= 1e-10 * a.norm());
   CHECK((s.eigenvectors - gen.eigenvectors).norm() <= 1e-8);
}

TEST_CASE("gen_sym_eig against an independent generalized solver") {
   std::mt19937_64 rng(6);
   for (int trial = 0; trial < 20; ++trial) {
      const int dim = 2 + trial % 5;
      Eigen::MatrixXd ga = oracle::gaussian(dim, dim, rng), gb = oracle::gaussian(dim, dim, rng);
      Eigen::MatrixXd a = ga * ga.transpose();
      Eigen::MatrixXd b = gb * gb.transpose() + 0.1 * Eigen::MatrixXd::Identity(dim, dim);
      auto ours = gen_sym_eig(a, b, Regularization::none());
      Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ref(a, b);
      CHECK((ours.eigenvalues - ref.eigenvalues()).norm() <= 1e-8 * ref.eigenvalues().norm());
      Eigen::MatrixXd gram = ours.eigenvectors.transpose() * b * ours.eigenvectors;
      CHECK((gram - Eigen::MatrixXd::Identity(dim, dim)).norm() <= 1e-8);
      for (Eigen::Index i = 0; i < dim; ++i) {
         const Eigen::VectorXd v = ours.eigenvectors.col(i);
         const double lhs = v.dot(a * v);
         CHECK(std::abs(lhs - ours.eigenvalues[i] * v.dot(b * v)) <= 1e-8 * std::max(1.0, std::abs(lhs)));
      }
      check_sign_convention(ours.eigenvectors);
   }
}

TEST_CASE("gen_sym_eig perturbation by alpha") {
   std::mt19937_64 rng(8);
   const double alpha = 1e-6;
   for (int trial = 0; trial < 10; ++trial) {
      auto pair = oracle::random_psd_pair(6, 4, rng);
      auto exact = oracle::reduced_gep(pair);
      auto ours = gen_sym_eig(pair.a, pair.b, Regularization::absolute(alpha, pair.b));
      // The two zero eigenvalues come from nullspace(B); the nonzero ones follow.
      for (Eigen::Index k = 0; k < 4; ++k) {
         const double predicted = exact.values[k] / (1 + alpha * exact.vectors.col(k).squaredNorm());
         CHECK(std::abs(ours.eigenvalues[2 + k] - predicted) <= 1e-8 * std::max(1.0, exact.values[k]));
      }
      CHECK(std::abs(ours.eigenvalues[0]) <= 1e-8);
      CHECK(std::abs(ours.eigenvalues[1]) <= 1e-8);
   }
}

TEST_CASE("gen_sym_eig edge cases") {
   Eigen::MatrixXd b = Eigen::Vector3d(1, 2, 3).asDiagonal();
   auto zero = gen_sym_eig(Eigen::MatrixXd::Zero(3, 3), b, Regularization::none());
   CHECK(zero.eigenvalues.norm() == 0.0);

   Eigen::MatrixXd singular = Eigen::Vector2d(1, 0).asDiagonal();
   CHECK_THROWS_AS(gen_sym_eig(Eigen::MatrixXd::Identity(2, 2), singular, Regularization::none()),
                   NotPositiveDefinite);
   CHECK_NOTHROW(gen_sym_eig(Eigen::MatrixXd::Identity(2, 2), singular, Regularization::absolute(1e-3, singular)));
   CHECK_THROWS_AS(gen_sym_eig(Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Identity(3, 3),
                               Regularization::none()),
                   std::invalid_argument);
}

TEST_CASE("projection of the toy variables") {
   Eigen::MatrixXd x = oracle::toy_points();
   auto r = projection_residual(x, Eigen::MatrixXd::Ones(4, 1));
   CHECK(r.combination(0, 0) == doctest::Approx(0.05));
   CHECK(r.combination(0, 1) == doctest::Approx(0.05));
   CHECK((r.residual - toy_c1()).norm() <= 1e-14);
}

TEST_CASE("projection properties") {
   std::mt19937_64 rng(9);
   for (int trial = 0; trial < 20; ++trial) {
      const int s = 8, f = 1 + trial % 4, m = 1 + trial % 3;
      Eigen::MatrixXd fe = oracle::gaussian(s, f, rng);
      if (trial % 2 == 1) fe.col(0) = fe.col(f - 1) * 3.0;  // rank-deficient F
      Eigen::MatrixXd c = oracle::gaussian(s, m, rng);
      auto once = projection_residual(c, fe);
      CHECK((fe.transpose() * once.residual).cwiseAbs().maxCoeff() <= 1e-8 * c.norm());
      CHECK((c - fe * once.combination - once.residual).norm() <= 1e-12 * c.norm());
      auto twice = projection_residual(once.residual, fe);
      CHECK((twice.residual - once.residual).norm() <= 1e-10 * c.norm());

      auto inside = projection_residual(fe * oracle::gaussian(f, m, rng), fe);
      CHECK(inside.residual.norm() <= 1e-10 * std::max(1.0, fe.norm()));
   }

   Eigen::MatrixXd q = oracle::random_orthonormal(6, 2, rng);
   Eigen::MatrixXd c = oracle::gaussian(6, 3, rng);
   auto r = projection_residual(c, q);
   CHECK((r.residual - (c - q * q.transpose() * c)).norm() <= 1e-12);
}

TEST_CASE("pseudo inverse cutoff") {
   CHECK(pseudo_inverse_rtol(5, 3) == doctest::Approx(5 * std::numeric_limits<double>::epsilon()));
   Eigen::MatrixXd m = Eigen::Vector3d(1.0, 1e-20, 2.0).asDiagonal();
   Eigen::MatrixXd p = pseudo_inverse(m);
   CHECK(p(0, 0) == doctest::Approx(1.0));
   CHECK(p(1, 1) == 0.0);
   CHECK(p(2, 2) == doctest::Approx(0.5));
   Eigen::MatrixXd just_above = Eigen::Vector2d(1.0, 1e-14).asDiagonal();
   CHECK(pseudo_inverse(just_above)(1, 1) == doctest::Approx(1e14));
}
