#include "vanish/numerics.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

namespace vanish {

void require_finite(const Eigen::MatrixXd& m, const char* what) {
   if (!m.allFinite()) {
      throw std::invalid_argument(std::string(what) + ": non-finite entries");
   }
}

Regularization Regularization::from_multiplier(double multiplier, const Eigen::MatrixXd& b) {
   if (multiplier < 0.0) {
      throw std::invalid_argument("Regularization: negative alpha multiplier");
   }
   Regularization r;
   r.alpha_multiplier = multiplier;
   if (b.rows() > 0) {
      r.realized_alpha = multiplier * b.trace() / static_cast<double>(b.rows());
   }
   r.realized_alpha = std::max(r.realized_alpha, 0.0);
   return r;
}

Regularization Regularization::absolute(double alpha, const Eigen::MatrixXd& b) {
   if (alpha < 0.0) {
      throw std::invalid_argument("Regularization: negative alpha");
   }
   Regularization r;
   r.realized_alpha = alpha;
   const double tr = b.rows() > 0 ? b.trace() : 0.0;
   if (tr > 0.0) {
      r.alpha_multiplier = alpha * static_cast<double>(b.rows()) / tr;
   }
   return r;
}

void normalize_signs(Eigen::MatrixXd& vectors) {
   for (Eigen::Index j = 0; j < vectors.cols(); ++j) {
      Eigen::Index best = 0;
      double best_abs = -1.0;
      for (Eigen::Index i = 0; i < vectors.rows(); ++i) {
         const double a = std::abs(vectors(i, j));
         // Ties within rounding go to the lower index so +v and -v normalize identically.
         if (a > best_abs * (1.0 + 1e-12) + 1e-300) {
            best_abs = a;
            best = i;
         }
      }
      if (vectors(best, j) < 0.0) {
         vectors.col(j) *= -1.0;
      }
   }
}

namespace {

// Eigenvalues in (-tol, 0) become 0 with tol = max(1e-10 * |lambda|_max, floor).
EigenDecomposition clamped_eig(const Eigen::MatrixXd& a, double floor) {
   EigenDecomposition out;
   if (a.rows() == 0) {
      out.eigenvalues.resize(0);
      out.eigenvectors.resize(0, 0);
      return out;
   }
   const Eigen::MatrixXd sym = 0.5 * (a + a.transpose());
   Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
   if (solver.info() != Eigen::Success) {
      throw std::runtime_error("sym_eig: eigen-solver did not converge");
   }
   out.eigenvalues = solver.eigenvalues();
   out.eigenvectors = solver.eigenvectors();

   const double scale = out.eigenvalues.cwiseAbs().maxCoeff();
   const double tol = std::max(1e-10 * scale, floor);
   for (Eigen::Index i = 0; i < out.eigenvalues.size(); ++i) {
      double& l = out.eigenvalues[i];
      if (l < 0.0) {
         if (l > -tol || scale == 0.0) {
            l = 0.0;
         } else {
            std::ostringstream msg;
            msg << "sym_eig: eigenvalue " << l << " below -" << tol
                << "; input is not a Gram matrix";
            throw std::domain_error(msg.str());
         }
      }
   }
   normalize_signs(out.eigenvectors);
   return out;
}

} // namespace

EigenDecomposition sym_eig(const Eigen::MatrixXd& a) {
   if (a.rows() != a.cols()) {
      throw std::invalid_argument("sym_eig: matrix is not square");
   }
   require_finite(a, "sym_eig");
   return clamped_eig(a, 0.0);
}

EigenDecomposition gen_sym_eig(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                               const Regularization& reg) {
   if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows()) {
      throw std::invalid_argument("gen_sym_eig: A and B must be square and of equal size");
   }
   require_finite(a, "gen_sym_eig(A)");
   require_finite(b, "gen_sym_eig(B)");
   Eigen::MatrixXd rhs = 0.5 * (b + b.transpose());
   rhs.diagonal().array() += reg.realized_alpha;

   Eigen::LLT<Eigen::MatrixXd> llt(rhs);
   if (llt.info() != Eigen::Success) {
      std::ostringstream msg;
      msg << "gen_sym_eig: B + alpha I is not positive definite (alpha = " << reg.realized_alpha
          << "); increase the alpha multiplier";
      throw NotPositiveDefinite(msg.str());
   }
   // M = L^{-1} A L^{-T}
   Eigen::MatrixXd tmp = llt.matrixL().solve(a);
   Eigen::MatrixXd whitened = llt.matrixL().solve(tmp.transpose());
   // Rounding in A is amplified by up to 1 / lambda_min(B + alpha I) through the whitening;
   // the smallest Cholesky pivot stands in for lambda_min.
   const double pivot = llt.matrixLLT().diagonal().cwiseAbs2().minCoeff();
   const double noise = 16.0 * static_cast<double>(a.rows()) * std::numeric_limits<double>::epsilon() *
                        a.cwiseAbs().maxCoeff() / pivot;
   EigenDecomposition std_eig = clamped_eig(whitened, noise);

   EigenDecomposition out;
   out.eigenvalues = std_eig.eigenvalues;
   out.eigenvectors = llt.matrixU().solve(std_eig.eigenvectors);
   normalize_signs(out.eigenvectors);
   return out;
}

double pseudo_inverse_rtol(Eigen::Index rows, Eigen::Index cols) {
   return static_cast<double>(std::max(rows, cols)) * std::numeric_limits<double>::epsilon();
}

Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& m) {
   if (m.size() == 0) {
      return Eigen::MatrixXd::Zero(m.cols(), m.rows());
   }
   Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
   const Eigen::VectorXd& s = svd.singularValues();
   const double cutoff = pseudo_inverse_rtol(m.rows(), m.cols()) * s[0];
   Eigen::VectorXd inv = Eigen::VectorXd::Zero(s.size());
   for (Eigen::Index i = 0; i < s.size(); ++i) {
      if (s[i] > cutoff) {
         inv[i] = 1.0 / s[i];
      }
   }
   return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

ProjectionResult projection_residual(const Eigen::MatrixXd& c, const Eigen::MatrixXd& f) {
   if (c.rows() != f.rows()) {
      throw std::invalid_argument("projection_residual: row counts differ");
   }
   require_finite(c, "projection_residual(C)");
   require_finite(f, "projection_residual(F)");
   ProjectionResult out;
   if (f.cols() == 0) {
      out.residual = c;
      out.combination = Eigen::MatrixXd::Zero(0, c.cols());
      return out;
   }
   const Eigen::MatrixXd pinv = pseudo_inverse(f);
   out.combination = pinv * c;
   out.residual = subtract_product(c, f, out.combination);
   const Eigen::MatrixXd correction = pinv * out.residual;
   out.combination += correction;
   out.residual = subtract_product(c, f, out.combination);
   return out;
}

Eigen::MatrixXd subtract_product(const Eigen::MatrixXd& c, const Eigen::MatrixXd& f,
                                 const Eigen::MatrixXd& w) {
   if (f.cols() != w.rows() || c.rows() != f.rows() || c.cols() != w.cols()) {
      throw std::invalid_argument("subtract_product: dimension mismatch");
   }
   Eigen::MatrixXd out = c;
   if (f.cols() > 0) {
      out.noalias() -= f * w;
   }
   return out;
}

} // namespace vanish
