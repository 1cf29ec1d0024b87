#pragma once

#include <Eigen/Core>

#include <stdexcept>

namespace vanish {

/// Eigenvalues ascending; column i of `eigenvectors` pairs with eigenvalue i. The
/// largest-magnitude component of each eigenvector is positive (first index on ties).
struct EigenDecomposition {
   Eigen::VectorXd eigenvalues;
   Eigen::MatrixXd eigenvectors;
};

/// Ridge term for the generalized problem A v = lambda (B + alpha I) v, with
/// alpha = alpha_multiplier * Tr(B) / dim(B).
struct Regularization {
   double alpha_multiplier = 0.0;
   double realized_alpha = 0.0;

   static Regularization from_multiplier(double multiplier, const Eigen::MatrixXd& b);
   static Regularization absolute(double alpha, const Eigen::MatrixXd& b);
   static Regularization none() { return {}; }
};

constexpr double kDefaultAlphaMultiplier = 1e-6;

/// Raised when B + alpha I cannot be Cholesky-factored.
class NotPositiveDefinite : public std::runtime_error {
public:
   using std::runtime_error::runtime_error;
};

/// Symmetric eigen-solve of a Gram-type matrix. Eigenvalues in (-tol, 0) with
/// tol = 1e-10 * ||A|| are clamped to zero; anything more negative throws.
EigenDecomposition sym_eig(const Eigen::MatrixXd& a);

/// Solves A v = lambda (B + alpha I) v by Cholesky whitening. Returned eigenvectors are
/// (B + alpha I)-orthonormal. The clamping window also covers rounding amplified by the
/// whitening, about n * eps * max|A| / lambda_min(B + alpha I).
EigenDecomposition gen_sym_eig(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                               const Regularization& reg);

/// Moore-Penrose pseudoinverse via SVD; singular values below
/// max(rows, cols) * machine-epsilon * sigma_max are treated as zero.
Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& m);

double pseudo_inverse_rtol(Eigen::Index rows, Eigen::Index cols);

struct ProjectionResult {
   Eigen::MatrixXd residual;     ///< C - F W
   Eigen::MatrixXd combination;  ///< W = F^+ C
};

/// Removes from every column of `c` its component in range(f). The projection is applied
/// twice (W = W1 + F^+ (C - F W1)) so the residual stays orthogonal to range(f) when f is
/// badly scaled.
ProjectionResult projection_residual(const Eigen::MatrixXd& c, const Eigen::MatrixXd& f);

/// C - F W. Shared by projection_residual and by replays so both round identically.
Eigen::MatrixXd subtract_product(const Eigen::MatrixXd& c, const Eigen::MatrixXd& f,
                                 const Eigen::MatrixXd& w);

/// Flips each column so its largest-magnitude entry is positive.
void normalize_signs(Eigen::MatrixXd& vectors);

void require_finite(const Eigen::MatrixXd& m, const char* what);

} // namespace vanish
