#pragma once

#include "vanish/coeftrack.hpp"
#include "vanish/monomials.hpp"
#include "vanish/numerics.hpp"

#include <Eigen/Core>

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace vanish {

enum class StrategyKind { identity, coefficient, vca };

std::string to_string(StrategyKind kind);
/// Accepts "identity", "coefficient", "vca".
StrategyKind parse_strategy(const std::string& name);

struct Strategy {
   StrategyKind kind = StrategyKind::coefficient;
   double theta = 1.0;  ///< coefficient kind only
   double alpha_multiplier = kDefaultAlphaMultiplier;

   static Strategy identity() { return {StrategyKind::identity, 1.0, 0.0}; }
   static Strategy vca() { return {StrategyKind::vca, 1.0, 0.0}; }
   static Strategy coefficient(double theta = 1.0, double alpha_multiplier = kDefaultAlphaMultiplier) {
      return {StrategyKind::coefficient, theta, alpha_multiplier};
   }

   bool truncates() const { return kind == StrategyKind::coefficient && theta < 1.0; }
   void validate() const;
};

/// A polynomial known through its values on X and its coefficients.
struct TrackedPolynomial {
   Eigen::VectorXd eval;
   CoefficientVector coeffs;
   int degree = 0;
   double extent = 0.0;      ///< norm of eval
   double eigenvalue = 0.0;  ///< lambda of the pair this polynomial came from
   double scale = 1.0;       ///< factor applied after the eigen-step (1 / extent for VCA)
};

struct DegreeLayer {
   int degree = 0;

   // Replayable recipe.
   std::vector<std::pair<Index, Index>> products;  ///< (index in F_1, index in F_{t-1}); empty for t <= 1
   Eigen::MatrixXd projection;                     ///< W, |F^{t-1}| x |C_t|
   Eigen::MatrixXd f_combination;                  ///< |C_t| x |F_t|, post-scaling folded in
   Eigen::MatrixXd g_combination;                  ///< |C_t| x |G_t|

   // Data on X.
   Eigen::VectorXd candidate_pre_norms;  ///< column norms of C_t^pre(X)
   Eigen::MatrixXd candidate_eval;
   CoefficientMatrix candidate_coeffs;
   Eigen::MatrixXd normalization;
   Regularization regularization;
   EigenDecomposition eigen;  ///< retained pairs, vectors in candidate coordinates
   Index zero_polynomials = 0;

   Eigen::VectorXd f_eigenvalues;
   Eigen::VectorXd g_eigenvalues;
   Eigen::VectorXd f_scales;
   Eigen::MatrixXd f_eval;
   Eigen::MatrixXd g_eval;
   CoefficientMatrix f_coeffs;
   CoefficientMatrix g_coeffs;

   double seconds = 0.0;

   Index f_count() const { return static_cast<Index>(f_eval.cols()); }
   Index g_count() const { return static_cast<Index>(g_eval.cols()); }
   Index candidate_count() const { return static_cast<Index>(candidate_eval.cols()); }

   std::vector<TrackedPolynomial> candidates() const;
   std::vector<TrackedPolynomial> nonvanishing() const;
   std::vector<TrackedPolynomial> vanishing() const;

   std::size_t bytes() const;
};

enum class Termination { no_nonvanishing, max_degree };

struct ConstructionResult {
   Eigen::MatrixXd points;
   double epsilon = 0.0;
   Strategy strategy;
   int max_degree = 0;
   double constant = 1.0;  ///< value of the degree-0 polynomial

   std::vector<DegreeLayer> layers;  ///< layers[0] holds F_0
   TruncationState truncation;
   int termination_degree = 0;
   Termination terminated_by = Termination::no_nonvanishing;

   Eigen::MatrixXd f_eval;      ///< every F polynomial on X, layer order
   CoefficientMatrix f_coeffs;  ///< matching coefficients
   double seconds = 0.0;

   int variables() const { return static_cast<int>(points.cols()); }
   Index f_count() const { return static_cast<Index>(f_eval.cols()); }
   Index g_count() const;

   std::vector<TrackedPolynomial> nonvanishing() const;
   std::vector<TrackedPolynomial> vanishing() const;

   /// Length of the tracked coefficient vectors of F.
   Index coefficient_length() const { return f_coeffs.length(); }
   /// Sum of materialized matrix sizes.
   std::size_t memory_bytes() const;
};

/// Default guard: min(|X|, 15).
int default_max_degree(Eigen::Index points);

ConstructionResult construct(const Eigen::MatrixXd& points, double epsilon, const Strategy& strategy,
                             std::optional<int> max_degree = std::nullopt);

struct CandidateSet {
   int degree = 0;
   std::vector<std::pair<Index, Index>> products;
   Eigen::MatrixXd pre_eval;
   Eigen::VectorXd pre_norms;
   Eigen::MatrixXd eval;
   CoefficientMatrix coeffs;
   Eigen::MatrixXd projection;
};

/// Candidates of degree t from the layers already in `so_far`.
CandidateSet step1_candidates(const MonomialBasis& basis, int t, const ConstructionResult& so_far);

struct Step2Solution {
   Eigen::MatrixXd normalization;
   Regularization regularization;
   /// Eigenvectors scaled so that v^T (N + alpha I) v = 1 and eigenvalues equal to ||C(X) v||^2.
   EigenDecomposition eigen;
   Index removed = 0;  ///< directions of the normalization nullspace taken out before solving
};

Step2Solution step2_solve(const CandidateSet& candidates, const Strategy& strategy,
                          const TruncationState& truncation);

struct Step3Split {
   std::vector<Eigen::Index> nonvanishing;  ///< eigenpair indices
   std::vector<Eigen::Index> vanishing;
   Index dropped = 0;
};

Step3Split step3_split(const Step2Solution& solution, double epsilon, const Strategy& strategy);

struct BasisEvaluation {
   Eigen::MatrixXd f;
   Eigen::MatrixXd g;
   std::vector<int> f_degree;
   std::vector<int> g_degree;
};

/// Replays the construction on new points. Reproduces the stored evaluations exactly when
/// `points` equals the training points.
BasisEvaluation evaluate_basis(const ConstructionResult& result, const Eigen::MatrixXd& points);

struct LayerCoefficients {
   CoefficientMatrix candidates;
   CoefficientMatrix f;
   CoefficientMatrix g;
};

/// Untruncated coefficients of every layer. Recomputed from the recipe when the run truncated.
std::vector<LayerCoefficients> exact_coefficients(const ConstructionResult& result);

/// Recomputes evaluations on result.points and exact coefficients of every layer from the
/// recipe fields and result.constant. The restored run is recorded as untruncated.
void restore_from_recipe(ConstructionResult& result);

/// Untruncated coefficients rebuilt from the recipe alone (products, projections, combinations).
std::vector<LayerCoefficients> replay_coefficients(const ConstructionResult& result);

struct RescaleEntry {
   int degree = 0;
   bool vanishing = false;
   Index index = 0;  ///< position within its layer's F_t or G_t
   double extent = 0.0;
   double coeff_norm = 0.0;
   double rescaled_extent = 0.0;  ///< NaN for numerically zero polynomials
   bool zero_polynomial = false;
   bool spurious = false;
};

std::vector<RescaleEntry> rescale_report(const ConstructionResult& result);

/// Largest |f^T c| over unit-normalized columns f of F^{t-1}(X) and candidates c of
/// every layer, relative to the largest pre-candidate norm of that layer.
double orthogonality_defect(const ConstructionResult& result);

} // namespace vanish
