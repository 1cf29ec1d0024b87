#pragma once

#include "vanish/basis.hpp"
#include "vanish/datasets.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace vanish {

/// min / mean / max of a set of values; `present` is false for an empty set.
struct Summary {
   bool present = false;
   Index count = 0;
   double min = 0.0;
   double mean = 0.0;
   double max = 0.0;

   static Summary of(const std::vector<double>& values);
};

struct PolynomialStats {
   Index count = 0;
   Index zero_polynomials = 0;  ///< numerically zero; excluded from the summaries
   Index spurious = 0;
   Summary coeff_norm;
   Summary extent;
   Summary rescaled_extent;
};

struct DegreeStats {
   int degree = 0;
   PolynomialStats f;
   PolynomialStats g;
   Index coefficient_length = 0;  ///< tracked length of this degree's F coefficient vectors
   double seconds = 0.0;
   std::size_t bytes = 0;
};

struct DegreeDiagnostics {
   std::vector<DegreeStats> degrees;
   PolynomialStats f;  ///< over the whole run
   PolynomialStats g;
   Index coefficient_length = 0;
   double gamma_product = 1.0;
   double seconds = 0.0;
   std::size_t memory_bytes = 0;

   Index spurious() const { return f.spurious + g.spurious; }
};

/// Per-degree statistics from the exact coefficients and evaluations of a run.
DegreeDiagnostics diagnose(const ConstructionResult& result);

struct SweepRow {
   double theta = 1.0;
   Index coefficient_length = 0;
   Summary coeff_norm;  ///< exact coefficient norms of F
   double gamma_product = 1.0;
   std::vector<Index> kept;     ///< |B_t| per degree
   std::vector<Index> f_counts;  ///< |F_t| per degree
   Index f_count = 0;
   Index g_count = 0;
   double seconds = 0.0;
   std::size_t memory_bytes = 0;
};

/// One coefficient-strategy construction per theta.
std::vector<SweepRow> truncation_sweep(const Eigen::MatrixXd& points, double epsilon,
                                       const std::vector<double>& thetas,
                                       std::optional<int> max_degree = std::nullopt,
                                       double alpha_multiplier = kDefaultAlphaMultiplier);

struct BasisOptions {
   Strategy strategy;
   std::optional<int> max_degree;
};

/// One construction per class; features are |g(x)| over every class's G in class order.
class FeatureExtractor {
public:
   static FeatureExtractor fit(const LabeledDataset& train, double epsilon, const BasisOptions& options);

   Index feature_length() const;
   int classes() const { return static_cast<int>(bases_.size()); }
   const std::vector<ConstructionResult>& bases() const { return bases_; }

   /// Rows of `points` to feature rows.
   Eigen::MatrixXd transform(const Eigen::MatrixXd& points) const;

private:
   std::vector<ConstructionResult> bases_;
   Eigen::Index variables_ = 0;
};

Eigen::VectorXd extract_features(const Eigen::RowVectorXd& x, const FeatureExtractor& extractor);

/// Binary l2-regularized logistic loss: sum_i log(1 + exp(-y_i (w.x_i + b))) + reg/2 |w|^2,
/// targets y_i in {-1, +1}, bias unregularized. Parameters are stacked as (w, b).
class LogisticObjective {
public:
   LogisticObjective(const Eigen::MatrixXd& features, const Eigen::VectorXd& targets, double reg);

   double value(const Eigen::VectorXd& params) const;
   Eigen::VectorXd gradient(const Eigen::VectorXd& params) const;
   Eigen::Index dimension() const { return features_.cols() + 1; }

private:
   const Eigen::MatrixXd& features_;
   Eigen::VectorXd targets_;
   double reg_;
};

struct LogisticOptions {
   double reg_strength = 1.0;
   int max_iters = 2000;
   double gradient_tolerance = 1e-6;
};

struct BinaryFit {
   Eigen::VectorXd weights;
   double bias = 0.0;
   int iterations = 0;
   bool converged = false;
   std::vector<double> losses;  ///< objective after every accepted step, starting at the zero model
};

/// Gradient descent from zero with Barzilai-Borwein steps and Armijo backtracking.
BinaryFit fit_logistic(const Eigen::MatrixXd& features, const Eigen::VectorXd& targets,
                       const LogisticOptions& options = {});

struct OvrLogisticModel {
   /// Training features are scaled column-wise by these before fitting.
   Eigen::RowVectorXd feature_mean;
   Eigen::RowVectorXd feature_scale;
   Eigen::MatrixXd weights;  ///< feature length x classes
   Eigen::RowVectorXd biases;
   double reg_strength = 1.0;
   std::vector<BinaryFit> fits;

   Eigen::MatrixXd scores(const Eigen::MatrixXd& features) const;
};

OvrLogisticModel train_ovr_logistic(const Eigen::MatrixXd& features, const std::vector<int>& labels,
                                    const LogisticOptions& options = {});

std::vector<int> predict(const OvrLogisticModel& model, const Eigen::MatrixXd& features);

double error_rate(const std::vector<int>& predicted, const std::vector<int>& truth);

/// 12 log-spaced values in [1e-3, 1] times the mean row norm of `points`.
std::vector<double> default_epsilon_grid(const Eigen::MatrixXd& points);

struct CrossValidation {
   double best_epsilon = 0.0;
   std::vector<double> grid;
   std::vector<double> errors;  ///< mean validation error per grid value
};

/// Stratified k-fold selection of epsilon. Ties go to the larger epsilon. A value whose
/// constructions give no vanishing polynomial in some fold scores an error of 1.
CrossValidation cross_validate_epsilon(const LabeledDataset& train, const std::vector<double>& grid,
                                       int folds, const BasisOptions& basis,
                                       const LogisticOptions& logistic = {}, std::uint64_t seed = 0);

struct ClassifyOptions {
   BasisOptions basis;
   LogisticOptions logistic;
   double train_fraction = 0.6;
   int folds = 3;
   std::vector<double> grid;  ///< empty: default_epsilon_grid of the preprocessed training points
   std::uint64_t seed = 0;
};

struct ClassifyReport {
   double epsilon = 0.0;
   double test_error = 0.0;
   double train_error = 0.0;
   Index feature_length = 0;
   std::vector<Index> g_counts;  ///< per class
   std::vector<Index> f_counts;
   std::vector<std::string> class_names;
   std::size_t train_size = 0;
   std::size_t test_size = 0;
   CrossValidation cv;
   double seconds = 0.0;
};

/// Stratified split, preprocessing fitted on the training part, epsilon by cross-validation,
/// final fit on the whole training part, evaluation on the test part.
ClassifyReport classify(const LabeledDataset& data, const ClassifyOptions& options);

} // namespace vanish
