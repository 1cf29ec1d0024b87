#include "vanish/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace vanish {

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
   return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

struct StatsBuilder {
   Index count = 0;
   Index zero = 0;
   Index spurious = 0;
   std::vector<double> norms, extents, rescaled;

   void add(const RescaleEntry& e) {
      ++count;
      if (e.zero_polynomial) {
         ++zero;
         return;
      }
      spurious += e.spurious ? 1 : 0;
      norms.push_back(e.coeff_norm);
      extents.push_back(e.extent);
      rescaled.push_back(e.rescaled_extent);
   }

   PolynomialStats build() const {
      PolynomialStats s;
      s.count = count;
      s.zero_polynomials = zero;
      s.spurious = spurious;
      s.coeff_norm = Summary::of(norms);
      s.extent = Summary::of(extents);
      s.rescaled_extent = Summary::of(rescaled);
      return s;
   }
};

} // namespace

Summary Summary::of(const std::vector<double>& values) {
   Summary s;
   if (values.empty()) {
      return s;
   }
   s.present = true;
   s.count = values.size();
   s.min = *std::min_element(values.begin(), values.end());
   s.max = *std::max_element(values.begin(), values.end());
   s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
   // Rounding in the mean must not break min <= mean <= max.
   s.mean = std::clamp(s.mean, s.min, s.max);
   return s;
}

DegreeDiagnostics diagnose(const ConstructionResult& result) {
   const auto entries = rescale_report(result);
   const Index degrees = result.layers.size();
   std::vector<StatsBuilder> f(degrees), g(degrees);
   StatsBuilder f_all, g_all;
   for (const auto& e : entries) {
      auto& per = e.vanishing ? g[static_cast<Index>(e.degree)] : f[static_cast<Index>(e.degree)];
      per.add(e);
      (e.vanishing ? g_all : f_all).add(e);
   }
   DegreeDiagnostics d;
   for (Index t = 0; t < degrees; ++t) {
      const DegreeLayer& layer = result.layers[t];
      DegreeStats s;
      s.degree = static_cast<int>(t);
      s.f = f[t].build();
      s.g = g[t].build();
      s.coefficient_length = layer.f_count() > 0 ? layer.f_coeffs.length() : 0;
      s.seconds = layer.seconds;
      s.bytes = layer.bytes();
      d.degrees.push_back(std::move(s));
   }
   d.f = f_all.build();
   d.g = g_all.build();
   d.coefficient_length = result.coefficient_length();
   d.gamma_product = result.truncation.gamma_product();
   d.seconds = result.seconds;
   d.memory_bytes = result.memory_bytes();
   return d;
}

std::vector<SweepRow> truncation_sweep(const Eigen::MatrixXd& points, double epsilon,
                                       const std::vector<double>& thetas, std::optional<int> max_degree,
                                       double alpha_multiplier) {
   std::vector<SweepRow> rows;
   for (double theta : thetas) {
      const Strategy strategy = Strategy::coefficient(theta, alpha_multiplier);
      strategy.validate();
      const auto start = std::chrono::steady_clock::now();
      const ConstructionResult r = construct(points, epsilon, strategy, max_degree);
      SweepRow row;
      row.seconds = seconds_since(start);
      row.theta = theta;
      row.coefficient_length = r.coefficient_length();
      row.gamma_product = r.truncation.gamma_product();
      row.f_count = r.f_count();
      row.g_count = r.g_count();
      row.memory_bytes = r.memory_bytes();
      std::vector<double> norms;
      for (const auto& e : rescale_report(r)) {
         if (!e.vanishing) {
            norms.push_back(e.coeff_norm);
         }
      }
      row.coeff_norm = Summary::of(norms);
      for (Index t = 0; t < r.layers.size(); ++t) {
         const int degree = static_cast<int>(t);
         row.f_counts.push_back(static_cast<Index>(r.layers[t].f_count()));
         if (r.truncation.has(degree)) {
            const auto& sel = r.truncation.selection(degree);
            row.kept.push_back(sel.full ? monomial_count(r.variables(), degree, false) : sel.kept.size());
         }
      }
      rows.push_back(std::move(row));
   }
   return rows;
}

FeatureExtractor FeatureExtractor::fit(const LabeledDataset& train, double epsilon,
                                       const BasisOptions& options) {
   if (train.classes() < 1) {
      throw std::invalid_argument("FeatureExtractor: no classes");
   }
   FeatureExtractor fx;
   fx.variables_ = train.points.cols();
   std::vector<std::vector<std::size_t>> rows(static_cast<std::size_t>(train.classes()));
   for (std::size_t i = 0; i < train.size(); ++i) {
      rows[static_cast<std::size_t>(train.labels[i])].push_back(i);
   }
   for (int c = 0; c < train.classes(); ++c) {
      const auto& idx = rows[static_cast<std::size_t>(c)];
      if (idx.empty()) {
         throw std::invalid_argument("FeatureExtractor: class '" + train.class_names[static_cast<std::size_t>(c)] +
                                     "' has no training points");
      }
      Eigen::MatrixXd pts(static_cast<Eigen::Index>(idx.size()), fx.variables_);
      for (std::size_t i = 0; i < idx.size(); ++i) {
         pts.row(static_cast<Eigen::Index>(i)) = train.points.row(static_cast<Eigen::Index>(idx[i]));
      }
      fx.bases_.push_back(construct(pts, epsilon, options.strategy, options.max_degree));
   }
   return fx;
}

Index FeatureExtractor::feature_length() const {
   Index n = 0;
   for (const auto& b : bases_) {
      n += b.g_count();
   }
   return n;
}

Eigen::MatrixXd FeatureExtractor::transform(const Eigen::MatrixXd& points) const {
   if (points.cols() != variables_) {
      throw std::invalid_argument("extract_features: expected " + std::to_string(variables_) +
                                  " variables, got " + std::to_string(points.cols()));
   }
   Eigen::MatrixXd out(points.rows(), static_cast<Eigen::Index>(feature_length()));
   Eigen::Index col = 0;
   for (const auto& b : bases_) {
      const Eigen::MatrixXd g = evaluate_basis(b, points).g;
      out.middleCols(col, g.cols()) = g.cwiseAbs();
      col += g.cols();
   }
   return out;
}

Eigen::VectorXd extract_features(const Eigen::RowVectorXd& x, const FeatureExtractor& extractor) {
   return extractor.transform(x).row(0).transpose();
}

LogisticObjective::LogisticObjective(const Eigen::MatrixXd& features, const Eigen::VectorXd& targets,
                                     double reg)
   : features_(features), targets_(targets), reg_(reg) {
   if (targets.size() != features.rows()) {
      throw std::invalid_argument("LogisticObjective: one target per row required");
   }
   if (!(reg >= 0.0)) {
      throw std::invalid_argument("LogisticObjective: regularization must be nonnegative");
   }
}

namespace {

// log(1 + exp(z)) without overflow.
double softplus(double z) {
   return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double sigmoid(double z) {
   if (z >= 0.0) {
      return 1.0 / (1.0 + std::exp(-z));
   }
   const double e = std::exp(z);
   return e / (1.0 + e);
}

} // namespace

double LogisticObjective::value(const Eigen::VectorXd& params) const {
   const Eigen::Index d = features_.cols();
   const Eigen::VectorXd margin = (features_ * params.head(d)).array() + params[d];
   double loss = 0.0;
   for (Eigen::Index i = 0; i < margin.size(); ++i) {
      loss += softplus(-targets_[i] * margin[i]);
   }
   return loss + 0.5 * reg_ * params.head(d).squaredNorm();
}

Eigen::VectorXd LogisticObjective::gradient(const Eigen::VectorXd& params) const {
   const Eigen::Index d = features_.cols();
   const Eigen::VectorXd margin = (features_ * params.head(d)).array() + params[d];
   Eigen::VectorXd r(margin.size());
   for (Eigen::Index i = 0; i < margin.size(); ++i) {
      r[i] = -targets_[i] * sigmoid(-targets_[i] * margin[i]);
   }
   Eigen::VectorXd grad(d + 1);
   grad.head(d) = features_.transpose() * r + reg_ * params.head(d);
   grad[d] = r.sum();
   return grad;
}

BinaryFit fit_logistic(const Eigen::MatrixXd& features, const Eigen::VectorXd& targets,
                       const LogisticOptions& options) {
   require_finite(features, "fit_logistic: features");
   const LogisticObjective objective(features, targets, options.reg_strength);
   Eigen::VectorXd x = Eigen::VectorXd::Zero(objective.dimension());
   double fx = objective.value(x);
   Eigen::VectorXd g = objective.gradient(x);
   BinaryFit fit;
   fit.losses.push_back(fx);
   // First step from a crude Lipschitz bound of the loss Hessian.
   const double lipschitz = 0.25 * (features.squaredNorm() + static_cast<double>(features.rows())) +
                            options.reg_strength;
   double step = 1.0 / std::max(lipschitz, 1e-12);
   int it = 0;
   for (; it < options.max_iters; ++it) {
      if (g.norm() <= options.gradient_tolerance) {
         fit.converged = true;
         break;
      }
      double t = step;
      Eigen::VectorXd xn;
      double fn = 0.0;
      bool accepted = false;
      for (int back = 0; back < 60; ++back) {
         xn = x - t * g;
         fn = objective.value(xn);
         if (fn <= fx - 1e-4 * t * g.squaredNorm()) {
            accepted = true;
            break;
         }
         t *= 0.5;
      }
      if (!accepted) {
         break;  // no decrease representable at this precision
      }
      const Eigen::VectorXd gn = objective.gradient(xn);
      const Eigen::VectorXd s = xn - x;
      const Eigen::VectorXd y = gn - g;
      const double sy = s.dot(y);
      step = sy > 0.0 ? s.squaredNorm() / sy : t;
      x = xn;
      fx = fn;
      g = gn;
      fit.losses.push_back(fx);
   }
   if (!fit.converged && g.norm() <= options.gradient_tolerance) {
      fit.converged = true;
   }
   fit.iterations = it;
   fit.weights = x.head(features.cols());
   fit.bias = x[features.cols()];
   return fit;
}

Eigen::MatrixXd OvrLogisticModel::scores(const Eigen::MatrixXd& features) const {
   if (features.cols() != weights.rows()) {
      throw std::invalid_argument("OvrLogisticModel: feature length mismatch");
   }
   require_finite(features, "OvrLogisticModel: features");
   Eigen::MatrixXd z = features.rowwise() - feature_mean;
   z = z.array().rowwise() / feature_scale.array();
   return (z * weights).rowwise() + biases;
}

OvrLogisticModel train_ovr_logistic(const Eigen::MatrixXd& features, const std::vector<int>& labels,
                                    const LogisticOptions& options) {
   if (static_cast<Eigen::Index>(labels.size()) != features.rows()) {
      throw std::invalid_argument("train_ovr_logistic: one label per row required");
   }
   require_finite(features, "train_ovr_logistic: features");
   const int classes = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
   if (classes < 2) {
      throw std::invalid_argument("train_ovr_logistic: at least two classes required");
   }
   OvrLogisticModel model;
   model.reg_strength = options.reg_strength;
   const Eigen::Index d = features.cols();
   model.feature_mean = features.colwise().mean();
   Eigen::MatrixXd z = features.rowwise() - model.feature_mean;
   model.feature_scale = (z.colwise().squaredNorm() / static_cast<double>(std::max<Eigen::Index>(1, z.rows())))
                            .cwiseSqrt();
   for (Eigen::Index j = 0; j < d; ++j) {
      if (!(model.feature_scale[j] > 0.0)) {
         model.feature_scale[j] = 1.0;
      }
   }
   z = z.array().rowwise() / model.feature_scale.array();
   model.weights.resize(d, classes);
   model.biases.resize(classes);
   for (int c = 0; c < classes; ++c) {
      Eigen::VectorXd y(features.rows());
      for (Eigen::Index i = 0; i < y.size(); ++i) {
         y[i] = labels[static_cast<std::size_t>(i)] == c ? 1.0 : -1.0;
      }
      BinaryFit fit = fit_logistic(z, y, options);
      model.weights.col(c) = fit.weights;
      model.biases[c] = fit.bias;
      model.fits.push_back(std::move(fit));
   }
   return model;
}

std::vector<int> predict(const OvrLogisticModel& model, const Eigen::MatrixXd& features) {
   const Eigen::MatrixXd s = model.scores(features);
   std::vector<int> out(static_cast<std::size_t>(s.rows()));
   for (Eigen::Index i = 0; i < s.rows(); ++i) {
      Eigen::Index best = 0;
      s.row(i).maxCoeff(&best);
      out[static_cast<std::size_t>(i)] = static_cast<int>(best);
   }
   return out;
}

double error_rate(const std::vector<int>& predicted, const std::vector<int>& truth) {
   if (predicted.size() != truth.size()) {
      throw std::invalid_argument("error_rate: size mismatch");
   }
   if (truth.empty()) {
      return 0.0;
   }
   std::size_t wrong = 0;
   for (std::size_t i = 0; i < truth.size(); ++i) {
      wrong += predicted[i] != truth[i] ? 1 : 0;
   }
   return static_cast<double>(wrong) / static_cast<double>(truth.size());
}

std::vector<double> default_epsilon_grid(const Eigen::MatrixXd& points) {
   const double scale = points.rows() > 0 ? points.rowwise().norm().mean() : 1.0;
   std::vector<double> grid;
   const int count = 12;
   for (int i = 0; i < count; ++i) {
      const double e = -3.0 + 3.0 * static_cast<double>(i) / (count - 1);
      grid.push_back(std::pow(10.0, e) * scale);
   }
   return grid;
}

namespace {

double holdout_error(const LabeledDataset& fit_part, const LabeledDataset& eval_part, double epsilon,
                     const BasisOptions& basis, const LogisticOptions& logistic) {
   const FeatureExtractor fx = FeatureExtractor::fit(fit_part, epsilon, basis);
   if (fx.feature_length() == 0) {
      return 1.0;
   }
   const OvrLogisticModel model = train_ovr_logistic(fx.transform(fit_part.points), fit_part.labels, logistic);
   return error_rate(predict(model, fx.transform(eval_part.points)), eval_part.labels);
}

} // namespace

CrossValidation cross_validate_epsilon(const LabeledDataset& train, const std::vector<double>& grid,
                                       int folds, const BasisOptions& basis,
                                       const LogisticOptions& logistic, std::uint64_t seed) {
   if (grid.empty()) {
      throw std::invalid_argument("cross_validate_epsilon: empty epsilon grid");
   }
   if (folds < 2) {
      throw std::invalid_argument("cross_validate_epsilon: at least two folds required");
   }
   CrossValidation cv;
   cv.grid = grid;
   if (grid.size() == 1) {
      cv.best_epsilon = grid.front();
      cv.errors.assign(1, std::numeric_limits<double>::quiet_NaN());
      return cv;
   }
   const std::vector<int> fold = stratified_folds(train.labels, folds, seed);
   std::vector<std::vector<std::size_t>> fit_rows(static_cast<std::size_t>(folds)),
      eval_rows(static_cast<std::size_t>(folds));
   for (std::size_t i = 0; i < fold.size(); ++i) {
      for (int k = 0; k < folds; ++k) {
         (fold[i] == k ? eval_rows : fit_rows)[static_cast<std::size_t>(k)].push_back(i);
      }
   }
   for (double eps : grid) {
      double total = 0.0;
      for (int k = 0; k < folds; ++k) {
         const LabeledDataset fit_part = train.subset(fit_rows[static_cast<std::size_t>(k)]);
         const LabeledDataset eval_part = train.subset(eval_rows[static_cast<std::size_t>(k)]);
         total += holdout_error(fit_part, eval_part, eps, basis, logistic);
      }
      cv.errors.push_back(total / folds);
   }
   std::size_t best = 0;
   for (std::size_t i = 1; i < grid.size(); ++i) {
      const bool better = cv.errors[i] < cv.errors[best] - 1e-12;
      const bool tie_larger = std::abs(cv.errors[i] - cv.errors[best]) <= 1e-12 && grid[i] > grid[best];
      if (better || tie_larger) {
         best = i;
      }
   }
   cv.best_epsilon = grid[best];
   return cv;
}

ClassifyReport classify(const LabeledDataset& data, const ClassifyOptions& options) {
   if (data.classes() < 2) {
      throw std::invalid_argument("classify: need at least two classes, found " +
                                  std::to_string(data.classes()));
   }
   const auto start = std::chrono::steady_clock::now();
   const LabeledDataset tagged = split(data, options.train_fraction, options.seed, true);
   LabeledDataset train = tagged.training();
   LabeledDataset test = tagged.testing();
   const Standardizer pre = Standardizer::fit(train.points);
   train.points = pre.apply(train.points);
   if (test.size() > 0) {
      test.points = pre.apply(test.points);
   }

   ClassifyReport report;
   report.class_names = data.class_names;
   report.train_size = train.size();
   report.test_size = test.size();
   const std::vector<double> grid = options.grid.empty() ? default_epsilon_grid(train.points) : options.grid;
   report.cv = cross_validate_epsilon(train, grid, options.folds, options.basis, options.logistic, options.seed);
   report.epsilon = report.cv.best_epsilon;

   const FeatureExtractor fx = FeatureExtractor::fit(train, report.epsilon, options.basis);
   report.feature_length = fx.feature_length();
   for (const auto& b : fx.bases()) {
      report.g_counts.push_back(b.g_count());
      report.f_counts.push_back(b.f_count());
   }
   if (report.feature_length == 0) {
      throw std::runtime_error("classify: epsilon " + std::to_string(report.epsilon) +
                               " gives no vanishing polynomials");
   }
   const OvrLogisticModel model = train_ovr_logistic(fx.transform(train.points), train.labels, options.logistic);
   report.train_error = error_rate(predict(model, fx.transform(train.points)), train.labels);
   report.test_error = test.size() > 0 ? error_rate(predict(model, fx.transform(test.points)), test.labels)
                                       : std::numeric_limits<double>::quiet_NaN();
   report.seconds = seconds_since(start);
   return report;
}

} // namespace vanish
