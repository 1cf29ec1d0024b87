#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <vector>

namespace vanish {

struct PointCloud {
   Eigen::MatrixXd points;
   std::string variety;
   std::uint64_t seed = 0;
   double noise = 0.0;
};

/// "D1": circles of radius 1 and 2. "D2": three ellipses rotated by 3 pi / 4.
/// "D3": the curve (u^3, u^4, u^5), u uniform in [-1, 1], on which xz - y^2 and x^3 - yz vanish.
/// Points cycle through the components in turn.
PointCloud sample_variety(const std::string& name, std::size_t count, std::uint64_t seed);

/// Residuals of the defining polynomials at every point (rows = points).
Eigen::MatrixXd variety_residuals(const std::string& name, const Eigen::MatrixXd& points);

/// "D2plus" appends k x1 + (1-k) x2 for k in {0, 0.2, 0.5, 0.8, 1}; "D3plus" appends
/// k x1 + l x2 + (1-k-l) x3 for (k, l) in {0.2, 0.5, 0.8}^2.
PointCloud augment(const std::string& name, const PointCloud& base);

/// Adds N(0, sd^2) noise with sd = ratio * mean |entry|.
PointCloud perturb(const PointCloud& cloud, double ratio, std::uint64_t seed);

PointCloud center(const PointCloud& cloud);
PointCloud normalize_mean_norm(const PointCloud& cloud);

/// Sample, optionally augment, center, perturb: the synthetic-experiment recipe.
/// Accepts D1, D2, D3, D2plus, D3plus.
PointCloud synthetic_dataset(const std::string& name, std::size_t count, double noise,
                             std::uint64_t seed);
/// Default point count per dataset (50, 70, 100; the augmented sets inherit their base).
std::size_t default_count(const std::string& name);

struct LabeledDataset {
   Eigen::MatrixXd points;
   std::vector<int> labels;
   std::vector<std::string> class_names;
   std::vector<std::string> feature_names;
   std::vector<bool> train;  ///< split tag per row; empty before split()

   int classes() const { return static_cast<int>(class_names.size()); }
   std::size_t size() const { return labels.size(); }
   LabeledDataset subset(const std::vector<std::size_t>& rows) const;
   LabeledDataset training() const;
   LabeledDataset testing() const;
   std::vector<std::size_t> class_counts() const;
};

struct CsvOptions {
   std::string label_column;  ///< header name, or 0-based index; empty means the last column
   char delimiter = ',';
   bool header = true;
};

LabeledDataset load_csv(const std::string& path, const CsvOptions& options = {});

/// Unlabeled numeric CSV (every column is a variable).
Eigen::MatrixXd load_points_csv(const std::string& path, char delimiter = ',', bool header = true);

/// Tags rows as train/test. Stratified splitting rounds each class's train share to nearest.
LabeledDataset split(const LabeledDataset& data, double train_fraction, std::uint64_t seed,
                     bool stratified = true);

/// Stratified fold assignment over the rows of `labels`: fold index per row.
std::vector<int> stratified_folds(const std::vector<int>& labels, int folds, std::uint64_t seed);

/// Column means and mean row norm, for fitting preprocessing on one split and applying to another.
struct Standardizer {
   Eigen::RowVectorXd mean;
   double scale = 1.0;

   static Standardizer fit(const Eigen::MatrixXd& points);
   Eigen::MatrixXd apply(const Eigen::MatrixXd& points) const;
};

} // namespace vanish
