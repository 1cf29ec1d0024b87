#include "vanish/datasets.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

namespace vanish {

namespace {

constexpr double kPi = std::numbers::pi;

void require_name(const std::string& name, std::initializer_list<const char*> allowed) {
   for (const char* a : allowed) {
      if (name == a) {
         return;
      }
   }
   std::string msg = "unknown dataset '" + name + "' (expected one of";
   for (const char* a : allowed) {
      msg += std::string(" ") + a;
   }
   throw std::invalid_argument(msg + ")");
}

std::string trim(const std::string& s) {
   const auto b = s.find_first_not_of(" \t\r\n\"");
   if (b == std::string::npos) {
      return "";
   }
   const auto e = s.find_last_not_of(" \t\r\n\"");
   return s.substr(b, e - b + 1);
}

std::vector<std::string> split_fields(const std::string& line, char delimiter) {
   std::vector<std::string> out;
   std::string field;
   std::istringstream in(line);
   while (std::getline(in, field, delimiter)) {
      out.push_back(trim(field));
   }
   if (!line.empty() && line.back() == delimiter) {
      out.emplace_back();
   }
   return out;
}

bool parse_double(const std::string& s, double& out) {
   if (s.empty()) {
      return false;
   }
   const char* first = s.data();
   const char* last = s.data() + s.size();
   if (*first == '+') {
      ++first;
   }
   const auto res = std::from_chars(first, last, out);
   return res.ec == std::errc() && res.ptr == last && std::isfinite(out);
}

struct RawTable {
   std::vector<std::string> header;
   std::vector<std::vector<std::string>> rows;
   std::vector<std::size_t> line_numbers;
};

RawTable read_table(const std::string& path, char delimiter, bool header) {
   std::ifstream in(path);
   if (!in) {
      throw std::runtime_error("cannot open '" + path + "'");
   }
   RawTable table;
   std::string line;
   std::size_t line_no = 0;
   std::size_t width = 0;
   while (std::getline(in, line)) {
      ++line_no;
      if (trim(line).empty()) {
         continue;
      }
      auto fields = split_fields(line, delimiter);
      if (header && table.header.empty()) {
         table.header = std::move(fields);
         width = table.header.size();
         continue;
      }
      if (width == 0) {
         width = fields.size();
      }
      if (fields.size() != width) {
         throw std::runtime_error(path + ":" + std::to_string(line_no) + ": expected " +
                                  std::to_string(width) + " fields, found " +
                                  std::to_string(fields.size()));
      }
      table.rows.push_back(std::move(fields));
      table.line_numbers.push_back(line_no);
   }
   if (table.rows.empty()) {
      throw std::runtime_error(path + ": no data rows");
   }
   return table;
}

} // namespace

PointCloud sample_variety(const std::string& name, std::size_t count, std::uint64_t seed) {
   require_name(name, {"D1", "D2", "D3"});
   if (count < 1) {
      throw std::invalid_argument("sample_variety: count must be positive");
   }
   std::mt19937_64 rng(seed);
   PointCloud cloud;
   cloud.variety = name;
   cloud.seed = seed;
   const auto rows = static_cast<Eigen::Index>(count);
   if (name == "D3") {
      std::uniform_real_distribution<double> u(-1.0, 1.0);
      cloud.points.resize(rows, 3);
      for (Eigen::Index i = 0; i < rows; ++i) {
         const double t = u(rng);
         const double t3 = t * t * t;
         cloud.points.row(i) << t3, t3 * t, t3 * t * t;
      }
      return cloud;
   }
   std::uniform_real_distribution<double> angle(0.0, 2.0 * kPi);
   cloud.points.resize(rows, 2);
   const double c = std::cos(3.0 * kPi / 4.0);
   const double s = std::sin(3.0 * kPi / 4.0);
   for (Eigen::Index i = 0; i < rows; ++i) {
      const double phi = angle(rng);
      if (name == "D1") {
         const double r = static_cast<double>(i % 2 + 1);
         cloud.points.row(i) << r * std::cos(phi), r * std::sin(phi);
      } else {
         const double r = static_cast<double>(i % 3 + 1);
         const double x = std::sqrt(2.0) * r * std::cos(phi);
         const double y = r / std::sqrt(2.0) * std::sin(phi);
         cloud.points.row(i) << c * x - s * y, s * x + c * y;
      }
   }
   return cloud;
}

Eigen::MatrixXd variety_residuals(const std::string& name, const Eigen::MatrixXd& points) {
   require_name(name, {"D1", "D2", "D3"});
   Eigen::MatrixXd out;
   if (name == "D3") {
      out.resize(points.rows(), 2);
      for (Eigen::Index i = 0; i < points.rows(); ++i) {
         const double x = points(i, 0), y = points(i, 1), z = points(i, 2);
         out(i, 0) = x * z - y * y;
         out(i, 1) = x * x * x - y * z;
      }
      return out;
   }
   // Product over components of the implicit equations; a point on any one component gives 0.
   // Report the smallest per-component residual instead so the scale stays readable.
   out.resize(points.rows(), 1);
   const double c = std::cos(3.0 * kPi / 4.0);
   const double s = std::sin(3.0 * kPi / 4.0);
   for (Eigen::Index i = 0; i < points.rows(); ++i) {
      const double x = points(i, 0), y = points(i, 1);
      double best = std::numeric_limits<double>::infinity();
      if (name == "D1") {
         for (double r : {1.0, 2.0}) {
            best = std::min(best, std::abs(x * x + y * y - r * r));
         }
      } else {
         const double xr = c * x + s * y;
         const double yr = -s * x + c * y;
         for (double r : {1.0, 2.0, 3.0}) {
            const double a = std::sqrt(2.0) * r, b = r / std::sqrt(2.0);
            best = std::min(best, std::abs((xr / a) * (xr / a) + (yr / b) * (yr / b) - 1.0));
         }
      }
      out(i, 0) = best;
   }
   return out;
}

PointCloud augment(const std::string& name, const PointCloud& base) {
   require_name(name, {"D2plus", "D3plus"});
   PointCloud out = base;
   const Eigen::MatrixXd& x = base.points;
   if (name == "D2plus") {
      if (x.cols() != 2) {
         throw std::invalid_argument("augment: D2plus needs a 2-variable base");
      }
      const double ks[] = {0.0, 0.2, 0.5, 0.8, 1.0};
      out.points.resize(x.rows(), 7);
      out.points.leftCols(2) = x;
      for (int i = 0; i < 5; ++i) {
         out.points.col(2 + i) = ks[i] * x.col(0) + (1.0 - ks[i]) * x.col(1);
      }
   } else {
      if (x.cols() != 3) {
         throw std::invalid_argument("augment: D3plus needs a 3-variable base");
      }
      const double ks[] = {0.2, 0.5, 0.8};
      out.points.resize(x.rows(), 12);
      out.points.leftCols(3) = x;
      int c = 3;
      for (double k : ks) {
         for (double l : ks) {
            out.points.col(c++) = k * x.col(0) + l * x.col(1) + (1.0 - k - l) * x.col(2);
         }
      }
   }
   out.variety = name;
   return out;
}

PointCloud perturb(const PointCloud& cloud, double ratio, std::uint64_t seed) {
   if (!(ratio >= 0.0)) {
      throw std::invalid_argument("perturb: ratio must be nonnegative");
   }
   PointCloud out = cloud;
   out.noise = ratio;
   if (ratio == 0.0 || cloud.points.size() == 0) {
      return out;
   }
   const double sd = ratio * cloud.points.cwiseAbs().mean();
   std::mt19937_64 rng(seed);
   std::normal_distribution<double> noise(0.0, sd);
   for (Eigen::Index i = 0; i < out.points.rows(); ++i) {
      for (Eigen::Index j = 0; j < out.points.cols(); ++j) {
         out.points(i, j) += noise(rng);
      }
   }
   return out;
}

PointCloud center(const PointCloud& cloud) {
   if (cloud.points.rows() < 1) {
      throw std::invalid_argument("center: empty cloud");
   }
   PointCloud out = cloud;
   out.points.rowwise() -= cloud.points.colwise().mean();
   return out;
}

PointCloud normalize_mean_norm(const PointCloud& cloud) {
   if (cloud.points.rows() < 1) {
      throw std::invalid_argument("normalize_mean_norm: empty cloud");
   }
   const double m = cloud.points.rowwise().norm().mean();
   if (!(m > 0.0)) {
      throw std::domain_error("normalize_mean_norm: all points are at the origin");
   }
   PointCloud out = cloud;
   out.points /= m;
   return out;
}

std::size_t default_count(const std::string& name) {
   if (name == "D1") {
      return 50;
   }
   if (name == "D2" || name == "D2plus") {
      return 70;
   }
   if (name == "D3" || name == "D3plus") {
      return 100;
   }
   throw std::invalid_argument("unknown dataset '" + name + "'");
}

PointCloud synthetic_dataset(const std::string& name, std::size_t count, double noise,
                             std::uint64_t seed) {
   require_name(name, {"D1", "D2", "D3", "D2plus", "D3plus"});
   PointCloud cloud;
   if (name == "D2plus") {
      cloud = augment(name, sample_variety("D2", count, seed));
   } else if (name == "D3plus") {
      cloud = augment(name, sample_variety("D3", count, seed));
   } else {
      cloud = sample_variety(name, count, seed);
   }
   // Noise uses a stream derived from the sampling seed so the two draws stay independent.
   return perturb(center(cloud), noise, seed ^ 0x9e3779b97f4a7c15ULL);
}

LabeledDataset LabeledDataset::subset(const std::vector<std::size_t>& rows) const {
   LabeledDataset out;
   out.class_names = class_names;
   out.feature_names = feature_names;
   out.points.resize(static_cast<Eigen::Index>(rows.size()), points.cols());
   for (std::size_t i = 0; i < rows.size(); ++i) {
      out.points.row(static_cast<Eigen::Index>(i)) = points.row(static_cast<Eigen::Index>(rows[i]));
      out.labels.push_back(labels.at(rows[i]));
   }
   return out;
}

LabeledDataset LabeledDataset::training() const {
   if (train.size() != labels.size()) {
      throw std::logic_error("LabeledDataset: not split");
   }
   std::vector<std::size_t> rows;
   for (std::size_t i = 0; i < train.size(); ++i) {
      if (train[i]) {
         rows.push_back(i);
      }
   }
   return subset(rows);
}

LabeledDataset LabeledDataset::testing() const {
   if (train.size() != labels.size()) {
      throw std::logic_error("LabeledDataset: not split");
   }
   std::vector<std::size_t> rows;
   for (std::size_t i = 0; i < train.size(); ++i) {
      if (!train[i]) {
         rows.push_back(i);
      }
   }
   return subset(rows);
}

std::vector<std::size_t> LabeledDataset::class_counts() const {
   std::vector<std::size_t> counts(static_cast<std::size_t>(std::max(classes(), 0)), 0);
   for (int l : labels) {
      ++counts.at(static_cast<std::size_t>(l));
   }
   return counts;
}

LabeledDataset load_csv(const std::string& path, const CsvOptions& options) {
   const RawTable table = read_table(path, options.delimiter, options.header);
   const std::size_t width = table.rows.front().size();
   if (width < 2) {
      throw std::runtime_error(path + ": need at least one feature and a label column");
   }
   std::size_t label = width - 1;
   if (!options.label_column.empty()) {
      const auto it = std::find(table.header.begin(), table.header.end(), options.label_column);
      if (it != table.header.end()) {
         label = static_cast<std::size_t>(it - table.header.begin());
      } else {
         std::size_t idx = 0;
         const auto& s = options.label_column;
         const auto res = std::from_chars(s.data(), s.data() + s.size(), idx);
         if (res.ec != std::errc() || res.ptr != s.data() + s.size() || idx >= width) {
            throw std::runtime_error(path + ": no label column '" + options.label_column + "'");
         }
         label = idx;
      }
   }
   LabeledDataset data;
   for (std::size_t j = 0; j < width; ++j) {
      if (j != label) {
         data.feature_names.push_back(j < table.header.size() ? table.header[j]
                                                              : "x" + std::to_string(j + 1));
      }
   }
   std::vector<std::string> raw_labels;
   data.points.resize(static_cast<Eigen::Index>(table.rows.size()), static_cast<Eigen::Index>(width - 1));
   for (std::size_t i = 0; i < table.rows.size(); ++i) {
      Eigen::Index c = 0;
      for (std::size_t j = 0; j < width; ++j) {
         if (j == label) {
            continue;
         }
         double v = 0.0;
         if (!parse_double(table.rows[i][j], v)) {
            throw std::runtime_error(path + ":" + std::to_string(table.line_numbers[i]) +
                                     ": field " + std::to_string(j + 1) + " ('" + table.rows[i][j] +
                                     "') is not a finite number");
         }
         data.points(static_cast<Eigen::Index>(i), c++) = v;
      }
      if (table.rows[i][label].empty()) {
         throw std::runtime_error(path + ":" + std::to_string(table.line_numbers[i]) + ": empty label");
      }
      raw_labels.push_back(table.rows[i][label]);
   }
   // Classes are numbered in order of first appearance.
   int next = 0;
   std::map<std::string, int> ids;
   for (const auto& l : raw_labels) {
      if (ids.emplace(l, next).second) {
         data.class_names.push_back(l);
         ++next;
      }
      data.labels.push_back(ids[l]);
   }
   return data;
}

Eigen::MatrixXd load_points_csv(const std::string& path, char delimiter, bool header) {
   const RawTable table = read_table(path, delimiter, header);
   const std::size_t width = table.rows.front().size();
   Eigen::MatrixXd m(static_cast<Eigen::Index>(table.rows.size()), static_cast<Eigen::Index>(width));
   for (std::size_t i = 0; i < table.rows.size(); ++i) {
      for (std::size_t j = 0; j < width; ++j) {
         double v = 0.0;
         if (!parse_double(table.rows[i][j], v)) {
            throw std::runtime_error(path + ":" + std::to_string(table.line_numbers[i]) +
                                     ": field " + std::to_string(j + 1) + " ('" + table.rows[i][j] +
                                     "') is not a finite number");
         }
         m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
      }
   }
   return m;
}

LabeledDataset split(const LabeledDataset& data, double train_fraction, std::uint64_t seed,
                     bool stratified) {
   if (!(train_fraction >= 0.0 && train_fraction <= 1.0)) {
      throw std::invalid_argument("split: train fraction must lie in [0, 1]");
   }
   LabeledDataset out = data;
   out.train.assign(data.size(), false);
   std::mt19937_64 rng(seed);
   const auto take = [&](std::vector<std::size_t> rows) {
      std::shuffle(rows.begin(), rows.end(), rng);
      const auto n = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(rows.size())));
      for (std::size_t i = 0; i < n; ++i) {
         out.train[rows[i]] = true;
      }
   };
   if (stratified) {
      for (int c = 0; c < data.classes(); ++c) {
         std::vector<std::size_t> rows;
         for (std::size_t i = 0; i < data.size(); ++i) {
            if (data.labels[i] == c) {
               rows.push_back(i);
            }
         }
         if (rows.empty()) {
            throw std::invalid_argument("split: class '" + data.class_names[static_cast<std::size_t>(c)] +
                                        "' has no rows");
         }
         take(std::move(rows));
      }
   } else {
      std::vector<std::size_t> rows(data.size());
      std::iota(rows.begin(), rows.end(), std::size_t{0});
      take(std::move(rows));
   }
   return out;
}

std::vector<int> stratified_folds(const std::vector<int>& labels, int folds, std::uint64_t seed) {
   if (folds < 2) {
      throw std::invalid_argument("stratified_folds: need at least two folds");
   }
   std::map<int, std::vector<std::size_t>> by_class;
   for (std::size_t i = 0; i < labels.size(); ++i) {
      by_class[labels[i]].push_back(i);
   }
   std::mt19937_64 rng(seed);
   std::vector<int> fold(labels.size(), 0);
   std::size_t next = 0;
   for (auto& [label, rows] : by_class) {
      if (rows.size() < 2) {
         throw std::invalid_argument("stratified_folds: class " + std::to_string(label) +
                                     " has fewer than two rows; some fold would train without it");
      }
      std::shuffle(rows.begin(), rows.end(), rng);
      for (std::size_t r : rows) {
         fold[r] = static_cast<int>(next++ % static_cast<std::size_t>(folds));
      }
   }
   return fold;
}

Standardizer Standardizer::fit(const Eigen::MatrixXd& points) {
   if (points.rows() < 1) {
      throw std::invalid_argument("Standardizer: empty data");
   }
   Standardizer s;
   s.mean = points.colwise().mean();
   const Eigen::MatrixXd centered = points.rowwise() - s.mean;
   s.scale = centered.rowwise().norm().mean();
   if (!(s.scale > 0.0)) {
      throw std::domain_error("Standardizer: all points coincide");
   }
   return s;
}

Eigen::MatrixXd Standardizer::apply(const Eigen::MatrixXd& points) const {
   if (points.cols() != mean.size()) {
      throw std::invalid_argument("Standardizer: dimension mismatch");
   }
   return (points.rowwise() - mean) / scale;
}

} // namespace vanish
