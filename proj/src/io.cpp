#include "vanish/io.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace vanish {

using nlohmann::json;

namespace {

json matrix_json(const Eigen::MatrixXd& m) {
   std::vector<double> data;
   data.reserve(static_cast<std::size_t>(m.size()));
   for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
         data.push_back(m(i, j));
      }
   }
   return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

Eigen::MatrixXd matrix_from(const json& j) {
   const auto rows = j.at("rows").get<Eigen::Index>();
   const auto cols = j.at("cols").get<Eigen::Index>();
   const auto& data = j.at("data");
   if (rows < 0 || cols < 0 || data.size() != static_cast<std::size_t>(rows * cols)) {
      throw std::runtime_error("matrix entry has inconsistent shape");
   }
   Eigen::MatrixXd m(rows, cols);
   std::size_t k = 0;
   for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index jj = 0; jj < cols; ++jj) {
         m(i, jj) = data[k++].get<double>();
      }
   }
   return m;
}

json vector_json(const Eigen::VectorXd& v) {
   return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::VectorXd vector_from(const json& j) {
   const auto values = j.get<std::vector<double>>();
   return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

// NaN has no JSON literal.
json number(double x) {
   return std::isfinite(x) ? json(x) : json(nullptr);
}

json polynomials_json(const MonomialBasis& basis, const Eigen::MatrixXd& eval, const Eigen::VectorXd& eigenvalues,
                      const CoefficientMatrix& tracked, const CoefficientMatrix& exact) {
   json out = json::array();
   const Eigen::VectorXd tracked_norms = tracked.column_norms();
   for (Eigen::Index j = 0; j < eval.cols(); ++j) {
      const CoefficientVector c = exact.column(j);
      out.push_back({{"extent", eval.col(j).norm()},
                     {"eigenvalue", eigenvalues[j]},
                     {"tracked_coeff_norm", tracked_norms[j]},
                     {"coeff_norm", c.norm()},
                     {"coefficients", vector_json(c.dense(basis))}});
   }
   return out;
}

std::string format(double x) {
   if (!std::isfinite(x)) {
      return std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf");
   }
   std::ostringstream s;
   s << std::setprecision(12) << x;
   return s.str();
}

std::ofstream open_out(const std::string& path) {
   std::ofstream out(path);
   if (!out) {
      throw std::runtime_error("cannot open '" + path + "' for writing");
   }
   return out;
}

json summary_json(const Summary& s) {
   if (!s.present) {
      return nullptr;
   }
   return {{"min", number(s.min)}, {"mean", number(s.mean)}, {"max", number(s.max)}};
}

json stats_json(const PolynomialStats& p) {
   return {{"count", p.count},
           {"zero_polynomials", p.zero_polynomials},
           {"spurious", p.spurious},
           {"coeff_norm", summary_json(p.coeff_norm)},
           {"extent", summary_json(p.extent)},
           {"rescaled_extent", summary_json(p.rescaled_extent)}};
}

} // namespace

json basis_to_json(const ConstructionResult& result) {
   const MonomialBasis basis(result.variables());
   const auto exact = exact_coefficients(result);
   json doc;
   doc["schema_version"] = kSchemaVersion;
   doc["kind"] = "basis";
   doc["strategy"] = {{"kind", to_string(result.strategy.kind)},
                      {"theta", result.strategy.theta},
                      {"alpha_multiplier", result.strategy.alpha_multiplier}};
   doc["epsilon"] = result.epsilon;
   doc["max_degree"] = result.max_degree;
   doc["constant"] = result.constant;
   doc["variables"] = result.variables();
   doc["termination_degree"] = result.termination_degree;
   doc["terminated_by"] = result.terminated_by == Termination::max_degree ? "max_degree" : "no_nonvanishing";
   doc["f_count"] = result.f_count();
   doc["g_count"] = result.g_count();
   doc["coefficient_length"] = result.coefficient_length();
   doc["gamma_product"] = result.truncation.gamma_product();
   doc["points"] = matrix_json(result.points);
   json layers = json::array();
   for (Index t = 0; t < result.layers.size(); ++t) {
      const DegreeLayer& l = result.layers[t];
      json products = json::array();
      for (const auto& [i, j] : l.products) {
         products.push_back({i, j});
      }
      json truncation = nullptr;
      if (result.truncation.has(static_cast<int>(t))) {
         const auto& sel = result.truncation.selection(static_cast<int>(t));
         truncation = {{"full", sel.full}, {"kept", sel.kept}, {"gamma", sel.gamma}};
      }
      layers.push_back({{"degree", l.degree},
                        {"products", products},
                        {"projection", matrix_json(l.projection)},
                        {"f_combination", matrix_json(l.f_combination)},
                        {"g_combination", matrix_json(l.g_combination)},
                        {"f_eigenvalues", vector_json(l.f_eigenvalues)},
                        {"g_eigenvalues", vector_json(l.g_eigenvalues)},
                        {"f_scales", vector_json(l.f_scales)},
                        {"zero_polynomials", l.zero_polynomials},
                        {"truncation", truncation},
                        {"nonvanishing", polynomials_json(basis, l.f_eval, l.f_eigenvalues, l.f_coeffs, exact[t].f)},
                        {"vanishing", polynomials_json(basis, l.g_eval, l.g_eigenvalues, l.g_coeffs, exact[t].g)}});
   }
   doc["layers"] = layers;
   return doc;
}

ConstructionResult basis_from_json(const json& doc) {
   try {
      const int version = doc.at("schema_version").get<int>();
      if (version != kSchemaVersion) {
         throw std::runtime_error("unsupported schema_version " + std::to_string(version));
      }
      ConstructionResult r;
      const auto& st = doc.at("strategy");
      r.strategy.kind = parse_strategy(st.at("kind").get<std::string>());
      r.strategy.theta = st.at("theta").get<double>();
      r.strategy.alpha_multiplier = st.at("alpha_multiplier").get<double>();
      r.strategy.validate();
      r.epsilon = doc.at("epsilon").get<double>();
      r.max_degree = doc.at("max_degree").get<int>();
      r.constant = doc.at("constant").get<double>();
      r.termination_degree = doc.at("termination_degree").get<int>();
      r.terminated_by =
         doc.at("terminated_by").get<std::string>() == "max_degree" ? Termination::max_degree : Termination::no_nonvanishing;
      r.points = matrix_from(doc.at("points"));
      if (r.points.cols() != doc.at("variables").get<Eigen::Index>()) {
         throw std::runtime_error("points do not match 'variables'");
      }
      for (const auto& lj : doc.at("layers")) {
         DegreeLayer l;
         l.degree = lj.at("degree").get<int>();
         if (l.degree != static_cast<int>(r.layers.size())) {
            throw std::runtime_error("layers out of order");
         }
         for (const auto& p : lj.at("products")) {
            l.products.emplace_back(p.at(0).get<Index>(), p.at(1).get<Index>());
         }
         l.projection = matrix_from(lj.at("projection"));
         l.f_combination = matrix_from(lj.at("f_combination"));
         l.g_combination = matrix_from(lj.at("g_combination"));
         l.f_eigenvalues = vector_from(lj.at("f_eigenvalues"));
         l.g_eigenvalues = vector_from(lj.at("g_eigenvalues"));
         l.f_scales = vector_from(lj.at("f_scales"));
         l.zero_polynomials = lj.at("zero_polynomials").get<Index>();
         r.layers.push_back(std::move(l));
      }
      restore_from_recipe(r);
      return r;
   } catch (const std::exception& e) {
      throw std::runtime_error(std::string("basis.json: ") + e.what());
   }
}

void write_json(const json& doc, const std::string& path) {
   auto out = open_out(path);
   out << doc.dump(2) << '\n';
   if (!out) {
      throw std::runtime_error("failed writing '" + path + "'");
   }
}

json read_json(const std::string& path) {
   std::ifstream in(path);
   if (!in) {
      throw std::runtime_error("cannot open '" + path + "'");
   }
   try {
      return json::parse(in);
   } catch (const json::exception& e) {
      throw std::runtime_error("'" + path + "': " + e.what());
   }
}

void write_basis_json(const ConstructionResult& result, const std::string& path) {
   write_json(basis_to_json(result), path);
}

ConstructionResult load_basis_json(const std::string& path) {
   return basis_from_json(read_json(path));
}

void write_diagnostics_csv(const DegreeDiagnostics& d, std::ostream& out) {
   out << "degree,kind,count,zero_polynomials,spurious,"
          "coeff_norm_min,coeff_norm_mean,coeff_norm_max,"
          "extent_min,extent_mean,extent_max,"
          "rescaled_extent_min,rescaled_extent_mean,rescaled_extent_max,"
          "coefficient_length,seconds,bytes\n";
   const auto triple = [&](const Summary& s) {
      if (s.present) {
         out << ',' << format(s.min) << ',' << format(s.mean) << ',' << format(s.max);
      } else {
         out << ",,,";
      }
   };
   for (const auto& t : d.degrees) {
      for (const bool vanishing : {false, true}) {
         const PolynomialStats& p = vanishing ? t.g : t.f;
         out << t.degree << ',' << (vanishing ? 'G' : 'F') << ',' << p.count << ',' << p.zero_polynomials << ','
             << p.spurious;
         triple(p.coeff_norm);
         triple(p.extent);
         triple(p.rescaled_extent);
         out << ',' << t.coefficient_length << ',' << format(t.seconds) << ',' << t.bytes << '\n';
      }
   }
}

void write_diagnostics_csv(const DegreeDiagnostics& d, const std::string& path) {
   auto out = open_out(path);
   write_diagnostics_csv(d, out);
}

void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& out) {
   out << "theta,coefficient_length,coeff_norm_min,coeff_norm_mean,coeff_norm_max,gamma_product,"
          "f_count,g_count,kept_per_degree,f_per_degree,seconds,memory_bytes\n";
   const auto joined = [](const std::vector<Index>& v) {
      std::string s;
      for (std::size_t i = 0; i < v.size(); ++i) {
         s += (i ? ";" : "") + std::to_string(v[i]);
      }
      return s;
   };
   for (const auto& r : rows) {
      out << format(r.theta) << ',' << r.coefficient_length;
      if (r.coeff_norm.present) {
         out << ',' << format(r.coeff_norm.min) << ',' << format(r.coeff_norm.mean) << ','
             << format(r.coeff_norm.max);
      } else {
         out << ",,,";
      }
      out << ',' << format(r.gamma_product) << ',' << r.f_count << ',' << r.g_count << ',' << joined(r.kept)
          << ',' << joined(r.f_counts) << ',' << format(r.seconds) << ',' << r.memory_bytes << '\n';
   }
}

void write_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path) {
   auto out = open_out(path);
   write_sweep_csv(rows, out);
}

json diagnostics_to_json(const DegreeDiagnostics& d) {
   json degrees = json::array();
   for (const auto& t : d.degrees) {
      degrees.push_back({{"degree", t.degree},
                         {"nonvanishing", stats_json(t.f)},
                         {"vanishing", stats_json(t.g)},
                         {"coefficient_length", t.coefficient_length},
                         {"seconds", t.seconds},
                         {"bytes", t.bytes}});
   }
   return {{"schema_version", kSchemaVersion},
           {"nonvanishing", stats_json(d.f)},
           {"vanishing", stats_json(d.g)},
           {"spurious", d.spurious()},
           {"coefficient_length", d.coefficient_length},
           {"gamma_product", d.gamma_product},
           {"seconds", d.seconds},
           {"memory_bytes", d.memory_bytes},
           {"degrees", degrees}};
}

json classify_to_json(const ClassifyReport& r) {
   json cv = json::array();
   for (std::size_t i = 0; i < r.cv.grid.size(); ++i) {
      cv.push_back({{"epsilon", r.cv.grid[i]}, {"error", number(r.cv.errors[i])}});
   }
   return {{"schema_version", kSchemaVersion},
           {"kind", "classify"},
           {"epsilon", r.epsilon},
           {"test_error", number(r.test_error)},
           {"train_error", r.train_error},
           {"feature_length", r.feature_length},
           {"classes", r.class_names},
           {"g_counts", r.g_counts},
           {"f_counts", r.f_counts},
           {"train_size", r.train_size},
           {"test_size", r.test_size},
           {"cross_validation", cv},
           {"seconds", r.seconds}};
}

} // namespace vanish
