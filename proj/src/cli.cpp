#include "vanish/cli.hpp"

#include "vanish/basis.hpp"
#include "vanish/datasets.hpp"
#include "vanish/io.hpp"
#include "vanish/pipeline.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace vanish {

namespace {

struct DataOptions {
   std::string dataset = "D1";
   std::size_t count = 0;  // 0: the dataset's default
   double noise = 0.05;
   bool normalize = false;
   bool no_header = false;
};

struct BasisFlags {
   std::string strategy = "coefficient";
   double theta = 1.0;
   double alpha_mult = kDefaultAlphaMultiplier;
   int max_degree = 0;  // 0: default guard

   Strategy build() const {
      Strategy s;
      s.kind = parse_strategy(strategy);
      if (s.kind == StrategyKind::coefficient) {
         s.theta = theta;
         s.alpha_multiplier = alpha_mult;
      } else {
         s.theta = 1.0;
         s.alpha_multiplier = 0.0;
      }
      s.validate();
      return s;
   }

   std::optional<int> guard() const { return max_degree > 0 ? std::optional<int>(max_degree) : std::nullopt; }
};

void add_basis_flags(CLI::App* app, BasisFlags& f) {
   app->add_option("--strategy", f.strategy, "identity, coefficient or vca")
      ->check(CLI::IsMember({"identity", "coefficient", "vca"}));
   app->add_option("--theta", f.theta, "coefficient truncation threshold in [0, 1]")->check(CLI::Range(0.0, 1.0));
   app->add_option("--alpha-mult", f.alpha_mult, "regularization multiplier (alpha = mult * Tr(N) / |C|)")
      ->check(CLI::NonNegativeNumber);
   app->add_option("--max-degree", f.max_degree, "degree guard (default min(#points, 15))")
      ->check(CLI::NonNegativeNumber);
}

void add_data_flags(CLI::App* app, DataOptions& d, std::uint64_t& seed) {
   app->add_option("--dataset", d.dataset, "D1, D2, D3, D2plus, D3plus, or csv:<path> (unlabeled points)");
   app->add_option("--count", d.count, "number of sampled points");
   app->add_option("--noise", d.noise, "noise ratio (of the mean absolute entry)")->check(CLI::NonNegativeNumber);
   app->add_option("--seed", seed, "random seed (VANISH_SEED overrides)");
   app->add_flag("--normalize", d.normalize, "scale points to unit mean norm");
   app->add_flag("--no-header", d.no_header, "the CSV has no header row");
}

Eigen::MatrixXd load_points(const DataOptions& d, std::uint64_t seed) {
   Eigen::MatrixXd points;
   if (d.dataset.rfind("csv:", 0) == 0) {
      points = load_points_csv(d.dataset.substr(4), ',', !d.no_header);
   } else {
      const std::size_t count = d.count > 0 ? d.count : default_count(d.dataset);
      points = synthetic_dataset(d.dataset, count, d.noise, seed).points;
   }
   if (d.normalize) {
      PointCloud c;
      c.points = points;
      points = normalize_mean_norm(c).points;
   }
   return points;
}

std::string fmt(double x, int precision = 6) {
   std::ostringstream s;
   s << std::setprecision(precision) << x;
   return s.str();
}

std::string vec(const Eigen::VectorXd& v, int precision = 4) {
   std::string s = "(";
   for (Eigen::Index i = 0; i < v.size(); ++i) {
      s += (i ? ", " : "") + fmt(v[i], precision);
   }
   return s + ")";
}

void print_run(const ConstructionResult& r, std::ostream& out) {
   const MonomialBasis basis(r.variables());
   for (const auto& l : r.layers) {
      out << "degree " << l.degree << ": |C| = " << l.candidate_count() << ", |F| = " << l.f_count()
          << ", |G| = " << l.g_count();
      if (l.zero_polynomials > 0) {
         out << ", zero polynomials dropped = " << l.zero_polynomials;
      }
      out << '\n';
      if (l.degree > 0 && l.candidate_count() <= 6) {
         for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(l.candidate_count()); ++j) {
            out << "  candidate " << j << " coefficients " << vec(l.candidate_coeffs.column(j).dense(basis, &r.truncation))
                << '\n';
         }
      }
      if (l.f_count() + l.g_count() <= 12) {
         out << "  F eigenvalues " << vec(l.f_eigenvalues, 6) << "  G eigenvalues " << vec(l.g_eigenvalues, 6) << '\n';
      }
   }
   out << "terminated at degree " << r.termination_degree << " ("
       << (r.terminated_by == Termination::max_degree ? "max degree" : "no nonvanishing polynomials")
       << "), |F| = " << r.f_count() << ", |G| = " << r.g_count() << '\n';
}

struct Check {
   std::string name;
   double expected;
   double actual;
   double tolerance;
   bool ok() const { return std::abs(expected - actual) <= tolerance; }
};

ConstructionResult toy_run(double epsilon, const Strategy& strategy) {
   Eigen::MatrixXd x(4, 2);
   x << 1.1, 1.0, 1.0, 1.1, -0.9, -0.9, -1.0, -1.0;
   return construct(x, epsilon, strategy);
}

int cmd_toy(double epsilon, const BasisFlags& flags, bool strategy_given, std::ostream& out) {
   const Strategy strategy = strategy_given ? flags.build() : Strategy::identity();
   const ConstructionResult r = toy_run(epsilon, strategy);
   print_run(r, out);
   if (strategy.kind != StrategyKind::identity || epsilon != 0.2) {
      out << "golden comparison skipped (values hold for the identity strategy at epsilon 0.2)\n";
      return 0;
   }
   const MonomialBasis basis(2);
   std::vector<Check> checks;
   const auto count = [&](const std::string& name, double expected, double actual) {
      checks.push_back({name, expected, actual, 0.0});
   };
   count("termination degree", 3, r.termination_degree);
   count("|F|", 3, static_cast<double>(r.f_count()));
   count("|G|", 2, static_cast<double>(r.g_count()));
   if (r.layers.size() > 2) {
      const auto& l1 = r.layers[1];
      count("|F_1|", 1, static_cast<double>(l1.f_count()));
      count("|G_1|", 1, static_cast<double>(l1.g_count()));
      const char* names[] = {"1", "x", "y"};
      for (Eigen::Index j = 0; j < std::min<Eigen::Index>(2, static_cast<Eigen::Index>(l1.candidate_count())); ++j) {
         const Eigen::VectorXd c = l1.candidate_coeffs.column(j).dense(basis);
         for (Eigen::Index k = 0; k < 3; ++k) {
            const double expected = k == 0 ? -0.05 : (k == j + 1 ? 1.0 : 0.0);
            checks.push_back({"C_1[" + std::to_string(j) + "] coefficient of " + names[k], expected, c[k], 0.01});
         }
      }
      if (l1.g_count() == 1 && l1.f_count() == 1) {
         checks.push_back({"G_1 eigenvalue", 0.01, l1.g_eigenvalues[0], 0.005});
         checks.push_back({"F_1 eigenvalue", 8.01, l1.f_eigenvalues[0], 0.005});
      }
      const auto& l2 = r.layers[2];
      if (l2.candidate_count() == 1) {
         Eigen::VectorXd c = l2.candidate_coeffs.column(0).dense(basis);
         if (c[4] < 0) c = -c;
         const char* names2[] = {"1", "x", "y", "x^2", "xy", "y^2"};
         const double expected[] = {-2.00, -0.096, -0.0963, 0.5, 1.0, 0.5};
         for (Eigen::Index k = 0; k < 6; ++k) {
            checks.push_back({std::string("C_2 coefficient of ") + names2[k], expected[k], c[k], 0.01});
         }
         if (l2.eigen.eigenvalues.size() == 1) {
            checks.push_back({"degree-2 eigenvalue", 0.78, l2.eigen.eigenvalues[0], 0.01});
         }
      }
      if (l2.f_count() == 1) {
         RescaleEntry f3;
         for (const auto& e : rescale_report(r)) {
            if (e.degree == 2 && !e.vanishing) {
               f3 = e;
            }
         }
         checks.push_back({"extent of f_3", 0.28, f3.extent, 0.005});
         checks.push_back({"coefficient norm of f_3", 2.3, f3.coeff_norm, 0.05});
         checks.push_back({"rescaled extent of f_3", 0.12, f3.rescaled_extent, 0.005});
      }
      if (r.layers.size() > 3 && r.layers[3].g_count() > 0) {
         checks.push_back({"degree-3 eigenvalue", 0.0, r.layers[3].g_eigenvalues.maxCoeff(), 1e-6});
      }
   }
   bool all = true;
   out << "\ngolden comparison\n";
   for (const auto& c : checks) {
      all = all && c.ok();
      out << "  " << (c.ok() ? "ok  " : "DIFF") << "  " << std::left << std::setw(34) << c.name << std::right
          << " expected " << std::setw(8) << fmt(c.expected, 4) << "  got " << std::setw(10) << fmt(c.actual, 6)
          << "  tol " << fmt(c.tolerance, 3) << '\n';
   }
   const auto degree2 = std::find_if(checks.begin(), checks.end(),
                                     [](const Check& c) { return c.name == "degree-2 eigenvalue"; });
   if (degree2 != checks.end() && !degree2->ok()) {
      out << "note: the stated degree-2 eigenvalue 0.78 disagrees with the stated extent of f_3 "
             "(0.28^2 = 0.078); the computed value is consistent with the latter\n";
   }
   out << (all ? "PASS" : "FAIL") << '\n';
   return all ? 0 : 1;
}

std::filesystem::path output_dir(const std::string& dir) {
   std::filesystem::path p(dir);
   std::filesystem::create_directories(p);
   return p;
}

int cmd_construct(const DataOptions& data, std::uint64_t seed, double epsilon, const BasisFlags& flags,
                  const std::string& out_dir, std::ostream& out) {
   const Strategy strategy = flags.build();
   const Eigen::MatrixXd points = load_points(data, seed);
   const ConstructionResult r = construct(points, epsilon, strategy, flags.guard());
   const DegreeDiagnostics d = diagnose(r);
   const auto dir = output_dir(out_dir);
   write_basis_json(r, (dir / "basis.json").string());
   write_diagnostics_csv(d, (dir / "diagnostics.csv").string());
   out << "points " << points.rows() << " x " << points.cols() << ", strategy " << to_string(strategy.kind);
   if (strategy.kind == StrategyKind::coefficient) {
      out << " (theta " << strategy.theta << ")";
   }
   out << ", epsilon " << epsilon << '\n';
   out << "|F| = " << r.f_count() << ", |G| = " << r.g_count() << ", terminated at degree " << r.termination_degree
       << ", coefficient length " << r.coefficient_length() << ", spurious " << d.spurious() << '\n';
   if (d.f.coeff_norm.present) {
      out << "F coefficient norm min/mean/max " << fmt(d.f.coeff_norm.min) << " / " << fmt(d.f.coeff_norm.mean)
          << " / " << fmt(d.f.coeff_norm.max) << '\n';
   }
   out << "wrote " << (dir / "basis.json").string() << " and " << (dir / "diagnostics.csv").string() << '\n';
   return 0;
}

int cmd_sweep(const DataOptions& data, std::uint64_t seed, double epsilon, const std::vector<double>& thetas,
              const BasisFlags& flags, const std::string& out_dir, std::ostream& out) {
   const Eigen::MatrixXd points = load_points(data, seed);
   const auto rows = truncation_sweep(points, epsilon, thetas, flags.guard(), flags.alpha_mult);
   const auto dir = output_dir(out_dir);
   write_sweep_csv(rows, (dir / "sweep.csv").string());
   out << std::setw(6) << "theta" << std::setw(10) << "length" << std::setw(12) << "norm min" << std::setw(12)
       << "norm mean" << std::setw(12) << "norm max" << std::setw(12) << "gamma" << std::setw(12) << "seconds" << '\n';
   for (const auto& r : rows) {
      out << std::setw(6) << fmt(r.theta, 3) << std::setw(10) << r.coefficient_length << std::setw(12)
          << fmt(r.coeff_norm.min, 4) << std::setw(12) << fmt(r.coeff_norm.mean, 4) << std::setw(12)
          << fmt(r.coeff_norm.max, 4) << std::setw(12) << fmt(r.gamma_product, 4) << std::setw(12)
          << fmt(r.seconds, 3) << '\n';
   }
   out << "wrote " << (dir / "sweep.csv").string() << '\n';
   return 0;
}

int cmd_classify(const std::string& path, const std::string& label_column, bool no_header, std::uint64_t seed,
                 const BasisFlags& flags, const std::vector<double>& grid, int folds, double train_fraction,
                 double reg, const std::string& out_dir, std::ostream& out) {
   CsvOptions csv;
   csv.label_column = label_column;
   csv.header = !no_header;
   const LabeledDataset data = load_csv(path, csv);
   if (data.classes() < 2) {
      throw std::runtime_error("classify: '" + path + "' has a single class; one-versus-rest needs at least two");
   }
   ClassifyOptions o;
   o.basis.strategy = flags.build();
   o.basis.max_degree = flags.guard();
   o.logistic.reg_strength = reg;
   o.grid = grid;
   o.folds = folds;
   o.train_fraction = train_fraction;
   o.seed = seed;
   const ClassifyReport r = classify(data, o);
   const auto dir = output_dir(out_dir);
   write_json(classify_to_json(r), (dir / "classify.json").string());
   out << "train " << r.train_size << ", test " << r.test_size << ", epsilon " << fmt(r.epsilon) << '\n';
   out << "test error " << fmt(r.test_error, 4) << ", train error " << fmt(r.train_error, 4) << ", feature length "
       << r.feature_length << '\n';
   out << "wrote " << (dir / "classify.json").string() << '\n';
   return 0;
}

int cmd_evaluate(const std::string& basis_path, const std::string& points_path, bool no_header,
                 const std::string& out_path, std::ostream& out) {
   const nlohmann::json doc = read_json(basis_path);
   const ConstructionResult r = basis_from_json(doc);
   double worst = 0.0;
   for (Index t = 0; t < r.layers.size(); ++t) {
      const auto& lj = doc.at("layers").at(t);
      for (const bool vanishing : {false, true}) {
         const auto& list = lj.at(vanishing ? "vanishing" : "nonvanishing");
         const Eigen::MatrixXd& ev = vanishing ? r.layers[t].g_eval : r.layers[t].f_eval;
         for (Eigen::Index j = 0; j < ev.cols(); ++j) {
            const double recorded = list.at(static_cast<std::size_t>(j)).at("extent").get<double>();
            const double diff = std::abs(ev.col(j).norm() - recorded) / std::max(1.0, std::abs(recorded));
            worst = std::max(worst, diff);
         }
      }
   }
   out << "reloaded " << r.f_count() << " nonvanishing and " << r.g_count()
       << " vanishing polynomials; largest extent deviation " << fmt(worst, 3) << '\n';
   if (!points_path.empty()) {
      const Eigen::MatrixXd y = load_points_csv(points_path, ',', !no_header);
      const BasisEvaluation e = evaluate_basis(r, y);
      std::ofstream csv(out_path);
      if (!csv) {
         throw std::runtime_error("cannot open '" + out_path + "' for writing");
      }
      for (Eigen::Index j = 0; j < e.f.cols(); ++j) {
         csv << (j ? "," : "") << "f" << j << "_deg" << e.f_degree[static_cast<std::size_t>(j)];
      }
      for (Eigen::Index j = 0; j < e.g.cols(); ++j) {
         csv << ",g" << j << "_deg" << e.g_degree[static_cast<std::size_t>(j)];
      }
      csv << '\n' << std::setprecision(17);
      for (Eigen::Index i = 0; i < y.rows(); ++i) {
         for (Eigen::Index j = 0; j < e.f.cols(); ++j) {
            csv << (j ? "," : "") << e.f(i, j);
         }
         for (Eigen::Index j = 0; j < e.g.cols(); ++j) {
            csv << ',' << e.g(i, j);
         }
         csv << '\n';
      }
      out << "evaluated " << y.rows() << " points; wrote " << out_path << '\n';
   }
   return worst <= 1e-10 ? 0 : 1;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
   CLI::App app{"Basis construction for approximate vanishing ideals"};
   app.name("vanish");
   app.require_subcommand(1);

   std::uint64_t seed = 0;
   DataOptions data;
   BasisFlags flags;
   double epsilon = 0.2;
   std::string out_dir = ".";

   auto* toy = app.add_subcommand("toy", "run the four-point worked example and compare with golden values");
   double toy_epsilon = 0.2;
   BasisFlags toy_flags;
   toy->add_option("--epsilon", toy_epsilon, "tolerance")->check(CLI::NonNegativeNumber);
   auto* toy_strategy = toy->add_option("--strategy", toy_flags.strategy, "identity, coefficient or vca")
                           ->check(CLI::IsMember({"identity", "coefficient", "vca"}));

   auto* con = app.add_subcommand("construct", "build a basis; write basis.json and diagnostics.csv");
   add_data_flags(con, data, seed);
   add_basis_flags(con, flags);
   con->add_option("--epsilon", epsilon, "tolerance")->required()->check(CLI::NonNegativeNumber);
   con->add_option("--out", out_dir, "output directory");

   auto* sweep = app.add_subcommand("truncate-sweep", "coefficient strategy over several theta; write sweep.csv");
   std::vector<double> thetas{0.0, 0.5, 0.9, 1.0};
   add_data_flags(sweep, data, seed);
   sweep->add_option("--epsilon", epsilon, "tolerance")->required()->check(CLI::NonNegativeNumber);
   sweep->add_option("--thetas", thetas, "theta values")->delimiter(',')->check(CLI::Range(0.0, 1.0));
   sweep->add_option("--alpha-mult", flags.alpha_mult, "regularization multiplier")->check(CLI::NonNegativeNumber);
   sweep->add_option("--max-degree", flags.max_degree, "degree guard")->check(CLI::NonNegativeNumber);
   sweep->add_option("--out", out_dir, "output directory");

   auto* cls = app.add_subcommand("classify", "per-class bases, OvR logistic regression; write classify.json");
   std::string csv_path, label_column;
   std::vector<double> grid;
   int folds = 3;
   double train_fraction = 0.6;
   double reg = 1.0;
   bool cls_no_header = false;
   cls->add_option("--data", csv_path, "labeled CSV")->required()->check(CLI::ExistingFile);
   cls->add_option("--label-column", label_column, "label column name or 0-based index (default: last)");
   cls->add_flag("--no-header", cls_no_header, "the CSV has no header row");
   cls->add_option("--seed", seed, "random seed (VANISH_SEED overrides)");
   add_basis_flags(cls, flags);
   cls->add_option("--epsilon-grid", grid, "candidate epsilon values (default: 12 log-spaced)")->delimiter(',');
   cls->add_option("--folds", folds, "cross-validation folds")->check(CLI::Range(2, 1000));
   cls->add_option("--train-fraction", train_fraction, "training share")->check(CLI::Range(0.0, 1.0));
   cls->add_option("--reg", reg, "l2 regularization strength")->check(CLI::NonNegativeNumber);
   cls->add_option("--out", out_dir, "output directory");

   auto* ev = app.add_subcommand("evaluate", "reload basis.json, verify extents, optionally evaluate new points");
   std::string basis_path, points_path, eval_out = "evaluations.csv";
   bool ev_no_header = false;
   ev->add_option("--basis", basis_path, "basis.json")->required()->check(CLI::ExistingFile);
   ev->add_option("--points", points_path, "CSV of points to evaluate")->check(CLI::ExistingFile);
   ev->add_flag("--no-header", ev_no_header, "the points CSV has no header row");
   ev->add_option("--out", eval_out, "evaluations CSV");

   std::vector<std::string> reversed(args.rbegin(), args.rend());
   try {
      app.parse(reversed);
   } catch (const CLI::ParseError& e) {
      return app.exit(e, out, err);
   }
   if (const char* env = std::getenv("VANISH_SEED")) {
      try {
         seed = std::stoull(env);
      } catch (const std::exception&) {
         err << "VANISH_SEED must be a nonnegative integer, got '" << env << "'\n";
         return 2;
      }
   }
   try {
      if (toy->parsed()) {
         return cmd_toy(toy_epsilon, toy_flags, toy_strategy->count() > 0, out);
      }
      if (con->parsed()) {
         return cmd_construct(data, seed, epsilon, flags, out_dir, out);
      }
      if (sweep->parsed()) {
         return cmd_sweep(data, seed, epsilon, thetas, flags, out_dir, out);
      }
      if (cls->parsed()) {
         return cmd_classify(csv_path, label_column, cls_no_header, seed, flags, grid, folds, train_fraction, reg,
                             out_dir, out);
      }
      if (ev->parsed()) {
         return cmd_evaluate(basis_path, points_path, ev_no_header, eval_out, out);
      }
   } catch (const std::exception& e) {
      err << "error: " << e.what() << '\n';
      return 1;
   }
   return 1;
}

} // namespace vanish
