#include "vanish/basis.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace vanish {

std::string to_string(StrategyKind kind) {
   switch (kind) {
   case StrategyKind::identity:
      return "identity";
   case StrategyKind::coefficient:
      return "coefficient";
   case StrategyKind::vca:
      return "vca";
   }
   return "unknown";
}

StrategyKind parse_strategy(const std::string& name) {
   if (name == "identity") {
      return StrategyKind::identity;
   }
   if (name == "coefficient") {
      return StrategyKind::coefficient;
   }
   if (name == "vca") {
      return StrategyKind::vca;
   }
   throw std::invalid_argument("unknown strategy '" + name + "' (expected identity, coefficient or vca)");
}

void Strategy::validate() const {
   if (!(theta >= 0.0 && theta <= 1.0)) {
      throw std::invalid_argument("Strategy: theta must lie in [0, 1]");
   }
   if (!(alpha_multiplier >= 0.0) || !std::isfinite(alpha_multiplier)) {
      throw std::invalid_argument("Strategy: alpha multiplier must be finite and nonnegative");
   }
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
   return std::chrono::duration<double>(Clock::now() - start).count();
}

Eigen::MatrixXd product_columns(const Eigen::MatrixXd& f1, const Eigen::MatrixXd& prev,
                                const std::vector<std::pair<Index, Index>>& products) {
   Eigen::MatrixXd out(f1.rows(), static_cast<Eigen::Index>(products.size()));
   for (Index k = 0; k < products.size(); ++k) {
      const auto [i, j] = products[k];
      out.col(static_cast<Eigen::Index>(k)) =
         f1.col(static_cast<Eigen::Index>(i)).cwiseProduct(prev.col(static_cast<Eigen::Index>(j)));
   }
   return out;
}

Eigen::MatrixXd select_columns(const Eigen::MatrixXd& m, const std::vector<Eigen::Index>& idx) {
   Eigen::MatrixXd out(m.rows(), static_cast<Eigen::Index>(idx.size()));
   for (Index k = 0; k < idx.size(); ++k) {
      out.col(static_cast<Eigen::Index>(k)) = m.col(idx[k]);
   }
   return out;
}

Eigen::VectorXd select_entries(const Eigen::VectorXd& v, const std::vector<Eigen::Index>& idx) {
   Eigen::VectorXd out(static_cast<Eigen::Index>(idx.size()));
   for (Index k = 0; k < idx.size(); ++k) {
      out[static_cast<Eigen::Index>(k)] = v[idx[k]];
   }
   return out;
}

void append_columns(Eigen::MatrixXd& dst, const Eigen::MatrixXd& src) {
   if (src.cols() == 0) {
      return;
   }
   if (dst.cols() == 0) {
      dst = src;
      return;
   }
   const Eigen::Index old = dst.cols();
   dst.conservativeResize(Eigen::NoChange, old + src.cols());
   dst.rightCols(src.cols()) = src;
}

std::vector<TrackedPolynomial> tracked(const Eigen::MatrixXd& eval, const CoefficientMatrix& coeffs,
                                       const Eigen::VectorXd& eigenvalues,
                                       const Eigen::VectorXd* scales, int degree) {
   std::vector<TrackedPolynomial> out;
   out.reserve(static_cast<Index>(eval.cols()));
   for (Eigen::Index j = 0; j < eval.cols(); ++j) {
      TrackedPolynomial p;
      p.eval = eval.col(j);
      p.coeffs = coeffs.column(j);
      p.degree = degree;
      p.extent = p.eval.norm();
      p.eigenvalue = j < eigenvalues.size() ? eigenvalues[j] : 0.0;
      p.scale = scales != nullptr && j < scales->size() ? (*scales)[j] : 1.0;
      out.push_back(std::move(p));
   }
   return out;
}

std::size_t matrix_bytes(const Eigen::MatrixXd& m) {
   return static_cast<std::size_t>(m.size()) * sizeof(double);
}

constexpr double kNullspaceTolerance = 1e-12;
constexpr double kZeroCancellation = 1e-9;

} // namespace

std::vector<TrackedPolynomial> DegreeLayer::candidates() const {
   return tracked(candidate_eval, candidate_coeffs, Eigen::VectorXd(), nullptr, degree);
}

std::vector<TrackedPolynomial> DegreeLayer::nonvanishing() const {
   return tracked(f_eval, f_coeffs, f_eigenvalues, &f_scales, degree);
}

std::vector<TrackedPolynomial> DegreeLayer::vanishing() const {
   return tracked(g_eval, g_coeffs, g_eigenvalues, nullptr, degree);
}

std::size_t DegreeLayer::bytes() const {
   return matrix_bytes(projection) + matrix_bytes(f_combination) + matrix_bytes(g_combination) +
          matrix_bytes(candidate_eval) + candidate_coeffs.bytes() + matrix_bytes(normalization) +
          matrix_bytes(eigen.eigenvectors) + matrix_bytes(f_eval) + matrix_bytes(g_eval) +
          f_coeffs.bytes() + g_coeffs.bytes();
}

Index ConstructionResult::g_count() const {
   Index n = 0;
   for (const auto& l : layers) {
      n += l.g_count();
   }
   return n;
}

std::vector<TrackedPolynomial> ConstructionResult::nonvanishing() const {
   std::vector<TrackedPolynomial> out;
   for (const auto& l : layers) {
      auto part = l.nonvanishing();
      out.insert(out.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
   }
   return out;
}

std::vector<TrackedPolynomial> ConstructionResult::vanishing() const {
   std::vector<TrackedPolynomial> out;
   for (const auto& l : layers) {
      auto part = l.vanishing();
      out.insert(out.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
   }
   return out;
}

std::size_t ConstructionResult::memory_bytes() const {
   std::size_t n = matrix_bytes(points) + matrix_bytes(f_eval) + f_coeffs.bytes();
   for (const auto& l : layers) {
      n += l.bytes();
   }
   return n;
}

int default_max_degree(Eigen::Index points) {
   return static_cast<int>(std::min<Eigen::Index>(points, 15));
}

CandidateSet step1_candidates(const MonomialBasis& basis, int t, const ConstructionResult& so_far) {
   if (t < 1 || static_cast<Index>(t) != so_far.layers.size()) {
      throw std::invalid_argument("step1_candidates: layers 0.." + std::to_string(t - 1) +
                                  " must already exist");
   }
   const auto& prev = so_far.layers[static_cast<Index>(t - 1)];
   if (prev.f_count() == 0) {
      throw std::logic_error("step1_candidates: F_{t-1} is empty; construction should have stopped");
   }
   const int n = basis.variables();
   CandidateSet c;
   c.degree = t;
   CoefficientMatrix pre_coeffs;
   if (t == 1) {
      c.pre_eval = so_far.points;
      pre_coeffs = CoefficientMatrix({Eigen::MatrixXd::Zero(1, n), Eigen::MatrixXd::Identity(n, n)});
   } else {
      const auto& first = so_far.layers[1];
      // The multipliers keep all n + 1 coefficients even when degree 1 is truncated; only the
      // source columns of the shift are restricted.
      const CoefficientMatrix multipliers = combine(first.candidate_coeffs, first.f_combination);
      for (Index i = 0; i < first.f_count(); ++i) {
         for (Index j = 0; j < prev.f_count(); ++j) {
            c.products.emplace_back(i, j);
         }
         const CoefficientVector p = multipliers.column(static_cast<Eigen::Index>(i));
         pre_coeffs.append(multiply_by_linear(basis, p, prev.f_coeffs, &so_far.truncation));
      }
      c.pre_eval = product_columns(first.f_eval, prev.f_eval, c.products);
   }
   c.pre_norms = c.pre_eval.colwise().norm().transpose();
   ProjectionResult proj = projection_residual(c.pre_eval, so_far.f_eval);
   c.eval = std::move(proj.residual);
   c.projection = std::move(proj.combination);
   c.coeffs = subtract_combination(pre_coeffs, so_far.f_coeffs, c.projection);
   return c;
}

Step2Solution step2_solve(const CandidateSet& candidates, const Strategy& strategy,
                          const TruncationState& truncation) {
   const Eigen::Index m = candidates.eval.cols();
   if (m < 1) {
      throw std::invalid_argument("step2_solve: no candidates");
   }
   Step2Solution sol;
   Eigen::MatrixXd a = candidates.eval.transpose() * candidates.eval;
   a = 0.5 * (a + a.transpose());
   Eigen::MatrixXd vectors;

   if (strategy.kind != StrategyKind::coefficient) {
      sol.normalization = Eigen::MatrixXd::Identity(m, m);
      sol.regularization = Regularization::none();
      vectors = sym_eig(a).eigenvectors;
   } else {
      sol.normalization = truncated_normalization_matrix(
         candidates.coeffs, truncation.gamma_product_before(candidates.degree));
      sol.regularization = Regularization::from_multiplier(strategy.alpha_multiplier, sol.normalization);
      const double trace = sol.normalization.trace();
      if (!(trace > 0.0)) {
         sol.removed = static_cast<Index>(m);
         sol.eigen.eigenvalues.resize(0);
         sol.eigen.eigenvectors.resize(m, 0);
         return sol;
      }
      // Candidates whose coefficients cancel exactly span the nullspace of N; they are the zero
      // polynomial and are taken out before the generalized solve.
      const EigenDecomposition en = sym_eig(sol.normalization);
      std::vector<Eigen::Index> keep;
      for (Eigen::Index i = 0; i < m; ++i) {
         if (en.eigenvalues[i] > kNullspaceTolerance * trace) {
            keep.push_back(i);
         }
      }
      sol.removed = static_cast<Index>(m) - keep.size();
      const Eigen::MatrixXd u = select_columns(en.eigenvectors, keep);
      const Eigen::MatrixXd cu = candidates.eval * u;
      Eigen::MatrixXd ar = cu.transpose() * cu;
      const Eigen::MatrixXd br = select_entries(en.eigenvalues, keep).asDiagonal();
      const EigenDecomposition reduced = gen_sym_eig(ar, br, sol.regularization);
      vectors = u * reduced.eigenvectors;
   }

   // Rescale each vector to unit (N + alpha I)-norm and take lambda as ||C(X) v||^2, so the
   // extent of C v equals sqrt(lambda) to rounding.
   Eigen::MatrixXd rhs = sol.normalization;
   rhs.diagonal().array() += sol.regularization.realized_alpha;
   Eigen::VectorXd lambda(vectors.cols());
   for (Eigen::Index k = 0; k < vectors.cols(); ++k) {
      const double q = vectors.col(k).dot(rhs * vectors.col(k));
      if (!(q > 0.0)) {
         throw std::runtime_error("step2_solve: eigenvector has nonpositive normalization");
      }
      vectors.col(k) /= std::sqrt(q);
      lambda[k] = (candidates.eval * vectors.col(k)).squaredNorm();
   }
   normalize_signs(vectors);
   std::vector<Eigen::Index> order(static_cast<Index>(vectors.cols()));
   std::iota(order.begin(), order.end(), Eigen::Index{0});
   std::stable_sort(order.begin(), order.end(),
                    [&](Eigen::Index x, Eigen::Index y) { return lambda[x] < lambda[y]; });
   sol.eigen.eigenvectors = select_columns(vectors, order);
   sol.eigen.eigenvalues = select_entries(lambda, order);
   return sol;
}

Step3Split step3_split(const Step2Solution& solution, double epsilon, const Strategy& strategy) {
   Step3Split split;
   const double trace = solution.normalization.trace();
   const auto& v = solution.eigen.eigenvectors;
   for (Eigen::Index i = 0; i < v.cols(); ++i) {
      if (strategy.kind == StrategyKind::coefficient) {
         const double nv = v.col(i).dot(solution.normalization * v.col(i));
         if (nv < kNullspaceTolerance * trace) {
            ++split.dropped;
            continue;
         }
      }
      if (std::sqrt(solution.eigen.eigenvalues[i]) <= epsilon) {
         split.vanishing.push_back(i);
      } else {
         split.nonvanishing.push_back(i);
      }
   }
   return split;
}

ConstructionResult construct(const Eigen::MatrixXd& points, double epsilon, const Strategy& strategy,
                             std::optional<int> max_degree) {
   const auto start = Clock::now();
   if (points.rows() < 1) {
      throw std::invalid_argument("construct: need at least one point");
   }
   if (points.cols() < 1) {
      throw std::invalid_argument("construct: need at least one variable");
   }
   require_finite(points, "construct");
   if (!(epsilon >= 0.0)) {
      throw std::invalid_argument("construct: epsilon must be nonnegative");
   }
   strategy.validate();
   const int guard = max_degree.value_or(default_max_degree(points.rows()));
   if (guard < 1) {
      throw std::invalid_argument("construct: max_degree must be positive");
   }

   const MonomialBasis basis(static_cast<int>(points.cols()));
   const Eigen::Index s = points.rows();

   ConstructionResult result;
   result.points = points;
   result.epsilon = epsilon;
   result.strategy = strategy;
   result.max_degree = guard;
   result.constant = strategy.kind == StrategyKind::vca ? 1.0 / std::sqrt(static_cast<double>(s)) : 1.0;
   result.truncation = TruncationState(strategy.kind == StrategyKind::coefficient ? strategy.theta : 1.0);

   {
      DegreeLayer zero;
      zero.degree = 0;
      zero.f_eval = Eigen::MatrixXd::Constant(s, 1, result.constant);
      zero.f_coeffs = CoefficientMatrix({Eigen::MatrixXd::Constant(1, 1, result.constant)});
      zero.f_eigenvalues = Eigen::VectorXd::Constant(1, result.constant * result.constant * static_cast<double>(s));
      zero.f_scales = Eigen::VectorXd::Ones(1);
      zero.g_eval.resize(s, 0);
      zero.g_coeffs = CoefficientMatrix({Eigen::MatrixXd::Zero(1, 0)});
      result.truncation.push(DegreeSelection{}, 1);
      result.f_eval = zero.f_eval;
      result.f_coeffs = zero.f_coeffs;
      result.layers.push_back(std::move(zero));
   }

   for (int t = 1; t <= guard; ++t) {
      const auto layer_start = Clock::now();
      CandidateSet cands = step1_candidates(basis, t, result);
      Step2Solution sol = step2_solve(cands, strategy, result.truncation);
      const Step3Split split = step3_split(sol, epsilon, strategy);

      DegreeLayer layer;
      layer.degree = t;
      layer.products = std::move(cands.products);
      layer.projection = std::move(cands.projection);
      layer.candidate_pre_norms = std::move(cands.pre_norms);

      const Eigen::MatrixXd vf = select_columns(sol.eigen.eigenvectors, split.nonvanishing);
      layer.f_eigenvalues = select_entries(sol.eigen.eigenvalues, split.nonvanishing);
      layer.g_eigenvalues = select_entries(sol.eigen.eigenvalues, split.vanishing);
      layer.f_scales = Eigen::VectorXd::Ones(vf.cols());
      if (strategy.kind == StrategyKind::vca) {
         layer.f_scales = layer.f_eigenvalues.cwiseSqrt().cwiseInverse();
      }
      layer.f_combination = vf * layer.f_scales.asDiagonal();
      layer.g_combination = select_columns(sol.eigen.eigenvectors, split.vanishing);

      layer.f_eval = cands.eval * layer.f_combination;
      layer.g_eval = cands.eval * layer.g_combination;
      // Same product as the stored evaluations, so the extent identity survives rounding even
      // for eigenvalues at the noise floor.
      layer.g_eigenvalues = layer.g_eval.colwise().squaredNorm().transpose();
      if (strategy.kind != StrategyKind::vca) {
         layer.f_eigenvalues = layer.f_eval.colwise().squaredNorm().transpose();
      }
      layer.f_coeffs = combine(cands.coeffs, layer.f_combination);
      layer.g_coeffs = combine(cands.coeffs, layer.g_combination);

      DegreeSelection sel;
      if (strategy.truncates() && layer.f_count() > 0) {
         sel = truncate_select(layer.f_coeffs.block(t), strategy.theta);
         layer.f_coeffs.block(t) = restrict_rows(layer.f_coeffs.block(t), sel);
         layer.g_coeffs.block(t) = restrict_rows(layer.g_coeffs.block(t), sel);
      }
      result.truncation.push(sel, basis.block_size(t));

      layer.candidate_eval = std::move(cands.eval);
      layer.candidate_coeffs = std::move(cands.coeffs);
      layer.normalization = std::move(sol.normalization);
      layer.regularization = sol.regularization;
      layer.eigen = std::move(sol.eigen);
      layer.zero_polynomials = sol.removed + split.dropped;

      result.f_coeffs.extend(result.truncation.rows(basis, t));
      result.f_coeffs.append(layer.f_coeffs);
      append_columns(result.f_eval, layer.f_eval);

      const bool empty = layer.f_count() == 0;
      layer.seconds = seconds_since(layer_start);
      result.layers.push_back(std::move(layer));
      result.termination_degree = t;
      if (empty) {
         result.terminated_by = Termination::no_nonvanishing;
         break;
      }
      if (t == guard) {
         result.terminated_by = Termination::max_degree;
      }
   }
   result.seconds = seconds_since(start);
   return result;
}

BasisEvaluation evaluate_basis(const ConstructionResult& result, const Eigen::MatrixXd& points) {
   if (points.cols() != result.points.cols()) {
      throw std::invalid_argument("evaluate_basis: expected " + std::to_string(result.points.cols()) +
                                  " variables, got " + std::to_string(points.cols()));
   }
   require_finite(points, "evaluate_basis");
   BasisEvaluation out;
   const Eigen::Index s = points.rows();
   std::vector<Eigen::MatrixXd> per_layer;
   per_layer.reserve(result.layers.size());
   per_layer.emplace_back(Eigen::MatrixXd::Constant(s, 1, result.constant));
   out.f = per_layer.front();
   out.f_degree.push_back(0);
   out.g.resize(s, 0);
   for (Index t = 1; t < result.layers.size(); ++t) {
      const DegreeLayer& layer = result.layers[t];
      const Eigen::MatrixXd pre =
         t == 1 ? points : product_columns(per_layer[1], per_layer[t - 1], layer.products);
      const Eigen::MatrixXd c = subtract_product(pre, out.f, layer.projection);
      Eigen::MatrixXd ft = c * layer.f_combination;
      const Eigen::MatrixXd gt = c * layer.g_combination;
      append_columns(out.f, ft);
      append_columns(out.g, gt);
      out.f_degree.insert(out.f_degree.end(), static_cast<Index>(ft.cols()), static_cast<int>(t));
      out.g_degree.insert(out.g_degree.end(), static_cast<Index>(gt.cols()), static_cast<int>(t));
      per_layer.push_back(std::move(ft));
   }
   return out;
}

void restore_from_recipe(ConstructionResult& result) {
   if (result.layers.empty()) {
      throw std::invalid_argument("restore_from_recipe: no layers");
   }
   require_finite(result.points, "restore_from_recipe");
   const Eigen::Index s = result.points.rows();
   const MonomialBasis basis(result.variables());
   result.truncation = TruncationState(1.0);
   for (Index t = 0; t < result.layers.size(); ++t) {
      result.truncation.push(DegreeSelection{}, basis.block_size(static_cast<int>(t)));
   }
   const auto coeffs = replay_coefficients(result);

   DegreeLayer& zero = result.layers[0];
   zero.f_eval = Eigen::MatrixXd::Constant(s, 1, result.constant);
   zero.g_eval.resize(s, 0);
   zero.f_coeffs = coeffs[0].f;
   zero.g_coeffs = coeffs[0].g;
   result.f_eval = zero.f_eval;
   result.f_coeffs = zero.f_coeffs;
   for (Index t = 1; t < result.layers.size(); ++t) {
      DegreeLayer& layer = result.layers[t];
      const Eigen::MatrixXd pre = t == 1 ? result.points
                                         : product_columns(result.layers[1].f_eval,
                                                           result.layers[t - 1].f_eval, layer.products);
      layer.candidate_pre_norms = pre.colwise().norm().transpose();
      layer.candidate_eval = subtract_product(pre, result.f_eval, layer.projection);
      layer.f_eval = layer.candidate_eval * layer.f_combination;
      layer.g_eval = layer.candidate_eval * layer.g_combination;
      layer.candidate_coeffs = coeffs[t].candidates;
      layer.f_coeffs = coeffs[t].f;
      layer.g_coeffs = coeffs[t].g;
      result.f_coeffs.extend(basis.block_size(static_cast<int>(t)));
      result.f_coeffs.append(layer.f_coeffs);
      append_columns(result.f_eval, layer.f_eval);
   }
}

std::vector<LayerCoefficients> exact_coefficients(const ConstructionResult& result) {
   std::vector<LayerCoefficients> out;
   out.reserve(result.layers.size());
   if (!result.truncation.truncated()) {
      for (const auto& l : result.layers) {
         out.push_back({l.candidate_coeffs, l.f_coeffs, l.g_coeffs});
      }
      return out;
   }
   return replay_coefficients(result);
}

std::vector<LayerCoefficients> replay_coefficients(const ConstructionResult& result) {
   std::vector<LayerCoefficients> out;
   out.reserve(result.layers.size());
   const int n = result.variables();
   const MonomialBasis basis(n);
   const CoefficientMatrix constant({Eigen::MatrixXd::Constant(1, 1, result.constant)});
   out.push_back({CoefficientMatrix(), constant, CoefficientMatrix({Eigen::MatrixXd::Zero(1, 0)})});
   CoefficientMatrix all = constant;
   for (Index t = 1; t < result.layers.size(); ++t) {
      const DegreeLayer& layer = result.layers[t];
      CoefficientMatrix pre;
      if (t == 1) {
         pre = CoefficientMatrix({Eigen::MatrixXd::Zero(1, n), Eigen::MatrixXd::Identity(n, n)});
      } else {
         const CoefficientMatrix& first = out[1].f;
         const CoefficientMatrix& prev = out[t - 1].f;
         for (Eigen::Index i = 0; i < first.cols(); ++i) {
            pre.append(multiply_by_linear(basis, first.column(i), prev));
         }
      }
      LayerCoefficients lc;
      lc.candidates = subtract_combination(pre, all, layer.projection);
      lc.f = combine(lc.candidates, layer.f_combination);
      lc.g = combine(lc.candidates, layer.g_combination);
      all.extend(basis.block_size(static_cast<int>(t)));
      all.append(lc.f);
      out.push_back(std::move(lc));
   }
   return out;
}

std::vector<RescaleEntry> rescale_report(const ConstructionResult& result) {
   const auto exact = exact_coefficients(result);
   std::vector<RescaleEntry> out;
   const bool coefficient = result.strategy.kind == StrategyKind::coefficient;
   for (Index t = 0; t < result.layers.size(); ++t) {
      const DegreeLayer& layer = result.layers[t];
      const Eigen::VectorXd cand_norms =
         t == 0 ? Eigen::VectorXd() : exact[t].candidates.column_norms();
      const auto emit = [&](bool vanishing, const Eigen::MatrixXd& eval, const CoefficientMatrix& coeffs,
                            const Eigen::MatrixXd& combination) {
         const Eigen::VectorXd norms = coeffs.column_norms();
         for (Eigen::Index j = 0; j < eval.cols(); ++j) {
            RescaleEntry e;
            e.degree = static_cast<int>(t);
            e.vanishing = vanishing;
            e.index = static_cast<Index>(j);
            e.extent = eval.col(j).norm();
            e.coeff_norm = norms[j];
            // Without cancellation the norm could be as large as sum |v_i| ||n(c_i)||.
            double bound = std::abs(result.constant);
            if (t > 0) {
               bound = combination.col(j).cwiseAbs().dot(cand_norms);
            }
            if (coefficient && e.coeff_norm == 0.0) {
               throw std::domain_error("rescale_report: retained polynomial has zero coefficients");
            }
            e.zero_polynomial = !(e.coeff_norm > kZeroCancellation * bound);
            if (e.zero_polynomial) {
               e.rescaled_extent = std::numeric_limits<double>::quiet_NaN();
            } else {
               e.rescaled_extent = e.extent / e.coeff_norm;
               e.spurious = vanishing ? e.rescaled_extent > result.epsilon
                                      : e.rescaled_extent <= result.epsilon;
            }
            out.push_back(e);
         }
      };
      emit(false, layer.f_eval, exact[t].f, layer.f_combination);
      emit(true, layer.g_eval, exact[t].g, layer.g_combination);
   }
   return out;
}

double orthogonality_defect(const ConstructionResult& result) {
   double worst = 0.0;
   Eigen::Index cols = 0;
   for (Index t = 0; t < result.layers.size(); ++t) {
      const DegreeLayer& layer = result.layers[t];
      if (t > 0 && layer.candidate_eval.cols() > 0) {
         Eigen::MatrixXd f = result.f_eval.leftCols(cols);
         for (Eigen::Index j = 0; j < f.cols(); ++j) {
            const double nrm = f.col(j).norm();
            if (nrm > 0.0) {
               f.col(j) /= nrm;
            }
         }
         const double scale = layer.candidate_pre_norms.maxCoeff();
         if (scale > 0.0 && f.cols() > 0) {
            worst = std::max(worst, (f.transpose() * layer.candidate_eval).cwiseAbs().maxCoeff() / scale);
         }
      }
      cols += layer.f_eval.cols();
   }
   return worst;
}

} // namespace vanish
