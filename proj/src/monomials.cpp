#include "vanish/monomials.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace vanish {

ExponentVector::ExponentVector(std::vector<int> exponents) : exponents_(std::move(exponents)) {
   for (int e : exponents_) {
      if (e < 0) {
         throw std::invalid_argument("ExponentVector: negative exponent");
      }
      degree_ += e;
   }
}

ExponentVector ExponentVector::times_variable(int k) const {
   if (k < 0 || k > variables()) {
      throw std::out_of_range("ExponentVector::times_variable: variable out of range");
   }
   if (k == 0) {
      return *this;
   }
   auto e = exponents_;
   ++e[static_cast<Index>(k - 1)];
   return ExponentVector(std::move(e));
}

Index monomial_count(int n, int t, bool cumulative) {
   if (n < 1) {
      throw std::invalid_argument("monomial_count: n must be positive");
   }
   if (t < 0) {
      throw std::invalid_argument("monomial_count: t must be nonnegative");
   }
   // C(base + t, t) built incrementally; each partial product is itself a binomial, so the
   // division is exact.
   const Index base = cumulative ? static_cast<Index>(n) : static_cast<Index>(n - 1);
   Index c = 1;
   for (Index i = 1; i <= static_cast<Index>(t); ++i) {
      Index prod = 0;
      if (__builtin_mul_overflow(c, base + i, &prod)) {
         throw std::overflow_error("monomial_count: overflow for n=" + std::to_string(n) +
                                   ", t=" + std::to_string(t));
      }
      c = prod / i;
   }
   return c;
}

namespace {

void enumerate_into(int remaining_vars, int degree, std::vector<int>& prefix,
                    std::vector<ExponentVector>& out) {
   if (remaining_vars == 1) {
      prefix.push_back(degree);
      out.emplace_back(prefix);
      prefix.pop_back();
      return;
   }
   for (int v = degree; v >= 0; --v) {
      prefix.push_back(v);
      enumerate_into(remaining_vars - 1, degree - v, prefix, out);
      prefix.pop_back();
   }
}

Index rank_in_block(const ExponentVector& e) {
   const int n = e.variables();
   Index rank = 0;
   int rem = e.degree();
   for (int i = 0; i + 1 < n; ++i) {
      const int above = rem - e[i] - 1;
      if (above >= 0) {
         rank += monomial_count(n - i - 1, above, true);
      }
      rem -= e[i];
   }
   return rank;
}

ExponentVector unrank_in_block(Index rank, int n, int t) {
   std::vector<int> e(static_cast<Index>(n), 0);
   int rem = t;
   for (int i = 0; i + 1 < n; ++i) {
      for (int v = rem; v >= 0; --v) {
         const Index cnt = monomial_count(n - i - 1, rem - v, false);
         if (rank < cnt) {
            e[static_cast<Index>(i)] = v;
            break;
         }
         rank -= cnt;
      }
      rem -= e[static_cast<Index>(i)];
   }
   e[static_cast<Index>(n - 1)] = rem;
   return ExponentVector(std::move(e));
}

} // namespace

std::vector<ExponentVector> enumerate_exponents(int n, int t) {
   if (n < 1 || t < 0) {
      throw std::invalid_argument("enumerate_exponents: need n >= 1 and t >= 0");
   }
   std::vector<ExponentVector> out;
   out.reserve(monomial_count(n, t, false));
   std::vector<int> prefix;
   enumerate_into(n, t, prefix, out);
   return out;
}

Index monomial_index(const ExponentVector& e, bool cumulative) {
   if (e.variables() < 1) {
      throw std::invalid_argument("monomial_index: empty exponent vector");
   }
   const Index rank = rank_in_block(e);
   if (!cumulative || e.degree() == 0) {
      return rank;
   }
   return monomial_count(e.variables(), e.degree() - 1, true) + rank;
}

ExponentVector index_to_exponents(Index index, int n) {
   if (n < 1) {
      throw std::invalid_argument("index_to_exponents: n must be positive");
   }
   int t = 0;
   Index offset = 0;
   for (;;) {
      const Index size = monomial_count(n, t, false);
      if (index < offset + size) {
         return unrank_in_block(index - offset, n, t);
      }
      offset += size;
      ++t;
      if (t > 4096) {
         throw std::out_of_range("index_to_exponents: index out of range");
      }
   }
}

Eigen::MatrixXd veronese_evaluate(const Eigen::Ref<const Eigen::MatrixXd>& points, int t) {
   const int n = static_cast<int>(points.cols());
   const Index cols = monomial_count(n, t, true);
   Eigen::MatrixXd out(points.rows(), static_cast<Eigen::Index>(cols));
   Index c = 0;
   for (int d = 0; d <= t; ++d) {
      for (const auto& e : enumerate_exponents(n, d)) {
         for (Eigen::Index i = 0; i < points.rows(); ++i) {
            double v = 1.0;
            for (int k = 0; k < n; ++k) {
               for (int p = 0; p < e[k]; ++p) {
                  v *= points(i, k);
               }
            }
            out(i, static_cast<Eigen::Index>(c)) = v;
         }
         ++c;
      }
   }
   return out;
}

namespace {

SparseMatrix block_shift_uncached(int n, int k, int t) {
   const auto rows = static_cast<Eigen::Index>(monomial_count(n, t + 1, false));
   const auto source = enumerate_exponents(n, t);
   SparseMatrix m(rows, static_cast<Eigen::Index>(source.size()));
   m.reserve(Eigen::VectorXi::Constant(static_cast<Eigen::Index>(source.size()), 1));
   for (Index j = 0; j < source.size(); ++j) {
      const auto target = rank_in_block(source[j].times_variable(k));
      m.insert(static_cast<Eigen::Index>(target), static_cast<Eigen::Index>(j)) = 1.0;
   }
   m.makeCompressed();
   return m;
}

} // namespace

ShiftMatrix shift_matrix(int n, int k, int t, ShiftForm form) {
   if (k < 0 || k > n || t < 0) {
      throw std::invalid_argument("shift_matrix: need 0 <= k <= n and t >= 0");
   }
   ShiftMatrix s{k, t, form, {}};
   if (form == ShiftForm::block) {
      if (k == 0) {
         throw std::invalid_argument(
            "shift_matrix: the constant multiplier has no degree-block form; use cumulative");
      }
      s.matrix = block_shift_uncached(n, k, t);
      return s;
   }
   const auto rows = static_cast<Eigen::Index>(monomial_count(n, t + 1, true));
   const auto cols = static_cast<Eigen::Index>(monomial_count(n, t, true));
   s.matrix.resize(rows, cols);
   s.matrix.reserve(Eigen::VectorXi::Constant(cols, 1));
   Index j = 0;
   for (int d = 0; d <= t; ++d) {
      for (const auto& e : enumerate_exponents(n, d)) {
         const auto row = monomial_index(e.times_variable(k), true);
         s.matrix.insert(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(j)) = 1.0;
         ++j;
      }
   }
   s.matrix.makeCompressed();
   return s;
}

MonomialBasis::MonomialBasis(int n) : n_(n) {
   if (n < 1) {
      throw std::invalid_argument("MonomialBasis: n must be positive");
   }
}

std::shared_ptr<const SparseMatrix> MonomialBasis::block_shift(int k, int t) const {
   if (k < 1 || k > n_ || t < 0) {
      throw std::invalid_argument("MonomialBasis::block_shift: need 1 <= k <= n and t >= 0");
   }
   std::lock_guard lock(mutex_);
   auto& slot = cache_[{k, t}];
   if (!slot) {
      slot = std::make_shared<const SparseMatrix>(block_shift_uncached(n_, k, t));
   }
   return slot;
}

SparseMatrix build_linear_shift(const MonomialBasis& basis,
                                const Eigen::Ref<const Eigen::VectorXd>& p_coeffs, int t,
                                std::optional<std::span<const Index>> restrict_columns) {
   const int n = basis.variables();
   for (Eigen::Index i = n + 1; i < p_coeffs.size(); ++i) {
      if (p_coeffs[i] != 0.0) {
         throw std::invalid_argument("build_linear_shift: p has terms of degree >= 2");
      }
   }
   const Index full_cols = basis.cumulative_size(t);
   std::vector<Index> columns;
   if (restrict_columns) {
      columns.assign(restrict_columns->begin(), restrict_columns->end());
   } else {
      columns.resize(full_cols);
      for (Index j = 0; j < full_cols; ++j) {
         columns[j] = j;
      }
   }
   const auto coeff = [&](int k) {
      return k < p_coeffs.size() ? p_coeffs[k] : 0.0;
   };

   std::vector<Eigen::Triplet<double>> triplets;
   triplets.reserve(columns.size() * static_cast<Index>(n + 1));
   for (Index c = 0; c < columns.size(); ++c) {
      if (columns[c] >= full_cols) {
         throw std::out_of_range("build_linear_shift: column outside degree <= t");
      }
      const auto e = index_to_exponents(columns[c], n);
      const auto col = static_cast<Eigen::Index>(c);
      if (coeff(0) != 0.0) {
         triplets.emplace_back(static_cast<Eigen::Index>(columns[c]), col, coeff(0));
      }
      for (int k = 1; k <= n; ++k) {
         if (coeff(k) != 0.0) {
            const auto row = monomial_index(e.times_variable(k), true);
            triplets.emplace_back(static_cast<Eigen::Index>(row), col, coeff(k));
         }
      }
   }
   SparseMatrix m(static_cast<Eigen::Index>(basis.cumulative_size(t + 1)),
                  static_cast<Eigen::Index>(columns.size()));
   m.setFromTriplets(triplets.begin(), triplets.end());
   return m;
}

SparseMatrix linear_shift_block(const MonomialBasis& basis, std::span<const double> b, int t,
                                std::span<const Index> columns) {
   return linear_shift_block(basis, b, t, columns, {}, basis.block_size(t + 1));
}

SparseMatrix linear_shift_block(const MonomialBasis& basis, std::span<const double> b, int t,
                                std::span<const Index> columns,
                                std::span<const std::ptrdiff_t> row_positions, Index rows) {
   const int n = basis.variables();
   if (b.size() != static_cast<Index>(n)) {
      throw std::invalid_argument("linear_shift_block: expected one coefficient per variable");
   }
   if (!row_positions.empty() && row_positions.size() != basis.block_size(t + 1)) {
      throw std::invalid_argument("linear_shift_block: row map does not cover the target block");
   }
   const Index block = basis.block_size(t);
   std::vector<Eigen::Triplet<double>> triplets;
   triplets.reserve(columns.size() * static_cast<Index>(n));
   for (int k = 1; k <= n; ++k) {
      const double bk = b[static_cast<Index>(k - 1)];
      if (bk == 0.0) {
         continue;
      }
      const auto shift = basis.block_shift(k, t);
      const auto* inner = shift->innerIndexPtr();
      const auto* outer = shift->outerIndexPtr();
      for (Index c = 0; c < columns.size(); ++c) {
         if (columns[c] >= block) {
            throw std::out_of_range("linear_shift_block: column outside the degree block");
         }
         std::ptrdiff_t row = inner[outer[columns[c]]];
         if (!row_positions.empty()) {
            row = row_positions[static_cast<Index>(row)];
            if (row < 0) {
               continue;
            }
         }
         triplets.emplace_back(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(c), bk);
      }
   }
   SparseMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(columns.size()));
   m.setFromTriplets(triplets.begin(), triplets.end());
   return m;
}

} // namespace vanish
