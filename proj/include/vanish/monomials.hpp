#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <tuple>
#include <vector>

namespace vanish {

using Index = std::size_t;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor>;

/// Exponents of an n-variate monomial, one entry per variable.
class ExponentVector {
public:
   ExponentVector() = default;
   explicit ExponentVector(std::vector<int> exponents);

   int variables() const { return static_cast<int>(exponents_.size()); }
   int degree() const { return degree_; }
   int operator[](int k) const { return exponents_[static_cast<Index>(k)]; }
   const std::vector<int>& exponents() const { return exponents_; }

   /// The exponent vector of this monomial times x_k (k is 1-based, 0 is the constant).
   ExponentVector times_variable(int k) const;

   friend bool operator==(const ExponentVector&, const ExponentVector&) = default;
   friend auto operator<=>(const ExponentVector& a, const ExponentVector& b) {
      return a.exponents_ <=> b.exponents_;
   }

private:
   std::vector<int> exponents_;
   int degree_ = 0;
};

/// M_n^t (cumulative = false) or M_n^{<=t} (cumulative = true). Throws std::overflow_error
/// instead of wrapping.
Index monomial_count(int n, int t, bool cumulative);

/// Degree-t block in canonical order: lexicographically descending on (e_1, ..., e_n).
std::vector<ExponentVector> enumerate_exponents(int n, int t);

/// Position of the monomial within its degree block (cumulative = false) or within the
/// whole degree-lexicographic order (cumulative = true).
Index monomial_index(const ExponentVector& e, bool cumulative);

/// Inverse of monomial_index(e, true).
ExponentVector index_to_exponents(Index index, int n);

/// Rows are points; columns are all monomials of degree <= t in canonical order.
Eigen::MatrixXd veronese_evaluate(const Eigen::Ref<const Eigen::MatrixXd>& points, int t);

enum class ShiftForm { block, cumulative };

/// 0/1 matrix mapping coefficients of q to coefficients of x_k * q.
struct ShiftMatrix {
   int variable = 0;
   int source_degree = 0;
   ShiftForm form = ShiftForm::block;
   SparseMatrix matrix;
};

ShiftMatrix shift_matrix(int n, int k, int t, ShiftForm form);

/// Cached, data-independent monomial bookkeeping for a fixed variable count.
/// Safe to share between threads.
class MonomialBasis {
public:
   explicit MonomialBasis(int n);

   int variables() const { return n_; }
   Index block_size(int t) const { return monomial_count(n_, t, false); }
   Index cumulative_size(int t) const { return monomial_count(n_, t, true); }
   /// Offset of the degree-t block inside the cumulative order.
   Index block_offset(int t) const { return t == 0 ? 0 : cumulative_size(t - 1); }

   /// Degree-block shift R_{x_k}^t, k >= 1.
   std::shared_ptr<const SparseMatrix> block_shift(int k, int t) const;

private:
   int n_;
   mutable std::mutex mutex_;
   mutable std::map<std::pair<int, int>, std::shared_ptr<const SparseMatrix>> cache_;
};

/// sum_k b_k R_{x_k}^{<=t} for a polynomial p of degree <= 1 given by its cumulative
/// coefficient vector. With restrict_columns, only the listed source columns (cumulative
/// indices of monomials of degree <= t) are materialized, in the given order.
SparseMatrix build_linear_shift(const MonomialBasis& basis,
                                const Eigen::Ref<const Eigen::VectorXd>& p_coeffs, int t,
                                std::optional<std::span<const Index>> restrict_columns = {});

/// sum_{k>=1} b_k R_{x_k}^t restricted to source columns `columns` (indices into the degree-t
/// block). Rows are the full degree-(t+1) block.
SparseMatrix linear_shift_block(const MonomialBasis& basis, std::span<const double> b, int t,
                                std::span<const Index> columns);

/// As above, but target rows are remapped through `row_positions` (one entry per monomial of
/// the degree-(t+1) block; negative drops the row) into a matrix with `rows` rows.
SparseMatrix linear_shift_block(const MonomialBasis& basis, std::span<const double> b, int t,
                                std::span<const Index> columns,
                                std::span<const std::ptrdiff_t> row_positions, Index rows);

} // namespace vanish
