#pragma once

#include "vanish/monomials.hpp"

#include <Eigen/Core>

#include <vector>

namespace vanish {

/// Monomial subset kept at one degree, plus its rescale factor.
struct DegreeSelection {
   bool full = true;
   std::vector<Index> kept;  ///< ascending indices into the degree block; empty when full
   double gamma = 1.0;

   Index rows(const MonomialBasis& basis, int t) const {
      return full ? basis.block_size(t) : kept.size();
   }
};

/// Selected index sets B_t and rescale factors gamma_t, one entry per processed degree.
class TruncationState {
public:
   explicit TruncationState(double theta = 1.0);

   double theta() const { return theta_; }
   int degrees() const { return static_cast<int>(selections_.size()); }
   bool has(int t) const { return t >= 0 && t < degrees(); }
   const DegreeSelection& selection(int t) const;

   /// Records the selection for degree degrees().
   void push(DegreeSelection selection, Index block_size);

   /// Rows of the degree-t coefficient block under this state.
   Index rows(const MonomialBasis& basis, int t) const;

   /// Position of each degree-t monomial among the kept rows, -1 when dropped.
   /// Empty when degree t is full or not yet selected.
   const std::vector<std::ptrdiff_t>& positions(int t) const;

   /// Product of gamma_tau over tau < t (all recorded degrees when t >= degrees()).
   double gamma_product_before(int t) const;
   double gamma_product() const { return gamma_product_before(degrees()); }

   bool truncated() const;

private:
   double theta_;
   std::vector<DegreeSelection> selections_;
   std::vector<std::vector<std::ptrdiff_t>> positions_;
};

/// One polynomial's coefficients as per-degree blocks.
struct CoefficientVector {
   std::vector<Eigen::VectorXd> blocks;

   double norm() const;
   /// Highest degree with a nonzero entry; -1 for the zero polynomial.
   int degree() const;
   Index length() const;

   /// Flat coefficient vector of length M_n^{<=top} in canonical order. Dropped monomials are 0.
   Eigen::VectorXd dense(const MonomialBasis& basis, const TruncationState* truncation = nullptr,
                         int top = -1) const;
   static CoefficientVector from_dense(const MonomialBasis& basis, const Eigen::VectorXd& flat);
};

/// Columns are polynomials; block t holds the degree-t rows of all of them.
class CoefficientMatrix {
public:
   CoefficientMatrix() = default;
   explicit CoefficientMatrix(std::vector<Eigen::MatrixXd> blocks);

   Eigen::Index cols() const { return cols_; }
   int top_degree() const { return static_cast<int>(blocks_.size()) - 1; }
   Index length() const;

   const Eigen::MatrixXd& block(int t) const { return blocks_.at(static_cast<Index>(t)); }
   Eigen::MatrixXd& block(int t) { return blocks_.at(static_cast<Index>(t)); }
   const std::vector<Eigen::MatrixXd>& blocks() const { return blocks_; }

   CoefficientVector column(Eigen::Index j) const;
   Eigen::VectorXd column_norms() const;

   /// Appends columns; missing top blocks on either side are zero-filled.
   void append(const CoefficientMatrix& other);
   /// Adds a zero block of the given height at degree top_degree() + 1.
   void extend(Index rows);

   static CoefficientMatrix from_columns(const std::vector<CoefficientVector>& columns);

   std::size_t bytes() const;

private:
   std::vector<Eigen::MatrixXd> blocks_;
   Eigen::Index cols_ = 0;
};

/// Columns of C * V.
CoefficientMatrix combine(const CoefficientMatrix& c, const Eigen::MatrixXd& v);

/// C - F * W, where F may have fewer blocks than C.
CoefficientMatrix subtract_combination(const CoefficientMatrix& c, const CoefficientMatrix& f,
                                       const Eigen::MatrixXd& w);

/// Coefficients of p * q_j for every column q_j of q, via shift matrices. Rows of each output
/// block follow `truncation` where it has a selection for that degree and are full otherwise.
/// p may carry its full degree-1 block or the block restricted to the degree-1 selection.
CoefficientMatrix multiply_by_linear(const MonomialBasis& basis, const CoefficientVector& p,
                                     const CoefficientMatrix& q,
                                     const TruncationState* truncation = nullptr);

CoefficientVector multiply_by_linear(const MonomialBasis& basis, const CoefficientVector& p,
                                     const CoefficientVector& q,
                                     const TruncationState* truncation = nullptr);

/// Term-by-term symbolic product of two untruncated polynomials. Test oracle.
CoefficientVector expand_oracle(int n, const CoefficientVector& p, const CoefficientVector& q);

Eigen::MatrixXd gram(const CoefficientMatrix& c);

/// Chooses B_t from the degree-t block of F_t (rows are monomials, columns polynomials).
DegreeSelection truncate_select(const Eigen::MatrixXd& degree_block, double theta);

/// gram(c) / gamma_product.
Eigen::MatrixXd truncated_normalization_matrix(const CoefficientMatrix& c, double gamma_product);

/// Rows of a full degree block kept by `selection`.
Eigen::MatrixXd restrict_rows(const Eigen::MatrixXd& block, const DegreeSelection& selection);

} // namespace vanish
