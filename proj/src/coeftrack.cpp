#include "vanish/coeftrack.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>

namespace vanish {

TruncationState::TruncationState(double theta) : theta_(theta) {
   if (!(theta >= 0.0 && theta <= 1.0)) {
      throw std::invalid_argument("TruncationState: theta must lie in [0, 1]");
   }
}

const DegreeSelection& TruncationState::selection(int t) const {
   if (!has(t)) {
      throw std::out_of_range("TruncationState: no selection for degree " + std::to_string(t));
   }
   return selections_[static_cast<Index>(t)];
}

void TruncationState::push(DegreeSelection selection, Index block_size) {
   if (!(selection.gamma > 0.0 && selection.gamma <= 1.0)) {
      throw std::invalid_argument("TruncationState: gamma must lie in (0, 1]");
   }
   std::vector<std::ptrdiff_t> pos;
   if (!selection.full) {
      pos.assign(block_size, -1);
      for (Index i = 0; i < selection.kept.size(); ++i) {
         if (selection.kept[i] >= block_size || (i > 0 && selection.kept[i] <= selection.kept[i - 1])) {
            throw std::invalid_argument("TruncationState: kept indices must be ascending and in range");
         }
         pos[selection.kept[i]] = static_cast<std::ptrdiff_t>(i);
      }
   }
   selections_.push_back(std::move(selection));
   positions_.push_back(std::move(pos));
}

Index TruncationState::rows(const MonomialBasis& basis, int t) const {
   return has(t) ? selections_[static_cast<Index>(t)].rows(basis, t) : basis.block_size(t);
}

const std::vector<std::ptrdiff_t>& TruncationState::positions(int t) const {
   static const std::vector<std::ptrdiff_t> none;
   return has(t) ? positions_[static_cast<Index>(t)] : none;
}

double TruncationState::gamma_product_before(int t) const {
   double g = 1.0;
   for (int tau = 0; tau < std::min(t, degrees()); ++tau) {
      g *= selections_[static_cast<Index>(tau)].gamma;
   }
   return g;
}

bool TruncationState::truncated() const {
   return std::any_of(selections_.begin(), selections_.end(),
                      [](const DegreeSelection& s) { return !s.full; });
}

double CoefficientVector::norm() const {
   double s = 0.0;
   for (const auto& b : blocks) {
      s += b.squaredNorm();
   }
   return std::sqrt(s);
}

int CoefficientVector::degree() const {
   for (int t = static_cast<int>(blocks.size()) - 1; t >= 0; --t) {
      if ((blocks[static_cast<Index>(t)].array() != 0.0).any()) {
         return t;
      }
   }
   return -1;
}

Index CoefficientVector::length() const {
   Index n = 0;
   for (const auto& b : blocks) {
      n += static_cast<Index>(b.size());
   }
   return n;
}

Eigen::VectorXd CoefficientVector::dense(const MonomialBasis& basis,
                                         const TruncationState* truncation, int top) const {
   if (top < 0) {
      top = static_cast<int>(blocks.size()) - 1;
   }
   Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis.cumulative_size(std::max(top, 0))));
   for (int t = 0; t <= top && t < static_cast<int>(blocks.size()); ++t) {
      const auto& b = blocks[static_cast<Index>(t)];
      const auto offset = static_cast<Eigen::Index>(basis.block_offset(t));
      if (truncation != nullptr && truncation->has(t) && !truncation->selection(t).full) {
         const auto& kept = truncation->selection(t).kept;
         if (static_cast<Index>(b.size()) != kept.size()) {
            throw std::invalid_argument("CoefficientVector::dense: block does not match selection");
         }
         for (Index i = 0; i < kept.size(); ++i) {
            out[offset + static_cast<Eigen::Index>(kept[i])] = b[static_cast<Eigen::Index>(i)];
         }
      } else {
         if (static_cast<Index>(b.size()) != basis.block_size(t)) {
            throw std::invalid_argument("CoefficientVector::dense: block has the wrong length");
         }
         out.segment(offset, b.size()) = b;
      }
   }
   return out;
}

CoefficientVector CoefficientVector::from_dense(const MonomialBasis& basis,
                                                const Eigen::VectorXd& flat) {
   CoefficientVector v;
   Index used = 0;
   for (int t = 0; used < static_cast<Index>(flat.size()); ++t) {
      const Index size = basis.block_size(t);
      if (used + size > static_cast<Index>(flat.size())) {
         throw std::invalid_argument("CoefficientVector::from_dense: length is not M_n^{<=t}");
      }
      v.blocks.push_back(flat.segment(static_cast<Eigen::Index>(used), static_cast<Eigen::Index>(size)));
      used += size;
   }
   return v;
}

CoefficientMatrix::CoefficientMatrix(std::vector<Eigen::MatrixXd> blocks) : blocks_(std::move(blocks)) {
   if (!blocks_.empty()) {
      cols_ = blocks_.front().cols();
      for (const auto& b : blocks_) {
         if (b.cols() != cols_) {
            throw std::invalid_argument("CoefficientMatrix: blocks disagree on column count");
         }
      }
   }
}

Index CoefficientMatrix::length() const {
   Index n = 0;
   for (const auto& b : blocks_) {
      n += static_cast<Index>(b.rows());
   }
   return n;
}

CoefficientVector CoefficientMatrix::column(Eigen::Index j) const {
   CoefficientVector v;
   v.blocks.reserve(blocks_.size());
   for (const auto& b : blocks_) {
      v.blocks.emplace_back(b.col(j));
   }
   return v;
}

Eigen::VectorXd CoefficientMatrix::column_norms() const {
   Eigen::VectorXd sq = Eigen::VectorXd::Zero(cols_);
   for (const auto& b : blocks_) {
      sq += b.colwise().squaredNorm().transpose();
   }
   return sq.cwiseSqrt();
}

void CoefficientMatrix::append(const CoefficientMatrix& other) {
   if (blocks_.empty()) {
      *this = other;
      return;
   }
   const Index top = std::max(blocks_.size(), other.blocks_.size());
   for (Index t = 0; t < top; ++t) {
      const bool mine = t < blocks_.size();
      const bool theirs = t < other.blocks_.size();
      if (mine && theirs && blocks_[t].rows() != other.blocks_[t].rows()) {
         throw std::invalid_argument("CoefficientMatrix::append: block heights differ at degree " +
                                     std::to_string(t));
      }
      const Eigen::Index rows = mine ? blocks_[t].rows() : other.blocks_[t].rows();
      Eigen::MatrixXd merged = Eigen::MatrixXd::Zero(rows, cols_ + other.cols_);
      if (mine) {
         merged.leftCols(cols_) = blocks_[t];
      }
      if (theirs) {
         merged.rightCols(other.cols_) = other.blocks_[t];
      }
      if (mine) {
         blocks_[t] = std::move(merged);
      } else {
         blocks_.push_back(std::move(merged));
      }
   }
   cols_ += other.cols_;
}

void CoefficientMatrix::extend(Index rows) {
   blocks_.push_back(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows), cols_));
}

CoefficientMatrix CoefficientMatrix::from_columns(const std::vector<CoefficientVector>& columns) {
   Index top = 0;
   for (const auto& c : columns) {
      top = std::max(top, c.blocks.size());
   }
   std::vector<Eigen::MatrixXd> blocks(top);
   for (Index t = 0; t < top; ++t) {
      Eigen::Index rows = -1;
      for (const auto& c : columns) {
         if (t < c.blocks.size()) {
            if (rows >= 0 && c.blocks[t].size() != rows) {
               throw std::invalid_argument("CoefficientMatrix::from_columns: ragged block heights");
            }
            rows = c.blocks[t].size();
         }
      }
      blocks[t] = Eigen::MatrixXd::Zero(rows, static_cast<Eigen::Index>(columns.size()));
      for (Index j = 0; j < columns.size(); ++j) {
         if (t < columns[j].blocks.size()) {
            blocks[t].col(static_cast<Eigen::Index>(j)) = columns[j].blocks[t];
         }
      }
   }
   CoefficientMatrix m(std::move(blocks));
   m.cols_ = static_cast<Eigen::Index>(columns.size());
   return m;
}

std::size_t CoefficientMatrix::bytes() const {
   std::size_t n = 0;
   for (const auto& b : blocks_) {
      n += static_cast<std::size_t>(b.size()) * sizeof(double);
   }
   return n;
}

CoefficientMatrix combine(const CoefficientMatrix& c, const Eigen::MatrixXd& v) {
   if (c.cols() != v.rows()) {
      throw std::invalid_argument("combine: coefficient matrix has " + std::to_string(c.cols()) +
                                  " columns but V has " + std::to_string(v.rows()) + " rows");
   }
   std::vector<Eigen::MatrixXd> blocks;
   blocks.reserve(c.blocks().size());
   for (const auto& b : c.blocks()) {
      blocks.emplace_back(b * v);
   }
   return CoefficientMatrix(std::move(blocks));
}

CoefficientMatrix subtract_combination(const CoefficientMatrix& c, const CoefficientMatrix& f,
                                       const Eigen::MatrixXd& w) {
   if (f.cols() != w.rows() || c.cols() != w.cols()) {
      throw std::invalid_argument("subtract_combination: dimension mismatch");
   }
   if (f.top_degree() > c.top_degree()) {
      throw std::invalid_argument("subtract_combination: F has higher degree than C");
   }
   std::vector<Eigen::MatrixXd> blocks(c.blocks().begin(), c.blocks().end());
   for (int t = 0; t <= f.top_degree(); ++t) {
      if (f.block(t).rows() != blocks[static_cast<Index>(t)].rows()) {
         throw std::invalid_argument("subtract_combination: block heights differ at degree " +
                                     std::to_string(t));
      }
      blocks[static_cast<Index>(t)].noalias() -= f.block(t) * w;
   }
   return CoefficientMatrix(std::move(blocks));
}

namespace {

struct LinearTerms {
   double constant = 0.0;
   std::vector<double> variables;
};

LinearTerms linear_terms(const MonomialBasis& basis, const CoefficientVector& p,
                         const TruncationState* truncation) {
   const int n = basis.variables();
   LinearTerms out;
   out.variables.assign(static_cast<Index>(n), 0.0);
   for (Index t = 2; t < p.blocks.size(); ++t) {
      if ((p.blocks[t].array() != 0.0).any()) {
         throw std::invalid_argument("multiply_by_linear: p has terms of degree >= 2");
      }
   }
   if (!p.blocks.empty() && p.blocks[0].size() > 0) {
      out.constant = p.blocks[0][0];
   }
   if (p.blocks.size() > 1) {
      const auto& b1 = p.blocks[1];
      const bool selected = truncation != nullptr && truncation->has(1) &&
                            !truncation->selection(1).full && b1.size() != n;
      if (selected) {
         const auto& kept = truncation->selection(1).kept;
         if (static_cast<Index>(b1.size()) != kept.size()) {
            throw std::invalid_argument("multiply_by_linear: p does not match the degree-1 selection");
         }
         for (Index i = 0; i < kept.size(); ++i) {
            out.variables[kept[i]] = b1[static_cast<Eigen::Index>(i)];
         }
      } else {
         if (b1.size() != n) {
            throw std::invalid_argument("multiply_by_linear: degree-1 block of p has wrong length");
         }
         for (int k = 0; k < n; ++k) {
            out.variables[static_cast<Index>(k)] = b1[k];
         }
      }
   }
   return out;
}

std::vector<Index> source_columns(const MonomialBasis& basis, const TruncationState* truncation,
                                  int t, Eigen::Index rows) {
   std::vector<Index> cols;
   if (truncation != nullptr && truncation->has(t) && !truncation->selection(t).full) {
      cols = truncation->selection(t).kept;
   } else {
      cols.resize(basis.block_size(t));
      std::iota(cols.begin(), cols.end(), Index{0});
   }
   if (static_cast<Index>(rows) != cols.size()) {
      throw std::invalid_argument("multiply_by_linear: block " + std::to_string(t) +
                                  " of q does not match the truncation convention");
   }
   return cols;
}

} // namespace

CoefficientMatrix multiply_by_linear(const MonomialBasis& basis, const CoefficientVector& p,
                                     const CoefficientMatrix& q,
                                     const TruncationState* truncation) {
   const LinearTerms terms = linear_terms(basis, p, truncation);
   const int top = q.top_degree();
   std::vector<Eigen::MatrixXd> blocks;
   blocks.reserve(static_cast<Index>(top + 2));
   for (int t = 0; t <= top + 1; ++t) {
      const Index rows = truncation != nullptr ? truncation->rows(basis, t) : basis.block_size(t);
      Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows), q.cols());
      if (t <= top && terms.constant != 0.0) {
         if (q.block(t).rows() != out.rows()) {
            throw std::invalid_argument("multiply_by_linear: block " + std::to_string(t) +
                                        " of q does not match the truncation convention");
         }
         out = terms.constant * q.block(t);
      }
      if (t >= 1) {
         const auto& src = q.block(t - 1);
         const auto cols = source_columns(basis, truncation, t - 1, src.rows());
         const std::vector<std::ptrdiff_t> none;
         const auto& pos = truncation != nullptr ? truncation->positions(t) : none;
         const SparseMatrix shift =
            linear_shift_block(basis, terms.variables, t - 1, cols, pos, rows);
         out += shift * src;
      }
      blocks.push_back(std::move(out));
   }
   return CoefficientMatrix(std::move(blocks));
}

CoefficientVector multiply_by_linear(const MonomialBasis& basis, const CoefficientVector& p,
                                     const CoefficientVector& q,
                                     const TruncationState* truncation) {
   return multiply_by_linear(basis, p, CoefficientMatrix::from_columns({q}), truncation).column(0);
}

CoefficientVector expand_oracle(int n, const CoefficientVector& p, const CoefficientVector& q) {
   const auto terms = [n](const CoefficientVector& v) {
      std::map<std::vector<int>, double> out;
      for (Index t = 0; t < v.blocks.size(); ++t) {
         const auto exps = enumerate_exponents(n, static_cast<int>(t));
         if (exps.size() != static_cast<Index>(v.blocks[t].size())) {
            throw std::invalid_argument("expand_oracle: inputs must be untruncated");
         }
         for (Index i = 0; i < exps.size(); ++i) {
            const double c = v.blocks[t][static_cast<Eigen::Index>(i)];
            if (c != 0.0) {
               out[exps[i].exponents()] += c;
            }
         }
      }
      return out;
   };
   std::map<std::vector<int>, double> product;
   for (const auto& [ea, ca] : terms(p)) {
      for (const auto& [eb, cb] : terms(q)) {
         std::vector<int> e(ea);
         for (Index k = 0; k < e.size(); ++k) {
            e[k] += eb[k];
         }
         product[e] += ca * cb;
      }
   }
   const int top = std::max(static_cast<int>(p.blocks.size() + q.blocks.size()) - 2, 0);
   CoefficientVector out;
   for (int t = 0; t <= top; ++t) {
      const auto exps = enumerate_exponents(n, t);
      Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(exps.size()));
      for (Index i = 0; i < exps.size(); ++i) {
         const auto it = product.find(exps[i].exponents());
         if (it != product.end()) {
            b[static_cast<Eigen::Index>(i)] = it->second;
         }
      }
      out.blocks.push_back(std::move(b));
   }
   return out;
}

Eigen::MatrixXd gram(const CoefficientMatrix& c) {
   Eigen::MatrixXd g = Eigen::MatrixXd::Zero(c.cols(), c.cols());
   for (const auto& b : c.blocks()) {
      g.noalias() += b.transpose() * b;
   }
   return 0.5 * (g + g.transpose());
}

DegreeSelection truncate_select(const Eigen::MatrixXd& degree_block, double theta) {
   if (!(theta >= 0.0 && theta <= 1.0)) {
      throw std::invalid_argument("truncate_select: theta must lie in [0, 1]");
   }
   if (degree_block.cols() < 1) {
      throw std::invalid_argument("truncate_select: need at least one polynomial");
   }
   const Eigen::Index m = degree_block.rows();
   const Eigen::VectorXd delta2 = degree_block.rowwise().squaredNorm();
   const double total = delta2.sum();
   if (!(total > 0.0)) {
      throw std::domain_error("truncate_select: degree block is entirely zero");
   }
   DegreeSelection sel;
   if (theta >= 1.0) {
      return sel;
   }
   std::vector<Index> order(static_cast<Index>(m));
   std::iota(order.begin(), order.end(), Index{0});
   std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
      return delta2[static_cast<Eigen::Index>(a)] > delta2[static_cast<Eigen::Index>(b)];
   });
   const double budget = theta * theta * total;
   const Index floor = std::min(static_cast<Index>(degree_block.cols()), static_cast<Index>(m));
   double kept_sq = 0.0;
   Index count = 0;
   while (count < order.size()) {
      const double next = delta2[static_cast<Eigen::Index>(order[count])];
      if (count >= floor && kept_sq + next > budget) {
         break;
      }
      kept_sq += next;
      ++count;
   }
   if (count == static_cast<Index>(m)) {
      return sel;
   }
   sel.full = false;
   sel.kept.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(count));
   std::sort(sel.kept.begin(), sel.kept.end());
   sel.gamma = std::sqrt(kept_sq / total);
   if (!(sel.gamma > 0.0)) {
      throw std::domain_error("truncate_select: kept rows carry no weight");
   }
   return sel;
}

Eigen::MatrixXd truncated_normalization_matrix(const CoefficientMatrix& c, double gamma_product) {
   if (!(gamma_product > 0.0 && gamma_product <= 1.0)) {
      throw std::invalid_argument("truncated_normalization_matrix: gamma product must lie in (0, 1]");
   }
   return gram(c) / gamma_product;
}

Eigen::MatrixXd restrict_rows(const Eigen::MatrixXd& block, const DegreeSelection& selection) {
   if (selection.full) {
      return block;
   }
   Eigen::MatrixXd out(static_cast<Eigen::Index>(selection.kept.size()), block.cols());
   for (Index i = 0; i < selection.kept.size(); ++i) {
      out.row(static_cast<Eigen::Index>(i)) = block.row(static_cast<Eigen::Index>(selection.kept[i]));
   }
   return out;
}

} // namespace vanish
