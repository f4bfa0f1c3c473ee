#pragma once

#include "movcut/forms.hpp"

#include <memory>

namespace movcut {

// Sparse LU factorisation (UMFPACK) of a square matrix. Throws
// Error("saddle system singular") when a pivot is numerically zero.
class FactoredSystem {
public:
  explicit FactoredSystem(const SparseMatrix& a);
  ~FactoredSystem();
  FactoredSystem(const FactoredSystem&) = delete;
  FactoredSystem& operator=(const FactoredSystem&) = delete;
  FactoredSystem(FactoredSystem&&) noexcept;
  FactoredSystem& operator=(FactoredSystem&&) noexcept;

  int size() const { return n_; }
  // Reciprocal pivot ratio min|U_ii| / max|U_ii| reported by the factorisation.
  double pivot_ratio() const { return pivot_ratio_; }

  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;
  Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs) const;  // column by column
  Eigen::VectorXd solve_transpose(const Eigen::VectorXd& rhs) const;

  // 1-norm condition number estimate ||A||_1 * est(||A^{-1}||_1), with the
  // inverse norm from Hager's iteration (Higham's refinement).
  double condition_estimate() const;

private:
  int n_ = 0;
  double norm1_ = 0.0;
  double pivot_ratio_ = 0.0;
  std::vector<int> col_ptr_;
  std::vector<int> row_idx_;
  std::vector<double> values_;
  void* numeric_ = nullptr;
};

// Replaces rows and columns of the flagged DOFs (offset into `a`) by unit
// diagonal entries.
void apply_dirichlet(SparseMatrix& a, const std::vector<char>& is_fixed);

}  // namespace movcut
