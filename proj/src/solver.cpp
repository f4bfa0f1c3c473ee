#include "movcut/solver.hpp"

#include <umfpack.h>

#include <cmath>

namespace movcut {

FactoredSystem::FactoredSystem(const SparseMatrix& a) : n_(static_cast<int>(a.rows())) {
  if (a.rows() != a.cols()) throw Error("FactoredSystem: matrix is not square");
  if (n_ == 0) throw Error("FactoredSystem: empty matrix");
  SparseMatrix c = a;
  c.makeCompressed();
  col_ptr_.assign(c.outerIndexPtr(), c.outerIndexPtr() + n_ + 1);
  row_idx_.assign(c.innerIndexPtr(), c.innerIndexPtr() + c.nonZeros());
  values_.assign(c.valuePtr(), c.valuePtr() + c.nonZeros());
  for (int j = 0; j < n_; ++j) {
    double s = 0.0;
    for (int p = col_ptr_[j]; p < col_ptr_[j + 1]; ++p) s += std::abs(values_[p]);
    norm1_ = std::max(norm1_, s);
  }

  double control[UMFPACK_CONTROL];
  double info[UMFPACK_INFO];
  umfpack_di_defaults(control);
  void* symbolic = nullptr;
  int status = umfpack_di_symbolic(n_, n_, col_ptr_.data(), row_idx_.data(), values_.data(), &symbolic, control, info);
  if (status != UMFPACK_OK) throw Error("FactoredSystem: symbolic factorisation failed (" + std::to_string(status) + ")");
  status = umfpack_di_numeric(col_ptr_.data(), row_idx_.data(), values_.data(), symbolic, &numeric_, control, info);
  umfpack_di_free_symbolic(&symbolic);
  if (status == UMFPACK_WARNING_singular_matrix) {
    umfpack_di_free_numeric(&numeric_);
    throw Error("saddle system singular (zero pivot)");
  }
  if (status != UMFPACK_OK) throw Error("FactoredSystem: numeric factorisation failed (" + std::to_string(status) + ")");
  pivot_ratio_ = info[UMFPACK_RCOND];
  // UMFPACK_RCOND is min/max |U_ii| of the (row-scaled) factor.
  if (!(pivot_ratio_ >= 1e-14)) {
    umfpack_di_free_numeric(&numeric_);
    throw Error("saddle system singular (pivot ratio " + std::to_string(pivot_ratio_) + ")");
  }
}

FactoredSystem::~FactoredSystem() {
  if (numeric_) umfpack_di_free_numeric(&numeric_);
}

FactoredSystem::FactoredSystem(FactoredSystem&& o) noexcept
    : n_(o.n_), norm1_(o.norm1_), pivot_ratio_(o.pivot_ratio_), col_ptr_(std::move(o.col_ptr_)),
      row_idx_(std::move(o.row_idx_)), values_(std::move(o.values_)), numeric_(o.numeric_) {
  o.numeric_ = nullptr;
}

FactoredSystem& FactoredSystem::operator=(FactoredSystem&& o) noexcept {
  if (this != &o) {
    if (numeric_) umfpack_di_free_numeric(&numeric_);
    n_ = o.n_;
    norm1_ = o.norm1_;
    pivot_ratio_ = o.pivot_ratio_;
    col_ptr_ = std::move(o.col_ptr_);
    row_idx_ = std::move(o.row_idx_);
    values_ = std::move(o.values_);
    numeric_ = o.numeric_;
    o.numeric_ = nullptr;
  }
  return *this;
}

namespace {

Eigen::VectorXd umf_solve(int sys, const std::vector<int>& ap, const std::vector<int>& ai, const std::vector<double>& ax,
                          void* numeric, const Eigen::VectorXd& rhs) {
  Eigen::VectorXd x(rhs.size());
  double control[UMFPACK_CONTROL];
  double info[UMFPACK_INFO];
  umfpack_di_defaults(control);
  control[UMFPACK_IRSTEP] = 2;
  const int status = umfpack_di_solve(sys, ap.data(), ai.data(), ax.data(), x.data(), rhs.data(), numeric, control, info);
  if (status != UMFPACK_OK && status != UMFPACK_WARNING_singular_matrix)
    throw Error("FactoredSystem: solve failed (" + std::to_string(status) + ")");
  return x;
}

}  // namespace

Eigen::VectorXd FactoredSystem::solve(const Eigen::VectorXd& rhs) const {
  if (rhs.size() != n_) throw Error("FactoredSystem::solve: size mismatch");
  return umf_solve(UMFPACK_A, col_ptr_, row_idx_, values_, numeric_, rhs);
}

Eigen::MatrixXd FactoredSystem::solve(const Eigen::MatrixXd& rhs) const {
  Eigen::MatrixXd x(rhs.rows(), rhs.cols());
  for (int c = 0; c < rhs.cols(); ++c) x.col(c) = solve(Eigen::VectorXd(rhs.col(c)));
  return x;
}

Eigen::VectorXd FactoredSystem::solve_transpose(const Eigen::VectorXd& rhs) const {
  if (rhs.size() != n_) throw Error("FactoredSystem::solve_transpose: size mismatch");
  return umf_solve(UMFPACK_At, col_ptr_, row_idx_, values_, numeric_, rhs);
}

double FactoredSystem::condition_estimate() const {
  // Hager / Higham estimate of ||A^{-1}||_1.
  Eigen::VectorXd x = Eigen::VectorXd::Constant(n_, 1.0 / n_);
  double est = 0.0;
  int last_j = -1;
  for (int iter = 0; iter < 5; ++iter) {
    const Eigen::VectorXd y = solve(x);
    const double norm_y = y.lpNorm<1>();
    if (iter > 0 && norm_y <= est) break;
    est = norm_y;
    Eigen::VectorXd s(n_);
    for (int i = 0; i < n_; ++i) s[i] = y[i] >= 0.0 ? 1.0 : -1.0;
    const Eigen::VectorXd z = solve_transpose(s);
    int j = 0;
    z.cwiseAbs().maxCoeff(&j);
    if (iter > 0 && (j == last_j || std::abs(z[j]) <= z.dot(x))) break;
    last_j = j;
    x.setZero();
    x[j] = 1.0;
  }
  // Higham's alternating-sign test vector guards against unlucky iterates.
  Eigen::VectorXd b(n_);
  for (int i = 0; i < n_; ++i) b[i] = (i % 2 == 0 ? 1.0 : -1.0) * (1.0 + static_cast<double>(i) / std::max(1, n_ - 1));
  const double alt = 2.0 * solve(b).lpNorm<1>() / (3.0 * n_);
  return norm1_ * std::max(est, alt);
}

void apply_dirichlet(SparseMatrix& a, const std::vector<char>& is_fixed) {
  if (static_cast<std::size_t>(a.rows()) != is_fixed.size()) throw Error("apply_dirichlet: size mismatch");
  a.prune([&](int i, int j, double) { return !is_fixed[i] && !is_fixed[j]; });
  for (std::size_t i = 0; i < is_fixed.size(); ++i)
    if (is_fixed[i]) a.coeffRef(static_cast<int>(i), static_cast<int>(i)) = 1.0;
  a.makeCompressed();
}

}  // namespace movcut
