#pragma once

#include <Eigen/Dense>
#include <complex>

namespace fdsec {

using ComplexMatrix = Eigen::MatrixXcd;
using ComplexRowVec = Eigen::RowVectorXcd;

// Hermitian matrix wrapper. Construction symmetrizes via (M + M^*)/2 and
// warns on stderr if the correction exceeded kHermitianWarnTol.
class HermitianMatrix {
 public:
  HermitianMatrix() = default;
  explicit HermitianMatrix(const ComplexMatrix& m);

  static HermitianMatrix Zero(int dim);
  static HermitianMatrix Identity(int dim);

  int dim() const { return static_cast<int>(mat_.rows()); }
  const ComplexMatrix& mat() const { return mat_; }
  double trace() const { return mat_.trace().real(); }

  // Set when a PSD check has passed; quadratic_form uses it to clamp
  // round-off negatives.
  bool psd_certified() const { return psd_certified_; }
  void mark_psd() { psd_certified_ = true; }

 private:
  ComplexMatrix mat_;
  bool psd_certified_ = false;
};

inline constexpr double kHermitianWarnTol = 1e-9;
inline constexpr double kPsdClampTol = 1e-10;

// v M v^*, real-valued by symmetry. Results in [-kPsdClampTol, 0) are clamped
// to 0 when M is PSD-certified.
double quadratic_form(const ComplexRowVec& v, const HermitianMatrix& m);

struct EigenDecomposition {
  Eigen::VectorXd values;  // ascending
  ComplexMatrix vectors;   // unit-norm columns, values(i) pairs with vectors.col(i)
};

EigenDecomposition hermitian_eigen(const HermitianMatrix& m);

double min_eigenvalue(const HermitianMatrix& m);

// Count of eigenvalues above rel_tol * max(trace, floor); the floor guards the
// all-zero matrix.
inline constexpr double kRankFloorScale = 1e-9;
int numerical_rank(const HermitianMatrix& m, double rel_tol = 1e-6);

// [[Re M, -Im M], [Im M, Re M]]; Hermitian input gives a symmetric result with
// every eigenvalue doubled in multiplicity.
Eigen::MatrixXd real_embed(const ComplexMatrix& m);

}  // namespace fdsec
