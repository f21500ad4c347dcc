#include "fdsec/linalg.hpp"

#include <iostream>
#include <stdexcept>

namespace fdsec {

namespace {

void require_finite(const ComplexMatrix& m, const char* what) {
  if (!m.allFinite()) {
    throw std::invalid_argument(std::string(what) + ": non-finite entries");
  }
}

}  // namespace

HermitianMatrix::HermitianMatrix(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) {
    throw std::invalid_argument("HermitianMatrix: input is not square");
  }
  require_finite(m, "HermitianMatrix");
  mat_ = 0.5 * (m + m.adjoint());
  const double correction = (m - mat_).cwiseAbs().maxCoeff();
  if (correction > kHermitianWarnTol) {
    std::cerr << "warning: hermitian symmetrization moved an entry by "
              << correction << "\n";
  }
}

HermitianMatrix HermitianMatrix::Zero(int dim) {
  HermitianMatrix h;
  h.mat_ = ComplexMatrix::Zero(dim, dim);
  h.psd_certified_ = true;
  return h;
}

HermitianMatrix HermitianMatrix::Identity(int dim) {
  HermitianMatrix h;
  h.mat_ = ComplexMatrix::Identity(dim, dim);
  h.psd_certified_ = true;
  return h;
}

double quadratic_form(const ComplexRowVec& v, const HermitianMatrix& m) {
  if (v.cols() != m.dim()) {
    throw std::invalid_argument("quadratic_form: dimension mismatch");
  }
  const double value = (v * m.mat() * v.adjoint())(0, 0).real();
  if (m.psd_certified() && value < 0.0 && value >= -kPsdClampTol) {
    return 0.0;
  }
  return value;
}

EigenDecomposition hermitian_eigen(const HermitianMatrix& m) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(m.mat());
  if (solver.info() != Eigen::Success) {
    const double residual =
        (m.mat() * solver.eigenvectors() -
         solver.eigenvectors() * solver.eigenvalues().asDiagonal())
            .norm();
    throw std::runtime_error("hermitian_eigen: no convergence, residual " +
                             std::to_string(residual));
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

double min_eigenvalue(const HermitianMatrix& m) {
  if (m.dim() == 0) return 0.0;
  return hermitian_eigen(m).values(0);
}

int numerical_rank(const HermitianMatrix& m, double rel_tol) {
  const double scale = std::max(m.trace(), kRankFloorScale);
  const double cut = rel_tol * scale;
  const auto eig = hermitian_eigen(m);
  int rank = 0;
  for (int i = 0; i < eig.values.size(); ++i) {
    if (eig.values(i) > cut) ++rank;
  }
  return rank;
}

Eigen::MatrixXd real_embed(const ComplexMatrix& m) {
  require_finite(m, "real_embed");
  const auto n = m.rows();
  const auto c = m.cols();
  Eigen::MatrixXd out(2 * n, 2 * c);
  out.topLeftCorner(n, c) = m.real();
  out.topRightCorner(n, c) = -m.imag();
  out.bottomLeftCorner(n, c) = m.imag();
  out.bottomRightCorner(n, c) = m.real();
  return out;
}

}  // namespace fdsec
