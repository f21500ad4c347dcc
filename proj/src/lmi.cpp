#include "fdsec/lmi.hpp"

#include <ostream>
#include <stdexcept>

namespace fdsec {

void MatExpr::add_const(const ComplexMatrix& c) {
  if (c.rows() != dim_ || c.cols() != dim_) {
    throw std::invalid_argument("MatExpr::add_const: dimension mismatch");
  }
  constant_ += c;
}

void MatExpr::add_term(int param, const ComplexMatrix& coeff) {
  if (coeff.rows() != dim_ || coeff.cols() != dim_) {
    throw std::invalid_argument("MatExpr::add_term: dimension mismatch");
  }
  auto it = terms_.find(param);
  if (it == terms_.end()) {
    terms_.emplace(param, coeff);
  } else {
    it->second += coeff;
  }
}

ComplexMatrix MatExpr::eval(const Eigen::VectorXd& x) const {
  ComplexMatrix out = constant_;
  for (const auto& [p, c] : terms_) out += x(p) * c;
  return out;
}

VarRef LmiProblem::add_hermitian(std::string name, int dim) {
  if (dim < 1) throw std::invalid_argument("add_hermitian: dim < 1");
  VarDesc d{std::move(name), VarKind::HermitianPsd, dim, param_count_, dim * dim};
  param_count_ += d.param_count;
  vars_.push_back(std::move(d));
  return {static_cast<int>(vars_.size()) - 1};
}

VarRef LmiProblem::add_scalar(std::string name, VarKind kind) {
  if (kind == VarKind::HermitianPsd) {
    throw std::invalid_argument("add_scalar: scalar kind required");
  }
  VarDesc d{std::move(name), kind, 1, param_count_, 1};
  param_count_ += 1;
  vars_.push_back(std::move(d));
  return {static_cast<int>(vars_.size()) - 1};
}

int LmiProblem::add_block(MatExpr block) {
  if (block.dim() < 1) throw std::invalid_argument("add_block: empty block");
  blocks_.push_back(std::move(block));
  return static_cast<int>(blocks_.size()) - 1;
}

int LmiProblem::add_linear(LinExpr expr, Rel rel) {
  linear_.emplace_back(std::move(expr), rel);
  return static_cast<int>(linear_.size()) - 1;
}

// Parameter order for a dim-d Hermitian variable: d diagonal entries, then
// (Re, Im) for each off-diagonal (j,k), j<k, row-major.
ComplexMatrix LmiProblem::basis_matrix(int dim, int p) {
  ComplexMatrix e = ComplexMatrix::Zero(dim, dim);
  if (p < dim) {
    e(p, p) = 1.0;
    return e;
  }
  int q = p - dim;
  const int pair = q / 2;
  const bool imag = q % 2 == 1;
  int idx = 0;
  for (int j = 0; j < dim; ++j) {
    for (int k = j + 1; k < dim; ++k, ++idx) {
      if (idx == pair) {
        if (imag) {
          e(j, k) = std::complex<double>(0.0, 1.0);
          e(k, j) = std::complex<double>(0.0, -1.0);
        } else {
          e(j, k) = 1.0;
          e(k, j) = 1.0;
        }
        return e;
      }
    }
  }
  throw std::out_of_range("basis_matrix: parameter index out of range");
}

LinExpr LmiProblem::trace_expr(VarRef h) const {
  const VarDesc& d = var(h);
  LinExpr e;
  if (d.kind == VarKind::HermitianPsd) {
    for (int j = 0; j < d.dim; ++j) e.add(d.offset + j, 1.0);
  } else {
    e.add(d.offset, 1.0);
  }
  return e;
}

LinExpr LmiProblem::quad_form_expr(VarRef h, const ComplexRowVec& v) const {
  const VarDesc& d = var(h);
  if (d.kind != VarKind::HermitianPsd || v.cols() != d.dim) {
    throw std::invalid_argument("quad_form_expr: bad variable or dimension");
  }
  LinExpr e;
  for (int j = 0; j < d.dim; ++j) e.add(d.offset + j, std::norm(v(j)));
  int p = d.dim;
  for (int j = 0; j < d.dim; ++j) {
    for (int k = j + 1; k < d.dim; ++k) {
      const std::complex<double> z = v(j) * std::conj(v(k));
      e.add(d.offset + p++, 2.0 * z.real());
      e.add(d.offset + p++, -2.0 * z.imag());
    }
  }
  return e;
}

void LmiProblem::add_matrix_into(MatExpr& block, VarRef h, double sign,
                                 int row0) const {
  const VarDesc& d = var(h);
  if (row0 + d.dim > block.dim()) {
    throw std::invalid_argument("add_matrix_into: block too small");
  }
  for (int p = 0; p < d.param_count; ++p) {
    ComplexMatrix c = ComplexMatrix::Zero(block.dim(), block.dim());
    c.block(row0, row0, d.dim, d.dim) = sign * basis_matrix(d.dim, p);
    block.add_term(d.offset + p, c);
  }
}

void LmiProblem::add_bordered_into(MatExpr& block, VarRef h,
                                   const ComplexRowVec& v, double sign) const {
  const VarDesc& d = var(h);
  if (block.dim() != d.dim + 1 || v.cols() != d.dim) {
    throw std::invalid_argument("add_bordered_into: dimension mismatch");
  }
  // U stacks the identity over v; the contribution per basis E is U E U^*.
  ComplexMatrix u(d.dim + 1, d.dim);
  u.topRows(d.dim) = ComplexMatrix::Identity(d.dim, d.dim);
  u.bottomRows(1) = v;
  for (int p = 0; p < d.param_count; ++p) {
    block.add_term(d.offset + p,
                   sign * (u * basis_matrix(d.dim, p) * u.adjoint()));
  }
}

void LmiProblem::add_scalar_identity_into(MatExpr& block, VarRef s, double coeff,
                                          int row0, int count) const {
  const VarDesc& d = var(s);
  if (d.kind == VarKind::HermitianPsd) {
    throw std::invalid_argument("add_scalar_identity_into: scalar required");
  }
  ComplexMatrix c = ComplexMatrix::Zero(block.dim(), block.dim());
  for (int j = 0; j < count; ++j) c(row0 + j, row0 + j) = coeff;
  block.add_term(d.offset, c);
}

void LmiProblem::add_scalar_entry_into(MatExpr& block, VarRef s, int row, int col,
                                       std::complex<double> coeff) const {
  const VarDesc& d = var(s);
  if (d.kind == VarKind::HermitianPsd) {
    throw std::invalid_argument("add_scalar_entry_into: scalar required");
  }
  ComplexMatrix c = ComplexMatrix::Zero(block.dim(), block.dim());
  c(row, col) = coeff;
  if (row != col) c(col, row) = std::conj(coeff);
  block.add_term(d.offset, c);
}

HermitianMatrix LmiProblem::value_of(VarRef h, const Eigen::VectorXd& x) const {
  const VarDesc& d = var(h);
  ComplexMatrix m = ComplexMatrix::Zero(d.dim, d.dim);
  for (int p = 0; p < d.param_count; ++p) {
    m += x(d.offset + p) * basis_matrix(d.dim, p);
  }
  return HermitianMatrix(m);
}

double LmiProblem::scalar_value(VarRef s, const Eigen::VectorXd& x) const {
  return x(var(s).offset);
}

void LmiProblem::assign(VarRef h, const HermitianMatrix& value,
                        Eigen::VectorXd& x) const {
  const VarDesc& d = var(h);
  if (value.dim() != d.dim) throw std::invalid_argument("assign: dim mismatch");
  const ComplexMatrix& m = value.mat();
  for (int j = 0; j < d.dim; ++j) x(d.offset + j) = m(j, j).real();
  int p = d.dim;
  for (int j = 0; j < d.dim; ++j) {
    for (int k = j + 1; k < d.dim; ++k) {
      x(d.offset + p++) = m(j, k).real();
      x(d.offset + p++) = m(j, k).imag();
    }
  }
}

namespace {

void print_complex(std::ostream& os, std::complex<double> z) {
  os << z.real() << (z.imag() < 0 ? "-" : "+") << std::abs(z.imag()) << "i";
}

void print_matrix(std::ostream& os, const ComplexMatrix& m,
                  const char* indent) {
  for (int r = 0; r < m.rows(); ++r) {
    os << indent << "[ ";
    for (int c = 0; c < m.cols(); ++c) {
      print_complex(os, m(r, c));
      os << (c + 1 < m.cols() ? "  " : "");
    }
    os << " ]\n";
  }
}

void print_linexpr(std::ostream& os, const LinExpr& e) {
  bool first = true;
  for (const auto& [p, c] : e.terms) {
    if (!first) os << " + ";
    os << c << "*x[" << p << "]";
    first = false;
  }
  if (e.constant != 0.0 || first) {
    if (!first) os << " + ";
    os << e.constant;
  }
}

}  // namespace

void LmiProblem::dump(std::ostream& os) const {
  os << "variables (" << param_count_ << " parameters):\n";
  for (const auto& v : vars_) {
    os << "  " << v.name << ": ";
    switch (v.kind) {
      case VarKind::HermitianPsd:
        os << "hermitian-psd " << v.dim << "x" << v.dim;
        break;
      case VarKind::NonnegScalar:
        os << "scalar >= 0";
        break;
      case VarKind::FreeScalar:
        os << "scalar";
        break;
    }
    os << ", params " << v.offset << ".." << v.offset + v.param_count - 1
       << "\n";
  }
  os << "minimize: ";
  print_linexpr(os, objective_);
  os << "\n";
  for (size_t b = 0; b < blocks_.size(); ++b) {
    os << "block " << b << " (dim " << blocks_[b].dim() << ") >= 0:\n";
    os << "  const:\n";
    print_matrix(os, blocks_[b].constant(), "    ");
    for (const auto& [p, c] : blocks_[b].terms()) {
      os << "  + x[" << p << "] *\n";
      print_matrix(os, c, "    ");
    }
  }
  for (size_t k = 0; k < linear_.size(); ++k) {
    os << "linear " << k << (linear_[k].second == Rel::Eq ? " == 0: " : " <= 0: ");
    print_linexpr(os, linear_[k].first);
    os << "\n";
  }
}

}  // namespace fdsec
