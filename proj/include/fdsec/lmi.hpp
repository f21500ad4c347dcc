#pragma once

#include <complex>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "fdsec/linalg.hpp"

namespace fdsec {

enum class VarKind { HermitianPsd, NonnegScalar, FreeScalar };

struct VarRef {
  int id = -1;
};

struct VarDesc {
  std::string name;
  VarKind kind;
  int dim;          // matrix dimension; 1 for scalars
  int offset;       // first entry in the scalar parameter vector
  int param_count;  // dim*dim for Hermitian (diagonal, then Re/Im per off-diagonal)
};

// Affine scalar expression over the problem's parameter vector.
struct LinExpr {
  double constant = 0.0;
  std::map<int, double> terms;

  void add(int param, double coeff) {
    if (coeff != 0.0) terms[param] += coeff;
  }
  void axpy(double a, const LinExpr& other) {
    constant += a * other.constant;
    for (const auto& [p, c] : other.terms) add(p, a * c);
  }
  double eval(const Eigen::VectorXd& x) const {
    double v = constant;
    for (const auto& [p, c] : terms) v += c * x(p);
    return v;
  }
};

// Affine Hermitian-matrix expression: constant + sum_p x_p * coeff_p.
class MatExpr {
 public:
  MatExpr() = default;
  explicit MatExpr(int dim) : dim_(dim), constant_(ComplexMatrix::Zero(dim, dim)) {}

  int dim() const { return dim_; }
  const ComplexMatrix& constant() const { return constant_; }
  const std::map<int, ComplexMatrix>& terms() const { return terms_; }

  void add_const(const ComplexMatrix& c);
  void add_term(int param, const ComplexMatrix& coeff);
  ComplexMatrix eval(const Eigen::VectorXd& x) const;

 private:
  int dim_ = 0;
  ComplexMatrix constant_;
  std::map<int, ComplexMatrix> terms_;
};

enum class Rel { LessEq, Eq };

// SDP in structured form: typed variables, one linear objective (minimize),
// affine matrix blocks constrained PSD, affine scalar constraints. Hermitian
// and nonnegative-scalar variables carry their cone membership implicitly.
class LmiProblem {
 public:
  VarRef add_hermitian(std::string name, int dim);
  VarRef add_scalar(std::string name, VarKind kind);

  void set_objective(LinExpr minimize) { objective_ = std::move(minimize); }
  int add_block(MatExpr block);
  int add_linear(LinExpr expr, Rel rel);

  int param_count() const { return param_count_; }
  const std::vector<VarDesc>& vars() const { return vars_; }
  const VarDesc& var(VarRef r) const { return vars_.at(r.id); }
  const LinExpr& objective() const { return objective_; }
  const std::vector<MatExpr>& blocks() const { return blocks_; }
  const std::vector<std::pair<LinExpr, Rel>>& linear() const { return linear_; }

  // Hermitian parameter basis matrix for local parameter index p of a
  // dim-d variable.
  static ComplexMatrix basis_matrix(int dim, int p);

  LinExpr trace_expr(VarRef h) const;
  // v H v^* as a linear expression in H's parameters.
  LinExpr quad_form_expr(VarRef h, const ComplexRowVec& v) const;

  // sign * H added at rows/cols [row0, row0+d).
  void add_matrix_into(MatExpr& block, VarRef h, double sign, int row0 = 0) const;
  // sign * [[H, H v^*], [v H, v H v^*]] at the top-left; block dim is d+1.
  void add_bordered_into(MatExpr& block, VarRef h, const ComplexRowVec& v,
                         double sign) const;
  // coeff * s on the diagonal entries [row0, row0+count).
  void add_scalar_identity_into(MatExpr& block, VarRef s, double coeff, int row0,
                                int count) const;
  // coeff * s at (row, col), mirrored conjugate at (col, row) when off-diagonal.
  void add_scalar_entry_into(MatExpr& block, VarRef s, int row, int col,
                             std::complex<double> coeff) const;

  HermitianMatrix value_of(VarRef h, const Eigen::VectorXd& x) const;
  double scalar_value(VarRef s, const Eigen::VectorXd& x) const;
  // Writes params of a Hermitian value into x (dimension must match).
  void assign(VarRef h, const HermitianMatrix& value, Eigen::VectorXd& x) const;

  void dump(std::ostream& os) const;

 private:
  std::vector<VarDesc> vars_;
  LinExpr objective_;
  std::vector<MatExpr> blocks_;
  std::vector<std::pair<LinExpr, Rel>> linear_;
  int param_count_ = 0;
};

}  // namespace fdsec
