#pragma once

#include <Eigen/Dense>
#include <complex>
#include <string>
#include <utility>
#include <vector>

#include "secbeam/solver.hpp"

namespace secbeam {

// Sparse affine expression over real decision variables.
struct LinExpr {
  std::vector<std::pair<int, double>> terms;
  double constant = 0.0;

  LinExpr() = default;
  LinExpr(double c) : constant(c) {}  // NOLINT: implicit by design
  static LinExpr var(int idx, double coef = 1.0) {
    LinExpr e;
    e.terms.emplace_back(idx, coef);
    return e;
  }
  LinExpr& operator+=(const LinExpr& o);
  LinExpr& operator-=(const LinExpr& o);
  LinExpr& operator*=(double a);
};

LinExpr operator+(LinExpr a, const LinExpr& b);
LinExpr operator-(LinExpr a, const LinExpr& b);
LinExpr operator*(double a, LinExpr e);
LinExpr operator-(LinExpr e);

// Complex affine expression: re + i*im, both real affine.
struct CLinExpr {
  LinExpr re, im;
  CLinExpr() = default;
  CLinExpr(std::complex<double> c) : re(c.real()), im(c.imag()) {}  // NOLINT
  CLinExpr(LinExpr r, LinExpr i) : re(std::move(r)), im(std::move(i)) {}
};

CLinExpr operator+(const CLinExpr& a, const CLinExpr& b);
CLinExpr operator-(const CLinExpr& a, const CLinExpr& b);
// (x + iy) * (a + ib)
CLinExpr operator*(std::complex<double> a, const CLinExpr& e);
CLinExpr conj_coeff_times(std::complex<double> a, const CLinExpr& e);  // conj(a)*e

enum class SolveStatus { optimal, infeasible, numerical_failure, iteration_limit };

struct SolverResult {
  SolveStatus status = SolveStatus::numerical_failure;
  double objective = 0.0;       // in the user's (maximize) sense
  Eigen::VectorXd x;            // primal variables (empty unless optimal/limit)
  double wall_ms = 0.0;
  double max_violation = 0.0;   // worst primal constraint violation at x
  int iterations = 0;
  std::string message;
};

// Conic model: real scalar variables, maximize a linear objective subject to
// linear / second-order / rotated second-order / PSD constraints. Complex
// quantities are expanded into re/im pairs by the helpers below.
class ConicProgram {
 public:
  int add_var(const std::string& name);
  std::vector<int> add_vars(const std::string& prefix, int count);
  int num_vars() const { return static_cast<int>(names_.size()); }

  void set_objective_max(const LinExpr& obj) { obj_ = obj; }

  void add_le(const LinExpr& lhs, const LinExpr& rhs);  // lhs <= rhs
  void add_ge(const LinExpr& lhs, const LinExpr& rhs) { add_le(rhs, lhs); }
  // Lowered to a pair of inequalities; the interior-point core only ever
  // sees the inequality form.
  void add_eq(const LinExpr& lhs, const LinExpr& rhs);
  void add_nonneg(const LinExpr& e) { add_ge(e, LinExpr(0.0)); }

  // head >= || tail ||_2
  void add_soc(const LinExpr& head, const std::vector<LinExpr>& tail);
  // 2uv >= ||z||^2 with u,v >= 0 (encoded as SOC: u+v >= ||(u-v, sqrt2 z)||).
  void add_rotated(const LinExpr& u, const LinExpr& v,
                   const std::vector<LinExpr>& z);
  // ||z||^2 <= bound  (rotated cone against the constant 1/2)
  void add_square_le(const std::vector<LinExpr>& z, const LinExpr& bound);
  // |num|^2 / den <= bound (vector numerators give a sum of squared moduli).
  // The cone itself enforces den, bound >= 0.
  void add_quadratic_over_linear(const CLinExpr& num, const LinExpr& den,
                                 const LinExpr& bound);
  void add_quadratic_over_linear(const std::vector<CLinExpr>& nums,
                                 const LinExpr& den, const LinExpr& bound);
  // Affine real symmetric matrix M (entries as expressions) constrained PSD.
  void add_psd(const std::vector<std::vector<LinExpr>>& M);
  // Hermitian affine complex matrix constrained PSD via the real embedding
  // [[Re, -Im], [Im, Re]]. Only entries with i <= j are read; the lower
  // triangle is implied by Hermitian symmetry.
  void add_psd_hermitian(const std::vector<std::vector<CLinExpr>>& M);

  int constraint_blocks() const;  // total cone blocks (LP rows count singly)

  SolverResult solve(const IpmOptions& opts = {}) const;

  double eval(const LinExpr& e, const Eigen::VectorXd& x) const;
  std::complex<double> eval(const CLinExpr& e, const Eigen::VectorXd& x) const;

  // Text dump: variables, cones and coefficient triplets (row, col, value).
  std::string dump() const;

 private:
  struct SocBlock {
    std::vector<LinExpr> rows;  // rows[0] = head
  };
  struct PsdBlock {
    int n = 0;
    std::vector<LinExpr> entries;  // row-major n*n, symmetric
  };

  void assemble(Eigen::VectorXd& c, Eigen::MatrixXd& G, Eigen::VectorXd& h,
                ConeDims& dims) const;
  double violation(const Eigen::VectorXd& x) const;

  std::vector<std::string> names_;
  LinExpr obj_;
  std::vector<LinExpr> lin_le_;  // each expr <= 0
  std::vector<SocBlock> socs_;
  std::vector<PsdBlock> psds_;
};

// --- Complex variable helpers -------------------------------------------

// Complex vector variable: n entries, each a (re, im) pair of scalars.
struct CVecVar {
  int n = 0;
  std::vector<int> re, im;
  CLinExpr entry(int i) const {
    return {LinExpr::var(re[i]), LinExpr::var(im[i])};
  }
};
CVecVar add_cvec_var(ConicProgram& prog, const std::string& name, int n);

// Hermitian matrix variable: diagonal entries real, off-diagonal (i>j)
// carry re/im pairs; entry(i,j) for i<j is the conjugate by construction.
struct HermVar {
  int n = 0;
  std::vector<int> diag;            // n real variables
  std::vector<std::vector<int>> re; // lower triangle i>j
  std::vector<std::vector<int>> im;
  CLinExpr entry(int i, int j) const;
  LinExpr trace() const;
  // Value recovery from a solved primal vector.
  Eigen::MatrixXcd value(const Eigen::VectorXd& x) const;
};
HermVar add_herm_var(ConicProgram& prog, const std::string& name, int n);

// v^H M v for numeric vector v and Hermitian variable M (real-valued expr).
LinExpr herm_quad_form(const HermVar& M, const Eigen::VectorXcd& v);
// w^H v for numeric v: returns sum_i conj(w_i) v_i as a complex expression
// where w is the variable vector.
CLinExpr cvec_inner(const CVecVar& w, const Eigen::VectorXcd& v);
// v^H w (conjugate the numeric side).
CLinExpr cvec_inner_conj(const Eigen::VectorXcd& v, const CVecVar& w);
// Real part of a^H w for numeric a — linear in the variables.
LinExpr re_inner(const Eigen::VectorXcd& a, const CVecVar& w);
// ||w||^2 <= bound helper rows (the 2n real coordinates as expressions).
std::vector<LinExpr> cvec_coords(const CVecVar& w);
// Value recovery from a solved primal vector.
Eigen::VectorXcd cvec_value(const CVecVar& w, const Eigen::VectorXd& x);

// --- Robust-design LMI constructors --------------------------------------

// Appends the (N+2)x(N+2) complex PSD block
//   [[1,        w^H,        -w^H f_hat],
//    [w,        omega I_N,   0        ],
//    [-f_hat^H w,  0,       -omega delta^2 + mu]]
// in real embedding. Certifies |(f_hat+df)^H w|^2 <= mu for all ||df||<=delta.
void build_lmi_interference_cap(ConicProgram& prog, const CVecVar& w,
                                const LinExpr& mu, const LinExpr& omega,
                                const Eigen::VectorXcd& f_hat, double delta);

// Appends the (N+1)x(N+1) complex PSD block
//   [[omega I_N - Ut,  -Ut f_hat],
//    [-f_hat^H Ut,     -f_hat^H Ut f_hat - omega delta^2 + mu]]
// certifying (f_hat+df)^H Ut (f_hat+df) <= mu over the ball.
void build_lmi_jam_cap(ConicProgram& prog, const HermVar& Ut, const LinExpr& mu,
                       const LinExpr& omega, const Eigen::VectorXcd& f_hat,
                       double delta);

// Ut - floor * I >= 0 (floor an affine expression).
void add_lambda_min_floor(ConicProgram& prog, const HermVar& Ut,
                          const LinExpr& floor);

}  // namespace secbeam
