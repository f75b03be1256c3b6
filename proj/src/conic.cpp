#include "secbeam/conic.hpp"

#include <Eigen/Eigenvalues>
#include <chrono>
#include <cmath>
#include <map>
#include <sstream>

namespace secbeam {

using Eigen::MatrixXd;
using Eigen::VectorXd;

LinExpr& LinExpr::operator+=(const LinExpr& o) {
  terms.insert(terms.end(), o.terms.begin(), o.terms.end());
  constant += o.constant;
  return *this;
}
LinExpr& LinExpr::operator-=(const LinExpr& o) {
  for (const auto& [i, c] : o.terms) terms.emplace_back(i, -c);
  constant -= o.constant;
  return *this;
}
LinExpr& LinExpr::operator*=(double a) {
  for (auto& [i, c] : terms) c *= a;
  constant *= a;
  return *this;
}
LinExpr operator+(LinExpr a, const LinExpr& b) { return a += b; }
LinExpr operator-(LinExpr a, const LinExpr& b) { return a -= b; }
LinExpr operator*(double a, LinExpr e) { return e *= a; }
LinExpr operator-(LinExpr e) { return e *= -1.0; }

CLinExpr operator+(const CLinExpr& a, const CLinExpr& b) {
  return {a.re + b.re, a.im + b.im};
}
CLinExpr operator-(const CLinExpr& a, const CLinExpr& b) {
  return {a.re - b.re, a.im - b.im};
}
CLinExpr operator*(std::complex<double> a, const CLinExpr& e) {
  return {a.real() * e.re - a.imag() * e.im, a.real() * e.im + a.imag() * e.re};
}
CLinExpr conj_coeff_times(std::complex<double> a, const CLinExpr& e) {
  return {a.real() * e.re + a.imag() * e.im, a.real() * e.im - a.imag() * e.re};
}

int ConicProgram::add_var(const std::string& name) {
  names_.push_back(name);
  return static_cast<int>(names_.size()) - 1;
}

std::vector<int> ConicProgram::add_vars(const std::string& prefix, int count) {
  std::vector<int> idx(count);
  for (int i = 0; i < count; ++i)
    idx[i] = add_var(prefix + "[" + std::to_string(i) + "]");
  return idx;
}

void ConicProgram::add_le(const LinExpr& lhs, const LinExpr& rhs) {
  lin_le_.push_back(lhs - rhs);
}

void ConicProgram::add_eq(const LinExpr& lhs, const LinExpr& rhs) {
  add_le(lhs, rhs);
  add_le(rhs, lhs);
}

void ConicProgram::add_soc(const LinExpr& head, const std::vector<LinExpr>& tail) {
  SocBlock b;
  b.rows.push_back(head);
  b.rows.insert(b.rows.end(), tail.begin(), tail.end());
  socs_.push_back(std::move(b));
}

void ConicProgram::add_rotated(const LinExpr& u, const LinExpr& v,
                               const std::vector<LinExpr>& z) {
  std::vector<LinExpr> tail;
  tail.reserve(z.size() + 1);
  tail.push_back(u - v);
  const double s2 = std::sqrt(2.0);
  for (const auto& zi : z) {
    LinExpr e = zi;
    e *= s2;
    tail.push_back(std::move(e));
  }
  add_soc(u + v, tail);
}

void ConicProgram::add_square_le(const std::vector<LinExpr>& z,
                                 const LinExpr& bound) {
  add_rotated(bound, LinExpr(0.5), z);
}

void ConicProgram::add_quadratic_over_linear(const CLinExpr& num,
                                             const LinExpr& den,
                                             const LinExpr& bound) {
  add_quadratic_over_linear(std::vector<CLinExpr>{num}, den, bound);
}

void ConicProgram::add_quadratic_over_linear(const std::vector<CLinExpr>& nums,
                                             const LinExpr& den,
                                             const LinExpr& bound) {
  // den * bound >= sum |num|^2 via the rotated cone 2*den*bound >= ||z||^2
  // with z = sqrt2 * (re, im, ...) of the numerators.
  const double s2 = std::sqrt(2.0);
  std::vector<LinExpr> z;
  z.reserve(2 * nums.size());
  for (const auto& n : nums) {
    z.push_back(s2 * LinExpr(n.re));
    z.push_back(s2 * LinExpr(n.im));
  }
  add_rotated(den, bound, z);
}

void ConicProgram::add_psd(const std::vector<std::vector<LinExpr>>& M) {
  PsdBlock b;
  b.n = static_cast<int>(M.size());
  b.entries.resize(b.n * b.n);
  for (int i = 0; i < b.n; ++i)
    for (int j = 0; j < b.n; ++j)
      b.entries[i * b.n + j] = (i >= j) ? M[i][j] : M[j][i];  // lower wins
  psds_.push_back(std::move(b));
}

void ConicProgram::add_psd_hermitian(const std::vector<std::vector<CLinExpr>>& M) {
  const int n = static_cast<int>(M.size());
  // Real embedding [[Re, -Im],[Im, Re]] built from the upper triangle of M
  // (the lower triangle is implied by Hermitian symmetry).
  auto upper = [&](int i, int j) -> const CLinExpr& {
    return (i <= j) ? M[i][j] : M[j][i];
  };
  auto re_entry = [&](int i, int j) -> LinExpr { return upper(i, j).re; };
  auto im_entry = [&](int i, int j) -> LinExpr {
    if (i == j) return LinExpr(0.0);
    if (i < j) return M[i][j].im;
    return -(M[j][i].im);  // Im M_ij = -Im M_ji
  };
  std::vector<std::vector<LinExpr>> S(2 * n, std::vector<LinExpr>(2 * n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      S[i][j] = re_entry(i, j);
      S[n + i][n + j] = re_entry(i, j);
      S[i][n + j] = -im_entry(i, j);
      S[n + i][j] = im_entry(i, j);
    }
  add_psd(S);
}

int ConicProgram::constraint_blocks() const {
  return static_cast<int>(lin_le_.size() + socs_.size() + psds_.size());
}

namespace {

void scatter(const LinExpr& e, int row, double scale, MatrixXd& G, VectorXd& h) {
  // Row semantics: s_row = h_row - G_row x must equal scale * e(x).
  h(row) = scale * e.constant;
  for (const auto& [idx, coef] : e.terms) G(row, idx) -= scale * coef;
}

}  // namespace

void ConicProgram::assemble(VectorXd& c, MatrixXd& G, VectorXd& h,
                            ConeDims& dims) const {
  const int n = num_vars();
  dims = ConeDims{};
  dims.l = static_cast<int>(lin_le_.size());
  for (const auto& b : socs_) dims.q.push_back(static_cast<int>(b.rows.size()));
  for (const auto& b : psds_) dims.s.push_back(b.n);
  int m = dims.vec_dim();

  G = MatrixXd::Zero(m, n);
  h = VectorXd::Zero(m);
  int row = 0;
  // LP rows: expr <= 0  =>  s = -expr >= 0.
  for (const auto& e : lin_le_) {
    scatter(e, row, -1.0, G, h);
    ++row;
  }
  for (const auto& b : socs_)
    for (const auto& e : b.rows) {
      scatter(e, row, 1.0, G, h);
      ++row;
    }
  const double s2 = std::sqrt(2.0);
  for (const auto& b : psds_) {
    for (int j = 0; j < b.n; ++j)
      for (int i = j; i < b.n; ++i) {
        double scale = (i == j) ? 1.0 : s2;
        scatter(b.entries[i * b.n + j], row, scale, G, h);
        ++row;
      }
  }

  // Objective: maximize obj == minimize -obj.
  c = VectorXd::Zero(n);
  for (const auto& [idx, coef] : obj_.terms) c(idx) -= coef;
}

double ConicProgram::eval(const LinExpr& e, const VectorXd& x) const {
  double v = e.constant;
  for (const auto& [idx, coef] : e.terms) v += coef * x(idx);
  return v;
}

std::complex<double> ConicProgram::eval(const CLinExpr& e, const VectorXd& x) const {
  return {eval(e.re, x), eval(e.im, x)};
}

double ConicProgram::violation(const VectorXd& x) const {
  double worst = 0.0;
  for (const auto& e : lin_le_) worst = std::max(worst, eval(e, x));
  for (const auto& b : socs_) {
    double head = eval(b.rows[0], x);
    double t2 = 0.0;
    for (std::size_t i = 1; i < b.rows.size(); ++i) {
      double v = eval(b.rows[i], x);
      t2 += v * v;
    }
    worst = std::max(worst, std::sqrt(t2) - head);
  }
  for (const auto& b : psds_) {
    MatrixXd M(b.n, b.n);
    for (int i = 0; i < b.n; ++i)
      for (int j = 0; j < b.n; ++j) M(i, j) = eval(b.entries[i * b.n + j], x);
    MatrixXd Ms = 0.5 * (M + M.transpose());
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(Ms, Eigen::EigenvaluesOnly);
    worst = std::max(worst, -es.eigenvalues().minCoeff());
  }
  return worst;
}

SolverResult ConicProgram::solve(const IpmOptions& opts) const {
  auto t0 = std::chrono::steady_clock::now();
  SolverResult out;
  VectorXd c, h;
  MatrixXd G;
  ConeDims dims;
  assemble(c, G, h, dims);

  IpmResult r = solve_conelp(c, G, h, dims, opts);
  out.iterations = r.iters;
  out.message = r.message;
  switch (r.status) {
    case IpmStatus::optimal: {
      out.x = r.x;
      out.objective = eval(obj_, r.x);
      out.max_violation = violation(r.x);
      double tol = 1e-6 * std::max(1.0, h.size() ? h.cwiseAbs().maxCoeff() : 1.0);
      if (out.max_violation <= tol) {
        out.status = SolveStatus::optimal;
      } else {
        out.status = SolveStatus::numerical_failure;
        out.message = "optimal status rejected: primal residual " +
                      std::to_string(out.max_violation) + " exceeds tolerance";
      }
      break;
    }
    case IpmStatus::primal_infeasible:
      out.status = SolveStatus::infeasible;
      break;
    case IpmStatus::dual_infeasible:
      out.status = SolveStatus::numerical_failure;
      out.message = "program is unbounded (dual infeasibility certificate)";
      break;
    case IpmStatus::iteration_limit:
      out.status = SolveStatus::iteration_limit;
      out.x = r.x;
      out.objective = eval(obj_, r.x);
      out.max_violation = violation(r.x);
      break;
    case IpmStatus::numerical_failure:
      out.status = SolveStatus::numerical_failure;
      break;
  }
  out.wall_ms = std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - t0)
                    .count();
  return out;
}

std::string ConicProgram::dump() const {
  std::ostringstream os;
  os << "variables " << num_vars() << "\n";
  for (int i = 0; i < num_vars(); ++i) os << "  x" << i << " " << names_[i] << "\n";
  auto put_expr = [&](const LinExpr& e) {
    os << e.constant;
    for (const auto& [idx, coef] : e.terms) os << " + " << coef << "*x" << idx;
  };
  os << "maximize ";
  put_expr(obj_);
  os << "\n";
  VectorXd c, h;
  MatrixXd G;
  ConeDims dims;
  assemble(c, G, h, dims);
  os << "cones: lp=" << dims.l << " soc=[";
  for (std::size_t i = 0; i < dims.q.size(); ++i) os << (i ? "," : "") << dims.q[i];
  os << "] psd=[";
  for (std::size_t i = 0; i < dims.s.size(); ++i) os << (i ? "," : "") << dims.s[i];
  os << "]\n";
  os << "h:";
  for (int i = 0; i < h.size(); ++i)
    if (h(i) != 0.0) os << " (" << i << "," << h(i) << ")";
  os << "\nG triplets (row, col, value):\n";
  for (int i = 0; i < G.rows(); ++i)
    for (int j = 0; j < G.cols(); ++j)
      if (G(i, j) != 0.0) os << "  (" << i << ", " << j << ", " << G(i, j) << ")\n";
  return os.str();
}

// --- complex helpers ------------------------------------------------------

CVecVar add_cvec_var(ConicProgram& prog, const std::string& name, int n) {
  CVecVar v;
  v.n = n;
  v.re = prog.add_vars(name + ".re", n);
  v.im = prog.add_vars(name + ".im", n);
  return v;
}

CLinExpr HermVar::entry(int i, int j) const {
  if (i == j) return {LinExpr::var(diag[i]), LinExpr(0.0)};
  if (i > j) return {LinExpr::var(re[i][j]), LinExpr::var(im[i][j])};
  return {LinExpr::var(re[j][i]), -LinExpr::var(im[j][i])};
}

LinExpr HermVar::trace() const {
  LinExpr t;
  for (int i = 0; i < n; ++i) t += LinExpr::var(diag[i]);
  return t;
}

Eigen::MatrixXcd HermVar::value(const VectorXd& x) const {
  Eigen::MatrixXcd M(n, n);
  for (int i = 0; i < n; ++i) {
    M(i, i) = x(diag[i]);
    for (int j = 0; j < i; ++j) {
      std::complex<double> v{x(re[i][j]), x(im[i][j])};
      M(i, j) = v;
      M(j, i) = std::conj(v);
    }
  }
  return M;
}

HermVar add_herm_var(ConicProgram& prog, const std::string& name, int n) {
  HermVar v;
  v.n = n;
  v.diag = prog.add_vars(name + ".d", n);
  v.re.resize(n);
  v.im.resize(n);
  for (int i = 1; i < n; ++i) {
    v.re[i] = prog.add_vars(name + ".re" + std::to_string(i), i);
    v.im[i] = prog.add_vars(name + ".im" + std::to_string(i), i);
  }
  return v;
}

LinExpr herm_quad_form(const HermVar& M, const Eigen::VectorXcd& v) {
  LinExpr q;
  for (int i = 0; i < M.n; ++i) {
    q += std::norm(v(i)) * LinExpr::var(M.diag[i]);
    for (int j = 0; j < i; ++j) {
      std::complex<double> c = std::conj(v(i)) * v(j);
      q += 2.0 * c.real() * LinExpr::var(M.re[i][j]);
      q -= 2.0 * c.imag() * LinExpr::var(M.im[i][j]);
    }
  }
  return q;
}

CLinExpr cvec_inner(const CVecVar& w, const Eigen::VectorXcd& v) {
  // sum_i conj(w_i) v_i
  CLinExpr out;
  for (int i = 0; i < w.n; ++i) {
    double a = v(i).real(), b = v(i).imag();
    out.re += a * LinExpr::var(w.re[i]) + b * LinExpr::var(w.im[i]);
    out.im += b * LinExpr::var(w.re[i]) - a * LinExpr::var(w.im[i]);
  }
  return out;
}

CLinExpr cvec_inner_conj(const Eigen::VectorXcd& v, const CVecVar& w) {
  // sum_i conj(v_i) w_i
  CLinExpr out;
  for (int i = 0; i < w.n; ++i) {
    double a = v(i).real(), b = v(i).imag();
    out.re += a * LinExpr::var(w.re[i]) + b * LinExpr::var(w.im[i]);
    out.im += a * LinExpr::var(w.im[i]) - b * LinExpr::var(w.re[i]);
  }
  return out;
}

LinExpr re_inner(const Eigen::VectorXcd& a, const CVecVar& w) {
  return cvec_inner_conj(a, w).re;
}

std::vector<LinExpr> cvec_coords(const CVecVar& w) {
  std::vector<LinExpr> out;
  out.reserve(2 * w.n);
  for (int i = 0; i < w.n; ++i) {
    out.push_back(LinExpr::var(w.re[i]));
    out.push_back(LinExpr::var(w.im[i]));
  }
  return out;
}

Eigen::VectorXcd cvec_value(const CVecVar& w, const Eigen::VectorXd& x) {
  Eigen::VectorXcd v(w.n);
  for (int i = 0; i < w.n; ++i) v(i) = {x(w.re[i]), x(w.im[i])};
  return v;
}

// --- LMI constructors -----------------------------------------------------

void build_lmi_interference_cap(ConicProgram& prog, const CVecVar& w,
                                const LinExpr& mu, const LinExpr& omega,
                                const Eigen::VectorXcd& f_hat, double delta) {
  const int N = w.n;
  std::vector<std::vector<CLinExpr>> M(N + 2, std::vector<CLinExpr>(N + 2));
  M[0][0] = CLinExpr(std::complex<double>(1.0, 0.0));
  for (int i = 0; i < N; ++i) {
    CLinExpr wi = w.entry(i);
    M[0][1 + i] = {wi.re, -wi.im};  // (w^H)_i = conj(w_i)
  }
  CLinExpr whf = cvec_inner(w, f_hat);  // w^H f_hat
  M[0][N + 1] = {-whf.re, -whf.im};
  for (int i = 0; i < N; ++i) {
    M[1 + i][1 + i] = {omega, LinExpr(0.0)};
    for (int j = i + 1; j < N; ++j) M[1 + i][1 + j] = CLinExpr();
    M[1 + i][N + 1] = CLinExpr();
  }
  M[N + 1][N + 1] = {mu - delta * delta * omega, LinExpr(0.0)};
  prog.add_psd_hermitian(M);
}

void build_lmi_jam_cap(ConicProgram& prog, const HermVar& Ut, const LinExpr& mu,
                       const LinExpr& omega, const Eigen::VectorXcd& f_hat,
                       double delta) {
  const int N = Ut.n;
  std::vector<std::vector<CLinExpr>> M(N + 1, std::vector<CLinExpr>(N + 1));
  for (int i = 0; i < N; ++i) {
    for (int j = i; j < N; ++j) {
      CLinExpr uij = Ut.entry(i, j);
      M[i][j] = {-uij.re, -uij.im};
      if (i == j) M[i][j].re += omega;
    }
    // -(Ut f_hat)_i = -sum_j Ut_ij f_hat_j
    CLinExpr acc;
    for (int j = 0; j < N; ++j) acc = acc + f_hat(j) * Ut.entry(i, j);
    M[i][N] = {-acc.re, -acc.im};
  }
  M[N][N] = {mu - delta * delta * omega - herm_quad_form(Ut, f_hat), LinExpr(0.0)};
  prog.add_psd_hermitian(M);
}

void add_lambda_min_floor(ConicProgram& prog, const HermVar& Ut,
                          const LinExpr& floor) {
  std::vector<std::vector<CLinExpr>> M(Ut.n, std::vector<CLinExpr>(Ut.n));
  for (int i = 0; i < Ut.n; ++i)
    for (int j = i; j < Ut.n; ++j) {
      M[i][j] = Ut.entry(i, j);
      if (i == j) M[i][j].re -= floor;
    }
  prog.add_psd_hermitian(M);
}

}  // namespace secbeam
