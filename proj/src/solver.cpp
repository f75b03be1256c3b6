#include "secbeam/solver.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>

namespace secbeam {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr double kInf = 1e30;
const double kSqrt2 = std::sqrt(2.0);

int svec_len(int n) { return n * (n + 1) / 2; }

}  // namespace

int ConeDims::vec_dim() const {
  int d = l;
  for (int qi : q) d += qi;
  for (int si : s) d += svec_len(si);
  return d;
}

int ConeDims::degree() const {
  int d = l + static_cast<int>(q.size());
  for (int si : s) d += si;
  return d;
}

VectorXd sym_to_svec(const MatrixXd& M) {
  int n = static_cast<int>(M.rows());
  VectorXd v(svec_len(n));
  int k = 0;
  for (int j = 0; j < n; ++j)
    for (int i = j; i < n; ++i)
      v(k++) = (i == j) ? M(i, j) : kSqrt2 * M(i, j);
  return v;
}

MatrixXd svec_to_sym(const VectorXd& v, int n) {
  MatrixXd M(n, n);
  int k = 0;
  for (int j = 0; j < n; ++j)
    for (int i = j; i < n; ++i) {
      double x = (i == j) ? v(k) : v(k) / kSqrt2;
      M(i, j) = x;
      M(j, i) = x;
      ++k;
    }
  return M;
}

namespace {

struct Layout {
  int l = 0;
  std::vector<int> q, s;
  std::vector<int> qoff, soff;
  int dim = 0, deg = 0;

  static Layout make(const ConeDims& d) {
    Layout L;
    L.l = d.l;
    L.q = d.q;
    L.s = d.s;
    int off = d.l;
    for (int qi : d.q) {
      L.qoff.push_back(off);
      off += qi;
    }
    for (int si : d.s) {
      L.soff.push_back(off);
      off += svec_len(si);
    }
    L.dim = off;
    L.deg = d.degree();
    return L;
  }
};

// Nesterov-Todd scaling state. lambda is the common scaled point W z = W^{-T} s.
struct Scaling {
  VectorXd dlp;                 // LP block: W = diag(dlp)
  std::vector<double> qbeta;
  std::vector<VectorXd> qv;     // SOC: W = beta (2 v v' - J), v'Jv = 1
  std::vector<MatrixXd> r, rti; // PSD: W x = svec(R' X R); rti = R^{-T}
  std::vector<VectorXd> sig;    // PSD scaled spectrum (lambda block = diag(sig))
  VectorXd lambda;

  static Scaling identity(const Layout& L) {
    Scaling W;
    W.dlp = VectorXd::Ones(L.l);
    for (std::size_t k = 0; k < L.q.size(); ++k) {
      W.qbeta.push_back(1.0);
      VectorXd v = VectorXd::Zero(L.q[k]);
      v(0) = 1.0;
      W.qv.push_back(std::move(v));
    }
    for (std::size_t k = 0; k < L.s.size(); ++k) {
      W.r.push_back(MatrixXd::Identity(L.s[k], L.s[k]));
      W.rti.push_back(MatrixXd::Identity(L.s[k], L.s[k]));
      W.sig.push_back(VectorXd::Ones(L.s[k]));
    }
    W.lambda = VectorXd::Ones(L.dim);  // unused for the identity scaling
    return W;
  }
};

enum class WOp { W, WT, Winv, WinvT };

void apply_scaling(const Layout& L, const Scaling& W, WOp op, const VectorXd& x,
                   VectorXd& out) {
  out.resize(L.dim);
  // LP
  for (int i = 0; i < L.l; ++i) {
    double w = W.dlp(i);
    out(i) = (op == WOp::W || op == WOp::WT) ? x(i) * w : x(i) / w;
  }
  // SOC: symmetric, so W == W' and W^{-1} == W^{-T}.
  for (std::size_t k = 0; k < L.q.size(); ++k) {
    int o = L.qoff[k], n = L.q[k];
    const VectorXd& v = W.qv[k];
    auto u = x.segment(o, n);
    double beta = W.qbeta[k];
    if (op == WOp::W || op == WOp::WT) {
      double t = 2.0 * v.dot(u);
      out.segment(o, n) = beta * (t * v);
      out(o) -= beta * u(0);
      out.segment(o + 1, n - 1) += beta * u.segment(1, n - 1);
    } else {
      // W^{-1} = (1/beta) (2 (Jv)(Jv)' - J)
      double t = 2.0 * (v(0) * u(0) - v.segment(1, n - 1).dot(u.segment(1, n - 1)));
      out(o) = (t * v(0) - u(0)) / beta;
      out.segment(o + 1, n - 1) =
          (-t * v.segment(1, n - 1) + u.segment(1, n - 1)) / beta;
    }
  }
  // PSD
  for (std::size_t k = 0; k < L.s.size(); ++k) {
    int o = L.soff[k], n = L.s[k];
    MatrixXd X = svec_to_sym(x.segment(o, svec_len(n)), n);
    const MatrixXd& R = W.r[k];
    const MatrixXd& Rti = W.rti[k];
    MatrixXd Y;
    switch (op) {
      case WOp::W: Y = R.transpose() * X * R; break;
      case WOp::WT: Y = R * X * R.transpose(); break;
      case WOp::Winv: Y = Rti * X * Rti.transpose(); break;
      case WOp::WinvT: Y = Rti.transpose() * X * Rti; break;
    }
    // Symmetrize against roundoff before packing.
    Y = 0.5 * (Y + Y.transpose()).eval();
    out.segment(o, svec_len(n)) = sym_to_svec(Y);
  }
}

bool compute_scaling(const Layout& L, const VectorXd& s, const VectorXd& z,
                     Scaling& W) {
  W.dlp.resize(L.l);
  W.qbeta.assign(L.q.size(), 0.0);
  W.qv.assign(L.q.size(), VectorXd());
  W.r.assign(L.s.size(), MatrixXd());
  W.rti.assign(L.s.size(), MatrixXd());
  W.sig.assign(L.s.size(), VectorXd());
  W.lambda.resize(L.dim);

  for (int i = 0; i < L.l; ++i) {
    if (!(s(i) > 0.0) || !(z(i) > 0.0)) return false;
    W.dlp(i) = std::sqrt(s(i) / z(i));
    W.lambda(i) = std::sqrt(s(i) * z(i));
  }
  for (std::size_t k = 0; k < L.q.size(); ++k) {
    int o = L.qoff[k], n = L.q[k];
    auto sb = s.segment(o, n);
    auto zb = z.segment(o, n);
    double js = sb(0) * sb(0) - sb.segment(1, n - 1).squaredNorm();
    double jz = zb(0) * zb(0) - zb.segment(1, n - 1).squaredNorm();
    if (!(js > 0.0) || !(jz > 0.0) || !(sb(0) > 0.0) || !(zb(0) > 0.0)) return false;
    double a = std::sqrt(js), b = std::sqrt(jz);
    VectorXd sbar = sb / a, zbar = zb / b;
    double gamma = std::sqrt((1.0 + sbar.dot(zbar)) / 2.0);
    if (!(gamma > 0.0)) return false;
    VectorXd v = sbar;
    v(0) += zbar(0);
    v.segment(1, n - 1) -= zbar.segment(1, n - 1);
    v /= (2.0 * gamma);
    // v is the NT scaling point; the operator needs its Jordan square root
    // so that (2 u u' - J)^2 equals the quadratic representation of v.
    v(0) += 1.0;
    v /= std::sqrt(2.0 * v(0));
    W.qbeta[k] = std::sqrt(a / b);
    W.qv[k] = v;
  }
  for (std::size_t k = 0; k < L.s.size(); ++k) {
    int o = L.soff[k], n = L.s[k];
    MatrixXd S = svec_to_sym(s.segment(o, svec_len(n)), n);
    MatrixXd Z = svec_to_sym(z.segment(o, svec_len(n)), n);
    Eigen::LLT<MatrixXd> cs(S), cz(Z);
    if (cs.info() != Eigen::Success || cz.info() != Eigen::Success) return false;
    MatrixXd L1 = cs.matrixL();
    MatrixXd L2 = cz.matrixL();
    Eigen::JacobiSVD<MatrixXd> svd(L2.transpose() * L1,
                                   Eigen::ComputeFullU | Eigen::ComputeFullV);
    VectorXd sv = svd.singularValues();
    if (sv.minCoeff() <= 0.0) return false;
    VectorXd isq = sv.cwiseSqrt().cwiseInverse();
    W.r[k] = L1 * svd.matrixV() * isq.asDiagonal();
    W.rti[k] = L2 * svd.matrixU() * isq.asDiagonal();
    W.sig[k] = sv;
  }
  // lambda = W z (SOC/PSD blocks); fill SOC via apply, PSD via sig.
  VectorXd wz;
  apply_scaling(L, W, WOp::W, z, wz);
  for (std::size_t k = 0; k < L.q.size(); ++k)
    W.lambda.segment(L.qoff[k], L.q[k]) = wz.segment(L.qoff[k], L.q[k]);
  for (std::size_t k = 0; k < L.s.size(); ++k) {
    int o = L.soff[k], n = L.s[k];
    VectorXd lam = VectorXd::Zero(svec_len(n));
    int idx = 0;
    for (int j = 0; j < n; ++j) {
      lam(idx) = W.sig[k](j);
      idx += n - j;
    }
    W.lambda.segment(o, svec_len(n)) = lam;
  }
  return true;
}

// Jordan-algebra product u o v per cone.
void jordan_prod(const Layout& L, const VectorXd& u, const VectorXd& v, VectorXd& out) {
  out.resize(L.dim);
  for (int i = 0; i < L.l; ++i) out(i) = u(i) * v(i);
  for (std::size_t k = 0; k < L.q.size(); ++k) {
    int o = L.qoff[k], n = L.q[k];
    auto ub = u.segment(o, n);
    auto vb = v.segment(o, n);
    out(o) = ub.dot(vb);
    out.segment(o + 1, n - 1) =
        ub(0) * vb.segment(1, n - 1) + vb(0) * ub.segment(1, n - 1);
  }
  for (std::size_t k = 0; k < L.s.size(); ++k) {
    int o = L.soff[k], n = L.s[k];
    MatrixXd U = svec_to_sym(u.segment(o, svec_len(n)), n);
    MatrixXd V = svec_to_sym(v.segment(o, svec_len(n)), n);
    MatrixXd P = 0.5 * (U * V + V * U);
    out.segment(o, svec_len(n)) = sym_to_svec(P);
  }
}

// Solve lambda o x = d for x, where lambda is the scaled point (PSD blocks
// diagonal with spectrum sig).
bool jordan_solve(const Layout& L, const Scaling& W, const VectorXd& d, VectorXd& x) {
  x.resize(L.dim);
  for (int i = 0; i < L.l; ++i) {
    if (W.lambda(i) == 0.0) return false;
    x(i) = d(i) / W.lambda(i);
  }
  for (std::size_t k = 0; k < L.q.size(); ++k) {
    int o = L.qoff[k], n = L.q[k];
    auto lb = W.lambda.segment(o, n);
    auto db = d.segment(o, n);
    double det = lb(0) * lb(0) - lb.segment(1, n - 1).squaredNorm();
    if (det <= 0.0 || lb(0) <= 0.0) return false;
    double x0 = (lb(0) * db(0) - lb.segment(1, n - 1).dot(db.segment(1, n - 1))) / det;
    x(o) = x0;
    x.segment(o + 1, n - 1) =
        (db.segment(1, n - 1) - x0 * lb.segment(1, n - 1)) / lb(0);
  }
  for (std::size_t k = 0; k < L.s.size(); ++k) {
    int o = L.soff[k], n = L.s[k];
    const VectorXd& sg = W.sig[k];
    MatrixXd D = svec_to_sym(d.segment(o, svec_len(n)), n);
    MatrixXd X(n, n);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) X(i, j) = 2.0 * D(i, j) / (sg(i) + sg(j));
    x.segment(o, svec_len(n)) = sym_to_svec(X);
  }
  return true;
}

void cone_identity(const Layout& L, VectorXd& e) {
  e = VectorXd::Zero(L.dim);
  for (int i = 0; i < L.l; ++i) e(i) = 1.0;
  for (std::size_t k = 0; k < L.q.size(); ++k) e(L.qoff[k]) = 1.0;
  for (std::size_t k = 0; k < L.s.size(); ++k) {
    int o = L.soff[k], n = L.s[k];
    int idx = 0;
    for (int j = 0; j < n; ++j) {
      e(o + idx) = 1.0;
      idx += n - j;
    }
  }
}

// Minimum "eigenvalue" of a cone vector (distance to the boundary in the
// spectral sense); used for cold-start shifts.
double cone_min_eig(const Layout& L, const VectorXd& x) {
  double m = std::numeric_limits<double>::infinity();
  for (int i = 0; i < L.l; ++i) m = std::min(m, x(i));
  for (std::size_t k = 0; k < L.q.size(); ++k) {
    int o = L.qoff[k], n = L.q[k];
    m = std::min(m, x(o) - x.segment(o + 1, n - 1).norm());
  }
  for (std::size_t k = 0; k < L.s.size(); ++k) {
    int o = L.soff[k], n = L.s[k];
    MatrixXd X = svec_to_sym(x.segment(o, svec_len(n)), n);
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(X, Eigen::EigenvaluesOnly);
    m = std::min(m, es.eigenvalues().minCoeff());
  }
  return m;
}

double smallest_positive_root(double a, double b, double c) {
  // a t^2 + b t + c = 0 with c > 0; returns +inf when no positive root.
  if (std::abs(a) < 1e-300) {
    if (b >= 0.0) return kInf;
    return -c / b;
  }
  double disc = b * b - 4.0 * a * c;
  if (a > 0.0) {
    if (disc < 0.0) return kInf;
    double sq = std::sqrt(disc);
    double t1 = (-b - sq) / (2.0 * a);
    double t2 = (-b + sq) / (2.0 * a);
    if (t1 > 0.0) return t1;
    if (t2 > 0.0) return t2;
    return kInf;
  }
  // a < 0: parabola opens down, f(0) = c > 0, so exactly one positive root.
  double sq = std::sqrt(std::max(0.0, disc));
  // Numerically stable choice of the positive root.
  double q = -0.5 * (b - sq);  // b - sq <= 0 here
  return c / q > 0.0 ? c / q : kInf;
}

// Largest step t with lambda + t * dir staying in the cone.
double step_to_boundary(const Layout& L, const Scaling& W, const VectorXd& dir) {
  double t = kInf;
  const VectorXd& lam = W.lambda;
  for (int i = 0; i < L.l; ++i)
    if (dir(i) < 0.0) t = std::min(t, -lam(i) / dir(i));
  for (std::size_t k = 0; k < L.q.size(); ++k) {
    int o = L.qoff[k], n = L.q[k];
    auto lb = lam.segment(o, n);
    auto db = dir.segment(o, n);
    double a = db(0) * db(0) - db.segment(1, n - 1).squaredNorm();
    double b = 2.0 * (lb(0) * db(0) - lb.segment(1, n - 1).dot(db.segment(1, n - 1)));
    double c = lb(0) * lb(0) - lb.segment(1, n - 1).squaredNorm();
    t = std::min(t, smallest_positive_root(a, b, c));
  }
  for (std::size_t k = 0; k < L.s.size(); ++k) {
    int o = L.soff[k], n = L.s[k];
    const VectorXd& sg = W.sig[k];
    MatrixXd D = svec_to_sym(dir.segment(o, svec_len(n)), n);
    MatrixXd M(n, n);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        M(i, j) = D(i, j) / std::sqrt(sg(i) * sg(j));
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(M, Eigen::EigenvaluesOnly);
    double mmin = es.eigenvalues().minCoeff();
    if (mmin < 0.0) t = std::min(t, -1.0 / mmin);
  }
  return t;
}

// KKT system [0 G'; G -W'W] (ux, uz) = (bx, bz), eliminated through
// H = G' (W'W)^{-1} G = B'B with B = W^{-T} G.
class Kkt {
 public:
  explicit Kkt(const MatrixXd& G) : G_(G) {}

  bool factor(const Layout& L, const Scaling& W) {
    const int n = static_cast<int>(G_.cols());
    B_.resize(G_.rows(), n);
    VectorXd col;
    for (int j = 0; j < n; ++j) {
      apply_scaling(L, W, WOp::WinvT, G_.col(j), col);
      B_.col(j) = col;
    }
    MatrixXd H = MatrixXd::Zero(n, n);
    H.selfadjointView<Eigen::Lower>().rankUpdate(B_.transpose());
    double scale = H.diagonal().maxCoeff();
    reg_ = std::max(1e-14 * std::max(scale, 1.0), 1e-300);
    H.diagonal().array() += reg_;
    llt_.compute(H.selfadjointView<Eigen::Lower>());
    return llt_.info() == Eigen::Success;
  }

  void solve(const Layout& L, const Scaling& W, const VectorXd& bx,
             const VectorXd& bz, VectorXd& ux, VectorXd& uz, int refine) const {
    solve_once(L, W, bx, bz, ux, uz);
    for (int r = 0; r < refine; ++r) {
      // Residuals of the unreduced system.
      VectorXd wuz, wwuz;
      apply_scaling(L, W, WOp::W, uz, wuz);
      apply_scaling(L, W, WOp::WT, wuz, wwuz);
      VectorXd r1 = bx - G_.transpose() * uz;
      VectorXd r2 = bz - (G_ * ux - wwuz);
      VectorXd dx, dz;
      solve_once(L, W, r1, r2, dx, dz);
      ux += dx;
      uz += dz;
    }
  }

 private:
  void solve_once(const Layout& L, const Scaling& W, const VectorXd& bx,
                  const VectorXd& bz, VectorXd& ux, VectorXd& uz) const {
    VectorXd wbz;
    apply_scaling(L, W, WOp::WinvT, bz, wbz);
    VectorXd rhs = bx + B_.transpose() * wbz;
    ux = llt_.solve(rhs);
    VectorXd t = B_ * ux - wbz;
    apply_scaling(L, W, WOp::Winv, t, uz);
  }

  const MatrixXd& G_;
  MatrixXd B_;
  Eigen::LLT<MatrixXd> llt_;
  double reg_ = 0.0;
};

}  // namespace

IpmResult solve_conelp(const VectorXd& c, const MatrixXd& G, const VectorXd& h,
                       const ConeDims& dims, const IpmOptions& opts) {
  IpmResult res;
  const Layout L = Layout::make(dims);
  const int n = static_cast<int>(c.size());
  const int m = L.dim;
  if (G.rows() != m || G.cols() != n || h.size() != m) {
    res.message = "dimension mismatch between G/h and cone layout";
    return res;
  }

  VectorXd e;
  cone_identity(L, e);
  const double hnorm = std::max(1.0, h.norm());
  const double cnorm = std::max(1.0, c.norm());

  // Cold start from the identity-scaling KKT solves.
  Scaling Wid = Scaling::identity(L);
  Kkt kkt(G);
  if (!kkt.factor(L, Wid)) {
    res.message = "initial KKT factorization failed";
    return res;
  }
  VectorXd x, z0, s, z;
  kkt.solve(L, Wid, VectorXd::Zero(n), h, x, z0, opts.refine);
  s = -(G * x - h);
  double me = cone_min_eig(L, s);
  if (me < 1e-8 * std::max(1.0, s.norm()))
    s += (1.0 - me + opts.init_shift) * e;
  else if (opts.init_shift > 0.0)
    s += opts.init_shift * e;

  VectorXd xd, zd;
  kkt.solve(L, Wid, -c, VectorXd::Zero(m), xd, zd, opts.refine);
  z = G * xd;
  me = cone_min_eig(L, z);
  if (me < 1e-8 * std::max(1.0, z.norm()))
    z += (1.0 - me + opts.init_shift) * e;
  else if (opts.init_shift > 0.0)
    z += opts.init_shift * e;

  double tau = 1.0, kappa = 1.0;

  Scaling W;
  VectorXd rx(n), rz(m);
  VectorXd x2, z2, x1, z1, dtmp, lam2, ds_a, dz_a, dx, dz, ds;

  // Best normalized iterate seen so far; reported if the run ends without
  // reaching full tolerance (the adapter re-verifies residuals anyway).
  double best_score = kInf;
  VectorXd bx_, bs_, bz_;
  double bpres = kInf, bdres = kInf, bgap = kInf, brelgap = kInf;
  auto finish_with_best = [&](IpmStatus fallback, const char* why) {
    const double ftol = 100.0 * opts.feastol;
    const double gtol = 100.0 * opts.reltol;
    if (bpres <= ftol && bdres <= ftol && (bgap <= gtol || brelgap <= gtol)) {
      res.status = IpmStatus::optimal;
      res.x = bx_;
      res.s = bs_;
      res.z = bz_;
      res.pres = bpres;
      res.dres = bdres;
      res.gap = bgap;
      res.relgap = brelgap;
      res.message = std::string("reduced-accuracy optimum (") + why + ")";
    } else {
      res.status = fallback;
      res.message = why;
    }
  };

  for (int iter = 0; iter <= opts.max_iters; ++iter) {
    rx = G.transpose() * z + c * tau;
    rz = s + G * x - h * tau;
    double cx = c.dot(x), hz = h.dot(z);
    double rtau = kappa + cx + hz;

    double pcost = cx / tau;
    double dcost = -hz / tau;
    double gap = s.dot(z) / (tau * tau);
    double relgap = kInf;
    if (pcost < 0.0)
      relgap = gap / (-pcost);
    else if (dcost > 0.0)
      relgap = gap / dcost;
    double pres = (rz / tau).norm() / hnorm;
    double dres = (rx / tau).norm() / cnorm;

    res.pobj = pcost;
    res.dobj = dcost;
    res.gap = gap;
    res.relgap = relgap;
    res.pres = pres;
    res.dres = dres;
    res.iters = iter;

    static const bool trace = std::getenv("SECBEAM_IPM_TRACE") != nullptr;
    if (trace)
      std::fprintf(stderr,
                   "ipm it=%2d pcost=% .6e dcost=% .6e gap=%.2e pres=%.2e "
                   "dres=%.2e tau=%.2e kappa=%.2e\n",
                   iter, pcost, dcost, gap, pres, dres, tau, kappa);

    if (pres <= opts.feastol && dres <= opts.feastol &&
        (gap <= opts.abstol || relgap <= opts.reltol)) {
      res.status = IpmStatus::optimal;
      res.x = x / tau;
      res.s = s / tau;
      res.z = z / tau;
      return res;
    }
    double score = std::max({pres, dres, std::min(gap, relgap)});
    if (score < best_score) {
      best_score = score;
      bx_ = x / tau;
      bs_ = s / tau;
      bz_ = z / tau;
      bpres = pres;
      bdres = dres;
      bgap = gap;
      brelgap = relgap;
    }
    // Certificates. Primal infeasibility: G'z ~ 0 with h'z < 0.
    if (hz < 0.0) {
      double pinf = (G.transpose() * z).norm() / cnorm / (-hz);
      if (pinf <= opts.feastol) {
        res.status = IpmStatus::primal_infeasible;
        res.z = z / (-hz);
        res.message = "primal infeasibility certificate found";
        return res;
      }
    }
    // Dual infeasibility (primal unboundedness): Gx + s ~ 0 with c'x < 0.
    if (cx < 0.0) {
      double dinf = (G * x + s).norm() / hnorm / (-cx);
      if (dinf <= opts.feastol) {
        res.status = IpmStatus::dual_infeasible;
        res.x = x / (-cx);
        res.message = "dual infeasibility certificate found";
        return res;
      }
    }
    if (iter == opts.max_iters) break;

    if (!compute_scaling(L, s, z, W)) {
      finish_with_best(IpmStatus::numerical_failure,
                       "scaling breakdown (iterate left the cone interior)");
      return res;
    }
    double mu = (s.dot(z) + tau * kappa) / (L.deg + 1);
    if (!kkt.factor(L, W)) {
      finish_with_best(IpmStatus::numerical_failure, "KKT factorization failed");
      return res;
    }
    kkt.solve(L, W, -c, h, x2, z2, opts.refine);

    jordan_prod(L, W.lambda, W.lambda, lam2);

    double alpha = 0.0, sigma = 0.0, dtau = 0.0, dkappa = 0.0;
    for (int pass = 0; pass < 2; ++pass) {
      double eta = (pass == 0) ? 1.0 : 1.0 - sigma;
      VectorXd d = -lam2;
      double dk = -tau * kappa;
      if (pass == 1) {
        VectorXd corr;
        jordan_prod(L, ds_a, dz_a, corr);
        d += sigma * mu * e - corr;
        dk += sigma * mu - dtau * dkappa;
      }
      if (!jordan_solve(L, W, d, dtmp)) {
        finish_with_best(IpmStatus::numerical_failure, "Jordan solve breakdown");
        return res;
      }
      VectorXd wd;
      apply_scaling(L, W, WOp::WT, dtmp, wd);
      VectorXd bz = -eta * rz - wd;
      kkt.solve(L, W, -eta * rx, bz, x1, z1, opts.refine);

      double den = kappa / tau - c.dot(x2) - h.dot(z2);
      if (std::abs(den) < 1e-300) {
        finish_with_best(IpmStatus::numerical_failure, "degenerate tau step");
        return res;
      }
      dtau = (eta * rtau + c.dot(x1) + h.dot(z1) + dk / tau) / den;
      dx = x1 + dtau * x2;
      dz = z1 + dtau * z2;
      // W^{-T} ds = dtmp - W dz; ds = W'(dtmp - W dz)
      VectorXd wdz;
      apply_scaling(L, W, WOp::W, dz, wdz);
      VectorXd ds_scaled = dtmp - wdz;
      apply_scaling(L, W, WOp::WT, ds_scaled, ds);
      dkappa = (dk - kappa * dtau) / tau;

      double t = std::min(step_to_boundary(L, W, ds_scaled),
                          step_to_boundary(L, W, wdz));
      if (dtau < 0.0) t = std::min(t, -tau / dtau);
      if (dkappa < 0.0) t = std::min(t, -kappa / dkappa);
      if (pass == 0) {
        double a_aff = std::min(1.0, t);
        sigma = std::pow(1.0 - a_aff, 3);
        ds_a = ds_scaled;
        dz_a = wdz;
      } else {
        alpha = std::min(1.0, opts.step_frac * t);
      }
    }

    if (alpha < 1e-10) {
      finish_with_best(IpmStatus::numerical_failure, "step length collapsed");
      return res;
    }
    static const bool trace2 = std::getenv("SECBEAM_IPM_TRACE") != nullptr;
    if (trace2)
      std::fprintf(stderr,
                   "    step alpha=%.3e sigma=%.3e dtau=%.3e dkappa=%.3e "
                   "smin(s+ads)=%.3e smin(z+adz)=%.3e\n",
                   alpha, sigma, dtau, dkappa,
                   cone_min_eig(L, VectorXd(s + alpha * ds)),
                   cone_min_eig(L, VectorXd(z + alpha * dz)));
    x += alpha * dx;
    s += alpha * ds;
    z += alpha * dz;
    tau += alpha * dtau;
    kappa += alpha * dkappa;
    if (!(tau > 0.0) || !(kappa > 0.0)) {
      finish_with_best(IpmStatus::numerical_failure,
                       "tau/kappa left the positive orthant");
      return res;
    }
    // The model is homogeneous: rescaling the whole iterate moves it along
    // an equivalence ray. Pulling tau/kappa back toward 1 keeps the absolute
    // magnitudes of s and z bounded, which the dense KKT solve needs.
    double ray = std::max({tau, kappa, 1.0});
    if (ray > 1.0) {
      x /= ray;
      s /= ray;
      z /= ray;
      tau /= ray;
      kappa /= ray;
    }
  }

  finish_with_best(IpmStatus::iteration_limit, "iteration limit reached");
  if (res.status == IpmStatus::iteration_limit) {
    res.x = bx_.size() ? bx_ : VectorXd(x / tau);
    res.s = bs_.size() ? bs_ : VectorXd(s / tau);
    res.z = bz_.size() ? bz_ : VectorXd(z / tau);
  }
  return res;
}

}  // namespace secbeam
