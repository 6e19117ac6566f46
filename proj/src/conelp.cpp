#include "dcpep/conelp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <sstream>
#include <utility>

#include "dcpep/errors.hpp"

namespace dcpep::conelp {

namespace {

constexpr double kSqrt2 = 1.4142135623730950488;
constexpr double kInf = std::numeric_limits<double>::infinity();

int tri(int n) { return n * (n + 1) / 2; }

std::string num(double v) {
  std::ostringstream out;
  out << v;
  return out.str();
}

}  // namespace

int ConeDims::svec_total() const {
  int total = 0;
  for (int n : psd) total += tri(n);
  return total;
}

int ConeDims::order() const {
  int total = nonneg;
  for (int n : psd) total += n;
  return total;
}

VectorXd svec(const MatrixXd& S) {
  const int n = static_cast<int>(S.rows());
  VectorXd v(tri(n));
  int idx = 0;
  for (int j = 0; j < n; ++j) {
    v[idx++] = S(j, j);
    for (int i = j + 1; i < n; ++i) {
      v[idx++] = kSqrt2 * 0.5 * (S(i, j) + S(j, i));
    }
  }
  return v;
}

MatrixXd smat(const VectorXd& v, int n) {
  if (v.size() != tri(n)) throw DimensionMismatch("smat: packed length mismatch");
  MatrixXd S(n, n);
  int idx = 0;
  for (int j = 0; j < n; ++j) {
    S(j, j) = v[idx++];
    for (int i = j + 1; i < n; ++i) {
      S(i, j) = S(j, i) = v[idx++] / kSqrt2;
    }
  }
  return S;
}

MatrixXd sym_kron(const MatrixXd& W) {
  const int n = static_cast<int>(W.rows());
  const int sv = tri(n);
  std::vector<int> ri(sv), rj(sv);
  std::vector<double> fac(sv);
  int idx = 0;
  for (int j = 0; j < n; ++j) {
    for (int i = j; i < n; ++i) {
      ri[idx] = i;
      rj[idx] = j;
      fac[idx] = (i == j) ? 1.0 : kSqrt2;
      ++idx;
    }
  }
  MatrixXd K(sv, sv);
  for (int a = 0; a < sv; ++a) {
    const int i = ri[a], j = rj[a];
    for (int b = 0; b <= a; ++b) {
      const int k = ri[b], l = rj[b];
      const double value = 0.5 * fac[a] * fac[b] *
                           (W(i, k) * W(j, l) + W(i, l) * W(j, k));
      K(a, b) = value;
      K(b, a) = value;
    }
  }
  return K;
}

namespace {

struct Layout {
  int nonneg = 0;
  std::vector<int> ns;
  std::vector<int> off;
  int m = 0;

  explicit Layout(const ConeDims& dims) : nonneg(dims.nonneg), ns(dims.psd) {
    int pos = nonneg;
    for (int n : ns) {
      off.push_back(pos);
      pos += tri(n);
    }
    m = pos;
  }
};

struct BlockScaling {
  MatrixXd R, Rti;  // Rti = R^{-T}
  MatrixXd Wm, Wi;  // Wm = R R', Wi = Wm^{-1}
  VectorXd lam;
};

// Nesterov-Todd scaling W with s = W' lambda, z = W^{-1} lambda.
struct Scaling {
  VectorXd wl, lam_l;
  std::vector<BlockScaling> blocks;
};

Scaling identity_scaling(const Layout& lay) {
  Scaling W;
  W.wl = VectorXd::Ones(lay.nonneg);
  W.lam_l = VectorXd::Ones(lay.nonneg);
  for (int n : lay.ns) {
    BlockScaling b;
    b.R = MatrixXd::Identity(n, n);
    b.Rti = b.Wm = b.Wi = b.R;
    b.lam = VectorXd::Ones(n);
    W.blocks.push_back(std::move(b));
  }
  return W;
}

Eigen::LLT<MatrixXd> chol_with_jitter(const MatrixXd& M, const char* what) {
  const double scale = std::max(1e-300, M.diagonal().cwiseAbs().maxCoeff());
  double jitter = 0.0;
  for (int attempt = 0; attempt < 7; ++attempt) {
    MatrixXd Mj = M;
    if (jitter > 0.0) Mj.diagonal().array() += jitter;
    Eigen::LLT<MatrixXd> llt(Mj);
    if (llt.info() == Eigen::Success) return llt;
    jitter = (jitter == 0.0) ? 1e-14 * scale : jitter * 100.0;
  }
  throw FactorizationError(std::string("cholesky failed: ") + what);
}

Scaling compute_scaling(const Layout& lay, const VectorXd& s, const VectorXd& z) {
  Scaling W;
  W.wl = (s.head(lay.nonneg).array() / z.head(lay.nonneg).array()).sqrt();
  W.lam_l = (s.head(lay.nonneg).array() * z.head(lay.nonneg).array()).sqrt();
  for (size_t bi = 0; bi < lay.ns.size(); ++bi) {
    const int n = lay.ns[bi];
    const MatrixXd S = smat(s.segment(lay.off[bi], tri(n)), n);
    const MatrixXd Z = smat(z.segment(lay.off[bi], tri(n)), n);
    const MatrixXd Ls = chol_with_jitter(S, "nt scaling (s block)").matrixL();
    const MatrixXd Lz = chol_with_jitter(Z, "nt scaling (z block)").matrixL();
    Eigen::JacobiSVD<MatrixXd> svd(Lz.transpose() * Ls,
                                   Eigen::ComputeThinU | Eigen::ComputeThinV);
    const VectorXd sig = svd.singularValues();
    if (!(sig.minCoeff() > 0.0)) {
      throw FactorizationError("nt scaling: vanishing singular value");
    }
    const VectorXd isqrt = sig.array().rsqrt();
    BlockScaling b;
    b.R = Ls * svd.matrixV() * isqrt.asDiagonal();
    b.Rti = Lz * svd.matrixU() * isqrt.asDiagonal();
    b.Wm = b.R * b.R.transpose();
    b.Wi = b.Rti * b.Rti.transpose();
    b.lam = sig;
    W.blocks.push_back(std::move(b));
  }
  return W;
}

enum class WOp { W, WT, WinvT, W2, W2inv };

VectorXd apply_w(const Layout& lay, const Scaling& W, WOp op, const VectorXd& v) {
  VectorXd out = v;
  if (lay.nonneg > 0) {
    auto head = out.head(lay.nonneg);
    switch (op) {
      case WOp::W:
      case WOp::WT:
        head.array() *= W.wl.array();
        break;
      case WOp::WinvT:
        head.array() /= W.wl.array();
        break;
      case WOp::W2:
        head.array() *= W.wl.array().square();
        break;
      case WOp::W2inv:
        head.array() /= W.wl.array().square();
        break;
    }
  }
  for (size_t bi = 0; bi < lay.ns.size(); ++bi) {
    const auto& b = W.blocks[bi];
    const int n = lay.ns[bi];
    const MatrixXd V = smat(v.segment(lay.off[bi], tri(n)), n);
    MatrixXd P;
    switch (op) {
      case WOp::W:
        P = b.R.transpose() * V * b.R;
        break;
      case WOp::WT:
        P = b.R * V * b.R.transpose();
        break;
      case WOp::WinvT:
        P = b.Rti.transpose() * V * b.Rti;
        break;
      case WOp::W2:
        P = b.Wm * V * b.Wm;
        break;
      case WOp::W2inv:
        P = b.Wi * V * b.Wi;
        break;
    }
    out.segment(lay.off[bi], tri(n)) = svec(P);
  }
  return out;
}

VectorXd cone_identity(const Layout& lay) {
  VectorXd e = VectorXd::Zero(lay.m);
  e.head(lay.nonneg).setOnes();
  for (size_t bi = 0; bi < lay.ns.size(); ++bi) {
    int idx = lay.off[bi];
    for (int j = 0; j < lay.ns[bi]; ++j) {
      e[idx] = 1.0;
      idx += lay.ns[bi] - j;
    }
  }
  return e;
}

// lambda o lambda for the scaled point stored in W.
VectorXd lambda_sq(const Layout& lay, const Scaling& W) {
  VectorXd out = VectorXd::Zero(lay.m);
  out.head(lay.nonneg) = W.lam_l.array().square();
  for (size_t bi = 0; bi < lay.ns.size(); ++bi) {
    int idx = lay.off[bi];
    const int n = lay.ns[bi];
    for (int j = 0; j < n; ++j) {
      out[idx] = W.blocks[bi].lam[j] * W.blocks[bi].lam[j];
      idx += n - j;
    }
  }
  return out;
}

// Solves lambda o u = v for u.
VectorXd lambda_solve(const Layout& lay, const Scaling& W, const VectorXd& v) {
  VectorXd out = v;
  out.head(lay.nonneg).array() /= W.lam_l.array();
  for (size_t bi = 0; bi < lay.ns.size(); ++bi) {
    const int n = lay.ns[bi];
    const VectorXd& lam = W.blocks[bi].lam;
    MatrixXd V = smat(v.segment(lay.off[bi], tri(n)), n);
    for (int c = 0; c < n; ++c) {
      for (int r = 0; r < n; ++r) {
        V(r, c) *= 2.0 / (lam[r] + lam[c]);
      }
    }
    out.segment(lay.off[bi], tri(n)) = svec(V);
  }
  return out;
}

// Jordan product u o v in the scaled space.
VectorXd jordan_product(const Layout& lay, const VectorXd& u, const VectorXd& v) {
  VectorXd out = VectorXd::Zero(lay.m);
  out.head(lay.nonneg) = u.head(lay.nonneg).array() * v.head(lay.nonneg).array();
  for (size_t bi = 0; bi < lay.ns.size(); ++bi) {
    const int n = lay.ns[bi];
    const MatrixXd U = smat(u.segment(lay.off[bi], tri(n)), n);
    const MatrixXd V = smat(v.segment(lay.off[bi], tri(n)), n);
    const MatrixXd P = 0.5 * (U * V + V * U);
    out.segment(lay.off[bi], tri(n)) = svec(P);
  }
  return out;
}

double min_eig(const Layout& lay, const VectorXd& v) {
  double lowest = kInf;
  if (lay.nonneg > 0) lowest = std::min(lowest, v.head(lay.nonneg).minCoeff());
  for (size_t bi = 0; bi < lay.ns.size(); ++bi) {
    const int n = lay.ns[bi];
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(
        smat(v.segment(lay.off[bi], tri(n)), n), Eigen::EigenvaluesOnly);
    lowest = std::min(lowest, es.eigenvalues().minCoeff());
  }
  return lowest;
}

// Largest t with lambda + t rho in the cone; lambda is the scaled point in W.
double max_step(const Layout& lay, const Scaling& W, const VectorXd& rho) {
  double tmax = kInf;
  for (int i = 0; i < lay.nonneg; ++i) {
    if (rho[i] < 0.0) tmax = std::min(tmax, -W.lam_l[i] / rho[i]);
  }
  for (size_t bi = 0; bi < lay.ns.size(); ++bi) {
    const int n = lay.ns[bi];
    const VectorXd& lam = W.blocks[bi].lam;
    MatrixXd M = smat(rho.segment(lay.off[bi], tri(n)), n);
    for (int c = 0; c < n; ++c) {
      for (int r = 0; r < n; ++r) {
        M(r, c) /= std::sqrt(lam[r] * lam[c]);
      }
    }
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(M, Eigen::EigenvaluesOnly);
    const double emin = es.eigenvalues().minCoeff();
    if (emin < 0.0) tmax = std::min(tmax, -1.0 / emin);
  }
  return tmax;
}

// Cholesky with symmetric diagonal equilibration. Near convergence the
// reduced matrix mixes coordinate blocks whose scales differ by many orders
// of magnitude, so the ridge fallback must be relative to each coordinate's
// own diagonal rather than to the largest diagonal entry.
class EquilibratedChol {
 public:
  void compute(const MatrixXd& M, const char* what) {
    const int n = static_cast<int>(M.rows());
    // Structurally empty columns leave zero diagonal entries; flooring the
    // scale keeps their solution components large but finite.
    const double floor =
        std::max(1e-300, 5e-32 * M.diagonal().maxCoeff());
    d_ = M.diagonal().cwiseMax(floor).cwiseSqrt().cwiseInverse();
    scaled_.resize(n, n);
    for (int c = 0; c < n; ++c) {
      for (int r = c; r < n; ++r) {
        scaled_(r, c) = M(r, c) * d_[r] * d_[c];
      }
    }
    double ridge = 0.0;
    for (int attempt = 0; attempt < 8; ++attempt) {
      if (ridge > 0.0) scaled_.diagonal().array() += ridge;
      llt_.compute(scaled_);
      if (llt_.info() == Eigen::Success) return;
      ridge = (ridge == 0.0) ? 1e-15 : ridge * 100.0;
    }
    throw FactorizationError(std::string("cholesky failed: ") + what);
  }

  VectorXd solve(const VectorXd& b) const {
    return d_.asDiagonal() * llt_.solve((d_.array() * b.array()).matrix());
  }

 private:
  VectorXd d_;
  MatrixXd scaled_;
  Eigen::LLT<MatrixXd> llt_;
};

// KKT system for the reduced Newton equations:
//   A'uy + G'uz = rx,  A ux = ry,  G ux - W'W uz = rz
// solved by eliminating uz through H = G' (W'W)^{-1} G.
class Kkt {
 public:
  Kkt(const Problem& prob, const Layout& lay)
      : prob_(prob), lay_(lay), n_(static_cast<int>(prob.G.cols())),
        p_(static_cast<int>(prob.A.rows())) {
    Gl_ = prob.G.topRows(lay.nonneg);
    Glt_ = Gl_.transpose();
    if (p_ > 0) At_ = prob.A.transpose();

    // A psd block whose rows of G form a distinct "-1 selection" (one entry
    // of -1 per row, ascending columns) contributes sym_kron(Wi) directly to
    // H; anything else takes the dense path.
    sel_.resize(lay.ns.size());
    dense_g_.resize(lay.ns.size());
    dense_gt_.resize(lay.ns.size());
    for (size_t bi = 0; bi < lay.ns.size(); ++bi) {
      const int sv = tri(lay.ns[bi]);
      const auto block = prob.G.middleRows(lay.off[bi], sv);
      std::vector<int> cols(sv, -1);
      bool selection = true;
      for (int r = 0; r < sv && selection; ++r) {
        for (int c = 0; c < n_; ++c) {
          const double value = block(r, c);
          if (value == 0.0) continue;
          if (value != -1.0 || cols[r] != -1) {
            selection = false;
            break;
          }
          cols[r] = c;
        }
        if (cols[r] == -1) selection = false;
        if (r > 0 && selection && cols[r] <= cols[r - 1]) selection = false;
      }
      if (selection) {
        sel_[bi] = std::move(cols);
      } else {
        dense_g_[bi] = block;
        dense_gt_[bi] = block.transpose();
      }
    }
    H_.resize(n_, n_);
    if (lay.nonneg > 0) scratch_.resize(n_, lay.nonneg);
  }

  void factor(const Scaling& W) {
    W_ = &W;
    H_.setZero();
    if (lay_.nonneg > 0) {
      const Eigen::ArrayXd droot = W.wl.array().inverse();
      scratch_ = Glt_;
      for (int j = 0; j < lay_.nonneg; ++j) scratch_.col(j) *= droot[j];
      H_.selfadjointView<Eigen::Lower>().rankUpdate(scratch_);
    }
    for (size_t bi = 0; bi < lay_.ns.size(); ++bi) {
      const MatrixXd K = sym_kron(W.blocks[bi].Wi);
      if (!sel_[bi].empty()) {
        const auto& cols = sel_[bi];
        const int sv = static_cast<int>(cols.size());
        for (int a = 0; a < sv; ++a) {
          for (int b = 0; b <= a; ++b) {
            H_(cols[a], cols[b]) += K(a, b);
          }
        }
      } else {
        const MatrixXd KG = K * dense_g_[bi];
        const MatrixXd contrib = dense_gt_[bi] * KG;
        H_.triangularView<Eigen::Lower>() += contrib;
      }
    }
    chol_.compute(H_, "kkt reduction");
    if (p_ > 0) {
      MatrixXd HA(n_, p_);
      for (int j = 0; j < p_; ++j) HA.col(j) = chol_.solve(At_.col(j));
      const MatrixXd SA = prob_.A * HA;
      chol_a_.compute(SA, "equality schur complement");
    }
  }

  // Solves the reduced system with iterative refinement and returns the
  // residual of the best direction found, relative to the rhs magnitude.
  // The caller uses this to detect when the factorization has lost too much
  // accuracy for the direction to be trusted.
  double solve(VectorXd& ux, VectorXd& uy, VectorXd& uz, const VectorXd& rx,
               const VectorXd& ry, const VectorXd& rz) const {
    solve_basic(ux, uy, uz, rx, ry, rz);
    const double rhs_norm =
        std::max({1.0, rx.lpNorm<Eigen::Infinity>(),
                  ry.size() ? ry.lpNorm<Eigen::Infinity>() : 0.0,
                  rz.lpNorm<Eigen::Infinity>()});
    VectorXd bx = ux, by = uy, bz = uz, cx, cy, cz;
    double best_err = kInf;
    constexpr int kRefinePasses = 12;
    for (int pass = 0; pass <= kRefinePasses; ++pass) {
      VectorXd r1 = rx - apply_gt(uz);
      if (p_ > 0) r1 -= At_ * uy;
      VectorXd r2 = ry;
      if (p_ > 0) r2 -= prob_.A * ux;
      VectorXd r3 = rz - apply_g(ux) + apply_w(lay_, *W_, WOp::W2, uz);
      const double err =
          std::max({r1.lpNorm<Eigen::Infinity>(),
                    r2.size() ? r2.lpNorm<Eigen::Infinity>() : 0.0,
                    r3.lpNorm<Eigen::Infinity>()});
      if (!std::isfinite(err)) break;
      if (err < best_err) {
        best_err = err;
        bx = ux;
        by = uy;
        bz = uz;
      }
      if (pass == kRefinePasses) break;
      if (err <= 1e-14 * rhs_norm || err > 4.0 * best_err) break;
      solve_basic(cx, cy, cz, r1, r2, r3);
      ux += cx;
      if (p_ > 0) uy += cy;
      uz += cz;
    }
    ux = bx;
    uy = by;
    uz = bz;
    return best_err / rhs_norm;
  }

  VectorXd apply_g(const VectorXd& x) const {
    VectorXd out(lay_.m);
    if (lay_.nonneg > 0) out.head(lay_.nonneg).noalias() = Gl_ * x;
    for (size_t bi = 0; bi < lay_.ns.size(); ++bi) {
      const int sv = tri(lay_.ns[bi]);
      auto seg = out.segment(lay_.off[bi], sv);
      if (!sel_[bi].empty()) {
        for (int r = 0; r < sv; ++r) seg[r] = -x[sel_[bi][r]];
      } else {
        seg.noalias() = dense_g_[bi] * x;
      }
    }
    return out;
  }

  VectorXd apply_gt(const VectorXd& v) const {
    VectorXd out = VectorXd::Zero(n_);
    if (lay_.nonneg > 0) out.noalias() = Glt_ * v.head(lay_.nonneg);
    for (size_t bi = 0; bi < lay_.ns.size(); ++bi) {
      const int sv = tri(lay_.ns[bi]);
      const auto seg = v.segment(lay_.off[bi], sv);
      if (!sel_[bi].empty()) {
        for (int r = 0; r < sv; ++r) out[sel_[bi][r]] -= seg[r];
      } else {
        out.noalias() += dense_gt_[bi] * seg;
      }
    }
    return out;
  }

 private:
  void solve_basic(VectorXd& ux, VectorXd& uy, VectorXd& uz, const VectorXd& rx,
                   const VectorXd& ry, const VectorXd& rz) const {
    const VectorXd wz = apply_w(lay_, *W_, WOp::W2inv, rz);
    const VectorXd t = rx + apply_gt(wz);
    if (p_ > 0) {
      const VectorXd ht = chol_.solve(t);
      uy = chol_a_.solve(prob_.A * ht - ry);
      ux = chol_.solve(t - At_ * uy);
    } else {
      uy.resize(0);
      ux = chol_.solve(t);
    }
    uz = apply_w(lay_, *W_, WOp::W2inv, apply_g(ux) - rz);
  }

  const Problem& prob_;
  const Layout lay_;
  const int n_, p_;
  MatrixXd Gl_, Glt_, At_;
  std::vector<std::vector<int>> sel_;
  std::vector<MatrixXd> dense_g_, dense_gt_;
  MatrixXd H_, scratch_;
  EquilibratedChol chol_, chol_a_;
  const Scaling* W_ = nullptr;
};

void validate(const Problem& prob) {
  const int n = static_cast<int>(prob.c.size());
  if (n < 1) throw ParameterError("conelp: empty variable vector");
  if (prob.G.cols() != n) throw DimensionMismatch("conelp: G column count != dim of c");
  if (prob.dims.nonneg < 0) throw ParameterError("conelp: negative cone size");
  for (int s : prob.dims.psd) {
    if (s < 1) throw ParameterError("conelp: psd block size must be >= 1");
  }
  if (prob.dims.rows() < 1) throw ParameterError("conelp: empty cone");
  if (prob.G.rows() != prob.dims.rows()) {
    throw DimensionMismatch("conelp: G row count != cone dimension");
  }
  if (prob.h.size() != prob.G.rows()) throw DimensionMismatch("conelp: h size != G rows");
  if (prob.A.rows() > 0 && prob.A.cols() != n) {
    throw DimensionMismatch("conelp: A column count != dim of c");
  }
  if (prob.b.size() != prob.A.rows()) throw DimensionMismatch("conelp: b size != A rows");
}

}  // namespace

Result solve(const Problem& prob_in, const Options& opts) {
  Problem prob = prob_in;
  if (prob.A.size() == 0) {
    prob.A.resize(0, prob.c.size());
    prob.b.resize(0);
  }
  validate(prob);

  const Layout lay(prob.dims);
  const int n = static_cast<int>(prob.c.size());
  const int p = static_cast<int>(prob.A.rows());
  const double deg = prob.dims.order();
  const VectorXd e = cone_identity(lay);

  const double resx0 = std::max(1.0, prob.c.norm());
  const double resy0 = std::max(1.0, prob.b.norm());
  const double resz0 = std::max(1.0, prob.h.norm());

  Result result;
  Kkt kkt(prob, lay);

  // Initial point from two solves under the identity scaling.
  VectorXd x, y, z, s;
  {
    const Scaling w0 = identity_scaling(lay);
    kkt.factor(w0);
    VectorXd xp, yp, zp;
    kkt.solve(xp, yp, zp, VectorXd::Zero(n), prob.b, prob.h);
    s = -zp;
    const double shift_s = -min_eig(lay, s);
    if (shift_s >= -1e-8 * std::max(1.0, s.norm())) s += (1.0 + shift_s) * e;

    VectorXd xd, yd, zd;
    kkt.solve(xd, yd, zd, -prob.c, VectorXd::Zero(p), VectorXd::Zero(lay.m));
    z = zd;
    const double shift_z = -min_eig(lay, z);
    if (shift_z >= -1e-8 * std::max(1.0, z.norm())) z += (1.0 + shift_z) * e;

    x = xp;
    y = yd;
  }
  double tau = 1.0, kappa = 1.0;

  // Degenerate instances (no strictly feasible point) drive the late
  // iterations into a regime where the scaled KKT system can no longer be
  // solved accurately in double precision. The loop therefore remembers the
  // most balanced iterate seen so far and falls back to it when progress
  // stops, reporting Optimal only if that iterate meets the tolerances.
  struct Snapshot {
    VectorXd x, y, z, s;
    double tau = 1.0, kappa = 1.0;
    double pcost = 0.0, dcost = 0.0;
    double gap = kInf, pres = kInf, dres = kInf;
    double merit = kInf;
    int iter = 0;
  };
  Snapshot best;

  auto meets_tol = [&](const Snapshot& b) {
    return b.pres <= opts.feastol && b.dres <= opts.feastol &&
           (b.gap <= opts.abstol ||
            b.gap <= opts.reltol * (1.0 + std::abs(b.pcost)));
  };
  auto fill_from = [&](const Snapshot& b) {
    result.x = b.x / b.tau;
    result.y = b.y / b.tau;
    result.z = b.z / b.tau;
    result.s = b.s / b.tau;
    result.primal_obj = b.pcost;
    result.dual_obj = b.dcost;
    result.gap = b.gap;
    result.primal_res = b.pres;
    result.dual_res = b.dres;
  };
  auto finish = [&](int iters, const std::string& why) -> Result& {
    const bool have_best = best.merit < kInf;
    if (have_best && meets_tol(best)) {
      result.status = Status::Optimal;
      fill_from(best);
      result.message = "optimal";
    } else {
      result.status = Status::NumericalTrouble;
      if (have_best) fill_from(best);
      result.message = why + " (best pres=" + num(best.pres) +
                       ", dres=" + num(best.dres) + ", gap=" + num(best.gap) +
                       ")";
    }
    result.iterations = iters;
    return result;
  };

  for (int iter = 0; iter <= opts.max_iters; ++iter) {
    const VectorXd rx = (p > 0 ? VectorXd(prob.A.transpose() * y) : VectorXd::Zero(n)) +
                        kkt.apply_gt(z) + prob.c * tau;
    const VectorXd ry = (p > 0 ? VectorXd(prob.A * x) : VectorXd::Zero(0)) - prob.b * tau;
    const VectorXd rz = kkt.apply_g(x) + s - prob.h * tau;
    const double rt = kappa + prob.c.dot(x) + prob.b.dot(y) + prob.h.dot(z);

    const double pcost = prob.c.dot(x) / tau;
    const double dcost = -(prob.b.dot(y) + prob.h.dot(z)) / tau;
    const double gap = s.dot(z) / (tau * tau);
    const double pres =
        std::max(p > 0 ? ry.norm() / resy0 : 0.0, rz.norm() / resz0) / tau;
    const double dres = rx.norm() / resx0 / tau;

    if (std::getenv("DCPEP_CONELP_TRACE")) {
      std::fprintf(stderr,
                   "it=%3d pcost=% .6e gap=%.3e pres=%.3e dres=%.3e tau=%.3e "
                   "kappa=%.3e rt=% .3e\n",
                   iter, pcost, gap, pres, dres, tau, kappa, rt);
    }

    Snapshot cur;
    cur.x = x;
    cur.y = y;
    cur.z = z;
    cur.s = s;
    cur.tau = tau;
    cur.kappa = kappa;
    cur.pcost = pcost;
    cur.dcost = dcost;
    cur.gap = gap;
    cur.pres = pres;
    cur.dres = dres;
    cur.merit = std::max({pres, dres, gap / (1.0 + std::abs(pcost))});
    cur.iter = iter;
    if (cur.merit < best.merit) best = cur;

    if (meets_tol(cur)) {
      result.status = Status::Optimal;
      fill_from(cur);
      result.iterations = iter;
      result.message = "optimal";
      return result;
    }

    const double hz_by = -(prob.h.dot(z) + prob.b.dot(y));
    if (hz_by > 0.0) {
      const VectorXd dual_cert = (p > 0 ? VectorXd(prob.A.transpose() * y) : VectorXd::Zero(n)) +
                                 kkt.apply_gt(z);
      if (dual_cert.norm() / resx0 / hz_by <= opts.feastol) {
        result.status = Status::PrimalInfeasible;
        result.y = y / hz_by;
        result.z = z / hz_by;
        result.iterations = iter;
        result.message = "primal infeasibility certificate found";
        return result;
      }
    }
    const double cx = prob.c.dot(x);
    if (cx < 0.0) {
      const double unb =
          std::max(p > 0 ? (prob.A * x).norm() / resy0 : 0.0,
                   (kkt.apply_g(x) + s).norm() / resz0) /
          (-cx);
      if (unb <= opts.feastol) {
        result.status = Status::DualInfeasible;
        result.x = x / (-cx);
        result.s = s / (-cx);
        result.iterations = iter;
        result.message = "dual infeasibility certificate found (primal unbounded)";
        return result;
      }
    }

    if (iter == opts.max_iters) return finish(iter, "iteration limit reached");
    if (iter - best.iter >= 10) return finish(iter, "progress stalled");

    const double mu = (s.dot(z) + tau * kappa) / (deg + 1.0);

    Scaling W;
    try {
      W = compute_scaling(lay, s, z);
      kkt.factor(W);
    } catch (const FactorizationError& err) {
      return finish(iter, std::string("scaling breakdown: ") + err.what());
    }

    VectorXd x1, y1, z1;
    kkt.solve(x1, y1, z1, -prob.c, prob.b, prob.h);
    const double denom =
        prob.c.dot(x1) + prob.b.dot(y1) + prob.h.dot(z1) - kappa / tau;
    if (!std::isfinite(denom) || denom == 0.0) {
      return finish(iter, "degenerate homogenization step");
    }

    const VectorXd lam2 = lambda_sq(lay, W);
    const double gap_h = s.dot(z) + tau * kappa;

    double sigma = 0.0;
    double dsdz_aff = 0.0, dtau_dkappa_aff = 0.0;
    VectorXd corr_s;
    VectorXd dx, dy, dz, ds, ds_scaled, dz_scaled;
    double dtau = 0.0, dkappa = 0.0;

    for (int pass = 0; pass < 2; ++pass) {
      const double fac = (pass == 0) ? 1.0 : 1.0 - sigma;
      VectorXd bs = -lam2;
      double bkappa = -tau * kappa;
      if (pass == 1) {
        bs += sigma * mu * e - corr_s;
        bkappa += sigma * mu - dtau_dkappa_aff;
      }
      const VectorXd ds_tilde = lambda_solve(lay, W, bs);
      const VectorXd rz_eff = -fac * rz - apply_w(lay, W, WOp::WT, ds_tilde);
      VectorXd xb, yb, zb;
      kkt.solve(xb, yb, zb, -fac * rx, -fac * ry, rz_eff);
      const double btau = -fac * rt;
      dtau = (btau - bkappa / tau -
              (prob.c.dot(xb) + prob.b.dot(yb) + prob.h.dot(zb))) /
             denom;
      dx = xb + dtau * x1;
      dy = (p > 0) ? VectorXd(yb + dtau * y1) : VectorXd(0);
      dz = zb + dtau * z1;
      dz_scaled = apply_w(lay, W, WOp::W, dz);
      ds_scaled = ds_tilde - dz_scaled;
      ds = apply_w(lay, W, WOp::WT, ds_scaled);
      dkappa = (bkappa - kappa * dtau) / tau;

      double tmax = std::min(max_step(lay, W, ds_scaled), max_step(lay, W, dz_scaled));
      if (dtau < 0.0) tmax = std::min(tmax, -tau / dtau);
      if (dkappa < 0.0) tmax = std::min(tmax, -kappa / dkappa);
      const double step = std::min(1.0, opts.step_fraction * tmax);

      if (pass == 0) {
        dsdz_aff = ds_scaled.dot(dz_scaled) + dtau * dkappa;
        dtau_dkappa_aff = dtau * dkappa;
        corr_s = jordan_product(lay, ds_scaled, dz_scaled);
        const double centering =
            std::clamp(1.0 - step + step * step * dsdz_aff / gap_h, 0.0, 1.0);
        sigma = centering * centering * centering;
      } else {
        if (!(step > 1e-13)) return finish(iter, "step length collapsed");
        x += step * dx;
        if (p > 0) y += step * dy;
        z += step * dz;
        s += step * ds;
        tau += step * dtau;
        kappa += step * dkappa;
      }
    }
  }

  throw InternalError("conelp: unreachable exit");
}

}  // namespace dcpep::conelp
