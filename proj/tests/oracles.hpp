#pragma once

// Independent reference implementations used to validate the library. Each
// oracle recomputes a quantity from its mathematical definition by a different
// algorithm than the production code (dense enumeration, direct solves,
// first-order methods), so agreement is meaningful. Do not call library
// internals from here beyond plain data types.

#include <Eigen/Dense>

#include <cmath>
#include <utility>
#include <vector>

#include "ctgraph/geometry.hpp"
#include "ctgraph/graph.hpp"
#include "ctgraph/image.hpp"

namespace oracles {

// ---------------------------------------------------------------------------
// Dense projector: per (ray, pixel) slab clipping of the ray segment against
// the pixel box. Pixels are half-open [lo, hi) in x and (lo, hi] in y, which
// matches assigning a point to floor(px + side/2), floor(side/2 - py).
// ---------------------------------------------------------------------------

inline double segment_box_length(double x0, double y0, double x1, double y1, double xlo,
                                 double xhi, double ylo, double yhi) {
  const double dx = x1 - x0, dy = y1 - y0;
  double tmin = 0.0, tmax = 1.0;
  if (dx == 0.0) {
    if (!(x0 >= xlo && x0 < xhi)) return 0.0;
  } else {
    double ta = (xlo - x0) / dx, tb = (xhi - x0) / dx;
    if (ta > tb) std::swap(ta, tb);
    tmin = std::max(tmin, ta);
    tmax = std::min(tmax, tb);
  }
  if (dy == 0.0) {
    if (!(y0 > ylo && y0 <= yhi)) return 0.0;
  } else {
    double ta = (ylo - y0) / dy, tb = (yhi - y0) / dy;
    if (ta > tb) std::swap(ta, tb);
    tmin = std::max(tmin, ta);
    tmax = std::min(tmax, tb);
  }
  if (tmax <= tmin) return 0.0;
  return (tmax - tmin) * std::hypot(dx, dy);
}

// Re-derives each ray's endpoints from the geometry fields and accumulates
// per-pixel lengths densely. Finalized geometry only; small sizes.
inline Eigen::MatrixXd dense_projector(const ctgraph::ScanGeometry& g) {
  const int side = g.image_side;
  const double half = side / 2.0;
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(g.rays(), Eigen::Index(side) * side);
  const double reach = side * std::sqrt(2.0);
  for (int a = 0; a < g.n_angles; ++a) {
    const double th = g.angles_deg[a] * M_PI / 180.0;
    const double cx = std::cos(th), sx = std::sin(th);
    for (int j = 0; j < g.n_detector; ++j) {
      const double off = (j - (g.n_detector - 1) / 2.0) * g.detector_spacing;
      double x0, y0, x1, y1;
      if (g.mode == ctgraph::BeamMode::parallel) {
        x0 = off * cx + reach * sx;
        y0 = off * sx - reach * cx;
        x1 = off * cx - reach * sx;
        y1 = off * sx + reach * cx;
      } else {
        x0 = g.source_radius * cx;
        y0 = g.source_radius * sx;
        x1 = -g.detector_radius * cx - off * sx;
        y1 = -g.detector_radius * sx + off * cx;
      }
      const Eigen::Index row = Eigen::Index(a) * g.n_detector + j;
      for (int r = 0; r < side; ++r)
        for (int c = 0; c < side; ++c)
          K(row, Eigen::Index(r) * side + c) = segment_box_length(
              x0, y0, x1, y1, -half + c, -half + c + 1, half - r - 1, half - r);
    }
  }
  return K;
}

// ---------------------------------------------------------------------------
// Dense graph construction straight from the weight formula.
// ---------------------------------------------------------------------------

struct DenseGraph {
  Eigen::MatrixXd W;
  double mu = 0.0;
  Eigen::MatrixXd laplacian;  // (diag(W 1) - W) / mu
};

inline DenseGraph dense_graph(const ctgraph::ImageGrid& x, const ctgraph::GraphParams& p) {
  const Eigen::Index n = x.size();
  DenseGraph g;
  g.W = Eigen::MatrixXd::Zero(n, n);
  for (int r1 = 0; r1 < x.height; ++r1)
    for (int c1 = 0; c1 < x.width; ++c1)
      for (int r2 = 0; r2 < x.height; ++r2)
        for (int c2 = 0; c2 < x.width; ++c2) {
          const int dr = std::abs(r1 - r2), dc = std::abs(c1 - c2);
          const int dist =
              p.distance_norm == ctgraph::DistanceNorm::linf ? std::max(dr, dc) : dr + dc;
          if (dist == 0 || dist > p.R) continue;
          const double d = x.at(r1, c1) - x.at(r2, c2);
          g.W(Eigen::Index(r1) * x.width + c1, Eigen::Index(r2) * x.width + c2) =
              std::exp(-d * d / (p.sigma * p.sigma));
        }
  g.mu = g.W.norm();
  g.laplacian = (Eigen::MatrixXd(g.W.rowwise().sum().asDiagonal()) - g.W) / g.mu;
  return g;
}

// ---------------------------------------------------------------------------
// Numeric maximization of |d/dt exp(-t^2/sigma^2)| = 2t/sigma^2 exp(-t^2/sigma^2):
// coarse grid then golden-section refinement.
// ---------------------------------------------------------------------------

inline double max_abs_weight_derivative(double sigma) {
  auto f = [&](double t) { return 2.0 * t / (sigma * sigma) * std::exp(-t * t / (sigma * sigma)); };
  const double hi = std::max(10.0, 4.0 * sigma);
  double best_t = 0.0, best = 0.0;
  const int grid = 200000;
  for (int i = 0; i <= grid; ++i) {
    const double t = hi * i / grid;
    if (f(t) > best) { best = f(t); best_t = t; }
  }
  double a = std::max(0.0, best_t - hi / grid), b = best_t + hi / grid;
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c1 = b - phi * (b - a), c2 = a + phi * (b - a);
  for (int it = 0; it < 200; ++it) {
    if (f(c1) < f(c2)) { a = c1; c1 = c2; c2 = a + phi * (b - a); }
    else { b = c2; c2 = c1; c1 = b - phi * (b - a); }
  }
  return f(0.5 * (a + b));
}

// ---------------------------------------------------------------------------
// Dense ridge-regression solve.
// ---------------------------------------------------------------------------

inline Eigen::VectorXd dense_tikhonov(const Eigen::MatrixXd& K, const Eigen::VectorXd& y,
                                      double theta) {
  const Eigen::Index n = K.cols();
  return (K.transpose() * K + theta * Eigen::MatrixXd::Identity(n, n))
      .ldlt()
      .solve(K.transpose() * y);
}

// ---------------------------------------------------------------------------
// Proximal-gradient (FISTA) reference for 1/2||Kx-y||^2 + alpha ||Lx||_1.
// The prox of lam||L.||_1 is evaluated through its dual box-constrained
// quadratic with projected gradient ascent, warm-started across iterations.
// ---------------------------------------------------------------------------

inline Eigen::VectorXd prox_composite_l1(const Eigen::MatrixXd& L, const Eigen::VectorXd& w,
                                         double lam, double eta, Eigen::VectorXd& u) {
  for (int it = 0; it < 4000; ++it) {
    const Eigen::VectorXd grad = L * (w - L.transpose() * u);
    const Eigen::VectorXd un = (u + eta * grad).cwiseMax(-lam).cwiseMin(lam);
    const double change = (un - u).lpNorm<Eigen::Infinity>();
    u = un;
    if (change < 1e-14 * std::max(1.0, lam)) break;
  }
  return w - L.transpose() * u;
}

struct ProxGradResult {
  Eigen::VectorXd x;
  double objective = 0.0;
};

inline ProxGradResult prox_gradient_reference(const Eigen::MatrixXd& K, const Eigen::VectorXd& y,
                                              const Eigen::MatrixXd& L, double alpha,
                                              int iterations) {
  const Eigen::Index n = K.cols();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ek(K.transpose() * K);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> el(L * L.transpose());
  const double step = 1.0 / ek.eigenvalues().maxCoeff();
  const double eta = 1.0 / std::max(el.eigenvalues().maxCoeff(), 1e-30);
  const double lam = step * alpha;

  auto objective = [&](const Eigen::VectorXd& v) {
    return 0.5 * (K * v - y).squaredNorm() + alpha * (L * v).lpNorm<1>();
  };

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n), z = x, u = Eigen::VectorXd::Zero(L.rows());
  double t = 1.0;
  ProxGradResult best{x, objective(x)};
  for (int k = 0; k < iterations; ++k) {
    const Eigen::VectorXd w = z - step * (K.transpose() * (K * z - y));
    const Eigen::VectorXd xn = prox_composite_l1(L, w, lam, eta, u);
    const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    z = xn + ((t - 1.0) / tn) * (xn - x);
    x = xn;
    t = tn;
    const double o = objective(x);
    if (o < best.objective) best = {x, o};
  }
  return best;
}

// ---------------------------------------------------------------------------
// CGLS on min ||Kx - y||; returns the residual norm after each iteration.
// ---------------------------------------------------------------------------

inline std::vector<double> cgls_residuals(const Eigen::SparseMatrix<double, Eigen::RowMajor>& K,
                                          const Eigen::VectorXd& y, int iterations) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(K.cols());
  Eigen::VectorXd r = y;
  Eigen::VectorXd s = K.transpose() * r;
  Eigen::VectorXd p = s;
  double gamma = s.squaredNorm();
  std::vector<double> out;
  for (int k = 0; k < iterations; ++k) {
    const Eigen::VectorXd q = K * p;
    const double denom = q.squaredNorm();
    if (denom == 0.0 || gamma == 0.0) { out.push_back(r.norm()); continue; }
    const double a = gamma / denom;
    x += a * p;
    r -= a * q;
    s = K.transpose() * r;
    const double gn = s.squaredNorm();
    p = s + (gn / gamma) * p;
    gamma = gn;
    out.push_back(r.norm());
  }
  return out;
}

}  // namespace oracles
