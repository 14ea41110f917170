#include "ctgraph/solver.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <fstream>

#include "ctgraph/errors.hpp"
#include "ctgraph/io.hpp"

namespace ctgraph {

namespace {

// Smoothed l1: sum_i sqrt(t_i^2 + eps^2).
double smoothed_l1(const Eigen::VectorXd& t, double eps) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < t.size(); ++i) s += std::sqrt(t[i] * t[i] + eps * eps);
  return s;
}

// Twice-reorthogonalized Gram-Schmidt step. Returns the norm of the
// orthogonalized vector (v is normalized in place when it survives).
double orthogonalize(const Eigen::MatrixXd& V, Eigen::Index k, Eigen::VectorXd& v) {
  for (int pass = 0; pass < 2; ++pass)
    if (k > 0) v -= V.leftCols(k) * (V.leftCols(k).transpose() * v);
  const double nv = v.norm();
  if (nv > 0.0) v /= nv;
  return nv;
}

struct ProjectedProblem {
  Eigen::MatrixXd G1;  // (KV)^T (KV)
  Eigen::MatrixXd G2;  // (LV)^T U (LV)
  Eigen::VectorXd b;   // (KV)^T y
  double yty;

  Eigen::VectorXd solve(double alpha) const {
    return (G1 + alpha * G2).ldlt().solve(b);
  }
  double residual_norm(const Eigen::VectorXd& z) const {
    const double r2 = z.dot(G1 * z) - 2.0 * b.dot(z) + yty;
    return std::sqrt(std::max(0.0, r2));
  }
};

}  // namespace

void VariationalProblem::validate() const {
  if (!K) throw ConfigError("variational problem lacks an operator K");
  if (!L) throw ConfigError("variational problem lacks a regularization operator L");
  if (y.size() != K->rows()) throw ConfigError("data length does not match K rows");
  if (L->cols() != K->cols()) throw ConfigError("regularization operator width does not match K");
  if (!(smoothing_eps > 0.0)) throw ConfigError("smoothing_eps must be positive");
  if (basis_cap < 2) throw ConfigError("basis_cap must be at least 2");
  if (tau < 1.0) throw ConfigError("discrepancy safety factor tau must be >= 1");
  if (max_outer < 1) throw ConfigError("max_outer must be positive");
  if (alpha_rule == AlphaRule::fixed && !(alpha_fixed >= 0.0))
    throw ConfigError("fixed alpha must be nonnegative");
  if (alpha_rule == AlphaRule::discrepancy && !(noise_norm > 0.0))
    throw ConfigError("discrepancy rule requires a positive noise_norm");
}

VariationalProblem make_problem(const ProjectorMatrix& K, const Sinogram& y,
                                const LinearOperator& L) {
  VariationalProblem p;
  p.K = &K.matrix;
  p.y = y.values;
  p.noise_norm = y.noise_norm;
  p.L = &L;
  return p;
}

ObjectiveParts objective(const VariationalProblem& p, const Eigen::VectorXd& x, double alpha) {
  ObjectiveParts o;
  const Eigen::VectorXd r = (*p.K) * x - p.y;
  const Eigen::VectorXd t = p.L->apply(x);
  o.fidelity = 0.5 * r.squaredNorm();
  o.l1_term = t.lpNorm<1>();
  o.gamma = o.fidelity + alpha * o.l1_term;
  o.smoothed_gamma = o.fidelity + alpha * smoothed_l1(t, p.smoothing_eps);
  return o;
}

ObjectiveParts objective(const VariationalProblem& p, const Eigen::VectorXd& x) {
  return objective(p, x, p.alpha_fixed);
}

bool gamma_inequality_check(const VariationalProblem& p1, const VariationalProblem& p2,
                            const Eigen::VectorXd& x) {
  const double g1 = objective(p1, x).gamma;
  const double g2 = objective(p2, x).gamma;
  const double dy2 = (p1.y - p2.y).squaredNorm();
  const double dL = (p1.L->apply(x) - p2.L->apply(x)).lpNorm<1>();
  const double rhs = 2.0 * g2 + dy2 + dL;
  return g1 <= rhs * (1.0 + 1e-12) + 1e-12;
}

std::pair<Eigen::VectorXd, SolverState> solve(const VariationalProblem& p,
                                              const Eigen::VectorXd& x_init) {
  p.validate();
  const Eigen::Index n = p.K->cols();
  const Eigen::Index m = p.K->rows();
  if (x_init.size() != 0 && x_init.size() != n)
    throw ConfigError("x_init length does not match K columns");
  const double eps = p.smoothing_eps;

  SolverState st;

  // Initial subspace: the starting iterate (when nonzero), the normal-equations
  // right-hand side K^T y, and one further Krylov direction (K^T K) K^T y.
  Eigen::MatrixXd V(n, p.basis_cap + 1);
  Eigen::Index k = 0;
  auto push_direction = [&](Eigen::VectorXd v) {
    const double original = v.norm();
    if (!(original > 0.0) || k >= V.cols()) return;
    const double left = orthogonalize(V, k, v);
    if (left > 1e-12 * original) V.col(k++) = v;
  };
  if (x_init.size() == n) push_direction(x_init);
  const Eigen::VectorXd kty = p.K->transpose() * p.y;
  push_direction(kty);
  push_direction(p.K->transpose() * ((*p.K) * kty));
  if (k == 0) {
    // y = 0 and no starting point: the zero vector already minimizes both terms.
    st.x = Eigen::VectorXd::Zero(n);
    st.converged_early = true;
    st.V = Eigen::MatrixXd(n, 0);
    return {st.x, st};
  }

  Eigen::MatrixXd A(m, V.cols());          // K V
  Eigen::MatrixXd B(p.L->rows(), V.cols());  // L V
  for (Eigen::Index j = 0; j < k; ++j) {
    A.col(j) = (*p.K) * V.col(j);
    B.col(j) = p.L->apply(V.col(j));
  }

  Eigen::VectorXd x = x_init.size() == n
                          ? Eigen::VectorXd(V.leftCols(k) * (V.leftCols(k).transpose() * x_init))
                          : Eigen::VectorXd(Eigen::VectorXd::Zero(n));
  const double yty = p.y.squaredNorm();

  for (int outer = 0; outer < p.max_outer; ++outer) {
    const Eigen::VectorXd t = p.L->apply(x);
    Eigen::VectorXd u(t.size());
    for (Eigen::Index i = 0; i < t.size(); ++i) u[i] = 1.0 / std::sqrt(t[i] * t[i] + eps * eps);
    st.u = u;

    ProjectedProblem pp;
    {
      const auto Ak = A.leftCols(k);
      const Eigen::MatrixXd Bw = u.cwiseSqrt().asDiagonal() * B.leftCols(k);
      pp.G1 = Ak.transpose() * Ak;
      pp.G2 = Bw.transpose() * Bw;
      pp.b = Ak.transpose() * p.y;
      pp.yty = yty;
    }

    double alpha = p.alpha_fixed;
    if (p.alpha_rule == AlphaRule::discrepancy) {
      // The projected residual is nondecreasing in alpha; bisect on log10.
      st.warning.clear();
      const double target = p.tau * p.noise_norm;
      double lg_lo = -12.0, lg_hi = 4.0;
      const double f_lo = pp.residual_norm(pp.solve(std::pow(10.0, lg_lo)));
      const double f_hi = pp.residual_norm(pp.solve(std::pow(10.0, lg_hi)));
      if (f_lo >= target) {
        alpha = std::pow(10.0, lg_lo);
        st.warning = "discrepancy target below the residual reachable in the subspace";
      } else if (f_hi <= target) {
        alpha = std::pow(10.0, lg_hi);
        st.warning = "discrepancy target above the residual at the largest alpha";
      } else {
        for (int it = 0; it < 40; ++it) {
          const double lg_mid = 0.5 * (lg_lo + lg_hi);
          if (pp.residual_norm(pp.solve(std::pow(10.0, lg_mid))) < target)
            lg_lo = lg_mid;
          else
            lg_hi = lg_mid;
        }
        alpha = std::pow(10.0, 0.5 * (lg_lo + lg_hi));
      }
    }

    const Eigen::VectorXd z = pp.solve(alpha);
    const Eigen::VectorXd x_new = V.leftCols(k) * z;
    const Eigen::VectorXd resid = A.leftCols(k) * z - p.y;

    // Majorization guarantee: the smoothed objective at the step's alpha must
    // not increase (the previous iterate lies in the subspace).
    {
      const double g_prev = objective(p, x, alpha).smoothed_gamma;
      const double g_new = objective(p, x_new, alpha).smoothed_gamma;
      const double slack = g_new - g_prev;
      if (slack > 1e-10 * std::max(1.0, std::abs(g_prev))) {
        st.mm_violations += 1;
        st.worst_mm_violation =
            std::max(st.worst_mm_violation, slack / std::max(1.0, std::abs(g_prev)));
      }
      st.alpha_trace.push_back(alpha);
      st.smoothed_trace.push_back(g_new);
      st.objective_trace.push_back(objective(p, x_new, alpha).gamma);
      st.residual_trace.push_back(resid.norm());
    }

    const Eigen::VectorXd t_new = p.L->apply(x_new);

    // Solve-quality diagnostic: the gradient of the majorant that was just
    // minimized (old weights) must come out orthogonal to the subspace.
    // Meaningful only while that gradient is above rounding scale.
    {
      const Eigen::VectorXd r_maj =
          p.K->transpose() * resid + alpha * p.L->apply_t(u.cwiseProduct(t_new));
      const double mn = r_maj.norm();
      if (mn > 1e-10 * (1.0 + kty.norm()))
        st.worst_subspace_opt =
            std::max(st.worst_subspace_opt, (V.leftCols(k).transpose() * r_maj).norm() / mn);
    }

    // Gradient of the smoothed objective at x_new (the next majorant is
    // tangent there, so the two gradients coincide): stationarity measure and
    // the next subspace direction. With the old weights this would be
    // identically zero once the subspace saturates, silencing real progress.
    Eigen::VectorXd u_new(t_new.size());
    for (Eigen::Index i = 0; i < t_new.size(); ++i)
      u_new[i] = 1.0 / std::sqrt(t_new[i] * t_new[i] + eps * eps);
    Eigen::VectorXd r =
        p.K->transpose() * resid + alpha * p.L->apply_t(u_new.cwiseProduct(t_new));
    const double rnorm = r.norm();

    const double dx = (x_new - x).norm();
    const double xn = x.norm();
    x = x_new;

    if (rnorm < 1e-14 * std::max(1.0, x.norm())) {
      st.converged_early = true;
      break;
    }
    if (outer > 0 && xn > 0.0 && dx < p.tol * xn) {
      st.converged_early = true;
      break;
    }

    if (k >= p.basis_cap) {
      // Restart retaining the current iterate and the gradient direction.
      Eigen::VectorXd v1 = x;
      const double n1 = v1.norm();
      k = 0;
      if (n1 > 0.0) {
        v1 /= n1;
        V.col(k++) = v1;
      }
      Eigen::VectorXd v2 = r;
      const double left = orthogonalize(V, k, v2);
      if (left > 1e-12 * rnorm) V.col(k++) = v2;
      for (Eigen::Index j = 0; j < k; ++j) {
        A.col(j) = (*p.K) * V.col(j);
        B.col(j) = p.L->apply(V.col(j));
      }
      st.restarts += 1;
    } else {
      Eigen::VectorXd v = r;
      const double left = orthogonalize(V, k, v);
      // A numerically dependent gradient adds no direction, but the sweep must
      // go on: the reweighting keeps changing the projected problem, so the
      // iterate-change tolerance decides convergence, not the basis.
      if (left > 1e-12 * rnorm) {
        V.col(k) = v;
        A.col(k) = (*p.K) * v;
        B.col(k) = p.L->apply(v);
        k += 1;
      }
    }

    const Eigen::MatrixXd gram =
        V.leftCols(k).transpose() * V.leftCols(k) - Eigen::MatrixXd::Identity(k, k);
    st.worst_orthonormality = std::max(st.worst_orthonormality, gram.cwiseAbs().maxCoeff());
  }

  st.V = V.leftCols(k);
  st.x = x;
  return {x, st};
}

void write_trace_csv(const SolverState& s, const std::string& path) {
  std::string out = "iteration,alpha,objective,smoothed_objective,residual\n";
  for (std::size_t i = 0; i < s.alpha_trace.size(); ++i) {
    out += std::to_string(i) + "," + format_double(s.alpha_trace[i]) + "," +
           format_double(s.objective_trace[i]) + "," + format_double(s.smoothed_trace[i]) + "," +
           format_double(s.residual_trace[i]) + "\n";
  }
  write_text_file(path, out);
}

}  // namespace ctgraph
