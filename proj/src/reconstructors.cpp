#include "ctgraph/reconstructors.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>
#include <utility>

#include "ctgraph/errors.hpp"
#include "ctgraph/io.hpp"
#include "ctgraph/operators.hpp"
#include "ctgraph/solver.hpp"

namespace ctgraph {

ReconstructorKind reconstructor_kind_from_string(const std::string& s) {
  if (s == "fbp") return ReconstructorKind::fbp;
  if (s == "tikhonov") return ReconstructorKind::tikhonov;
  if (s == "tikhonov_discrepancy") return ReconstructorKind::tikhonov_discrepancy;
  if (s == "tv") return ReconstructorKind::tv;
  if (s == "external") return ReconstructorKind::external_file;
  if (s == "ground_truth") return ReconstructorKind::ground_truth;
  throw ConfigError("unknown reconstructor: " + s);
}

std::string to_string(ReconstructorKind k) {
  switch (k) {
    case ReconstructorKind::fbp: return "fbp";
    case ReconstructorKind::tikhonov: return "tikhonov";
    case ReconstructorKind::tikhonov_discrepancy: return "tikhonov_discrepancy";
    case ReconstructorKind::tv: return "tv";
    case ReconstructorKind::external_file: return "external";
    case ReconstructorKind::ground_truth: return "ground_truth";
  }
  throw ConfigError("unknown reconstructor kind");
}

namespace {

int image_side(const ProjectorMatrix& K) { return K.geometry.image_side; }

// Scale an unnormalized back-projection so its forward projection best matches
// the data in least squares, then clip to the image range.
ImageGrid calibrate_and_clip(const ProjectorMatrix& K, const Eigen::VectorXd& xt,
                             const Eigen::VectorXd& y) {
  const Eigen::VectorXd kx = apply_vec(K, xt);
  const double den = kx.squaredNorm();
  const double c = den > 0.0 ? kx.dot(y) / den : 0.0;
  return ImageGrid(image_side(K), image_side(K), c * xt).clipped();
}

// Conjugate gradients on the regularized normal equations (A + theta I) x = b
// with A = K^T K.  Warm-startable; used repeatedly by the discrepancy search.
Eigen::VectorXd normal_cg(const ProjectorMatrix& K, const Eigen::VectorXd& b, double theta,
                          const Eigen::VectorXd* x0) {
  const int n = int(K.matrix.cols());
  const double bnorm = b.norm();
  Eigen::VectorXd x = (x0 && x0->size() == n) ? *x0 : Eigen::VectorXd::Zero(n);
  if (bnorm == 0.0) return Eigen::VectorXd::Zero(n);
  auto op = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
    return apply_adjoint_vec(K, apply_vec(K, v)) + theta * v;
  };
  Eigen::VectorXd r = b - op(x);
  Eigen::VectorXd p = r;
  double rr = r.squaredNorm();
  const double tol = 1e-8 * bnorm;
  const int max_iters = 20000;
  for (int it = 0; it < max_iters; ++it) {
    if (std::sqrt(rr) <= tol) return x;
    const Eigen::VectorXd ap = op(p);
    const double da = p.dot(ap);
    if (da <= 0.0) break;
    const double step = rr / da;
    x += step * p;
    r -= step * ap;
    const double rr_new = r.squaredNorm();
    p = r + (rr_new / rr) * p;
    rr = rr_new;
  }
  if (std::sqrt(rr) <= 1e-6 * bnorm) return x;  // stalled but close enough to use
  throw SolverError("conjugate gradients stalled at relative residual " +
                    format_double(std::sqrt(rr) / bnorm) + " for theta " + format_double(theta));
}

// Largest singular value of K squared, by power iteration on K^T K.
double spectral_scale(const ProjectorMatrix& K) {
  const int n = int(K.matrix.cols());
  Eigen::VectorXd v = Eigen::VectorXd::Ones(n).normalized();
  double lambda = 0.0;
  for (int it = 0; it < 30; ++it) {
    Eigen::VectorXd w = apply_adjoint_vec(K, apply_vec(K, v));
    const double nw = w.norm();
    if (nw == 0.0) return 1.0;
    lambda = nw;
    v = w / nw;
  }
  return std::max(lambda, 1e-300);
}

}  // namespace

ImageGrid fbp(const Sinogram& y, const ProjectorMatrix& K, double cutoff) {
  if (!(cutoff > 0.0) || cutoff > 1.0) throw ConfigError("filter cutoff must lie in (0, 1]");
  const ScanGeometry& g = K.geometry;
  const int nd = g.n_detector;
  const int na = g.n_angles;
  const double ts = g.detector_spacing;

  // Band-limited ramp in the spatial domain: h[0] = 1/(4 ts^2),
  // h[k] = -1/(pi^2 k^2 ts^2) for odd k, 0 for even k != 0.
  const int kmax = std::max(1, int(std::floor(cutoff * (nd - 1))));
  Eigen::VectorXd h = Eigen::VectorXd::Zero(2 * kmax + 1);
  h[kmax] = 1.0 / (4.0 * ts * ts);
  for (int k = 1; k <= kmax; k += 2) {
    const double v = -1.0 / (M_PI * M_PI * double(k) * double(k) * ts * ts);
    h[kmax + k] = v;
    h[kmax - k] = v;
  }

  Eigen::VectorXd filtered(y.values.size());
  for (int a = 0; a < na; ++a) {
    for (int j = 0; j < nd; ++j) {
      const int klo = std::max(-kmax, j - (nd - 1));
      const int khi = std::min(kmax, j);
      double acc = 0.0;
      for (int k = klo; k <= khi; ++k) acc += h[kmax + k] * y.values[a * nd + (j - k)];
      filtered[a * nd + j] = ts * acc;
    }
  }
  return calibrate_and_clip(K, apply_adjoint_vec(K, filtered), y.values);
}

ImageGrid tikhonov(const Sinogram& y, const ProjectorMatrix& K, double theta) {
  if (!(theta > 0.0)) throw ConfigError("ridge weight must be positive");
  const Eigen::VectorXd b = apply_adjoint_vec(K, y.values);
  const Eigen::VectorXd x = normal_cg(K, b, theta, nullptr);
  return ImageGrid(image_side(K), image_side(K), x);
}

std::pair<ImageGrid, double> tikhonov_discrepancy(const Sinogram& y, const ProjectorMatrix& K,
                                                  double tau) {
  if (!(y.noise_norm > 0.0))
    throw ConfigError("discrepancy-based ridge selection needs a recorded noise norm");
  if (!(tau >= 1.0)) throw ConfigError("discrepancy safety factor must be >= 1");

  const double lo_target = y.noise_norm;
  const double hi_target = tau * y.noise_norm;
  const Eigen::VectorXd b = apply_adjoint_vec(K, y.values);
  const double scale = spectral_scale(K);

  Eigen::VectorXd warm;
  auto residual_at = [&](double theta) -> std::pair<double, Eigen::VectorXd> {
    const Eigen::VectorXd x = normal_cg(K, b, theta, warm.size() ? &warm : nullptr);
    warm = x;
    return {(apply_vec(K, x) - y.values).norm(), x};
  };

  // The residual grows monotonically with theta.  Anchor a bracket around the
  // target band before bisecting, descending in decades from the spectral
  // scale so the normal equations stay well enough conditioned to solve.
  double lg_lo = 0.0, lg_hi = 0.0;
  bool have_lo = false, have_hi = false;
  for (int k = 0; k <= 2 && !have_hi; ++k) {
    const double lg = std::log10(scale) + k;
    auto [f, x] = residual_at(std::pow(10.0, lg));
    if (f >= lo_target && f <= hi_target) return {ImageGrid(image_side(K), image_side(K), x), std::pow(10.0, lg)};
    if (f > hi_target) { lg_hi = lg; have_hi = true; }
    else { lg_lo = lg; have_lo = true; }
  }
  if (!have_hi)
    throw SolverError("ridge residual stayed below the discrepancy band even at heavy smoothing");
  for (int k = 1; k <= 14 && !have_lo; ++k) {
    const double lg = std::log10(scale) - k;
    double f;
    Eigen::VectorXd x;
    try {
      std::tie(f, x) = residual_at(std::pow(10.0, lg));
    } catch (const SolverError&) {
      throw InfeasibleDiscrepancyError(
          "residual could not be driven below the noise level within the solver budget");
    }
    if (f >= lo_target && f <= hi_target) return {ImageGrid(image_side(K), image_side(K), x), std::pow(10.0, lg)};
    if (f < lo_target) { lg_lo = lg; have_lo = true; }
    else { lg_hi = lg; }
  }
  if (!have_lo)
    throw InfeasibleDiscrepancyError("noise level is below the attainable residual: target " +
                                     format_double(hi_target) + " was never reached");

  for (int it = 0; it < 80; ++it) {
    const double lg = 0.5 * (lg_lo + lg_hi);
    auto [f, x] = residual_at(std::pow(10.0, lg));
    if (f >= lo_target && f <= hi_target) return {ImageGrid(image_side(K), image_side(K), x), std::pow(10.0, lg)};
    if (f < lo_target) lg_lo = lg; else lg_hi = lg;
  }
  throw SolverError("discrepancy bisection failed to land in the target residual band");
}

ImageGrid tv(const Sinogram& y, const ProjectorMatrix& K, double tau) {
  const int side = image_side(K);
  SparseOperator L(gradient_operator(side, side));
  VariationalProblem p = make_problem(K, y, L);
  p.alpha_rule = AlphaRule::discrepancy;
  p.tau = tau;
  auto [x, state] = solve(p, Eigen::VectorXd());
  (void)state;
  return ImageGrid(side, side, x).clipped();
}

ImageGrid external_reconstruction(const std::string& path, int expected_side) {
  ImageGrid img = read_image(path);
  if (img.height != expected_side || img.width != expected_side)
    throw IoError("external image is " + std::to_string(img.height) + "x" +
                  std::to_string(img.width) + ", expected " + std::to_string(expected_side) + "x" +
                  std::to_string(expected_side));
  return img.clipped();
}

ImageGrid reconstruct(const ReconstructorSpec& spec, const Sinogram& y, const ProjectorMatrix& K,
                      const ImageGrid* x_gt) {
  switch (spec.kind) {
    case ReconstructorKind::fbp: return fbp(y, K, spec.fbp_cutoff);
    case ReconstructorKind::tikhonov: return tikhonov(y, K, spec.theta).clipped();
    case ReconstructorKind::tikhonov_discrepancy:
      return tikhonov_discrepancy(y, K, spec.tau).first.clipped();
    case ReconstructorKind::tv: return tv(y, K, spec.tau);
    case ReconstructorKind::external_file:
      return external_reconstruction(spec.path, image_side(K));
    case ReconstructorKind::ground_truth:
      if (!x_gt) throw ConfigError("ground-truth reconstructor needs the true image");
      return x_gt->clipped();
  }
  throw ConfigError("unknown reconstructor kind");
}

}  // namespace ctgraph
