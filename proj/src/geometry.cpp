#include "ctgraph/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "ctgraph/errors.hpp"
#include "ctgraph/rng.hpp"

namespace ctgraph {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

struct Segment {
  double x0, y0, x1, y1;
};

// Exact pixel intersection lengths of one segment against the centered unit
// grid, via sorted crossings of the pixel lattice lines (Siddon traversal).
void trace_segment(const Segment& s, int side, std::vector<Eigen::Triplet<double>>& out, int row) {
  const double dx = s.x1 - s.x0;
  const double dy = s.y1 - s.y0;
  const double len = std::hypot(dx, dy);
  if (len == 0.0) return;
  const double half = side / 2.0;

  // Clip the parameter range to the image box.
  double tmin = 0.0, tmax = 1.0;
  auto clip = [&](double d, double lo, double hi, double p) {
    if (d == 0.0) return p >= lo && p <= hi;
    double ta = (lo - p) / d, tb = (hi - p) / d;
    if (ta > tb) std::swap(ta, tb);
    tmin = std::max(tmin, ta);
    tmax = std::min(tmax, tb);
    return true;
  };
  if (!clip(dx, -half, half, s.x0)) return;
  if (!clip(dy, -half, half, s.y0)) return;
  if (tmax <= tmin) return;

  std::vector<double> ts;
  ts.reserve(2 * side + 4);
  ts.push_back(tmin);
  ts.push_back(tmax);
  if (dx != 0.0) {
    for (int i = 0; i <= side; ++i) {
      const double t = (-half + i - s.x0) / dx;
      if (t > tmin && t < tmax) ts.push_back(t);
    }
  }
  if (dy != 0.0) {
    for (int i = 0; i <= side; ++i) {
      const double t = (-half + i - s.y0) / dy;
      if (t > tmin && t < tmax) ts.push_back(t);
    }
  }
  std::sort(ts.begin(), ts.end());

  for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
    const double ta = ts[i], tb = ts[i + 1];
    const double w = (tb - ta) * len;
    if (w <= 0.0) continue;
    const double tm = 0.5 * (ta + tb);
    const double px = s.x0 + tm * dx;
    const double py = s.y0 + tm * dy;
    int c = int(std::floor(px + half));
    int r = int(std::floor(half - py));
    if (c < 0 || c >= side || r < 0 || r >= side) continue;
    out.emplace_back(row, r * side + c, w);
  }
}

}  // namespace

double ScanGeometry::half_diagonal() const { return image_side * std::numbers::sqrt2 / 2.0; }

void ScanGeometry::finalize() {
  if (image_side < 1) throw GeometryError("image_side must be positive");
  if (n_angles < 1) throw GeometryError("n_angles must be positive");

  if (angles_deg.empty()) {
    angles_deg.resize(n_angles);
    for (int i = 0; i < n_angles; ++i)
      angles_deg[i] = n_angles == 1 ? 0.0 : 179.0 * i / (n_angles - 1);
  }
  if (int(angles_deg.size()) != n_angles)
    throw GeometryError("angles list does not match n_angles");
  for (int i = 0; i < n_angles; ++i) {
    if (angles_deg[i] < 0.0 || angles_deg[i] > 179.0)
      throw GeometryError("angles must lie in [0, 179] degrees");
    if (i > 0 && angles_deg[i] <= angles_deg[i - 1])
      throw GeometryError("angles must be strictly increasing");
  }

  const Eigen::Index n = Eigen::Index(image_side) * image_side;
  if (n_detector == 0) n_detector = int(std::floor(std::sqrt(2.0 * double(n))));
  if (n_detector < 1) throw GeometryError("n_detector must be positive");

  if (mode == BeamMode::fan) {
    const double hd = half_diagonal();
    if (source_radius == 0.0) source_radius = 2.0 * hd;
    if (detector_radius == 0.0) detector_radius = 2.0 * hd;
    if (source_radius <= hd)
      throw GeometryError("fan source_radius must exceed the image half-diagonal");
    if (detector_radius <= 0.0) throw GeometryError("detector_radius must be positive");
    if (detector_spacing == 0.0) {
      const double gamma = std::asin(std::min(1.0, hd / source_radius));
      detector_spacing = 2.0 * (source_radius + detector_radius) * std::tan(gamma) / n_detector;
    }
  } else {
    if (detector_spacing == 0.0) detector_spacing = 1.0;
  }
  if (detector_spacing <= 0.0) throw GeometryError("detector_spacing must be positive");
}

ProjectorMatrix build_projector(const ScanGeometry& geom_in) {
  ScanGeometry geom = geom_in;
  if (!geom.finalized()) geom.finalize();

  const int side = geom.image_side;
  const Eigen::Index n = Eigen::Index(side) * side;
  const Eigen::Index m = geom.rays();
  const double reach = side * std::numbers::sqrt2;  // covers the box from outside

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(std::size_t(m) * side);

  for (int a = 0; a < geom.n_angles; ++a) {
    const double th = geom.angles_deg[a] * kDeg;
    const double cx = std::cos(th), sx = std::sin(th);
    for (int j = 0; j < geom.n_detector; ++j) {
      const double off = (j - (geom.n_detector - 1) / 2.0) * geom.detector_spacing;
      const int row = a * geom.n_detector + j;
      Segment seg;
      if (geom.mode == BeamMode::parallel) {
        // Line through off * (cos, sin), running along (-sin, cos).
        seg = {off * cx + reach * sx, off * sx - reach * cx,
               off * cx - reach * sx, off * sx + reach * cx};
      } else {
        const double sxp = geom.source_radius * cx, syp = geom.source_radius * sx;
        const double dxp = -geom.detector_radius * cx - off * sx;
        const double dyp = -geom.detector_radius * sx + off * cx;
        seg = {sxp, syp, dxp, dyp};
      }
      trace_segment(seg, side, trips, row);
    }
  }

  ProjectorMatrix K;
  K.geometry = geom;
  K.matrix.resize(m, n);
  K.matrix.setFromTriplets(trips.begin(), trips.end());
  K.matrix.makeCompressed();
  return K;
}

Sinogram apply(const ProjectorMatrix& K, const ImageGrid& x) {
  if (x.size() != K.cols()) throw GeometryError("projector/image dimension mismatch");
  Sinogram s;
  s.geometry = K.geometry;
  s.values = K.matrix * x.values;
  return s;
}

Eigen::VectorXd apply_vec(const ProjectorMatrix& K, const Eigen::VectorXd& x) {
  if (x.size() != K.cols()) throw GeometryError("projector/image dimension mismatch");
  return K.matrix * x;
}

Eigen::VectorXd apply_adjoint_vec(const ProjectorMatrix& K, const Eigen::VectorXd& s) {
  if (s.size() != K.rows()) throw GeometryError("projector/sinogram dimension mismatch");
  return K.matrix.transpose() * s;
}

ImageGrid apply_adjoint(const ProjectorMatrix& K, const Sinogram& s) {
  const int side = K.geometry.image_side;
  return ImageGrid(side, side, apply_adjoint_vec(K, s.values));
}

Sinogram add_noise(const Sinogram& y, double delta, std::uint64_t seed) {
  if (delta < 0.0) throw ConfigError("noise level must be nonnegative");
  Sinogram out = y;
  if (delta == 0.0) return out;
  const double ynorm = y.values.norm();
  Rng rng(seed);
  Eigen::VectorXd xi = rng.normal_vector(y.values.size());
  const double xin = xi.norm();
  if (xin > 0.0 && ynorm > 0.0) out.values = y.values + (delta * ynorm / xin) * xi;
  out.noise_level = delta;
  out.noise_norm = delta * ynorm;
  return out;
}

}  // namespace ctgraph
