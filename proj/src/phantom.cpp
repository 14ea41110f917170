#include <cmath>
#include <numbers>

#include "ctgraph/errors.hpp"
#include "ctgraph/geometry.hpp"
#include "ctgraph/rng.hpp"

namespace ctgraph {

namespace {

struct Ellipse {
  double value, a, b, x0, y0, phi_deg;  // semi-axes and center in [-1,1] units
};

// Additive intensities on the unit square, clipped to [0,1] at the end.
ImageGrid render_additive(const std::vector<Ellipse>& shapes, int side) {
  ImageGrid img(side, side);
  for (int r = 0; r < side; ++r) {
    for (int c = 0; c < side; ++c) {
      const double x = (2.0 * c - (side - 1)) / side;
      const double y = ((side - 1) - 2.0 * r) / side;
      double v = 0.0;
      for (const auto& e : shapes) {
        const double t = e.phi_deg * std::numbers::pi / 180.0;
        const double ct = std::cos(t), st = std::sin(t);
        const double xr = ct * (x - e.x0) + st * (y - e.y0);
        const double yr = -st * (x - e.x0) + ct * (y - e.y0);
        if ((xr * xr) / (e.a * e.a) + (yr * yr) / (e.b * e.b) <= 1.0) v += e.value;
      }
      img.at(r, c) = std::clamp(v, 0.0, 1.0);
    }
  }
  return img;
}

ImageGrid shepp_logan_like(int side) {
  // Classic low-contrast head arrangement: one bright shell, a darker brain,
  // two tilted voids, small high-intensity features near the bottom.
  const std::vector<Ellipse> shapes = {
      {1.00, 0.6900, 0.9200, 0.00, 0.0000, 0.0},
      {-0.80, 0.6624, 0.8740, 0.00, -0.0184, 0.0},
      {-0.20, 0.1100, 0.3100, 0.22, 0.0000, -18.0},
      {-0.20, 0.1600, 0.4100, -0.22, 0.0000, 18.0},
      {0.10, 0.2100, 0.2500, 0.00, 0.3500, 0.0},
      {0.10, 0.0460, 0.0460, 0.00, 0.1000, 0.0},
      {0.10, 0.0460, 0.0460, 0.00, -0.1000, 0.0},
      {0.10, 0.0460, 0.0230, -0.08, -0.6050, 0.0},
      {0.10, 0.0230, 0.0230, 0.00, -0.6060, 0.0},
      {0.10, 0.0230, 0.0460, 0.06, -0.6050, 0.0},
  };
  return render_additive(shapes, side);
}

// Paint a filled rotated rectangle (a thick line segment); later shapes
// overwrite earlier ones so regions stay piecewise constant.
void paint_bar(ImageGrid& img, double cx, double cy, double len, double thick, double phi,
               double value) {
  const int side = img.height;
  const double ct = std::cos(phi), st = std::sin(phi);
  for (int r = 0; r < side; ++r) {
    for (int c = 0; c < side; ++c) {
      const double x = (2.0 * c - (side - 1)) / side - cx;
      const double y = ((side - 1) - 2.0 * r) / side - cy;
      const double u = ct * x + st * y;
      const double v = -st * x + ct * y;
      if (std::abs(u) <= len / 2 && std::abs(v) <= thick / 2) img.at(r, c) = value;
    }
  }
}

void paint_ellipse(ImageGrid& img, const Ellipse& e) {
  const int side = img.height;
  const double t = e.phi_deg * std::numbers::pi / 180.0;
  const double ct = std::cos(t), st = std::sin(t);
  for (int r = 0; r < side; ++r) {
    for (int c = 0; c < side; ++c) {
      const double x = (2.0 * c - (side - 1)) / side - e.x0;
      const double y = ((side - 1) - 2.0 * r) / side - e.y0;
      const double xr = ct * x + st * y;
      const double yr = -st * x + ct * y;
      if ((xr * xr) / (e.a * e.a) + (yr * yr) / (e.b * e.b) <= 1.0) img.at(r, c) = e.value;
    }
  }
}

ImageGrid random_ellipses(int side, std::uint64_t seed) {
  Rng rng(seed);
  ImageGrid img(side, side);

  // Keep every shape inside radius 0.82 (unit coordinates): corners stay dark.
  const int n_ell = 3 + rng.uniform_int(0, 3);
  for (int i = 0; i < n_ell; ++i) {
    Ellipse e;
    const double rad = 0.42 * rng.uniform();
    const double ang = 2.0 * std::numbers::pi * rng.uniform();
    e.x0 = rad * std::cos(ang);
    e.y0 = rad * std::sin(ang);
    e.a = 0.10 + 0.30 * rng.uniform();
    e.b = 0.10 + 0.30 * rng.uniform();
    e.phi_deg = 180.0 * rng.uniform();
    e.value = 0.20 + 0.75 * rng.uniform();
    paint_ellipse(img, e);
  }

  const int n_bar = 1 + rng.uniform_int(0, 2);
  for (int i = 0; i < n_bar; ++i) {
    const double rad = 0.35 * rng.uniform();
    const double ang = 2.0 * std::numbers::pi * rng.uniform();
    const double len = 0.25 + 0.45 * rng.uniform();
    const double thick = std::max(0.02, 0.06 * rng.uniform()) + 2.0 / side;
    const double phi = std::numbers::pi * rng.uniform();
    const double value = 0.30 + 0.65 * rng.uniform();
    paint_bar(img, rad * std::cos(ang), rad * std::sin(ang), len, thick, phi, value);
  }

  // Two small pinned discs painted last at mirrored positions: disjoint from
  // each other by construction, so the histogram always carries at least
  // three distinct grays (0, 0.50, 0.95).
  const double rad = 0.18 + 0.18 * rng.uniform();
  const double ang = 2.0 * std::numbers::pi * rng.uniform();
  const double dr = 0.08 + 0.04 * rng.uniform();
  paint_ellipse(img, {0.95, dr, dr, rad * std::cos(ang), rad * std::sin(ang), 0.0});
  paint_ellipse(img, {0.50, dr, dr, -rad * std::cos(ang), -rad * std::sin(ang), 0.0});
  return img;
}

}  // namespace

ImageGrid make_phantom(PhantomKind kind, int side, std::uint64_t seed) {
  if (side < 8) throw ConfigError("phantom side must be at least 8");
  switch (kind) {
    case PhantomKind::shepp_logan_like:
      return shepp_logan_like(side);
    case PhantomKind::ellipses:
      return random_ellipses(side, seed);
  }
  throw ConfigError("unknown phantom kind");
}

}  // namespace ctgraph
