#pragma once

#include <string>

#include "ctgraph/image.hpp"

namespace ctgraph {

struct MetricsReport {
  double rre = 0.0;
  double psnr = 0.0;
  double ssim = 0.0;
  std::string csv_row() const;  // "rre,psnr,ssim" with full precision
};

// ||x_gt - x||^2 / ||x_gt||^2 (squared-norm ratio).
double rre(const ImageGrid& x, const ImageGrid& x_gt);

// 20 log10(255 / ||x_gt - x||_2): the plain vector norm of the unit-range
// difference against the constant 255. Differs from the conventional
// per-pixel-RMSE definition by a size-dependent offset (0.04 dB at 256x256);
// kept deliberately. Identical images return +infinity.
double psnr(const ImageGrid& x, const ImageGrid& x_gt);

// Mean SSIM over valid 11x11 windows, Gaussian weights sigma = 1.5,
// C1 = 0.01^2, C2 = 0.03^2, dynamic range 1.
double ssim(const ImageGrid& x, const ImageGrid& x_gt);

MetricsReport compute_metrics(const ImageGrid& x, const ImageGrid& x_gt);

}  // namespace ctgraph
