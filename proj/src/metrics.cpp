#include "ctgraph/metrics.hpp"

#include <cmath>
#include <limits>

#include "ctgraph/errors.hpp"
#include "ctgraph/io.hpp"

namespace ctgraph {

namespace {

void require_same_shape(const ImageGrid& a, const ImageGrid& b) {
  if (a.height != b.height || a.width != b.width)
    throw ConfigError("metric inputs must share the same shape");
}

// Valid-mode separable convolution with an odd symmetric kernel.
Eigen::MatrixXd gaussian_filter_valid(const Eigen::MatrixXd& img, const Eigen::VectorXd& kernel) {
  const int kw = int(kernel.size());
  const int oh = int(img.rows()) - kw + 1;
  const int ow = int(img.cols()) - kw + 1;
  Eigen::MatrixXd horiz(img.rows(), ow);
  for (int r = 0; r < img.rows(); ++r)
    for (int c = 0; c < ow; ++c) {
      double acc = 0.0;
      for (int k = 0; k < kw; ++k) acc += kernel[k] * img(r, c + k);
      horiz(r, c) = acc;
    }
  Eigen::MatrixXd out(oh, ow);
  for (int r = 0; r < oh; ++r)
    for (int c = 0; c < ow; ++c) {
      double acc = 0.0;
      for (int k = 0; k < kw; ++k) acc += kernel[k] * horiz(r + k, c);
      out(r, c) = acc;
    }
  return out;
}

Eigen::MatrixXd as_matrix(const ImageGrid& img) {
  Eigen::MatrixXd M(img.height, img.width);
  for (int r = 0; r < img.height; ++r)
    for (int c = 0; c < img.width; ++c) M(r, c) = img.at(r, c);
  return M;
}

}  // namespace

double rre(const ImageGrid& x, const ImageGrid& x_gt) {
  require_same_shape(x, x_gt);
  const double den = x_gt.values.squaredNorm();
  if (den == 0.0) throw ConfigError("relative error needs a nonzero reference image");
  return (x_gt.values - x.values).squaredNorm() / den;
}

// 20 log10(255 / ||x_gt - x||) with the plain vector norm of the difference.
// Not the per-pixel-RMSE convention; at 256x256 the two coincide to 0.04 dB,
// and for a fixed image size they differ by a constant offset only.
double psnr(const ImageGrid& x, const ImageGrid& x_gt) {
  require_same_shape(x, x_gt);
  const double err = (x_gt.values - x.values).norm();
  if (err == 0.0) return std::numeric_limits<double>::infinity();
  return 20.0 * std::log10(255.0 / err);
}

double ssim(const ImageGrid& x, const ImageGrid& x_gt) {
  require_same_shape(x, x_gt);
  constexpr int kWindow = 11;
  constexpr double kSigma = 1.5;
  constexpr double kC1 = 0.01 * 0.01;
  constexpr double kC2 = 0.03 * 0.03;
  if (x.height < kWindow || x.width < kWindow)
    throw ConfigError("image smaller than the 11x11 structural-similarity window");

  Eigen::VectorXd kernel(kWindow);
  for (int i = 0; i < kWindow; ++i) {
    const double d = i - (kWindow - 1) / 2.0;
    kernel[i] = std::exp(-d * d / (2.0 * kSigma * kSigma));
  }
  kernel /= kernel.sum();

  const Eigen::MatrixXd a = as_matrix(x);
  const Eigen::MatrixXd b = as_matrix(x_gt);
  const Eigen::MatrixXd mu_a = gaussian_filter_valid(a, kernel);
  const Eigen::MatrixXd mu_b = gaussian_filter_valid(b, kernel);
  const Eigen::MatrixXd aa = gaussian_filter_valid(a.cwiseProduct(a), kernel);
  const Eigen::MatrixXd bb = gaussian_filter_valid(b.cwiseProduct(b), kernel);
  const Eigen::MatrixXd ab = gaussian_filter_valid(a.cwiseProduct(b), kernel);

  double acc = 0.0;
  for (int r = 0; r < mu_a.rows(); ++r) {
    for (int c = 0; c < mu_a.cols(); ++c) {
      const double ma = mu_a(r, c), mb = mu_b(r, c);
      const double va = aa(r, c) - ma * ma;
      const double vb = bb(r, c) - mb * mb;
      const double cov = ab(r, c) - ma * mb;
      acc += ((2.0 * ma * mb + kC1) * (2.0 * cov + kC2)) /
             ((ma * ma + mb * mb + kC1) * (va + vb + kC2));
    }
  }
  return acc / (double(mu_a.rows()) * mu_a.cols());
}

MetricsReport compute_metrics(const ImageGrid& x, const ImageGrid& x_gt) {
  MetricsReport r;
  r.rre = rre(x, x_gt);
  r.psnr = psnr(x, x_gt);
  r.ssim = ssim(x, x_gt);
  return r;
}

std::string MetricsReport::csv_row() const {
  return format_double(rre) + "," + format_double(psnr) + "," + format_double(ssim);
}

}  // namespace ctgraph
