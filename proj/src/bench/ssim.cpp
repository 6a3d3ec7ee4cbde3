#include "wlra/bench/ssim.hpp"

#include <numeric>
#include <string>

namespace wlra::bench {
namespace {

// Summed-area table with a zero first row and column.
Matrix<double> integral(const Matrix<double>& img) {
  Matrix<double> s = Matrix<double>::Zero(img.rows() + 1, img.cols() + 1);
  for (Index y = 0; y < img.rows(); ++y)
    for (Index x = 0; x < img.cols(); ++x)
      s(y + 1, x + 1) = img(y, x) + s(y, x + 1) + s(y + 1, x) - s(y, x);
  return s;
}

double box(const Matrix<double>& s, Index y, Index x, Index w) {
  return s(y + w, x + w) - s(y, x + w) - s(y + w, x) + s(y, x);
}

Matrix<double> as_image(const Eigen::Ref<const Vector<double>>& v, const FrameDims& dims) {
  Matrix<double> img(dims.height, dims.width);
  for (Index y = 0; y < dims.height; ++y)
    for (Index x = 0; x < dims.width; ++x) img(y, x) = v(y * dims.width + x);
  return img;
}

}  // namespace

void MetricConfig::validate() const {
  if (ssim_window < 3 || ssim_window % 2 == 0) throw PreconditionError("MetricConfig: window must be odd and >= 3");
  if (!(ssim_k1 > 0.0) || !(ssim_k2 > 0.0) || !(dynamic_range > 0.0)) {
    throw PreconditionError("MetricConfig: k1, k2 and dynamic_range must be positive");
  }
}

double ssim_frame(const Eigen::Ref<const Vector<double>>& estimate,
                  const Eigen::Ref<const Vector<double>>& truth, const FrameDims& dims,
                  const MetricConfig& cfg) {
  cfg.validate();
  if (estimate.size() != dims.pixels() || truth.size() != dims.pixels()) {
    throw DimensionError("ssim: frame length does not match height * width");
  }
  const Index w = cfg.ssim_window;
  if (w > dims.height || w > dims.width) {
    throw DimensionError("ssim: window " + std::to_string(w) + " larger than the frame");
  }
  const Matrix<double> a = as_image(estimate, dims);
  const Matrix<double> b = as_image(truth, dims);
  const Matrix<double> sa = integral(a);
  const Matrix<double> sb = integral(b);
  const Matrix<double> saa = integral(a.cwiseProduct(a));
  const Matrix<double> sbb = integral(b.cwiseProduct(b));
  const Matrix<double> sab = integral(a.cwiseProduct(b));

  const double c1 = std::pow(cfg.ssim_k1 * cfg.dynamic_range, 2);
  const double c2 = std::pow(cfg.ssim_k2 * cfg.dynamic_range, 2);
  const double count = static_cast<double>(w * w);
  double total = 0.0;
  Index windows = 0;
  for (Index y = 0; y + w <= dims.height; ++y) {
    for (Index x = 0; x + w <= dims.width; ++x) {
      const double mu_a = box(sa, y, x, w) / count;
      const double mu_b = box(sb, y, x, w) / count;
      const double var_a = box(saa, y, x, w) / count - mu_a * mu_a;
      const double var_b = box(sbb, y, x, w) / count - mu_b * mu_b;
      const double cov = box(sab, y, x, w) / count - mu_a * mu_b;
      const double lum = (2.0 * mu_a * mu_b + c1) / (mu_a * mu_a + mu_b * mu_b + c1);
      const double cs = (2.0 * cov + c2) / (var_a + var_b + c2);
      total += lum * cs;
      ++windows;
    }
  }
  return total / static_cast<double>(windows);
}

std::vector<double> ssim_per_frame(const Matrix<double>& estimate, const Matrix<double>& truth,
                                   const FrameDims& dims, const MetricConfig& cfg) {
  if (estimate.rows() != truth.rows() || estimate.cols() != truth.cols()) {
    throw DimensionError("ssim: estimate and truth shapes differ");
  }
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(estimate.cols()));
  for (Index t = 0; t < estimate.cols(); ++t) {
    out.push_back(ssim_frame(estimate.col(t), truth.col(t), dims, cfg));
  }
  return out;
}

double mean_ssim(const Matrix<double>& estimate, const Matrix<double>& truth, const FrameDims& dims,
                 const MetricConfig& cfg) {
  const auto per = ssim_per_frame(estimate, truth, dims, cfg);
  if (per.empty()) throw DimensionError("ssim: no frames");
  return std::accumulate(per.begin(), per.end(), 0.0) / static_cast<double>(per.size());
}

}  // namespace wlra::bench
