#pragma once

#include <vector>

#include "wlra/bench/scene.hpp"

namespace wlra::bench {

/// SSIM with a uniform (box) window over every fully contained window
/// position; C1 = (k1 L)^2, C2 = (k2 L)^2.
struct MetricConfig {
  Index ssim_window = 11;
  double ssim_k1 = 0.01;
  double ssim_k2 = 0.03;
  double dynamic_range = 255.0;

  void validate() const;
};

/// SSIM of two frames given as length-(height*width) vectors.
double ssim_frame(const Eigen::Ref<const Vector<double>>& estimate,
                  const Eigen::Ref<const Vector<double>>& truth, const FrameDims& dims,
                  const MetricConfig& cfg = {});

/// Per-column SSIM of two frame matrices.
std::vector<double> ssim_per_frame(const Matrix<double>& estimate, const Matrix<double>& truth,
                                   const FrameDims& dims, const MetricConfig& cfg = {});

/// Mean over frames of ssim_frame; in [-1, 1].
double mean_ssim(const Matrix<double>& estimate, const Matrix<double>& truth, const FrameDims& dims,
                 const MetricConfig& cfg = {});

}  // namespace wlra::bench
