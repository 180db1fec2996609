//
// Project LipidLM - Copyright 2026 The LipidLM Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "lipidlm/train/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lipidlm/error.hpp"

namespace lipidlm::train {
namespace {

void check_sizes(std::span<const double> pred, std::span<const double> target) {
  if (pred.size() != target.size() || pred.size() < 2)
    throw Error(Errc::ShapeMismatch,
                "metric needs two equal-length vectors of at least 2 values, got "
                    + std::to_string(pred.size()) + " and "
                    + std::to_string(target.size()));
}

double mean(std::span<const double> x) {
  double s = 0.0;
  for (double v: x)
    s += v;
  return s / static_cast<double>(x.size());
}

}  // namespace

double compute_r2(std::span<const double> pred, std::span<const double> target) {
  check_sizes(pred, target);
  const double tm = mean(target);
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    ss_res += (target[i] - pred[i]) * (target[i] - pred[i]);
    ss_tot += (target[i] - tm) * (target[i] - tm);
  }
  if (ss_tot == 0.0)
    throw Error(Errc::DegenerateTarget, "R^2 is undefined for a constant target");
  return 1.0 - ss_res / ss_tot;
}

double compute_pearson(std::span<const double> pred,
                       std::span<const double> target) {
  check_sizes(pred, target);
  const double pm = mean(pred), tm = mean(target);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    sxy += (pred[i] - pm) * (target[i] - tm);
    sxx += (pred[i] - pm) * (pred[i] - pm);
    syy += (target[i] - tm) * (target[i] - tm);
  }
  if (sxx == 0.0 || syy == 0.0)
    throw Error(Errc::DegenerateInput, "Pearson correlation of a constant vector");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

}  // namespace lipidlm::train
