//
// Project LipidLM - Copyright 2026 The LipidLM Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <span>

namespace lipidlm::train {

/// 1 - SS_res / SS_tot. Unclamped, so worse-than-mean predictions are
/// negative. Throws ShapeMismatch for unequal or short
/// inputs and DegenerateTarget when the target has zero variance.
double compute_r2(std::span<const double> pred, std::span<const double> target);

/// Sample correlation. Throws DegenerateInput when either side is constant.
double compute_pearson(std::span<const double> pred,
                       std::span<const double> target);

}  // namespace lipidlm::train
