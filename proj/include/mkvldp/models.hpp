#pragma once

#include <string>
#include <vector>

#include "mkvldp/coefficients.hpp"

namespace mkvldp {

/// Built-in test models (all one-dimensional):
///
///   zero              f1 = 0, b = 0, no noise
///   linear            f1 = y, b = -(y - x), sigma1 = sqrt 2
///   linear_bm         linear plus g1 = 1
///   ou_averaged       f1 = -y, g1 = 1, l = 1, b = -(y - x), sigma2 = sqrt 2; f-bar = -x
///   linear_gaussian   f1 = 0, g1 = 1, b = -y, d2 = 0; X_T = x0 + sqrt(eps) W_T
///   pure_fbm          f1 = 0, l = 1, b = -y, d2 = 0
///   mixed_gaussian    f1 = 0, g1 = 1, l = 1, b = -y, d2 = 0
///   smooth_drift      f1 = 1 + sin(x) / 2, b = -y, no noise
///   negative_control  f1 = y, g1 = 1, b = +y, sigma1 = sqrt 2 (violates dissipativity)
///   aux_ou            f1 = -y, g1 = 2, b = -(y - x), sigma2 = sqrt 2; f-bar = -x
///   mean_field        f1 = -x + m/2 + y/2, g1 = l = 1/2, b = -(y - x), sigma2 = sqrt 2,
///                     m the mean of mu; f-bar = (m - x) / 2
CoefficientSet builtin_model(const std::string& name, double hurst = 0.75);
std::vector<std::string> builtin_model_names();

}  // namespace mkvldp
