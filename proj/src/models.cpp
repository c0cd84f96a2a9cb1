#include "mkvldp/models.hpp"

#include <cmath>
#include <map>

#include "mkvldp/errors.hpp"

namespace mkvldp {

namespace {

using Span = std::span<double>;
using CSpan = std::span<const double>;

StateFn state_const(double v) {
  return [v](CSpan, const EmpiricalMeasure&, CSpan, Span out) { std::fill(out.begin(), out.end(), v); };
}
SlowFn slow_const(double v) {
  return [v](CSpan, const EmpiricalMeasure&, Span out) { std::fill(out.begin(), out.end(), v); };
}
LawFn law_const(double v) {
  return [v](const EmpiricalMeasure&, Span out) { std::fill(out.begin(), out.end(), v); };
}
// b = -(y - x)
StateFn relax_to_x() {
  return [](CSpan x, const EmpiricalMeasure&, CSpan y, Span out) { out[0] = x[0] - y[0]; };
}
// b = k y
StateFn linear_in_y(double k) {
  return [k](CSpan, const EmpiricalMeasure&, CSpan y, Span out) { out[0] = k * y[0]; };
}

CoefficientSet base(const char* id, double hurst) {
  CoefficientSet c;
  c.id = id;
  c.hurst = HurstParam(hurst);
  return c;
}

}  // namespace

std::vector<std::string> builtin_model_names() {
  return {"zero",        "linear",       "linear_bm",        "ou_averaged", "linear_gaussian", "pure_fbm",
          "mixed_gaussian", "smooth_drift", "negative_control", "aux_ou",      "mean_field"};
}

CoefficientSet builtin_model(const std::string& name, double hurst) {
  const double rt2 = std::sqrt(2.0);
  CoefficientSet c = base(name.c_str(), hurst);
  c.dissipativity_alpha = 4.0;
  c.lipschitz_c = 2.0;
  if (name == "zero") {
    c.f1 = state_const(0.0);
    c.b = state_const(0.0);
    c.lipschitz_c = 1.0;
    c.fbar = slow_const(0.0);
    // b = 0 is not dissipative; the zero model is only a smoke test
    c.dissipativity_alpha = 1.0;
  } else if (name == "linear" || name == "linear_bm") {
    c.f1 = linear_in_y(1.0);
    c.b = relax_to_x();
    c.sigma1 = state_const(rt2);
    if (name == "linear_bm") c.g1 = slow_const(1.0);
    c.fbar = [](CSpan x, const EmpiricalMeasure&, Span out) { out[0] = x[0]; };
  } else if (name == "ou_averaged" || name == "aux_ou") {
    c.f1 = linear_in_y(-1.0);
    c.b = relax_to_x();
    c.sigma2 = state_const(rt2);
    if (name == "ou_averaged") {
      c.g1 = slow_const(1.0);
      c.l = law_const(1.0);
    } else {
      c.g1 = slow_const(2.0);
    }
    c.fbar = [](CSpan x, const EmpiricalMeasure&, Span out) { out[0] = -x[0]; };
  } else if (name == "linear_gaussian" || name == "pure_fbm" || name == "mixed_gaussian") {
    c.dims.d2 = 0;
    c.f1 = state_const(0.0);
    c.b = linear_in_y(-1.0);
    if (name != "pure_fbm") c.g1 = slow_const(1.0);
    if (name != "linear_gaussian") c.l = law_const(1.0);
    c.lipschitz_c = 1.0;
    c.fbar = slow_const(0.0);
  } else if (name == "smooth_drift") {
    c.dims.d2 = 0;
    c.f1 = [](CSpan x, const EmpiricalMeasure&, CSpan, Span out) { out[0] = 1.0 + 0.5 * std::sin(x[0]); };
    c.b = linear_in_y(-1.0);
    c.lipschitz_c = 1.0;
    c.fbar = [](CSpan x, const EmpiricalMeasure&, Span out) { out[0] = 1.0 + 0.5 * std::sin(x[0]); };
  } else if (name == "negative_control") {
    c.f1 = linear_in_y(1.0);
    c.g1 = slow_const(1.0);
    c.b = linear_in_y(1.0);
    c.sigma1 = state_const(rt2);
  } else if (name == "mean_field") {
    c.f1 = [](CSpan x, const EmpiricalMeasure& mu, CSpan y, Span out) {
      out[0] = -x[0] + 0.5 * mu.mean()[0] + 0.5 * y[0];
    };
    c.g1 = slow_const(0.5);
    c.l = law_const(0.5);
    c.b = relax_to_x();
    c.sigma2 = state_const(rt2);
    c.lipschitz_c = 3.0;
    c.fbar = [](CSpan x, const EmpiricalMeasure& mu, Span out) { out[0] = 0.5 * (mu.mean()[0] - x[0]); };
  } else {
    std::string known;
    for (const auto& n : builtin_model_names()) known += (known.empty() ? "" : ", ") + n;
    throw DomainError("unknown model '" + name + "' (known: " + known + ")");
  }
  return c;
}

}  // namespace mkvldp
