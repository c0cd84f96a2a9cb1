#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "mkvldp/coefficients.hpp"

namespace mkvldp {

/// Values an expression may read. x and y are the slow and fast states;
/// mean and m2 (the second moment) describe the measure argument.
struct ExprContext {
  std::span<const double> x;
  std::span<const double> y;
  std::span<const double> mean;
  double m2 = 0.0;
};

/// Small arithmetic language for inline coefficients:
///   numbers, + - * / ^, unary minus, parentheses,
///   exp log sin cos tanh sqrt abs, min(a, b), max(a, b),
///   x y (first component), x0 x1 .. y0 y1 .., m0 m1 .. (mean of mu),
///   mom2 (second moment of mu), pi.
/// Parse errors throw DomainError with the offending position.
class Expr {
 public:
  static Expr parse(const std::string& text, std::size_t dim);

  double eval(const ExprContext& ctx) const;
  const std::string& text() const noexcept { return text_; }
  bool uses_x() const noexcept { return uses_x_; }
  bool uses_y() const noexcept { return uses_y_; }

  struct Node;

 private:
  std::string text_;
  std::shared_ptr<const Node> root_;
  bool uses_x_ = false;
  bool uses_y_ = false;
};

/// Inline model: one expression per output entry (row-major for matrices).
/// Empty lists leave the coefficient unset.
struct InlineModelSpec {
  std::string id = "inline";
  Dims dims;
  double hurst = 0.75;
  std::vector<std::string> f1, g1, l, b, sigma1, sigma2, fbar;
  double lipschitz_c = 1.0;
  double dissipativity_alpha = 1.0;
};

/// Builds a CoefficientSet; checks entry counts and that g1 / fbar do not read
/// y and l reads neither x nor y.
CoefficientSet build_inline_model(const InlineModelSpec& spec);

}  // namespace mkvldp
