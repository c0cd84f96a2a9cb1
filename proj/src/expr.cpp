#include "mkvldp/expr.hpp"

#include <cctype>
#include <cmath>
#include <numbers>

#include "mkvldp/errors.hpp"

namespace mkvldp {

struct Expr::Node {
  enum class Kind { Number, X, Y, Mean, M2, Neg, Add, Sub, Mul, Div, Pow, Call1, Min, Max } kind;
  double value = 0.0;
  std::size_t index = 0;
  double (*fn)(double) = nullptr;
  std::shared_ptr<const Node> a, b;
};

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;
using Kind = Expr::Node::Kind;

NodePtr make(Kind k, NodePtr a = nullptr, NodePtr b = nullptr) {
  auto n = std::make_shared<Expr::Node>();
  n->kind = k;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

class Parser {
 public:
  Parser(const std::string& s, std::size_t dim) : s_(s), dim_(dim) {}

  NodePtr parse() {
    NodePtr n = sum();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return n;
  }

  bool uses_x = false;
  bool uses_y = false;

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw DomainError("expression '" + s_ + "' at position " + std::to_string(pos_) + ": " + what);
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr sum() {
    NodePtr n = product();
    for (;;) {
      if (eat('+')) n = make(Kind::Add, n, product());
      else if (eat('-')) n = make(Kind::Sub, n, product());
      else return n;
    }
  }

  NodePtr product() {
    NodePtr n = unary();
    for (;;) {
      if (eat('*')) n = make(Kind::Mul, n, unary());
      else if (eat('/')) n = make(Kind::Div, n, unary());
      else return n;
    }
  }

  NodePtr unary() {
    if (eat('-')) return make(Kind::Neg, unary());
    if (eat('+')) return unary();
    return power();
  }

  // right associative, binds tighter than unary minus on the left: -x^2 = -(x^2)
  NodePtr power() {
    NodePtr base = atom();
    if (eat('^')) return make(Kind::Pow, base, unary());
    return base;
  }

  std::size_t component(const std::string& name, std::size_t skip_chars) {
    if (name.size() == skip_chars) return 0;
    std::size_t idx = 0;
    for (std::size_t i = skip_chars; i < name.size(); ++i) {
      if (!std::isdigit(static_cast<unsigned char>(name[i]))) fail("unknown name '" + name + "'");
      idx = idx * 10 + static_cast<std::size_t>(name[i] - '0');
    }
    if (idx >= dim_) fail("component '" + name + "' out of range for dimension " + std::to_string(dim_));
    return idx;
  }

  NodePtr atom() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end");
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr n = sum();
      if (!eat(')')) fail("missing ')'");
      return n;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = s_.c_str() + pos_;
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      if (end == begin) fail("bad number");
      pos_ += static_cast<std::size_t>(end - begin);
      auto n = std::make_shared<Expr::Node>();
      n->kind = Kind::Number;
      n->value = v;
      return n;
    }
    if (!std::isalpha(static_cast<unsigned char>(c))) fail("unexpected '" + std::string(1, c) + "'");
    std::size_t end = pos_;
    while (end < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[end])) || s_[end] == '_')) ++end;
    const std::string name = s_.substr(pos_, end - pos_);
    pos_ = end;

    static const std::pair<const char*, double (*)(double)> unary_fns[] = {
        {"exp", [](double v) { return std::exp(v); }},   {"log", [](double v) { return std::log(v); }},
        {"sin", [](double v) { return std::sin(v); }},   {"cos", [](double v) { return std::cos(v); }},
        {"tanh", [](double v) { return std::tanh(v); }}, {"sqrt", [](double v) { return std::sqrt(v); }},
        {"abs", [](double v) { return std::abs(v); }}};
    for (const auto& [fname, fn] : unary_fns) {
      if (name == fname) {
        if (!eat('(')) fail("'" + name + "' needs an argument");
        auto n = std::make_shared<Expr::Node>();
        n->kind = Kind::Call1;
        n->fn = fn;
        n->a = sum();
        if (!eat(')')) fail("missing ')'");
        return n;
      }
    }
    if (name == "min" || name == "max") {
      if (!eat('(')) fail("'" + name + "' needs two arguments");
      NodePtr a = sum();
      if (!eat(',')) fail("'" + name + "' needs two arguments");
      NodePtr b = sum();
      if (!eat(')')) fail("missing ')'");
      return make(name == "min" ? Kind::Min : Kind::Max, a, b);
    }
    auto n = std::make_shared<Expr::Node>();
    if (name == "pi") {
      n->kind = Kind::Number;
      n->value = std::numbers::pi;
    } else if (name == "mom2") {
      n->kind = Kind::M2;
    } else if (name[0] == 'x') {
      n->kind = Kind::X;
      n->index = component(name, 1);
      uses_x = true;
    } else if (name[0] == 'y') {
      n->kind = Kind::Y;
      n->index = component(name, 1);
      uses_y = true;
    } else if (name[0] == 'm' && name.size() > 1) {
      n->kind = Kind::Mean;
      n->index = component(name, 1);
    } else {
      fail("unknown name '" + name + "'");
    }
    return n;
  }

  const std::string& s_;
  std::size_t dim_;
  std::size_t pos_ = 0;
};

double eval_node(const Expr::Node& n, const ExprContext& c) {
  switch (n.kind) {
    case Kind::Number: return n.value;
    case Kind::X: return c.x[n.index];
    case Kind::Y: return c.y[n.index];
    case Kind::Mean: return c.mean[n.index];
    case Kind::M2: return c.m2;
    case Kind::Neg: return -eval_node(*n.a, c);
    case Kind::Add: return eval_node(*n.a, c) + eval_node(*n.b, c);
    case Kind::Sub: return eval_node(*n.a, c) - eval_node(*n.b, c);
    case Kind::Mul: return eval_node(*n.a, c) * eval_node(*n.b, c);
    case Kind::Div: return eval_node(*n.a, c) / eval_node(*n.b, c);
    case Kind::Pow: return std::pow(eval_node(*n.a, c), eval_node(*n.b, c));
    case Kind::Call1: return n.fn(eval_node(*n.a, c));
    case Kind::Min: return std::min(eval_node(*n.a, c), eval_node(*n.b, c));
    case Kind::Max: return std::max(eval_node(*n.a, c), eval_node(*n.b, c));
  }
  return 0.0;
}

std::vector<Expr> parse_all(const std::vector<std::string>& texts, std::size_t expected, std::size_t dim,
                            const char* what, bool allow_x, bool allow_y) {
  if (texts.empty()) return {};
  if (texts.size() != expected) {
    throw DomainError(std::string(what) + " needs " + std::to_string(expected) + " entries, got " +
                      std::to_string(texts.size()));
  }
  std::vector<Expr> out;
  for (const auto& t : texts) {
    out.push_back(Expr::parse(t, dim));
    if (!allow_x && out.back().uses_x()) throw DomainError(std::string(what) + " may not depend on x: " + t);
    if (!allow_y && out.back().uses_y()) throw DomainError(std::string(what) + " may not depend on y: " + t);
  }
  return out;
}

ExprContext context(std::span<const double> x, const EmpiricalMeasure& mu, std::span<const double> y) {
  return {x, y, mu.mean(), mu.second_moment()};
}

StateFn state_fn(std::vector<Expr> e) {
  if (e.empty()) return {};
  return [e = std::move(e)](std::span<const double> x, const EmpiricalMeasure& mu, std::span<const double> y,
                            std::span<double> out) {
    const ExprContext c = context(x, mu, y);
    for (std::size_t i = 0; i < e.size(); ++i) out[i] = e[i].eval(c);
  };
}

SlowFn slow_fn(std::vector<Expr> e) {
  if (e.empty()) return {};
  return [e = std::move(e)](std::span<const double> x, const EmpiricalMeasure& mu, std::span<double> out) {
    const ExprContext c = context(x, mu, {});
    for (std::size_t i = 0; i < e.size(); ++i) out[i] = e[i].eval(c);
  };
}

LawFn law_fn(std::vector<Expr> e) {
  if (e.empty()) return {};
  return [e = std::move(e)](const EmpiricalMeasure& mu, std::span<double> out) {
    const ExprContext c = context({}, mu, {});
    for (std::size_t i = 0; i < e.size(); ++i) out[i] = e[i].eval(c);
  };
}

}  // namespace

Expr Expr::parse(const std::string& text, std::size_t dim) {
  if (dim == 0) throw DomainError("expression dimension must be positive");
  Parser p(text, dim);
  Expr e;
  e.text_ = text;
  e.root_ = p.parse();
  e.uses_x_ = p.uses_x;
  e.uses_y_ = p.uses_y;
  return e;
}

double Expr::eval(const ExprContext& ctx) const { return eval_node(*root_, ctx); }

CoefficientSet build_inline_model(const InlineModelSpec& s) {
  const std::size_t d = s.dims.d, d1 = s.dims.d1, d2 = s.dims.d2;
  CoefficientSet c;
  c.id = s.id;
  c.dims = s.dims;
  c.hurst = HurstParam(s.hurst);
  c.lipschitz_c = s.lipschitz_c;
  c.dissipativity_alpha = s.dissipativity_alpha;
  c.f1 = state_fn(parse_all(s.f1, d, d, "f1", true, true));
  c.g1 = slow_fn(parse_all(s.g1, d * d1, d, "g1", true, false));
  c.l = law_fn(parse_all(s.l, d * d1, d, "l", false, false));
  c.b = state_fn(parse_all(s.b, d, d, "b", true, true));
  c.sigma1 = state_fn(parse_all(s.sigma1, d * d1, d, "sigma1", true, true));
  c.sigma2 = state_fn(parse_all(s.sigma2, d * d2, d, "sigma2", true, true));
  c.fbar = slow_fn(parse_all(s.fbar, d, d, "fbar", true, false));
  c.validate();
  return c;
}

}  // namespace mkvldp
