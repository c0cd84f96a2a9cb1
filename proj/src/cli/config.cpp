#include <cmath>
#include <set>

#include "json.hpp"
#include "mkvldp/cli.hpp"
#include "mkvldp/errors.hpp"
#include "mkvldp/expr.hpp"
#include "mkvldp/models.hpp"

namespace mkvldp::cli {

namespace {

using json = nlohmann::json;

// Reads one JSON object, remembering which keys were used so that leftovers
// (typos) can be reported.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError("'" + name() + "' must be an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  template <class T>
  T get(const std::string& key, const T& fallback) {
    used_.insert(key);
    if (!j_.contains(key)) return fallback;
    return convert<T>(key);
  }

  template <class T>
  T require(const std::string& key) {
    used_.insert(key);
    if (!j_.contains(key)) throw ConfigError("missing required field '" + full(key) + "'");
    return convert<T>(key);
  }

  Section sub(const std::string& key) {
    used_.insert(key);
    static const json empty = json::object();
    return Section(j_.contains(key) ? j_.at(key) : empty, full(key));
  }

  const json& raw(const std::string& key) {
    used_.insert(key);
    return j_.at(key);
  }

  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!used_.count(k)) throw ConfigError("unknown field '" + full(k) + "'");
    }
  }

  std::string full(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  std::string name() const { return path_.empty() ? "config" : path_; }

  template <class T>
  T convert(const std::string& key) {
    try {
      return j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError("field '" + full(key) + "' has the wrong type");
    }
  }

  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

void positive(double v, const std::string& field) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("field '" + field + "' must be positive");
}

std::vector<std::vector<double>> point_list(const json& j, const std::string& field, std::size_t d) {
  std::vector<std::vector<double>> out;
  if (!j.is_array()) throw ConfigError("field '" + field + "' must be a list");
  for (const auto& e : j) {
    std::vector<double> p;
    if (e.is_number()) p = {e.get<double>()};
    else if (e.is_array()) {
      for (const auto& v : e) {
        if (!v.is_number()) throw ConfigError("field '" + field + "' must hold numbers");
        p.push_back(v.get<double>());
      }
    } else {
      throw ConfigError("field '" + field + "' must hold numbers or lists of numbers");
    }
    if (p.size() != d) throw ConfigError("entries of '" + field + "' must have dimension " + std::to_string(d));
    out.push_back(std::move(p));
  }
  return out;
}

CoefficientSet inline_model(Section& s, double hurst) {
  InlineModelSpec spec;
  spec.id = s.get<std::string>("id", "inline");
  spec.dims.d = s.get<std::size_t>("d", 1);
  spec.dims.d1 = s.get<std::size_t>("d1", 1);
  spec.dims.d2 = s.get<std::size_t>("d2", 1);
  spec.hurst = hurst;
  spec.f1 = s.require<std::vector<std::string>>("f1");
  spec.b = s.require<std::vector<std::string>>("b");
  spec.g1 = s.get<std::vector<std::string>>("g1", {});
  spec.l = s.get<std::vector<std::string>>("l", {});
  spec.sigma1 = s.get<std::vector<std::string>>("sigma1", {});
  spec.sigma2 = s.get<std::vector<std::string>>("sigma2", {});
  spec.fbar = s.get<std::vector<std::string>>("fbar", {});
  spec.lipschitz_c = s.get<double>("C", 1.0);
  spec.dissipativity_alpha = s.get<double>("alpha", 1.0);
  s.finish();
  return build_inline_model(spec);
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& command) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig c;
  try {
    Section top(root, "");
    c.command = top.get<std::string>("command", command);
    if (!command.empty() && c.command != command) {
      throw ConfigError("config command '" + c.command + "' does not match '" + command + "'");
    }
    static const std::set<std::string> commands = {"simulate", "average", "rate", "rare", "verify"};
    if (!commands.count(c.command)) throw ConfigError("unknown command '" + c.command + "'");

    const double hurst = top.get<double>("hurst", 0.75);
    if (!top.has("model")) throw ConfigError("missing required field 'model'");
    const json& mj = top.raw("model");
    if (mj.is_string()) {
      c.model_name = mj.get<std::string>();
      c.model = builtin_model(c.model_name, hurst);
    } else {
      Section ms(mj, "model");
      c.model = inline_model(ms, hurst);
      c.model_name = c.model.id;
    }
    const std::size_t d = c.model.dims.d;

    Section g = top.sub("grid");
    const double horizon = g.require<double>("T");
    const auto steps = g.require<std::size_t>("n");
    positive(horizon, "grid.T");
    if (steps == 0) throw ConfigError("field 'grid.n' must be positive");
    c.grid = TimeGrid(horizon, steps);
    g.finish();

    Section sc = top.sub("scales");
    c.scales.epsilon = sc.get<double>("epsilon", 1.0);
    c.scales.varepsilon = sc.get<double>("varepsilon", 1.0);
    c.scales.delta = sc.get<double>("delta", 0.0);
    c.scales.small_noise = sc.get<bool>("small_noise", true);
    sc.finish();
    c.scales.validate();

    c.particles = top.get<std::size_t>("particles", 200);
    if (c.particles < 2) throw ConfigError("field 'particles' must be at least 2");
    c.replicates = top.get<std::size_t>("replicates", 1);
    if (c.replicates == 0) throw ConfigError("field 'replicates' must be positive");
    c.seed = top.get<std::uint64_t>("seed", 0);
    c.threads = top.get<std::size_t>("threads", 0);
    c.x0 = top.get<std::vector<double>>("x0", std::vector<double>(d, 0.0));
    c.y0 = top.get<std::vector<double>>("y0", std::vector<double>(d, 0.0));
    if (c.x0.size() != d || c.y0.size() != d) throw ConfigError("fields 'x0' and 'y0' must have dimension " + std::to_string(d));
    c.output = top.get<std::string>("output", c.output);

    Section sim = top.sub("simulate");
    c.write_trajectories = sim.get<bool>("trajectories", true);
    sim.finish();

    Section av = top.sub("average");
    c.fbar_mode = av.get<std::string>("fbar", "auto");
    if (c.fbar_mode != "auto" && c.fbar_mode != "analytic" && c.fbar_mode != "estimated") {
      throw ConfigError("field 'average.fbar' must be auto, analytic or estimated");
    }
    {
      Section inv = av.sub("invariant");
      const double t = inv.get<double>("T", 20.0);
      const auto n = inv.get<std::size_t>("n", 400);
      positive(t, "average.invariant.T");
      if (n == 0) throw ConfigError("field 'average.invariant.n' must be positive");
      c.invariant.grid = TimeGrid(t, n);
      c.invariant.burn_in_fraction = inv.get<double>("burn_in", 0.5);
      if (!(c.invariant.burn_in_fraction >= 0.0 && c.invariant.burn_in_fraction < 1.0)) {
        throw ConfigError("field 'average.invariant.burn_in' must lie in [0, 1)");
      }
      c.invariant.n_samples = inv.get<std::size_t>("samples", 1000);
      c.invariant.chains = inv.get<std::size_t>("chains", 16);
      inv.finish();
    }
    if (av.has("probes")) c.fbar_probes = point_list(av.raw("probes"), "average.probes", d);
    else c.fbar_probes = {std::vector<double>(d, -1.0), std::vector<double>(d, 0.0), std::vector<double>(d, 1.0)};
    av.finish();

    Section ra = top.sub("rate");
    if (ra.has("targets")) c.targets = point_list(ra.raw("targets"), "rate.targets", d);
    c.rate.initial_penalty = ra.get<double>("initial_penalty", 10.0);
    c.rate.penalty_growth = ra.get<double>("penalty_growth", 10.0);
    c.rate.rounds = ra.get<std::size_t>("rounds", 6);
    c.rate.tolerance = ra.get<double>("tolerance", 1e-4);
    c.rate.restarts = ra.get<std::size_t>("restarts", 0);
    c.rate.inner.max_iterations = ra.get<std::size_t>("max_iterations", 500);
    const auto grad = ra.get<std::string>("gradient", "adjoint");
    if (grad == "adjoint") c.rate.gradient = GradientMode::Adjoint;
    else if (grad == "finite_difference") c.rate.gradient = GradientMode::FiniteDifference;
    else throw ConfigError("field 'rate.gradient' must be adjoint or finite_difference");
    ra.finish();
    if (c.command == "rate" && c.targets.empty()) throw ConfigError("missing required field 'rate.targets'");

    Section re = top.sub("rare");
    c.epsilons = re.get<std::vector<double>>("epsilons", {});
    for (double e : c.epsilons) {
      if (!(e > 0.0 && e <= 1.0)) throw ConfigError("entries of 'rare.epsilons' must lie in (0, 1]");
    }
    c.varepsilon_power = re.get<double>("varepsilon_power", 2.0);
    positive(c.varepsilon_power, "rare.varepsilon_power");
    c.event_component = re.get<std::size_t>("component", 0);
    if (c.event_component >= d) throw ConfigError("field 'rare.component' out of range");
    c.threshold = re.get<double>("threshold", 1.0);
    const auto dir = re.get<std::string>("direction", "above");
    if (dir != "above" && dir != "below") throw ConfigError("field 'rare.direction' must be above or below");
    c.above = dir == "above";
    c.n_mc = re.get<std::size_t>("n_mc", 10000);
    if (c.n_mc == 0) throw ConfigError("field 'rare.n_mc' must be positive");
    c.batch = re.get<std::size_t>("batch", 10000);
    c.rho = re.get<std::string>("rho", "");
    c.rho_bound = re.get<double>("rho_bound", 1.0);
    positive(c.rho_bound, "rare.rho_bound");
    if (!c.rho.empty()) {
      const Expr e = Expr::parse(c.rho, d);
      if (e.uses_y()) throw ConfigError("'rare.rho' may only read the terminal slow state x");
    }
    re.finish();
    if (c.command == "rare" && c.epsilons.empty()) throw ConfigError("missing required field 'rare.epsilons'");

    Section ve = top.sub("verify");
    c.checks = ve.get<std::vector<std::string>>("checks", {});
    ve.finish();

    top.finish();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  } catch (const UnsupportedBranch& e) {
    throw ConfigError(e.what());
  }

  // echo with every default filled in
  json echo = root;
  echo["command"] = c.command;
  echo["hurst"] = c.model.hurst.value();
  echo["grid"] = {{"T", c.grid.horizon()}, {"n", c.grid.steps()}};
  echo["scales"] = {{"epsilon", c.scales.epsilon},
                    {"varepsilon", c.scales.varepsilon},
                    {"delta", c.scales.delta},
                    {"small_noise", c.scales.small_noise}};
  echo["particles"] = c.particles;
  echo["replicates"] = c.replicates;
  echo["seed"] = c.seed;
  echo["x0"] = c.x0;
  echo["y0"] = c.y0;
  echo.erase("threads");
  echo.erase("output");
  c.echo = echo.dump(2);
  return c;
}

}  // namespace mkvldp::cli
