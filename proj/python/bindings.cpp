#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <iostream>

#include "mkvldp/cli.hpp"
#include "mkvldp/errors.hpp"
#include "mkvldp/frac_ops.hpp"
#include "mkvldp/ldp.hpp"
#include "mkvldp/lemma.hpp"
#include "mkvldp/measure.hpp"
#include "mkvldp/models.hpp"
#include "mkvldp/noise.hpp"

namespace py = pybind11;
using namespace mkvldp;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<double> to_vec(const Array& a) { return {a.data(), a.data() + a.size()}; }

Array to_array(const std::vector<double>& v, std::vector<py::ssize_t> shape) {
  Array out(shape);
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

GridFunction pointwise(const Array& values, double horizon) {
  if (values.ndim() != 1 || values.size() < 2) throw DomainError("expected a 1-D array of node values");
  return GridFunction(TimeGrid(horizon, values.size() - 1), 1, Sampling::Pointwise, to_vec(values));
}

GridFunction cells(const Array& values, double horizon) {
  if (values.ndim() != 1 || values.size() < 1) throw DomainError("expected a 1-D array of cell values");
  return GridFunction(TimeGrid(horizon, values.size()), 1, Sampling::CellConstant, to_vec(values));
}

Array grid_values(const GridFunction& g) {
  Array out(static_cast<py::ssize_t>(g.samples()));
  for (std::size_t i = 0; i < g.samples(); ++i) out.mutable_at(i) = g.value(i, 0);
  return out;
}

EmpiricalMeasure cloud(const Array& a) {
  if (a.ndim() == 1) return EmpiricalMeasure(1, to_vec(a));
  if (a.ndim() != 2) throw DomainError("expected an (N, d) array");
  return EmpiricalMeasure(static_cast<std::size_t>(a.shape(1)), to_vec(a));
}

py::dict report_dict(const CheckReport& r) {
  py::dict d;
  d["check"] = r.check;
  d["model"] = r.model;
  d["verdict"] = std::string(to_string(r.verdict));
  d["notes"] = r.notes;
  py::dict fitted;
  for (const auto& [k, v] : r.fitted) fitted[py::str(k)] = v;
  d["fitted"] = fitted;
  d["columns"] = r.columns;
  d["rows"] = r.rows;
  return d;
}

}  // namespace

PYBIND11_MODULE(_mkvldp, m) {
  m.doc() = "Slow-fast McKean-Vlasov systems with fractional noise: simulation and large deviations";

  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<UnsupportedBranch>(m, "UnsupportedBranch", PyExc_ValueError);
  py::register_exception<ResolutionError>(m, "ResolutionError", PyExc_ValueError);
  py::register_exception<BlowUpError>(m, "BlowUpError", PyExc_ArithmeticError);
  py::register_exception<GenerationError>(m, "GenerationError", PyExc_RuntimeError);

  m.def("covariance_rh", [](double t, double s, double h) { return covariance_rh(t, s, HurstParam(h)); },
        py::arg("t"), py::arg("s"), py::arg("hurst"));
  m.def("kernel_kh", [](double t, double s, double h) { return kernel_kh(t, s, HurstParam(h)); }, py::arg("t"),
        py::arg("s"), py::arg("hurst"));
  m.def("kh_constant", [](double h) { return kh_constant(HurstParam(h)); }, py::arg("hurst"));

  m.def("rl_integral",
        [](const Array& f, double horizon, double alpha) { return grid_values(rl_integral_left(pointwise(f, horizon), alpha)); },
        py::arg("values"), py::arg("horizon"), py::arg("alpha"), "Left Riemann-Liouville integral of node values.");
  m.def("rl_derivative",
        [](const Array& f, double horizon, double alpha) {
          return grid_values(rl_derivative_left(pointwise(f, horizon), alpha));
        },
        py::arg("values"), py::arg("horizon"), py::arg("alpha"), "Left fractional derivative (Weyl form); values[0] must be 0.");
  m.def("kh_star",
        [](const Array& phi, double horizon, double h) { return grid_values(apply_kh_star(cells(phi, horizon), HurstParam(h))); },
        py::arg("cell_values"), py::arg("horizon"), py::arg("hurst"),
        "K_H^* of a cell-constant function, at the nodes (infinite at 0).");
  m.def("rh",
        [](const Array& phi, double horizon, double h) { return grid_values(apply_rh(cells(phi, horizon), HurstParam(h))); },
        py::arg("cell_values"), py::arg("horizon"), py::arg("hurst"));
  m.def("rkhs_inner",
        [](const Array& a, const Array& b, double horizon, double h) {
          return rkhs_inner(cells(a, horizon), cells(b, horizon), HurstParam(h));
        },
        py::arg("phi"), py::arg("psi"), py::arg("horizon"), py::arg("hurst"));

  m.def("sample_bm",
        [](double horizon, std::size_t steps, std::size_t dim, std::uint64_t seed) {
          const TimeGrid g(horizon, steps);
          return to_array(sample_bm(g, dim, SeedSpec{seed, 0, 0, Channel::W1}),
                          {static_cast<py::ssize_t>(steps), static_cast<py::ssize_t>(dim)});
        },
        py::arg("horizon"), py::arg("steps"), py::arg("dim") = 1, py::arg("seed") = 0, "Brownian increments, (steps, dim).");
  m.def("sample_fbm",
        [](double horizon, std::size_t steps, double h, std::uint64_t seed, std::size_t dim, const std::string& method) {
          const TimeGrid g(horizon, steps);
          const SeedSpec s{seed, 0, 0, Channel::Fbm};
          std::vector<double> v;
          if (method == "exact") v = sample_fbm_exact(g, HurstParam(h), dim, s);
          else if (method == "volterra") v = sample_fbm_volterra(g, HurstParam(h), dim, s);
          else throw DomainError("method must be 'exact' or 'volterra'");
          return to_array(v, {static_cast<py::ssize_t>(steps + 1), static_cast<py::ssize_t>(dim)});
        },
        py::arg("horizon"), py::arg("steps"), py::arg("hurst"), py::arg("seed") = 0, py::arg("dim") = 1,
        py::arg("method") = "exact", "fBm node values, (steps + 1, dim).");

  m.def("wasserstein2", [](const Array& a, const Array& b) { return wasserstein2(cloud(a), cloud(b)).value; },
        py::arg("a"), py::arg("b"), "W2 distance between two point clouds of shape (N, d).");

  m.def("model_names", &builtin_model_names);

  m.def("simulate",
        [](const std::string& model, double horizon, std::size_t steps, std::size_t particles, std::vector<double> x0,
           std::vector<double> y0, double epsilon, double varepsilon, bool small_noise, double hurst, std::uint64_t seed,
           std::size_t threads) {
          const auto coeffs = builtin_model(model, hurst);
          const TimeGrid g(horizon, steps);
          ScaleParams s;
          s.epsilon = epsilon;
          s.varepsilon = varepsilon;
          s.small_noise = small_noise;
          EnsemblePath path(g, 1, 1);
          {
            py::gil_scoped_release nogil;
            WorkerPool pool(threads);
            path = simulate_slow_fast(coeffs, g, s, particles, x0, y0, SeedSpec{seed}, SimOptions{&pool});
          }
          const std::vector<py::ssize_t> shape = {static_cast<py::ssize_t>(g.nodes()), static_cast<py::ssize_t>(particles),
                                                  static_cast<py::ssize_t>(coeffs.dims.d)};
          std::vector<double> t(g.nodes());
          for (std::size_t k = 0; k < g.nodes(); ++k) t[k] = g.node(k);
          py::dict d;
          d["time"] = to_array(t, {static_cast<py::ssize_t>(g.nodes())});
          d["slow"] = to_array(path.slow, shape);
          d["fast"] = to_array(path.fast, shape);
          return d;
        },
        py::arg("model"), py::arg("horizon"), py::arg("steps"), py::arg("particles"), py::arg("x0"), py::arg("y0"),
        py::arg("epsilon") = 1.0, py::arg("varepsilon") = 1.0, py::arg("small_noise") = true, py::arg("hurst") = 0.75,
        py::arg("seed") = 0, py::arg("threads") = 1,
        "Particle simulation of a built-in model; arrays are (nodes, particles, d).");

  m.def("rate_function",
        [](const std::string& model, double horizon, std::size_t steps, std::vector<double> target, std::vector<double> x0,
           double hurst) {
          const auto coeffs = builtin_model(model, hurst);
          const AveragedDrift drift(coeffs);
          const TimeGrid g(horizon, steps);
          RateResult r(g, coeffs.dims.d1, coeffs.dims.d2);
          {
            py::gil_scoped_release nogil;
            r = rate_function(drift, g, EndpointConstraint::point(target), x0);
          }
          const auto d = static_cast<py::ssize_t>(coeffs.dims.d);
          const auto nodes = static_cast<py::ssize_t>(g.nodes());
          py::dict out;
          out["value"] = r.value;
          out["energy_h"] = r.energy_h;
          out["energy_hbar"] = r.energy_hbar;
          out["violation"] = r.violation;
          out["converged"] = r.converged;
          out["status"] = r.status;
          out["skeleton"] = to_array(r.skeleton.x, {nodes, d});
          out["limit"] = to_array(r.skeleton.limit, {nodes, d});
          out["hdot"] = to_array(r.controls.hdot, {static_cast<py::ssize_t>(steps),
                                                   static_cast<py::ssize_t>(coeffs.dims.d1 + coeffs.dims.d2)});
          out["hbar"] = to_array(r.controls.hbar.data(), {static_cast<py::ssize_t>(r.controls.hbar.samples()),
                                                          static_cast<py::ssize_t>(coeffs.dims.d1)});
          return out;
        },
        py::arg("model"), py::arg("horizon"), py::arg("steps"), py::arg("target"), py::arg("x0"), py::arg("hurst") = 0.75,
        "Minimal control energy reaching X(T) = target on the skeleton equation.");

  m.def("rare_event",
        [](const std::string& model, double horizon, std::size_t steps, std::vector<double> epsilons, double threshold,
           std::vector<double> x0, std::vector<double> y0, std::size_t n_mc, std::uint64_t seed, std::size_t component,
           bool above, double varepsilon_power, double hurst) {
          const auto coeffs = builtin_model(model, hurst);
          const TimeGrid g(horizon, steps);
          std::vector<ScaleParams> scales;
          for (double e : epsilons) {
            ScaleParams s;
            s.epsilon = e;
            s.varepsilon = std::pow(e, varepsilon_power);
            scales.push_back(s);
          }
          const TerminalEvent ev = [=](std::span<const double> x) {
            return above ? x[component] >= threshold : x[component] <= threshold;
          };
          std::vector<RareEventRow> rows;
          {
            py::gil_scoped_release nogil;
            rows = estimate_rare_event(coeffs, g, scales, x0, y0, ev, n_mc, SeedSpec{seed});
          }
          py::list out;
          for (const auto& r : rows) {
            py::dict d;
            d["epsilon"] = r.epsilon;
            d["varepsilon"] = r.varepsilon;
            d["hits"] = r.hits;
            d["trials"] = r.trials;
            d["p_hat"] = r.p_hat;
            d["ci"] = py::make_tuple(r.ci_lower, r.ci_upper);
            d["eps_log_p"] = r.eps_log_p;
            d["eps2h_log_p"] = r.eps2h_log_p;
            d["usable"] = r.usable;
            d["flag"] = r.flag;
            out.append(d);
          }
          return out;
        },
        py::arg("model"), py::arg("horizon"), py::arg("steps"), py::arg("epsilons"), py::arg("threshold"), py::arg("x0"),
        py::arg("y0"), py::arg("n_mc") = 10000, py::arg("seed") = 0, py::arg("component") = 0, py::arg("above") = true,
        py::arg("varepsilon_power") = 2.0, py::arg("hurst") = 0.75, "Monte Carlo estimate of P(X_T beyond threshold).");

  m.def("verify",
        [](const std::string& model, std::vector<std::string> checks, std::uint64_t seed, std::size_t particles,
           std::size_t threads, double hurst) {
          const auto coeffs = builtin_model(model, hurst);
          std::vector<CheckReport> reports;
          {
            py::gil_scoped_release nogil;
            WorkerPool pool(threads);
            SuiteOptions o;
            o.only = std::move(checks);
            o.seed = seed;
            o.particles = particles;
            o.pool = &pool;
            reports = default_suite(coeffs, o);
          }
          py::list out;
          for (const auto& r : reports) out.append(report_dict(r));
          return out;
        },
        py::arg("model"), py::arg("checks") = std::vector<std::string>{}, py::arg("seed") = 0, py::arg("particles") = 200,
        py::arg("threads") = 1, py::arg("hurst") = 0.75, "Runs the verification suite on a built-in model.");

  m.def("run_cli",
        [](std::vector<std::string> args) {
          args.insert(args.begin(), "mkvldp");
          std::vector<char*> argv;
          for (auto& a : args) argv.push_back(a.data());
          py::gil_scoped_release nogil;
          return cli::run_cli(static_cast<int>(argv.size()), argv.data(), std::cout, std::cerr);
        },
        py::arg("args"), "Runs the command-line front end, returning its exit code.");
}
