#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "mkvldp/cli.hpp"
#include "mkvldp/errors.hpp"
#include "mkvldp/expr.hpp"
#include "mkvldp/lemma.hpp"
#include "mkvldp/parallel.hpp"
#include "mkvldp/stats.hpp"

namespace mkvldp::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

constexpr const char* kSchema = "mkvldp-output/1";

std::string num(double v) {
  if (v == 0.0) v = 0.0;  // no "-0"
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Minimal CSV writer; every number goes through num() so output is byte-stable.
class Csv {
 public:
  Csv(const fs::path& path, const std::vector<std::string>& header) : os_(path, std::ios::binary) {
    if (!os_) throw ConfigError("cannot write " + path.string());
    for (std::size_t i = 0; i < header.size(); ++i) os_ << (i ? "," : "") << header[i];
    os_ << '\n';
  }
  Csv& operator<<(double v) { return field(num(v)); }
  Csv& operator<<(std::size_t v) { return field(std::to_string(v)); }
  Csv& operator<<(const std::string& s) { return field(s); }
  Csv& operator<<(const char* s) { return field(s); }
  void end() {
    os_ << '\n';
    first_ = true;
  }

 private:
  Csv& field(const std::string& s) {
    if (!first_) os_ << ',';
    os_ << s;
    first_ = false;
    return *this;
  }
  std::ofstream os_;
  bool first_ = true;
};

std::string comp(const char* prefix, std::size_t c) { return prefix + std::to_string(c); }

class Run {
 public:
  Run(const RunConfig& cfg, std::ostream& out)
      : cfg_(cfg), out_(out), pool_(cfg.threads), dir_(cfg.output), start_(std::chrono::steady_clock::now()) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw ConfigError("cannot create output directory " + dir_.string() + ": " + ec.message());
    std::ofstream(dir_ / "config_echo.json", std::ios::binary) << cfg_.echo << '\n';
    files_.push_back("config_echo.json");
  }

  int execute() {
    int code = kOk;
    if (cfg_.command == "simulate") code = simulate();
    else if (cfg_.command == "average") code = average();
    else if (cfg_.command == "rate") code = rate();
    else if (cfg_.command == "rare") code = rare();
    else if (cfg_.command == "verify") code = verify();
    write_manifest(code);
    return code;
  }

 private:
  fs::path file(const std::string& name) {
    files_.push_back(name);
    return dir_ / name;
  }

  SimOptions sim() { return SimOptions{&pool_, true, 10.0}; }
  SeedSpec seed() const { return SeedSpec{cfg_.seed}; }
  std::size_t d() const { return cfg_.model.dims.d; }

  void write_trajectories(Csv& csv, std::size_t r, const EnsemblePath& path) {
    for (std::size_t p = 0; p < path.particles; ++p) {
      for (std::size_t k = 0; k < path.grid.nodes(); ++k) {
        csv << r << p << path.grid.node(k);
        for (double v : path.x(k, p)) csv << v;
        if (!path.fast.empty()) {
          for (double v : path.y(k, p)) csv << v;
        }
        csv.end();
      }
    }
  }

  // long format: replicate, time, variable, statistic, value
  void write_moments(Csv& csv, std::size_t r, const EnsemblePath& path) {
    const std::size_t n = path.particles;
    std::vector<double> buf(n);
    auto emit = [&](std::size_t k, const std::string& var, auto get) {
      for (std::size_t p = 0; p < n; ++p) buf[p] = get(p);
      const MeanVar mv = mean_var(buf);
      csv << r << path.grid.node(k) << var << "mean" << mv.mean;
      csv.end();
      csv << r << path.grid.node(k) << var << "var" << mv.variance;
      csv.end();
    };
    for (std::size_t k = 0; k < path.grid.nodes(); ++k) {
      for (std::size_t c = 0; c < path.dim; ++c) {
        emit(k, comp("x", c), [&](std::size_t p) { return path.x(k, p)[c]; });
      }
      if (!path.fast.empty()) {
        for (std::size_t c = 0; c < path.dim; ++c) {
          emit(k, comp("y", c), [&](std::size_t p) { return path.y(k, p)[c]; });
        }
      }
    }
  }

  std::vector<std::string> path_header() const {
    std::vector<std::string> h = {"replicate", "particle", "time"};
    for (std::size_t c = 0; c < d(); ++c) h.push_back(comp("x", c));
    return h;
  }

  int simulate() {
    auto header = path_header();
    for (std::size_t c = 0; c < d(); ++c) header.push_back(comp("y", c));
    std::optional<Csv> traj;
    if (cfg_.write_trajectories) traj.emplace(file("trajectories.csv"), header);
    Csv moments(file("moments.csv"), {"replicate", "time", "variable", "statistic", "value"});
    double terminal = 0.0;
    for (std::size_t r = 0; r < cfg_.replicates; ++r) {
      const EnsemblePath path = simulate_slow_fast(cfg_.model, cfg_.grid, cfg_.scales, cfg_.particles, cfg_.x0,
                                                   cfg_.y0, seed().with_replicate(static_cast<std::uint32_t>(r)), sim());
      if (traj) write_trajectories(*traj, r, path);
      write_moments(moments, r, path);
      terminal += path.slow_moment(cfg_.grid.steps(), 2.0) / static_cast<double>(cfg_.replicates);
    }
    out_ << "simulate: " << cfg_.replicates << " replicate(s) x " << cfg_.particles
         << " particles, E|X_T|^2 = " << num(terminal) << '\n';
    return kOk;
  }

  AveragedDrift::Mode drift_mode() const {
    if (cfg_.fbar_mode == "analytic") return AveragedDrift::Mode::Analytic;
    if (cfg_.fbar_mode == "estimated") return AveragedDrift::Mode::Estimated;
    return AveragedDrift::Mode::Auto;
  }

  int average() {
    const AveragedDrift drift(cfg_.model, drift_mode(), cfg_.invariant, cfg_.seed);
    const auto limit = solve_limit_ode(drift, cfg_.grid, cfg_.x0);
    {
      Csv csv(file("limit.csv"), {"time", "component", "value"});
      for (std::size_t k = 0; k < cfg_.grid.nodes(); ++k) {
        for (std::size_t c = 0; c < d(); ++c) {
          csv << cfg_.grid.node(k) << c << limit[k * d() + c];
          csv.end();
        }
      }
    }
    {
      // probe measures are point masses at the probe state
      Csv csv(file("fbar_probes.csv"), {"probe", "kind", "component", "value"});
      std::vector<double> fb(d());
      for (std::size_t i = 0; i < cfg_.fbar_probes.size(); ++i) {
        const auto& x = cfg_.fbar_probes[i];
        drift(x, EmpiricalMeasure::dirac(x), fb);
        for (std::size_t c = 0; c < d(); ++c) {
          csv << i << "x" << c << x[c];
          csv.end();
        }
        for (std::size_t c = 0; c < d(); ++c) {
          csv << i << "fbar" << c << fb[c];
          csv.end();
        }
      }
    }
    std::optional<Csv> traj;
    if (cfg_.write_trajectories) traj.emplace(file("trajectories.csv"), path_header());
    Csv moments(file("moments.csv"), {"replicate", "time", "variable", "statistic", "value"});
    for (std::size_t r = 0; r < cfg_.replicates; ++r) {
      const EnsemblePath path = simulate_averaged(drift, cfg_.grid, cfg_.particles, cfg_.x0,
                                                  seed().with_replicate(static_cast<std::uint32_t>(r)), sim());
      if (traj) write_trajectories(*traj, r, path);
      write_moments(moments, r, path);
    }
    out_ << "average: f-bar " << (drift.analytic() ? "analytic" : "estimated") << ", limit X_T[0] = "
         << num(limit[cfg_.grid.steps() * d()]) << '\n';
    return kOk;
  }

  int rate() {
    const AveragedDrift drift(cfg_.model, drift_mode(), cfg_.invariant, cfg_.seed);
    RateOptions opts = cfg_.rate;
    opts.pool = &pool_;
    opts.seed = cfg_.seed;
    std::vector<std::string> header = {"target"};
    for (std::size_t c = 0; c < d(); ++c) header.push_back(comp("a", c));
    for (const char* h : {"value", "energy_h", "energy_hbar", "violation", "iterations", "evaluations",
                          "converged", "status"}) {
      header.push_back(h);
    }
    Csv summary(file("rate.csv"), header);
    Csv skel(file("skeleton.csv"), {"target", "time", "component", "skeleton", "limit"});
    Csv ctrl(file("controls.csv"), {"target", "cell", "time", "channel", "value"});
    bool all_ok = true;
    for (std::size_t i = 0; i < cfg_.targets.size(); ++i) {
      const RateResult r = rate_function(drift, cfg_.grid, EndpointConstraint::point(cfg_.targets[i]), cfg_.x0, opts);
      all_ok = all_ok && r.converged;
      summary << i;
      for (double a : cfg_.targets[i]) summary << a;
      summary << r.value << r.energy_h << r.energy_hbar << r.violation << r.iterations << r.evaluations
              << (r.converged ? "1" : "0") << (r.converged ? std::string("ok") : "infeasible: " + r.status);
      summary.end();
      for (std::size_t k = 0; k < cfg_.grid.nodes(); ++k) {
        for (std::size_t c = 0; c < d(); ++c) {
          skel << i << cfg_.grid.node(k) << c << r.skeleton.x[k * d() + c] << r.skeleton.limit[k * d() + c];
          skel.end();
        }
      }
      const auto& cp = r.controls;
      const std::size_t m = cp.d1 + cp.d2;
      for (std::size_t k = 0; k < cfg_.grid.steps(); ++k) {
        for (std::size_t c = 0; c < m; ++c) {
          ctrl << i << k << cfg_.grid.node(k) << comp("hdot", c) << cp.hdot_at(k, c);
          ctrl.end();
        }
      }
      const GridFunction& hb = cp.hbar;
      for (std::size_t k = 0; k < hb.samples(); ++k) {
        for (std::size_t c = 0; c < hb.dim(); ++c) {
          ctrl << i << k << cfg_.grid.node(k) << comp("hbar", c) << hb.at(k, c);
          ctrl.end();
        }
      }
      out_ << "rate: target " << i << " I = " << num(r.value) << (r.converged ? "" : " (infeasible: " + r.status + ")")
           << '\n';
    }
    return all_ok ? kOk : kFailedResult;
  }

  std::vector<ScaleParams> rare_scales() const {
    std::vector<ScaleParams> s;
    for (double e : cfg_.epsilons) {
      ScaleParams p;
      p.epsilon = e;
      p.varepsilon = std::pow(e, cfg_.varepsilon_power);
      p.delta = 0.0;
      p.small_noise = true;
      s.push_back(p);
    }
    return s;
  }

  int rare() {
    const auto scales = rare_scales();
    MonteCarloOptions mc;
    mc.batch = cfg_.batch;
    mc.sim = sim();
    const std::size_t comp_index = cfg_.event_component;
    const double thr = cfg_.threshold;
    const bool above = cfg_.above;
    const TerminalEvent event = [=](std::span<const double> xt) {
      return above ? xt[comp_index] >= thr : xt[comp_index] <= thr;
    };
    const auto rows = estimate_rare_event(cfg_.model, cfg_.grid, scales, cfg_.x0, cfg_.y0, event, cfg_.n_mc, seed(), mc);
    {
      Csv csv(file("rare.csv"), {"epsilon", "varepsilon", "hits", "trials", "p_hat", "ci_lower", "ci_upper",
                                 "eps_log_p", "eps2h_log_p", "usable", "flag"});
      for (const auto& r : rows) {
        csv << r.epsilon << r.varepsilon << r.hits << r.trials << r.p_hat << r.ci_lower << r.ci_upper << r.eps_log_p
            << r.eps2h_log_p << (r.usable ? "1" : "0") << r.flag;
        csv.end();
        out_ << "rare: eps = " << num(r.epsilon) << " p = " << num(r.p_hat) << " (" << r.hits << "/" << r.trials
             << ")" << (r.flag.empty() ? "" : " [" + r.flag + "]") << '\n';
      }
    }
    if (!cfg_.rho.empty()) {
      const Expr rho = Expr::parse(cfg_.rho, d());
      const std::size_t dim = d();
      const std::size_t last = cfg_.grid.steps();
      const PathFunctional f = [rho, dim, last](std::span<const double> path) {
        const auto xt = path.subspan(last * dim, dim);
        double m2 = 0.0;
        for (double v : xt) m2 += v * v;
        return rho.eval(ExprContext{xt, {}, xt, m2});
      };
      const auto lap = laplace_functional(cfg_.model, cfg_.grid, scales, cfg_.x0, cfg_.y0, f, cfg_.rho_bound,
                                          cfg_.n_mc, seed().with_channel(Channel::Optimizer), mc);
      Csv csv(file("laplace.csv"), {"epsilon", "varepsilon", "value_eps", "value_eps2h", "rho_min", "rho_max",
                                    "degenerate", "flag"});
      for (const auto& r : lap) {
        csv << r.epsilon << r.varepsilon << r.value_eps << r.value_eps2h << r.rho_min << r.rho_max
            << (r.degenerate ? "1" : "0") << r.flag;
        csv.end();
      }
    }
    return kOk;
  }

  int verify() {
    SuiteOptions opts;
    opts.only = cfg_.checks;
    opts.seed = cfg_.seed;
    opts.particles = cfg_.particles;
    opts.pool = &pool_;
    const auto reports = default_suite(cfg_.model, opts);
    Csv checks(file("checks.csv"), {"check", "model", "verdict", "kind", "name", "value"});
    Csv rows(file("check_rows.csv"), {"check", "row", "column", "value"});
    std::ofstream summary(file("summary.txt"), std::ios::binary);
    bool failed = false;
    for (const auto& r : reports) {
      const std::string verdict = to_string(r.verdict);
      failed = failed || r.verdict == Verdict::Fail;
      for (const auto& [k, v] : r.parameters) {
        checks << r.check << r.model << verdict << "parameter" << k << v;
        checks.end();
      }
      for (const auto& [k, v] : r.fitted) {
        checks << r.check << r.model << verdict << "fitted" << k << v;
        checks.end();
      }
      for (std::size_t i = 0; i < r.rows.size(); ++i) {
        for (std::size_t j = 0; j < r.rows[i].size() && j < r.columns.size(); ++j) {
          rows << r.check << i << r.columns[j] << r.rows[i][j];
          rows.end();
        }
      }
      summary << r.check << ": " << verdict << (r.notes.empty() ? "" : " - " + r.notes) << '\n';
      out_ << "verify " << r.check << ": " << verdict << '\n';
    }
    return failed ? kFailedResult : kOk;
  }

  void write_manifest(int code) {
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    const std::time_t now = std::time(nullptr);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    json m = {{"schema", kSchema},
              {"command", cfg_.command},
              {"model", cfg_.model_name},
              {"seed", cfg_.seed},
              {"threads", pool_.size()},
              {"exit_code", code},
              {"finished_utc", stamp},
              {"wall_clock_seconds", wall},
              {"files", files_}};
    std::ofstream(dir_ / "manifest.json", std::ios::binary) << m.dump(2) << '\n';
  }

  const RunConfig& cfg_;
  std::ostream& out_;
  WorkerPool pool_;
  fs::path dir_;
  std::chrono::steady_clock::time_point start_;
  std::vector<std::string> files_;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int run_command(const RunConfig& cfg, std::ostream& out) { return Run(cfg, out).execute(); }

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Slow-fast McKean-Vlasov simulation and large deviation tools", "mkvldp"};
  std::string command;
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  std::optional<std::string> outdir;
  app.add_option("command", command, "simulate | average | rate | rare | verify")
      ->required()
      ->check(CLI::IsMember({"simulate", "average", "rate", "rare", "verify"}));
  app.add_option("--config", config_path, "JSON config file")->required();
  app.add_option("--seed", seed, "master seed (overrides the config)");
  app.add_option("--threads", threads, "worker threads, 0 = all cores (overrides the config)");
  app.add_option("--out", outdir, "output directory (overrides the config)");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }

  try {
    json j;
    try {
      j = json::parse(read_file(config_path));
    } catch (const json::parse_error& e) {
      throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    if (seed) j["seed"] = *seed;
    if (threads) j["threads"] = *threads;
    if (outdir) j["output"] = *outdir;
    const RunConfig cfg = parse_config(j.dump(), command);
    return run_command(cfg, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const DomainError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const UnsupportedBranch& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const ResolutionError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const BlowUpError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kNumericalError;
  } catch (const GenerationError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kNumericalError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kNumericalError;
  }
}

}  // namespace mkvldp::cli
