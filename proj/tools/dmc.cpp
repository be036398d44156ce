// Command-line front end: every subcommand writes CSV series plus a
// report.json into the output directory.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "dmc/adjoint/adjoint.hpp"
#include "dmc/carleman/carleman.hpp"
#include "dmc/core/csv.hpp"
#include "dmc/core/quadrature.hpp"
#include "dmc/duality/duality.hpp"
#include "dmc/errors.hpp"
#include "dmc/forward/forward.hpp"
#include "dmc/forward/random_system.hpp"
#include "dmc/heat/heat.hpp"
#include "dmc/io/json_io.hpp"
#include "dmc/observability/observability.hpp"
#include "dmc/simd/kernels.hpp"
#include "dmc/synthesis/synthesis.hpp"
#include "dmc_schemas.hpp"

namespace fs = std::filesystem;
using dmc::io::Json;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct Context {
  std::string out_dir = ".";
  int jobs = 1;
  std::uint64_t seed = 0;
  std::vector<std::string> files;
};

void write_text(Context& ctx, const std::string& name,
                const std::function<void(std::ostream&)>& body) {
  const fs::path path = fs::path(ctx.out_dir) / name;
  std::ofstream os(path);
  dmc::require(static_cast<bool>(os), dmc::ErrorKind::kConfig,
               "cannot write " + path.string());
  body(os);
  ctx.files.push_back(name);
}

void write_report(Context& ctx, const std::string& command,
                  const std::string& inputs, Json metrics) {
  Json report;
  report["command"] = command;
  report["version"] = DMC_VERSION;
  report["inputs_hash"] = dmc::io::fnv1a_hex(command + "\n" + inputs);
  report["seed"] = ctx.seed;
  report["isa"] = std::string(dmc::simd::isa_name(dmc::simd::active_isa()));
  report["metrics"] = std::move(metrics);
  report["files"] = ctx.files;
  const fs::path path = fs::path(ctx.out_dir) / "report.json";
  std::ofstream os(path);
  dmc::require(static_cast<bool>(os), dmc::ErrorKind::kConfig,
               "cannot write " + path.string());
  os << report.dump(2) << '\n';
}

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json terminal_json(const dmc::TerminalReport& r) {
  return {{"res_a", r.res_a},
          {"res_b", r.res_b},
          {"res_c", r.res_c},
          {"satisfied",
           {{"a", r.satisfied[0]}, {"b", r.satisfied[1]}, {"c", r.satisfied[2]}}}};
}

void write_row(std::ostream& os, double t, const Eigen::Ref<const dmc::Vec>& v) {
  dmc::write_number(os, t);
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    os << ',';
    dmc::write_number(os, v(i));
  }
  os << '\n';
}

void write_signal(std::ostream& os, const dmc::TimeGrid& g,
                  const dmc::NodeSignal& u, const std::string& prefix) {
  os << 't';
  for (Eigen::Index i = 0; i < u.rows(); ++i) os << ',' << prefix << '_' << i + 1;
  os << '\n';
  for (int k = 0; k <= g.n_steps; ++k) write_row(os, g.time(k), u.col(k));
}

// Runs fn(i) for i in [0, count) on up to `jobs` threads.
template <class Fn>
void parallel_for(int count, int jobs, Fn fn) {
  const int workers = std::clamp(jobs, 1, std::max(count, 1));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (int i = w; i < count; i += workers) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

// ---- simulate -------------------------------------------------------------

int run_simulate(Context& ctx, const std::string& config) {
  const Json doc = dmc::io::read_json_file(config);
  const auto p = dmc::io::problem_from_json(doc);
  const auto u = doc.contains("control")
                     ? dmc::io::control_from_json(doc.at("control"), p.system.m(), p.grid)
                     : dmc::NodeSignal::Zero(p.system.m(), p.grid.n_steps + 1);
  const auto y = dmc::simulate_forward(p.system, u, p.grid);
  const auto fs_sol = dmc::fundamental_solution(p.system, p.grid);
  double max_norm = 0.0;
  for (int k = y.first_node; k <= y.last_node(); ++k) {
    max_norm = std::max(max_norm, y.at(k).norm());
  }
  write_text(ctx, "trajectory.csv", [&](std::ostream& os) { y.write_csv(os); });
  write_report(ctx, "simulate", doc.dump(),
               {{"n", p.system.n()},
                {"m", p.system.m()},
                {"nt", p.grid.n_steps},
                {"dt", p.grid.dt},
                {"final_norm", y.final_state().norm()},
                {"max_norm", max_norm},
                {"fundamental_bound", fs_sol.bound}});
  return 0;
}

// ---- adjoint --------------------------------------------------------------

dmc::Vec terminal_datum(const Json& doc, const char* key, int n) {
  if (!doc.contains(key)) return dmc::Vec::Zero(n);
  dmc::Vec v = dmc::io::vector_from_json(doc.at(key), key);
  dmc::require(v.size() == n, dmc::ErrorKind::kConfig,
               std::string(key) + " must have n entries");
  return v;
}

int run_adjoint(Context& ctx, const std::string& config) {
  const Json doc = dmc::io::read_json_file(config);
  const auto p = dmc::io::problem_from_json(doc);
  const int n = p.system.n();
  const auto adj = dmc::simulate_adjoint(p.system, terminal_datum(doc, "w_T", n),
                                         terminal_datum(doc, "z_T", n), p.grid);
  std::optional<double> deriv;
  try {
    deriv = dmc::adjoint_time_derivative_residual(p.system, adj);
  } catch (const dmc::Error& e) {
    if (e.kind() != dmc::ErrorKind::kUnsupportedKernel) throw;
  }
  double obs = 0.0;
  for (int k = 0; k <= p.grid.n_steps; ++k) {
    obs += dmc::trapezoid_weight(k, 0, p.grid.n_steps, p.grid.dt) *
           adj.observation.col(k).squaredNorm();
  }
  write_text(ctx, "adjoint.csv", [&](std::ostream& os) {
    const int N = p.grid.n_steps;
    os << 't';
    for (int i = 0; i < n; ++i) os << ",w_" << i + 1;
    for (int i = 0; i < p.system.m(); ++i) os << ",obs_" << i + 1;
    os << '\n';
    for (int k = adj.traj.first_node; k <= adj.traj.last_node(); ++k) {
      dmc::Vec row(n + p.system.m());
      row.head(n) = adj.traj.at(k);
      row.tail(p.system.m()) =
          k >= 0 && k <= N ? dmc::Vec(adj.observation.col(k)) : dmc::Vec::Zero(p.system.m());
      write_row(os, p.grid.time(k), row);
    }
  });
  write_report(ctx, "adjoint", doc.dump(),
               {{"n", n},
                {"w0_norm", adj.traj.at(0).norm()},
                {"observation_l2", std::sqrt(obs)},
                {"extended_into_history", adj.traj.first_node < 0},
                {"derivative_residual", deriv ? Json(*deriv) : Json(nullptr)}});
  return 0;
}

// ---- duality --------------------------------------------------------------

struct DualityInstance {
  dmc::DelaySystem sys;
  dmc::NodeSignal u;
  dmc::Vec w_T;
  dmc::Vec z_T;
  dmc::TimeGrid grid;
};

DualityInstance random_duality_instance(int n, std::uint64_t seed, int nt) {
  DualityInstance d;
  d.grid = dmc::TimeGrid::uniform(1.0, nt, 0.25);
  d.sys = dmc::random_system(n, n, seed, d.grid);
  d.u = dmc::random_control(n, seed, d.grid);
  dmc::CounterRng rng(seed + 100);
  d.w_T = rng.unit_vector(n);
  d.z_T = rng.unit_vector(n);
  return d;
}

int run_duality(Context& ctx, const std::string& config, int n, bool study,
                double theta, double t1) {
  Json inputs;
  std::function<DualityInstance(int)> make;
  int base_nt = 400;
  if (!config.empty()) {
    const Json doc = dmc::io::read_json_file(config);
    inputs = doc;
    base_nt = doc.value("nt", base_nt);
    make = [doc](int nt) {
      Json d = doc;
      d["nt"] = nt;
      auto p = dmc::io::problem_from_json(d);
      DualityInstance inst;
      inst.grid = p.grid;
      inst.sys = std::move(p.system);
      inst.u = d.contains("control")
                   ? dmc::io::control_from_json(d.at("control"), inst.sys.m(), inst.grid)
                   : dmc::NodeSignal::Zero(inst.sys.m(), inst.grid.n_steps + 1);
      inst.w_T = terminal_datum(d, "w_T", inst.sys.n());
      inst.z_T = terminal_datum(d, "z_T", inst.sys.n());
      return inst;
    };
  } else {
    dmc::require(n >= 1, dmc::ErrorKind::kConfig, "--n must be positive");
    inputs = {{"n", n}, {"seed", ctx.seed}};
    const std::uint64_t seed = ctx.seed;
    make = [n, seed](int nt) { return random_duality_instance(n, seed, nt); };
  }
  inputs["theta"] = theta;
  inputs["t1"] = t1;
  inputs["study"] = study;

  auto evaluate = [&](int nt) {
    DualityInstance d = make(nt);
    const double T = d.sys.T;
    return dmc::duality_residual(d.sys, d.u, d.w_T, d.z_T, theta,
                                 std::isnan(t1) ? T : t1, d.grid);
  };
  const dmc::DualityReport r = evaluate(base_nt);
  Json metrics = {{"theta", r.theta}, {"t1", r.t1},   {"lhs", r.lhs},
                  {"i1", r.i1},       {"i2", r.i2},   {"i3", r.i3},
                  {"i4", r.i4},       {"i3_alt", r.i3_alt},
                  {"residual", r.residual}};
  if (study) {
    const std::vector<int> nts{base_nt / 4, base_nt / 2, base_nt, base_nt * 2};
    std::vector<dmc::DualityReport> rows(nts.size());
    parallel_for(static_cast<int>(nts.size()), ctx.jobs,
                 [&](int i) { rows[i] = evaluate(nts[i]); });
    Json study_rows = Json::array();
    write_text(ctx, "duality_study.csv", [&](std::ostream& os) {
      os << "dt,residual,ratio\n";
      for (std::size_t i = 0; i < nts.size(); ++i) {
        const double dt = 1.0 / nts[i];
        dmc::write_number(os, dt);
        os << ',';
        dmc::write_number(os, rows[i].residual);
        os << ',';
        Json ratio = nullptr;
        if (i > 0) {
          const double q = rows[i - 1].residual / rows[i].residual;
          dmc::write_number(os, q);
          ratio = number_or_null(q);
        }
        os << '\n';
        study_rows.push_back({{"dt", dt}, {"residual", rows[i].residual}, {"ratio", ratio}});
      }
    });
    metrics["study"] = study_rows;
  }
  write_report(ctx, "duality", inputs.dump(), metrics);
  return 0;
}

// ---- observability --------------------------------------------------------

int run_observability(Context& ctx, const std::string& config, bool gramian_csv) {
  const Json doc = dmc::io::read_json_file(config);
  const auto p = dmc::io::problem_from_json(doc);
  const Json opts = doc.value("observability", Json::object());
  dmc::ObservabilityOptions o;
  o.theta_samples = opts.value("theta_samples", o.theta_samples);
  o.t1_samples = opts.value("t1_samples", o.t1_samples);
  o.threads = ctx.jobs;
  const auto rep = dmc::observability_gramian(p.system, p.grid, o);
  const int probes = opts.value("probe_samples", 64);
  const auto probe = dmc::unique_continuation_probe(p.system, p.grid, probes, ctx.seed);

  Json kpp = Json::array();
  for (Eigen::Index i = 0; i < rep.k_per_pair.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < rep.k_per_pair.cols(); ++j) {
      row.push_back(number_or_null(rep.k_per_pair(i, j)));
    }
    kpp.push_back(row);
  }
  const bool observable = rep.verdict == dmc::Verdict::kObservable;
  Json metrics = {
      {"eigenvalues", dmc::io::to_json(rep.eigenvalues)},
      {"rank", static_cast<int>(rep.eigenvalues.size() - rep.null_vectors.cols())},
      {"verdict", observable ? "observable" : "unobservable_direction"},
      {"offending", observable ? Json(nullptr) : dmc::io::to_json(rep.offending)},
      {"constant_K", rep.k_finite() ? Json(rep.constant_K) : Json("unobservable")},
      {"thetas", rep.thetas},
      {"t1s", rep.t1s},
      {"k_per_pair", kpp},
      {"probe_worst_ratio", number_or_null(probe.worst_ratio)}};
  if (gramian_csv) {
    write_text(ctx, "gramian.csv", [&](std::ostream& os) {
      for (Eigen::Index i = 0; i < rep.gramian.rows(); ++i) {
        for (Eigen::Index j = 0; j < rep.gramian.cols(); ++j) {
          if (j > 0) os << ',';
          dmc::write_number(os, rep.gramian(i, j));
        }
        os << '\n';
      }
    });
  }
  Json inputs = doc;
  inputs["probe_seed"] = ctx.seed;
  write_report(ctx, "observability", inputs.dump(), metrics);
  return 0;
}

// ---- synthesize -----------------------------------------------------------

const char* method_name(dmc::SynthesisMethod m) {
  switch (m) {
    case dmc::SynthesisMethod::kAuto: return "auto";
    case dmc::SynthesisMethod::kDirect: return "direct";
    case dmc::SynthesisMethod::kConjugateGradient: return "cg";
    case dmc::SynthesisMethod::kGradientDescent: return "gradient";
  }
  return "auto";
}

void write_iterates(Context& ctx, const std::vector<dmc::IterateRecord>& log) {
  write_text(ctx, "iterates.csv", [&](std::ostream& os) {
    os << "outer,inner,rho,cost,grad_norm,res_a,res_b,res_c\n";
    for (const auto& r : log) {
      os << r.outer << ',' << r.inner;
      for (double v : {r.rho, r.cost, r.grad_norm, r.res_a, r.res_b, r.res_c}) {
        os << ',';
        dmc::write_number(os, v);
      }
      os << '\n';
    }
  });
}

int run_synthesize(Context& ctx, const std::string& config) {
  const Json doc = dmc::io::read_json_file(config);
  const auto p = dmc::io::problem_from_json(doc);
  const auto cfg =
      dmc::io::synthesis_config_from_json(doc.value("synthesis", Json::object()));
  ctx.seed = cfg.seed;
  const auto free = dmc::verify_terminal_conditions(
      dmc::simulate_forward(p.system, dmc::NodeSignal(), p.grid), p.system.Mtilde,
      p.system.h, cfg.tol, cfg.theta_samples);
  const auto res = dmc::synthesize_control(p.system, p.grid, cfg);
  double energy = 0.0;
  for (int k = 1; k <= p.grid.n_steps; ++k) {
    energy += p.grid.dt * res.control.col(k).squaredNorm();
  }
  write_text(ctx, "control.csv",
             [&](std::ostream& os) { write_signal(os, p.grid, res.control, "u"); });
  write_text(ctx, "trajectory.csv",
             [&](std::ostream& os) { res.trajectory.write_csv(os); });
  write_iterates(ctx, res.log);
  Json metrics = terminal_json(res.report);
  metrics["converged"] = res.converged;
  metrics["iterations"] = res.total_inner;
  metrics["control_l2"] = std::sqrt(energy);
  metrics["free_res_a"] = free.res_a;
  metrics["method"] = method_name(cfg.method);
  write_report(ctx, "synthesize", doc.dump(), metrics);
  return 0;
}

// ---- heat-demo ------------------------------------------------------------

int run_heat(Context& ctx, const std::string& config, bool figure) {
  const Json doc = dmc::io::read_json_file(config);
  const auto cfg = dmc::io::heat_config_from_json(doc);
  ctx.seed = cfg.synthesis.seed;
  const auto res = dmc::run_experiment(cfg);
  const fs::path dir(ctx.out_dir);
  dmc::write_field_csv((dir / "field.csv").string(), res.trajectory, res.x);
  ctx.files.push_back("field.csv");
  dmc::write_norms_csv((dir / "norms.csv").string(), res);
  ctx.files.push_back("norms.csv");
  if (figure) {
    const auto fig = dmc::extend_to_figure(cfg, res);
    dmc::write_field_csv((dir / "figure.csv").string(), fig, res.x);
    ctx.files.push_back("figure.csv");
  }
  if (res.synthesis) write_iterates(ctx, res.synthesis->log);
  Json metrics = terminal_json(res.report);
  metrics["memory_residual"] = res.memory_residual;
  metrics["window_sup"] = res.window_sup;
  metrics["final_l2"] = res.l2_norms.back();
  metrics["nx"] = cfg.nx;
  metrics["nt"] = cfg.nt;
  Json inputs = doc;
  inputs["figure"] = figure;
  write_report(ctx, "heat-demo", inputs.dump(), metrics);
  return 0;
}

// ---- weights --------------------------------------------------------------

int run_weights(Context& ctx, const std::string& spec_path,
                const std::string& field_path) {
  const Json doc = dmc::io::read_json_file(spec_path);
  const auto spec = dmc::io::weight_spec_from_json(doc);
  const auto field = dmc::io::read_field_csv(field_path, spec.h);
  dmc::require(std::abs(field.T - spec.T) <= 1e-9 * spec.T, dmc::ErrorKind::kConfig,
               "field horizon does not match the weight spec T");
  const auto ih = dmc::functional_IH(field, spec);
  const double io = dmc::functional_IO(field, spec);
  const double psi_max = dmc::psi_sup(spec, field.nt(), field.nx());
  write_text(ctx, "weights.csv", [&](std::ostream& os) {
    os << "t,x,phi,theta\n";
    const double dx = std::numbers::pi / (field.nx() + 1);
    for (int k = 1; k < field.nt(); ++k) {
      for (int j = 1; j <= field.nx(); ++j) {
        const auto w = dmc::eval_weights(spec, k * field.dt(), j * dx, psi_max);
        for (double v : {k * field.dt(), j * dx, w.phi}) {
          dmc::write_number(os, v);
          os << ',';
        }
        dmc::write_number(os, w.theta);
        os << '\n';
      }
    }
  });
  std::ifstream raw(field_path);
  std::string field_text((std::istreambuf_iterator<char>(raw)), {});
  write_report(ctx, "weights", doc.dump() + "\n" + field_text,
               {{"I_H",
                 {{"laplacian", ih.laplacian},
                  {"delayed_laplacian", ih.delayed_laplacian},
                  {"time_derivative", ih.time_derivative},
                  {"gradient", ih.gradient},
                  {"zeroth", ih.zeroth},
                  {"total", ih.total()}}},
                {"I_O", io}});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Delay and memory-type null controllability toolkit", "dmc"};
  app.set_version_flag("--version", std::string(DMC_VERSION));
  Context ctx;
  std::string schema;
  app.add_option("--schema", schema, "Print the report schema of a subcommand and exit");
  app.add_option("--jobs", ctx.jobs, "Worker threads for independent sweep entries")
      ->check(CLI::PositiveNumber);
  app.add_option("--out", ctx.out_dir, "Output directory");
  app.add_option("--seed", ctx.seed, "Seed for random instances and probes");
  app.add_option_function<std::string>(
      "--isa",
      [](const std::string& v) {
        using dmc::simd::Isa;
        const Isa want = v == "avx2" ? Isa::kAvx2 : v == "neon" ? Isa::kNeon : Isa::kScalar;
        if (!dmc::simd::isa_available(want)) {
          throw CLI::ValidationError("--isa", v + " is not available on this CPU");
        }
        dmc::simd::set_active_isa(want);
      },
      "Force a kernel set: scalar, avx2 or neon")
      ->check(CLI::IsMember({"scalar", "avx2", "neon"}));
  app.require_subcommand(0, 1);

  std::string config;
  auto* sim = app.add_subcommand("simulate", "Forward simulation of a problem file");
  sim->add_option("--config", config, "Problem JSON")->required();

  auto* adj = app.add_subcommand("adjoint", "Backward adjoint solve");
  adj->add_option("--config", config, "Problem JSON with w_T and z_T")->required();

  int dual_n = 3;
  bool dt_study = false;
  double theta = 0.0;
  double t1 = std::numeric_limits<double>::quiet_NaN();
  auto* dual = app.add_subcommand("duality", "Duality identity residual");
  dual->add_option("--config", config, "Problem JSON (otherwise a random instance)");
  dual->add_option("--n", dual_n, "State dimension of the random instance");
  dual->add_flag("--dt-study", dt_study, "Residual at four step sizes with ratios");
  dual->add_option("--theta", theta, "Pairing point in [-h, 0]");
  dual->add_option("--t1", t1, "Upper time in [T - h, T] (default T)");

  bool gramian_csv = false;
  auto* obs = app.add_subcommand("observability", "Gramian, verdict and constant K");
  obs->add_option("--config", config, "Problem JSON")->required();
  obs->add_flag("--gramian", gramian_csv, "Also write gramian.csv");

  auto* syn = app.add_subcommand("synthesize", "Penalty synthesis of a control");
  syn->add_option("--config", config, "Problem JSON with a synthesis block")->required();

  bool figure = false;
  auto* heat = app.add_subcommand("heat-demo", "1-D heat experiment");
  heat->add_option("--config", config, "Heat config JSON")->required();
  heat->add_flag("--figure", figure, "Write the surface on [-h, T + h]");

  std::string spec_path, field_path;
  auto* wts = app.add_subcommand("weights", "Carleman weights and functionals");
  wts->add_option("--spec", spec_path, "Weight spec JSON")->required();
  wts->add_option("--field", field_path, "Field CSV (t,x,value)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (!schema.empty()) {
      const auto& table = dmc_schemas();
      const auto it = table.find(schema);
      dmc::require(it != table.end(), dmc::ErrorKind::kConfig,
                   "no schema for '" + schema + "'");
      std::cout << it->second;
      return 0;
    }
    if (app.get_subcommands().empty()) {
      std::cerr << app.help();
      return kExitConfig;
    }
    std::error_code ec;
    fs::create_directories(ctx.out_dir, ec);
    dmc::require(!ec, dmc::ErrorKind::kConfig, "cannot create " + ctx.out_dir);

    if (sim->parsed()) return run_simulate(ctx, config);
    if (adj->parsed()) return run_adjoint(ctx, config);
    if (dual->parsed()) return run_duality(ctx, config, dual_n, dt_study, theta, t1);
    if (obs->parsed()) return run_observability(ctx, config, gramian_csv);
    if (syn->parsed()) return run_synthesize(ctx, config);
    if (heat->parsed()) return run_heat(ctx, config, figure);
    if (wts->parsed()) return run_weights(ctx, spec_path, field_path);
  } catch (const dmc::Error& e) {
    std::cerr << "dmc: " << dmc::to_string(e.kind()) << ": " << e.what() << '\n';
    return e.is_input_error() ? kExitConfig : kExitNumerical;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "dmc: config: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "dmc: " << e.what() << '\n';
    return kExitNumerical;
  }
  return 0;
}
