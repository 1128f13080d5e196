// Command-line driver for the multilevel least-squares preconditioner.
//
// Two subcommands: `run` solves a single system and writes a report;
// `sweep` repeats the run over one parameter axis and writes a table.
// Exit codes: 0 success, 1 solver failure, 2 usage error.

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lsamgdd/lsamgdd.hpp"

namespace {

using nlohmann::json;

struct Config {
  std::string problem = "rotated_aniso";
  std::size_t nx = 64;
  std::size_t ny = 64;
  double epsilon = 1.0;
  double theta = 0.0;
  double kpar = 1e4;
  double kperp = 1.0;
  double dt = 1e-3;
  std::vector<std::size_t> cmin = {2, 3};
  std::size_t nagg = 1;
  double kappa = 50.0;
  double must_keep = 5.0;
  double tol = 1e-8;
  std::size_t maxit = 1000;
  std::uint64_t seed = 0;
  std::string out;
  std::string format; // resolved per subcommand
  std::string g_path;
  std::string rhs_path;
  std::string dump_g;
  std::string dump_partitions;
  bool random_rhs = false;
  std::string gevp_variant = "schur";
};

struct RunOutcome {
  bool solver_error = false; ///< a module error was raised
  std::string error_name;
  std::string error_what;
  std::string label;
  bool converged = false;
  std::size_t iterations = 0;
  double rho = 0.0;
  double iters_to_tenth = 0.0;
  double op_complexity = 0.0;
  std::size_t levels = 0;
  double setup_s = 0.0;
  double solve_s = 0.0;
  std::vector<double> residual_history;
  std::vector<lsamgdd::LevelSummary> summary;
};

double now_minus(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

lsamgdd::LeastSquaresSystem build_system(const Config& cfg) {
  if (cfg.problem == "rotated_aniso") {
    lsamgdd::AnisoParams p;
    p.nx = cfg.nx;
    p.ny = cfg.ny;
    p.epsilon = cfg.epsilon;
    p.theta = cfg.theta;
    return lsamgdd::build_rotated_aniso(p);
  }
  if (cfg.problem == "closed_fieldline") {
    lsamgdd::FieldParams p;
    p.nx = cfg.nx;
    p.ny = cfg.ny;
    p.kpar = cfg.kpar;
    p.kperp = cfg.kperp;
    p.dt = cfg.dt;
    return lsamgdd::build_closed_fieldline(p);
  }
  return lsamgdd::load_system(cfg.g_path, cfg.rhs_path);
}

/// Build, precondition, and solve one system per the config.
RunOutcome execute(const Config& cfg) {
  RunOutcome out;
  try {
    auto sys = build_system(cfg);
    out.label = sys.label;
    if (!cfg.dump_g.empty()) lsamgdd::mm_write(cfg.dump_g, sys.G);
    if (cfg.random_rhs) {
      std::mt19937_64 gen(cfg.seed);
      std::uniform_real_distribution<double> dist(-1.0, 1.0);
      for (double& v : sys.rhs) v = dist(gen);
    }

    lsamgdd::LevelParams params;
    params.coarsening_ratios = cfg.cmin;
    params.aggregation_passes = cfg.nagg;
    params.kappa = cfg.kappa;
    params.must_keep = cfg.must_keep;
    params.gevp_variant = cfg.gevp_variant == "weighted" ? lsamgdd::GevpVariant::WeightedLhs
                                                         : lsamgdd::GevpVariant::SchurReduced;

    const auto t_setup = std::chrono::steady_clock::now();
    const lsamgdd::Hierarchy h = lsamgdd::setup(sys.G, params);
    out.setup_s = now_minus(t_setup);
    out.levels = h.levels.size();
    out.summary = h.summary;
    out.op_complexity = lsamgdd::operator_complexity(h);

    if (!cfg.dump_partitions.empty()) {
      for (std::size_t ell = 0; ell + 1 < h.levels.size(); ++ell) {
        const auto& topo = h.levels[ell].topology;
        lsamgdd::Partition part;
        part.assignment.resize(topo.n_nodes);
        part.n_aggregates = topo.n_aggregates();
        for (std::size_t i = 0; i < topo.n_aggregates(); ++i)
          for (std::size_t v : topo.omega[i]) part.assignment[v] = i;
        lsamgdd::partition_write(
            cfg.dump_partitions + ".level" + std::to_string(ell) + ".txt", part);
      }
    }

    const auto apply_a = [&sys](const lsamgdd::Vector& v) {
      return lsamgdd::spmv_transpose(sys.G, lsamgdd::spmv(sys.G, v));
    };
    const auto apply_b = [&h](const lsamgdd::Vector& r) { return lsamgdd::vcycle(h, r); };
    const auto t_solve = std::chrono::steady_clock::now();
    const auto solved = lsamgdd::pcg(apply_a, apply_b, sys.rhs, cfg.tol, cfg.maxit);
    out.solve_s = now_minus(t_solve);

    out.converged = solved.second.converged;
    out.iterations = solved.second.iterations;
    out.rho = solved.second.avg_conv_factor;
    out.iters_to_tenth = solved.second.iters_to_tenth;
    out.residual_history = solved.second.residual_history;
  } catch (const lsamgdd::Error& e) {
    out.solver_error = true;
    out.error_name = e.name();
    out.error_what = e.what();
  }
  return out;
}

json config_json(const Config& cfg) {
  return json{{"problem", cfg.problem}, {"nx", cfg.nx},       {"ny", cfg.ny},
              {"epsilon", cfg.epsilon}, {"theta", cfg.theta}, {"kpar", cfg.kpar},
              {"kperp", cfg.kperp},     {"dt", cfg.dt},       {"cmin", cfg.cmin},
              {"nagg", cfg.nagg},       {"kappa", cfg.kappa}, {"must_keep", cfg.must_keep},
              {"tol", cfg.tol},         {"maxit", cfg.maxit}, {"seed", cfg.seed},
              {"random_rhs", cfg.random_rhs}};
}

json summary_json(const std::vector<lsamgdd::LevelSummary>& summary) {
  json rows = json::array();
  for (const auto& s : summary)
    rows.push_back(json{{"level", s.level},
                        {"dim", s.dim},
                        {"nnz", s.nnz},
                        {"aggregates", s.n_aggregates},
                        {"colors", s.k_c},
                        {"multiplicity", s.n_mult},
                        {"thresh", s.thresh},
                        {"modes_kept", s.modes_kept}});
  return rows;
}

json outcome_json(const RunOutcome& r) {
  json doc{{"label", r.label},
           {"converged", r.converged},
           {"iterations", r.iterations},
           {"rho", r.rho},
           {"iters_to_tenth", r.iters_to_tenth},
           {"op_complexity", r.op_complexity},
           {"levels", r.levels},
           {"setup_s", r.setup_s},
           {"solve_s", r.solve_s},
           {"residual_history", r.residual_history},
           {"hierarchy", summary_json(r.summary)}};
  if (r.solver_error) {
    doc["error"] = r.error_name;
    doc["error_detail"] = r.error_what;
  }
  return doc;
}

/// Serialize a finite double; non-finite values become "nan"/"inf" tokens.
std::string csv_num(double v) {
  std::ostringstream out;
  if (std::isnan(v))
    out << "nan";
  else if (std::isinf(v))
    out << (v > 0 ? "inf" : "-inf");
  else {
    out.precision(17);
    out << v;
  }
  return out.str();
}

constexpr const char* kCsvHeader = "value,iterations,rho,iters_to_tenth,op_complexity,levels,setup_s,solve_s";

std::string csv_row(double value, const RunOutcome& r) {
  std::ostringstream row;
  row << csv_num(value) << ',' << r.iterations << ',' << csv_num(r.rho) << ','
      << csv_num(r.iters_to_tenth) << ',' << csv_num(r.op_complexity) << ',' << r.levels << ','
      << csv_num(r.setup_s) << ',' << csv_num(r.solve_s);
  return row.str();
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream out(path);
  if (!out) throw lsamgdd::InputError("cannot open output file " + path);
  out << text;
  if (!text.empty() && text.back() != '\n') out << '\n';
}

void print_run_summary(const RunOutcome& r) {
  if (r.solver_error) return;
  std::cout << r.label << '\n'
            << "  levels " << r.levels << ", operator complexity " << r.op_complexity << '\n'
            << "  " << (r.converged ? "converged" : "NOT converged") << " in " << r.iterations
            << " iterations, rho " << r.rho << ", iterations per decade " << r.iters_to_tenth
            << '\n'
            << "  setup " << r.setup_s << " s, solve " << r.solve_s << " s\n";
}

/// The value column echoed for a plain run in CSV format.
double run_value(const Config& cfg, const RunOutcome& r) {
  if (cfg.problem == "rotated_aniso") return cfg.epsilon;
  if (cfg.problem == "closed_fieldline") return cfg.kpar;
  return static_cast<double>(r.summary.empty() ? 0 : r.summary.front().dim);
}

Config apply_axis(Config cfg, const std::string& axis, double value) {
  if (axis == "epsilon") {
    cfg.epsilon = value;
  } else if (axis == "theta") {
    cfg.theta = value;
  } else if (axis == "kpar") {
    cfg.kpar = value;
  } else { // N: grid side length
    cfg.nx = static_cast<std::size_t>(value);
    cfg.ny = static_cast<std::size_t>(value);
  }
  return cfg;
}

std::size_t thread_cap(std::size_t rows, bool parallel) {
  if (!parallel || rows < 2) return 1;
  std::size_t cap = std::max<unsigned>(std::thread::hardware_concurrency(), 1);
  if (const char* env = std::getenv("LSAMGDD_THREADS")) {
    char* end = nullptr;
    const unsigned long parsed = std::strtoul(env, &end, 10);
    if (end != env && parsed >= 1) cap = std::min<std::size_t>(cap, parsed);
  }
  return std::min(cap, rows);
}

int do_run(const Config& cfg) {
  const RunOutcome r = execute(cfg);
  if (r.solver_error) {
    std::cerr << "error: " << r.error_name << ": " << r.error_what << '\n';
    return 1;
  }
  if (cfg.format == "csv") {
    emit(std::string(kCsvHeader) + "\n" + csv_row(run_value(cfg, r), r), cfg.out);
  } else if (!cfg.out.empty()) {
    emit(outcome_json(r).dump(2), cfg.out);
  }
  print_run_summary(r);
  return r.converged ? 0 : 1;
}

int do_sweep(const Config& base, const std::string& axis, const std::vector<double>& values,
             bool parallel) {
  std::vector<RunOutcome> rows(values.size());
  const std::size_t workers = thread_cap(values.size(), parallel);
  if (workers <= 1) {
    for (std::size_t i = 0; i < values.size(); ++i)
      rows[i] = execute(apply_axis(base, axis, values[i]));
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < values.size(); i = next.fetch_add(1))
          rows[i] = execute(apply_axis(base, axis, values[i]));
      });
    for (std::thread& t : pool) t.join();
  }

  for (std::size_t i = 0; i < values.size(); ++i) {
    const RunOutcome& r = rows[i];
    std::cerr << "sweep " << axis << "=" << values[i] << ": "
              << (r.solver_error ? ("error " + r.error_name)
                                 : (r.converged ? "converged" : "not converged"))
              << " (" << r.iterations << " iterations)\n";
  }

  if (base.format == "json") {
    json doc{{"axis", axis}, {"config", config_json(base)}};
    json out_rows = json::array();
    for (std::size_t i = 0; i < values.size(); ++i) {
      json row = outcome_json(rows[i]);
      row["value"] = values[i];
      out_rows.push_back(std::move(row));
    }
    doc["rows"] = out_rows;
    emit(doc.dump(2), base.out);
  } else {
    std::ostringstream table;
    table << kCsvHeader << '\n';
    for (std::size_t i = 0; i < values.size(); ++i) table << csv_row(values[i], rows[i]) << '\n';
    emit(table.str(), base.out);
  }
  return 0;
}

void add_common_options(CLI::App* cmd, Config& cfg) {
  cmd->add_option("--problem", cfg.problem, "Problem kind")
      ->check(CLI::IsMember({"rotated_aniso", "closed_fieldline", "mtx"}))
      ->capture_default_str();
  cmd->add_option("--nx", cfg.nx, "Interior nodes in x")->capture_default_str();
  cmd->add_option("--ny", cfg.ny, "Interior nodes in y")->capture_default_str();
  cmd->add_option("--epsilon", cfg.epsilon, "Anisotropy ratio in (0,1]")->capture_default_str();
  cmd->add_option("--theta", cfg.theta, "Rotation angle in radians")->capture_default_str();
  cmd->add_option("--kpar", cfg.kpar, "Parallel conductivity")->capture_default_str();
  cmd->add_option("--kperp", cfg.kperp, "Perpendicular conductivity")->capture_default_str();
  cmd->add_option("--dt", cfg.dt, "Time-step for the mass term")->capture_default_str();
  cmd->add_option("--cmin", cfg.cmin, "Per-level minimum coarsening ratios (comma list)")
      ->delimiter(',')
      ->capture_default_str();
  cmd->add_option("--nagg", cfg.nagg, "Aggregation passes per level")->capture_default_str();
  cmd->add_option("--kappa", cfg.kappa, "Target condition number for mode selection")
      ->capture_default_str();
  cmd->add_option("--must-keep", cfg.must_keep,
                  "Retain modes at or above this value even past the coarsening budget")
      ->capture_default_str();
  cmd->add_option("--tol", cfg.tol, "Relative residual tolerance")->capture_default_str();
  cmd->add_option("--maxit", cfg.maxit, "Iteration cap")->capture_default_str();
  cmd->add_option("--seed", cfg.seed, "Seed for the optional random right-hand side")
      ->capture_default_str();
  cmd->add_option("--out", cfg.out, "Output file (default: standard output)");
  cmd->add_option("--format", cfg.format, "Report format: json or csv")
      ->check(CLI::IsMember({"json", "csv"}));
  cmd->add_option("--g", cfg.g_path, "Matrix Market factor for --problem mtx");
  cmd->add_option("--rhs", cfg.rhs_path, "Matrix Market right-hand side for --problem mtx");
  cmd->add_option("--dump-g", cfg.dump_g, "Write the assembled factor to this path");
  cmd->add_option("--dump-partitions", cfg.dump_partitions,
                  "Write per-level aggregate assignments with this path prefix");
  cmd->add_flag("--random-rhs", cfg.random_rhs, "Replace the right-hand side by seeded noise");
  cmd->add_option("--gevp-variant", cfg.gevp_variant, "")
      ->check(CLI::IsMember({"schur", "weighted"}))
      ->group("");
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multilevel least-squares preconditioner driver"};
  app.set_config("--config", "", "Read options from an INI/TOML file");
  app.require_subcommand(1);

  Config run_cfg;
  CLI::App* run_cmd = app.add_subcommand("run", "Solve one system and report");
  add_common_options(run_cmd, run_cfg);

  Config sweep_cfg;
  std::string axis;
  std::vector<double> values;
  bool parallel = false;
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "Repeat a run over one parameter axis");
  add_common_options(sweep_cmd, sweep_cfg);
  sweep_cmd->add_option("--axis", axis, "Sweep axis")
      ->required()
      ->check(CLI::IsMember({"epsilon", "N", "theta", "kpar"}));
  sweep_cmd->add_option("--values", values, "Axis values (comma list)")
      ->required()
      ->delimiter(',');
  sweep_cmd->add_flag("--parallel", parallel,
                      "Run sweep rows concurrently (LSAMGDD_THREADS caps the pool)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (run_cmd->parsed()) {
      if (run_cfg.problem == "mtx" && run_cfg.g_path.empty()) {
        std::cerr << "error: --problem mtx requires --g <path>\n";
        return 2;
      }
      if (run_cfg.format.empty()) run_cfg.format = "json";
      return do_run(run_cfg);
    }
    if (sweep_cfg.problem == "mtx" && sweep_cfg.g_path.empty()) {
      std::cerr << "error: --problem mtx requires --g <path>\n";
      return 2;
    }
    if (sweep_cfg.format.empty()) sweep_cfg.format = "csv";
    if (axis == "epsilon" || axis == "theta") {
      if (sweep_cfg.problem != "rotated_aniso") {
        std::cerr << "error: axis " << axis << " applies to --problem rotated_aniso\n";
        return 2;
      }
    } else if (axis == "kpar" && sweep_cfg.problem != "closed_fieldline") {
      std::cerr << "error: axis kpar applies to --problem closed_fieldline\n";
      return 2;
    }
    if (axis == "N")
      for (double v : values)
        if (v < 2.0 || v != std::floor(v)) {
          std::cerr << "error: axis N takes integer grid sides of at least 2\n";
          return 2;
        }
    return do_sweep(sweep_cfg, axis, values, parallel);
  } catch (const lsamgdd::Error& e) {
    std::cerr << "error: " << e.name() << ": " << e.what() << '\n';
    return 1;
  }
}
