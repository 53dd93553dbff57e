#include "despso/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "despso/cases.hpp"
#include "despso/csv.hpp"
#include "despso/error.hpp"
#include "despso/expression.hpp"

namespace despso::cli {
namespace {

namespace fs = std::filesystem;

struct Settings {
  // run
  std::uint64_t seed = 1;
  std::string out_dir = ".";
  std::string problem = "linear2x2";
  std::string mode = "both";
  int seed_count = 20;
  std::vector<std::uint64_t> seed_list;
  double tol = 1e-3;
  int jobs = 1;
  int samples = 2000;
  // generate
  int n = 64;
  int dim = 2;
  std::string output;
  // optimizer / sequence settings
  pso::PsoConfig pso;
  des::DesConfig des;
};

void add_options(CLI::App& app, Settings& s) {
  const std::string run = "Run";
  app.add_option("--seed", s.seed, "Base seed")->group(run)->capture_default_str();
  app.add_option("--out", s.out_dir, "Output directory")
      ->envname("DESPSO_OUT_DIR")
      ->group(run)
      ->capture_default_str();
  app.add_option("--problem", s.problem,
                 "linear2x2, smartwatch, smartwatch-printed or a problem file")
      ->group(run)
      ->capture_default_str();
  app.add_option("--mode", s.mode, "hclpso, despso or both")
      ->check(CLI::IsMember({"hclpso", "despso", "both"}))
      ->group(run)
      ->capture_default_str();
  app.add_option("--seeds", s.seed_count, "Benchmark seed count (seed, seed+1, ...)")
      ->group(run)
      ->capture_default_str();
  app.add_option("--seed-list", s.seed_list, "Explicit benchmark seeds")
      ->delimiter(',')
      ->group(run);
  app.add_option("--tol", s.tol, "Convergence tolerance on the bound")
      ->group(run)
      ->capture_default_str();
  app.add_option("--jobs", s.jobs, "Concurrent benchmark seeds")
      ->check(CLI::PositiveNumber)
      ->group(run)
      ->capture_default_str();
  app.add_option("--samples", s.samples, "Solution-domain samples for linear2x2")
      ->group(run)
      ->capture_default_str();
  app.add_option("--n", s.n, "Points to generate")->group(run)->capture_default_str();
  app.add_option("--dim", s.dim, "Dimension of generated points")->group(run)->capture_default_str();
  app.add_option("--output", s.output, "Point-set CSV path (default <out>/des_points.csv)")
      ->group(run);

  const std::string opt = "Optimizer";
  auto& p = s.pso;
  app.add_option("--pop-size", p.pop_size, "Swarm size N")->group(opt)->capture_default_str();
  app.add_option("--explore-size", p.explore_size, "Exploration subpopulation N1 (0: ceil(N/2))")
      ->group(opt)
      ->capture_default_str();
  app.add_option("--max-iters", p.max_iters, "Iterations G")->group(opt)->capture_default_str();
  app.add_option("--w-start", p.inertia.start, "Initial inertia")->group(opt)->capture_default_str();
  app.add_option("--w-end", p.inertia.end, "Final inertia")->group(opt)->capture_default_str();
  app.add_option("--k-start", p.explore_accel.start, "Initial exploration acceleration")
      ->group(opt)
      ->capture_default_str();
  app.add_option("--k-end", p.explore_accel.end, "Final exploration acceleration")
      ->group(opt)
      ->capture_default_str();
  app.add_option("--refresh-gap", p.refresh_gap, "Stagnation gap before an exemplar refresh")
      ->group(opt)
      ->capture_default_str();
  app.add_option("--vmax-frac", p.vmax_frac, "Velocity clamp as a fraction of the box width")
      ->group(opt)
      ->capture_default_str();
  app.add_flag("--permute-lds", p.permute_lds, "Shuffle LDS columns every iteration")->group(opt);

  const std::string seq = "Sequence";
  auto& d = s.des;
  app.add_option("--q", d.q, "Distance exponent")->group(seq)->capture_default_str();
  app.add_option("--p", d.p, "Potential exponent")->group(seq)->capture_default_str();
  app.add_option("--dt", d.dt, "Pseudo-time step")->group(seq)->capture_default_str();
  app.add_option("--kappa", d.kappa, "Damping parameter")->group(seq)->capture_default_str();
  app.add_option("--max-steps", d.max_steps, "Relaxation step cap")->group(seq)->capture_default_str();
  app.add_option("--stop-tol", d.stop_tol, "Stationarity threshold")->group(seq)->capture_default_str();
  app.add_option_function<std::string>(
         "--stiffness-scale",
         [&d](const std::string& v) {
           d.stiffness_scale = v == "minimum"     ? des::StiffnessScale::kMinimumSpacing
                               : v == "frobenius" ? des::StiffnessScale::kFrobeniusNorm
                                                  : des::StiffnessScale::kNeighbourSpacing;
         },
         "Stiffness length: neighbour, minimum or frobenius")
      ->check(CLI::IsMember({"neighbour", "minimum", "frobenius"}, CLI::ignore_case))
      ->type_name("KIND")
      ->default_str("neighbour")
      ->group(seq);
  app.add_option("--length-factor", d.length_factor, "Stiffness length factor")
      ->group(seq)
      ->capture_default_str();
  app.add_option("--step-limit", d.step_limit, "Per-step move cap in units of N^(-1/D) (0: off)")
      ->group(seq)
      ->capture_default_str();
  app.add_option("--restiffen-every", d.restiffen_every,
                 "Re-derive mass and damping every this many steps (0: keep X0 values)")
      ->group(seq)
      ->capture_default_str();
}

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write '" + path.string() + "'");
  return f;
}

struct NamedProblem {
  interval::IntervalProblem problem;
  std::optional<cases::SmartwatchTable> table;  // set for the smartwatch variants
  bool linear = false;
};

NamedProblem resolve_problem(const std::string& name) {
  if (name == "linear2x2") return {cases::linear_system_problem(), std::nullopt, true};
  if (name == "smartwatch")
    return {cases::smartwatch_problem(cases::SmartwatchTable::kSignCorrected),
            cases::SmartwatchTable::kSignCorrected, false};
  if (name == "smartwatch-printed")
    return {cases::smartwatch_problem(cases::SmartwatchTable::kPrinted),
            cases::SmartwatchTable::kPrinted, false};
  if (fs::is_regular_file(name)) return {expr::load_problem(name), std::nullopt, false};
  throw InvalidArgument("unknown problem '" + name + "' (not a built-in and no such file)");
}

std::vector<pso::Mode> resolve_modes(const std::string& mode) {
  if (mode == "hclpso") return {pso::Mode::kRandom};
  if (mode == "despso") return {pso::Mode::kDes};
  return {pso::Mode::kRandom, pso::Mode::kDes};
}

std::string fixed3(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(3) << v;
  return os.str();
}

// Bounds are still valid with a non-stationary LDS, so this only warns.
void warn_if_not_stationary(const pso::LdsCache& cache, std::ostream& err) {
  if (const int bad = cache.non_stationary())
    err << "warning: " << bad
        << " low-discrepancy set(s) did not reach stationarity within max_steps\n";
}

int cmd_generate(const Settings& s, std::ostream& out, std::ostream& err) {
  if (s.n < 2) throw InvalidArgument("n must be >= 2");
  if (s.dim < 1) throw InvalidArgument("dim must be >= 1");
  s.des.validate();
  const des::DesResult r = des::generate_des(s.n, s.dim, s.des, s.seed);
  const fs::path path = s.output.empty() ? fs::path(s.out_dir) / "des_points.csv" : fs::path(s.output);
  {
    std::ofstream f = open_output(path);
    des::write_csv(f, r.points);
  }
  out << "points      " << r.points.count() << " x " << r.points.dim() << "\n"
      << "iterations  " << r.steps << "\n"
      << "CD2         " << csv::format_double(des::centered_l2_discrepancy(r.points)) << "\n"
      << "written     " << path.string() << "\n";
  if (!r.converged) {
    err << "warning: not stationary after " << r.steps << " steps (last displacement "
        << csv::format_double(r.displacement) << ")\n";
    return kNotStationary;
  }
  return kOk;
}

int cmd_solve(const Settings& s, std::ostream& out, std::ostream& err) {
  s.pso.validate();
  s.des.validate();
  const NamedProblem np = resolve_problem(s.problem);
  const auto modes = resolve_modes(s.mode);
  pso::LdsCache cache(s.des);
  const fs::path dir(s.out_dir);

  std::vector<std::vector<interval::BoundResult>> results(np.problem.responses().size());
  for (std::size_t r = 0; r < results.size(); ++r) {
    for (pso::Mode m : modes) {
      interval::BoundResult b = interval::bounds(np.problem, r, s.pso, m, s.seed, &cache);
      for (const auto& [tag, report] :
           {std::pair{"min", &b.min_report}, std::pair{"max", &b.max_report}}) {
        std::ofstream f = open_output(dir / ("report_" + b.response + "_" + pso::mode_name(m) +
                                             "_" + tag + ".csv"));
        pso::write_report_csv(f, *report);
      }
      results[r].push_back(std::move(b));
    }
  }

  out << std::left << std::setw(12) << "response";
  for (pso::Mode m : modes)
    out << std::right << std::setw(12) << (std::string(pso::mode_name(m)) + " min")
        << std::setw(12) << (std::string(pso::mode_name(m)) + " max");
  out << "\n";
  for (const auto& row : results) {
    out << std::left << std::setw(12) << row.front().response << std::right;
    for (const auto& b : row) out << std::setw(12) << fixed3(b.y_min) << std::setw(12) << fixed3(b.y_max);
    out << "\n";
  }

  if (np.linear) {
    std::ofstream f = open_output(dir / "solution_domain.csv");
    cases::write_cloud_csv(f, cases::sample_solution_domain(s.samples, s.seed));
  }
  warn_if_not_stationary(cache, err);
  return kOk;
}

std::vector<interval::KnownBounds> oracle_targets(const NamedProblem& np, std::ostream& csv_out) {
  std::vector<std::string> names;
  for (const auto& v : np.problem.variables()) names.push_back(v.name);
  std::vector<std::pair<std::string, cases::OracleResult>> rows;
  if (np.linear) {
    const cases::LinearSystemOracle o = cases::linear_system_oracle(np.problem.space());
    rows = {{"x1", o.x1}, {"x2", o.x2}};
  } else if (np.table) {
    for (const auto& surface : cases::smartwatch_surfaces(*np.table))
      rows.emplace_back(surface.name(), cases::quadratic_box_oracle(surface, np.problem.space()));
  } else {
    throw Error("no oracle is available for user-defined problems");
  }
  cases::write_oracle_csv(csv_out, names, rows);
  std::vector<interval::KnownBounds> targets;
  for (const auto& [name, r] : rows) targets.push_back({r.y_min, r.y_max});
  return targets;
}

int cmd_bench(const Settings& s, std::ostream& out, std::ostream& err) {
  s.pso.validate();
  s.des.validate();
  if (!(s.tol > 0.0)) throw InvalidArgument("tol must be > 0");
  std::vector<std::uint64_t> seeds = s.seed_list;
  if (seeds.empty()) {
    if (s.seed_count < 1) throw InvalidArgument("at least one seed is required");
    for (int i = 0; i < s.seed_count; ++i) seeds.push_back(s.seed + static_cast<std::uint64_t>(i));
  }
  const NamedProblem np = resolve_problem(s.problem);
  const fs::path dir(s.out_dir);

  std::vector<interval::KnownBounds> targets;
  {
    std::ofstream f = open_output(dir / "oracle.csv");
    targets = oracle_targets(np, f);
  }

  pso::LdsCache cache(s.des);
  std::vector<interval::SpeedupRow> rows;
  for (std::size_t r = 0; r < np.problem.responses().size(); ++r)
    rows.push_back(interval::compare_modes(np.problem, r, s.pso, targets[r], s.tol, seeds, cache,
                                           s.jobs));
  {
    std::ofstream f = open_output(dir / "bench_speedup.csv");
    interval::write_speedup_csv(f, rows);
  }

  auto steps = [](const std::optional<double>& v) { return v ? fixed3(*v) : std::string("NA"); };
  out << std::left << std::setw(12) << "response" << std::setw(8) << "bound" << std::right
      << std::setw(14) << "DES-PSO" << std::setw(14) << "HCLPSO" << std::setw(12) << "speedup %"
      << std::setw(10) << "excluded" << "\n";
  for (interval::Bound b : {interval::Bound::kLower, interval::Bound::kUpper}) {
    for (const auto& row : rows) {
      const interval::BoundSummary& sm = row.summary(b);
      out << std::left << std::setw(12) << row.response << std::setw(8) << interval::bound_name(b)
          << std::right << std::setw(14) << steps(sm.median_des_steps) << std::setw(14)
          << steps(sm.median_hclpso_steps) << std::setw(12) << steps(sm.median_speedup_pct)
          << std::setw(10) << sm.excluded << "\n";
    }
  }
  for (interval::Bound b : {interval::Bound::kLower, interval::Bound::kUpper}) {
    double sum = 0.0;
    int count = 0;
    for (const auto& row : rows)
      if (const auto& v = row.summary(b).median_speedup_pct) {
        sum += *v;
        ++count;
      }
    out << "Average improvement (" << interval::bound_name(b)
        << "): " << (count ? fixed3(sum / count) + " %" : std::string("NA")) << "\n";
  }
  out << "seeds " << seeds.size() << ", tolerance " << s.tol << "\n";
  warn_if_not_stationary(cache, err);
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Interval uncertainty analysis with HCLPSO and DES-PSO", "despso"};
  app.set_config("--config", "", "Read options from a key = value file");
  app.require_subcommand(1);
  app.fallthrough();
  app.option_defaults()->always_capture_default();

  Settings s;
  add_options(app, s);
  CLI::App* gen = app.add_subcommand("generate", "Generate a DES point set");
  CLI::App* solve = app.add_subcommand("solve", "Bound every response of a problem");
  CLI::App* bench = app.add_subcommand("bench", "Compare convergence steps over seeds");
  for (CLI::App* sub : {gen, solve, bench})
    sub->footer("Options are shared by all subcommands; see 'despso --help'.");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (gen->parsed()) return cmd_generate(s, out, err);
    if (solve->parsed()) return cmd_solve(s, out, err);
    if (bench->parsed()) return cmd_bench(s, out, err);
    return kUsage;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"despso"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace despso::cli
