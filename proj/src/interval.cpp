#include "despso/interval.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <limits>
#include <ostream>
#include <thread>

#include "despso/csv.hpp"
#include "despso/error.hpp"

namespace despso::interval {

IntervalProblem::IntervalProblem(std::vector<IntervalVariable> variables,
                                 std::vector<Response> responses)
    : variables_(std::move(variables)), responses_(std::move(responses)) {
  if (variables_.empty()) throw InvalidArgument("an interval problem needs at least one variable");
  if (responses_.empty()) throw InvalidArgument("an interval problem needs at least one response");
  for (const auto& v : variables_)
    if (!(v.lower < v.upper))
      throw InvalidArgument("variable '" + v.name + "' needs lower < upper");
  for (const auto& r : responses_)
    if (!r.fn) throw InvalidArgument("response '" + r.name + "' has no function");
}

pso::SearchSpace IntervalProblem::space() const {
  pso::SearchSpace s{Vector(dim()), Vector(dim())};
  for (Eigen::Index k = 0; k < dim(); ++k) {
    s.lower(k) = variables_[static_cast<std::size_t>(k)].lower;
    s.upper(k) = variables_[static_cast<std::size_t>(k)].upper;
  }
  return s;
}

Vector IntervalProblem::midpoint() const {
  const auto s = space();
  return 0.5 * (s.lower + s.upper);
}

std::size_t IntervalProblem::response_index(const std::string& name) const {
  for (std::size_t i = 0; i < responses_.size(); ++i)
    if (responses_[i].name == name) return i;
  throw InvalidArgument("unknown response '" + name + "'");
}

double IntervalProblem::evaluate(std::size_t response, const Vector& x) const {
  return responses_.at(response).fn(x);
}

BoundResult bounds(const IntervalProblem& problem, std::size_t response,
                   const pso::PsoConfig& config, pso::Mode mode, std::uint64_t seed,
                   pso::LdsCache* cache) {
  const Response& r = problem.responses().at(response);
  const pso::SearchSpace space = problem.space();

  pso::SequenceSource source;
  pso::LdsCache local;
  if (mode == pso::Mode::kDes) {
    pso::LdsCache& c = cache ? *cache : local;
    source = pso::SequenceSource::des(c.get(space.dim(), config.pop_size, config.n1(), seed));
  }

  const pso::OptimizeResult lo = pso::optimize(r.fn, space, config, source, seed);
  const pso::OptimizeResult hi = pso::optimize(
      [&r](const Vector& x) { return -r.fn(x); }, space, config, source, seed ^ 1ULL);

  BoundResult out;
  out.response = r.name;
  out.y_min = lo.best_value;
  out.argmin = lo.best_position;
  out.min_report = lo.report;
  out.y_max = -hi.best_value;
  out.argmax = hi.best_position;
  out.max_report = hi.report;
  return out;
}

const char* bound_name(Bound bound) { return bound == Bound::kLower ? "lower" : "upper"; }

double speedup_percent(double hclpso_steps, double des_steps) {
  if (!(des_steps > 0.0)) throw InvalidArgument("DES-PSO step count must be positive");
  return (hclpso_steps - des_steps) / des_steps * 100.0;
}

std::optional<double> median_steps(std::vector<std::optional<long>> steps) {
  if (steps.empty()) return std::nullopt;
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> v;
  v.reserve(steps.size());
  for (const auto& s : steps) v.push_back(s ? static_cast<double>(*s) : inf);
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  const double m = n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
  if (m == inf) return std::nullopt;
  return m;
}

namespace {

std::optional<double> median_of(std::vector<double> v) {
  if (v.empty()) return std::nullopt;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

BoundSummary summarize(const std::vector<SeedComparison>& runs, Bound bound) {
  BoundSummary s;
  std::vector<std::optional<long>> des, hcl;
  std::vector<double> speedups;
  for (const auto& r : runs) {
    if (r.bound != bound) continue;
    des.push_back(r.des_steps);
    hcl.push_back(r.hclpso_steps);
    if (r.speedup_pct)
      speedups.push_back(*r.speedup_pct);
    else
      ++s.excluded;
  }
  s.median_des_steps = median_steps(des);
  s.median_hclpso_steps = median_steps(hcl);
  s.median_speedup_pct = median_of(speedups);
  return s;
}

}  // namespace

SpeedupRow compare_modes(const IntervalProblem& problem, std::size_t response,
                         const pso::PsoConfig& config, const KnownBounds& targets, double tol,
                         const std::vector<std::uint64_t>& seeds, pso::LdsCache& cache,
                         int jobs) {
  if (!(tol > 0.0)) throw InvalidArgument("tolerance must be > 0");
  const std::size_t n = seeds.size();
  std::vector<std::pair<SeedComparison, SeedComparison>> per_seed(n);

  auto run_seed = [&](std::size_t idx) {
    const std::uint64_t seed = seeds[idx];
    const BoundResult des = bounds(problem, response, config, pso::Mode::kDes, seed, &cache);
    const BoundResult hcl = bounds(problem, response, config, pso::Mode::kRandom, seed, &cache);
    auto make = [&](Bound b) {
      SeedComparison c;
      c.seed = seed;
      c.bound = b;
      const bool lower = b == Bound::kLower;
      // The max run minimizes -f, so its target is -upper.
      const double target = lower ? targets.lower : -targets.upper;
      c.des_steps = pso::convergence_steps(lower ? des.min_report : des.max_report, target, tol);
      c.hclpso_steps =
          pso::convergence_steps(lower ? hcl.min_report : hcl.max_report, target, tol);
      if (c.des_steps && c.hclpso_steps)
        c.speedup_pct = speedup_percent(static_cast<double>(*c.hclpso_steps),
                                        static_cast<double>(*c.des_steps));
      return c;
    };
    per_seed[idx] = {make(Bound::kLower), make(Bound::kUpper)};
  };

  const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(n)));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) run_seed(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = next++; i < n; i = next++) run_seed(i);
        } catch (...) {
          errors[static_cast<std::size_t>(w)] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  SpeedupRow row;
  row.response = problem.responses().at(response).name;
  for (auto& [lo, hi] : per_seed) {
    row.runs.push_back(lo);
    row.runs.push_back(hi);
  }
  row.lower = summarize(row.runs, Bound::kLower);
  row.upper = summarize(row.runs, Bound::kUpper);
  return row;
}

void write_speedup_csv(std::ostream& out, const std::vector<SpeedupRow>& rows) {
  csv::write_row(out,
                 {"response", "bound", "seed", "des_pso_steps", "hclpso_steps", "speedup_pct"});
  auto steps = [](const std::optional<long>& s) { return s ? std::to_string(*s) : "NA"; };
  for (const auto& row : rows)
    for (const auto& r : row.runs)
      csv::write_row(out, {row.response, bound_name(r.bound), std::to_string(r.seed),
                           steps(r.des_steps), steps(r.hclpso_steps),
                           r.speedup_pct ? csv::format_double(*r.speedup_pct) : "NA"});
}

}  // namespace despso::interval
