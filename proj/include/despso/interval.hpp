#pragma once

// Interval uncertainty problems and their output bounds.
//
// Each input is only known to lie in [a_i, b_i]; the range of a response f
// over that box is found as two optimizations, min f and min -f.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "despso/pso.hpp"

namespace despso::interval {

using pso::Vector;

struct IntervalVariable {
  std::string name;
  double lower = 0.0;
  double upper = 0.0;
};

struct Response {
  std::string name;
  std::function<double(const Vector&)> fn;  // takes the full input vector
};

class IntervalProblem {
 public:
  IntervalProblem(std::vector<IntervalVariable> variables, std::vector<Response> responses);

  const std::vector<IntervalVariable>& variables() const { return variables_; }
  const std::vector<Response>& responses() const { return responses_; }
  Eigen::Index dim() const { return static_cast<Eigen::Index>(variables_.size()); }

  pso::SearchSpace space() const;
  Vector midpoint() const;
  /// Throws InvalidArgument for an unknown name.
  std::size_t response_index(const std::string& name) const;
  double evaluate(std::size_t response, const Vector& x) const;

 private:
  std::vector<IntervalVariable> variables_;
  std::vector<Response> responses_;
};

struct BoundResult {
  std::string response;
  double y_min = 0.0;
  double y_max = 0.0;
  Vector argmin;
  Vector argmax;
  pso::RunReport min_report;
  pso::RunReport max_report;  // gbest values of the negated objective
};

/// Minimizes f (seed) and -f (seed ^ 1). In DES mode the LDS matrices come
/// from `cache` keyed by `seed`, so both directions share one LDS; a private
/// cache with default settings is used when none is given.
BoundResult bounds(const IntervalProblem& problem, std::size_t response,
                   const pso::PsoConfig& config, pso::Mode mode, std::uint64_t seed,
                   pso::LdsCache* cache = nullptr);

enum class Bound { kLower, kUpper };
const char* bound_name(Bound bound);

struct KnownBounds {
  double lower = 0.0;
  double upper = 0.0;
};

/// (HCLPSO steps - DES-PSO steps) / DES-PSO steps * 100.
double speedup_percent(double hclpso_steps, double des_steps);

/// Median of step counts where an unreached run counts as +infinity; empty
/// when the median itself is unreached.
std::optional<double> median_steps(std::vector<std::optional<long>> steps);

struct SeedComparison {
  std::uint64_t seed = 0;
  Bound bound = Bound::kLower;
  std::optional<long> des_steps;
  std::optional<long> hclpso_steps;
  std::optional<double> speedup_pct;  // empty when either mode did not converge
};

struct BoundSummary {
  std::optional<double> median_des_steps;
  std::optional<double> median_hclpso_steps;
  std::optional<double> median_speedup_pct;
  int excluded = 0;  // seeds without a speedup value
};

struct SpeedupRow {
  std::string response;
  std::vector<SeedComparison> runs;  // ordered by (seed, bound)
  BoundSummary lower;
  BoundSummary upper;

  const BoundSummary& summary(Bound b) const { return b == Bound::kLower ? lower : upper; }
};

/// Runs both modes for every seed and counts evaluations until each run's
/// best value is within `tol` of the known bound. Seeds run on up to `jobs`
/// threads; results are ordered by seed regardless.
SpeedupRow compare_modes(const IntervalProblem& problem, std::size_t response,
                         const pso::PsoConfig& config, const KnownBounds& targets, double tol,
                         const std::vector<std::uint64_t>& seeds, pso::LdsCache& cache,
                         int jobs = 1);

/// CSV columns response,bound,seed,des_pso_steps,hclpso_steps,speedup_pct ("NA" when unreached).
void write_speedup_csv(std::ostream& out, const std::vector<SpeedupRow>& rows);

}  // namespace despso::interval
