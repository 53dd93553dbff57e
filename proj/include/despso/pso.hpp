#pragma once

// Heterogeneous comprehensive learning PSO in matrix-vector form.
//
// Populations are D x N matrices with one particle per column. The swarm is
// split into an exploration subpopulation (columns [0, N1)) that follows
// comprehensive-learning exemplars only, and an exploitation subpopulation
// (columns [N1, N)) that is additionally pulled towards the global best.
//
// The uniform random matrices that drive initialization and the exemplar
// terms of both velocity rules come from a SequenceSource: fresh random
// numbers (original HCLPSO) or fixed low-discrepancy point sets (DES-PSO).

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <tuple>
#include <vector>

#include "despso/des.hpp"
#include "despso/random.hpp"

namespace despso::pso {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Objective = std::function<double(const Vector&)>;

struct SearchSpace {
  Vector lower;
  Vector upper;

  Eigen::Index dim() const { return lower.size(); }
  Vector width() const { return upper - lower; }
  void validate() const;
};

/// Linear ramp from `start` at g = 0 to `end` at g = total.
struct LinearSchedule {
  double start = 0.0;
  double end = 0.0;
  double at(int g, int total) const {
    return start + (end - start) * static_cast<double>(g) / static_cast<double>(total);
  }
};

struct PsoConfig {
  int pop_size = 40;
  int explore_size = 0;  // N1; 0 selects ceil(N/2)
  int max_iters = 500;
  LinearSchedule inertia{0.99, 0.2};
  LinearSchedule explore_accel{3.0, 1.5};
  std::vector<double> learn_prob;  // Pc per particle; empty selects the default table
  int refresh_gap = 7;
  double vmax_frac = 0.2;
  bool permute_lds = false;  // seeded column shuffle of P1/P2 every iteration

  int n1() const { return explore_size > 0 ? explore_size : (pop_size + 1) / 2; }
  std::vector<double> learning_probabilities() const;
  void validate() const;
};

/// Exploitation acceleration schedules: c1 = 2.5 - 2g/G, c2 = 0.5 + 2g/G.
double exploit_c1(int g, int total);
double exploit_c2(int g, int total);

/// Pc_i = 0.05 + 0.45 (exp(10 (i-1)/(N-1)) - 1) / (exp(10) - 1), i = 1..N.
std::vector<double> default_learning_probabilities(int n);

enum class Mode { kRandom, kDes };

const char* mode_name(Mode mode);

/// Low-discrepancy matrices for one run: P0 is D x N, P1 is D x N1, P2 is D x (N - N1).
struct LdsMatrices {
  Matrix p0;
  Matrix p1;
  Matrix p2;
  bool stationary = true;  // every generating DES run reached stationarity
};

LdsMatrices make_lds_matrices(Eigen::Index dim, int n, int n1, const des::DesConfig& config,
                              std::uint64_t seed);

/// Thread-safe memo of LDS matrices for one DES configuration.
class LdsCache {
 public:
  explicit LdsCache(des::DesConfig config = {}) : config_(config) {}

  std::shared_ptr<const LdsMatrices> get(Eigen::Index dim, int n, int n1, std::uint64_t seed);
  const des::DesConfig& config() const { return config_; }
  /// Number of cached entries built from at least one non-stationary DES run.
  int non_stationary() const;

 private:
  des::DesConfig config_;
  mutable std::mutex mutex_;
  std::map<std::tuple<Eigen::Index, int, int, std::uint64_t>, std::shared_ptr<const LdsMatrices>>
      entries_;
};

struct SequenceSource {
  Mode mode = Mode::kRandom;
  std::shared_ptr<const LdsMatrices> lds;  // required in kDes mode

  static SequenceSource random() { return {}; }
  static SequenceSource des(std::shared_ptr<const LdsMatrices> lds) {
    return {Mode::kDes, std::move(lds)};
  }

  /// Throws ShapeMismatch when the LDS matrices do not fit (dim, n, n1).
  void validate(Eigen::Index dim, int n, int n1) const;
};

struct Swarm {
  Matrix positions;   // D x N, X_g
  Matrix velocities;  // D x N
  Matrix pbest_pos;   // D x N
  Vector pbest_val;   // N
  Matrix exemplars;   // D x N, columns p_{g,i}
  Eigen::MatrixXi exemplar_source;  // D x N particle indices behind each exemplar entry
  Eigen::VectorXi stagnation;       // iterations since the last pbest improvement
  Vector gbest_pos;
  double gbest_val = 0.0;
  int iter = 0;
  int explore_size = 0;  // N1

  Eigen::Index size() const { return positions.cols(); }
  Eigen::Index dim() const { return positions.rows(); }
};

/// X0 = a (x) 1_N + E o (b (x) 1_N - a (x) 1_N) for a given D x N unit matrix E.
Matrix init_population(const SearchSpace& space, const Matrix& unit);

/// Same, with E drawn from `rng` (random mode, column by column) or taken from P0.
Matrix init_population(const SearchSpace& space, int n, const SequenceSource& source, Rng& rng);

struct Exemplar {
  Vector coords;
  Eigen::VectorXi sources;
};

/// Comprehensive-learning exemplar for particle i.
///
/// Per dimension, with probability pc the entry is borrowed from the winner of
/// a two-candidate fitness tournament (ties go to the lower index); otherwise
/// the particle's own pbest is used. Exploration particles only draw
/// candidates from the exploration subpopulation. If every dimension ended up
/// self-referencing, one random dimension is forced to a tournament winner.
Exemplar build_exemplar(Eigen::Index i, const Swarm& swarm, double pc, Rng& rng);

/// v = w v_i + k E1 o (p_i - x_i), clamped to +-vmax.
Vector velocity_exploration(const Swarm& swarm, Eigen::Index i, double w, double k,
                            const Vector& e1, const Vector& vmax);

/// v = w v_i + c1 E2 o (p_i - x_i) + c2 E3 o (gbest - x_i), clamped to +-vmax.
Vector velocity_exploitation(const Swarm& swarm, Eigen::Index i, double w, double c1, double c2,
                             const Vector& e2, const Vector& e3, const Vector& vmax);

struct ReportEntry {
  long evals = 0;
  int iteration = 0;
  double gbest_value = 0.0;

  bool operator==(const ReportEntry&) const = default;
};

struct RunReport {
  std::vector<ReportEntry> history;
};

/// Stateful engine: one Swarm, one objective, one seeded random stream.
class Optimizer {
 public:
  Optimizer(Objective objective, SearchSpace space, PsoConfig config, SequenceSource source,
            std::uint64_t seed);

  /// Draws X0, evaluates it and builds the first exemplars (N evaluations).
  void initialize();
  /// One iteration (N evaluations). Throws NonFiniteObjective.
  void step();

  const Swarm& swarm() const { return swarm_; }
  const RunReport& report() const { return report_; }
  long evaluations() const { return evaluations_; }
  const Vector& vmax() const { return vmax_; }

 private:
  double evaluate(const Vector& x);
  void update_gbest();
  void record();

  Objective objective_;
  SearchSpace space_;
  PsoConfig config_;
  SequenceSource source_;
  Rng rng_;
  Rng perm_rng_;
  std::vector<double> pc_;
  Vector vmax_;
  Swarm swarm_;
  RunReport report_;
  long evaluations_ = 0;
};

struct OptimizeResult {
  Vector best_position;
  double best_value = 0.0;
  RunReport report;
};

/// initialize() followed by max_iters step() calls.
OptimizeResult optimize(const Objective& objective, const SearchSpace& space,
                        const PsoConfig& config, const SequenceSource& source,
                        std::uint64_t seed);

/// Smallest cumulative evaluation count with |gbest - target| <= tol, if any.
std::optional<long> convergence_steps(const RunReport& report, double target, double tol);

/// CSV columns evals,iteration,gbest_value.
void write_report_csv(std::ostream& out, const RunReport& report);
RunReport read_report_csv(std::istream& in);

}  // namespace despso::pso
