#include "despso/pso.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <string>
#include <utility>

#include "despso/csv.hpp"
#include "despso/error.hpp"

namespace despso::pso {
namespace {

Vector uniform_vector(Eigen::Index dim, Rng& rng) {
  Vector v(dim);
  for (Eigen::Index k = 0; k < dim; ++k) v(k) = rng.uniform();
  return v;
}

Vector clamp_abs(Vector v, const Vector& vmax) {
  return v.cwiseMax(-vmax).cwiseMin(vmax);
}

// D x n matrix of LDS columns; a single point degenerates to the cube centre.
Matrix lds_block(Eigen::Index dim, int n, const des::DesConfig& config, std::uint64_t seed,
                 bool& stationary) {
  if (n == 1) return Matrix::Constant(dim, 1, 0.5);
  const des::DesResult r = des::generate_des(n, dim, config, seed);
  stationary = stationary && r.converged;
  return r.points.coords().transpose();
}

std::vector<int> shuffled(int n, Rng& rng) {
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  for (int i = n - 1; i > 0; --i)
    std::swap(perm[static_cast<std::size_t>(i)],
              perm[rng.index(static_cast<std::uint64_t>(i) + 1)]);
  return perm;
}

}  // namespace

void SearchSpace::validate() const {
  if (lower.size() == 0) throw InvalidArgument("search space has no dimensions");
  if (lower.size() != upper.size()) throw InvalidArgument("bound vectors differ in size");
  for (Eigen::Index k = 0; k < lower.size(); ++k)
    if (!(lower(k) < upper(k)))
      throw InvalidArgument("lower bound must be below upper bound in dimension " +
                            std::to_string(k));
}

std::vector<double> default_learning_probabilities(int n) {
  std::vector<double> pc(static_cast<std::size_t>(n), 0.05);
  if (n < 2) return pc;
  const double denom = std::exp(10.0) - 1.0;
  for (int i = 0; i < n; ++i)
    pc[static_cast<std::size_t>(i)] =
        0.05 + 0.45 * (std::exp(10.0 * i / (n - 1.0)) - 1.0) / denom;
  return pc;
}

std::vector<double> PsoConfig::learning_probabilities() const {
  return learn_prob.empty() ? default_learning_probabilities(pop_size) : learn_prob;
}

void PsoConfig::validate() const {
  if (pop_size < 2) throw InvalidArgument("pop_size must be >= 2");
  const int split = n1();
  if (split < 1 || split >= pop_size)
    throw InvalidArgument("explore_size must satisfy 1 <= N1 < N");
  if (max_iters < 1) throw InvalidArgument("max_iters must be >= 1");
  if (!(vmax_frac > 0.0 && vmax_frac <= 1.0)) throw InvalidArgument("vmax_frac must be in (0, 1]");
  if (refresh_gap < 1) throw InvalidArgument("refresh_gap must be >= 1");
  if (!learn_prob.empty()) {
    if (static_cast<int>(learn_prob.size()) != pop_size)
      throw InvalidArgument("learn_prob needs one entry per particle");
    for (double pc : learn_prob)
      if (!(pc > 0.0 && pc < 1.0)) throw InvalidArgument("learn_prob entries must be in (0, 1)");
  }
}

double exploit_c1(int g, int total) { return 2.5 - 2.0 * g / static_cast<double>(total); }
double exploit_c2(int g, int total) { return 0.5 + 2.0 * g / static_cast<double>(total); }

const char* mode_name(Mode mode) { return mode == Mode::kDes ? "despso" : "hclpso"; }

LdsMatrices make_lds_matrices(Eigen::Index dim, int n, int n1, const des::DesConfig& config,
                              std::uint64_t seed) {
  if (n1 < 1 || n1 >= n) throw InvalidArgument("LDS split must satisfy 1 <= N1 < N");
  LdsMatrices m;
  m.p0 = lds_block(dim, n, config, mix_seed(seed, 100), m.stationary);
  m.p1 = lds_block(dim, n1, config, mix_seed(seed, 101), m.stationary);
  m.p2 = lds_block(dim, n - n1, config, mix_seed(seed, 102), m.stationary);
  return m;
}

std::shared_ptr<const LdsMatrices> LdsCache::get(Eigen::Index dim, int n, int n1,
                                                 std::uint64_t seed) {
  const auto key = std::make_tuple(dim, n, n1, seed);
  {
    std::lock_guard lock(mutex_);
    if (auto it = entries_.find(key); it != entries_.end()) return it->second;
  }
  // Generation is deterministic, so a concurrent duplicate is harmless.
  auto made = std::make_shared<const LdsMatrices>(make_lds_matrices(dim, n, n1, config_, seed));
  std::lock_guard lock(mutex_);
  return entries_.emplace(key, std::move(made)).first->second;
}

int LdsCache::non_stationary() const {
  std::lock_guard lock(mutex_);
  int count = 0;
  for (const auto& [key, lds] : entries_) count += !lds->stationary;
  return count;
}

void SequenceSource::validate(Eigen::Index dim, int n, int n1) const {
  if (mode != Mode::kDes) return;
  if (!lds) throw ShapeMismatch("DES mode needs LDS matrices");
  auto check = [&](const Matrix& m, Eigen::Index cols, const char* name) {
    if (m.rows() != dim || m.cols() != cols)
      throw ShapeMismatch(std::string(name) + " must be " + std::to_string(dim) + " x " +
                          std::to_string(cols) + ", got " + std::to_string(m.rows()) + " x " +
                          std::to_string(m.cols()));
  };
  check(lds->p0, n, "P0");
  check(lds->p1, n1, "P1");
  check(lds->p2, n - n1, "P2");
}

Matrix init_population(const SearchSpace& space, const Matrix& unit) {
  if (unit.rows() != space.dim()) throw ShapeMismatch("unit matrix has the wrong row count");
  const Eigen::Index n = unit.cols();
  const Matrix a = space.lower * Eigen::RowVectorXd::Ones(n);
  const Matrix b = space.upper * Eigen::RowVectorXd::Ones(n);
  Matrix x = a + unit.cwiseProduct(b - a);
  // Rounding in a + e (b - a) may step a hair outside [a, b].
  for (Eigen::Index i = 0; i < n; ++i)
    x.col(i) = x.col(i).cwiseMax(space.lower).cwiseMin(space.upper);
  return x;
}

Matrix init_population(const SearchSpace& space, int n, const SequenceSource& source, Rng& rng) {
  if (source.mode == Mode::kDes) {
    if (!source.lds || source.lds->p0.rows() != space.dim() || source.lds->p0.cols() != n)
      throw ShapeMismatch("P0 must be D x N");
    return init_population(space, source.lds->p0);
  }
  Matrix e(space.dim(), n);
  for (int i = 0; i < n; ++i) e.col(i) = uniform_vector(space.dim(), rng);
  return init_population(space, e);
}

Exemplar build_exemplar(Eigen::Index i, const Swarm& swarm, double pc, Rng& rng) {
  const Eigen::Index n = swarm.size();
  const Eigen::Index dim = swarm.dim();
  const bool explorer = i < swarm.explore_size;

  std::vector<Eigen::Index> pool;
  const Eigen::Index pool_end = explorer ? swarm.explore_size : n;
  for (Eigen::Index j = 0; j < pool_end; ++j)
    if (j != i) pool.push_back(j);
  if (pool.empty())
    for (Eigen::Index j = 0; j < n; ++j)
      if (j != i) pool.push_back(j);

  auto tournament = [&]() {
    const Eigen::Index a = pool[rng.index(pool.size())];
    const Eigen::Index b = pool[rng.index(pool.size())];
    const double fa = swarm.pbest_val(a);
    const double fb = swarm.pbest_val(b);
    if (fa < fb) return a;
    if (fb < fa) return b;
    return std::min(a, b);
  };

  Exemplar ex;
  ex.sources = Eigen::VectorXi::Constant(dim, static_cast<int>(i));
  bool borrowed = false;
  for (Eigen::Index k = 0; k < dim; ++k) {
    if (rng.uniform() < pc) {
      ex.sources(k) = static_cast<int>(tournament());
      borrowed = true;
    }
  }
  if (!borrowed) {
    const auto k = static_cast<Eigen::Index>(rng.index(static_cast<std::uint64_t>(dim)));
    ex.sources(k) = static_cast<int>(tournament());
  }
  ex.coords.resize(dim);
  for (Eigen::Index k = 0; k < dim; ++k) ex.coords(k) = swarm.pbest_pos(k, ex.sources(k));
  return ex;
}

Vector velocity_exploration(const Swarm& swarm, Eigen::Index i, double w, double k,
                            const Vector& e1, const Vector& vmax) {
  const Vector x = swarm.positions.col(i);
  Vector v = w * swarm.velocities.col(i) + k * e1.cwiseProduct(swarm.exemplars.col(i) - x);
  return clamp_abs(std::move(v), vmax);
}

Vector velocity_exploitation(const Swarm& swarm, Eigen::Index i, double w, double c1, double c2,
                             const Vector& e2, const Vector& e3, const Vector& vmax) {
  const Vector x = swarm.positions.col(i);
  Vector v = w * swarm.velocities.col(i) + c1 * e2.cwiseProduct(swarm.exemplars.col(i) - x) +
             c2 * e3.cwiseProduct(swarm.gbest_pos - x);
  return clamp_abs(std::move(v), vmax);
}

Optimizer::Optimizer(Objective objective, SearchSpace space, PsoConfig config,
                     SequenceSource source, std::uint64_t seed)
    : objective_(std::move(objective)),
      space_(std::move(space)),
      config_(std::move(config)),
      source_(std::move(source)),
      rng_(mix_seed(seed, 0)),
      perm_rng_(mix_seed(seed, 1)) {
  space_.validate();
  config_.validate();
  source_.validate(space_.dim(), config_.pop_size, config_.n1());
  pc_ = config_.learning_probabilities();
  vmax_ = config_.vmax_frac * space_.width();
}

double Optimizer::evaluate(const Vector& x) {
  const double value = objective_(x);
  ++evaluations_;
  if (!std::isfinite(value))
    throw NonFiniteObjective("objective returned a non-finite value at evaluation " +
                             std::to_string(evaluations_));
  return value;
}

void Optimizer::update_gbest() {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < swarm_.size(); ++i)
    if (swarm_.pbest_val(i) < swarm_.pbest_val(best)) best = i;
  if (swarm_.gbest_pos.size() == 0 || swarm_.pbest_val(best) < swarm_.gbest_val) {
    swarm_.gbest_val = swarm_.pbest_val(best);
    swarm_.gbest_pos = swarm_.pbest_pos.col(best);
  }
}

void Optimizer::record() {
  report_.history.push_back({evaluations_, swarm_.iter, swarm_.gbest_val});
}

void Optimizer::initialize() {
  const int n = config_.pop_size;
  const Eigen::Index dim = space_.dim();
  swarm_ = Swarm{};
  swarm_.explore_size = config_.n1();
  swarm_.positions = init_population(space_, n, source_, rng_);
  swarm_.velocities = Matrix::Zero(dim, n);
  swarm_.pbest_pos = swarm_.positions;
  swarm_.pbest_val.resize(n);
  for (int i = 0; i < n; ++i) swarm_.pbest_val(i) = evaluate(swarm_.positions.col(i));
  swarm_.stagnation = Eigen::VectorXi::Zero(n);
  update_gbest();

  swarm_.exemplars.resize(dim, n);
  swarm_.exemplar_source.resize(dim, n);
  for (int i = 0; i < n; ++i) {
    Exemplar ex = build_exemplar(i, swarm_, pc_[static_cast<std::size_t>(i)], rng_);
    swarm_.exemplars.col(i) = ex.coords;
    swarm_.exemplar_source.col(i) = ex.sources;
  }
  swarm_.iter = 0;
  record();
}

void Optimizer::step() {
  const int n = config_.pop_size;
  const int n1 = swarm_.explore_size;
  const Eigen::Index dim = space_.dim();
  const int g = swarm_.iter;
  const int total = config_.max_iters;
  const double w = config_.inertia.at(g, total);
  const double k = config_.explore_accel.at(g, total);
  const double c1 = exploit_c1(g, total);
  const double c2 = exploit_c2(g, total);
  const bool lds = source_.mode == Mode::kDes;

  std::vector<int> perm1, perm2;
  if (lds && config_.permute_lds) {
    perm1 = shuffled(n1, perm_rng_);
    perm2 = shuffled(n - n1, perm_rng_);
  }
  auto column = [](const Matrix& m, const std::vector<int>& perm, int j) -> Vector {
    return m.col(perm.empty() ? j : perm[static_cast<std::size_t>(j)]);
  };

  for (int i = 0; i < n; ++i) {
    Vector v;
    if (i < n1) {
      const Vector e1 = lds ? column(source_.lds->p1, perm1, i) : uniform_vector(dim, rng_);
      v = velocity_exploration(swarm_, i, w, k, e1, vmax_);
    } else {
      const Vector e2 = lds ? column(source_.lds->p2, perm2, i - n1) : uniform_vector(dim, rng_);
      const Vector e3 = uniform_vector(dim, rng_);
      v = velocity_exploitation(swarm_, i, w, c1, c2, e2, e3, vmax_);
    }

    Vector x = swarm_.positions.col(i) + v;
    for (Eigen::Index d = 0; d < dim; ++d) {
      if (x(d) < space_.lower(d)) {
        x(d) = space_.lower(d);
        v(d) = 0.0;
      } else if (x(d) > space_.upper(d)) {
        x(d) = space_.upper(d);
        v(d) = 0.0;
      }
    }
    swarm_.positions.col(i) = x;
    swarm_.velocities.col(i) = v;

    const double value = evaluate(x);
    if (value < swarm_.pbest_val(i)) {
      swarm_.pbest_val(i) = value;
      swarm_.pbest_pos.col(i) = x;
      swarm_.stagnation(i) = 0;
    } else {
      ++swarm_.stagnation(i);
    }
  }
  update_gbest();

  for (int i = 0; i < n; ++i) {
    if (swarm_.stagnation(i) >= config_.refresh_gap) {
      Exemplar ex = build_exemplar(i, swarm_, pc_[static_cast<std::size_t>(i)], rng_);
      swarm_.exemplar_source.col(i) = ex.sources;
      swarm_.stagnation(i) = 0;
    }
    for (Eigen::Index d = 0; d < dim; ++d)
      swarm_.exemplars(d, i) = swarm_.pbest_pos(d, swarm_.exemplar_source(d, i));
  }

  ++swarm_.iter;
  record();
}

OptimizeResult optimize(const Objective& objective, const SearchSpace& space,
                        const PsoConfig& config, const SequenceSource& source,
                        std::uint64_t seed) {
  Optimizer opt(objective, space, config, source, seed);
  opt.initialize();
  for (int g = 0; g < config.max_iters; ++g) opt.step();
  return {opt.swarm().gbest_pos, opt.swarm().gbest_val, opt.report()};
}

std::optional<long> convergence_steps(const RunReport& report, double target, double tol) {
  if (!(tol > 0.0)) throw InvalidArgument("tolerance must be > 0");
  for (const ReportEntry& e : report.history)
    if (std::abs(e.gbest_value - target) <= tol) return e.evals;
  return std::nullopt;
}

void write_report_csv(std::ostream& out, const RunReport& report) {
  csv::write_row(out, {"evals", "iteration", "gbest_value"});
  for (const ReportEntry& e : report.history)
    csv::write_row(out, {std::to_string(e.evals), std::to_string(e.iteration),
                         csv::format_double(e.gbest_value)});
}

RunReport read_report_csv(std::istream& in) {
  const csv::Table t = csv::read_table(in);
  if (t.header != std::vector<std::string>{"evals", "iteration", "gbest_value"})
    throw ParseError("unexpected run-report header");
  RunReport r;
  for (const auto& row : t.rows) {
    if (row.size() != 3) throw ParseError("run-report row must have 3 fields");
    r.history.push_back({std::stol(row[0]), std::stoi(row[1]), csv::parse_double(row[2])});
  }
  return r;
}

}  // namespace despso::pso
