#include "despso/des.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "despso/csv.hpp"
#include "despso/error.hpp"
#include "despso/random.hpp"

namespace despso::des {
namespace {

constexpr double kCoincidenceThreshold = 1e-12;
constexpr double kJitterMagnitude = 1e-9;

// Per-dimension contributions of one pair: h enters the squared distance,
// a is the signed derivative factor of the force.
struct DimTerms {
  double h;
  double a;
};

inline DimTerms dim_terms(double xi, double xj, double q) {
  const double diff = xi - xj;
  const double delta = std::abs(diff);
  const double comp = 1.0 - delta;
  const double g = delta * comp;
  const double sign = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
  if (q == 2.0) {
    const double s = comp * comp + delta * delta;
    return {g * g / s, sign * g * (comp * comp * comp - delta * delta * delta) / (s * s)};
  }
  if (q == 1.0) {  // s = 1
    return {g * g, sign * g * (comp * comp - delta * delta)};
  }
  const double s = std::pow(comp, q) + std::pow(delta, q);
  const double h = g * g / std::pow(s, 2.0 / q);
  const double a =
      sign * g * (std::pow(comp, q + 1.0) - std::pow(delta, q + 1.0)) / std::pow(s, 1.0 + 2.0 / q);
  return {h, a};
}

inline double torus_gap(double a, double b) {
  const double d = std::abs(a - b);
  return std::min(d, 1.0 - d);
}

void require_pairs(const PointSet& points) {
  if (points.count() < 2) throw InvalidArgument("at least two points are required");
}

// Pairwise distances (upper triangle) and the smallest of them.
struct PairTable {
  std::vector<double> dist;  // N*N, only i<j filled
  double min_dist = std::numeric_limits<double>::infinity();
};

PairTable pair_distances(const Coords& x, double q) {
  const Eigen::Index n = x.rows();
  PairTable t;
  t.dist.assign(static_cast<std::size_t>(n * n), 0.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double d = pairwise_distance(x.row(i), x.row(j), q);
      t.dist[static_cast<std::size_t>(i * n + j)] = d;
      t.min_dist = std::min(t.min_dist, d);
    }
  }
  return t;
}

// Sum over pairs of (r/d)^p with r the minimum distance; keeps large p finite.
double scaled_power_sum(const PairTable& t, Eigen::Index n, double p) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      s += std::pow(t.min_dist / t.dist[static_cast<std::size_t>(i * n + j)], p);
  return s;
}

double max_torus_displacement(const Coords& a, const Coords& b) {
  double m = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index k = 0; k < a.cols(); ++k) m = std::max(m, torus_gap(a(i, k), b(i, k)));
  return m;
}

bool nearly_coincident(const Coords& x, Eigen::Index i, Eigen::Index j) {
  for (Eigen::Index k = 0; k < x.cols(); ++k)
    if (torus_gap(x(i, k), x(j, k)) > 10.0 * kCoincidenceThreshold) return false;
  return true;
}

// Moves the later-indexed point of every coincident pair by a seeded
// perturbation of Euclidean length 1e-9. The same shift is applied to the
// previous configuration so no velocity is injected.
void separate_coincident(Coords& current, Coords* previous, double q, std::uint64_t seed) {
  Rng rng(seed);
  const Eigen::Index n = current.rows();
  const Eigen::Index dim = current.cols();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (!nearly_coincident(current, i, j)) continue;
      if (pairwise_distance(current.row(i), current.row(j), q) >= kCoincidenceThreshold) continue;
      Eigen::RowVectorXd shift(dim);
      for (Eigen::Index k = 0; k < dim; ++k) shift(k) = rng.uniform() - 0.5;
      if (shift.norm() == 0.0) shift(0) = 1.0;
      shift *= kJitterMagnitude / shift.norm();
      for (Eigen::Index k = 0; k < dim; ++k) {
        current(j, k) = wrap_unit(current(j, k) + shift(k));
        if (previous) (*previous)(j, k) += shift(k);
      }
    }
  }
}

double stiffness_length_sq(const PointSet& x0, const DesConfig& config) {
  if (config.stiffness_scale == StiffnessScale::kFrobeniusNorm) return x0.coords().squaredNorm();
  const Eigen::Index n = x0.count();
  const PairTable t = pair_distances(x0.coords(), config.q);
  if (config.stiffness_scale == StiffnessScale::kMinimumSpacing)
    return config.length_factor * t.min_dist * t.min_dist;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double nearest = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      const auto a = std::min(i, j), b = std::max(i, j);
      nearest = std::min(nearest, t.dist[static_cast<std::size_t>(a * n + b)]);
    }
    sum += nearest;
  }
  const double mean = sum / static_cast<double>(n);
  return config.length_factor * mean * mean;
}

}  // namespace

double wrap_unit(double x) {
  double w = x - std::floor(x);
  if (w >= 1.0) w = 0.0;  // x a tiny negative number rounds up to 1
  return w;
}

void DesConfig::validate() const {
  if (!(q > 0.0)) throw InvalidArgument("q must be > 0");
  if (!(p > 0.0)) throw InvalidArgument("p must be > 0");
  if (big_g != 1.0) throw InvalidArgument("big_g is fixed at 1");
  if (!(dt > 0.0)) throw InvalidArgument("dt must be > 0");
  if (!(kappa > 0.0)) throw InvalidArgument("kappa must be > 0");
  if (max_steps < 1) throw InvalidArgument("max_steps must be >= 1");
  if (!(stop_tol > 0.0)) throw InvalidArgument("stop_tol must be > 0");
  if (!(length_factor > 0.0)) throw InvalidArgument("length_factor must be > 0");
  if (!(step_limit >= 0.0)) throw InvalidArgument("step_limit must be >= 0");
  if (restiffen_every < 0) throw InvalidArgument("restiffen_every must be >= 0");
}

PointSet::PointSet(Coords coords) : coords_(std::move(coords)) {
  for (Eigen::Index i = 0; i < coords_.size(); ++i) {
    const double v = coords_.data()[i];
    if (!(v >= 0.0 && v <= 1.0)) throw InvalidArgument("point coordinates must lie in [0, 1]");
  }
}

PointSet PointSet::uniform(Eigen::Index count, Eigen::Index dim, std::uint64_t seed) {
  Rng rng(seed);
  Coords c(count, dim);
  for (Eigen::Index i = 0; i < count; ++i)
    for (Eigen::Index k = 0; k < dim; ++k) c(i, k) = rng.uniform();
  return PointSet(std::move(c));
}

double pairwise_distance(const Eigen::Ref<const Eigen::RowVectorXd>& xi,
                         const Eigen::Ref<const Eigen::RowVectorXd>& xj, double q) {
  double sum = 0.0;
  for (Eigen::Index k = 0; k < xi.size(); ++k) sum += dim_terms(xi(k), xj(k), q).h;
  return std::sqrt(sum / 2.0);
}

double potential_energy(const PointSet& points, double q, double p) {
  require_pairs(points);
  const PairTable t = pair_distances(points.coords(), q);
  if (!(t.min_dist > 0.0)) throw CoincidentPoints("coincident points: potential diverges");
  return std::pow(scaled_power_sum(t, points.count(), p), 1.0 / p) / t.min_dist;
}

Coords forces(const PointSet& points, double q, double p) {
  require_pairs(points);
  const Coords& x = points.coords();
  const Eigen::Index n = x.rows();
  const Eigen::Index dim = x.cols();

  // a_ijk for i<j; a_jik = -a_ijk.
  std::vector<double> a(static_cast<std::size_t>(n * n * dim), 0.0);
  PairTable t;
  t.dist.assign(static_cast<std::size_t>(n * n), 0.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      double h = 0.0;
      for (Eigen::Index k = 0; k < dim; ++k) {
        const DimTerms terms = dim_terms(x(i, k), x(j, k), q);
        h += terms.h;
        a[static_cast<std::size_t>((i * n + j) * dim + k)] = terms.a;
      }
      const double d = std::sqrt(h / 2.0);
      t.dist[static_cast<std::size_t>(i * n + j)] = d;
      t.min_dist = std::min(t.min_dist, d);
    }
  }
  if (!(t.min_dist > 0.0)) throw CoincidentPoints("coincident points: force diverges");

  // With r = min distance and S' = sum (r/d)^p:
  //   dU/dx_ik = -(1/2) S'^((1-p)/p) r^-3 sum_j a_ijk (r/d_ij)^(p+2)
  // The 1/2 comes from the 1/2 under the square root of d_q.
  const double r = t.min_dist;
  double sum = 0.0;
  Coords f = Coords::Zero(n, dim);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double ratio = r / t.dist[static_cast<std::size_t>(i * n + j)];
      const double rp = std::pow(ratio, p);
      sum += rp;
      const double w = rp * ratio * ratio;
      const double* aij = &a[static_cast<std::size_t>((i * n + j) * dim)];
      for (Eigen::Index k = 0; k < dim; ++k) {
        f(i, k) += aij[k] * w;
        f(j, k) -= aij[k] * w;
      }
    }
  }
  const double prefactor = -0.5 * std::pow(sum, (1.0 - p) / p) / (r * r * r);
  f *= prefactor;
  return f;
}

double force(const PointSet& points, Eigen::Index i, Eigen::Index k, double q, double p) {
  if (i < 0 || i >= points.count() || k < 0 || k >= points.dim())
    throw InvalidArgument("force index out of range");
  return forces(points, q, p)(i, k);
}

double first_step(double x0, double f0, double mass, double dt) {
  return x0 - 0.5 / mass * f0 * dt * dt;
}

double central_difference_step(double x, double x_prev, double f, double a0, double a1,
                               double a2) {
  return (a1 * x - a2 * x_prev - f) / a0;
}

namespace {

// Largest per-step move of one coordinate. The next step's unwrap needs
// |move| < 1/2; a quarter keeps clear of that.
double move_cap(const DesConfig& config, Eigen::Index n, Eigen::Index dim) {
  double cap = 0.25;
  if (config.step_limit > 0.0)
    cap = std::min(cap, config.step_limit * std::pow(static_cast<double>(n), -1.0 / dim));
  return cap;
}

// Mass, damping and integrator coefficients from the stiffness of `x`.
void set_coefficients(DesState& s, const PointSet& x, const DesConfig& config) {
  const double energy = potential_energy(x, config.q, config.p);
  const double length_sq = stiffness_length_sq(x, config);
  if (!(length_sq > 0.0)) throw ZeroNorm("stiffness length scale is zero");

  const double stiffness = energy / length_sq;
  const double dt = config.dt;
  s.mass = (1.0 + config.kappa) / 4.0 * stiffness * dt * dt;
  s.damping = stiffness * std::sqrt(config.kappa) * dt;
  s.a0 = s.mass / (dt * dt) + s.damping / (2.0 * dt);
  s.a1 = 2.0 * s.mass / (dt * dt);
  s.a2 = s.mass / (dt * dt) - s.damping / (2.0 * dt);
}

}  // namespace

DesState init_dynamics(const PointSet& x0, const DesConfig& config, std::uint64_t seed) {
  config.validate();
  require_pairs(x0);
  DesState s;
  set_coefficients(s, x0, config);
  s.seed = seed;
  const double dt = config.dt;

  const Coords f0 = forces(x0, config.q, config.p);
  const double cap = move_cap(config, x0.count(), x0.dim());
  Coords x1(x0.count(), x0.dim());
  for (Eigen::Index i = 0; i < x1.rows(); ++i)
    for (Eigen::Index k = 0; k < x1.cols(); ++k)
      x1(i, k) = wrap_unit(
          std::clamp(first_step(x0(i, k), f0(i, k), s.mass, dt), x0(i, k) - cap, x0(i, k) + cap));

  s.displacement = max_torus_displacement(x1, x0.coords());
  s.previous = x0;
  s.current = PointSet(std::move(x1));
  s.step = 1;
  return s;
}

DesState symplectic_step(const DesState& state, const DesConfig& config) {
  Coords cur = state.current.coords();
  Coords prev = state.previous.coords();
  if (prev.rows() != cur.rows() || prev.cols() != cur.cols())
    throw ShapeMismatch("current and previous configurations differ in shape");
  separate_coincident(cur, &prev, config.q,
                      mix_seed(state.seed, static_cast<std::uint64_t>(state.step)));

  // Minimum-image unwrap of the previous configuration so x - x_prev is the
  // true (short) displacement on the torus.
  for (Eigen::Index i = 0; i < cur.rows(); ++i)
    for (Eigen::Index k = 0; k < cur.cols(); ++k)
      prev(i, k) += std::round(cur(i, k) - prev(i, k));

  const PointSet cur_set(cur);
  const Coords f = forces(cur_set, config.q, config.p);
  const double cap = move_cap(config, cur.rows(), cur.cols());
  Coords next(cur.rows(), cur.cols());
  double displacement = 0.0;
  for (Eigen::Index i = 0; i < cur.rows(); ++i) {
    for (Eigen::Index k = 0; k < cur.cols(); ++k) {
      // (a1 x - a2 x_prev - f) / a0 rewritten with a1 = a0 + a2, so a point at
      // rest under zero force stays put exactly.
      double x = cur(i, k) + (state.a2 * (cur(i, k) - prev(i, k)) - f(i, k)) / state.a0;
      x = std::clamp(x, cur(i, k) - cap, cur(i, k) + cap);
      displacement = std::max(displacement, std::abs(x - cur(i, k)));
      next(i, k) = wrap_unit(x);
    }
  }

  DesState out = state;
  if (config.restiffen_every > 0 && out.step % config.restiffen_every == 0)
    set_coefficients(out, cur_set, config);
  out.previous = cur_set;
  out.current = PointSet(std::move(next));
  out.displacement = displacement;
  out.step = state.step + 1;
  return out;
}

DesResult generate_des(Eigen::Index n, Eigen::Index dim, const DesConfig& config,
                       std::uint64_t seed) {
  if (n < 2) throw InvalidArgument("n must be >= 2");
  if (dim < 1) throw InvalidArgument("dim must be >= 1");
  config.validate();

  Coords x0 = PointSet::uniform(n, dim, mix_seed(seed, 0)).coords();
  separate_coincident(x0, nullptr, config.q, mix_seed(seed, 1));
  DesState state = init_dynamics(PointSet(std::move(x0)), config, mix_seed(seed, 2));
  while (!(state.displacement < config.stop_tol) && state.step < config.max_steps)
    state = symplectic_step(state, config);

  DesResult result;
  result.converged = state.displacement < config.stop_tol;
  result.steps = state.step;
  result.displacement = state.displacement;
  result.points = std::move(state.current);
  return result;
}

double centered_l2_discrepancy(const PointSet& points) {
  const Eigen::Index n = points.count();
  const Eigen::Index dim = points.dim();
  if (n < 1) throw InvalidArgument("discrepancy needs at least one point");
  const Coords& x = points.coords();

  double single = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double prod = 1.0;
    for (Eigen::Index k = 0; k < dim; ++k) {
      const double z = std::abs(x(i, k) - 0.5);
      prod *= 1.0 + 0.5 * z - 0.5 * z * z;
    }
    single += prod;
  }
  double pairs = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      double prod = 1.0;
      for (Eigen::Index k = 0; k < dim; ++k) {
        prod *= 1.0 + 0.5 * std::abs(x(i, k) - 0.5) + 0.5 * std::abs(x(j, k) - 0.5) -
                0.5 * std::abs(x(i, k) - x(j, k));
      }
      pairs += prod;
    }
  }
  const double nn = static_cast<double>(n);
  const double sq = std::pow(13.0 / 12.0, static_cast<double>(dim)) - 2.0 / nn * single +
                    pairs / (nn * nn);
  return std::sqrt(std::max(sq, 0.0));
}

void write_csv(std::ostream& out, const PointSet& points) {
  std::vector<std::string> fields(static_cast<std::size_t>(points.dim()));
  for (Eigen::Index k = 0; k < points.dim(); ++k)
    fields[static_cast<std::size_t>(k)] = "dim_" + std::to_string(k);
  csv::write_row(out, fields);
  for (Eigen::Index i = 0; i < points.count(); ++i) {
    for (Eigen::Index k = 0; k < points.dim(); ++k)
      fields[static_cast<std::size_t>(k)] = csv::format_double(points(i, k));
    csv::write_row(out, fields);
  }
}

PointSet read_csv(std::istream& in) {
  const csv::Table table = csv::read_table(in);
  const auto dim = static_cast<Eigen::Index>(table.header.size());
  for (Eigen::Index k = 0; k < dim; ++k)
    if (table.header[static_cast<std::size_t>(k)] != "dim_" + std::to_string(k))
      throw ParseError("unexpected point-set header");
  Coords c(static_cast<Eigen::Index>(table.rows.size()), dim);
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    if (table.rows[i].size() != table.header.size())
      throw ParseError("row " + std::to_string(i + 1) + " has the wrong number of fields");
    for (Eigen::Index k = 0; k < dim; ++k)
      c(static_cast<Eigen::Index>(i), k) =
          csv::parse_double(table.rows[i][static_cast<std::size_t>(k)]);
  }
  return PointSet(std::move(c));
}

}  // namespace despso::des
