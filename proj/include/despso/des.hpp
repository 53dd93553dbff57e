#pragma once

// Dynamic evolution sequences: low-discrepancy point sets obtained as the
// stationary state of N mutually repelling particles on the unit torus.
//
// The particles interact through a p-norm aggregated inverse-distance
// potential
//
//     U(X) = G * ( sum_{i<j} d_q(x_i, x_j)^(-p) )^(1/p)
//
// with the periodic distance d_q defined in pairwise_distance(). A damped
// second-order system m x'' + c x' + f = 0 is integrated with the
// central-difference (symplectic) scheme until the particles stop moving.

#include <Eigen/Core>

#include <cstdint>
#include <iosfwd>

namespace despso::des {

/// Row-major N x D coordinate block: one point per row.
using Coords = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// How the stiffness estimate k = U(X0) / L^2 that sets mass and damping is scaled.
enum class StiffnessScale {
  /// L = ||X0||_F, the Frobenius norm of the initial coordinates.
  kFrobeniusNorm,
  /// L^2 = length_factor * (mean nearest-neighbour distance of X0)^2.
  kNeighbourSpacing,
  /// L^2 = length_factor * (smallest pair distance of X0)^2.
  kMinimumSpacing,
};

struct DesConfig {
  double q = 1.0;       // distance-shape exponent
  double p = 20.0;      // potential (p-norm) exponent
  double big_g = 1.0;   // generalized gravitational constant, fixed at 1
  double dt = 0.1;      // pseudo-time step
  double kappa = 0.25;  // damping ratio parameter
  int max_steps = 10000;
  double stop_tol = 1e-8;  // stationarity: max per-coordinate displacement
  StiffnessScale stiffness_scale = StiffnessScale::kNeighbourSpacing;
  double length_factor = 0.5;
  /// Per-step, per-coordinate move cap as a multiple of N^(-1/D); 0 disables it.
  double step_limit = 0.0;
  /// Recompute mass and damping from the current configuration every this
  /// many steps; 0 keeps the values derived from X0 throughout.
  int restiffen_every = 100;

  /// Throws InvalidArgument when a field is outside its domain.
  void validate() const;
};

/// N points in [0,1]^D.
class PointSet {
 public:
  PointSet() = default;
  /// Takes ownership of `coords`; every coordinate must lie in [0, 1].
  explicit PointSet(Coords coords);

  Eigen::Index count() const { return coords_.rows(); }
  Eigen::Index dim() const { return coords_.cols(); }
  const Coords& coords() const { return coords_; }
  double operator()(Eigen::Index i, Eigen::Index k) const { return coords_(i, k); }

  /// Uniform random points from a seeded generator.
  static PointSet uniform(Eigen::Index count, Eigen::Index dim, std::uint64_t seed);

 private:
  Coords coords_;
};

/// Integrator state: two consecutive configurations plus the coefficients of
/// the central-difference recursion.
struct DesState {
  PointSet current;   // X^(g)
  PointSet previous;  // X^(g-1)
  double mass = 0.0;
  double damping = 0.0;
  double a0 = 0.0;  // m/dt^2 + c/(2 dt)
  double a1 = 0.0;  // 2m/dt^2
  double a2 = 0.0;  // m/dt^2 - c/(2 dt)
  int step = 0;
  double displacement = 0.0;  // max per-coordinate torus displacement of the last step
  std::uint64_t seed = 0;     // drives the coincidence jitter
};

struct DesResult {
  PointSet points;
  int steps = 0;
  double displacement = 0.0;
  bool converged = false;  // false: max_steps hit before stationarity
};

/// Periodic generalized distance between two points of [0,1]^D:
///
///     d_q = sqrt( (1/2) * sum_k D_k^2 (1-D_k)^2 / ((1-D_k)^q + D_k^q)^(2/q) ),
///     D_k = |xi_k - xj_k|.
double pairwise_distance(const Eigen::Ref<const Eigen::RowVectorXd>& xi,
                         const Eigen::Ref<const Eigen::RowVectorXd>& xj, double q);

/// Potential term U of the Lagrangian (G = 1). Needs at least two points.
/// Throws CoincidentPoints if any pair is at distance zero.
double potential_energy(const PointSet& points, double q, double p);

/// Generalized force f_ik acting on particle i along dimension k.
///
/// f = dU/dx_ik, so the equation of motion m x'' + f = 0 moves the particles
/// down the potential. Throws CoincidentPoints like potential_energy().
double force(const PointSet& points, Eigen::Index i, Eigen::Index k, double q, double p);

/// All forces at once, N x D. Same values as force() for every (i, k).
Coords forces(const PointSet& points, double q, double p);

/// Maps a coordinate onto the torus [0, 1).
double wrap_unit(double x);

/// Scalar kernel of the special first step: x1 = x0 - f0 dt^2 / (2 m).
double first_step(double x0, double f0, double mass, double dt);

/// Scalar kernel of the recursion: x+ = (a1 x - a2 x_prev - f) / a0.
double central_difference_step(double x, double x_prev, double f, double a0, double a1,
                               double a2);

/// Computes mass and damping from X0 and takes the first integration step.
/// Throws CoincidentPoints, or ZeroNorm if the stiffness length scale is 0.
DesState init_dynamics(const PointSet& x0, const DesConfig& config, std::uint64_t seed = 0);

/// One central-difference step; coordinates are wrapped into [0, 1).
/// Coincident particles are separated by a seeded 1e-9 jitter before the
/// forces are evaluated.
DesState symplectic_step(const DesState& state, const DesConfig& config);

/// Seeds n uniform points and relaxes them until stationary. Deterministic in
/// (n, dim, config, seed). A non-stationary result is returned with
/// converged == false rather than thrown.
DesResult generate_des(Eigen::Index n, Eigen::Index dim, const DesConfig& config,
                       std::uint64_t seed);

/// Centered L2 discrepancy (Hickernell), square root of the Warnock-type closed form.
double centered_l2_discrepancy(const PointSet& points);

/// CSV with header dim_0,...,dim_{D-1}; 17 significant digits.
void write_csv(std::ostream& out, const PointSet& points);
PointSet read_csv(std::istream& in);

}  // namespace despso::des
