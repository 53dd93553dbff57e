#pragma once

// Built-in benchmark problems and exact ground-truth oracles.
//
//  * linear2x2: x = A^-1 b with every entry of A and b an interval
//    (a11 in [3,6], a12 in [-3,1.5], a21 in [-1.5,3], a22 in [3,6],
//    b1, b2 in [-4,4]). Both solution components range over [-16/3, 16/3].
//  * smartwatch: ten interval inputs (five thicknesses X1..X5, three Young
//    moduli P1..P3, two chip powers P4, P5) and six quadratic response
//    surfaces for impact stress, solder stress and chip temperature.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "despso/interval.hpp"

namespace despso::cases {

using pso::Matrix;
using pso::Vector;

// ---------------------------------------------------------------------------
// Linear interval system

struct Solution2x2 {
  double x1 = 0.0;
  double x2 = 0.0;
};

inline constexpr double kLinearSystemBound = 16.0 / 3.0;

/// Cramer's rule. Throws SingularMatrix when |det| < 1e-12.
Solution2x2 solve_linear_2x2(double a11, double a12, double a21, double a22, double b1,
                             double b2);

/// Variables a11, a12, a21, a22, b1, b2 in that order.
std::vector<interval::IntervalVariable> linear_system_variables();
interval::IntervalProblem linear_system_problem();

/// Seeded uniform samples of the coefficient box mapped to (x1, x2); n x 2.
Eigen::MatrixX2d sample_solution_domain(int n_samples, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Smartwatch response surfaces

enum SmartwatchVar : int { kX1, kX2, kX3, kX4, kX5, kP1, kP2, kP3, kP4, kP5, kSmartwatchVars };

std::vector<interval::IntervalVariable> smartwatch_variables();

/// coefficient * scale * x[first] * x[second]; an index of kNoVar contributes a factor 1.
struct Monomial {
  static constexpr int kNoVar = -1;
  double coefficient = 0.0;
  double scale = 1.0;
  int first = kNoVar;
  int second = kNoVar;
};

/// f(x) = c + g'x + x'Hx / 2 over a fixed list of variables.
struct QuadraticForm {
  double constant = 0.0;
  Vector linear;
  Matrix hessian;

  double evaluate(const Vector& x) const;
};

class QuadraticSurface {
 public:
  QuadraticSurface(std::string name, std::vector<Monomial> terms);

  const std::string& name() const { return name_; }
  const std::vector<Monomial>& terms() const { return terms_; }

  /// Evaluates on the full input vector (indices as used in the terms).
  double evaluate(const Vector& x) const;
  /// Sorted indices of the variables the surface depends on.
  std::vector<int> active_variables() const;
  /// Exact quadratic form restricted to `vars` (every active variable must be listed).
  QuadraticForm form_over(const std::vector<int>& vars) const;

 private:
  std::string name_;
  std::vector<Monomial> terms_;
};

enum class SmartwatchTable {
  /// Two sign typos repaired (sigma2_N P2*P3, sigma3_N P3^2); reproduces the reference bounds.
  kSignCorrected,
  /// Coefficients with the two original signs kept.
  kPrinted,
};

/// sigma1_N, sigma2_N, sigma3_N, sigma_H, T1, T2 in that order.
const std::vector<QuadraticSurface>& smartwatch_surfaces(
    SmartwatchTable table = SmartwatchTable::kSignCorrected);

interval::IntervalProblem smartwatch_problem(
    SmartwatchTable table = SmartwatchTable::kSignCorrected);

/// Evaluates a named surface from named inputs (X1..X5, P1..P5; missing inputs
/// default to 0). Throws UnknownSurface for a bad surface name.
double response_surface(std::string_view which, const std::map<std::string, double>& inputs,
                        SmartwatchTable table = SmartwatchTable::kSignCorrected);

// ---------------------------------------------------------------------------
// Oracles

struct OracleResult {
  double y_min = 0.0;
  double y_max = 0.0;
  Vector argmin;
  Vector argmax;
  int skipped_faces = 0;  // faces whose stationarity system was singular
};

/// Exact extrema of a quadratic over a box by enumerating all 3^d
/// activity patterns (each variable at its lower bound, upper bound or free)
/// and solving the stationarity conditions of the free variables.
OracleResult quadratic_box_oracle(const QuadraticForm& form, const Vector& lower,
                                  const Vector& upper);

/// Same for a surface over a full-dimensional box; inactive inputs are
/// reported at the box midpoint.
OracleResult quadratic_box_oracle(const QuadraticSurface& surface, const pso::SearchSpace& box);

struct LinearSystemOracle {
  OracleResult x1;
  OracleResult x2;
};

/// Grid search over the six coefficients (`levels` per axis, endpoints
/// included) followed by `refine_rounds` rounds of local coordinate search.
LinearSystemOracle linear_system_oracle(const pso::SearchSpace& box, int levels = 33,
                                        int refine_rounds = 2);
LinearSystemOracle linear_system_oracle(int levels = 33, int refine_rounds = 2);

/// CSV response,y_min,y_max,argmin_<var>...,argmax_<var>...
void write_oracle_csv(std::ostream& out, const std::vector<std::string>& variable_names,
                      const std::vector<std::pair<std::string, OracleResult>>& results);

/// CSV x1,x2.
void write_cloud_csv(std::ostream& out, const Eigen::MatrixX2d& cloud);

}  // namespace despso::cases
