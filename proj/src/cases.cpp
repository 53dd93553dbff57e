#include "despso/cases.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <ostream>

#include "despso/csv.hpp"
#include "despso/error.hpp"
#include "despso/random.hpp"

namespace despso::cases {
namespace {

constexpr int kNone = Monomial::kNoVar;

// Term-for-term transcription of the six response surfaces. Rows read
// {coefficient, scale, first, second}; the P2/P3 blocks of the three impact
// stresses carry the common 1e-6 factor as their scale.
std::vector<QuadraticSurface> make_surfaces(SmartwatchTable table) {
  const bool printed = table == SmartwatchTable::kPrinted;
  constexpr double e6 = 1e-6;
  std::vector<QuadraticSurface> s;
  s.emplace_back("sigma1_N", std::vector<Monomial>{
      {0.001848, e6, kP2, kP2}, {-0.3688, e6, kP2, kP3}, {973.18, e6, kP2, kNone},
      {1.609, e6, kP3, kP3},
      {-30.19, 1, kX1, kX1}, {1.133, 1, kX1, kX3}, {33.10, 1, kX1, kX4}, {1.313, 1, kX1, kX5},
      {0.4128, 1, kX3, kX3}, {-3.7317, 1, kX3, kX4}, {-0.26871, 1, kX3, kX5},
      {-56.55, 1, kX4, kX4}, {65.54, 1, kX4, kX5}, {-55.32, 1, kX5, kX5},
      {129.86, 1, kNone, kNone}});
  s.emplace_back("sigma2_N", std::vector<Monomial>{
      {-0.03509, e6, kP2, kP2}, {printed ? 0.1813 : -0.1813, e6, kP2, kP3},
      {1277, e6, kP2, kNone}, {-1.461, e6, kP3, kP3},
      {-35.80, 1, kX1, kX1}, {6.112, 1, kX1, kX3}, {32.86, 1, kX1, kX4}, {2.891, 1, kX1, kX5},
      {-6.809, 1, kX3, kX3}, {4.303, 1, kX3, kX4}, {9.209, 1, kX3, kX5},
      {-63.71, 1, kX4, kX4}, {67.43, 1, kX4, kX5}, {-64.37, 1, kX5, kX5},
      {135.2, 1, kNone, kNone}});
  s.emplace_back("sigma3_N", std::vector<Monomial>{
      {0.03054, e6, kP2, kP2}, {-0.95, e6, kP2, kP3}, {802.6, e6, kP2, kNone},
      {printed ? 4.645 : -4.645, e6, kP3, kP3},
      {-28.19, 1, kX1, kX1}, {4.188, 1, kX1, kX3}, {28.63, 1, kX1, kX4}, {0.2030, 1, kX1, kX5},
      {9.152, 1, kX3, kX3}, {-16.12, 1, kX3, kX4}, {-15.75, 1, kX3, kX5},
      {-42.17, 1, kX4, kX4}, {62.61, 1, kX4, kX5}, {-36.32, 1, kX5, kX5},
      {119.5, 1, kNone, kNone}});
  s.emplace_back("sigma_H", std::vector<Monomial>{
      {0.0000002578, 1, kP1, kP1}, {-0.00002501, 1, kP1, kX2},
      {-0.9103, 1, kX1, kX1}, {0.02502, 1, kX1, kX2}, {0.6950, 1, kX1, kX3},
      {0.1007, 1, kX2, kX2}, {0.0125, 1, kX2, kX3}, {-2.372, 1, kX3, kX3},
      {37.54, 1, kNone, kNone}});
  s.emplace_back("T1", std::vector<Monomial>{
      {0.5473, 1, kX1, kX1}, {-2.932, 1, kX1, kX2}, {-0.3207, 1, kX1, kX3},
      {5.589, 1, kX2, kX2}, {-2.970, 1, kX2, kX3}, {-1.206, 1, kX3, kX3},
      {71.85, 1, kP4, kNone}, {72.81, 1, kP5, kNone}, {299.3, 1, kP4, kP5},
      {62.05, 1, kNone, kNone}});
  s.emplace_back("T2", std::vector<Monomial>{
      {0.5448, 1, kX1, kX1}, {-2.923, 1, kX1, kX2}, {-0.3219, 1, kX1, kX3},
      {5.569, 1, kX2, kX2}, {-2.973, 1, kX2, kX3}, {-1.204, 1, kX3, kX3},
      {61.10, 1, kP4, kNone}, {96.78, 1, kP5, kNone}, {255.2, 1, kP4, kP5},
      {61.11, 1, kNone, kNone}});
  return s;
}

const char* const kSmartwatchNames[kSmartwatchVars] = {"X1", "X2", "X3", "X4", "X5",
                                                       "P1", "P2", "P3", "P4", "P5"};

// Candidate tracking shared by both oracles.
struct Extrema {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  Vector argmin;
  Vector argmax;

  void offer(double y, const Vector& x) {
    if (y < lo) {
      lo = y;
      argmin = x;
    }
    if (y > hi) {
      hi = y;
      argmax = x;
    }
  }
};

// Enumerates every face of the box, calling visit(x) at each feasible
// stationary point. Works in unit coordinates u = (x - lower) / width so the
// stationarity systems are well scaled; zero-width dimensions stay fixed.
template <class Visit>
int enumerate_faces(const QuadraticForm& form, const Vector& lower, const Vector& upper,
                    Visit&& visit) {
  const Eigen::Index d = lower.size();
  const Vector width = upper - lower;
  std::vector<Eigen::Index> movable;
  for (Eigen::Index k = 0; k < d; ++k)
    if (width(k) > 0.0) movable.push_back(k);

  const Vector gu = width.cwiseProduct(form.linear + form.hessian * lower);
  const Matrix hu = width.asDiagonal() * form.hessian * width.asDiagonal();

  const std::size_t m = movable.size();
  std::size_t patterns = 1;
  for (std::size_t i = 0; i < m; ++i) patterns *= 3;

  int skipped = 0;
  std::vector<int> state(m, 0);
  for (std::size_t p = 0; p < patterns; ++p) {
    std::size_t code = p;
    for (std::size_t i = 0; i < m; ++i) {
      state[i] = static_cast<int>(code % 3);
      code /= 3;
    }
    Vector u = Vector::Zero(d);
    std::vector<Eigen::Index> free_dims;
    for (std::size_t i = 0; i < m; ++i) {
      if (state[i] == 1) u(movable[i]) = 1.0;
      if (state[i] == 2) free_dims.push_back(movable[i]);
    }
    if (!free_dims.empty()) {
      const auto nf = static_cast<Eigen::Index>(free_dims.size());
      Matrix a(nf, nf);
      Vector rhs(nf);
      for (Eigen::Index r = 0; r < nf; ++r) {
        rhs(r) = -gu(free_dims[r]);
        for (Eigen::Index c = 0; c < d; ++c) rhs(r) -= hu(free_dims[r], c) * u(c);
        for (Eigen::Index c = 0; c < nf; ++c) a(r, c) = hu(free_dims[r], free_dims[c]);
      }
      Eigen::FullPivLU<Matrix> lu(a);
      if (!lu.isInvertible()) {
        ++skipped;
        continue;
      }
      const Vector uf = lu.solve(rhs);
      bool feasible = true;
      for (Eigen::Index r = 0; r < nf; ++r)
        if (!(uf(r) >= -1e-9 && uf(r) <= 1.0 + 1e-9)) feasible = false;
      if (!feasible) continue;
      for (Eigen::Index r = 0; r < nf; ++r) u(free_dims[r]) = std::clamp(uf(r), 0.0, 1.0);
    }
    visit(Vector(lower + width.cwiseProduct(u)));
  }
  return skipped;
}

OracleResult to_result(const Extrema& e, int skipped) {
  return {e.lo, e.hi, e.argmin, e.argmax, skipped};
}

// Coordinate search around x: each pass scans `levels` points in
// [x_k - h, x_k + h] per coordinate until nothing improves, then h shrinks
// to the scan spacing.
template <class F>
void coordinate_refine(F&& f, Vector& x, double& fx, const Vector& lower, const Vector& upper,
                       const Vector& h0, int levels, int rounds) {
  Vector h = h0;
  for (int r = 0; r < rounds; ++r) {
    for (int sweep = 0; sweep < 100; ++sweep) {
      bool improved = false;
      for (Eigen::Index k = 0; k < x.size(); ++k) {
        const double centre = x(k);
        for (int j = 0; j < levels; ++j) {
          Vector trial = x;
          trial(k) = std::clamp(centre - h(k) + 2.0 * h(k) * j / (levels - 1.0), lower(k),
                                upper(k));
          const double ft = f(trial);
          if (ft < fx) {
            fx = ft;
            x = trial;
            improved = true;
          }
        }
      }
      if (!improved) break;
    }
    h *= 2.0 / (levels - 1.0);
  }
}

}  // namespace

Solution2x2 solve_linear_2x2(double a11, double a12, double a21, double a22, double b1,
                             double b2) {
  const double det = a11 * a22 - a12 * a21;
  if (std::abs(det) < 1e-12) throw SingularMatrix("2x2 system is singular");
  return {(b1 * a22 - a12 * b2) / det, (a11 * b2 - a21 * b1) / det};
}

std::vector<interval::IntervalVariable> linear_system_variables() {
  return {{"a11", 3.0, 6.0}, {"a12", -3.0, 1.5}, {"a21", -1.5, 3.0},
          {"a22", 3.0, 6.0}, {"b1", -4.0, 4.0},  {"b2", -4.0, 4.0}};
}

interval::IntervalProblem linear_system_problem() {
  auto x1 = [](const Vector& v) { return solve_linear_2x2(v(0), v(1), v(2), v(3), v(4), v(5)).x1; };
  auto x2 = [](const Vector& v) { return solve_linear_2x2(v(0), v(1), v(2), v(3), v(4), v(5)).x2; };
  return interval::IntervalProblem(linear_system_variables(), {{"x1", x1}, {"x2", x2}});
}

Eigen::MatrixX2d sample_solution_domain(int n_samples, std::uint64_t seed) {
  if (n_samples < 1) throw InvalidArgument("n_samples must be >= 1");
  const auto vars = linear_system_variables();
  Rng rng(seed);
  Eigen::MatrixX2d cloud(n_samples, 2);
  std::array<double, 6> c{};
  for (int s = 0; s < n_samples; ++s) {
    for (std::size_t k = 0; k < 6; ++k)
      c[k] = vars[k].lower + rng.uniform() * (vars[k].upper - vars[k].lower);
    const Solution2x2 x = solve_linear_2x2(c[0], c[1], c[2], c[3], c[4], c[5]);
    cloud(s, 0) = x.x1;
    cloud(s, 1) = x.x2;
  }
  return cloud;
}

std::vector<interval::IntervalVariable> smartwatch_variables() {
  std::vector<interval::IntervalVariable> v;
  for (int k = kX1; k <= kX5; ++k) v.push_back({kSmartwatchNames[k], 0.91, 1.09});
  v.push_back({"P1", 10400.0, 11600.0});
  v.push_back({"P2", 22600.0, 23400.0});
  v.push_back({"P3", 2380.0, 2580.0});
  v.push_back({"P4", 0.09, 0.21});
  v.push_back({"P5", 0.09, 0.21});
  return v;
}

double QuadraticForm::evaluate(const Vector& x) const {
  return constant + linear.dot(x) + 0.5 * x.dot(hessian * x);
}

QuadraticSurface::QuadraticSurface(std::string name, std::vector<Monomial> terms)
    : name_(std::move(name)), terms_(std::move(terms)) {}

double QuadraticSurface::evaluate(const Vector& x) const {
  double sum = 0.0;
  for (const Monomial& t : terms_) {
    double v = t.coefficient * t.scale;
    if (t.first != kNone) v *= x(t.first);
    if (t.second != kNone) v *= x(t.second);
    sum += v;
  }
  return sum;
}

std::vector<int> QuadraticSurface::active_variables() const {
  std::vector<int> vars;
  for (const Monomial& t : terms_)
    for (int idx : {t.first, t.second})
      if (idx != kNone && std::find(vars.begin(), vars.end(), idx) == vars.end())
        vars.push_back(idx);
  std::sort(vars.begin(), vars.end());
  return vars;
}

QuadraticForm QuadraticSurface::form_over(const std::vector<int>& vars) const {
  const auto d = static_cast<Eigen::Index>(vars.size());
  auto pos = [&](int idx) -> Eigen::Index {
    const auto it = std::find(vars.begin(), vars.end(), idx);
    if (it == vars.end()) throw InvalidArgument("variable list misses an active variable");
    return it - vars.begin();
  };
  QuadraticForm f{0.0, Vector::Zero(d), Matrix::Zero(d, d)};
  for (const Monomial& t : terms_) {
    const double c = t.coefficient * t.scale;
    if (t.first == kNone && t.second == kNone) {
      f.constant += c;
    } else if (t.first == kNone || t.second == kNone) {
      f.linear(pos(t.first == kNone ? t.second : t.first)) += c;
    } else if (t.first == t.second) {
      f.hessian(pos(t.first), pos(t.first)) += 2.0 * c;
    } else {
      const auto i = pos(t.first), j = pos(t.second);
      f.hessian(i, j) += c;
      f.hessian(j, i) += c;
    }
  }
  return f;
}

const std::vector<QuadraticSurface>& smartwatch_surfaces(SmartwatchTable table) {
  static const std::vector<QuadraticSurface> corrected = make_surfaces(SmartwatchTable::kSignCorrected);
  static const std::vector<QuadraticSurface> printed = make_surfaces(SmartwatchTable::kPrinted);
  return table == SmartwatchTable::kPrinted ? printed : corrected;
}

interval::IntervalProblem smartwatch_problem(SmartwatchTable table) {
  std::vector<interval::Response> responses;
  for (const QuadraticSurface& s : smartwatch_surfaces(table))
    responses.push_back({s.name(), [&s](const Vector& x) { return s.evaluate(x); }});
  return interval::IntervalProblem(smartwatch_variables(), std::move(responses));
}

double response_surface(std::string_view which, const std::map<std::string, double>& inputs,
                        SmartwatchTable table) {
  for (const QuadraticSurface& s : smartwatch_surfaces(table)) {
    if (s.name() != which) continue;
    Vector x = Vector::Zero(kSmartwatchVars);
    for (int k = 0; k < kSmartwatchVars; ++k)
      if (auto it = inputs.find(kSmartwatchNames[k]); it != inputs.end()) x(k) = it->second;
    return s.evaluate(x);
  }
  throw UnknownSurface("unknown response surface '" + std::string(which) + "'");
}

OracleResult quadratic_box_oracle(const QuadraticForm& form, const Vector& lower,
                                  const Vector& upper) {
  if (lower.size() != form.linear.size() || upper.size() != lower.size())
    throw InvalidArgument("box and quadratic form differ in dimension");
  Extrema e;
  const int skipped =
      enumerate_faces(form, lower, upper, [&](const Vector& x) { e.offer(form.evaluate(x), x); });
  return to_result(e, skipped);
}

OracleResult quadratic_box_oracle(const QuadraticSurface& surface, const pso::SearchSpace& box) {
  const std::vector<int> vars = surface.active_variables();
  const QuadraticForm form = surface.form_over(vars);
  Vector lo(static_cast<Eigen::Index>(vars.size())), hi(lo.size());
  for (std::size_t i = 0; i < vars.size(); ++i) {
    lo(static_cast<Eigen::Index>(i)) = box.lower(vars[i]);
    hi(static_cast<Eigen::Index>(i)) = box.upper(vars[i]);
  }
  const Vector mid = 0.5 * (box.lower + box.upper);
  Extrema e;
  const int skipped = enumerate_faces(form, lo, hi, [&](const Vector& xa) {
    Vector x = mid;
    for (std::size_t i = 0; i < vars.size(); ++i) x(vars[i]) = xa(static_cast<Eigen::Index>(i));
    e.offer(surface.evaluate(x), x);
  });
  return to_result(e, skipped);
}

LinearSystemOracle linear_system_oracle(const pso::SearchSpace& box, int levels,
                                        int refine_rounds) {
  if (box.dim() != 6) throw InvalidArgument("the 2x2 system has six coefficients");
  if (levels < 2) throw InvalidArgument("levels must be >= 2");
  std::array<std::vector<double>, 6> grid;
  for (std::size_t k = 0; k < 6; ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    for (int j = 0; j < levels; ++j)
      grid[k].push_back(box.lower(kk) + (box.upper(kk) - box.lower(kk)) * j / (levels - 1.0));
  }

  // Running extrema as (value, grid index tuple).
  struct Best {
    double value;
    std::array<int, 6> at{};
  };
  constexpr double inf = std::numeric_limits<double>::infinity();
  Best x1_min{inf}, x1_max{-inf}, x2_min{inf}, x2_max{-inf};
  const auto& g = grid;
  for (int i0 = 0; i0 < levels; ++i0)
    for (int i1 = 0; i1 < levels; ++i1)
      for (int i2 = 0; i2 < levels; ++i2)
        for (int i3 = 0; i3 < levels; ++i3) {
          const double a11 = g[0][i0], a12 = g[1][i1], a21 = g[2][i2], a22 = g[3][i3];
          const double det = a11 * a22 - a12 * a21;
          if (std::abs(det) < 1e-12) continue;
          const double inv = 1.0 / det;
          for (int i4 = 0; i4 < levels; ++i4) {
            const double b1 = g[4][i4];
            for (int i5 = 0; i5 < levels; ++i5) {
              const double b2 = g[5][i5];
              const double x1 = (b1 * a22 - a12 * b2) * inv;
              const double x2 = (a11 * b2 - a21 * b1) * inv;
              if (x1 < x1_min.value) x1_min = {x1, {i0, i1, i2, i3, i4, i5}};
              if (x1 > x1_max.value) x1_max = {x1, {i0, i1, i2, i3, i4, i5}};
              if (x2 < x2_min.value) x2_min = {x2, {i0, i1, i2, i3, i4, i5}};
              if (x2 > x2_max.value) x2_max = {x2, {i0, i1, i2, i3, i4, i5}};
            }
          }
        }
  if (x1_min.value == inf) throw SingularMatrix("every grid point is singular");

  const Vector cell = (box.upper - box.lower) / (levels - 1.0);
  auto refine = [&](const Best& b, int component, double sign) {
    Vector x(6);
    for (std::size_t k = 0; k < 6; ++k) x(static_cast<Eigen::Index>(k)) = g[k][b.at[k]];
    auto f = [&](const Vector& v) {
      const double det = v(0) * v(3) - v(1) * v(2);
      if (std::abs(det) < 1e-12) return inf;
      const Solution2x2 s = solve_linear_2x2(v(0), v(1), v(2), v(3), v(4), v(5));
      return sign * (component == 0 ? s.x1 : s.x2);
    };
    double fx = f(x);
    coordinate_refine(f, x, fx, box.lower, box.upper, cell, levels, refine_rounds);
    return std::make_pair(sign * fx, x);
  };

  LinearSystemOracle out;
  std::tie(out.x1.y_min, out.x1.argmin) = refine(x1_min, 0, 1.0);
  std::tie(out.x1.y_max, out.x1.argmax) = refine(x1_max, 0, -1.0);
  std::tie(out.x2.y_min, out.x2.argmin) = refine(x2_min, 1, 1.0);
  std::tie(out.x2.y_max, out.x2.argmax) = refine(x2_max, 1, -1.0);
  return out;
}

LinearSystemOracle linear_system_oracle(int levels, int refine_rounds) {
  return linear_system_oracle(linear_system_problem().space(), levels, refine_rounds);
}

void write_oracle_csv(std::ostream& out, const std::vector<std::string>& variable_names,
                      const std::vector<std::pair<std::string, OracleResult>>& results) {
  std::vector<std::string> header{"response", "y_min", "y_max"};
  for (const auto& v : variable_names) header.push_back("argmin_" + v);
  for (const auto& v : variable_names) header.push_back("argmax_" + v);
  csv::write_row(out, header);
  for (const auto& [name, r] : results) {
    std::vector<std::string> row{name, csv::format_double(r.y_min), csv::format_double(r.y_max)};
    for (Eigen::Index k = 0; k < r.argmin.size(); ++k) row.push_back(csv::format_double(r.argmin(k)));
    for (Eigen::Index k = 0; k < r.argmax.size(); ++k) row.push_back(csv::format_double(r.argmax(k)));
    csv::write_row(out, row);
  }
}

void write_cloud_csv(std::ostream& out, const Eigen::MatrixX2d& cloud) {
  csv::write_row(out, {"x1", "x2"});
  for (Eigen::Index i = 0; i < cloud.rows(); ++i)
    csv::write_row(out, {csv::format_double(cloud(i, 0)), csv::format_double(cloud(i, 1))});
}

}  // namespace despso::cases
