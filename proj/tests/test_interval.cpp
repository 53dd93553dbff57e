#include <doctest.h>

#include <cmath>
#include <sstream>

#include "despso/cases.hpp"
#include "despso/csv.hpp"
#include "despso/error.hpp"
#include "despso/interval.hpp"

using namespace despso;
using namespace despso::interval;

namespace {

IntervalProblem scalar(double lo, double hi, std::function<double(const Vector&)> fn) {
  return IntervalProblem({{"x", lo, hi}}, {{"f", std::move(fn)}});
}

pso::PsoConfig small(int n, int g) {
  pso::PsoConfig c;
  c.pop_size = n;
  c.max_iters = g;
  return c;
}

des::DesConfig quick_des() {
  des::DesConfig c;
  c.max_steps = 2000;
  return c;
}

}  // namespace

TEST_CASE("problem construction") {
  CHECK_THROWS_AS(IntervalProblem({}, {{"f", [](const Vector&) { return 0.0; }}}),
                  InvalidArgument);
  CHECK_THROWS_AS(IntervalProblem({{"x", 0, 1}}, {}), InvalidArgument);
  CHECK_THROWS_AS(IntervalProblem({{"x", 1, 1}}, {{"f", [](const Vector&) { return 0.0; }}}),
                  InvalidArgument);
  CHECK_THROWS_AS(IntervalProblem({{"x", 0, 1}}, {{"f", nullptr}}), InvalidArgument);

  const IntervalProblem p({{"a", -1, 3}, {"b", 2, 4}},
                          {{"sum", [](const Vector& x) { return x.sum(); }},
                           {"prod", [](const Vector& x) { return x.prod(); }}});
  CHECK(p.dim() == 2);
  CHECK(p.midpoint() == Vector{{1.0, 3.0}});
  CHECK(p.response_index("prod") == 1);
  CHECK_THROWS_AS(p.response_index("nope"), InvalidArgument);
  CHECK(p.evaluate(1, p.midpoint()) == 3.0);
  CHECK(p.space().upper == Vector{{3.0, 4.0}});
}

TEST_CASE("bounds of simple responses") {
  pso::LdsCache cache(quick_des());
  for (pso::Mode mode : {pso::Mode::kRandom, pso::Mode::kDes}) {
    CAPTURE(pso::mode_name(mode));
    const auto id = bounds(scalar(-2, 7, [](const Vector& x) { return x(0); }), 0,
                           small(20, 200), mode, 1, &cache);
    CHECK(id.y_min == doctest::Approx(-2.0).epsilon(1e-9));
    CHECK(id.y_max == doctest::Approx(7.0).epsilon(1e-9));

    const auto sq = bounds(scalar(-1, 2, [](const Vector& x) { return x(0) * x(0); }), 0,
                           small(20, 200), mode, 1, &cache);
    CHECK(std::abs(sq.y_min) < 1e-6);
    CHECK(sq.y_max == doctest::Approx(4.0).epsilon(1e-9));
    CHECK(sq.response == "f");
    // Reports store the negated objective for the max run.
    CHECK(sq.max_report.history.back().gbest_value == -sq.y_max);
  }
}

TEST_CASE("min and max runs use distinct seeds") {
  // On a symmetric objective the two searches would otherwise mirror each other.
  const auto p = scalar(-1, 1, [](const Vector& x) { return x(0); });
  const auto r = bounds(p, 0, small(6, 3), pso::Mode::kRandom, 8);
  std::vector<double> lo, hi;
  for (const auto& e : r.min_report.history) lo.push_back(e.gbest_value);
  for (const auto& e : r.max_report.history) hi.push_back(e.gbest_value);
  CHECK(lo != hi);
}

TEST_CASE("bound results are consistent with the box") {
  const auto sys = cases::linear_system_problem();
  pso::LdsCache cache(quick_des());
  for (std::size_t resp = 0; resp < 2; ++resp) {
    const auto r = bounds(sys, resp, small(20, 150), pso::Mode::kDes, 3, &cache);
    const double mid = sys.evaluate(resp, sys.midpoint());
    CHECK(r.y_min <= mid);
    CHECK(mid <= r.y_max);
    CHECK(sys.evaluate(resp, r.argmin) == doctest::Approx(r.y_min).epsilon(1e-10));
    CHECK(sys.evaluate(resp, r.argmax) == doctest::Approx(r.y_max).epsilon(1e-10));
    const auto s = sys.space();
    CHECK((r.argmin.array() >= s.lower.array()).all());
    CHECK((r.argmin.array() <= s.upper.array()).all());
    CHECK((r.argmax.array() >= s.lower.array()).all());
    CHECK((r.argmax.array() <= s.upper.array()).all());
  }
}

TEST_CASE("x1 of the linear interval system") {
  pso::LdsCache cache;
  const auto r = bounds(cases::linear_system_problem(), 0, pso::PsoConfig{}, pso::Mode::kDes, 1,
                        &cache);
  CHECK(std::abs(r.y_min + 16.0 / 3.0) < 1e-3);
  CHECK(std::abs(r.y_max - 16.0 / 3.0) < 1e-3);
}

TEST_CASE("speedup formula") {
  CHECK(speedup_percent(100, 100) == 0.0);
  CHECK(speedup_percent(3371, 2452) == doctest::Approx(37.479608482871125));
  CHECK(speedup_percent(50, 100) == -50.0);
  CHECK_THROWS_AS(speedup_percent(10, 0), InvalidArgument);
}

TEST_CASE("median of step counts") {
  CHECK(median_steps({}) == std::nullopt);
  CHECK(median_steps({30L, 10L, 20L}) == 20.0);
  CHECK(median_steps({30L, 10L, 20L, 40L}) == 25.0);
  // Unreached runs sort last.
  CHECK(median_steps({std::nullopt, 10L, 20L}) == 20.0);
  CHECK(median_steps({std::nullopt, 10L, std::nullopt}) == std::nullopt);
  CHECK(median_steps({std::nullopt, 10L}) == std::nullopt);
}

TEST_CASE("compare_modes") {
  const auto p = scalar(-2, 7, [](const Vector& x) { return x(0) * x(0); });
  pso::LdsCache cache(quick_des());
  const std::vector<std::uint64_t> seeds{1, 2, 3};

  const SpeedupRow row = compare_modes(p, 0, small(10, 60), {0.0, 49.0}, 1e-3, seeds, cache);
  REQUIRE(row.runs.size() == 6);
  CHECK(row.response == "f");
  CHECK(row.runs[0].seed == 1);
  CHECK(row.runs[0].bound == Bound::kLower);
  CHECK(row.runs[1].bound == Bound::kUpper);
  CHECK(row.runs[5].seed == 3);
  for (const auto& r : row.runs) {
    REQUIRE(r.des_steps);
    REQUIRE(r.hclpso_steps);
    REQUIRE(r.speedup_pct);
    CHECK(*r.speedup_pct ==
          doctest::Approx(speedup_percent(double(*r.hclpso_steps), double(*r.des_steps))));
    CHECK(*r.des_steps % 10 == 0);
  }
  CHECK(row.lower.excluded == 0);
  CHECK(row.lower.median_speedup_pct);

  SUBCASE("threads do not change the result") {
    const SpeedupRow par = compare_modes(p, 0, small(10, 60), {0.0, 49.0}, 1e-3, seeds, cache, 3);
    for (std::size_t i = 0; i < row.runs.size(); ++i) {
      CHECK(par.runs[i].des_steps == row.runs[i].des_steps);
      CHECK(par.runs[i].hclpso_steps == row.runs[i].hclpso_steps);
    }
  }

  SUBCASE("an unreachable target excludes the seed") {
    const SpeedupRow bad = compare_modes(p, 0, small(10, 5), {-1.0, 49.0}, 1e-3, seeds, cache);
    CHECK(bad.lower.excluded == 3);
    CHECK(!bad.lower.median_speedup_pct);
    CHECK(!bad.lower.median_des_steps);
    for (const auto& r : bad.runs)
      if (r.bound == Bound::kLower) CHECK(!r.des_steps);
  }

  CHECK_THROWS_AS(compare_modes(p, 0, small(10, 5), {0, 49}, 0.0, seeds, cache), InvalidArgument);
}

TEST_CASE("speedup CSV") {
  SpeedupRow row;
  row.response = "x1";
  row.runs = {{4, Bound::kLower, 120L, 150L, 25.0}, {4, Bound::kUpper, std::nullopt, 90L, {}}};
  std::ostringstream out;
  write_speedup_csv(out, {row});
  std::istringstream in(out.str());
  const csv::Table t = csv::read_table(in);
  CHECK(t.header == std::vector<std::string>{"response", "bound", "seed", "des_pso_steps",
                                              "hclpso_steps", "speedup_pct"});
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0] == std::vector<std::string>{"x1", "lower", "4", "120", "150", "25"});
  CHECK(t.rows[1] == std::vector<std::string>{"x1", "upper", "4", "NA", "90", "NA"});
}
