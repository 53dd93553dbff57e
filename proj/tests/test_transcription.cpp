// Smartwatch response surfaces written out by hand, one coefficient per term,
// as an independent transcription to check the built-in tables against.
//
// Two original entries carry a sign that cannot reproduce the reference
// bounds: the P2*P3 term of sigma2_N and the P3^2 term of sigma3_N. The
// original signs are kept below; the corrected table flips exactly those two.

#include <doctest.h>

#include <cmath>

#include "despso/cases.hpp"
#include "despso/random.hpp"

using namespace despso;
using namespace despso::cases;

namespace {

struct In {
  double X1, X2, X3, X4, X5, P1, P2, P3, P4, P5;
};

In unpack(const Vector& v) {
  return {v(kX1), v(kX2), v(kX3), v(kX4), v(kX5), v(kP1), v(kP2), v(kP3), v(kP4), v(kP5)};
}

double sigma1(const In& x) {
  return (0.001848 * x.P2 * x.P2 - 0.3688 * x.P2 * x.P3 + 973.18 * x.P2 + 1.609 * x.P3 * x.P3) *
             1e-6 -
         30.19 * x.X1 * x.X1 + 1.133 * x.X1 * x.X3 + 33.10 * x.X1 * x.X4 + 1.313 * x.X1 * x.X5 +
         0.4128 * x.X3 * x.X3 - 3.7317 * x.X3 * x.X4 - 0.26871 * x.X3 * x.X5 -
         56.55 * x.X4 * x.X4 + 65.54 * x.X4 * x.X5 - 55.32 * x.X5 * x.X5 + 129.86;
}

double sigma2(const In& x, double p2p3) {
  return (-0.03509 * x.P2 * x.P2 + p2p3 * x.P2 * x.P3 + 1277 * x.P2 - 1.461 * x.P3 * x.P3) *
             1e-6 -
         35.80 * x.X1 * x.X1 + 6.112 * x.X1 * x.X3 + 32.86 * x.X1 * x.X4 + 2.891 * x.X1 * x.X5 -
         6.809 * x.X3 * x.X3 + 4.303 * x.X3 * x.X4 + 9.209 * x.X3 * x.X5 -
         63.71 * x.X4 * x.X4 + 67.43 * x.X4 * x.X5 - 64.37 * x.X5 * x.X5 + 135.2;
}

double sigma3(const In& x, double p3sq) {
  return (0.03054 * x.P2 * x.P2 - 0.95 * x.P2 * x.P3 + 802.6 * x.P2 + p3sq * x.P3 * x.P3) * 1e-6 -
         28.19 * x.X1 * x.X1 + 4.188 * x.X1 * x.X3 + 28.63 * x.X1 * x.X4 + 0.2030 * x.X1 * x.X5 +
         9.152 * x.X3 * x.X3 - 16.12 * x.X3 * x.X4 - 15.75 * x.X3 * x.X5 -
         42.17 * x.X4 * x.X4 + 62.61 * x.X4 * x.X5 - 36.32 * x.X5 * x.X5 + 119.5;
}

double sigma_h(const In& x) {
  return 0.0000002578 * x.P1 * x.P1 - 0.00002501 * x.P1 * x.X2 - 0.9103 * x.X1 * x.X1 +
         0.02502 * x.X1 * x.X2 + 0.6950 * x.X1 * x.X3 + 0.1007 * x.X2 * x.X2 +
         0.0125 * x.X2 * x.X3 - 2.372 * x.X3 * x.X3 + 37.54;
}

double t1(const In& x) {
  return 0.5473 * x.X1 * x.X1 - 2.932 * x.X1 * x.X2 - 0.3207 * x.X1 * x.X3 +
         5.589 * x.X2 * x.X2 - 2.970 * x.X2 * x.X3 - 1.206 * x.X3 * x.X3 + 71.85 * x.P4 +
         72.81 * x.P5 + 299.3 * x.P4 * x.P5 + 62.05;
}

double t2(const In& x) {
  return 0.5448 * x.X1 * x.X1 - 2.923 * x.X1 * x.X2 - 0.3219 * x.X1 * x.X3 +
         5.569 * x.X2 * x.X2 - 2.973 * x.X2 * x.X3 - 1.204 * x.X3 * x.X3 + 61.10 * x.P4 +
         96.78 * x.P5 + 255.2 * x.P4 * x.P5 + 61.11;
}

// Inside the box and well outside it, so every coefficient is exercised.
std::vector<Vector> probe_points() {
  const auto vars = smartwatch_variables();
  Rng rng(2024);
  std::vector<Vector> pts;
  for (int s = 0; s < 40; ++s) {
    Vector v(kSmartwatchVars);
    const double stretch = s < 20 ? 1.0 : 3.0;
    for (int k = 0; k < kSmartwatchVars; ++k) {
      const auto& iv = vars[static_cast<std::size_t>(k)];
      const double mid = 0.5 * (iv.lower + iv.upper), half = 0.5 * (iv.upper - iv.lower);
      v(k) = mid + stretch * half * (2.0 * rng.uniform() - 1.0);
    }
    pts.push_back(v);
  }
  return pts;
}

void check_table(SmartwatchTable table, double s2_p2p3, double s3_p3sq) {
  const auto& surf = smartwatch_surfaces(table);
  REQUIRE(surf.size() == 6);
  for (const Vector& v : probe_points()) {
    const In x = unpack(v);
    const double want[6] = {sigma1(x), sigma2(x, s2_p2p3), sigma3(x, s3_p3sq),
                            sigma_h(x), t1(x),           t2(x)};
    for (int i = 0; i < 6; ++i) {
      CAPTURE(surf[static_cast<std::size_t>(i)].name());
      CHECK(surf[static_cast<std::size_t>(i)].evaluate(v) ==
            doctest::Approx(want[i]).epsilon(1e-13));
    }
  }
}

}  // namespace

TEST_CASE("printed table, term for term") { check_table(SmartwatchTable::kPrinted, 0.1813, 4.645); }

TEST_CASE("corrected table differs only in the two repaired signs") {
  check_table(SmartwatchTable::kSignCorrected, -0.1813, -4.645);
}

TEST_CASE("term counts") {
  // 4 P-block terms + 10 X terms + constant for the normal stresses.
  const int expected[6] = {15, 15, 15, 9, 10, 10};
  const auto& surf = smartwatch_surfaces();
  for (int i = 0; i < 6; ++i)
    CHECK(surf[static_cast<std::size_t>(i)].terms().size() == static_cast<std::size_t>(expected[i]));
}

TEST_CASE("variable ranges") {
  const auto v = smartwatch_variables();
  REQUIRE(v.size() == 10);
  const char* names[] = {"X1", "X2", "X3", "X4", "X5", "P1", "P2", "P3", "P4", "P5"};
  const double lo[] = {0.91, 0.91, 0.91, 0.91, 0.91, 10400, 22600, 2380, 0.09, 0.09};
  const double hi[] = {1.09, 1.09, 1.09, 1.09, 1.09, 11600, 23400, 2580, 0.21, 0.21};
  for (std::size_t k = 0; k < 10; ++k) {
    CHECK(v[k].name == names[k]);
    CHECK(v[k].lower == lo[k]);
    CHECK(v[k].upper == hi[k]);
  }
}
