#include <cmath>
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "trialsim/rng.hpp"

using trialsim::RngStream;

TEST_CASE("equal stream addresses reproduce identical sequences") {
  RngStream a(42, 7);
  RngStream b(42, 7);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("distinct stream indices give different sequences") {
  RngStream a(42, 7);
  RngStream b(42, 8);
  int same = 0;
  for (int i = 0; i < 256; ++i) {
    if (a.next_u64() == b.next_u64()) ++same;
  }
  CHECK(same == 0);
}

TEST_CASE("substreams are distinct from the base stream") {
  RngStream base(42, 7);
  RngStream child = base.child(1);
  RngStream base2(42, 7);
  int same = 0;
  for (int i = 0; i < 256; ++i) {
    if (base2.next_u64() == child.next_u64()) ++same;
  }
  CHECK(same == 0);
  // and reproducible themselves
  RngStream child2 = RngStream(42, 7).child(1);
  RngStream child3 = RngStream(42, 7).child(1);
  for (int i = 0; i < 100; ++i) CHECK(child2.next_u64() == child3.next_u64());
}

TEST_CASE("uniform doubles have the right range and moments") {
  RngStream rng(123, 0);
  const int n = 200000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.next_double();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    sum += u;
    sum2 += u * u;
  }
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  CHECK(mean == doctest::Approx(0.5).epsilon(0.01));
  CHECK(var == doctest::Approx(1.0 / 12.0).epsilon(0.02));
}

TEST_CASE("open-interval uniforms never hit zero or one") {
  RngStream rng(9, 3);
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.next_open();
    CHECK(u > 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("lagged self-correlation of one stream is negligible") {
  RngStream rng(2024, 5);
  const int n = 100000;
  std::vector<double> u(n);
  for (auto& v : u) v = rng.next_double() - 0.5;
  double corr = 0.0;
  for (int i = 0; i + 1 < n; ++i) corr += u[i] * u[i + 1];
  corr /= (n - 1) * (1.0 / 12.0);
  CHECK(std::fabs(corr) < 0.02);
}
