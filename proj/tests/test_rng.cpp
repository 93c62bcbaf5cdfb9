#include <doctest.h>

#include <cmath>
#include <set>

#include "adaptrt/rng.hpp"

using adaptrt::Rng;

TEST_CASE("same seed gives identical streams") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
}

TEST_CASE("split streams are reproducible and do not disturb the parent") {
  Rng parent(7);
  const std::uint64_t before = Rng(7).next();
  Rng s1 = parent.split(3, 5);
  Rng s2 = parent.split(3, 5);
  CHECK(s1.next() == s2.next());
  CHECK(parent.next() == before);
  Rng other = parent.split(3, 6);
  CHECK(Rng(7).split(3, 5).next() != other.next());
}

TEST_CASE("uniform stays in [0,1) and uniform_int covers its range") {
  Rng rng(1);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 2000; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    seen.insert(rng.uniform_int(5));
  }
  CHECK(seen.size() == 5);
}

TEST_CASE("normal moments are sane") {
  Rng rng(11);
  double sum = 0.0, sq = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    sum += x;
    sq += x * x;
  }
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  CHECK(std::abs(mean) < 0.03);
  CHECK(std::abs(var - 1.0) < 0.05);
}

TEST_CASE("categorical respects weights") {
  Rng rng(5);
  std::vector<double> w{1.0, 3.0};
  int ones = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) ones += rng.categorical(w, 4.0) == 1 ? 1 : 0;
  CHECK(std::abs(ones / static_cast<double>(n) - 0.75) < 0.02);
}
