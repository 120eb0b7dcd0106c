#include <doctest.h>

#include <algorithm>
#include <set>

#include "mlvsbm/rng.hpp"

using mlvsbm::Rng;

TEST_CASE("same seed reproduces the stream") {
  Rng a(123), b(123);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("uniform stays in [0,1)") {
  Rng r(7);
  for (int i = 0; i < 1000; ++i) {
    const double u = r.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("split is a pure function of seed and stream id") {
  Rng a(42);
  a.next_u64();
  a.next_u64();
  Rng b(42);
  CHECK(a.split(5).next_u64() == b.split(5).next_u64());
  CHECK(a.split(5).next_u64() != a.split(6).next_u64());
}

TEST_CASE("permutation visits every element once") {
  Rng r(9);
  const auto p = r.permutation(50);
  std::set<int> seen(p.begin(), p.end());
  CHECK(seen.size() == 50);
  CHECK(*seen.begin() == 0);
  CHECK(*seen.rbegin() == 49);
}

TEST_CASE("categorical follows the weights roughly") {
  Rng r(1);
  Eigen::VectorXd w(3);
  w << 0.7, 0.2, 0.1;
  int counts[3] = {0, 0, 0};
  for (int i = 0; i < 20000; ++i) ++counts[r.categorical(w)];
  CHECK(counts[0] > 13000);
  CHECK(counts[2] < 3000);
}

TEST_CASE("uniform_below covers the range") {
  Rng r(3);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 500; ++i) seen.insert(r.uniform_below(7));
  CHECK(seen.size() == 7);
  CHECK(*seen.rbegin() == 6);
}
