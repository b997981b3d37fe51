#include <doctest.h>

#include <cmath>
#include <limits>

#include "transmod/hash.hpp"
#include "transmod/rng.hpp"
#include "transmod/text.hpp"

using namespace transmod;

TEST_SUITE("text") {

TEST_CASE("format_double round-trips exactly") {
  const double cases[] = {0.0,    -0.0,  1.0,       -1.5,        0.1,
                          1e-300, 1e300, 1.0 / 3.0, 2.569102324, -123456.789};
  for (double v : cases) {
    double back = 0.0;
    REQUIRE(parse_double(format_double(v), back));
    CHECK(back == v);
  }
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(std::numeric_limits<double>::quiet_NaN()) == "NA");
}

TEST_CASE("format_fixed pins decimal places") {
  CHECK(format_fixed(1.0, 2) == "1.00");
  CHECK(format_fixed(-0.918939, 6) == "-0.918939");
  CHECK(format_fixed(2.5, 0) == "2");  // round-half-even is fine either way
}

TEST_CASE("parse_double accepts strict numbers only") {
  double v = 0.0;
  CHECK(parse_double("42", v));
  CHECK(v == 42.0);
  CHECK(parse_double(" -1.5e3 ", v));
  CHECK(v == -1500.0);
  CHECK(parse_double("+7", v));
  CHECK_FALSE(parse_double("", v));
  CHECK_FALSE(parse_double("12x", v));
  CHECK_FALSE(parse_double("1 2", v));
}

TEST_CASE("parse_long") {
  long v = 0;
  CHECK(parse_long("123", v));
  CHECK(v == 123);
  CHECK(parse_long("-9", v));
  CHECK(v == -9);
  CHECK_FALSE(parse_long("1.5", v));
  CHECK_FALSE(parse_long("", v));
}

TEST_CASE("join") {
  CHECK(join({}, ",") == "");
  CHECK(join({"a"}, ",") == "a");
  CHECK(join({"a", "b", "c"}, ", ") == "a, b, c");
}

TEST_CASE("fnv1a64 oracle values") {
  CHECK(fnv1a64("", 0) == 0xCBF29CE484222325ULL);
  const char* s = "transmod\n";
  CHECK(fnv1a64(s, 9) == 0xF3A53A77EA346D0FULL);
  CHECK(to_hex(0xF3A53A77EA346D0FULL) == "f3a53a77ea346d0f");
  CHECK(to_hex(0) == "0000000000000000");
}

TEST_CASE("rng determinism and ranges") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  Rng r(1);
  for (int i = 0; i < 1000; ++i) {
    const double u = r.next_double();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    const double o = r.next_open();
    CHECK(o > 0.0);
    CHECK(o < 1.0);
    CHECK(r.bounded(7) < 7);
  }
}

TEST_CASE("rng shuffle is a permutation and sample_without_replacement distinct") {
  Rng r(9);
  std::vector<int> v{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  r.shuffle(v);
  std::vector<int> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 10; ++i) CHECK(sorted[static_cast<std::size_t>(i)] == i);

  auto s = r.sample_without_replacement(100, 30);
  CHECK(s.size() == 30);
  std::sort(s.begin(), s.end());
  CHECK(std::unique(s.begin(), s.end()) == s.end());
  CHECK(s.back() < 100);
}

TEST_CASE("mix_seed separates streams") {
  CHECK(mix_seed(1, 2, 3, 4) != mix_seed(1, 2, 3, 5));
  CHECK(mix_seed(1, 2, 3, 4) != mix_seed(1, 2, 4, 4));
  CHECK(mix_seed(1, 2, 3, 4) == mix_seed(1, 2, 3, 4));
}

}  // TEST_SUITE
