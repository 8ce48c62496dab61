#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "cuboid/region.hpp"

using namespace cuboid;

TEST_CASE("bounds at the branch seam")
{
	const auto b151 = q_bounds(151);
	CHECK(b151.q_low == 3);
	CHECK(b151.q_high == 8909);
	const auto b152 = q_bounds(152);
	CHECK(b152.q_low == 3);
	CHECK(b152.q_high == 8968);

	// both lower-bound formulas, evaluated exactly, differ by at most 1
	// across the seam
	for (uint64_t p : {151ull, 152ull}) {
		const uint64_t linear = (p + 58) / 59;
		const uint64_t cubic = q_lower_cubic(p);
		const uint64_t lo = linear < cubic ? linear : cubic;
		const uint64_t hi = linear < cubic ? cubic : linear;
		CHECK(hi - lo <= 1);
	}
}

TEST_CASE("cubic lower bound")
{
	CHECK(q_lower_cubic(9) == 1);
	CHECK(q_lower_cubic(72) == 2);
	CHECK(q_lower_cubic(73) == 3);
	CHECK(q_bounds(9000).q_low == 10); // (9000/9)^(1/3) = 10 exactly
	CHECK(q_lower_cubic(1) == 1);
	CHECK_THROWS_AS(q_lower_cubic(0), std::invalid_argument);
}

TEST_CASE("p = 0 is rejected")
{
	CHECK_THROWS_AS(q_bounds(0), std::invalid_argument);
}

TEST_CASE("small-p branch floors at q = 1")
{
	for (uint64_t p = 1; p <= 59; ++p) CHECK(q_bounds(p).q_low == 1);
	CHECK(q_bounds(60).q_low == 2);
	CHECK(q_bounds(118).q_low == 2);
	CHECK(q_bounds(119).q_low == 3);
}

TEST_CASE("pair count estimate")
{
	CHECK(pair_count_estimate(1) == 59);
	CHECK(pair_count_estimate(100) == 297950);
	CHECK(pair_count_estimate(154000) == mpz_class("699626543000"));
	CHECK_THROWS_AS(pair_count_estimate(0), std::invalid_argument);
}

TEST_CASE("32-bit p limit")
{
	CHECK(p_limit_32bit() == 72796055);
	CHECK(59ull * p_limit_32bit() < (uint64_t(1) << 32));
	CHECK(59ull * (p_limit_32bit() + 1) >= (uint64_t(1) << 32));
}

TEST_CASE("monotonicity of the bounds")
{
	uint64_t prev_high = 0, prev_low = 0;
	for (uint64_t p = 1; p <= 151; ++p) {
		const auto b = q_bounds(p);
		CHECK(b.q_high > prev_high);
		CHECK(b.q_low >= prev_low);
		CHECK(b.q_low <= b.q_high);
		prev_high = b.q_high;
		prev_low = b.q_low;
	}
	prev_low = 0;
	for (uint64_t p = 152; p <= 5000; ++p) {
		const auto b = q_bounds(p);
		CHECK(b.q_high == 59 * p);
		CHECK(b.q_low >= prev_low);
		prev_low = b.q_low;
	}
}

TEST_CASE("cubic bound exactness on random p")
{
	std::mt19937_64 rng(424242);
	for (int i = 0; i < 20000; ++i) {
		const uint64_t p = 152 + rng() % (1000000000ull - 152);
		const uint64_t q = q_bounds(p).q_low;
		const auto cube = [](uint64_t x) {
			return 9 * static_cast<unsigned __int128>(x) * x * x;
		};
		REQUIRE(cube(q) >= p);
		REQUIRE((q == 1 || cube(q - 1) < p));
	}
}
