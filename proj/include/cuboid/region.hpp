#pragma once

// Integer arithmetic for the search region
//
//   min(cbrt(p/9), p/59) <= q <= 59 p
//
// with the lower bound split at p = 152: below it q_low = ceil(p/59), from it
// on q_low is the least q with 9 q^3 >= p. All arithmetic is exact; an
// off-by-one at a boundary would silently shrink the search region.

#include <cstdint>
#include <stdexcept>

#include <gmpxx.h>

namespace cuboid {

struct RegionBounds {
	uint64_t p = 0;
	uint64_t q_low = 0;  // inclusive
	uint64_t q_high = 0; // inclusive
};

// Least q >= 1 with 9 q^3 >= p, by binary search on the cube.
inline uint64_t q_lower_cubic(uint64_t p)
{
	if (p == 0) throw std::invalid_argument("q_lower_cubic: p must be positive");
	uint64_t lo = 1, hi = 1;
	auto nine_cubed_ge = [p](uint64_t q) {
		unsigned __int128 c = static_cast<unsigned __int128>(q) * q * q;
		return 9 * c >= p;
	};
	while (!nine_cubed_ge(hi)) hi *= 2;
	while (lo < hi) {
		uint64_t mid = lo + (hi - lo) / 2;
		if (nine_cubed_ge(mid)) hi = mid; else lo = mid + 1;
	}
	return lo;
}

inline constexpr uint64_t kRegionCrossover = 152;

// Largest p for which q_high = 59p stays below 2^32 (the historical default).
inline constexpr uint64_t p_limit_32bit() { return (uint64_t(1) << 32) / 59; }

// Largest p for which 59p still fits in 64 bits.
inline constexpr uint64_t p_limit_64bit() { return UINT64_MAX / 59; }

inline RegionBounds q_bounds(uint64_t p)
{
	if (p == 0) throw std::invalid_argument("q_bounds: p must be positive");
	if (p > p_limit_64bit()) throw std::overflow_error("q_bounds: 59p exceeds 64 bits");
	RegionBounds b;
	b.p = p;
	b.q_high = 59 * p;
	if (p < kRegionCrossover) {
		uint64_t ceil_div = (p + 58) / 59;
		b.q_low = ceil_div < 1 ? 1 : ceil_div;
	} else {
		b.q_low = q_lower_cubic(p);
	}
	return b;
}

// Sum_{p=1}^{p_max} 59 p = 59 p_max (p_max+1) / 2, exactly.
inline mpz_class pair_count_estimate(uint64_t p_max)
{
	if (p_max == 0) throw std::invalid_argument("pair_count_estimate: p_max must be positive");
	mpz_class n(static_cast<unsigned long>(p_max));
	return 59 * n * (n + 1) / 2;
}

} // namespace cuboid
