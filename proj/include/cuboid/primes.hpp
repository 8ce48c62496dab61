#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace cuboid {

// Largest admissible table modulus. With r below this bound every product of
// two residues stays under 2^32 and a full set of r x r bit-tables fits in a
// 32-bit offset space.
inline constexpr uint32_t kModulusLimit = 9697;

inline bool is_prime_u32(uint32_t n)
{
	if (n < 2) return false;
	if (n % 2 == 0) return n == 2;
	for (uint32_t d = 3; d * d <= n; d += 2)
		if (n % d == 0) return false;
	return true;
}

// Primes in [lo, hi], ascending.
inline std::vector<uint32_t> primes_in_range(uint32_t lo, uint32_t hi)
{
	std::vector<uint32_t> out;
	for (uint32_t n = lo < 2 ? 2 : lo; n <= hi; ++n)
		if (is_prime_u32(n)) out.push_back(n);
	return out;
}

// Modular inverse for prime modulus, a in [1, r-1].
inline uint32_t mod_inverse(uint32_t a, uint32_t r)
{
	if (a == 0 || a >= r) throw std::invalid_argument("mod_inverse: a out of range");
	// extended Euclid on small values
	int64_t t = 0, new_t = 1;
	int64_t n = r, new_n = a;
	while (new_n != 0) {
		int64_t quot = n / new_n;
		int64_t tmp = t - quot * new_t; t = new_t; new_t = tmp;
		tmp = n - quot * new_n; n = new_n; new_n = tmp;
	}
	if (t < 0) t += r;
	return static_cast<uint32_t>(t);
}

} // namespace cuboid
