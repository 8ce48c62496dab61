#pragma once

// Exact and modular evaluation of the degree-10 cuboid polynomial
//
//   Q_pq(t) = t^10 + (2q^2+p^2)(3q^2-2p^2) t^8
//           + (q^8+10p^2q^6+4p^4q^4-14p^6q^2+p^8) t^6
//           - p^2q^2 (q^8-14p^2q^6+4p^4q^4+10p^6q^2+p^8) t^4
//           - p^6q^6 (q^2+2p^2)(3p^2-2q^2) t^2
//           - q^10 p^10.
//
// Q is even in t, so everything below works on the monic quintic in s = t^2.

#include <cstdint>
#include <stdexcept>

#include <gmpxx.h>

#include "cuboid/primes.hpp"

namespace cuboid {

struct SearchPair {
	uint64_t p = 0;
	uint64_t q = 0;
};

// Coefficients of Q_pq as a quintic in s = t^2, c5 leading (always 1).
struct ExactCoefficients {
	mpz_class c5, c4, c3, c2, c1, c0;
};

inline ExactCoefficients q_coefficients_exact(const SearchPair& pr)
{
	if (pr.p == 0 || pr.q == 0)
		throw std::invalid_argument("q_coefficients_exact: p and q must be positive");
	const mpz_class p = mpz_class(static_cast<unsigned long>(pr.p));
	const mpz_class q = mpz_class(static_cast<unsigned long>(pr.q));
	const mpz_class p2 = p * p, q2 = q * q;
	const mpz_class p4 = p2 * p2, q4 = q2 * q2;
	const mpz_class p6 = p4 * p2, q6 = q4 * q2;
	const mpz_class p8 = p4 * p4, q8 = q4 * q4;

	ExactCoefficients c;
	c.c5 = 1;
	c.c4 = (2 * q2 + p2) * (3 * q2 - 2 * p2);
	c.c3 = q8 + 10 * p2 * q6 + 4 * p4 * q4 - 14 * p6 * q2 + p8;
	c.c2 = -(p2 * q2 * (q8 - 14 * p2 * q6 + 4 * p4 * q4 + 10 * p6 * q2 + p8));
	c.c1 = -(p6 * q6 * (q2 + 2 * p2) * (3 * p2 - 2 * q2));
	c.c0 = -(p8 * p2 * q8 * q2);
	return c;
}

inline mpz_class eval_q_exact(const ExactCoefficients& c, const mpz_class& t)
{
	const mpz_class s = t * t;
	mpz_class v = c.c5;
	v = v * s + c.c4;
	v = v * s + c.c3;
	v = v * s + c.c2;
	v = v * s + c.c1;
	v = v * s + c.c0;
	return v;
}

inline mpz_class eval_q_exact(const SearchPair& pr, const mpz_class& t)
{
	if (t < 0) throw std::invalid_argument("eval_q_exact: t must be non-negative");
	return eval_q_exact(q_coefficients_exact(pr), t);
}

struct ResidueTriple {
	uint32_t p = 0; // p mod r
	uint32_t q = 0; // q mod r
	uint32_t t = 0; // t mod r
	uint32_t r = 0; // prime modulus, 2 <= r < kModulusLimit
};

namespace detail {

// Coefficients of the quintic in s reduced mod r, canonical range [0, r-1].
// All intermediates stay below r^2 < 2^27, well inside 32-bit range.
struct ModCoeffs {
	uint32_t c4, c3, c2, c1, c0;
};

inline ModCoeffs mod_coeffs(uint32_t p, uint32_t q, uint32_t r)
{
	const uint32_t p2 = p * p % r, q2 = q * q % r;
	const uint32_t p4 = p2 * p2 % r, q4 = q2 * q2 % r;
	const uint32_t p6 = p4 * p2 % r, q6 = q4 * q2 % r;
	const uint32_t p8 = p4 * p4 % r, q8 = q4 * q4 % r;

	ModCoeffs c;
	// (2q^2+p^2)(3q^2-2p^2): the subtrahend 2p^2 is < 2r, so add 2r before reducing
	c.c4 = (2 * q2 + p2) % r * ((3 * q2 + 2 * r - 2 * p2) % r) % r;
	// q^8+10p^2q^6+4p^4q^4-14p^6q^2+p^8; each product term is < r, factors of
	// 10/4/14 keep sums under 16r^2
	c.c3 = (q8 + 10 * (p2 * q6 % r) + 4 * (p4 * q4 % r) + 14 * (r - p6 * q2 % r) + p8) % r;
	// -p^2q^2 (q^8-14p^2q^6+4p^4q^4+10p^6q^2+p^8)
	{
		uint32_t inner = (q8 + 14 * (r - p2 * q6 % r) + 4 * (p4 * q4 % r)
		                  + 10 * (p6 * q2 % r) + p8) % r;
		c.c2 = (r - p2 * q2 % r * inner % r) % r;
	}
	// -p^6q^6 (q^2+2p^2)(3p^2-2q^2)
	{
		uint32_t f1 = (q2 + 2 * p2) % r;
		uint32_t f2 = (3 * p2 + 2 * r - 2 * q2) % r;
		c.c1 = (r - p6 * q6 % r * f1 % r * f2 % r) % r;
	}
	// -q^10 p^10
	c.c0 = (r - (p8 * p2 % r) * (q8 * q2 % r) % r) % r;
	return c;
}

inline uint32_t horner_mod(const ModCoeffs& c, uint32_t t, uint32_t r)
{
	const uint32_t s = t * t % r;
	uint32_t v = (s + c.c4) % r;
	v = (v * s + c.c3) % r;
	v = (v * s + c.c2) % r;
	v = (v * s + c.c1) % r;
	v = (v * s + c.c0) % r;
	return v;
}

} // namespace detail

// Q_pq(t) mod r in canonical range [0, r-1].
inline uint32_t eval_q_mod(const ResidueTriple& rt)
{
	if (rt.r < 2 || rt.r >= kModulusLimit || !is_prime_u32(rt.r))
		throw std::invalid_argument("eval_q_mod: modulus must be a prime below 9697");
	if (rt.p >= rt.r || rt.q >= rt.r || rt.t >= rt.r)
		throw std::invalid_argument("eval_q_mod: residues must lie in [0, r-1]");
	return detail::horner_mod(detail::mod_coeffs(rt.p, rt.q, rt.r), rt.t, rt.r);
}

} // namespace cuboid
