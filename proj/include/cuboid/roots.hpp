#pragma once

// Exact integer root finding for integer polynomials, used to verify sieve
// survivors. Real roots are located by Sturm-chain counts with all-integer
// arithmetic; bisection keeps integer endpoints, so an integer root is always
// detected by an exact zero evaluation and a root strictly between two
// consecutive integers can be discarded without further refinement.

#include <algorithm>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <vector>

#include <gmpxx.h>

namespace cuboid {

// coeff[i] multiplies x^i; leading coefficient nonzero.
using Poly = std::vector<mpz_class>;

inline int poly_degree(const Poly& f) { return static_cast<int>(f.size()) - 1; }

inline void poly_trim(Poly& f)
{
	while (!f.empty() && f.back() == 0) f.pop_back();
}

inline mpz_class poly_eval(const Poly& f, const mpz_class& x)
{
	mpz_class v = 0;
	for (size_t i = f.size(); i-- > 0;) v = v * x + f[i];
	return v;
}

inline Poly poly_derivative(const Poly& f)
{
	Poly d;
	for (size_t i = 1; i < f.size(); ++i) d.push_back(mpz_class(static_cast<long>(i)) * f[i]);
	poly_trim(d);
	return d;
}

// Divide out the content, keeping signs.
inline void poly_make_primitive(Poly& f)
{
	mpz_class g = 0;
	for (const auto& c : f) mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), c.get_mpz_t());
	if (g > 1)
		for (auto& c : f) mpz_divexact(c.get_mpz_t(), c.get_mpz_t(), g.get_mpz_t());
}

// Sturm chain with integer pseudo-remainders. Each step computes
// lc(g)^k * f mod g and orients the result so it is a positive multiple of
// -(f mod g); contents are stripped to limit coefficient growth. The chain
// ends at (a multiple of) gcd(f, f'), which makes the sign-change counts
// valid for non-square-free input as well.
inline std::vector<Poly> sturm_chain(const Poly& f)
{
	std::vector<Poly> chain;
	Poly p0 = f;
	poly_trim(p0);
	if (p0.empty()) throw std::invalid_argument("sturm_chain: zero polynomial");
	poly_make_primitive(p0);
	chain.push_back(p0);
	Poly p1 = poly_derivative(p0);
	if (p1.empty()) return chain;
	poly_make_primitive(p1);
	chain.push_back(p1);

	while (true) {
		const Poly& a = chain[chain.size() - 2];
		const Poly& b = chain.back();
		Poly r = a;
		const mpz_class& lcb = b.back();
		bool negate_back = true; // multiplier sign so far is +1
		while (poly_degree(r) >= poly_degree(b) && !r.empty()) {
			const int shift = poly_degree(r) - poly_degree(b);
			const mpz_class lcr = r.back();
			for (auto& c : r) c *= lcb;
			for (size_t i = 0; i < b.size(); ++i)
				r[i + shift] -= lcr * b[i];
			poly_trim(r);
			if (lcb < 0) negate_back = !negate_back;
		}
		if (r.empty()) break;
		if (negate_back)
			for (auto& c : r) c = -c;
		poly_make_primitive(r);
		chain.push_back(std::move(r));
		if (poly_degree(chain.back()) == 0) break;
	}
	return chain;
}

inline int sign_changes_at(const std::vector<Poly>& chain, const mpz_class& x)
{
	int changes = 0, prev = 0;
	for (const Poly& f : chain) {
		const int s = sgn(poly_eval(f, x));
		if (s == 0) continue;
		if (prev != 0 && s != prev) ++changes;
		prev = s;
	}
	return changes;
}

// Number of distinct real roots in (a, b]; requires f(a) != 0 and f(b) != 0.
inline int count_real_roots_in(const std::vector<Poly>& chain, const mpz_class& a,
                               const mpz_class& b)
{
	if (a >= b) return 0;
	return sign_changes_at(chain, a) - sign_changes_at(chain, b);
}

// Fujiwara-style bound: every real root has |x| <= 2 max_k |c_{n-k}/c_n|^{1/k}.
inline mpz_class root_magnitude_bound(const Poly& f)
{
	const int n = poly_degree(f);
	mpz_class lead = abs(f.back());
	mpz_class best = 1;
	for (int k = 1; k <= n; ++k) {
		mpz_class m = abs(f[n - k]);
		if (m == 0) continue;
		// ceil((m / lead)^{1/k}) <= ceil(m^{1/k}) for monic-or-larger lead
		mpz_class q = m / lead + 1;
		mpz_class root;
		mpz_root(root.get_mpz_t(), q.get_mpz_t(), static_cast<unsigned long>(k));
		root += 1;
		if (root > best) best = root;
	}
	return 2 * best + 1;
}

namespace detail {

class RootIsolator {
public:
	explicit RootIsolator(const Poly& f) : f_(f), chain_(sturm_chain(f)) {}

	// Integer roots in (a, b]; requires f(a) != 0 and f(b) != 0.
	void isolate(const mpz_class& a, const mpz_class& b, std::vector<mpz_class>& out)
	{
		if (b <= a) return;
		const int k = changes(a) - changes(b);
		if (k <= 0) return;
		if (b - a == 1) return; // roots strictly inside a unit interval are not integers
		mpz_class m = (a + b) / 2;
		if (poly_eval(f_, m) == 0) {
			out.push_back(m);
			// walk past any run of consecutive integer roots
			mpz_class lo = m - 1;
			while (lo > a && poly_eval(f_, lo) == 0) { out.push_back(lo); lo -= 1; }
			mpz_class hi = m + 1;
			while (hi < b && poly_eval(f_, hi) == 0) { out.push_back(hi); hi += 1; }
			if (lo > a) isolate(a, lo, out);
			if (hi < b) isolate(hi, b, out);
		} else {
			isolate(a, m, out);
			isolate(m, b, out);
		}
	}

private:
	int changes(const mpz_class& x)
	{
		auto it = cache_.find(x);
		if (it != cache_.end()) return it->second;
		const int v = sign_changes_at(chain_, x);
		cache_.emplace(x, v);
		return v;
	}

	const Poly& f_;
	std::vector<Poly> chain_;
	std::map<mpz_class, int> cache_;
};

} // namespace detail

// All distinct integer roots of f in (a, b], ascending.
inline std::vector<mpz_class> integer_roots_in(const Poly& f, mpz_class a, mpz_class b)
{
	Poly g = f;
	poly_trim(g);
	if (g.empty()) throw std::invalid_argument("integer_roots_in: zero polynomial");
	std::vector<mpz_class> out;
	const mpz_class orig_a = a;
	while (poly_eval(g, b) == 0) {
		if (b > a) out.push_back(b);
		b -= 1;
	}
	while (a < b && poly_eval(g, a) == 0) a -= 1; // left endpoint is exclusive anyway
	if (a < b) {
		detail::RootIsolator iso(g);
		iso.isolate(a, b, out);
	}
	std::erase_if(out, [&](const mpz_class& x) { return x <= orig_a; });
	std::sort(out.begin(), out.end());
	return out;
}

// All positive integer roots of f, ascending.
inline std::vector<mpz_class> positive_integer_roots(const Poly& f)
{
	Poly g = f;
	poly_trim(g);
	if (g.empty()) throw std::invalid_argument("positive_integer_roots: zero polynomial");
	return integer_roots_in(g, 0, root_magnitude_bound(g));
}

} // namespace cuboid
