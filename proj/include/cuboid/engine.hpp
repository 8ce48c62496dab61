#pragma once

// The resumable (p,q) search: region iteration, sieve filtering, exact
// survivor verification, statistics, checkpointing, and the start/stop/status
// controller. Status codes follow the historical convention:
//
//   0 started/ok        1 already running (stop/release: not running)
//   2 p below 152       3 p above the configured limit
//   4 q below q_low     5 q above q_high
//   6 tables not loaded
//
// Misuse is reported through these codes, never as a crash.

#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <gmpxx.h>

#include "cuboid/modpoly.hpp"
#include "cuboid/region.hpp"
#include "cuboid/roots.hpp"
#include "cuboid/sievetable.hpp"

namespace cuboid {

struct PairVerdict {
	enum class Kind { SievedOut, NoIntegerRoot, RootFailsInequalities, CuboidCandidate };
	Kind kind = Kind::NoIntegerRoot;
	uint32_t prime = 0; // SievedOut: smallest rejecting prime
	mpz_class t;        // integer root, when one exists

	static PairVerdict sieved_out(uint32_t r) { return {Kind::SievedOut, r, 0}; }
	static PairVerdict no_integer_root() { return {Kind::NoIntegerRoot, 0, 0}; }
	static PairVerdict root_fails(mpz_class t) { return {Kind::RootFailsInequalities, 0, std::move(t)}; }
	static PairVerdict candidate(mpz_class t) { return {Kind::CuboidCandidate, 0, std::move(t)}; }
};

// The four inequalities a perfect-cuboid witness root must satisfy:
// t > p^2, t > pq, t > q^2, (p^2+t)(pq+t) > 2t^2.
inline bool cuboid_inequalities_hold(uint64_t p, uint64_t q, const mpz_class& t)
{
	const mpz_class P(static_cast<unsigned long>(p)), Q(static_cast<unsigned long>(q));
	const mpz_class p2 = P * P, pq = P * Q, q2 = Q * Q;
	if (t <= p2 || t <= pq || t <= q2) return false;
	return (p2 + t) * (pq + t) > 2 * t * t;
}

// Full verdict for one pair. Without bypass, sieve primes are consulted in
// increasing order first; otherwise (or for a survivor) the quintic in s=t^2
// is solved exactly and each positive integer root t is tested against the
// inequalities.
inline PairVerdict verify_pair(const SieveSet* set, const SearchPair& pr, bool bypass_sieve)
{
	if (pr.p == 0 || pr.q == 0 || pr.p == pr.q)
		throw std::invalid_argument("verify_pair: requires positive p != q");
	if (std::gcd(pr.p, pr.q) != 1)
		throw std::invalid_argument("verify_pair: requires gcd(p,q) = 1");
	if (!bypass_sieve) {
		if (set == nullptr || set->empty())
			throw std::invalid_argument("verify_pair: sieve tables not loaded");
		for (size_t rank = 0; rank < set->prime_count(); ++rank)
			if (set->is_unsolvable(rank, pr.p, pr.q))
				return PairVerdict::sieved_out(set->prime_at(rank));
	}

	const ExactCoefficients c = q_coefficients_exact(pr);
	const Poly quintic = {c.c0, c.c1, c.c2, c.c3, c.c4, c.c5};
	std::vector<mpz_class> roots_t;
	for (const mpz_class& s : positive_integer_roots(quintic)) {
		if (mpz_perfect_square_p(s.get_mpz_t())) {
			mpz_class t;
			mpz_sqrt(t.get_mpz_t(), s.get_mpz_t());
			roots_t.push_back(t);
		}
	}
	if (roots_t.empty()) return PairVerdict::no_integer_root();
	for (const mpz_class& t : roots_t)
		if (cuboid_inequalities_hold(pr.p, pr.q, t))
			return PairVerdict::candidate(t);
	return PairVerdict::root_fails(roots_t.front());
}

struct ScanEvent {
	uint64_t p = 0;
	uint64_t q = 0;
	PairVerdict verdict;
};

using ScanSink = std::function<void(const ScanEvent&)>;

struct ScanStats {
	uint64_t pairs_tested = 0;
	uint64_t survivors = 0;
	std::map<uint32_t, uint64_t> kill_histogram; // first killing prime -> pairs
	std::map<uint64_t, uint32_t> block_r_max;    // p/100 -> max killing prime (1 if none)
	std::chrono::nanoseconds elapsed{0};
	uint64_t resume_p = 0, resume_q = 0;         // next untested pair
	bool stopped = false;                        // true if halted by the stop flag

	uint64_t histogram_total() const
	{
		uint64_t n = 0;
		for (const auto& [r, k] : kill_histogram) n += k;
		return n;
	}

	void merge(const ScanStats& o)
	{
		pairs_tested += o.pairs_tested;
		survivors += o.survivors;
		for (const auto& [r, k] : o.kill_histogram) kill_histogram[r] += k;
		for (const auto& [b, r] : o.block_r_max) {
			auto& cur = block_r_max[b];
			if (r > cur) cur = r;
		}
		elapsed += o.elapsed;
		resume_p = o.resume_p;
		resume_q = o.resume_q;
		stopped = o.stopped;
	}
};

struct ScanHooks {
	std::atomic<bool>* stop = nullptr;
	std::atomic<uint64_t>* current_p = nullptr;
	std::atomic<uint64_t>* current_q = nullptr;
	std::atomic<uint32_t>* current_r_max = nullptr;
};

struct ScanOptions {
	bool small_p = false;                   // permit p < 152
	uint64_t p_limit = p_limit_32bit();
	uint64_t batch_pairs = 1u << 16;        // stop-flag granularity
	ScanHooks hooks;
};

// Start-position validation shared by scan() and the controller.
inline int validate_start(bool loaded, uint64_t p, uint64_t q, const ScanOptions& opt)
{
	if (!loaded) return 6;
	if (p < kRegionCrossover && !opt.small_p) return 2;
	if (p > opt.p_limit || p == 0) return 3;
	const RegionBounds b = q_bounds(p);
	if (q < b.q_low) return 4;
	if (q > b.q_high) return 5;
	return 0;
}

struct ScanRejected : std::runtime_error {
	int code;
	explicit ScanRejected(int c)
	    : std::runtime_error("scan rejected with code " + std::to_string(c)), code(c) {}
};

namespace detail {

struct RowProbe {
	uint32_t r = 0;
	uint32_t rank = 0;
	const uint8_t* data = nullptr; // table base
	size_t row_bits = 0;           // (p mod r) * r
};

inline void next_pair(uint64_t p, uint64_t q, uint64_t q_high, uint64_t& np, uint64_t& nq)
{
	if (q < q_high) {
		np = p;
		nq = q + 1;
	} else {
		np = p + 1;
		nq = (p + 1 <= p_limit_64bit()) ? q_bounds(p + 1).q_low : 1;
	}
}

} // namespace detail

// Scans p from start.p through p_end, q across the region row (resuming
// mid-row on the first p). Pairs with p = q or gcd > 1 are skipped and not
// counted. Sieve primes are probed smallest first with early exit; survivors
// go through exact verification and are reported via the sink in order.
inline ScanStats scan(const SieveSet& set, SearchPair start, uint64_t p_end,
                      const ScanSink& sink = {}, const ScanOptions& opt = {})
{
	if (set.empty()) throw ScanRejected(6);
	if (int code = validate_start(true, start.p, start.q, opt))
		throw ScanRejected(code);
	if (p_end > opt.p_limit) throw ScanRejected(3);

	ScanStats stats;
	stats.resume_p = start.p;
	stats.resume_q = start.q;
	const auto t0 = std::chrono::steady_clock::now();

	const size_t nprimes = set.prime_count();
	std::vector<uint64_t> hist(nprimes, 0);
	std::vector<detail::RowProbe> probes;
	probes.reserve(nprimes);

	uint64_t cur_block = UINT64_MAX;
	uint32_t block_rmax = 1;
	uint64_t batch = 0;
	bool stop_requested = false;

	auto flush_hooks = [&](uint64_t p, uint64_t q) {
		if (opt.hooks.current_p) opt.hooks.current_p->store(p, std::memory_order_relaxed);
		if (opt.hooks.current_q) opt.hooks.current_q->store(q, std::memory_order_relaxed);
		if (opt.hooks.current_r_max)
			opt.hooks.current_r_max->store(block_rmax, std::memory_order_relaxed);
	};

	for (uint64_t p = start.p; p <= p_end && !stop_requested; ++p) {
		const RegionBounds bounds = q_bounds(p);
		const uint64_t q0 = (p == start.p) ? start.q : bounds.q_low;

		if (p / 100 != cur_block) {
			if (cur_block != UINT64_MAX) {
				auto& cur = stats.block_r_max[cur_block];
				if (block_rmax > cur) cur = block_rmax;
			}
			cur_block = p / 100;
			block_rmax = 1; // flushed at each new hundred of p
		}

		probes.clear();
		for (size_t rank = 0; rank < nprimes; ++rank) {
			const uint32_t r = set.prime_at(rank);
			const uint32_t pr = static_cast<uint32_t>(p % r);
			if (pr == 0) continue; // row 0 is identically solvable, cannot kill
			probes.push_back({r, static_cast<uint32_t>(rank), set.table_data(rank),
			                  static_cast<size_t>(pr) * r});
		}

		for (uint64_t q = q0; q <= bounds.q_high; ++q) {
			if (++batch >= opt.batch_pairs) {
				batch = 0;
				flush_hooks(p, q);
				if (opt.hooks.stop && opt.hooks.stop->load(std::memory_order_relaxed)) {
					stats.resume_p = p;
					stats.resume_q = q;
					stop_requested = true;
					break;
				}
			}
			if (q == p || std::gcd(p, q) != 1) continue;
			++stats.pairs_tested;

			uint32_t killer = 0;
			for (const detail::RowProbe& pb : probes) {
				const size_t i = pb.row_bits + static_cast<size_t>(q % pb.r);
				if ((pb.data[i >> 3] >> (i & 7)) & 1) {
					killer = pb.r;
					++hist[pb.rank];
					break;
				}
			}
			if (killer) {
				if (killer > block_rmax) block_rmax = killer;
			} else {
				++stats.survivors;
				if (sink) {
					ScanEvent ev{p, q, verify_pair(&set, {p, q}, /*bypass_sieve=*/true)};
					sink(ev);
				}
			}
		}
		if (!stop_requested) {
			detail::next_pair(p, bounds.q_high, bounds.q_high, stats.resume_p, stats.resume_q);
			flush_hooks(p, bounds.q_high);
		}
	}

	if (cur_block != UINT64_MAX) {
		auto& cur = stats.block_r_max[cur_block];
		if (block_rmax > cur) cur = block_rmax;
	}
	for (size_t rank = 0; rank < nprimes; ++rank)
		if (hist[rank]) stats.kill_histogram[set.prime_at(rank)] += hist[rank];
	stats.stopped = stop_requested;
	stats.elapsed = std::chrono::steady_clock::now() - t0;
	return stats;
}

struct SearchCheckpoint {
	uint64_t p = 0;
	uint64_t q = 0;
	uint32_t r_max = 1;
	std::string timestamp; // ISO-8601 local time
	uint64_t pairs_tested = 0;
	uint64_t survivors = 0;
};

namespace detail {

inline uint64_t fnv1a64(const std::string& s)
{
	uint64_t h = 1469598103934665603ull;
	for (unsigned char c : s) {
		h ^= c;
		h *= 1099511628211ull;
	}
	return h;
}

inline std::string checkpoint_body(const SearchCheckpoint& cp)
{
	std::ostringstream os;
	os << "p=" << cp.p << '\n'
	   << "q=" << cp.q << '\n'
	   << "r_max=" << cp.r_max << '\n'
	   << "timestamp=" << cp.timestamp << '\n'
	   << "pairs_tested=" << cp.pairs_tested << '\n'
	   << "survivors=" << cp.survivors << '\n';
	return os.str();
}

} // namespace detail

inline std::string iso8601_local_now()
{
	const std::time_t now = std::time(nullptr);
	std::tm tmv{};
	localtime_r(&now, &tmv);
	char buf[32];
	std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tmv);
	return buf;
}

// Accepts both the ISO form written here and the historical
// "2016-2-20 21:36" report style.
inline bool parse_report_timestamp(const std::string& s, std::tm& out)
{
	out = {};
	int y, mo, d, h, mi, sec = 0;
	if (std::sscanf(s.c_str(), "%d-%d-%dT%d:%d:%d", &y, &mo, &d, &h, &mi, &sec) >= 5 ||
	    std::sscanf(s.c_str(), "%d-%d-%d %d:%d:%d", &y, &mo, &d, &h, &mi, &sec) >= 5) {
		if (mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59) return false;
		out.tm_year = y - 1900;
		out.tm_mon = mo - 1;
		out.tm_mday = d;
		out.tm_hour = h;
		out.tm_min = mi;
		out.tm_sec = sec;
		return true;
	}
	return false;
}

inline void checkpoint_write(const SearchCheckpoint& cp, const std::string& path)
{
	const std::string body = detail::checkpoint_body(cp);
	std::ostringstream os;
	os << body << "digest=" << std::hex << detail::fnv1a64(body) << '\n';
	std::ofstream f(path, std::ios::trunc);
	if (!f) throw std::runtime_error("cannot open checkpoint for writing: " + path);
	f << os.str();
	if (!f) throw std::runtime_error("checkpoint write failed: " + path);
}

inline SearchCheckpoint checkpoint_read(const std::string& path)
{
	std::ifstream f(path);
	if (!f) throw std::runtime_error("cannot open checkpoint: " + path);
	SearchCheckpoint cp;
	std::string line, body;
	std::optional<uint64_t> digest;
	while (std::getline(f, line)) {
		const auto eq = line.find('=');
		if (eq == std::string::npos) throw std::runtime_error("malformed checkpoint line: " + line);
		const std::string key = line.substr(0, eq), val = line.substr(eq + 1);
		if (key == "digest") {
			digest = std::stoull(val, nullptr, 16);
			break;
		}
		body += line;
		body += '\n';
		try {
			if (key == "p") cp.p = std::stoull(val);
			else if (key == "q") cp.q = std::stoull(val);
			else if (key == "r_max") cp.r_max = static_cast<uint32_t>(std::stoul(val));
			else if (key == "timestamp") cp.timestamp = val;
			else if (key == "pairs_tested") cp.pairs_tested = std::stoull(val);
			else if (key == "survivors") cp.survivors = std::stoull(val);
			else throw std::runtime_error("unknown checkpoint key: " + key);
		} catch (const std::logic_error&) {
			throw std::runtime_error("malformed checkpoint value: " + line);
		}
	}
	if (!digest || *digest != detail::fnv1a64(body))
		throw std::runtime_error("checkpoint digest mismatch: " + path);
	if (cp.r_max != 1 && !is_prime_u32(cp.r_max))
		throw std::runtime_error("checkpoint r_max is neither 1 nor prime");
	const RegionBounds b = q_bounds(cp.p);
	if (cp.q < b.q_low) throw ScanRejected(4);
	if (cp.q > b.q_high) throw ScanRejected(5);
	return cp;
}

// Appends the stop record: a timestamp line, then the exit position.
inline void report_append(const std::string& path, const SearchCheckpoint& cp)
{
	std::ofstream f(path, std::ios::app);
	if (!f) throw std::runtime_error("cannot open report for append: " + path);
	f << cp.timestamp << '\n'
	  << "Stop with p=" << cp.p << ", q=" << cp.q << ", r_max=" << cp.r_max << '\n';
	if (!f) throw std::runtime_error("report append failed: " + path);
}

struct ControllerStatus {
	bool running = false;
	uint64_t current_p = 0;       // discreteness 100
	uint64_t current_p_exact = 0;
	uint32_t current_r_max = 1;
};

// Owns the loaded SieveSet and at most one scan worker. Status reads are
// lock-free snapshots; stop is a cooperative flag honored at batch
// boundaries.
class SearchController {
public:
	struct Config {
		std::string report_path = "Cuboid_search_report.txt";
		std::string checkpoint_path = "Cuboid_search_checkpoint.txt";
		uint64_t p_limit = p_limit_32bit();
		uint64_t p_end = 0; // 0: run to p_limit
		bool small_p = false;
		uint64_t batch_pairs = 1u << 16;
		ScanSink sink; // survivor events, delivered on the worker thread
	};

	SearchController() = default;
	explicit SearchController(Config cfg) : cfg_(std::move(cfg)) {}

	~SearchController()
	{
		stop_.store(true);
		join_worker();
	}

	SearchController(const SearchController&) = delete;
	SearchController& operator=(const SearchController&) = delete;

	// Returns the index file size in bytes on first load, 0 when the tables
	// are already resident. File problems surface as exceptions.
	long load(const std::string& tables_path, const std::string& index_path)
	{
		std::lock_guard lk(mu_);
		if (set_.has_value()) return 0;
		const auto index_bytes = read_bytes(index_path);
		const auto table_bytes = read_bytes(tables_path);
		set_ = load_sieve(table_bytes, index_bytes);
		return static_cast<long>(index_bytes.size());
	}

	// 0 released, 1 search running, 6 not loaded.
	int release()
	{
		std::lock_guard lk(mu_);
		if (running_.load()) return 1;
		join_worker();
		if (!set_.has_value()) return 6;
		set_.reset();
		return 0;
	}

	// Status codes 0..6 as documented above. Returns immediately; the scan
	// continues on a worker thread.
	int start(uint64_t p, uint64_t q)
	{
		std::lock_guard lk(mu_);
		if (running_.load()) return 1;
		join_worker();
		ScanOptions opt = make_options();
		if (int code = validate_start(set_.has_value(), p, q, opt)) return code;

		stop_.store(false);
		cur_p_.store(p);
		cur_q_.store(q);
		cur_rmax_.store(1);
		running_.store(true);
		worker_ = std::thread([this, p, q, opt] { run_scan({p, q}, opt); });
		return 0;
	}

	// 0 stopped (report + checkpoint flushed), 1 if no search is on.
	int stop()
	{
		std::lock_guard lk(mu_);
		if (!running_.load()) return 1;
		stop_.store(true);
		join_worker();
		return 0;
	}

	ControllerStatus status() const
	{
		ControllerStatus st;
		st.running = running_.load();
		st.current_p_exact = cur_p_.load();
		st.current_p = st.current_p_exact - st.current_p_exact % 100;
		st.current_r_max = cur_rmax_.load();
		return st;
	}

	bool loaded() const
	{
		std::lock_guard lk(mu_);
		return set_.has_value();
	}

	const SieveSet& sieve() const
	{
		std::lock_guard lk(mu_);
		if (!set_) throw std::runtime_error("sieve tables not loaded");
		return *set_;
	}

	// Stats of the most recently finished scan.
	ScanStats last_stats() const
	{
		std::lock_guard lk(stats_mu_);
		return stats_;
	}

	std::string last_error() const
	{
		std::lock_guard lk(stats_mu_);
		return error_;
	}

private:
	ScanOptions make_options()
	{
		ScanOptions opt;
		opt.small_p = cfg_.small_p;
		opt.p_limit = cfg_.p_limit;
		opt.batch_pairs = cfg_.batch_pairs;
		opt.hooks = {&stop_, &cur_p_, &cur_q_, &cur_rmax_};
		return opt;
	}

	void run_scan(SearchPair start, const ScanOptions& opt)
	{
		const uint64_t p_end = cfg_.p_end ? cfg_.p_end : cfg_.p_limit;
		try {
			ScanStats st = scan(*set_, start, p_end, cfg_.sink, opt);
			SearchCheckpoint cp;
			cp.p = st.resume_p;
			cp.q = st.resume_q;
			cp.r_max = cur_rmax_.load();
			cp.timestamp = iso8601_local_now();
			cp.pairs_tested = st.pairs_tested;
			cp.survivors = st.survivors;
			report_append(cfg_.report_path, cp);
			checkpoint_write(cp, cfg_.checkpoint_path);
			std::lock_guard lk(stats_mu_);
			stats_ = std::move(st);
			error_.clear();
		} catch (const std::exception& e) {
			std::lock_guard lk(stats_mu_);
			error_ = e.what();
		}
		running_.store(false);
	}

	void join_worker()
	{
		if (worker_.joinable()) worker_.join();
	}

	Config cfg_;
	mutable std::mutex mu_;
	std::optional<SieveSet> set_;
	std::thread worker_;
	std::atomic<bool> running_{false};
	std::atomic<bool> stop_{false};
	std::atomic<uint64_t> cur_p_{0}, cur_q_{0};
	std::atomic<uint32_t> cur_rmax_{1};
	mutable std::mutex stats_mu_;
	ScanStats stats_;
	std::string error_;
};

struct SmallRegionSummary {
	uint64_t pairs = 0;       // coprime p != q pairs visited
	uint64_t sieved_out = 0;
	uint64_t survivors = 0;   // pairs needing exact verification
	uint64_t no_integer_root = 0;
	uint64_t root_fails = 0;
	uint64_t candidates = 0;  // must stay zero
};

// Exhaustive check of the small region p <= 151: every coprime p != q pair in
// the region is sieved, survivors get exact verification. A cuboid candidate
// here would be a discovery and is surfaced as a hard error.
inline SmallRegionSummary verify_small_region(const SieveSet& set)
{
	if (set.empty()) throw std::invalid_argument("verify_small_region: empty sieve set");
	SmallRegionSummary sum;
	const size_t nprimes = set.prime_count();
	for (uint64_t p = 1; p <= 151; ++p) {
		const RegionBounds b = q_bounds(p);
		for (uint64_t q = b.q_low; q <= b.q_high; ++q) {
			if (q == p || std::gcd(p, q) != 1) continue;
			++sum.pairs;
			bool killed = false;
			for (size_t rank = 0; rank < nprimes && !killed; ++rank)
				killed = set.is_unsolvable(rank, p, q);
			if (killed) {
				++sum.sieved_out;
				continue;
			}
			++sum.survivors;
			const PairVerdict v = verify_pair(&set, {p, q}, /*bypass_sieve=*/true);
			switch (v.kind) {
			case PairVerdict::Kind::NoIntegerRoot: ++sum.no_integer_root; break;
			case PairVerdict::Kind::RootFailsInequalities: ++sum.root_fails; break;
			case PairVerdict::Kind::CuboidCandidate:
				++sum.candidates;
				throw std::runtime_error("cuboid candidate found at p=" + std::to_string(p) +
				                         ", q=" + std::to_string(q) + ", t=" + v.t.get_str());
			default: break;
			}
		}
	}
	return sum;
}

} // namespace cuboid
