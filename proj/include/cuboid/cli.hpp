#pragma once

// Command-line surface. One binary, five subcommands:
//
//   gen-tables   build the bit tables and write the two binary files
//   dump-table   render one table as text
//   search       run the resumable region scan (exit code = status code)
//   verify       classify a single pair
//   bench        measure sieve throughput
//
// Exit codes: 0 ok; 1 runtime/format/IO error; 2..6 search status codes;
// 10 cuboid candidate found; 64 usage error; 70 unexpected internal error.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "cuboid/engine.hpp"

namespace cuboid::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitCandidate = 10;
inline constexpr int kExitUsage = 64;
inline constexpr int kExitInternal = 70;

struct CliConfig {
	std::string tables_path = "Cuboid_pq_bit_tables.bin";
	std::string index_path = "Cuboid_primes.bin";
	std::string report_path = "Cuboid_search_report.txt";
	std::string checkpoint_path = "Cuboid_search_checkpoint.txt";
	uint32_t prime_min = 11;
	uint32_t prime_max = 541;
	uint64_t p_limit = p_limit_32bit();
	uint64_t batch_pairs = 1u << 16;
	int verbosity = 0;
};

namespace detail {

inline std::string describe(const PairVerdict& v)
{
	switch (v.kind) {
	case PairVerdict::Kind::SievedOut:
		return "sieved out by r=" + std::to_string(v.prime);
	case PairVerdict::Kind::NoIntegerRoot:
		return "no integer root";
	case PairVerdict::Kind::RootFailsInequalities:
		return "integer root t=" + v.t.get_str() + " fails the witness inequalities";
	case PairVerdict::Kind::CuboidCandidate:
		return "CUBOID CANDIDATE with t=" + v.t.get_str();
	}
	return "?";
}

inline void resolve_paths(CliConfig& cfg)
{
	namespace fs = std::filesystem;
	cfg.tables_path = fs::absolute(cfg.tables_path).string();
	cfg.index_path = fs::absolute(cfg.index_path).string();
	cfg.report_path = fs::absolute(cfg.report_path).string();
	cfg.checkpoint_path = fs::absolute(cfg.checkpoint_path).string();
}

inline int cmd_gen_tables(const CliConfig& cfg, std::ostream& out, std::ostream& err)
{
	if (!is_prime_u32(cfg.prime_min) || !is_prime_u32(cfg.prime_max) ||
	    cfg.prime_min > cfg.prime_max || cfg.prime_max >= kModulusLimit) {
		err << "gen-tables: prime range endpoints must be primes below " << kModulusLimit
		    << " with min <= max\n";
		return kExitUsage;
	}
	const auto primes = primes_in_range(cfg.prime_min, cfg.prime_max);
	const SieveSet set = SieveSet::build(primes);
	uint64_t total = 0;
	for (size_t rank = 0; rank < set.prime_count(); ++rank) {
		const uint32_t r = set.prime_at(rank);
		const size_t n = table_byte_size(r);
		total += n;
		out << "r=" << r << " bytes=" << n << '\n';
	}
	save_sieve_files(set, cfg.tables_path, cfg.index_path);
	out << "wrote " << set.prime_count() << " tables, " << total << " bytes to "
	    << cfg.tables_path << '\n';
	out << "wrote index, " << serialize_index(set).size() << " bytes to " << cfg.index_path
	    << '\n';
	return kExitOk;
}

inline int cmd_dump_table(const CliConfig& cfg, uint32_t r, const std::string& out_path,
                          std::ostream& out, std::ostream& err)
{
	if (!is_prime_u32(r)) {
		err << "dump-table: " << r << " is not prime\n";
		return kExitUsage;
	}
	const SieveSet set = load_sieve_files(cfg.tables_path, cfg.index_path);
	const std::string text = dump_table_text(set, r);
	if (out_path.empty()) {
		out << text;
	} else {
		std::ofstream f(out_path, std::ios::trunc);
		if (!f) throw std::runtime_error("cannot open: " + out_path);
		f << text;
	}
	return kExitOk;
}

inline int cmd_search(const CliConfig& cfg, uint64_t p, uint64_t q, bool have_pq, bool resume,
                      uint64_t p_end, bool small_p, const std::atomic<bool>* interrupt,
                      std::ostream& out, std::ostream& err)
{
	std::mutex io_mu;
	bool candidate_seen = false;

	SearchController::Config ctl_cfg;
	ctl_cfg.report_path = cfg.report_path;
	ctl_cfg.checkpoint_path = cfg.checkpoint_path;
	ctl_cfg.p_limit = cfg.p_limit;
	ctl_cfg.p_end = p_end;
	ctl_cfg.small_p = small_p;
	ctl_cfg.batch_pairs = cfg.batch_pairs;
	ctl_cfg.sink = [&](const ScanEvent& ev) {
		std::lock_guard lk(io_mu);
		out << "survivor p=" << ev.p << " q=" << ev.q << ": " << describe(ev.verdict) << '\n';
		if (ev.verdict.kind == PairVerdict::Kind::CuboidCandidate) candidate_seen = true;
	};

	SearchController ctl(std::move(ctl_cfg));
	try {
		const long bytes = ctl.load(cfg.tables_path, cfg.index_path);
		if (cfg.verbosity > 0) out << "loaded tables, index size " << bytes << " bytes\n";
	} catch (const std::exception& e) {
		err << "search: cannot load tables: " << e.what() << '\n';
		return 6;
	}

	if (resume) {
		try {
			const SearchCheckpoint cp = checkpoint_read(cfg.checkpoint_path);
			p = cp.p;
			q = cp.q;
			out << "resuming from p=" << p << ", q=" << q << '\n';
		} catch (const ScanRejected& e) {
			err << "search: checkpoint outside the region (code " << e.code << ")\n";
			return e.code;
		} catch (const std::exception& e) {
			err << "search: bad checkpoint: " << e.what() << '\n';
			return kExitError;
		}
	} else if (!have_pq) {
		err << "search: give p and q, or --resume\n";
		return kExitUsage;
	}

	if (const int code = ctl.start(p, q)) {
		err << "search: start rejected with code " << code << '\n';
		return code;
	}

	while (ctl.status().running) {
		if (interrupt && interrupt->load()) {
			ctl.stop();
			break;
		}
		std::this_thread::sleep_for(std::chrono::milliseconds(50));
		if (cfg.verbosity > 1) {
			const auto st = ctl.status();
			std::lock_guard lk(io_mu);
			err << "p=" << st.current_p << " r_max=" << st.current_r_max << '\n';
		}
	}
	ctl.stop(); // harmless if already finished

	if (!ctl.last_error().empty()) {
		err << "search: " << ctl.last_error() << '\n';
		return kExitError;
	}
	const ScanStats st = ctl.last_stats();
	const double secs = std::chrono::duration<double>(st.elapsed).count();
	out << "scanned " << st.pairs_tested << " pairs in " << secs << " s, survivors "
	    << st.survivors << ", resume point p=" << st.resume_p << " q=" << st.resume_q << '\n';
	return candidate_seen ? kExitCandidate : kExitOk;
}

inline int cmd_verify(const CliConfig& cfg, uint64_t p, uint64_t q, bool bypass,
                      std::ostream& out, std::ostream& err)
{
	if (p == 0 || q == 0 || p == q || std::gcd(p, q) != 1) {
		err << "verify: requires positive coprime p != q\n";
		return kExitUsage;
	}
	PairVerdict v;
	if (bypass) {
		v = verify_pair(nullptr, {p, q}, true);
	} else {
		const SieveSet set = load_sieve_files(cfg.tables_path, cfg.index_path);
		v = verify_pair(&set, {p, q}, false);
	}
	out << "p=" << p << " q=" << q << ": " << describe(v) << '\n';
	return v.kind == PairVerdict::Kind::CuboidCandidate ? kExitCandidate : kExitOk;
}

inline int cmd_bench(const CliConfig& cfg, uint64_t p_start, uint64_t p_end, int repeat,
                     std::ostream& out, std::ostream& err)
{
	(void)err;
	const SieveSet set = load_sieve_files(cfg.tables_path, cfg.index_path);
	ScanOptions opt;
	opt.p_limit = cfg.p_limit;
	opt.batch_pairs = cfg.batch_pairs;
	const uint64_t q0 = q_bounds(p_start).q_low;

	std::vector<double> rates; // seconds per pair
	for (int run = 0; run < repeat; ++run) {
		const ScanStats st = scan(set, {p_start, q0}, p_end, {}, opt);
		const double secs = std::chrono::duration<double>(st.elapsed).count();
		out << "run " << run + 1 << ": " << st.pairs_tested << " pairs in " << secs << " s";
		if (st.pairs_tested == 0) {
			out << " (empty range)\n";
			continue;
		}
		const double dt = secs / static_cast<double>(st.pairs_tested);
		rates.push_back(dt);
		out << ", dt=" << dt << " s/pair\n";
	}
	if (!rates.empty()) {
		out << "reference dt: 3.54e-07 s/pair\n";
		if (rates.size() > 1) {
			double lo = rates[0], hi = rates[0];
			for (double x : rates) {
				lo = std::min(lo, x);
				hi = std::max(hi, x);
			}
			out << "run-to-run variation: " << (hi - lo) / hi * 100.0 << "%\n";
		}
	}
	return kExitOk;
}

} // namespace detail

// Parses and runs one invocation. `interrupt`, when set, requests a clean
// search stop (checkpoint flushed) as soon as it becomes true.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err,
               const std::atomic<bool>* interrupt = nullptr)
{
	CliConfig cfg;
	CLI::App app{"modulo-prime sieve search for perfect cuboid witnesses"};
	app.require_subcommand(1);
	app.fallthrough();
	app.add_option("--tables", cfg.tables_path, "bit-tables file");
	app.add_option("--index", cfg.index_path, "primes index file");
	app.add_option("--report", cfg.report_path, "search report file");
	app.add_option("--checkpoint", cfg.checkpoint_path, "checkpoint file");
	app.add_option("--p-limit", cfg.p_limit, "largest admissible p");
	app.add_option("--batch", cfg.batch_pairs, "pairs per stop-flag check");
	app.add_flag("-v,--verbose", cfg.verbosity, "more output");

	auto* gen = app.add_subcommand("gen-tables", "build and write the sieve tables");
	gen->add_option("--prime-min", cfg.prime_min, "first table prime");
	gen->add_option("--prime-max", cfg.prime_max, "last table prime");

	auto* dump = app.add_subcommand("dump-table", "print one table as text");
	uint32_t dump_r = 0;
	std::string dump_out;
	dump->add_option("r", dump_r, "prime modulus")->required();
	dump->add_option("-o,--output", dump_out, "write to file instead of stdout");

	auto* search = app.add_subcommand("search", "scan the region for witnesses");
	uint64_t sp = 0, sq = 0, p_end = 0;
	bool resume = false, small_p = false;
	search->add_option("p", sp, "starting p");
	search->add_option("q", sq, "starting q");
	search->add_option("--p-end", p_end, "last p to scan (default: the p limit)");
	search->add_flag("--resume", resume, "continue from the checkpoint file");
	search->add_flag("--small-p", small_p, "permit p below 152");

	auto* verify = app.add_subcommand("verify", "classify one (p,q) pair");
	uint64_t vp = 0, vq = 0;
	bool bypass = false;
	verify->add_option("p", vp, "p")->required();
	verify->add_option("q", vq, "q")->required();
	verify->add_flag("--bypass-sieve", bypass, "skip the sieve, verify exactly");

	auto* bench = app.add_subcommand("bench", "measure sieve throughput");
	uint64_t bp_start = 152, bp_end = 2000;
	int repeat = 2;
	bench->add_option("--p-start", bp_start, "first p");
	bench->add_option("--p-end", bp_end, "last p");
	bench->add_option("--repeat", repeat, "number of timed runs");

	try {
		app.parse(argc, argv);
	} catch (const CLI::CallForHelp& e) {
		out << app.help();
		return kExitOk;
	} catch (const CLI::ParseError& e) {
		err << e.what() << '\n';
		return kExitUsage;
	}

	try {
		detail::resolve_paths(cfg);
		if (gen->parsed()) return detail::cmd_gen_tables(cfg, out, err);
		if (dump->parsed()) return detail::cmd_dump_table(cfg, dump_r, dump_out, out, err);
		if (search->parsed()) {
			const bool have_pq = search->count("p") > 0 && search->count("q") > 0;
			return detail::cmd_search(cfg, sp, sq, have_pq, resume, p_end, small_p, interrupt,
			                          out, err);
		}
		if (verify->parsed()) return detail::cmd_verify(cfg, vp, vq, bypass, out, err);
		if (bench->parsed()) return detail::cmd_bench(cfg, bp_start, bp_end, repeat, out, err);
	} catch (const FormatError& e) {
		err << "format error: " << e.what() << '\n';
		return kExitError;
	} catch (const std::invalid_argument& e) {
		err << "usage error: " << e.what() << '\n';
		return kExitUsage;
	} catch (const std::exception& e) {
		err << "error: " << e.what() << '\n';
		return kExitError;
	} catch (...) {
		err << "unexpected error\n";
		return kExitInternal;
	}
	return kExitInternal;
}

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
               const std::atomic<bool>* interrupt = nullptr)
{
	std::vector<const char*> argv;
	argv.push_back("cuboid_search");
	for (const auto& a : args) argv.push_back(a.c_str());
	return run(static_cast<int>(argv.size()), argv.data(), out, err, interrupt);
}

} // namespace cuboid::cli
