#pragma once

// Per-prime unsolvability bit-tables.
//
// For a prime r, table u_r holds one bit per residue pair (p,q): bit 1 means
// Q_pq(t) = 0 has no root t mod r, so no integer solutions exist for any p,q
// with those residues. Bits are laid out row-major (linear index i = p*r + q)
// and packed least-significant-bit first: bit i lives at bit position i & 7
// of byte i >> 3, final byte zero padded.
//
// A SieveSet is an ordered collection of tables plus a (prime, offset) index.
// On disk the tables file is the raw concatenation of the packed tables; the
// index file is
//
//   magic "CUPQ" | version 0x01 | record count u32 LE | records...
//
// with each record a packed 6 bytes: prime u16 LE, byte offset u32 LE into
// the tables file. Offsets are cumulative: offset[k+1] = offset[k] +
// ceil(r_k^2 / 8), and the total must stay below 2^32.

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cuboid/modpoly.hpp"
#include "cuboid/primes.hpp"

namespace cuboid {

struct FormatError : std::runtime_error {
	using std::runtime_error::runtime_error;
};

inline constexpr size_t table_byte_size(uint32_t r)
{
	return (static_cast<size_t>(r) * r + 7) / 8;
}

struct BitTable {
	uint32_t r = 0;
	std::vector<uint8_t> bytes; // ceil(r^2/8), LSB-first packing

	bool bit(uint32_t p, uint32_t q) const
	{
		const size_t i = static_cast<size_t>(p) * r + q;
		return (bytes[i >> 3] >> (i & 7)) & 1;
	}
};

// Packs a flat 0/1 sequence LSB-first, zero padding the final byte.
inline std::vector<uint8_t> pack_bits(const std::vector<uint8_t>& bits)
{
	std::vector<uint8_t> out((bits.size() + 7) / 8, 0);
	for (size_t i = 0; i < bits.size(); ++i)
		if (bits[i]) out[i >> 3] |= uint8_t(1u << (i & 7));
	return out;
}

// Inverse of pack_bits for an r x r table. Nonzero padding is a format error.
inline std::vector<uint8_t> unpack_bits(std::span<const uint8_t> bytes, uint32_t r)
{
	const size_t nbits = static_cast<size_t>(r) * r;
	if (bytes.size() != (nbits + 7) / 8)
		throw FormatError("unpack_bits: byte length does not match r*r bits");
	std::vector<uint8_t> bits(nbits);
	for (size_t i = 0; i < nbits; ++i)
		bits[i] = (bytes[i >> 3] >> (i & 7)) & 1;
	for (size_t i = nbits; i < bytes.size() * 8; ++i)
		if ((bytes[i >> 3] >> (i & 7)) & 1)
			throw FormatError("unpack_bits: nonzero padding bits");
	return bits;
}

namespace detail {

inline void check_table_modulus(uint32_t r)
{
	if (r < 2 || r >= kModulusLimit || !is_prime_u32(r))
		throw std::invalid_argument("bit table modulus must be a prime below 9697");
}

// True if some t in [0, r-1] solves Q_pq(t) = 0 mod r. Q is even in t, so
// scanning t <= floor(r/2) covers every {t, r-t} class.
inline bool row_solvable(const ModCoeffs& c, uint32_t r)
{
	for (uint32_t t = 0; t <= r / 2; ++t)
		if (horner_mod(c, t, r) == 0) return true;
	return false;
}

} // namespace detail

// Reference builder: the definition, with no shortcuts. Ground truth for
// build_table at test scale.
inline BitTable build_table_oracle(uint32_t r)
{
	detail::check_table_modulus(r);
	std::vector<uint8_t> bits(static_cast<size_t>(r) * r, 0);
	for (uint32_t p = 0; p < r; ++p) {
		for (uint32_t q = 0; q < r; ++q) {
			bool solvable = false;
			for (uint32_t t = 0; t < r && !solvable; ++t)
				solvable = eval_q_mod({p, q, t, r}) == 0;
			bits[static_cast<size_t>(p) * r + q] = solvable ? 0 : 1;
		}
	}
	return BitTable{r, pack_bits(bits)};
}

// Production builder. Uses two structural facts about Q, both validated
// against build_table_oracle by the test suite:
//   - evenness in t: only half the t residues need scanning;
//   - weighted homogeneity Q_{ap,aq}(a^2 t) = a^20 Q_pq(t): for a != 0 the
//     row p is the row 1 permuted by q -> p^{-1} q, and row 0 is all zeros
//     (the constant term vanishes at p = 0).
inline BitTable build_table(uint32_t r)
{
	detail::check_table_modulus(r);
	std::vector<uint8_t> bits(static_cast<size_t>(r) * r, 0);

	std::vector<uint8_t> row1(r, 0);
	for (uint32_t q = 0; q < r; ++q) {
		const auto c = detail::mod_coeffs(1, q, r);
		row1[q] = detail::row_solvable(c, r) ? 0 : 1;
	}
	std::copy(row1.begin(), row1.end(), bits.begin() + r);
	for (uint32_t p = 2; p < r; ++p) {
		const uint32_t inv = mod_inverse(p, r);
		uint8_t* row = bits.data() + static_cast<size_t>(p) * r;
		for (uint32_t q = 0; q < r; ++q)
			row[q] = row1[static_cast<uint64_t>(inv) * q % r];
	}
	return BitTable{r, pack_bits(bits)};
}

struct PrimeRecord {
	uint16_t prime = 0;
	uint32_t offset = 0;
};

inline constexpr char kIndexMagic[4] = {'C', 'U', 'P', 'Q'};
inline constexpr uint8_t kIndexVersion = 1;
inline constexpr size_t kIndexHeaderSize = 9;
inline constexpr size_t kIndexRecordSize = 6;

// Immutable, query-only collection of bit tables. Safe to share across
// threads once constructed.
class SieveSet {
public:
	SieveSet() = default;

	static SieveSet build(const std::vector<uint32_t>& primes)
	{
		SieveSet s;
		uint64_t offset = 0;
		uint32_t prev = 0;
		for (uint32_t r : primes) {
			if (r <= prev)
				throw std::invalid_argument("SieveSet::build: primes must be strictly increasing");
			prev = r;
			BitTable t = build_table(r);
			if (offset + t.bytes.size() > UINT32_MAX)
				throw std::overflow_error("SieveSet::build: table set exceeds 32-bit offset space");
			s.index_.push_back({static_cast<uint16_t>(r), static_cast<uint32_t>(offset)});
			s.tables_.insert(s.tables_.end(), t.bytes.begin(), t.bytes.end());
			offset += t.bytes.size();
		}
		return s;
	}

	// The canonical configuration: the 96 consecutive primes from 11 to 541.
	static SieveSet build_default() { return build(primes_in_range(11, 541)); }

	bool empty() const { return index_.empty(); }
	size_t prime_count() const { return index_.size(); }
	uint32_t prime_at(size_t rank) const { return index_.at(rank).prime; }
	const std::vector<PrimeRecord>& index() const { return index_; }
	const std::vector<uint8_t>& tables() const { return tables_; }

	std::optional<size_t> rank_of(uint32_t r) const
	{
		for (size_t i = 0; i < index_.size(); ++i)
			if (index_[i].prime == r) return i;
		return std::nullopt;
	}

	// Raw table bytes for one prime, for hot-loop probing.
	const uint8_t* table_data(size_t rank) const { return tables_.data() + index_.at(rank).offset; }

	// True iff Q_pq(t) = 0 has no solution mod the rank-th prime, hence no
	// integer solution at all.
	bool is_unsolvable(size_t rank, uint64_t p, uint64_t q) const
	{
		const PrimeRecord& rec = index_.at(rank);
		const uint32_t r = rec.prime;
		const size_t i = static_cast<size_t>(p % r) * r + static_cast<size_t>(q % r);
		return (tables_[rec.offset + (i >> 3)] >> (i & 7)) & 1;
	}

	BitTable table_at(size_t rank) const
	{
		const PrimeRecord& rec = index_.at(rank);
		const size_t n = table_byte_size(rec.prime);
		return BitTable{rec.prime,
		                std::vector<uint8_t>(tables_.begin() + rec.offset,
		                                     tables_.begin() + rec.offset + n)};
	}

	static SieveSet from_parts(std::vector<PrimeRecord> index, std::vector<uint8_t> tables)
	{
		SieveSet s;
		s.index_ = std::move(index);
		s.tables_ = std::move(tables);
		return s;
	}

private:
	std::vector<PrimeRecord> index_;
	std::vector<uint8_t> tables_;
};

inline std::vector<uint8_t> serialize_tables(const SieveSet& s) { return s.tables(); }

inline std::vector<uint8_t> serialize_index(const SieveSet& s)
{
	const auto& idx = s.index();
	std::vector<uint8_t> out;
	out.reserve(kIndexHeaderSize + kIndexRecordSize * idx.size());
	out.insert(out.end(), kIndexMagic, kIndexMagic + 4);
	out.push_back(kIndexVersion);
	const uint32_t n = static_cast<uint32_t>(idx.size());
	for (int b = 0; b < 4; ++b) out.push_back(uint8_t(n >> (8 * b)));
	uint64_t expect_offset = 0;
	for (const PrimeRecord& rec : idx) {
		if (rec.offset != expect_offset)
			throw FormatError("serialize_index: inconsistent offsets");
		expect_offset += table_byte_size(rec.prime);
		if (expect_offset > UINT32_MAX)
			throw std::overflow_error("serialize_index: cumulative size exceeds 2^32");
		out.push_back(uint8_t(rec.prime));
		out.push_back(uint8_t(rec.prime >> 8));
		for (int b = 0; b < 4; ++b) out.push_back(uint8_t(rec.offset >> (8 * b)));
	}
	return out;
}

inline SieveSet load_sieve(std::span<const uint8_t> tables, std::span<const uint8_t> index)
{
	if (index.size() < kIndexHeaderSize)
		throw FormatError("load_sieve: index truncated");
	if (std::memcmp(index.data(), kIndexMagic, 4) != 0)
		throw FormatError("load_sieve: bad index magic");
	if (index[4] != kIndexVersion)
		throw FormatError("load_sieve: unsupported index version");
	uint32_t n = 0;
	for (int b = 0; b < 4; ++b) n |= uint32_t(index[5 + b]) << (8 * b);
	if (index.size() != kIndexHeaderSize + kIndexRecordSize * static_cast<size_t>(n))
		throw FormatError("load_sieve: index length does not match record count");

	std::vector<PrimeRecord> recs;
	recs.reserve(n);
	uint64_t expect_offset = 0;
	uint32_t prev_prime = 0;
	for (uint32_t k = 0; k < n; ++k) {
		const uint8_t* rec = index.data() + kIndexHeaderSize + kIndexRecordSize * k;
		const uint16_t prime = uint16_t(rec[0]) | uint16_t(rec[1]) << 8;
		uint32_t offset = 0;
		for (int b = 0; b < 4; ++b) offset |= uint32_t(rec[2 + b]) << (8 * b);
		if (!is_prime_u32(prime) || prime >= kModulusLimit)
			throw FormatError("load_sieve: index entry is not an admissible prime");
		if (prime <= prev_prime)
			throw FormatError("load_sieve: primes not strictly increasing");
		if (offset != expect_offset)
			throw FormatError("load_sieve: offset mismatch");
		prev_prime = prime;
		expect_offset += table_byte_size(prime);
		if (expect_offset > UINT32_MAX)
			throw FormatError("load_sieve: cumulative size exceeds 2^32");
		recs.push_back({prime, offset});
	}
	if (tables.size() != expect_offset)
		throw FormatError("load_sieve: tables stream length does not match index");
	return SieveSet::from_parts(std::move(recs),
	                            std::vector<uint8_t>(tables.begin(), tables.end()));
}

// Text rendering of one table, rows labeled by the p residue. Matches the
// row/column orientation of the binary layout.
inline std::string dump_table_text(const SieveSet& s, uint32_t r)
{
	auto rank = s.rank_of(r);
	if (!rank) throw std::invalid_argument("dump_table_text: prime not in set");
	const BitTable t = s.table_at(*rank);
	const auto bits = unpack_bits(t.bytes, r);
	std::ostringstream os;
	os << "r=" << r << '\n';
	for (uint32_t p = 0; p < r; ++p) {
		os << p << ": ";
		for (uint32_t q = 0; q < r; ++q)
			os << char('0' + bits[static_cast<size_t>(p) * r + q]);
		os << '\n';
	}
	return os.str();
}

inline void write_bytes(const std::string& path, const std::vector<uint8_t>& data)
{
	std::ofstream f(path, std::ios::binary | std::ios::trunc);
	if (!f) throw std::runtime_error("cannot open for writing: " + path);
	f.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
	if (!f) throw std::runtime_error("write failed: " + path);
}

inline std::vector<uint8_t> read_bytes(const std::string& path)
{
	std::ifstream f(path, std::ios::binary);
	if (!f) throw std::runtime_error("cannot open: " + path);
	f.seekg(0, std::ios::end);
	const std::streamoff len = f.tellg();
	f.seekg(0);
	std::vector<uint8_t> data(static_cast<size_t>(len));
	f.read(reinterpret_cast<char*>(data.data()), len);
	if (!f) throw std::runtime_error("read failed: " + path);
	return data;
}

inline void save_sieve_files(const SieveSet& s, const std::string& tables_path,
                             const std::string& index_path)
{
	write_bytes(tables_path, serialize_tables(s));
	write_bytes(index_path, serialize_index(s));
}

inline SieveSet load_sieve_files(const std::string& tables_path, const std::string& index_path)
{
	const auto tables = read_bytes(tables_path);
	const auto index = read_bytes(index_path);
	return load_sieve(tables, index);
}

} // namespace cuboid
