#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <random>

#include "cuboid/sievetable.hpp"

using namespace cuboid;

// Known 11 x 11 unsolvability matrix, rows indexed by the p residue.
static const uint8_t kU11[11][11] = {
    {0,0,0,0,0,0,0,0,0,0,0},
    {0,0,1,1,1,1,1,1,1,1,0},
    {0,1,0,1,1,1,1,1,1,0,1},
    {0,1,1,0,1,1,1,1,0,1,1},
    {0,1,1,1,0,1,1,0,1,1,1},
    {0,1,1,1,1,0,0,1,1,1,1},
    {0,1,1,1,1,0,0,1,1,1,1},
    {0,1,1,1,0,1,1,0,1,1,1},
    {0,1,1,0,1,1,1,1,0,1,1},
    {0,1,0,1,1,1,1,1,1,0,1},
    {0,0,1,1,1,1,1,1,1,1,0},
};

static const uint8_t kU11Bytes[16] = {0x00, 0xE0, 0x9F, 0x7E, 0xED, 0xED, 0x76, 0xCF,
                                      0x7B, 0xDE, 0xED, 0xF6, 0xD6, 0x2F, 0xFF, 0x00};

TEST_CASE("table for r=11 reproduces the reference matrix")
{
	const BitTable t = build_table(11);
	REQUIRE(t.bytes.size() == 16);
	for (uint32_t p = 0; p < 11; ++p)
		for (uint32_t q = 0; q < 11; ++q)
			REQUIRE(t.bit(p, q) == (kU11[p][q] != 0));
	for (size_t i = 0; i < 16; ++i) CHECK(t.bytes[i] == kU11Bytes[i]);
}

TEST_CASE("tables for r in {2,3,5,7} are identically zero")
{
	for (uint32_t r : {2u, 3u, 5u, 7u}) {
		const BitTable t = build_table(r);
		REQUIRE(t.bytes.size() == table_byte_size(r));
		for (uint8_t b : t.bytes) CHECK(b == 0);
	}
	CHECK(build_table(2).bytes.size() == 1);
}

TEST_CASE("builder matches the brute-force oracle byte for byte")
{
	for (uint32_t r : primes_in_range(2, 97)) {
		const BitTable fast = build_table(r);
		const BitTable slow = build_table_oracle(r);
		REQUIRE(fast.bytes == slow.bytes);
	}
}

TEST_CASE("builder rejects bad moduli")
{
	CHECK_THROWS_AS(build_table(1), std::invalid_argument);
	CHECK_THROWS_AS(build_table(4), std::invalid_argument);
	CHECK_THROWS_AS(build_table(9697), std::invalid_argument);
	CHECK_THROWS_AS(build_table_oracle(15), std::invalid_argument);
}

TEST_CASE("zero margins: row 0 and column 0 are always solvable")
{
	for (uint32_t r : primes_in_range(2, 97)) {
		const BitTable t = build_table_oracle(r);
		for (uint32_t i = 0; i < r; ++i) {
			REQUIRE_FALSE(t.bit(0, i));
			REQUIRE_FALSE(t.bit(i, 0));
		}
	}
	const BitTable big = build_table(541);
	for (uint32_t i = 0; i < 541; ++i) {
		REQUIRE_FALSE(big.bit(0, i));
		REQUIRE_FALSE(big.bit(i, 0));
	}
}

TEST_CASE("tables are symmetric (observed property, oracle-verified)")
{
	for (uint32_t r : primes_in_range(2, 97)) {
		const BitTable t = build_table_oracle(r);
		for (uint32_t a = 0; a < r; ++a)
			for (uint32_t b = a + 1; b < r; ++b)
				REQUIRE(t.bit(a, b) == t.bit(b, a));
	}
}

TEST_CASE("projective scaling: u(a,b) = u(la, lb) for l != 0")
{
	for (uint32_t r : primes_in_range(2, 97)) {
		const BitTable t = build_table_oracle(r);
		for (uint32_t a = 1; a < r; ++a)
			for (uint32_t b = 0; b < r; ++b)
				for (uint32_t l = 2; l < r; ++l)
					REQUIRE(t.bit(a, b) ==
					        t.bit(uint32_t(uint64_t(l) * a % r), uint32_t(uint64_t(l) * b % r)));
	}
}

TEST_CASE("bit packing round trip and padding validation")
{
	std::mt19937 rng(99);
	for (uint32_t r : {2u, 3u, 11u, 13u, 29u}) {
		std::vector<uint8_t> bits(static_cast<size_t>(r) * r);
		for (auto& b : bits) b = rng() & 1;
		const auto packed = pack_bits(bits);
		REQUIRE(packed.size() == table_byte_size(r));
		CHECK(unpack_bits(packed, r) == bits);
	}

	// first bytes of the r=11 layout, from the reference matrix
	std::vector<uint8_t> flat;
	for (auto& row : kU11) flat.insert(flat.end(), row, row + 11);
	const auto packed = pack_bits(flat);
	CHECK(packed[0] == 0x00);
	CHECK(packed[1] == 0xE0);
	CHECK(packed[2] == 0x9F);
	CHECK(packed[14] == 0xFF);
	CHECK(packed[15] == 0x00);

	auto corrupt = packed;
	corrupt[15] |= 0x80; // pad bit
	CHECK_THROWS_AS(unpack_bits(corrupt, 11), FormatError);
	CHECK_THROWS_AS(unpack_bits(packed, 12), FormatError); // wrong length for r
}

TEST_CASE("default set shape and serialization sizes")
{
	const SieveSet s = SieveSet::build_default();
	REQUIRE(s.prime_count() == 96);
	CHECK(s.prime_at(0) == 11);
	CHECK(s.prime_at(95) == 541);
	const auto tables = serialize_tables(s);
	const auto index = serialize_index(s);
	CHECK(tables.size() == 1048164); // sum of ceil(r^2/8) over the 96 primes
	CHECK(index.size() == 585);      // 9-byte header + 96 packed records
}

TEST_CASE("serialize/load round trip is bit exact")
{
	const SieveSet s = SieveSet::build({11, 13, 17});
	const auto tables = serialize_tables(s);
	const auto index = serialize_index(s);
	const SieveSet back = load_sieve(tables, index);
	CHECK(back.index().size() == s.index().size());
	CHECK(back.tables() == s.tables());
	CHECK(serialize_index(back) == index);
}

TEST_CASE("empty set serializes to header-only index")
{
	const SieveSet s = SieveSet::build({});
	CHECK(serialize_tables(s).empty());
	const auto index = serialize_index(s);
	CHECK(index.size() == kIndexHeaderSize);
	const SieveSet back = load_sieve({}, index);
	CHECK(back.empty());
}

TEST_CASE("load rejects corrupt streams")
{
	const SieveSet s = SieveSet::build({11, 13});
	auto tables = serialize_tables(s);
	auto index = serialize_index(s);

	SECTION("truncated tables")
	{
		tables.pop_back();
		CHECK_THROWS_AS(load_sieve(tables, index), FormatError);
	}
	SECTION("truncated index")
	{
		index.pop_back();
		CHECK_THROWS_AS(load_sieve(tables, index), FormatError);
	}
	SECTION("bad magic")
	{
		index[0] ^= 0xFF;
		CHECK_THROWS_AS(load_sieve(tables, index), FormatError);
	}
	SECTION("bad version")
	{
		index[4] = 9;
		CHECK_THROWS_AS(load_sieve(tables, index), FormatError);
	}
	SECTION("non-prime entry")
	{
		index[kIndexHeaderSize] = 12; // 11 -> 12
		CHECK_THROWS_AS(load_sieve(tables, index), FormatError);
	}
	SECTION("offset mismatch")
	{
		index[kIndexHeaderSize + kIndexRecordSize + 2] ^= 1;
		CHECK_THROWS_AS(load_sieve(tables, index), FormatError);
	}
	SECTION("non-monotone primes")
	{
		// swap the two records
		std::vector<uint8_t> swapped = index;
		for (size_t i = 0; i < kIndexRecordSize; ++i) {
			swapped[kIndexHeaderSize + i] = index[kIndexHeaderSize + kIndexRecordSize + i];
			swapped[kIndexHeaderSize + kIndexRecordSize + i] = index[kIndexHeaderSize + i];
		}
		CHECK_THROWS_AS(load_sieve(tables, swapped), FormatError);
	}
}

TEST_CASE("is_unsolvable reduces the pair and reads the stored bit")
{
	const SieveSet s = SieveSet::build({11});
	CHECK(s.is_unsolvable(0, 1, 2));
	CHECK_FALSE(s.is_unsolvable(0, 12, 21)); // residues (1, 10)
	CHECK_FALSE(s.is_unsolvable(0, 22, 7));  // residue row 0
	CHECK(s.is_unsolvable(0, 12, 13));       // residues (1, 2)
	CHECK_THROWS_AS(s.is_unsolvable(3, 1, 2), std::out_of_range);
}

TEST_CASE("text dump matches the reference matrix")
{
	const SieveSet s = SieveSet::build({2, 11});
	const std::string text = dump_table_text(s, 11);
	std::istringstream is(text);
	std::string line;
	std::getline(is, line);
	CHECK(line == "r=11");
	for (uint32_t p = 0; p < 11; ++p) {
		REQUIRE(std::getline(is, line));
		const auto colon = line.find(": ");
		REQUIRE(colon != std::string::npos);
		const std::string digits = line.substr(colon + 2);
		REQUIRE(digits.size() == 11);
		for (uint32_t q = 0; q < 11; ++q)
			CHECK(digits[q] == char('0' + kU11[p][q]));
	}

	const std::string z = dump_table_text(s, 2);
	CHECK(z == "r=2\n0: 00\n1: 00\n");
	CHECK_THROWS_AS(dump_table_text(s, 13), std::invalid_argument);
}

TEST_CASE("file round trip")
{
	namespace fs = std::filesystem;
	const auto dir = fs::temp_directory_path() / "cuboid_sievetable_test";
	fs::create_directories(dir);
	const auto tables_path = (dir / "tables.bin").string();
	const auto index_path = (dir / "primes.bin").string();

	const SieveSet s = SieveSet::build({11, 13, 17, 19});
	save_sieve_files(s, tables_path, index_path);
	const SieveSet back = load_sieve_files(tables_path, index_path);
	CHECK(back.tables() == s.tables());
	CHECK(back.prime_count() == 4);

	CHECK_THROWS_AS(load_sieve_files((dir / "missing.bin").string(), index_path),
	                std::runtime_error);
	fs::remove_all(dir);
}

TEST_CASE("generation is deterministic")
{
	const SieveSet a = SieveSet::build({11, 13, 97});
	const SieveSet b = SieveSet::build({11, 13, 97});
	CHECK(a.tables() == b.tables());
	CHECK(serialize_index(a) == serialize_index(b));
}

TEST_CASE("build validates the prime list")
{
	CHECK_THROWS_AS(SieveSet::build({11, 11}), std::invalid_argument);
	CHECK_THROWS_AS(SieveSet::build({13, 11}), std::invalid_argument);
	CHECK_THROWS_AS(SieveSet::build({11, 14}), std::invalid_argument);
	CHECK_THROWS_AS(SieveSet::build({9697}), std::invalid_argument);
}
