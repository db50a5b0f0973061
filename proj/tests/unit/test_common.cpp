#include <gtest/gtest.h>

#include <set>

#include "courseforge/common/csv.hpp"
#include "courseforge/common/digest.hpp"
#include "courseforge/common/error.hpp"
#include "courseforge/common/files.hpp"
#include "courseforge/common/rng.hpp"
#include "courseforge/common/stats.hpp"
#include "test_support.hpp"

using namespace courseforge;

// Reference digests computed with Python's hashlib.
TEST(Digest, KnownVectors) {
  EXPECT_EQ(to_hex(sha256("")), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(to_hex(sha256("abc")), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Digest, IncrementalMatchesOneShot) {
  Sha256 h;
  h.update("ab").update("c");
  EXPECT_EQ(to_hex(h.finish()), to_hex(sha256("abc")));
}

TEST(Digest, HexRoundTripAndErrors) {
  std::vector<std::uint8_t> bytes{0x00, 0x7f, 0xff, 0x10};
  EXPECT_EQ(to_hex(bytes), "007fff10");
  EXPECT_EQ(from_hex("007FFF10"), bytes);
  EXPECT_THROW(from_hex("abc"), Error);
  EXPECT_THROW(from_hex("zz"), Error);
}

TEST(Digest, Base64) {
  std::string raw("foobar\0\xff", 8);
  EXPECT_EQ(base64_encode(raw), "Zm9vYmFyAP8=");
  EXPECT_EQ(base64_decode("Zm9vYmFyAP8="), raw);
  EXPECT_EQ(base64_encode(std::string_view{}), "");
  EXPECT_EQ(base64_decode(""), "");
}

TEST(Digest, RandomBytesDiffer) {
  auto a = random_bytes(16), b = random_bytes(16);
  EXPECT_EQ(a.size(), 16u);
  EXPECT_NE(a, b);
}

TEST(Csv, ParsesQuotedFieldsAndCrlf) {
  auto rows = csv::parse("a,b\r\n\"x,1\",\"say \"\"hi\"\"\"\n\nlast,\n");
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[1].fields, (std::vector<std::string>{"x,1", "say \"hi\""}));
  EXPECT_EQ(rows[2].line, 4u);
  EXPECT_EQ(rows[2].fields, (std::vector<std::string>{"last", ""}));
}

TEST(Csv, QuotedNewlineCountsLines) {
  auto rows = csv::parse("h\n\"a\nb\"\nc\n");
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[1].fields[0], "a\nb");
  EXPECT_EQ(rows[2].line, 4u);
}

TEST(Csv, Errors) {
  EXPECT_THROW(csv::parse("a,\"b\n"), Error);
  EXPECT_THROW(csv::parse("a,b\"c\"\n"), Error);
}

TEST(Csv, JoinRoundTrip) {
  std::vector<std::string> fields{"plain", "with,comma", "q\"uote", ""};
  auto rows = csv::parse(csv::join(fields) + "\n");
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].fields, fields);
}

TEST(Stats, NearestRank) {
  std::vector<int> v{15, 20, 35, 40, 50};
  EXPECT_EQ(percentile_nearest_rank(v, 30), 20);
  EXPECT_EQ(percentile_nearest_rank(v, 40), 20);
  EXPECT_EQ(percentile_nearest_rank(v, 50), 35);
  EXPECT_EQ(percentile_nearest_rank(v, 100), 50);
  EXPECT_EQ(percentile_nearest_rank(std::vector<int>{}, 95), 0);
  EXPECT_DOUBLE_EQ(mean_of(v), 32.0);
}

TEST(Rng, DeterministicAndInRange) {
  SeededRng a(42), b(42);
  for (int i = 0; i < 100; ++i) ASSERT_EQ(a.next(), b.next());
  SeededRng r(1);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 1000; ++i) {
    auto x = r.below(7);
    ASSERT_LT(x, 7u);
    seen.insert(x);
    double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
  EXPECT_EQ(seen.size(), 7u);
}

TEST(Rng, ShuffleIsPermutation) {
  std::vector<int> v{1, 2, 3, 4, 5, 6};
  SeededRng r(9);
  r.shuffle(v);
  std::multiset<int> s(v.begin(), v.end());
  EXPECT_EQ(s, (std::multiset<int>{1, 2, 3, 4, 5, 6}));
}

TEST(Files, AtomicWriteAndRead) {
  cftest::TempDir dir;
  write_file_atomic(dir / "x.txt", "one");
  write_file_atomic(dir / "x.txt", "two");
  EXPECT_EQ(read_file(dir / "x.txt"), "two");
  EXPECT_THROW(read_file(dir / "missing"), Error);
}
