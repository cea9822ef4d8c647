#include <gtest/gtest.h>

#include <fstream>
#include <random>

#include "malstone/codec.hpp"
#include "malstone/dataset.hpp"
#include "support/oracles.hpp"

using namespace malstone;

namespace {

EventRecord sample_record(bool flag) {
  EventRecord r;
  r.event_node = 0x0123456789abULL;
  r.event_seq = 42;
  r.timestamp = to_timestamp({{2009, 1, 1}, 0, 0, 0});
  r.site_id = 7;
  r.entity_id = 123456789;
  r.mark_flag = flag;
  return r;
}

std::string as_string(const RecordBytes& b) { return {b.begin(), b.end()}; }

}  // namespace

TEST(Codec, LayoutOfOneRecord) {
  const auto line = as_string(encode_record(sample_record(false)));
  ASSERT_EQ(line.size(), 100u);
  EXPECT_EQ(line,
            "0123456789ab000000000000000042|2009-01-01 00:00:00|00000000000000000007|0000000000000000123456789|0\n");
  EXPECT_EQ(line[layout::kMark], '0');
  EXPECT_EQ(std::count(line.begin(), line.end(), '|'), 4);
  EXPECT_EQ(line.back(), '\n');
  EXPECT_EQ(as_string(encode_record(sample_record(true)))[98], '1');
}

TEST(Codec, RoundTripMillionRandomRecords) {
  std::mt19937_64 g(99);
  for (int i = 0; i < 1'000'000; ++i) {
    const EventRecord r = oracle::random_record(g);
    const auto bytes = encode_record(r);
    ASSERT_EQ(bytes.size(), 100u);
    ASSERT_EQ(bytes[99], '\n');
    ASSERT_EQ(decode_record(bytes), r);
  }
}

TEST(Codec, EncodeRejectsOutOfRangeFields) {
  auto r = sample_record(false);
  r.site_id = kSiteIdLimit;
  EXPECT_THROW(encode_record(r), ContractViolation);
  r = sample_record(false);
  r.entity_id = kEntityIdLimit;
  EXPECT_THROW(encode_record(r), ContractViolation);
  r = sample_record(false);
  r.event_node = kMaxEventNode + 1;
  EXPECT_THROW(encode_record(r), ContractViolation);
  r = sample_record(false);
  r.event_seq = kEventSeqLimit;
  EXPECT_THROW(encode_record(r), ContractViolation);
}

TEST(Codec, DecodeRejectsMalformedLines) {
  const auto good = as_string(encode_record(sample_record(false)));
  auto mutate = [&](std::size_t at, char c) {
    auto s = good;
    s[at] = c;
    return s;
  };
  for (std::size_t sep : {layout::kSep1, layout::kSep2, layout::kSep3, layout::kSep4})
    EXPECT_THROW(decode_record(mutate(sep, ',')), MalformedRecord) << sep;
  EXPECT_THROW(decode_record(mutate(layout::kMark, '2')), MalformedRecord);
  EXPECT_THROW(decode_record(mutate(layout::kNewline, ' ')), MalformedRecord);
  EXPECT_THROW(decode_record(mutate(3, 'G')), MalformedRecord);
  EXPECT_THROW(decode_record(mutate(3, 'A')), MalformedRecord);
  EXPECT_THROW(decode_record(mutate(20, 'x')), MalformedRecord);
  EXPECT_THROW(decode_record(mutate(60, '-')), MalformedRecord);
  EXPECT_THROW(decode_record(mutate(80, ' ')), MalformedRecord);
  auto bad_date = good;
  bad_date.replace(layout::kTime, 19, "2009-02-30 00:00:00");
  EXPECT_THROW(decode_record(bad_date), MalformedRecord);
  EXPECT_THROW(decode_record(std::string_view(good).substr(0, 99)), MalformedRecord);
  EXPECT_THROW(decode_record(good + "x"), MalformedRecord);
}

TEST(Codec, RandomMutationsAreRejected) {
  std::mt19937_64 g(7);
  const auto good = as_string(encode_record(oracle::random_record(g)));
  const std::string junk = "x-: ,|/\nAZ";
  int tried = 0;
  for (int i = 0; i < 2000; ++i) {
    std::size_t at = g() % 100;
    char c = junk[g() % junk.size()];
    auto s = good;
    s[at] = c;
    // skip mutations that spell another valid record
    const bool sep = at == 30 || at == 50 || at == 71 || at == 97;
    const bool punct = at == 35 || at == 38 || at == 41 || at == 44 || at == 47;
    if (s == good || (sep && c == '|') || (punct && (c == '-' || c == ':' || c == ' '))) continue;
    ++tried;
    ASSERT_THROW(decode_record(s), MalformedRecord) << "offset " << at << " byte " << int(c);
  }
  EXPECT_GT(tried, 1000);
}

TEST(Fnv, IncrementalMatchesOneShot) {
  Fnv1a64 h;
  EXPECT_EQ(h.digest(), 0xcbf29ce484222325ULL);
  h.update(std::string_view("foo"));
  h.update(std::string_view("bar"));
  EXPECT_EQ(h.digest(), oracle::fnv1a64("foobar"));
  EXPECT_EQ(oracle::fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(oracle::fnv1a64("foobar"), 0x85944171f73967e8ULL);
  EXPECT_EQ(hex64(0xabcULL), "0000000000000abc");
}

class PartitionFiles : public ::testing::Test {
 protected:
  std::filesystem::path dir = oracle::fresh_dir(::testing::UnitTest::GetInstance()->current_test_info()->name());
};

TEST_F(PartitionFiles, ThousandRecordsIsHundredThousandBytes) {
  std::mt19937_64 g(3);
  std::vector<EventRecord> recs;
  for (int i = 0; i < 1000; ++i) recs.push_back(oracle::random_record(g));
  const auto ref = PartitionRef::under(dir, 2, 5);
  EXPECT_EQ(ref.relative_path(), "node-0002/part-0005.dat");
  const auto stats = write_partition(ref, recs);
  EXPECT_EQ(stats.records, 1000u);
  EXPECT_EQ(std::filesystem::file_size(ref.path), 100'000u);
  EXPECT_EQ(stats.checksum, oracle::file_fnv1a64(ref.path));
  EXPECT_EQ(file_checksum(ref.path), stats.checksum);
  EXPECT_EQ(read_partition(ref), recs);
}

TEST_F(PartitionFiles, EmptyStream) {
  const auto ref = PartitionRef::under(dir, 0, 0);
  const auto stats = write_partition(ref, {});
  EXPECT_EQ(stats.records, 0u);
  EXPECT_EQ(std::filesystem::file_size(ref.path), 0u);
  EXPECT_TRUE(read_partition(ref).empty());
}

TEST_F(PartitionFiles, TruncatedFileRejected) {
  const auto path = dir / "bad.dat";
  {
    std::ofstream out(path, std::ios::binary);
    out << std::string(150, '0');
  }
  EXPECT_THROW(read_partition({0, 0, path}), TruncatedFile);
}

TEST_F(PartitionFiles, MalformedRecordNamesOffset) {
  std::vector<EventRecord> recs(5, sample_record(false));
  const auto ref = PartitionRef::under(dir, 0, 0);
  write_partition(ref, recs);
  {
    std::fstream f(ref.path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(300 + 30);
    f.put('#');
  }
  try {
    read_partition(ref);
    FAIL() << "expected MalformedRecord";
  } catch (const MalformedRecord& e) {
    EXPECT_NE(std::string(e.what()).find("byte offset 300"), std::string::npos) << e.what();
  }
}

TEST_F(PartitionFiles, MissingFileIsIoError) { EXPECT_THROW(read_partition({0, 0, dir / "nope.dat"}), IoError); }

TEST_F(PartitionFiles, ScannerRangeAndStreaming) {
  std::mt19937_64 g(4);
  std::vector<EventRecord> recs;
  for (int i = 0; i < 5000; ++i) recs.push_back(oracle::random_record(g));
  const auto ref = PartitionRef::under(dir, 1, 0);
  write_partition(ref, recs);
  PartitionScanner s(ref.path, 1200, 700);
  EventRecord r;
  std::size_t i = 1200;
  while (s.next(r)) ASSERT_EQ(r, recs[i++]);
  EXPECT_EQ(i, 1900u);
}

TEST_F(PartitionFiles, DatasetManifestRoundTrip) {
  std::mt19937_64 g(5);
  std::vector<std::vector<EventRecord>> per_node(3);
  for (int n = 0; n < 3; ++n)
    for (int i = 0; i < 100 * (n + 1); ++i) per_node[n].push_back(oracle::random_record(g));
  const auto ds = write_dataset(dir, per_node);
  EXPECT_EQ(ds.total_records(), 600u);
  EXPECT_EQ(ds.manifest().total_bytes(), 60'000u);
  EXPECT_EQ(ds.node_count(), 3u);
  const auto again = Dataset::open(dir);
  ASSERT_EQ(again.manifest().partitions.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(again.manifest().partitions[i].records, per_node[i].size());
    EXPECT_EQ(again.manifest().partitions[i].checksum, oracle::file_fnv1a64(again.partitions()[i].path));
  }
  auto all = load_records(again);
  EXPECT_EQ(all.size(), 600u);
  EXPECT_EQ(ds.head(1).total_records(), 100u);
}

TEST(ConfigJson, RoundTrip) {
  GenConfig cfg;
  cfg.nodes = 7;
  cfg.master_seed = 0xfedcba9876543210ULL;
  cfg.p_mark = 0.3;
  cfg.period_start = {2010, 3, 4};
  cfg.background_mark_rate = 0.001;
  EXPECT_EQ(config_from_json(config_to_json(cfg)), cfg);
}
