// Fixed-width 100-byte record codec and partition file streams.
//
// Layout (offsets in bytes):
//   0..29   event id: 12 lowercase hex chars of the node hash + 18-digit sequence
//   30      '|'
//   31..49  timestamp "YYYY-MM-DD HH:MM:SS" (UTC)
//   50      '|'
//   51..70  site id, 20 digits
//   71      '|'
//   72..96  entity id, 25 digits
//   97      '|'
//   98      mark flag '0' / '1'
//   99      '\n'
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "malstone/model.hpp"

namespace malstone {

inline constexpr std::size_t kRecordSize = 100;
using RecordBytes = std::array<char, kRecordSize>;

namespace layout {
inline constexpr std::size_t kNodeHash = 0, kNodeHashLen = 12;
inline constexpr std::size_t kSeq = 12, kSeqLen = 18;
inline constexpr std::size_t kSep1 = 30;
inline constexpr std::size_t kTime = 31, kTimeLen = 19;
inline constexpr std::size_t kSep2 = 50;
inline constexpr std::size_t kSite = 51, kSiteLen = 20;
inline constexpr std::size_t kSep3 = 71;
inline constexpr std::size_t kEntity = 72, kEntityLen = 25;
inline constexpr std::size_t kSep4 = 97;
inline constexpr std::size_t kMark = 98;
inline constexpr std::size_t kNewline = 99;
}  // namespace layout

/// Throws ContractViolation if a field does not fit its width.
void encode_record(const EventRecord& r, std::span<char, kRecordSize> out);
RecordBytes encode_record(const EventRecord& r);

/// Throws MalformedRecord.
EventRecord decode_record(std::span<const char> line);

/// Incremental 64-bit FNV-1a.
class Fnv1a64 {
 public:
  static constexpr std::uint64_t kOffsetBasis = 0xcbf29ce484222325ULL;
  static constexpr std::uint64_t kPrime = 0x100000001b3ULL;

  void update(std::span<const char> bytes) {
    for (char c : bytes) {
      state_ ^= static_cast<unsigned char>(c);
      state_ *= kPrime;
    }
  }
  std::uint64_t digest() const { return state_; }

 private:
  std::uint64_t state_ = kOffsetBasis;
};

std::string hex64(std::uint64_t v);

struct PartitionRef {
  std::uint32_t node_index = 0;
  std::uint32_t part_index = 0;
  std::filesystem::path path;

  /// `<root>/node-XXXX/part-YYYY.dat`
  static PartitionRef under(const std::filesystem::path& root, std::uint32_t node, std::uint32_t part);
  /// Path relative to the dataset root.
  std::string relative_path() const;
};

std::string node_name(std::uint32_t node_index);

/// Streams encoded records into a file. The file is removed unless finish() succeeds.
class PartitionWriter {
 public:
  explicit PartitionWriter(std::filesystem::path path);
  PartitionWriter(const PartitionWriter&) = delete;
  PartitionWriter& operator=(const PartitionWriter&) = delete;
  ~PartitionWriter();

  void append(const EventRecord& r);
  void append_encoded(std::span<const char, kRecordSize> bytes);
  /// Flushes and closes; returns the record count.
  std::uint64_t finish();

  std::uint64_t count() const { return count_; }
  std::uint64_t checksum() const { return hash_.digest(); }
  const std::filesystem::path& path() const { return path_; }

 private:
  void flush_buffer();

  std::filesystem::path path_;
  std::ofstream out_;
  std::vector<char> buffer_;
  std::uint64_t count_ = 0;
  Fnv1a64 hash_;
  bool finished_ = false;
};

/// Bounded-memory sequential reader. Malformed lines raise with their byte offset.
class PartitionScanner {
 public:
  explicit PartitionScanner(std::filesystem::path path);
  /// Scans at most max_records records starting at record index first.
  PartitionScanner(std::filesystem::path path, std::uint64_t first, std::uint64_t max_records);

  /// False at end of file.
  bool next(EventRecord& out);
  /// Raw line access; the span is valid until the next call.
  bool next_raw(std::span<const char, kRecordSize>& out);

  std::uint64_t record_count() const { return total_; }
  /// Absolute byte offset of the next record.
  std::uint64_t byte_offset() const { return (first_ + index_) * kRecordSize; }

 private:
  bool fill();

  std::filesystem::path path_;
  std::ifstream in_;
  std::vector<char> buffer_;
  std::size_t buf_pos_ = 0, buf_len_ = 0;
  std::uint64_t first_ = 0;
  std::uint64_t total_ = 0;
  std::uint64_t index_ = 0;
};

struct PartitionStats {
  std::uint64_t records = 0;
  std::uint64_t checksum = 0;
};

PartitionStats write_partition(const PartitionRef& ref, std::span<const EventRecord> records);
std::vector<EventRecord> read_partition(const PartitionRef& ref);
void scan_partition(const PartitionRef& ref, const std::function<void(const EventRecord&)>& visit);

/// FNV-1a 64 over the file's bytes.
std::uint64_t file_checksum(const std::filesystem::path& path);

}  // namespace malstone
