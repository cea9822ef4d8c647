#include "malstone/codec.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <cstring>
#include <system_error>

namespace malstone {

namespace {

constexpr char kHexDigits[] = "0123456789abcdef";

void put_decimal(char* dst, std::size_t width, Id v) {
  for (std::size_t i = width; i-- > 0;) {
    dst[i] = static_cast<char>('0' + static_cast<int>(v % 10));
    v /= 10;
  }
}

void put_decimal64(char* dst, std::size_t width, std::uint64_t v) {
  for (std::size_t i = width; i-- > 0;) {
    dst[i] = static_cast<char>('0' + v % 10);
    v /= 10;
  }
}

bool get_decimal(const char* src, std::size_t width, Id& out) {
  Id v = 0;
  for (std::size_t i = 0; i < width; ++i) {
    const char c = src[i];
    if (c < '0' || c > '9') return false;
    v = v * 10 + static_cast<unsigned>(c - '0');
  }
  out = v;
  return true;
}

bool get_decimal64(const char* src, std::size_t width, std::uint64_t& out) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < width; ++i) {
    const char c = src[i];
    if (c < '0' || c > '9') return false;
    v = v * 10 + static_cast<std::uint64_t>(c - '0');
  }
  out = v;
  return true;
}

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  return -1;
}

void put_timestamp(char* dst, Timestamp t) {
  const CivilTime c = to_civil(t);
  if (c.date.year < 0 || c.date.year > 9999)
    throw ContractViolation("timestamp year outside 0000..9999");
  put_decimal64(dst, 4, static_cast<std::uint64_t>(c.date.year));
  dst[4] = '-';
  put_decimal64(dst + 5, 2, c.date.month);
  dst[7] = '-';
  put_decimal64(dst + 8, 2, c.date.day);
  dst[10] = ' ';
  put_decimal64(dst + 11, 2, c.hour);
  dst[13] = ':';
  put_decimal64(dst + 14, 2, c.minute);
  dst[16] = ':';
  put_decimal64(dst + 17, 2, c.second);
}

[[noreturn]] void malformed(const char* what) { throw MalformedRecord(what); }

}  // namespace

void encode_record(const EventRecord& r, std::span<char, kRecordSize> out) {
  using namespace layout;
  if (r.event_node > kMaxEventNode) throw ContractViolation("event_node exceeds 48 bits");
  if (r.event_seq >= kEventSeqLimit) throw ContractViolation("event_seq exceeds 18 digits");
  if (r.site_id >= kSiteIdLimit) throw ContractViolation("site_id exceeds 20 digits");
  if (r.entity_id >= kEntityIdLimit) throw ContractViolation("entity_id exceeds 25 digits");
  char* p = out.data();
  std::uint64_t h = r.event_node;
  for (std::size_t i = kNodeHashLen; i-- > 0;) {
    p[kNodeHash + i] = kHexDigits[h & 0xf];
    h >>= 4;
  }
  put_decimal64(p + kSeq, kSeqLen, r.event_seq);
  p[kSep1] = '|';
  put_timestamp(p + kTime, r.timestamp);
  p[kSep2] = '|';
  put_decimal(p + kSite, kSiteLen, r.site_id);
  p[kSep3] = '|';
  put_decimal(p + kEntity, kEntityLen, r.entity_id);
  p[kSep4] = '|';
  p[kMark] = r.mark_flag ? '1' : '0';
  p[kNewline] = '\n';
}

RecordBytes encode_record(const EventRecord& r) {
  RecordBytes out;
  encode_record(r, out);
  return out;
}

EventRecord decode_record(std::span<const char> line) {
  using namespace layout;
  if (line.size() != kRecordSize) malformed("record is not 100 bytes");
  const char* p = line.data();
  if (p[kSep1] != '|' || p[kSep2] != '|' || p[kSep3] != '|' || p[kSep4] != '|')
    malformed("separator missing");
  if (p[kNewline] != '\n') malformed("record not newline-terminated");
  EventRecord r;
  std::uint64_t h = 0;
  for (std::size_t i = 0; i < kNodeHashLen; ++i) {
    const int v = hex_value(p[kNodeHash + i]);
    if (v < 0) malformed("node hash is not lowercase hex");
    h = (h << 4) | static_cast<std::uint64_t>(v);
  }
  r.event_node = h;
  if (!get_decimal64(p + kSeq, kSeqLen, r.event_seq)) malformed("event sequence is not decimal");
  auto ts = parse_timestamp({p + kTime, kTimeLen});
  if (!ts) malformed("invalid timestamp");
  r.timestamp = *ts;
  if (!get_decimal(p + kSite, kSiteLen, r.site_id)) malformed("site id is not decimal");
  if (!get_decimal(p + kEntity, kEntityLen, r.entity_id)) malformed("entity id is not decimal");
  switch (p[kMark]) {
    case '0': r.mark_flag = false; break;
    case '1': r.mark_flag = true; break;
    default: malformed("mark flag not 0 or 1");
  }
  return r;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string node_name(std::uint32_t node_index) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "node-%04u", node_index);
  return buf;
}

PartitionRef PartitionRef::under(const std::filesystem::path& root, std::uint32_t node, std::uint32_t part) {
  PartitionRef ref{node, part, {}};
  ref.path = root / ref.relative_path();
  return ref;
}

std::string PartitionRef::relative_path() const {
  char buf[48];
  std::snprintf(buf, sizeof buf, "node-%04u/part-%04u.dat", node_index, part_index);
  return buf;
}

// ---- PartitionWriter ----

namespace {
constexpr std::size_t kIoRecords = 1 << 14;  // 1.6 MB buffers
}

PartitionWriter::PartitionWriter(std::filesystem::path path) : path_(std::move(path)) {
  std::error_code ec;
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path(), ec);
  if (ec) throw IoError(path_.parent_path().string() + ": " + ec.message());
  out_.open(path_, std::ios::binary | std::ios::trunc);
  if (!out_) throw IoError(path_.string() + ": cannot open for writing");
  buffer_.reserve(kIoRecords * kRecordSize);
}

PartitionWriter::~PartitionWriter() {
  if (!finished_) {
    out_.close();
    std::error_code ec;
    std::filesystem::remove(path_, ec);
  }
}

void PartitionWriter::append(const EventRecord& r) {
  RecordBytes bytes;
  encode_record(r, bytes);
  append_encoded(bytes);
}

void PartitionWriter::append_encoded(std::span<const char, kRecordSize> bytes) {
  hash_.update(bytes);
  buffer_.insert(buffer_.end(), bytes.begin(), bytes.end());
  ++count_;
  if (buffer_.size() >= kIoRecords * kRecordSize) flush_buffer();
}

void PartitionWriter::flush_buffer() {
  out_.write(buffer_.data(), static_cast<std::streamsize>(buffer_.size()));
  if (!out_) throw IoError(path_.string() + ": write failed");
  buffer_.clear();
}

std::uint64_t PartitionWriter::finish() {
  flush_buffer();
  out_.close();
  if (!out_) throw IoError(path_.string() + ": close failed");
  finished_ = true;
  return count_;
}

// ---- PartitionScanner ----

PartitionScanner::PartitionScanner(std::filesystem::path path)
    : PartitionScanner(std::move(path), 0, std::numeric_limits<std::uint64_t>::max()) {}

PartitionScanner::PartitionScanner(std::filesystem::path path, std::uint64_t first, std::uint64_t max_records)
    : path_(std::move(path)), first_(first) {
  std::error_code ec;
  const auto size = std::filesystem::file_size(path_, ec);
  if (ec) throw IoError(path_.string() + ": " + ec.message());
  if (size % kRecordSize != 0)
    throw TruncatedFile(path_.string() + ": size " + std::to_string(size) + " is not a multiple of 100");
  const std::uint64_t records = size / kRecordSize;
  if (first > records) throw ContractViolation(path_.string() + ": scan starts past end of file");
  total_ = std::min(records - first, max_records);
  in_.open(path_, std::ios::binary);
  if (!in_) throw IoError(path_.string() + ": cannot open for reading");
  in_.seekg(static_cast<std::streamoff>(first * kRecordSize));
  buffer_.resize(kIoRecords * kRecordSize);
}

bool PartitionScanner::fill() {
  const std::uint64_t left = (total_ - index_) * kRecordSize;
  in_.read(buffer_.data(), static_cast<std::streamsize>(std::min<std::uint64_t>(buffer_.size(), left)));
  const auto got = static_cast<std::size_t>(in_.gcount());
  if (got % kRecordSize != 0) throw TruncatedFile(path_.string() + ": file changed during scan");
  if (got == 0 && !in_.eof()) throw IoError(path_.string() + ": read failed");
  buf_pos_ = 0;
  buf_len_ = got;
  return got > 0;
}

bool PartitionScanner::next_raw(std::span<const char, kRecordSize>& out) {
  if (index_ >= total_) return false;
  if (buf_pos_ >= buf_len_ && !fill()) throw TruncatedFile(path_.string() + ": unexpected end of file");
  out = std::span<const char, kRecordSize>(buffer_.data() + buf_pos_, kRecordSize);
  buf_pos_ += kRecordSize;
  ++index_;
  return true;
}

bool PartitionScanner::next(EventRecord& out) {
  std::span<const char, kRecordSize> raw(buffer_.data(), kRecordSize);
  if (!next_raw(raw)) return false;
  try {
    out = decode_record(raw);
  } catch (const MalformedRecord& e) {
    throw MalformedRecord(path_.string() + " at byte offset " + std::to_string(byte_offset() - kRecordSize) +
                          ": " + e.what());
  }
  return true;
}

PartitionStats write_partition(const PartitionRef& ref, std::span<const EventRecord> records) {
  PartitionWriter w(ref.path);
  for (const auto& r : records) w.append(r);
  PartitionStats stats;
  stats.checksum = w.checksum();
  stats.records = w.finish();
  return stats;
}

void scan_partition(const PartitionRef& ref, const std::function<void(const EventRecord&)>& visit) {
  PartitionScanner s(ref.path);
  EventRecord r;
  while (s.next(r)) visit(r);
}

std::vector<EventRecord> read_partition(const PartitionRef& ref) {
  std::vector<EventRecord> out;
  scan_partition(ref, [&](const EventRecord& r) { out.push_back(r); });
  return out;
}

std::uint64_t file_checksum(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string() + ": cannot open for reading");
  std::vector<char> buf(1 << 20);
  Fnv1a64 h;
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    h.update({buf.data(), static_cast<std::size_t>(in.gcount())});
  }
  if (in.bad()) throw IoError(path.string() + ": read failed");
  return h.digest();
}

}  // namespace malstone
