#include "malstone/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <unistd.h>
#include <unordered_map>

#include "malstone/codec.hpp"
#include "malstone/parallel.hpp"

namespace malstone {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

std::string_view to_string(Benchmark b) { return b == Benchmark::A ? "A" : "B"; }

std::string_view to_string(EngineKind e) {
  switch (e) {
    case EngineKind::MapReduce: return "mapreduce";
    case EngineKind::Bucketed: return "bucketed";
    case EngineKind::Reference: return "reference";
  }
  return "?";
}

std::optional<Benchmark> parse_benchmark(std::string_view s) {
  if (s == "A" || s == "a") return Benchmark::A;
  if (s == "B" || s == "b") return Benchmark::B;
  return std::nullopt;
}

std::optional<EngineKind> parse_engine(std::string_view s) {
  if (s == "mapreduce") return EngineKind::MapReduce;
  if (s == "bucketed") return EngineKind::Bucketed;
  if (s == "reference") return EngineKind::Reference;
  return std::nullopt;
}

MappedPair map_record(const EventRecord& r) { return {r.site_id, iso_week_bucket(r.timestamp), r.mark_flag}; }

std::uint32_t partition_for_site(Id site_id, std::uint32_t reducers) {
  if (reducers == 0) throw ContractViolation("reducer count must be at least 1");
  return static_cast<std::uint32_t>(site_id % reducers);
}

namespace {

void add_to_bucket(std::vector<BucketCount>& counts, const WeekBucket& b, std::uint64_t events,
                   std::uint64_t marked) {
  // newest buckets last
  for (auto it = counts.rbegin(); it != counts.rend(); ++it) {
    if (it->bucket == b) {
      it->events += events;
      it->marked += marked;
      return;
    }
  }
  counts.push_back({b, events, marked});
}

}  // namespace

SpmSeries cumulate(Id site_id, std::vector<BucketCount> counts) {
  std::sort(counts.begin(), counts.end(),
            [](const BucketCount& a, const BucketCount& b) { return bucket_precedes(a.bucket, b.bucket); });
  SpmSeries s{site_id, {}};
  s.entries.reserve(counts.size());
  std::uint64_t events = 0, marked = 0;
  for (const auto& c : counts) {
    if (c.events == 0) continue;
    events += c.events;
    marked += c.marked;
    s.entries.push_back({c.bucket, events, marked, static_cast<double>(marked) / static_cast<double>(events)});
  }
  return s;
}

SpmSeries reduce_site(Id site_id, std::span<const std::pair<WeekBucket, bool>> pairs) {
  if (pairs.empty()) throw ContractViolation("reduce_site: no pairs for site " + id_to_string(site_id));
  std::vector<BucketCount> counts;
  for (const auto& [bucket, flag] : pairs) add_to_bucket(counts, bucket, 1, flag ? 1 : 0);
  return cumulate(site_id, std::move(counts));
}

namespace {

// Aggregation policies. Counters merge in any order.
struct PolicyA {
  struct Counters {
    std::uint64_t events = 0;
    std::uint64_t marked = 0;
  };
  using Output = SpmScore;

  static void add(Counters& c, const EventRecord& r) {
    ++c.events;
    c.marked += r.mark_flag ? 1 : 0;
  }
  static void merge(Counters& into, Counters&& from) {
    into.events += from.events;
    into.marked += from.marked;
  }
  static Output finish(Id site, Counters&& c) {
    return {site, c.events, c.marked, static_cast<double>(c.marked) / static_cast<double>(c.events)};
  }
  static void store(EngineResult& r, std::vector<Output>&& out) { r.scores = std::move(out); }
};

struct PolicyB {
  using Counters = std::vector<BucketCount>;
  using Output = SpmSeries;

  static void add(Counters& c, const EventRecord& r) {
    const MappedPair p = map_record(r);
    add_to_bucket(c, p.bucket, 1, p.mark_flag ? 1 : 0);
  }
  static void merge(Counters& into, Counters&& from) {
    for (const auto& b : from) add_to_bucket(into, b.bucket, b.events, b.marked);
  }
  static Output finish(Id site, Counters&& c) { return cumulate(site, std::move(c)); }
  static void store(EngineResult& r, std::vector<Output>&& out) { r.series = std::move(out); }
};

template <class P>
using Table = std::unordered_map<Id, typename P::Counters, IdHash>;

template <class P>
void merge_tables(Table<P>& into, Table<P>&& from) {
  if (into.empty()) {
    into = std::move(from);
    return;
  }
  for (auto& [site, counters] : from) {
    auto [it, fresh] = into.try_emplace(site, std::move(counters));
    if (!fresh) P::merge(it->second, std::move(counters));
  }
  from.clear();
}

// Folds one reducer's partials from every worker, starting from the largest.
template <class P>
Table<P> shuffle_reducer(std::vector<std::vector<Table<P>>>& combiners, std::size_t r) {
  std::size_t largest = 0, total = 0;
  for (std::size_t w = 0; w < combiners.size(); ++w) {
    total += combiners[w][r].size();
    if (combiners[w][r].size() > combiners[largest][r].size()) largest = w;
  }
  Table<P> out = std::move(combiners[largest][r]);
  out.reserve(total);
  for (std::size_t w = 0; w < combiners.size(); ++w)
    if (w != largest) merge_tables<P>(out, std::move(combiners[w][r]));
  return out;
}

template <class P>
std::vector<typename P::Output> finish_table(Table<P>&& table) {
  std::vector<typename P::Output> out;
  out.reserve(table.size());
  for (auto& [site, counters] : table) out.push_back(P::finish(site, std::move(counters)));
  table.clear();
  return out;
}

template <class Out>
void sort_by_site(std::vector<Out>& v) {
  std::sort(v.begin(), v.end(), [](const Out& a, const Out& b) { return a.site_id < b.site_id; });
}

template <class Out>
std::vector<Out> concat_sorted(std::vector<std::vector<Out>>&& parts) {
  std::size_t n = 0;
  for (const auto& p : parts) n += p.size();
  std::vector<Out> out;
  out.reserve(n);
  for (auto& p : parts) std::move(p.begin(), p.end(), std::back_inserter(out));
  sort_by_site(out);
  return out;
}

// A contiguous record range of one partition file, the unit of map parallelism.
struct Split {
  fs::path path;
  std::uint64_t first = 0;
  std::uint64_t count = 0;
};

constexpr std::uint64_t kSplitRecords = 1 << 20;

std::vector<Split> make_splits(const Dataset& ds) {
  std::vector<Split> out;
  for (const auto& ref : ds.partitions()) {
    const std::uint64_t n = PartitionScanner(ref.path).record_count();
    for (std::uint64_t first = 0; first < n; first += kSplitRecords)
      out.push_back({ref.path, first, std::min(kSplitRecords, n - first)});
  }
  return out;
}

template <class P>
void scan_into(const Split& s, Table<P>& table) {
  PartitionScanner scanner(s.path, s.first, s.count);
  EventRecord r;
  while (scanner.next(r)) P::add(table[r.site_id], r);
}

template <class P>
EngineResult run_reference(const Dataset& ds) {
  EngineResult result;
  const auto t0 = Clock::now();
  Table<P> table;
  for (const auto& ref : ds.partitions()) scan_into<P>({ref.path, 0, ~std::uint64_t{0}}, table);
  const auto t1 = Clock::now();
  auto out = finish_table<P>(std::move(table));
  sort_by_site(out);
  P::store(result, std::move(out));
  const auto t2 = Clock::now();
  result.timing.scan_map = t1 - t0;
  result.timing.reduce = t2 - t1;
  return result;
}

template <class P>
EngineResult run_mapreduce(const Dataset& ds, std::uint32_t reducers, unsigned workers) {
  EngineResult result;
  const auto t0 = Clock::now();
  const auto splits = make_splits(ds);
  const unsigned w_count = std::max(1u, workers);
  // combiners[w][r]: worker w's partial aggregate for reducer r
  std::vector<std::vector<Table<P>>> combiners(w_count, std::vector<Table<P>>(reducers));
  parallel_for_workers(splits.size(), w_count, [&](unsigned w, std::size_t i) {
    auto& mine = combiners[w];
    PartitionScanner scanner(splits[i].path, splits[i].first, splits[i].count);
    EventRecord r;
    while (scanner.next(r)) P::add(mine[partition_for_site(r.site_id, reducers)][r.site_id], r);
  });
  const auto t1 = Clock::now();

  std::vector<Table<P>> shuffled(reducers);
  parallel_for(reducers, w_count, [&](std::size_t r) { shuffled[r] = shuffle_reducer<P>(combiners, r); });
  combiners.clear();
  const auto t2 = Clock::now();

  std::vector<std::vector<typename P::Output>> reduced(reducers);
  parallel_for(reducers, w_count, [&](std::size_t r) { reduced[r] = finish_table<P>(std::move(shuffled[r])); });
  P::store(result, concat_sorted(std::move(reduced)));
  const auto t3 = Clock::now();
  result.timing.scan_map = t1 - t0;
  result.timing.shuffle = t2 - t1;
  result.timing.reduce = t3 - t2;
  return result;
}

// Append-only bucket file. Unlike PartitionWriter it never deletes on destruction.
class BucketFile {
 public:
  explicit BucketFile(fs::path path) : path_(std::move(path)) {}
  BucketFile(BucketFile&&) = default;

  void append(std::span<const char, kRecordSize> bytes) {
    if (!out_.is_open()) {
      out_.open(path_, std::ios::binary | std::ios::trunc);
      if (!out_) throw IoError(path_.string() + ": cannot open bucket file");
      buffer_.reserve(kFlushBytes);
    }
    buffer_.insert(buffer_.end(), bytes.begin(), bytes.end());
    if (buffer_.size() >= kFlushBytes) flush();
  }
  void close() {
    if (!out_.is_open()) return;
    flush();
    out_.close();
    if (!out_) throw IoError(path_.string() + ": close failed");
  }

 private:
  static constexpr std::size_t kFlushBytes = 256 * kRecordSize;

  void flush() {
    out_.write(buffer_.data(), static_cast<std::streamsize>(buffer_.size()));
    if (!out_) throw IoError(path_.string() + ": write failed");
    buffer_.clear();
  }

  fs::path path_;
  std::ofstream out_;
  std::vector<char> buffer_;
};

std::string bucket_name(std::size_t b) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "bucket-%04zu", b);
  return buf;
}

Id raw_site_id(std::span<const char, kRecordSize> line, const fs::path& path, std::uint64_t offset) {
  Id v = 0;
  for (std::size_t i = 0; i < layout::kSiteLen; ++i) {
    const char c = line[layout::kSite + i];
    if (c < '0' || c > '9')
      throw MalformedRecord(path.string() + " at byte offset " + std::to_string(offset) + ": site id is not decimal");
    v = v * 10 + static_cast<unsigned>(c - '0');
  }
  return v;
}

fs::path make_work_dir(const Dataset& ds, const EngineOptions& opt) {
  static std::atomic<unsigned> counter{0};
  fs::path base = opt.work_dir;
  if (base.empty()) base = ds.root().empty() ? fs::temp_directory_path() : ds.root() / "_work";
  const fs::path dir =
      base / ("bucketed-" + std::to_string(::getpid()) + "-" + std::to_string(counter.fetch_add(1)));
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError(dir.string() + ": " + ec.message());
  return dir;
}

template <class E>
[[noreturn]] void rethrow_in_bucket(const std::string& bucket, const E& e) {
  throw E(bucket + ": " + e.what());
}

template <class P>
EngineResult run_bucketed(const Dataset& ds, const EngineOptions& opt) {
  EngineResult result;
  const std::uint32_t buckets = opt.reducers;
  const unsigned w_count = std::max(1u, opt.workers);
  const auto t0 = Clock::now();
  const fs::path work = make_work_dir(ds, opt);
  for (std::uint32_t b = 0; b < buckets; ++b) fs::create_directories(work / bucket_name(b));

  // Stage 1: copy raw records into per-(bucket, worker) files.
  const auto splits = make_splits(ds);
  std::vector<std::vector<BucketFile>> files(w_count);
  for (unsigned w = 0; w < w_count; ++w)
    for (std::uint32_t b = 0; b < buckets; ++b)
      files[w].emplace_back(work / bucket_name(b) / ("w-" + std::to_string(w) + ".dat"));
  parallel_for_workers(splits.size(), w_count, [&](unsigned w, std::size_t i) {
    PartitionScanner scanner(splits[i].path, splits[i].first, splits[i].count);
    std::span<const char, kRecordSize> line(static_cast<const char*>(nullptr), kRecordSize);
    while (true) {
      const std::uint64_t offset = scanner.byte_offset();
      if (!scanner.next_raw(line)) break;
      files[w][partition_for_site(raw_site_id(line, splits[i].path, offset), buckets)].append(line);
    }
  });
  for (auto& per_worker : files)
    for (auto& f : per_worker) f.close();
  files.clear();
  const auto t1 = Clock::now();

  // Stage 2: each bucket is aggregated independently.
  std::vector<std::vector<typename P::Output>> reduced(buckets);
  parallel_for(buckets, w_count, [&](std::size_t b) {
    const std::string name = bucket_name(b);
    try {
      Table<P> table;
      std::vector<fs::path> inputs;
      for (const auto& e : fs::directory_iterator(work / name)) inputs.push_back(e.path());
      std::sort(inputs.begin(), inputs.end());
      for (const auto& in : inputs) scan_into<P>({in, 0, ~std::uint64_t{0}}, table);
      reduced[b] = finish_table<P>(std::move(table));
    } catch (const MalformedRecord& e) {
      rethrow_in_bucket(name, e);
    } catch (const TruncatedFile& e) {
      rethrow_in_bucket(name, e);
    } catch (const IoError& e) {
      rethrow_in_bucket(name, e);
    } catch (const fs::filesystem_error& e) {
      throw IoError(name + ": " + e.what());
    }
  });
  P::store(result, concat_sorted(std::move(reduced)));
  std::error_code ec;
  fs::remove_all(work, ec);
  if (opt.work_dir.empty() && !ds.root().empty()) fs::remove(ds.root() / "_work", ec);  // only if empty
  const auto t2 = Clock::now();
  result.timing.shuffle = t1 - t0;
  result.timing.reduce = t2 - t1;
  return result;
}

template <class P>
EngineResult run_with(const Dataset& ds, const EngineOptions& opt) {
  if (opt.reducers < 1) throw ContractViolation("reducer/bucket count must be at least 1");
  if (opt.workers < 1) throw ContractViolation("worker count must be at least 1");
  const auto start = Clock::now();
  EngineResult r;
  switch (opt.engine) {
    case EngineKind::Reference: r = run_reference<P>(ds); break;
    case EngineKind::MapReduce: r = run_mapreduce<P>(ds, opt.reducers, opt.workers); break;
    case EngineKind::Bucketed: r = run_bucketed<P>(ds, opt); break;
  }
  r.timing.total = Clock::now() - start;
  return r;
}

}  // namespace

EngineResult run_malstone_a(const Dataset& ds, const EngineOptions& opt) {
  EngineResult r = run_with<PolicyA>(ds, opt);
  r.benchmark = Benchmark::A;
  return r;
}

EngineResult run_malstone_b(const Dataset& ds, const EngineOptions& opt) {
  EngineResult r = run_with<PolicyB>(ds, opt);
  r.benchmark = Benchmark::B;
  return r;
}

EngineResult run_malstone(Benchmark b, const Dataset& ds, const EngineOptions& opt) {
  return b == Benchmark::A ? run_malstone_a(ds, opt) : run_malstone_b(ds, opt);
}

std::vector<SpmScore> terminal_scores(std::span<const SpmSeries> series) {
  std::vector<SpmScore> out;
  out.reserve(series.size());
  for (const auto& s : series) {
    if (s.entries.empty()) continue;
    const auto& last = s.entries.back();
    out.push_back({s.site_id, last.cum_events, last.cum_marked, last.rho});
  }
  return out;
}

std::vector<std::string> check_result(const EngineResult& r) {
  std::vector<std::string> out;
  auto append = [&](std::vector<std::string>&& v) { std::move(v.begin(), v.end(), std::back_inserter(out)); };
  if (r.benchmark == Benchmark::A) {
    for (std::size_t i = 0; i < r.scores.size(); ++i) {
      append(check_score(r.scores[i]));
      if (i > 0 && !(r.scores[i - 1].site_id < r.scores[i].site_id)) out.push_back("sites not strictly ascending");
    }
  } else {
    for (std::size_t i = 0; i < r.series.size(); ++i) {
      append(check_series(r.series[i]));
      if (i > 0 && !(r.series[i - 1].site_id < r.series[i].site_id)) out.push_back("sites not strictly ascending");
    }
  }
  return out;
}

std::string format_rho(double rho) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", rho);
  return buf;
}

std::string result_csv(const EngineResult& r) {
  std::string out;
  if (r.benchmark == Benchmark::A) {
    out.reserve(32 + r.scores.size() * 40);
    out += "site_id,events,marked,rho\n";
    for (const auto& s : r.scores) {
      out += id_to_string(s.site_id);
      out += ',';
      out += std::to_string(s.events);
      out += ',';
      out += std::to_string(s.marked);
      out += ',';
      out += format_rho(s.rho);
      out += '\n';
    }
  } else {
    out += "site_id,iso_year,iso_week,cum_events,cum_marked,rho\n";
    for (const auto& s : r.series) {
      const std::string site = id_to_string(s.site_id);
      for (const auto& e : s.entries) {
        out += site;
        out += ',';
        out += std::to_string(e.bucket.iso_year);
        out += ',';
        out += std::to_string(e.bucket.iso_week);
        out += ',';
        out += std::to_string(e.cum_events);
        out += ',';
        out += std::to_string(e.cum_marked);
        out += ',';
        out += format_rho(e.rho);
        out += '\n';
      }
    }
  }
  return out;
}

void write_result_csv(const EngineResult& r, const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  const std::string csv = result_csv(r);
  out.write(csv.data(), static_cast<std::streamsize>(csv.size()));
  if (!out) throw IoError(path.string() + ": write failed");
}

}  // namespace malstone
