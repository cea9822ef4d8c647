// MalStone A/B compute engines.
//
// All engines compute the event-count statistic: per site, marked records over
// all records (A), and the same ratio accumulated week by week in ISO-week
// order (B). They differ only in execution strategy:
//
//   mapreduce  parallel scan+map of partition files into per-reducer combiners
//              keyed by site_id mod R, then a parallel per-reducer merge and reduce
//   bucketed   stage 1 copies each raw record into one of R bucket files on
//              disk by site id; stage 2 aggregates each bucket file independently
//   reference  single-threaded single pass into one in-memory table
//
// Results are sorted by site id and identical for any R/workers.
#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "malstone/dataset.hpp"
#include "malstone/model.hpp"

namespace malstone {

enum class Benchmark { A, B };
enum class EngineKind { MapReduce, Bucketed, Reference };

std::string_view to_string(Benchmark b);
std::string_view to_string(EngineKind e);
std::optional<Benchmark> parse_benchmark(std::string_view s);
std::optional<EngineKind> parse_engine(std::string_view s);

struct MappedPair {
  Id site_id = 0;
  WeekBucket bucket;
  bool mark_flag = false;

  friend bool operator==(const MappedPair&, const MappedPair&) = default;
};

MappedPair map_record(const EventRecord& r);

/// site_id mod reducers; no hashing.
std::uint32_t partition_for_site(Id site_id, std::uint32_t reducers);

/// Per-bucket counts folded to a chronological cumulative series.
/// Throws ContractViolation on an empty input.
SpmSeries reduce_site(Id site_id, std::span<const std::pair<WeekBucket, bool>> pairs);

struct BucketCount {
  WeekBucket bucket;
  std::uint64_t events = 0;
  std::uint64_t marked = 0;
};

/// Sorts counts chronologically and accumulates them.
SpmSeries cumulate(Id site_id, std::vector<BucketCount> counts);

struct PhaseTimes {
  using seconds = std::chrono::duration<double>;
  seconds scan_map{};
  seconds shuffle{};
  seconds reduce{};
  seconds total{};
};

struct EngineOptions {
  EngineKind engine = EngineKind::Reference;
  std::uint32_t reducers = 1;  // R: reducer count or bucket count
  unsigned workers = 1;
  /// Bucketed engine scratch space; defaults to <dataset>/_work.
  std::filesystem::path work_dir;
};

struct EngineResult {
  Benchmark benchmark = Benchmark::A;
  std::vector<SpmScore> scores;  // A
  std::vector<SpmSeries> series;  // B
  PhaseTimes timing;

  std::size_t site_count() const { return benchmark == Benchmark::A ? scores.size() : series.size(); }
};

EngineResult run_malstone_a(const Dataset& ds, const EngineOptions& opt);
EngineResult run_malstone_b(const Dataset& ds, const EngineOptions& opt);
EngineResult run_malstone(Benchmark b, const Dataset& ds, const EngineOptions& opt);

/// Final cumulative row of each series.
std::vector<SpmScore> terminal_scores(std::span<const SpmSeries> series);

/// Type-invariant violations across all outputs (empty when valid).
std::vector<std::string> check_result(const EngineResult& r);

std::string format_rho(double rho);
std::string result_csv(const EngineResult& r);
void write_result_csv(const EngineResult& r, const std::filesystem::path& path);

}  // namespace malstone
