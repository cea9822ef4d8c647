// Site-entity-mark dataset generator.
//
// Generation runs in three phases:
//   1. the coordinator draws all marked-site events and folds their mark
//      draws into the mark table (entity -> mark instant);
//   2. the seed package (mark table, per-node marked-event allocations,
//      node sub-seeds, unmarked site ranges) is written under <data-dir>/seed;
//   3. every node independently emits its allocation followed by events for
//      its own unmarked sites until it holds exactly records_per_node records.
//
// All randomness comes from std::mt19937_64, whose output sequence is fixed by
// the C++ standard, combined with the integer/real conversions below (the
// standard distributions are implementation-defined and are not used).
// Changing any draw order changes every dataset; bump kGeneratorVersion.
#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "malstone/codec.hpp"
#include "malstone/dataset.hpp"
#include "malstone/model.hpp"

namespace malstone {

inline constexpr const char* kGeneratorVersion = "malgen-mt19937_64/1";

std::uint64_t fnv1a64(std::span<const unsigned char> bytes);

/// Low 48 bits of FNV-1a 64 over the name.
std::uint64_t node_hash(std::string_view node_name);
std::string node_hash_hex(std::string_view node_name);

/// Sub-seed for node k: FNV-1a 64 over master_seed (8 bytes LE) then k (4 bytes LE).
std::uint64_t derive_node_seed(std::uint64_t master_seed, std::uint32_t node_index);

/// Discretized Pareto inverse transform, clamped to [x_min, x_max].
std::uint64_t sample_event_count(double uniform_draw, double alpha, std::uint64_t x_min, std::uint64_t x_max);

std::optional<Timestamp> mark_time_update(std::optional<Timestamp> current, Timestamp visit_time, bool draw_success,
                                          std::int64_t delay_seconds);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// 53-bit uniform in [0, 1).
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  /// Uniform in [0, n); n >= 1.
  std::uint64_t below(std::uint64_t n);
  /// Uniform in [lo, hi].
  Timestamp instant_between(Timestamp lo, Timestamp hi) {
    return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi.seconds - lo.seconds) + 1));
  }
  bool bernoulli(double p) { return uniform01() < p; }

 private:
  std::mt19937_64 engine_;
};

class MarkTable {
 public:
  std::optional<Timestamp> find(Id entity) const {
    auto it = marks_.find(entity);
    if (it == marks_.end()) return std::nullopt;
    return it->second;
  }
  /// Stored flag semantics: marked at or before t.
  bool marked_at(Id entity, Timestamp t) const {
    auto it = marks_.find(entity);
    return it != marks_.end() && it->second <= t;
  }
  void set(Id entity, Timestamp t) { marks_[entity] = t; }
  /// Keeps the earlier of the existing and the offered mark.
  void fold(Id entity, Timestamp t);
  std::size_t size() const { return marks_.size(); }
  bool empty() const { return marks_.empty(); }
  std::vector<std::pair<Id, Timestamp>> sorted() const;

  friend bool operator==(const MarkTable&, const MarkTable&) = default;

 private:
  std::unordered_map<Id, Timestamp, IdHash> marks_;
};

struct MarkedEvent {
  Timestamp timestamp;
  Id site_id = 0;
  Id entity_id = 0;
  bool success = false;  // this visit's mark draw succeeded
};

struct MarkedPhase {
  std::vector<MarkedEvent> events;
  MarkTable marks;
};

/// Coordinator phase. Throws ConfigInvalid / ConfigInfeasible.
MarkedPhase generate_marked_phase(const GenConfig& cfg);

struct SiteRange {
  std::uint64_t begin = 0;  // inclusive
  std::uint64_t end = 0;    // exclusive

  friend bool operator==(const SiteRange&, const SiteRange&) = default;
};

struct SeedPackage {
  GenConfig config;
  MarkTable marks;
  std::vector<std::vector<EventRecord>> allocations;  // per node, stamped and flagged
  std::vector<std::uint64_t> node_seeds;
  std::vector<SiteRange> site_ranges;
};

SeedPackage build_seed_package(const GenConfig& cfg, const MarkedPhase& phase);
void write_seed_package(const SeedPackage& seed, const std::filesystem::path& data_dir);
SeedPackage build_and_scatter_seed(const GenConfig& cfg, const MarkedPhase& phase,
                                   const std::filesystem::path& data_dir);
SeedPackage load_seed_package(const std::filesystem::path& data_dir);
/// Reads <data-dir>/seed/marks.tsv.
MarkTable load_mark_table(const std::filesystem::path& data_dir);

/// Writes node-XXXX/part-0000.dat. Throws ConfigInfeasible if the node's site range runs out.
PartitionEntry generate_node_partition(std::uint32_t node_index, const SeedPackage& seed,
                                       const std::filesystem::path& data_dir);

struct GenerateSummary {
  Manifest manifest;
  std::size_t marked_events = 0;
  std::size_t marked_entities = 0;
  std::chrono::duration<double> seed_time{}, scatter_time{}, local_time{};
};

/// Full pipeline; node partitions are produced by `workers` threads.
GenerateSummary generate_dataset(const GenConfig& cfg, const std::filesystem::path& data_dir, unsigned workers);

}  // namespace malstone
