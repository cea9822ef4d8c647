// On-disk dataset: node partitions plus manifest.json.
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "malstone/codec.hpp"
#include "malstone/model.hpp"

namespace malstone {

nlohmann::json config_to_json(const GenConfig& cfg);
GenConfig config_from_json(const nlohmann::json& j);

struct PartitionEntry {
  PartitionRef ref;
  std::uint64_t records = 0;
  std::uint64_t checksum = 0;
};

struct Manifest {
  std::optional<GenConfig> config;  // absent for hand-built datasets
  std::vector<PartitionEntry> partitions;

  std::uint64_t total_records() const;
  std::uint64_t total_bytes() const { return total_records() * kRecordSize; }
};

inline constexpr const char* kManifestFile = "manifest.json";

void write_manifest(const std::filesystem::path& root, const Manifest& m);
/// Partition paths are resolved against root.
Manifest read_manifest(const std::filesystem::path& root);

class Dataset {
 public:
  static Dataset open(const std::filesystem::path& root);
  /// Dataset view over explicit partition files, no manifest needed.
  static Dataset from_partitions(std::vector<PartitionRef> parts);

  const std::filesystem::path& root() const { return root_; }
  const Manifest& manifest() const { return manifest_; }
  std::vector<PartitionRef> partitions() const;
  std::uint64_t total_records() const { return manifest_.total_records(); }
  std::uint32_t node_count() const;
  /// View restricted to the first n partitions.
  Dataset head(std::size_t n) const;

 private:
  std::filesystem::path root_;
  Manifest manifest_;
};

/// Writes one partition per node (part-0000) and a config-less manifest.
Dataset write_dataset(const std::filesystem::path& root, const std::vector<std::vector<EventRecord>>& per_node);

/// Every record of the dataset in partition order.
std::vector<EventRecord> load_records(const Dataset& ds);

}  // namespace malstone
