#include "malstone/dataset.hpp"

#include <fstream>
#include <set>

namespace malstone {

using nlohmann::json;

json config_to_json(const GenConfig& c) {
  return json{
      {"nodes", c.nodes},
      {"records_per_node", c.records_per_node},
      {"total_sites", c.total_sites},
      {"marked_sites", c.marked_sites},
      {"entities", c.entities},
      {"period_start", format_date(c.period_start)},
      {"period_days", c.period_days},
      {"p_mark", c.p_mark},
      {"delay_days", c.delay_days},
      {"alpha", c.alpha},
      {"events_min", c.events_min},
      {"events_max", c.events_max},
      {"background_mark_rate", c.background_mark_rate},
      {"master_seed", c.master_seed},
  };
}

GenConfig config_from_json(const json& j) {
  try {
    GenConfig c;
    c.nodes = j.at("nodes").get<std::uint32_t>();
    c.records_per_node = j.at("records_per_node").get<std::uint64_t>();
    c.total_sites = j.at("total_sites").get<std::uint64_t>();
    c.marked_sites = j.at("marked_sites").get<std::uint64_t>();
    c.entities = j.at("entities").get<std::uint64_t>();
    auto start = parse_date(j.at("period_start").get<std::string>());
    if (!start) throw ConfigInvalid("period_start is not YYYY-MM-DD");
    c.period_start = *start;
    c.period_days = j.at("period_days").get<std::uint32_t>();
    c.p_mark = j.at("p_mark").get<double>();
    c.delay_days = j.at("delay_days").get<std::uint32_t>();
    c.alpha = j.at("alpha").get<double>();
    c.events_min = j.at("events_min").get<std::uint64_t>();
    c.events_max = j.at("events_max").get<std::uint64_t>();
    c.background_mark_rate = j.at("background_mark_rate").get<double>();
    c.master_seed = j.at("master_seed").get<std::uint64_t>();
    return c;
  } catch (const json::exception& e) {
    throw ConfigInvalid(std::string("config: ") + e.what());
  }
}

std::uint64_t Manifest::total_records() const {
  std::uint64_t n = 0;
  for (const auto& p : partitions) n += p.records;
  return n;
}

void write_manifest(const std::filesystem::path& root, const Manifest& m) {
  json parts = json::array();
  for (const auto& p : m.partitions) {
    parts.push_back({{"path", p.ref.relative_path()},
                     {"node", p.ref.node_index},
                     {"part", p.ref.part_index},
                     {"records", p.records},
                     {"checksum", hex64(p.checksum)}});
  }
  json doc{{"format", "malstone-dataset/1"},
           {"config", m.config ? config_to_json(*m.config) : json(nullptr)},
           {"total_records", m.total_records()},
           {"total_bytes", m.total_bytes()},
           {"partitions", parts}};
  const auto path = root / kManifestFile;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << doc.dump(2) << '\n';
  if (!out) throw IoError(path.string() + ": write failed");
}

Manifest read_manifest(const std::filesystem::path& root) {
  const auto path = root / kManifestFile;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string() + ": cannot open");
  Manifest m;
  try {
    const json doc = json::parse(in);
    if (!doc.at("config").is_null()) m.config = config_from_json(doc.at("config"));
    for (const auto& p : doc.at("partitions")) {
      PartitionEntry e;
      e.ref = PartitionRef::under(root, p.at("node").get<std::uint32_t>(), p.at("part").get<std::uint32_t>());
      if (e.ref.relative_path() != p.at("path").get<std::string>())
        throw IoError(path.string() + ": partition path does not match node/part layout");
      e.records = p.at("records").get<std::uint64_t>();
      e.checksum = std::stoull(p.at("checksum").get<std::string>(), nullptr, 16);
      m.partitions.push_back(std::move(e));
    }
  } catch (const json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  } catch (const std::logic_error& e) {
    throw IoError(path.string() + ": bad checksum field");
  }
  return m;
}

Dataset Dataset::open(const std::filesystem::path& root) {
  Dataset ds;
  ds.root_ = root;
  ds.manifest_ = read_manifest(root);
  return ds;
}

Dataset Dataset::from_partitions(std::vector<PartitionRef> parts) {
  Dataset ds;
  for (auto& ref : parts) {
    PartitionScanner probe(ref.path);
    ds.manifest_.partitions.push_back({std::move(ref), probe.record_count(), 0});
  }
  return ds;
}

std::vector<PartitionRef> Dataset::partitions() const {
  std::vector<PartitionRef> out;
  out.reserve(manifest_.partitions.size());
  for (const auto& p : manifest_.partitions) out.push_back(p.ref);
  return out;
}

std::uint32_t Dataset::node_count() const {
  std::set<std::uint32_t> nodes;
  for (const auto& p : manifest_.partitions) nodes.insert(p.ref.node_index);
  return static_cast<std::uint32_t>(nodes.size());
}

Dataset Dataset::head(std::size_t n) const {
  Dataset ds = *this;
  if (ds.manifest_.partitions.size() > n) ds.manifest_.partitions.resize(n);
  return ds;
}

Dataset write_dataset(const std::filesystem::path& root, const std::vector<std::vector<EventRecord>>& per_node) {
  Manifest m;
  for (std::size_t n = 0; n < per_node.size(); ++n) {
    const auto ref = PartitionRef::under(root, static_cast<std::uint32_t>(n), 0);
    const auto stats = write_partition(ref, per_node[n]);
    m.partitions.push_back({ref, stats.records, stats.checksum});
  }
  write_manifest(root, m);
  return Dataset::open(root);
}

std::vector<EventRecord> load_records(const Dataset& ds) {
  std::vector<EventRecord> out;
  out.reserve(ds.total_records());
  for (const auto& ref : ds.partitions()) scan_partition(ref, [&](const EventRecord& r) { out.push_back(r); });
  return out;
}

}  // namespace malstone
