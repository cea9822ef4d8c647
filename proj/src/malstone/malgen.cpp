#include "malstone/malgen.hpp"

#include "malstone/parallel.hpp"

#include <array>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

namespace malstone {

using nlohmann::json;
namespace fs = std::filesystem;

std::uint64_t fnv1a64(std::span<const unsigned char> bytes) {
  std::uint64_t h = Fnv1a64::kOffsetBasis;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= Fnv1a64::kPrime;
  }
  return h;
}

std::uint64_t node_hash(std::string_view name) {
  const auto* p = reinterpret_cast<const unsigned char*>(name.data());
  return fnv1a64({p, name.size()}) & kMaxEventNode;
}

std::string node_hash_hex(std::string_view name) { return hex64(node_hash(name)).substr(4); }

std::uint64_t derive_node_seed(std::uint64_t master_seed, std::uint32_t node_index) {
  std::array<unsigned char, 12> bytes{};
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>(master_seed >> (8 * i));
  for (int i = 0; i < 4; ++i) bytes[8 + i] = static_cast<unsigned char>(node_index >> (8 * i));
  return fnv1a64(bytes);
}

std::uint64_t sample_event_count(double u, double alpha, std::uint64_t x_min, std::uint64_t x_max) {
  if (x_min > x_max) throw ContractViolation("sample_event_count: x_min exceeds x_max");
  const double x = std::floor(static_cast<double>(x_min) * std::pow(1.0 - u, -1.0 / alpha));
  if (!(x < static_cast<double>(x_max))) return x_max;
  if (x < static_cast<double>(x_min)) return x_min;
  return static_cast<std::uint64_t>(x);
}

std::optional<Timestamp> mark_time_update(std::optional<Timestamp> current, Timestamp visit_time, bool draw_success,
                                          std::int64_t delay_seconds) {
  if (!draw_success) return current;
  const Timestamp candidate = visit_time + delay_seconds;
  if (!current) return candidate;
  return std::min(*current, candidate);
}

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) throw ContractViolation("Rng::below(0)");
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x;
  do x = engine_();
  while (x >= limit);
  return x % n;
}

void MarkTable::fold(Id entity, Timestamp t) {
  auto [it, inserted] = marks_.try_emplace(entity, t);
  if (!inserted && t < it->second) it->second = t;
}

std::vector<std::pair<Id, Timestamp>> MarkTable::sorted() const {
  std::vector<std::pair<Id, Timestamp>> out(marks_.begin(), marks_.end());
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  return out;
}

MarkedPhase generate_marked_phase(const GenConfig& cfg) {
  if (auto v = validate_config(cfg); !v.empty()) throw ConfigInvalid(v.front());
  Rng rng(cfg.master_seed);
  MarkedPhase out;
  const Timestamp first = cfg.period_begin();
  const Timestamp last = cfg.period_last();
  const std::uint64_t budget = cfg.total_records();
  std::uint64_t demand = 0;
  for (std::uint64_t site = 0; site < cfg.marked_sites; ++site) {
    const Timestamp active_from = first + static_cast<std::int64_t>(rng.below(cfg.period_days)) * kSecondsPerDay;
    const std::uint64_t count = sample_event_count(rng.uniform01(), cfg.alpha, cfg.events_min, cfg.events_max);
    demand += count;
    if (demand > budget)
      throw ConfigInfeasible("marked-site events (" + std::to_string(demand) + "+) exceed the record budget of " +
                             std::to_string(budget) + "; lower marked_sites or raise records_per_node");
    for (std::uint64_t i = 0; i < count; ++i) {
      MarkedEvent ev;
      ev.site_id = site;
      ev.entity_id = rng.below(cfg.entities);
      ev.timestamp = rng.instant_between(active_from, last);
      ev.success = rng.bernoulli(cfg.p_mark);
      if (ev.success) out.marks.fold(ev.entity_id, ev.timestamp + cfg.delay_seconds());
      out.events.push_back(ev);
    }
  }
  if (cfg.background_mark_rate > 0.0) {
    for (std::uint64_t e = 0; e < cfg.entities; ++e)
      if (rng.bernoulli(cfg.background_mark_rate)) out.marks.fold(e, rng.instant_between(first, last));
  }
  return out;
}

SeedPackage build_seed_package(const GenConfig& cfg, const MarkedPhase& phase) {
  SeedPackage seed;
  seed.config = cfg;
  seed.marks = phase.marks;
  seed.allocations.resize(cfg.nodes);
  std::vector<std::uint64_t> hashes(cfg.nodes);
  for (std::uint32_t k = 0; k < cfg.nodes; ++k) {
    hashes[k] = node_hash(node_name(k));
    seed.node_seeds.push_back(derive_node_seed(cfg.master_seed, k));
  }
  for (std::size_t i = 0; i < phase.events.size(); ++i) {
    const auto k = static_cast<std::uint32_t>(i % cfg.nodes);
    const MarkedEvent& ev = phase.events[i];
    auto& alloc = seed.allocations[k];
    alloc.push_back({hashes[k], alloc.size(), ev.timestamp, ev.site_id, ev.entity_id,
                     phase.marks.marked_at(ev.entity_id, ev.timestamp)});
  }
  for (std::uint32_t k = 0; k < cfg.nodes; ++k) {
    if (seed.allocations[k].size() > cfg.records_per_node)
      throw ConfigInfeasible(node_name(k) + ": marked-event allocation exceeds records_per_node");
  }
  const Id unmarked = cfg.total_sites - cfg.marked_sites;
  for (std::uint32_t k = 0; k < cfg.nodes; ++k) {
    const auto lo = static_cast<std::uint64_t>(unmarked * k / cfg.nodes);
    const auto hi = static_cast<std::uint64_t>(unmarked * (k + 1) / cfg.nodes);
    seed.site_ranges.push_back({cfg.marked_sites + lo, cfg.marked_sites + hi});
  }
  return seed;
}

namespace {

fs::path seed_dir(const fs::path& data_dir) { return data_dir / "seed"; }

fs::path allocation_path(const fs::path& data_dir, std::uint32_t k) {
  return seed_dir(data_dir) / "allocations" / (node_name(k) + ".dat");
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw IoError(path.string() + ": write failed");
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError(dir.string() + ": " + ec.message());
}

}  // namespace

void write_seed_package(const SeedPackage& seed, const fs::path& data_dir) {
  const fs::path dir = seed_dir(data_dir);
  ensure_dir(dir / "allocations");

  std::string marks;
  marks.reserve(seed.marks.size() * 40);
  for (const auto& [entity, when] : seed.marks.sorted()) {
    marks += id_to_string(entity);
    marks += '\t';
    marks += format_timestamp(when);
    marks += '\n';
  }
  write_text(dir / "marks.tsv", marks);

  json ranges = json::array();
  for (const auto& r : seed.site_ranges) ranges.push_back({r.begin, r.end});
  json counts = json::array();
  for (const auto& a : seed.allocations) counts.push_back(a.size());
  const json pkg{{"format", "malstone-seed/1"},
                 {"generator", kGeneratorVersion},
                 {"config", config_to_json(seed.config)},
                 {"node_seeds", seed.node_seeds},
                 {"site_ranges", ranges},
                 {"allocation_counts", counts}};
  write_text(dir / "package.json", pkg.dump(2) + "\n");

  for (std::uint32_t k = 0; k < seed.allocations.size(); ++k) {
    PartitionWriter w(allocation_path(data_dir, k));
    for (const auto& r : seed.allocations[k]) w.append(r);
    w.finish();
  }
}

SeedPackage build_and_scatter_seed(const GenConfig& cfg, const MarkedPhase& phase, const fs::path& data_dir) {
  SeedPackage seed = build_seed_package(cfg, phase);
  write_seed_package(seed, data_dir);
  return seed;
}

MarkTable load_mark_table(const fs::path& data_dir) {
  const fs::path path = seed_dir(data_dir) / "marks.tsv";
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string() + ": cannot open");
  MarkTable table;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto tab = line.find('\t');
    auto entity = tab == std::string::npos ? std::nullopt : id_from_string(std::string_view(line).substr(0, tab));
    auto when = entity ? parse_timestamp(std::string_view(line).substr(tab + 1)) : std::nullopt;
    if (!when) throw IoError(path.string() + ":" + std::to_string(lineno) + ": malformed mark line");
    table.set(*entity, *when);
  }
  return table;
}

SeedPackage load_seed_package(const fs::path& data_dir) {
  const fs::path path = seed_dir(data_dir) / "package.json";
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string() + ": cannot open");
  SeedPackage seed;
  try {
    const json pkg = json::parse(in);
    if (pkg.at("generator").get<std::string>() != kGeneratorVersion)
      throw IoError(path.string() + ": seed written by a different generator version");
    seed.config = config_from_json(pkg.at("config"));
    seed.node_seeds = pkg.at("node_seeds").get<std::vector<std::uint64_t>>();
    for (const auto& r : pkg.at("site_ranges"))
      seed.site_ranges.push_back({r.at(0).get<std::uint64_t>(), r.at(1).get<std::uint64_t>()});
  } catch (const json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
  seed.marks = load_mark_table(data_dir);
  for (std::uint32_t k = 0; k < seed.config.nodes; ++k)
    seed.allocations.push_back(read_partition({k, 0, allocation_path(data_dir, k)}));
  return seed;
}

PartitionEntry generate_node_partition(std::uint32_t node_index, const SeedPackage& seed, const fs::path& data_dir) {
  const GenConfig& cfg = seed.config;
  if (node_index >= cfg.nodes) throw ContractViolation("node index out of range");
  const PartitionRef ref = PartitionRef::under(data_dir, node_index, 0);
  PartitionWriter w(ref.path);
  for (const auto& r : seed.allocations[node_index]) w.append(r);

  Rng rng(seed.node_seeds[node_index]);
  const std::uint64_t hash = node_hash(node_name(node_index));
  const Timestamp first = cfg.period_begin();
  const Timestamp last = cfg.period_last();
  const SiteRange range = seed.site_ranges[node_index];
  std::uint64_t next_site = range.begin;
  std::uint64_t seq = w.count();
  while (w.count() < cfg.records_per_node) {
    if (next_site >= range.end)
      throw ConfigInfeasible(node_name(node_index) + ": unmarked site range exhausted after " +
                             std::to_string(w.count()) + " records; raise total_sites");
    const Id site = next_site++;
    const std::uint64_t want = sample_event_count(rng.uniform01(), cfg.alpha, cfg.events_min, cfg.events_max);
    const std::uint64_t n = std::min(want, cfg.records_per_node - w.count());
    for (std::uint64_t i = 0; i < n; ++i) {
      EventRecord r;
      r.event_node = hash;
      r.event_seq = seq++;
      r.site_id = site;
      r.entity_id = rng.below(cfg.entities);
      r.timestamp = rng.instant_between(first, last);
      r.mark_flag = seed.marks.marked_at(r.entity_id, r.timestamp);
      w.append(r);
    }
  }
  PartitionEntry entry{ref, 0, w.checksum()};
  entry.records = w.finish();
  return entry;
}

namespace {

void clear_previous_output(const fs::path& data_dir) {
  std::error_code ec;
  if (!fs::exists(data_dir)) return;
  for (const auto& e : fs::directory_iterator(data_dir)) {
    const std::string name = e.path().filename().string();
    if ((e.is_directory() && (name == "seed" || name.rfind("node-", 0) == 0)) || name == kManifestFile)
      fs::remove_all(e.path(), ec);
    if (ec) throw IoError(e.path().string() + ": " + ec.message());
  }
}

}  // namespace

GenerateSummary generate_dataset(const GenConfig& cfg, const fs::path& data_dir, unsigned workers) {
  using clock = std::chrono::steady_clock;
  if (auto v = validate_config(cfg); !v.empty()) throw ConfigInvalid(v.front());
  workers = std::max(1u, workers);
  ensure_dir(data_dir);
  clear_previous_output(data_dir);

  GenerateSummary summary;
  auto t0 = clock::now();
  const MarkedPhase phase = generate_marked_phase(cfg);
  summary.marked_events = phase.events.size();
  summary.marked_entities = phase.marks.size();
  auto t1 = clock::now();
  const SeedPackage seed = build_and_scatter_seed(cfg, phase, data_dir);
  auto t2 = clock::now();

  std::vector<PartitionEntry> entries(cfg.nodes);
  parallel_for(cfg.nodes, workers, [&](std::size_t k) {
    entries[k] = generate_node_partition(static_cast<std::uint32_t>(k), seed, data_dir);
  });

  summary.manifest.config = cfg;
  summary.manifest.partitions = std::move(entries);
  write_manifest(data_dir, summary.manifest);
  auto t3 = clock::now();
  summary.seed_time = t1 - t0;
  summary.scatter_time = t2 - t1;
  summary.local_time = t3 - t2;
  return summary;
}

}  // namespace malstone
