#include "malstone/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "malstone/malgen.hpp"

namespace malstone {

namespace fs = std::filesystem;

DatasetDescriptor describe(const Dataset& ds) {
  return {ds.total_records(), ds.manifest().total_bytes(), ds.node_count()};
}

double RunReport::average_seconds() const {
  if (runs.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& r : runs) sum += r.seconds;
  return sum / static_cast<double>(runs.size());
}

std::string RunReport::label() const {
  std::string s(to_string(engine));
  if (engine != EngineKind::Reference) s += " R=" + std::to_string(reducers) + " w=" + std::to_string(workers);
  return s;
}

RunOutcome run_benchmark(const Dataset& ds, Benchmark b, const EngineOptions& opt, unsigned runs) {
  if (runs < 1) throw ContractViolation("at least one run is required");
  RunOutcome out;
  out.report.benchmark = b;
  out.report.engine = opt.engine;
  out.report.dataset = describe(ds);
  out.report.reducers = opt.engine == EngineKind::Reference ? 1 : opt.reducers;
  out.report.workers = opt.engine == EngineKind::Reference ? 1 : opt.workers;
  out.report.config = ds.manifest().config;
  for (unsigned i = 0; i < runs; ++i) {
    EngineResult r = run_malstone(b, ds, opt);
    out.report.runs.push_back(
        {r.timing.total.count(), r.timing.scan_map.count(), r.timing.shuffle.count(), r.timing.reduce.count()});
    std::string csv = result_csv(r);
    if (i == 0) {
      out.csv = std::move(csv);
      out.result = std::move(r);
    } else if (csv != out.csv) {
      throw VerificationFailed("run " + std::to_string(i + 1) + " produced a result different from run 1 (" +
                               std::string(to_string(opt.engine)) + " engine is nondeterministic)");
    }
  }
  return out;
}

std::string format_minutes_seconds(double seconds) {
  const auto centis = static_cast<long long>(std::llround(seconds * 100.0));
  char buf[48];
  std::snprintf(buf, sizeof buf, "%lldm %lld.%02llds", centis / 6000, centis % 6000 / 100, centis % 100);
  return buf;
}

namespace {

constexpr std::string_view kReportHeader =
    "benchmark,engine,records,bytes,nodes,reducers,workers,run_index,seconds,scan_map_seconds,shuffle_seconds,"
    "reduce_seconds";

std::string fixed6(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::vector<std::string> split_csv(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.emplace_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start < text.size()) {
    auto nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    auto line = text.substr(start, nl - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) out.push_back(line);
    start = nl + 1;
  }
  return out;
}

double parse_double(const std::string& s, const char* what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::logic_error&) {
    throw ReportMismatch(std::string("report: bad ") + what + " value '" + s + "'");
  }
}

std::uint64_t parse_u64(const std::string& s, const char* what) {
  try {
    std::size_t used = 0;
    const auto v = std::stoull(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::logic_error&) {
    throw ReportMismatch(std::string("report: bad ") + what + " value '" + s + "'");
  }
}

}  // namespace

std::string report_csv(const RunReport& r) {
  std::string out;
  if (r.config) out += "# config " + config_to_json(*r.config).dump() + "\n";
  out += kReportHeader;
  out += '\n';
  const std::string prefix = std::string(to_string(r.benchmark)) + ',' + std::string(to_string(r.engine)) + ',' +
                             std::to_string(r.dataset.records) + ',' + std::to_string(r.dataset.bytes) + ',' +
                             std::to_string(r.dataset.nodes) + ',' + std::to_string(r.reducers) + ',' +
                             std::to_string(r.workers) + ',';
  RunTiming mean;
  for (std::size_t i = 0; i < r.runs.size(); ++i) {
    const auto& t = r.runs[i];
    out += prefix + std::to_string(i + 1) + ',' + fixed6(t.seconds) + ',' + fixed6(t.scan_map) + ',' +
           fixed6(t.shuffle) + ',' + fixed6(t.reduce) + '\n';
    mean.scan_map += t.scan_map;
    mean.shuffle += t.shuffle;
    mean.reduce += t.reduce;
  }
  const double n = r.runs.empty() ? 1.0 : static_cast<double>(r.runs.size());
  out += prefix + "avg," + fixed6(r.average_seconds()) + ',' + fixed6(mean.scan_map / n) + ',' +
         fixed6(mean.shuffle / n) + ',' + fixed6(mean.reduce / n) + '\n';
  return out;
}

RunReport parse_report_csv(std::string_view text) {
  RunReport r;
  bool header = false, have_first = false;
  for (auto line : lines_of(text)) {
    if (line.starts_with("# config ")) {
      try {
        r.config = config_from_json(nlohmann::json::parse(line.substr(9)));
      } catch (const nlohmann::json::exception& e) {
        throw ReportMismatch(std::string("report: bad config echo: ") + e.what());
      }
      continue;
    }
    if (line.starts_with("#")) continue;
    if (!header) {
      if (line != kReportHeader) throw ReportMismatch("report: unexpected header");
      header = true;
      continue;
    }
    const auto f = split_csv(line);
    if (f.size() != 12) throw ReportMismatch("report: expected 12 columns");
    auto bench = parse_benchmark(f[0]);
    auto engine = parse_engine(f[1]);
    if (!bench || !engine) throw ReportMismatch("report: unknown benchmark or engine");
    if (!have_first) {
      r.benchmark = *bench;
      r.engine = *engine;
      r.dataset = {parse_u64(f[2], "records"), parse_u64(f[3], "bytes"),
                   static_cast<std::uint32_t>(parse_u64(f[4], "nodes"))};
      r.reducers = static_cast<std::uint32_t>(parse_u64(f[5], "reducers"));
      r.workers = static_cast<unsigned>(parse_u64(f[6], "workers"));
      have_first = true;
    }
    if (f[7] == "avg") continue;
    r.runs.push_back({parse_double(f[8], "seconds"), parse_double(f[9], "scan_map_seconds"),
                      parse_double(f[10], "shuffle_seconds"), parse_double(f[11], "reduce_seconds")});
  }
  if (!header) throw ReportMismatch("report: missing header");
  return r;
}

void write_report(const RunReport& r, const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << report_csv(r);
  if (!out) throw IoError(path.string() + ": write failed");
}

RunReport read_report(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string() + ": cannot open");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_report_csv(ss.str());
  } catch (const ReportMismatch& e) {
    throw ReportMismatch(path.string() + ": " + e.what());
  }
}

std::string render_report_table(std::span<const RunReport> reports, TableFormat format) {
  if (reports.empty()) throw ContractViolation("no reports to render");
  const RunReport& first = reports.front();
  for (const auto& r : reports) {
    if (r.benchmark != first.benchmark)
      throw ReportMismatch("reports mix MalStone " + std::string(to_string(first.benchmark)) + " and " +
                           std::string(to_string(r.benchmark)));
    if (r.dataset != first.dataset) throw ReportMismatch("reports describe different datasets");
  }
  std::size_t rows = 0;
  for (const auto& r : reports) rows = std::max(rows, r.runs.size());

  std::vector<std::string> labels;
  for (std::size_t i = 0; i < rows; ++i) labels.push_back("Run " + std::to_string(i + 1));
  labels.emplace_back("Average");

  auto cell = [&](const RunReport& r, std::size_t row) -> std::optional<double> {
    if (row == rows) return r.runs.empty() ? std::nullopt : std::optional<double>(r.average_seconds());
    if (row < r.runs.size()) return r.runs[row].seconds;
    return std::nullopt;
  };

  std::string out;
  if (format == TableFormat::Csv) {
    out += "row";
    for (const auto& r : reports) out += ',' + r.label();
    out += '\n';
    for (std::size_t row = 0; row <= rows; ++row) {
      out += labels[row];
      for (const auto& r : reports) {
        out += ',';
        if (auto v = cell(r, row)) out += fixed6(*v);
      }
      out += '\n';
    }
    return out;
  }

  std::vector<std::vector<std::string>> grid(rows + 2);
  grid[0].push_back("");
  for (const auto& r : reports) grid[0].push_back(r.label());
  for (std::size_t row = 0; row <= rows; ++row) {
    grid[row + 1].push_back(labels[row]);
    for (const auto& r : reports) {
      auto v = cell(r, row);
      grid[row + 1].push_back(v ? format_minutes_seconds(*v) : "-");
    }
  }
  std::vector<std::size_t> width(reports.size() + 1, 0);
  for (const auto& line : grid)
    for (std::size_t c = 0; c < line.size(); ++c) width[c] = std::max(width[c], line[c].size());

  char title[160];
  std::snprintf(title, sizeof title, "MalStone %s: %llu records, %llu bytes, %u nodes\n",
                std::string(to_string(first.benchmark)).c_str(),
                static_cast<unsigned long long>(first.dataset.records),
                static_cast<unsigned long long>(first.dataset.bytes), first.dataset.nodes);
  out += title;
  for (const auto& line : grid) {
    for (std::size_t c = 0; c < line.size(); ++c) {
      if (c > 0) out += "  ";
      // first column left-aligned, values right-aligned
      if (c == 0) out += line[c] + std::string(width[c] - line[c].size(), ' ');
      else out += std::string(width[c] - line[c].size(), ' ') + line[c];
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    out += '\n';
  }
  return out;
}

ParsedTable parse_report_table_csv(std::string_view text) {
  ParsedTable t;
  const auto lines = lines_of(text);
  if (lines.empty()) throw ReportMismatch("table: empty");
  auto head = split_csv(lines[0]);
  if (head.empty() || head[0] != "row") throw ReportMismatch("table: missing row header");
  t.columns.assign(head.begin() + 1, head.end());
  for (std::size_t i = 1; i < lines.size(); ++i) {
    auto f = split_csv(lines[i]);
    if (f.size() != head.size()) throw ReportMismatch("table: ragged row");
    t.row_labels.push_back(f[0]);
    std::vector<std::optional<double>> row;
    for (std::size_t c = 1; c < f.size(); ++c)
      row.push_back(f[c].empty() ? std::nullopt : std::optional<double>(parse_double(f[c], "cell")));
    t.cells.push_back(std::move(row));
  }
  return t;
}

// ---- verification ----

namespace {

std::string where(const fs::path& p, std::uint64_t offset) {
  return p.string() + " at byte offset " + std::to_string(offset);
}

struct ScanFindings {
  std::optional<std::string> codec_failure;
  std::optional<std::string> event_id_failure;
  std::optional<std::string> flag_failure;
  std::uint64_t records = 0;
  std::uint64_t flagged = 0;
  std::uint64_t roundtrip_checked = 0;
  std::uint64_t flags_checked = 0;
  // sampled entity -> (timestamp, flag, location)
  std::map<Id, std::vector<std::pair<Timestamp, bool>>> entity_history;
};

void scan_dataset(const Dataset& ds, const MarkTable* marks, std::uint64_t sample, ScanFindings& f) {
  const std::uint64_t total = std::max<std::uint64_t>(ds.total_records(), 1);
  const std::uint64_t stride = std::max<std::uint64_t>(1, total / std::max<std::uint64_t>(sample, 1));
  // about `sample` distinct entities for the monotonicity check
  const std::uint64_t entity_modulus = stride;
  std::map<std::uint64_t, fs::path> node_hash_owner;
  std::uint64_t global = 0;
  for (const auto& ref : ds.partitions()) {
    PartitionScanner scanner(ref.path);
    std::span<const char, kRecordSize> raw(static_cast<const char*>(nullptr), kRecordSize);
    std::optional<std::uint64_t> node, last_seq;
    while (true) {
      const std::uint64_t offset = scanner.byte_offset();
      if (!scanner.next_raw(raw)) break;
      EventRecord r;
      try {
        r = decode_record(raw);
      } catch (const MalformedRecord& e) {
        if (!f.codec_failure) f.codec_failure = where(ref.path, offset) + ": " + e.what();
        ++global;
        continue;
      }
      ++f.records;
      if (r.mark_flag) ++f.flagged;
      if (global % stride == 0) {
        ++f.roundtrip_checked;
        const RecordBytes again = encode_record(r);
        if (!std::equal(again.begin(), again.end(), raw.begin()) && !f.codec_failure)
          f.codec_failure = where(ref.path, offset) + ": re-encoding differs from stored bytes";
      }
      if (!f.event_id_failure) {
        if (!node) {
          node = r.event_node;
          auto [it, fresh] = node_hash_owner.emplace(r.event_node, ref.path);
          if (!fresh) f.event_id_failure = where(ref.path, offset) + ": node hash also used by " + it->second.string();
        } else if (*node != r.event_node) {
          f.event_id_failure = where(ref.path, offset) + ": node hash changes within a partition";
        }
        if (last_seq && r.event_seq <= *last_seq)
          f.event_id_failure = where(ref.path, offset) + ": event sequence not increasing";
        last_seq = r.event_seq;
      }
      if (marks) {
        ++f.flags_checked;
        if (r.mark_flag != marks->marked_at(r.entity_id, r.timestamp) && !f.flag_failure)
          f.flag_failure = where(ref.path, offset) + ": entity " + id_to_string(r.entity_id) + " flag " +
                           (r.mark_flag ? "1" : "0") + " disagrees with marks.tsv";
      }
      if (IdHash{}(r.entity_id) % entity_modulus == 0) f.entity_history[r.entity_id].push_back({r.timestamp, r.mark_flag});
      ++global;
    }
  }
}

CheckResult pass(std::string name, std::string detail) { return {std::move(name), true, std::move(detail)}; }
CheckResult fail(std::string name, std::string detail) { return {std::move(name), false, std::move(detail)}; }

}  // namespace

std::vector<CheckResult> verify_dataset(const fs::path& root, const VerifyOptions& opt) {
  std::vector<CheckResult> out;
  Dataset ds;
  try {
    ds = Dataset::open(root);
  } catch (const Error& e) {
    out.push_back(fail("manifest", e.what()));
    return out;
  }

  // Manifest: sizes and checksums.
  {
    std::optional<std::string> problem;
    for (const auto& p : ds.manifest().partitions) {
      std::error_code ec;
      const auto size = fs::file_size(p.ref.path, ec);
      if (ec) {
        problem = p.ref.path.string() + ": " + ec.message();
        break;
      }
      if (size != p.records * kRecordSize) {
        problem = p.ref.path.string() + ": size " + std::to_string(size) + " != 100 x " + std::to_string(p.records);
        break;
      }
      if (file_checksum(p.ref.path) != p.checksum) {
        problem = p.ref.path.string() + ": checksum mismatch";
        break;
      }
    }
    out.push_back(problem ? fail("manifest", *problem)
                          : pass("manifest", std::to_string(ds.manifest().partitions.size()) + " partitions"));
    if (problem) return out;
  }
  if (const auto& cfg = ds.manifest().config) {
    const bool ok = ds.total_records() == cfg->total_records();
    out.push_back(ok ? pass("record-count", std::to_string(ds.total_records()) + " records")
                     : fail("record-count", "manifest holds " + std::to_string(ds.total_records()) +
                                                " records, config implies " + std::to_string(cfg->total_records())));
  }

  std::optional<MarkTable> marks;
  if (opt.ground_truth) {
    try {
      marks = load_mark_table(root);
    } catch (const Error& e) {
      out.push_back(fail("flag-vs-marks", e.what()));
    }
  }

  ScanFindings f;
  try {
    scan_dataset(ds, marks ? &*marks : nullptr, opt.sample_records, f);
  } catch (const Error& e) {
    out.push_back(fail("codec-roundtrip", e.what()));
    return out;
  }
  out.push_back(f.codec_failure ? fail("codec-roundtrip", *f.codec_failure)
                                : pass("codec-roundtrip", std::to_string(f.roundtrip_checked) + " sampled records"));
  out.push_back(f.event_id_failure ? fail("event-id-unique", *f.event_id_failure)
                                   : pass("event-id-unique", "per-partition sequences increasing, node hashes distinct"));
  {
    std::optional<std::string> problem;
    for (auto& [entity, history] : f.entity_history) {
      std::sort(history.begin(), history.end());
      bool seen_one = false;
      for (std::size_t i = 0; i < history.size() && !problem; ++i) {
        if (i > 0 && history[i].first == history[i - 1].first && history[i].second != history[i - 1].second)
          problem = "entity " + id_to_string(entity) + ": conflicting flags at " + format_timestamp(history[i].first);
        if (seen_one && !history[i].second)
          problem = "entity " + id_to_string(entity) + ": flag returns to 0 at " + format_timestamp(history[i].first);
        seen_one = seen_one || history[i].second;
      }
      if (problem) break;
    }
    out.push_back(problem ? fail("flag-monotonicity", *problem)
                          : pass("flag-monotonicity", std::to_string(f.entity_history.size()) + " sampled entities"));
  }
  if (marks) {
    out.push_back(f.flag_failure ? fail("flag-vs-marks", *f.flag_failure)
                                 : pass("flag-vs-marks", std::to_string(f.flags_checked) + " records"));
  }

  // Cross-engine equivalence on the first two partitions.
  try {
    const Dataset subset = ds.head(2);
    bool ok = true;
    std::string detail;
    for (Benchmark b : {Benchmark::A, Benchmark::B}) {
      const std::string ref = result_csv(run_malstone(b, subset, {EngineKind::Reference, 1, 1, opt.work_dir}));
      const std::string mr =
          result_csv(run_malstone(b, subset, {EngineKind::MapReduce, 4, std::max(1u, opt.workers), opt.work_dir}));
      const std::string bk =
          result_csv(run_malstone(b, subset, {EngineKind::Bucketed, 8, std::max(1u, opt.workers), opt.work_dir}));
      if (mr != ref || bk != ref) {
        ok = false;
        detail = "MalStone " + std::string(to_string(b)) + ": " + (mr != ref ? "mapreduce" : "bucketed") +
                 " differs from reference";
        break;
      }
    }
    out.push_back(ok ? pass("engine-equivalence", std::to_string(subset.total_records()) + " records, A and B")
                     : fail("engine-equivalence", detail));
  } catch (const Error& e) {
    out.push_back(fail("engine-equivalence", e.what()));
  }

  // Full-output invariants, conservation and the A == terminal(B) identity.
  try {
    const EngineResult b = run_malstone_b(ds, {EngineKind::Reference, 1, 1, {}});
    const EngineResult a = run_malstone_a(ds, {EngineKind::Reference, 1, 1, {}});
    auto problems = check_result(b);
    auto a_problems = check_result(a);
    problems.insert(problems.end(), a_problems.begin(), a_problems.end());
    std::uint64_t events = 0, marked = 0;
    for (const auto& s : a.scores) {
      events += s.events;
      marked += s.marked;
    }
    if (events != f.records || marked != f.flagged)
      problems.push_back("conservation: per-site totals do not add up to the dataset's record/flag counts");
    if (terminal_scores(b.series) != a.scores) problems.push_back("MalStone A differs from terminal MalStone B rows");
    out.push_back(problems.empty() ? pass("spm-invariants", std::to_string(b.series.size()) + " site series")
                                   : fail("spm-invariants", problems.front()));
  } catch (const Error& e) {
    out.push_back(fail("spm-invariants", e.what()));
  }
  return out;
}

}  // namespace malstone
