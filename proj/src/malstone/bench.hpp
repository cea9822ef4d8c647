// Benchmark harness: timed runs, run reports, comparison tables, dataset verification.
#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "malstone/dataset.hpp"
#include "malstone/engine.hpp"

namespace malstone {

struct ReportMismatch : Error {
  using Error::Error;
};

struct DatasetDescriptor {
  std::uint64_t records = 0;
  std::uint64_t bytes = 0;
  std::uint32_t nodes = 0;

  friend bool operator==(const DatasetDescriptor&, const DatasetDescriptor&) = default;
};

DatasetDescriptor describe(const Dataset& ds);

struct RunTiming {
  double seconds = 0;
  double scan_map = 0;
  double shuffle = 0;
  double reduce = 0;

  friend bool operator==(const RunTiming&, const RunTiming&) = default;
};

struct RunReport {
  Benchmark benchmark = Benchmark::A;
  EngineKind engine = EngineKind::Reference;
  DatasetDescriptor dataset;
  std::uint32_t reducers = 1;
  unsigned workers = 1;
  std::vector<RunTiming> runs;
  std::optional<GenConfig> config;

  double average_seconds() const;
  /// e.g. "mapreduce R=4 w=8"
  std::string label() const;
};

struct RunOutcome {
  RunReport report;
  EngineResult result;
  std::string csv;
};

/// Executes `runs` timed passes; throws VerificationFailed if any pass's
/// result CSV differs from the first.
RunOutcome run_benchmark(const Dataset& ds, Benchmark b, const EngineOptions& opt, unsigned runs);

/// "XmYs" with two fractional digits on the seconds, e.g. "454m 13.00s".
std::string format_minutes_seconds(double seconds);

/// Report CSV: a "# config" comment line, then
/// benchmark,engine,records,bytes,nodes,reducers,workers,run_index,seconds,scan_map_seconds,shuffle_seconds,reduce_seconds
/// with one row per run and a final run_index = avg row.
std::string report_csv(const RunReport& r);
RunReport parse_report_csv(std::string_view text);
void write_report(const RunReport& r, const std::filesystem::path& path);
RunReport read_report(const std::filesystem::path& path);

enum class TableFormat { Text, Csv };

/// Comparison table, one column per report, rows Run 1..N and Average.
/// Throws ReportMismatch unless all reports share benchmark and dataset.
std::string render_report_table(std::span<const RunReport> reports, TableFormat format);

struct ParsedTable {
  std::vector<std::string> columns;
  std::vector<std::string> row_labels;
  std::vector<std::vector<std::optional<double>>> cells;  // [row][column]
};
ParsedTable parse_report_table_csv(std::string_view text);

struct CheckResult {
  std::string name;
  bool passed = true;
  std::string detail;
};

struct VerifyOptions {
  bool ground_truth = false;
  std::uint64_t sample_records = 10'000;
  unsigned workers = 1;
  std::filesystem::path work_dir;
};

std::vector<CheckResult> verify_dataset(const std::filesystem::path& root, const VerifyOptions& opt);

}  // namespace malstone
