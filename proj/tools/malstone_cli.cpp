// malstone: generate site-entity-mark datasets, run MalStone A/B, verify, report.
//
// Exit codes: 0 success, 1 validation/verification failure, 2 I/O or infeasible.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "malstone/malstone.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitIo = 2;

int exit_code_for(ms_status s) {
  switch (s) {
    case MS_OK: return kExitOk;
    case MS_ERR_INVALID_ARGUMENT:
    case MS_ERR_CONFIG_INVALID:
    case MS_ERR_VERIFICATION:
    case MS_ERR_REPORT_MISMATCH: return kExitInvalid;
    default: return kExitIo;
  }
}

int report_failure(ms_status s) {
  std::cerr << "error: " << ms_status_name(s) << ": " << ms_last_error() << "\n";
  return exit_code_for(s);
}

std::string minutes_seconds(double seconds) {
  const long long centis = std::llround(seconds * 100.0);
  char buf[48];
  std::snprintf(buf, sizeof buf, "%lldm %lld.%02llds", centis / 6000, centis % 6000 / 100, centis % 100);
  return buf;
}

std::string default_data_dir() {
  const char* env = std::getenv("MALSTONE_DATA_DIR");
  return env ? env : "";
}

unsigned default_workers() { return std::max(1u, std::thread::hardware_concurrency()); }

struct GenerateArgs {
  std::string data_dir = default_data_dir();
  std::string preset;
  bool force = false;
  unsigned workers = default_workers();
  ms_gen_config cfg{};
  std::string start;
};

void add_generate(CLI::App& app, GenerateArgs& a) {
  ms_config_default(&a.cfg);
  auto* cmd = app.add_subcommand("generate", "Generate a dataset (seed, scatter, local generation)");
  cmd->add_option("--data-dir", a.data_dir, "Dataset root (default $MALSTONE_DATA_DIR)");
  cmd->add_option("--preset", a.preset, "desk-10M | A-10 | A-100 | A-1000 | B-10 | B-100 | B-1000");
  cmd->add_flag("--force", a.force, "Allow presets beyond workstation scale");
  cmd->add_option("--nodes", a.cfg.nodes, "Node partitions");
  cmd->add_option("--records-per-node", a.cfg.records_per_node, "Records per node");
  cmd->add_option("--sites", a.cfg.total_sites, "Total sites");
  cmd->add_option("--marked-sites", a.cfg.marked_sites, "Marked sites (ids 0..n-1)");
  cmd->add_option("--entities", a.cfg.entities, "Entity pool size");
  cmd->add_option("--days", a.cfg.period_days, "Generation period in days");
  cmd->add_option("--start", a.start, "Period start date YYYY-MM-DD (default 2009-01-01)");
  cmd->add_option("--p-mark", a.cfg.p_mark, "Mark probability per marked-site visit");
  cmd->add_option("--delay-days", a.cfg.delay_days, "Delay between visit and mark");
  cmd->add_option("--alpha", a.cfg.alpha, "Power-law tail index of per-site event counts");
  cmd->add_option("--events-min", a.cfg.events_min, "Minimum events per site");
  cmd->add_option("--events-max", a.cfg.events_max, "Maximum events per site");
  cmd->add_option("--background-mark-rate", a.cfg.background_mark_rate, "Probability of a background mark");
  cmd->add_option("--seed", a.cfg.master_seed, "Master seed");
  cmd->add_option("--workers", a.workers, "Parallel node generators");
}

int cmd_generate(GenerateArgs& a, const CLI::App& sub) {
  if (a.data_dir.empty()) {
    std::cerr << "error: --data-dir or MALSTONE_DATA_DIR is required\n";
    return kExitInvalid;
  }
  ms_gen_config cfg = a.cfg;
  if (!a.preset.empty()) {
    if (ms_status s = ms_config_preset(a.preset.c_str(), &cfg); s != MS_OK) return report_failure(s);
    // explicit flags override the preset
    auto given = [&](const char* flag) { return sub.count(flag) > 0; };
    if (given("--nodes")) cfg.nodes = a.cfg.nodes;
    if (given("--records-per-node")) cfg.records_per_node = a.cfg.records_per_node;
    if (given("--sites")) cfg.total_sites = a.cfg.total_sites;
    if (given("--marked-sites")) cfg.marked_sites = a.cfg.marked_sites;
    if (given("--entities")) cfg.entities = a.cfg.entities;
    if (given("--days")) cfg.period_days = a.cfg.period_days;
    if (given("--p-mark")) cfg.p_mark = a.cfg.p_mark;
    if (given("--delay-days")) cfg.delay_days = a.cfg.delay_days;
    if (given("--alpha")) cfg.alpha = a.cfg.alpha;
    if (given("--events-min")) cfg.events_min = a.cfg.events_min;
    if (given("--events-max")) cfg.events_max = a.cfg.events_max;
    if (given("--background-mark-rate")) cfg.background_mark_rate = a.cfg.background_mark_rate;
    if (given("--seed")) cfg.master_seed = a.cfg.master_seed;
    if (ms_preset_requires_force(a.preset.c_str()) && !a.force) {
      std::cerr << "error: preset " << a.preset << " implies " << cfg.nodes * cfg.records_per_node << " records / "
                << cfg.nodes * cfg.records_per_node * 100 << " bytes; pass --force to generate it\n";
      return kExitInvalid;
    }
  }
  if (!a.start.empty()) {
    int y = 0;
    unsigned m = 0, d = 0;
    if (std::sscanf(a.start.c_str(), "%d-%u-%u", &y, &m, &d) != 3) {
      std::cerr << "error: --start must be YYYY-MM-DD\n";
      return kExitInvalid;
    }
    cfg.period_start_year = y;
    cfg.period_start_month = m;
    cfg.period_start_day = d;
  }
  char violations[2048];
  if (ms_config_validate(&cfg, violations, sizeof violations) > 0) {
    std::cerr << "invalid configuration:\n" << violations;
    return kExitInvalid;
  }
  ms_gen_summary summary{};
  if (ms_status s = ms_generate(&cfg, a.data_dir.c_str(), a.workers, &summary); s != MS_OK) return report_failure(s);
  std::printf("records        %llu\n", static_cast<unsigned long long>(summary.records));
  std::printf("bytes          %llu\n", static_cast<unsigned long long>(summary.bytes));
  std::printf("partitions     %u\n", summary.partitions);
  std::printf("marked events  %llu\n", static_cast<unsigned long long>(summary.marked_events));
  std::printf("marked entities %llu\n", static_cast<unsigned long long>(summary.marked_entities));
  std::printf("seed phase     %s\n", minutes_seconds(summary.seed_seconds).c_str());
  std::printf("scatter phase  %s\n", minutes_seconds(summary.scatter_seconds).c_str());
  std::printf("local phase    %s\n", minutes_seconds(summary.local_seconds).c_str());
  const double total = summary.seed_seconds + summary.scatter_seconds + summary.local_seconds;
  if (total > 0) std::printf("throughput     %.0f records/s\n", static_cast<double>(summary.records) / total);
  return kExitOk;
}

struct RunArgs {
  std::string data_dir = default_data_dir();
  std::string benchmark = "A";
  std::string engine = "mapreduce";
  unsigned reducers = 4;
  unsigned workers = default_workers();
  unsigned runs = 3;
  std::string out;
  std::string report;
  std::string work_dir;
};

void add_run(CLI::App& app, RunArgs& a) {
  auto* cmd = app.add_subcommand("run", "Run MalStone A or B with timing");
  cmd->add_option("--data-dir", a.data_dir, "Dataset root (default $MALSTONE_DATA_DIR)");
  cmd->add_option("--benchmark", a.benchmark, "A | B")->check(CLI::IsMember({"A", "B"}));
  cmd->add_option("--engine", a.engine, "mapreduce | bucketed | reference")
      ->check(CLI::IsMember({"mapreduce", "bucketed", "reference"}));
  cmd->add_option("--reducers", a.reducers, "Reducer count (mapreduce) or bucket count (bucketed)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--workers", a.workers, "Worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--runs", a.runs, "Timed runs")->check(CLI::PositiveNumber);
  cmd->add_option("--out", a.out, "Result CSV path (default malstone-<benchmark>-<engine>.csv)");
  cmd->add_option("--report", a.report, "Run report CSV path (default <out>.report.csv)");
  cmd->add_option("--work-dir", a.work_dir, "Scratch directory for bucket files");
}

int cmd_run(const RunArgs& a) {
  if (a.data_dir.empty()) {
    std::cerr << "error: --data-dir or MALSTONE_DATA_DIR is required\n";
    return kExitInvalid;
  }
  const ms_benchmark bench = a.benchmark == "A" ? MS_BENCHMARK_A : MS_BENCHMARK_B;
  const ms_engine engine = a.engine == "mapreduce"  ? MS_ENGINE_MAPREDUCE
                           : a.engine == "bucketed" ? MS_ENGINE_BUCKETED
                                                    : MS_ENGINE_REFERENCE;
  const std::string out = a.out.empty() ? "malstone-" + a.benchmark + "-" + a.engine + ".csv" : a.out;
  std::string report_path = a.report;
  if (report_path.empty()) {
    report_path = out;
    if (report_path.size() > 4 && report_path.ends_with(".csv")) report_path.resize(report_path.size() - 4);
    report_path += ".report.csv";
  }

  ms_dataset* ds = nullptr;
  if (ms_status s = ms_dataset_open(a.data_dir.c_str(), &ds); s != MS_OK) return report_failure(s);
  ms_report* report = nullptr;
  ms_status s = ms_benchmark_run(ds, bench, engine, a.reducers, a.workers, a.runs,
                                 a.work_dir.empty() ? nullptr : a.work_dir.c_str(), out.c_str(), &report);
  ms_dataset_free(ds);
  if (s != MS_OK) return report_failure(s);
  s = ms_report_write(report, report_path.c_str());
  if (s != MS_OK) {
    ms_report_free(report);
    return report_failure(s);
  }
  const ms_report* one[] = {report};
  char* table = nullptr;
  if (ms_report_table(one, 1, 0, &table) == MS_OK) {
    std::cout << table;
    ms_string_free(table);
  }
  std::cout << "result  " << out << "\nreport  " << report_path << "\n";
  ms_report_free(report);
  return kExitOk;
}

struct VerifyArgs {
  std::string data_dir = default_data_dir();
  bool ground_truth = false;
  std::uint64_t sample = 10'000;
  unsigned workers = default_workers();
};

void add_verify(CLI::App& app, VerifyArgs& a) {
  auto* cmd = app.add_subcommand("verify", "Check a dataset and the engines against their contracts");
  cmd->add_option("--data-dir", a.data_dir, "Dataset root (default $MALSTONE_DATA_DIR)");
  cmd->add_flag("--with-ground-truth", a.ground_truth, "Check flags against seed/marks.tsv");
  cmd->add_option("--sample", a.sample, "Sampled records for round-trip and monotonicity checks");
  cmd->add_option("--workers", a.workers, "Worker threads for the engine cross-check");
}

int cmd_verify(const VerifyArgs& a) {
  if (a.data_dir.empty()) {
    std::cerr << "error: --data-dir or MALSTONE_DATA_DIR is required\n";
    return kExitInvalid;
  }
  ms_checks* checks = nullptr;
  if (ms_status s = ms_verify(a.data_dir.c_str(), a.ground_truth, a.sample, a.workers, &checks); s != MS_OK)
    return report_failure(s);
  int code = kExitOk;
  const char* first_failure = nullptr;
  for (size_t i = 0; i < ms_checks_count(checks); ++i) {
    const char* name = nullptr;
    const char* detail = nullptr;
    const bool ok = ms_checks_get(checks, i, &name, &detail) != 0;
    std::printf("[%s] %-20s %s\n", ok ? "PASS" : "FAIL", name, detail);
    if (!ok && !first_failure) first_failure = detail;
    if (!ok) code = kExitInvalid;
  }
  if (first_failure) std::fprintf(stderr, "verification failed: %s\n", first_failure);
  ms_checks_free(checks);
  return code;
}

struct ReportArgs {
  std::vector<std::string> inputs;
  std::string format = "text";
  std::string out;
};

void add_report(CLI::App& app, ReportArgs& a) {
  auto* cmd = app.add_subcommand("report", "Merge run reports into a comparison table");
  cmd->add_option("--inputs", a.inputs, "Run report CSV files")->required()->expected(1, -1);
  cmd->add_option("--format", a.format, "text | csv")->check(CLI::IsMember({"text", "csv"}));
  cmd->add_option("--out", a.out, "Write the table here instead of stdout");
}

int cmd_report(const ReportArgs& a) {
  std::vector<ms_report*> reports;
  auto release = [&] {
    for (auto* r : reports) ms_report_free(r);
  };
  for (const auto& path : a.inputs) {
    ms_report* r = nullptr;
    if (ms_status s = ms_report_read(path.c_str(), &r); s != MS_OK) {
      release();
      return report_failure(s);
    }
    reports.push_back(r);
  }
  std::vector<const ms_report*> view(reports.begin(), reports.end());
  char* table = nullptr;
  ms_status s = ms_report_table(view.data(), view.size(), a.format == "csv" ? 1 : 0, &table);
  release();
  if (s != MS_OK) return report_failure(s);
  if (a.out.empty()) {
    std::cout << table;
  } else {
    std::FILE* f = std::fopen(a.out.c_str(), "wb");
    const bool ok = f && std::fputs(table, f) >= 0;
    if (f) std::fclose(f);
    if (!ok) {
      ms_string_free(table);
      std::cerr << "error: cannot write " << a.out << "\n";
      return kExitIo;
    }
  }
  ms_string_free(table);
  return kExitOk;
}

struct OracleArgs {
  std::string data_dir = default_data_dir();
  bool series = false;
  std::string out = "malstone-oracle.csv";
};

void add_oracle(CLI::App& app, OracleArgs& a) {
  auto* cmd = app.add_subcommand("oracle", "Entity-set SPM over the generation period, from ground truth");
  cmd->add_option("--data-dir", a.data_dir, "Dataset root (default $MALSTONE_DATA_DIR)");
  cmd->add_flag("--series", a.series, "Weekly nested monitor windows instead of a single window");
  cmd->add_option("--out", a.out, "Output CSV path");
}

int cmd_oracle(const OracleArgs& a) {
  ms_dataset* ds = nullptr;
  if (ms_status s = ms_dataset_open(a.data_dir.c_str(), &ds); s != MS_OK) return report_failure(s);
  size_t sites = 0;
  ms_status s = ms_oracle_write_csv(ds, a.series ? 1 : 0, a.out.c_str(), &sites);
  ms_dataset_free(ds);
  if (s != MS_OK) return report_failure(s);
  std::cout << sites << " sites -> " << a.out << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MalStone benchmark kit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", ms_version());

  GenerateArgs gen;
  RunArgs run;
  VerifyArgs verify;
  ReportArgs report;
  OracleArgs oracle;
  add_generate(app, gen);
  add_run(app, run);
  add_verify(app, verify);
  add_report(app, report);
  add_oracle(app, oracle);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitInvalid;
  }

  const CLI::App* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();
  if (name == "generate") return cmd_generate(gen, *sub);
  if (name == "run") return cmd_run(run);
  if (name == "verify") return cmd_verify(verify);
  if (name == "report") return cmd_report(report);
  if (name == "oracle") return cmd_oracle(oracle);
  return kExitInvalid;
}
