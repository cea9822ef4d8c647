#include <cstring>
#include <fstream>
#include <new>
#include <string>

#include "malstone/bench.hpp"
#include "malstone/engine.hpp"
#include "malstone/malgen.hpp"
#include "malstone/malstone.h"
#include "malstone/oracle.hpp"

using namespace malstone;

struct ms_dataset {
  Dataset ds;
};

struct ms_result {
  EngineResult result;
  std::string csv;
  bool csv_ready = false;
};

struct ms_report {
  RunReport report;
  std::string csv;
};

struct ms_checks {
  std::vector<CheckResult> checks;
};

namespace {

thread_local std::string g_last_error;

ms_status fail(ms_status s, const std::string& message) {
  g_last_error = message;
  return s;
}

// Translates the library's exception hierarchy into status codes.
template <class Fn>
ms_status guarded(Fn&& fn) {
  try {
    fn();
    return MS_OK;
  } catch (const ConfigInvalid& e) {
    return fail(MS_ERR_CONFIG_INVALID, e.what());
  } catch (const ConfigInfeasible& e) {
    return fail(MS_ERR_CONFIG_INFEASIBLE, e.what());
  } catch (const MalformedRecord& e) {
    return fail(MS_ERR_MALFORMED_RECORD, e.what());
  } catch (const TruncatedFile& e) {
    return fail(MS_ERR_TRUNCATED_FILE, e.what());
  } catch (const IoError& e) {
    return fail(MS_ERR_IO, e.what());
  } catch (const VerificationFailed& e) {
    return fail(MS_ERR_VERIFICATION, e.what());
  } catch (const ReportMismatch& e) {
    return fail(MS_ERR_REPORT_MISMATCH, e.what());
  } catch (const ContractViolation& e) {
    return fail(MS_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(MS_ERR_IO, e.what());
  } catch (const std::bad_alloc&) {
    return fail(MS_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(MS_ERR_INTERNAL, e.what());
  }
}

GenConfig from_c(const ms_gen_config& c) {
  GenConfig g;
  g.nodes = c.nodes;
  g.records_per_node = c.records_per_node;
  g.total_sites = c.total_sites;
  g.marked_sites = c.marked_sites;
  g.entities = c.entities;
  g.period_start = {c.period_start_year, c.period_start_month, c.period_start_day};
  g.period_days = c.period_days;
  g.p_mark = c.p_mark;
  g.delay_days = c.delay_days;
  g.alpha = c.alpha;
  g.events_min = c.events_min;
  g.events_max = c.events_max;
  g.background_mark_rate = c.background_mark_rate;
  g.master_seed = c.master_seed;
  return g;
}

void to_c(const GenConfig& g, ms_gen_config& c) {
  c.nodes = g.nodes;
  c.records_per_node = g.records_per_node;
  c.total_sites = g.total_sites;
  c.marked_sites = g.marked_sites;
  c.entities = g.entities;
  c.period_start_year = g.period_start.year;
  c.period_start_month = g.period_start.month;
  c.period_start_day = g.period_start.day;
  c.period_days = g.period_days;
  c.p_mark = g.p_mark;
  c.delay_days = g.delay_days;
  c.alpha = g.alpha;
  c.events_min = g.events_min;
  c.events_max = g.events_max;
  c.background_mark_rate = g.background_mark_rate;
  c.master_seed = g.master_seed;
}

EngineKind engine_of(ms_engine e) {
  switch (e) {
    case MS_ENGINE_MAPREDUCE: return EngineKind::MapReduce;
    case MS_ENGINE_BUCKETED: return EngineKind::Bucketed;
    case MS_ENGINE_REFERENCE: return EngineKind::Reference;
  }
  throw ContractViolation("unknown engine");
}

Benchmark benchmark_of(ms_benchmark b) {
  switch (b) {
    case MS_BENCHMARK_A: return Benchmark::A;
    case MS_BENCHMARK_B: return Benchmark::B;
  }
  throw ContractViolation("unknown benchmark");
}

void require(const void* p, const char* what) {
  if (!p) throw ContractViolation(std::string(what) + " must not be NULL");
}

}  // namespace

extern "C" {

const char* ms_version(void) { return "1.0.0"; }

const char* ms_status_name(ms_status s) {
  switch (s) {
    case MS_OK: return "ok";
    case MS_ERR_INVALID_ARGUMENT: return "invalid argument";
    case MS_ERR_CONFIG_INVALID: return "invalid configuration";
    case MS_ERR_CONFIG_INFEASIBLE: return "infeasible configuration";
    case MS_ERR_IO: return "I/O error";
    case MS_ERR_MALFORMED_RECORD: return "malformed record";
    case MS_ERR_TRUNCATED_FILE: return "truncated file";
    case MS_ERR_VERIFICATION: return "verification failed";
    case MS_ERR_REPORT_MISMATCH: return "report mismatch";
    case MS_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* ms_last_error(void) { return g_last_error.c_str(); }

void ms_config_default(ms_gen_config* cfg) {
  if (cfg) to_c(GenConfig{}, *cfg);
}

ms_status ms_config_preset(const char* name, ms_gen_config* cfg) {
  return guarded([&] {
    require(name, "name");
    require(cfg, "cfg");
    auto preset = preset_config(name);
    if (!preset) throw ContractViolation(std::string("unknown preset '") + name + "'");
    to_c(*preset, *cfg);
  });
}

int ms_preset_requires_force(const char* name) { return name && preset_requires_force(name) ? 1 : 0; }

size_t ms_config_validate(const ms_gen_config* cfg, char* buf, size_t buf_len) {
  std::vector<std::string> v = cfg ? validate_config(from_c(*cfg)) : std::vector<std::string>{"cfg is NULL"};
  std::string joined;
  for (const auto& s : v) joined += s + "\n";
  if (buf && buf_len > 0) {
    const std::size_t n = std::min(joined.size(), buf_len - 1);
    std::memcpy(buf, joined.data(), n);
    buf[n] = '\0';
  }
  return v.size();
}

ms_status ms_generate(const ms_gen_config* cfg, const char* data_dir, uint32_t workers, ms_gen_summary* summary) {
  return guarded([&] {
    require(cfg, "cfg");
    require(data_dir, "data_dir");
    const GenerateSummary s = generate_dataset(from_c(*cfg), data_dir, workers);
    if (summary) {
      summary->records = s.manifest.total_records();
      summary->bytes = s.manifest.total_bytes();
      summary->partitions = static_cast<uint32_t>(s.manifest.partitions.size());
      summary->marked_events = s.marked_events;
      summary->marked_entities = s.marked_entities;
      summary->seed_seconds = s.seed_time.count();
      summary->scatter_seconds = s.scatter_time.count();
      summary->local_seconds = s.local_time.count();
    }
  });
}

void ms_node_hash(const char* node_name, char out[13]) {
  const std::string hex = node_hash_hex(node_name ? node_name : "");
  std::memcpy(out, hex.c_str(), 13);
}

ms_status ms_dataset_open(const char* data_dir, ms_dataset** out) {
  return guarded([&] {
    require(data_dir, "data_dir");
    require(out, "out");
    *out = new ms_dataset{Dataset::open(data_dir)};
  });
}

void ms_dataset_free(ms_dataset* ds) { delete ds; }
uint64_t ms_dataset_records(const ms_dataset* ds) { return ds ? ds->ds.total_records() : 0; }
uint64_t ms_dataset_bytes(const ms_dataset* ds) { return ds ? ds->ds.manifest().total_bytes() : 0; }
uint32_t ms_dataset_nodes(const ms_dataset* ds) { return ds ? ds->ds.node_count() : 0; }

ms_status ms_run(const ms_dataset* ds, ms_benchmark benchmark, ms_engine engine, uint32_t reducers, uint32_t workers,
                 const char* work_dir, ms_result** out) {
  return guarded([&] {
    require(ds, "dataset");
    require(out, "out");
    EngineOptions opt{engine_of(engine), reducers, workers, work_dir ? work_dir : ""};
    *out = new ms_result{run_malstone(benchmark_of(benchmark), ds->ds, opt), {}, false};
  });
}

void ms_result_free(ms_result* r) { delete r; }
size_t ms_result_sites(const ms_result* r) { return r ? r->result.site_count() : 0; }

ms_timing ms_result_timing(const ms_result* r) {
  if (!r) return {};
  const auto& t = r->result.timing;
  return {t.total.count(), t.scan_map.count(), t.shuffle.count(), t.reduce.count()};
}

const char* ms_result_csv(ms_result* r, size_t* len) {
  if (!r) return nullptr;
  if (!r->csv_ready) {
    r->csv = result_csv(r->result);
    r->csv_ready = true;
  }
  if (len) *len = r->csv.size();
  return r->csv.c_str();
}

ms_status ms_result_write_csv(ms_result* r, const char* path) {
  return guarded([&] {
    require(r, "result");
    require(path, "path");
    write_result_csv(r->result, path);
  });
}

ms_status ms_benchmark_run(const ms_dataset* ds, ms_benchmark benchmark, ms_engine engine, uint32_t reducers,
                           uint32_t workers, uint32_t runs, const char* work_dir, const char* result_path,
                           ms_report** out) {
  return guarded([&] {
    require(ds, "dataset");
    EngineOptions opt{engine_of(engine), reducers, workers, work_dir ? work_dir : ""};
    RunOutcome outcome = run_benchmark(ds->ds, benchmark_of(benchmark), opt, runs);
    if (result_path) {
      std::ofstream f(result_path, std::ios::binary | std::ios::trunc);
      f << outcome.csv;
      if (!f) throw IoError(std::string(result_path) + ": write failed");
    }
    if (out) *out = new ms_report{std::move(outcome.report), {}};
  });
}

ms_status ms_oracle_write_csv(const ms_dataset* ds, int weekly, const char* path, size_t* sites) {
  return guarded([&] {
    require(ds, "dataset");
    require(path, "path");
    const auto& cfg = ds->ds.manifest().config;
    if (!cfg) throw ContractViolation("oracle needs a generated dataset (manifest without config)");
    const MarkTable marks = load_mark_table(ds->ds.root());
    const Window exposure{cfg->period_begin(), cfg->period_last()};
    const Timestamp horizon = cfg->period_last() + cfg->delay_seconds();
    std::string csv;
    std::size_t n = 0;
    if (weekly) {
      const auto ends = weekly_monitor_ends(exposure.start, horizon);
      const auto series = oracle_entity_spm_series(ds->ds, marks, exposure, ends);
      csv = oracle_series_csv(series);
      n = series.size();
    } else {
      const auto scores = oracle_entity_spm(ds->ds, marks, exposure, {exposure.start, horizon});
      csv = oracle_csv(scores);
      n = scores.size();
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    f << csv;
    if (!f) throw IoError(std::string(path) + ": write failed");
    if (sites) *sites = n;
  });
}

ms_status ms_report_read(const char* path, ms_report** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new ms_report{read_report(path), {}};
  });
}

ms_status ms_report_write(const ms_report* r, const char* path) {
  return guarded([&] {
    require(r, "report");
    require(path, "path");
    write_report(r->report, path);
  });
}

void ms_report_free(ms_report* r) { delete r; }
uint32_t ms_report_runs(const ms_report* r) { return r ? static_cast<uint32_t>(r->report.runs.size()) : 0; }

double ms_report_run_seconds(const ms_report* r, uint32_t i) {
  return r && i < r->report.runs.size() ? r->report.runs[i].seconds : 0.0;
}

double ms_report_average_seconds(const ms_report* r) { return r ? r->report.average_seconds() : 0.0; }

const char* ms_report_csv(ms_report* r, size_t* len) {
  if (!r) return nullptr;
  r->csv = report_csv(r->report);
  if (len) *len = r->csv.size();
  return r->csv.c_str();
}

ms_status ms_report_table(const ms_report* const* reports, size_t count, int format, char** out) {
  return guarded([&] {
    require(reports, "reports");
    require(out, "out");
    std::vector<RunReport> all;
    for (size_t i = 0; i < count; ++i) {
      require(reports[i], "report");
      all.push_back(reports[i]->report);
    }
    const std::string table = render_report_table(all, format == 1 ? TableFormat::Csv : TableFormat::Text);
    char* buf = new char[table.size() + 1];
    std::memcpy(buf, table.c_str(), table.size() + 1);
    *out = buf;
  });
}

void ms_string_free(char* s) { delete[] s; }

ms_status ms_verify(const char* data_dir, int with_ground_truth, uint64_t sample_records, uint32_t workers,
                    ms_checks** out) {
  return guarded([&] {
    require(data_dir, "data_dir");
    require(out, "out");
    VerifyOptions opt;
    opt.ground_truth = with_ground_truth != 0;
    if (sample_records > 0) opt.sample_records = sample_records;
    opt.workers = workers;
    *out = new ms_checks{verify_dataset(data_dir, opt)};
  });
}

void ms_checks_free(ms_checks* c) { delete c; }
size_t ms_checks_count(const ms_checks* c) { return c ? c->checks.size() : 0; }

int ms_checks_get(const ms_checks* c, size_t i, const char** name, const char** detail) {
  if (!c || i >= c->checks.size()) return 0;
  const auto& check = c->checks[i];
  if (name) *name = check.name.c_str();
  if (detail) *detail = check.detail.c_str();
  return check.passed ? 1 : 0;
}

}  // extern "C"
