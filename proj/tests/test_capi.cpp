// Exercises the shared library through its C header only.
#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include "malstone/malstone.h"

namespace fs = std::filesystem;

namespace {

fs::path scratch(const char* name) {
  auto p = fs::temp_directory_path() / ("malstone-capi-" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  return p;
}

ms_gen_config small() {
  ms_gen_config c;
  ms_config_default(&c);
  c.nodes = 2;
  c.records_per_node = 20000;
  c.total_sites = 4000;
  c.marked_sites = 40;
  c.entities = 20000;
  c.master_seed = 99;
  return c;
}

}  // namespace

TEST(CApi, StatusNamesAndVersion) {
  EXPECT_STREQ(ms_status_name(MS_OK), "ok");
  EXPECT_NE(std::string(ms_version()).find('.'), std::string::npos);
  char out[13];
  ms_node_hash("", out);
  EXPECT_STREQ(out, "9ce484222325");
}

TEST(CApi, ConfigValidationAndPresets) {
  ms_gen_config c = small();
  char buf[256];
  EXPECT_EQ(ms_config_validate(&c, buf, sizeof buf), 0u);
  c.p_mark = 1.5;
  c.marked_sites = c.total_sites + 1;
  EXPECT_EQ(ms_config_validate(&c, buf, sizeof buf), 2u);
  EXPECT_NE(std::string(buf).find("p_mark outside [0,1]"), std::string::npos);
  EXPECT_EQ(ms_config_preset("desk-10M", &c), MS_OK);
  EXPECT_EQ(uint64_t{c.nodes} * c.records_per_node, 10'000'000u);
  EXPECT_EQ(ms_config_preset("Z-9", &c), MS_ERR_INVALID_ARGUMENT);
  EXPECT_NE(std::string(ms_last_error()), "");
  EXPECT_EQ(ms_preset_requires_force("A-10"), 1);
  EXPECT_EQ(ms_preset_requires_force("desk-10M"), 0);
}

TEST(CApi, GenerateRunVerifyReport) {
  const auto dir = scratch("flow");
  ms_gen_config c = small();
  ms_gen_summary sum{};
  ASSERT_EQ(ms_generate(&c, dir.c_str(), 2, &sum), MS_OK) << ms_last_error();
  EXPECT_EQ(sum.records, 40000u);
  EXPECT_EQ(sum.bytes, 4'000'000u);
  EXPECT_EQ(sum.partitions, 2u);

  ms_dataset* ds = nullptr;
  ASSERT_EQ(ms_dataset_open(dir.c_str(), &ds), MS_OK);
  EXPECT_EQ(ms_dataset_records(ds), 40000u);
  EXPECT_EQ(ms_dataset_bytes(ds), 4'000'000u);
  EXPECT_EQ(ms_dataset_nodes(ds), 2u);

  ms_result* ref = nullptr;
  ms_result* mr = nullptr;
  ASSERT_EQ(ms_run(ds, MS_BENCHMARK_B, MS_ENGINE_REFERENCE, 1, 1, nullptr, &ref), MS_OK);
  ASSERT_EQ(ms_run(ds, MS_BENCHMARK_B, MS_ENGINE_BUCKETED, 8, 2, (dir / "work").c_str(), &mr), MS_OK);
  size_t la = 0, lb = 0;
  const std::string a = ms_result_csv(ref, &la), b = ms_result_csv(mr, &lb);
  EXPECT_EQ(a, b);
  EXPECT_EQ(la, a.size());
  EXPECT_GT(ms_result_sites(ref), 0u);
  EXPECT_GE(ms_result_timing(mr).total_seconds, 0.0);
  ms_result_free(ref);
  ms_result_free(mr);

  ms_report* rep = nullptr;
  ASSERT_EQ(ms_benchmark_run(ds, MS_BENCHMARK_A, MS_ENGINE_MAPREDUCE, 4, 2, 2, nullptr, (dir / "a.csv").c_str(), &rep),
            MS_OK);
  EXPECT_EQ(ms_report_runs(rep), 2u);
  const double avg = ms_report_average_seconds(rep);
  EXPECT_NEAR(avg, (ms_report_run_seconds(rep, 0) + ms_report_run_seconds(rep, 1)) / 2, 1e-12);
  ASSERT_EQ(ms_report_write(rep, (dir / "a.report.csv").c_str()), MS_OK);
  ms_report* back = nullptr;
  ASSERT_EQ(ms_report_read((dir / "a.report.csv").c_str(), &back), MS_OK);
  EXPECT_EQ(ms_report_runs(back), 2u);
  const ms_report* both[] = {rep, back};
  char* table = nullptr;
  ASSERT_EQ(ms_report_table(both, 2, 1, &table), MS_OK);
  EXPECT_EQ(std::string(table).rfind("row,", 0), 0u);
  ms_string_free(table);
  ms_report_free(rep);
  ms_report_free(back);

  size_t sites = 0;
  ASSERT_EQ(ms_oracle_write_csv(ds, 0, (dir / "oracle.csv").c_str(), &sites), MS_OK);
  EXPECT_GT(sites, 0u);
  ms_dataset_free(ds);

  ms_checks* checks = nullptr;
  ASSERT_EQ(ms_verify(dir.c_str(), 1, 5000, 2, &checks), MS_OK);
  ASSERT_GT(ms_checks_count(checks), 5u);
  for (size_t i = 0; i < ms_checks_count(checks); ++i) {
    const char* name = nullptr;
    const char* detail = nullptr;
    EXPECT_EQ(ms_checks_get(checks, i, &name, &detail), 1) << name << ": " << detail;
  }
  ms_checks_free(checks);
}

TEST(CApi, ErrorsMapToStatus) {
  ms_dataset* ds = nullptr;
  EXPECT_EQ(ms_dataset_open("/nonexistent/malstone", &ds), MS_ERR_IO);
  EXPECT_EQ(ds, nullptr);
  ms_gen_config c = small();
  c.records_per_node = 10;
  ms_gen_summary sum{};
  EXPECT_EQ(ms_generate(&c, scratch("infeasible").c_str(), 1, &sum), MS_ERR_CONFIG_INFEASIBLE);
  c = small();
  c.alpha = 0.5;
  EXPECT_EQ(ms_generate(&c, scratch("invalid").c_str(), 1, &sum), MS_ERR_CONFIG_INVALID);
  EXPECT_EQ(ms_run(nullptr, MS_BENCHMARK_A, MS_ENGINE_REFERENCE, 1, 1, nullptr, nullptr), MS_ERR_INVALID_ARGUMENT);
  ms_report* r = nullptr;
  EXPECT_EQ(ms_report_read("/nonexistent.csv", &r), MS_ERR_IO);
  ms_dataset_free(nullptr);
  ms_result_free(nullptr);
  ms_report_free(nullptr);
  ms_checks_free(nullptr);
}
