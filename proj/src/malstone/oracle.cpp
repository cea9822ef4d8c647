#include "malstone/oracle.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

#include "malstone/engine.hpp"

namespace malstone {

namespace {

using EntitySets = std::unordered_map<Id, std::unordered_set<Id, IdHash>, IdHash>;

class ExposureCollector {
 public:
  ExposureCollector(const MarkTable& marks, const Window& exposure) : marks_(marks), exposure_(exposure) {}

  void add(const EventRecord& r) {
    if (!exposure_.contains(r.timestamp)) return;
    if (auto mark = marks_.find(r.entity_id); mark && !(r.timestamp < *mark)) return;
    sets_[r.site_id].insert(r.entity_id);
  }

  // Site ids ascending.
  std::vector<Id> sites() const {
    std::vector<Id> out;
    out.reserve(sets_.size());
    for (const auto& [site, _] : sets_) out.push_back(site);
    std::sort(out.begin(), out.end());
    return out;
  }
  const std::unordered_set<Id, IdHash>& visitors(Id site) const { return sets_.at(site); }

 private:
  const MarkTable& marks_;
  Window exposure_;
  EntitySets sets_;
};

std::vector<OracleScore> score_sites(const ExposureCollector& c, const MarkTable& marks, const Window& monitor) {
  std::vector<OracleScore> out;
  for (Id site : c.sites()) {
    const auto& a = c.visitors(site);
    std::uint64_t b = 0;
    for (Id e : a)
      if (auto m = marks.find(e); m && monitor.contains(*m)) ++b;
    out.push_back({site, a.size(), b, static_cast<double>(b) / static_cast<double>(a.size())});
  }
  return out;
}

std::vector<OracleSeries> series_sites(const ExposureCollector& c, const MarkTable& marks,
                                       std::span<const Timestamp> ends, Timestamp start) {
  for (std::size_t i = 1; i < ends.size(); ++i)
    if (!(ends[i - 1] < ends[i])) throw ContractViolation("monitor ends must be strictly ascending");
  std::vector<OracleSeries> out;
  std::vector<Timestamp> mark_times;
  for (Id site : c.sites()) {
    const auto& a = c.visitors(site);
    mark_times.clear();
    for (Id e : a)
      if (auto m = marks.find(e); m && start <= *m) mark_times.push_back(*m);
    std::sort(mark_times.begin(), mark_times.end());
    OracleSeries s{site, a.size(), {}};
    std::size_t covered = 0;
    for (Timestamp end : ends) {
      while (covered < mark_times.size() && mark_times[covered] <= end) ++covered;
      const std::uint64_t b = end < start ? 0 : covered;
      s.points.push_back({end, b, static_cast<double>(b) / static_cast<double>(a.size())});
    }
    out.push_back(std::move(s));
  }
  return out;
}

ExposureCollector collect(const Dataset& ds, const MarkTable& marks, const Window& exposure) {
  ExposureCollector c(marks, exposure);
  for (const auto& ref : ds.partitions()) scan_partition(ref, [&](const EventRecord& r) { c.add(r); });
  return c;
}

ExposureCollector collect(std::span<const EventRecord> records, const MarkTable& marks, const Window& exposure) {
  ExposureCollector c(marks, exposure);
  for (const auto& r : records) c.add(r);
  return c;
}

}  // namespace

std::vector<OracleScore> oracle_entity_spm(std::span<const EventRecord> records, const MarkTable& marks,
                                           const Window& exposure, const Window& monitor) {
  return score_sites(collect(records, marks, exposure), marks, monitor);
}

std::vector<OracleScore> oracle_entity_spm(const Dataset& ds, const MarkTable& marks, const Window& exposure,
                                           const Window& monitor) {
  return score_sites(collect(ds, marks, exposure), marks, monitor);
}

std::vector<OracleSeries> oracle_entity_spm_series(std::span<const EventRecord> records, const MarkTable& marks,
                                                   const Window& exposure, std::span<const Timestamp> monitor_ends,
                                                   std::optional<Timestamp> monitor_start) {
  return series_sites(collect(records, marks, exposure), marks, monitor_ends,
                      monitor_start.value_or(exposure.start));
}

std::vector<OracleSeries> oracle_entity_spm_series(const Dataset& ds, const MarkTable& marks, const Window& exposure,
                                                   std::span<const Timestamp> monitor_ends,
                                                   std::optional<Timestamp> monitor_start) {
  return series_sites(collect(ds, marks, exposure), marks, monitor_ends, monitor_start.value_or(exposure.start));
}

std::vector<Timestamp> weekly_monitor_ends(Timestamp start, Timestamp end) {
  std::vector<Timestamp> out;
  constexpr std::int64_t kWeek = 7 * kSecondsPerDay;
  for (Timestamp t = start + (kWeek - 1); t < end; t = t + kWeek) out.push_back(t);
  out.push_back(end);
  return out;
}

std::string oracle_csv(std::span<const OracleScore> scores) {
  std::string out = "site_id,a_size,b_size,rho\n";
  for (const auto& s : scores)
    out += id_to_string(s.site_id) + ',' + std::to_string(s.a_size) + ',' + std::to_string(s.b_size) + ',' +
           format_rho(s.rho) + '\n';
  return out;
}

std::string oracle_series_csv(std::span<const OracleSeries> series) {
  std::string out = "site_id,monitor_end,a_size,b_size,rho\n";
  for (const auto& s : series)
    for (const auto& p : s.points)
      out += id_to_string(s.site_id) + ',' + format_timestamp(p.monitor_end) + ',' + std::to_string(s.a_size) + ',' +
             std::to_string(p.b_size) + ',' + format_rho(p.rho) + '\n';
  return out;
}

}  // namespace malstone
