#include "isp/report.hpp"

#include <fstream>

#include "isp/error.hpp"

namespace isp::report {

json label_json(const Label& label) {
  return json{{"category", label.category}, {"value", label.value}};
}

json selection_json(const Selection& selection) {
  json out;
  out["size"] = selection.item_ids.size();
  out["item_ids"] = selection.item_ids;
  out["objective"] = selection.objective;
  out["covered_rows"] = selection.covered_rows;
  out["optimal"] = selection.optimal;
  if (selection.round) out["round"] = *selection.round;
  if (selection.per_item_weight) out["per_item_weight"] = *selection.per_item_weight;
  return out;
}

json coverage_json(const CoverageReport& coverage) {
  json out;
  out["covered"] = coverage.overall.covered;
  out["total"] = coverage.overall.total;
  out["fraction"] = coverage.overall.fraction();
  json per;
  for (const auto& [category, cc] : coverage.per_category) {
    per[category] =
        json{{"covered", cc.covered}, {"total", cc.total}, {"fraction", cc.fraction()}};
  }
  out["per_category"] = std::move(per);
  json unc = json::array();
  for (const Label& label : coverage.uncoverable) unc.push_back(label_json(label));
  out["uncoverable"] = std::move(unc);
  return out;
}

json incidence_json(const IncidenceMatrix& incidence) {
  json out;
  out["rows"] = incidence.row_count();
  out["cols"] = incidence.col_count();
  out["item_ids"] = incidence.item_ids;
  json rows = json::array();
  const std::vector<std::size_t> counts = incidence.row_counts();
  for (std::size_t r = 0; r < incidence.row_count(); ++r) {
    json row = label_json(incidence.labels[r]);
    row["count"] = counts[r];
    rows.push_back(std::move(row));
  }
  out["labels"] = std::move(rows);
  json unc = json::array();
  for (const Label& label : incidence.uncoverable) unc.push_back(label_json(label));
  out["uncoverable"] = std::move(unc);
  return out;
}

json clusters_json(const ClusterModel& model) {
  json out;
  out["k"] = model.k;
  out["dim"] = model.dim;
  out["metric"] = metric_name(model.metric);
  out["inertia"] = model.inertia;
  out["inertia_history"] = model.inertia_history;
  out["assignments"] = model.assignments;
  json centroids = json::array();
  for (std::size_t c = 0; c < model.k; ++c) {
    auto row = model.centroid(c);
    centroids.push_back(std::vector<double>(row.begin(), row.end()));
  }
  out["centroids"] = std::move(centroids);
  return out;
}

json isp_result_json(const IspResult& result, bool include_incidence,
                     bool include_clusters) {
  json out;
  out["k"] = result.k;
  out["unicost"] = selection_json(result.unicost);
  out["diverse"] = selection_json(result.diverse);
  out["final"] = selection_json(result.final);
  out["coverage"] = coverage_json(result.coverage);
  out["costs"] = result.costs;
  if (include_incidence) out["incidence"] = incidence_json(result.incidence);
  if (include_clusters) out["clusters"] = clusters_json(result.clusters);
  return out;
}

json warm_start_json(const WarmStartMap& map) {
  json out;
  out["q"] = map.q;
  out["w"] = map.w;
  out["warm_count"] = map.warm_ids.size();
  out["matched"] = map.assignments.size();
  out["unmatched_count"] = map.unmatched.size();
  out["warm_ids"] = map.warm_ids;
  json assigns = json::array();
  for (const auto& a : map.assignments) {
    assigns.push_back(json{
        {"cold_id", a.cold_id}, {"donor_id", a.donor_id}, {"distance", a.distance}});
  }
  out["assignments"] = std::move(assigns);
  out["unmatched"] = map.unmatched;
  return out;
}

json simulation_json(const SimulationResult& result) {
  json out;
  json policies = json::array();
  for (std::size_t pi = 0; pi < result.policies.size(); ++pi) {
    json p;
    p["policy"] = policy_name(result.policies[pi]);
    const PolicyAggregate& agg = result.aggregates[pi];
    p["mean_warm_after"] = agg.mean_warm_after;
    p["stddev_warm_after"] = agg.stddev_warm_after;
    p["mean_success_ratio"] = agg.mean_success_ratio;
    p["stddev_success_ratio"] = agg.stddev_success_ratio;
    json reps = json::array();
    for (const RepetitionRecord& rec : result.per_policy[pi]) {
      reps.push_back(json{{"warm_after", rec.warm_after},
                          {"warmstarted", rec.warmstarted},
                          {"cold_subject", rec.cold_subject},
                          {"success_ratio", rec.success_ratio}});
    }
    p["repetitions"] = std::move(reps);
    policies.push_back(std::move(p));
  }
  out["policies"] = std::move(policies);
  return out;
}

std::string render(const json& value) { return value.dump(2) + "\n"; }

std::uint64_t fnv1a64_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  char buffer[1 << 16];
  while (in.read(buffer, sizeof buffer) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      hash ^= static_cast<unsigned char>(buffer[i]);
      hash *= 0x100000001b3ULL;
    }
  }
  return hash;
}

std::string hex64(std::uint64_t value) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[value & 0xF];
    value >>= 4;
  }
  return out;
}

}  // namespace isp::report
