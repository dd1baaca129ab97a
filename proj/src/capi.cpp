#include "isp.h"

#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "isp/error.hpp"
#include "isp/explore.hpp"
#include "isp/pipeline.hpp"
#include "isp/report.hpp"
#include "isp/warmstart.hpp"

struct isp_catalog {
  isp::Catalog value;
};

struct isp_embedding {
  isp::EmbeddingMatrix value;
};

namespace {

using isp::Error;
using isp::ErrorKind;
using json = nlohmann::ordered_json;

thread_local std::string g_last_error;

isp_status status_of(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::io: return ISP_ERR_IO;
    case ErrorKind::parse: return ISP_ERR_PARSE;
    case ErrorKind::duplicate_id:
    case ErrorKind::unknown_category:
    case ErrorKind::unknown_item:
    case ErrorKind::empty_corpus:
    case ErrorKind::missing_item:
    case ErrorKind::dim_mismatch:
    case ErrorKind::empty_warm_set: return ISP_ERR_DATA;
    case ErrorKind::infeasible:
    case ErrorKind::infeasible_catalog: return ISP_ERR_INFEASIBLE;
    case ErrorKind::invalid_k:
    case ErrorKind::invalid_quantile:
    case ErrorKind::invalid_size:
    case ErrorKind::invalid_argument:
    case ErrorKind::config: return ISP_ERR_CONFIG;
    case ErrorKind::internal: return ISP_ERR_INTERNAL;
  }
  return ISP_ERR_INTERNAL;
}

/// Runs `body`, routing failures into the status code + thread-local message.
template <typename Fn>
isp_status guarded(Fn&& body) {
  try {
    body();
    return ISP_OK;
  } catch (const Error& e) {
    g_last_error = std::string(isp::error_kind_name(e.kind())) + ": " + e.what();
    return status_of(e.kind());
  } catch (const json::exception& e) {
    g_last_error = std::string("config: ") + e.what();
    return ISP_ERR_CONFIG;
  } catch (const std::exception& e) {
    g_last_error = std::string("internal: ") + e.what();
    return ISP_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "internal: unknown error";
    return ISP_ERR_INTERNAL;
  }
}

char* dup_string(const std::string& text) {
  char* out = static_cast<char*>(std::malloc(text.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, text.c_str(), text.size() + 1);
  return out;
}

json parse_config(const char* config_json) {
  if (!config_json || !*config_json) return json::object();
  json cfg = json::parse(config_json);
  if (!cfg.is_object()) throw Error(ErrorKind::config, "config must be a JSON object");
  return cfg;
}

std::vector<std::string> string_list(const json& value, const char* key) {
  std::vector<std::string> out;
  for (const auto& entry : value) {
    if (!entry.is_string())
      throw Error(ErrorKind::config, std::string(key) + " entries must be strings");
    out.push_back(entry.get<std::string>());
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> pair_list(const json& value) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& entry : value) {
    if (!entry.is_array() || entry.size() != 2 || !entry[0].is_string() ||
        !entry[1].is_string())
      throw Error(ErrorKind::config, "pairs entries must be [category, category]");
    out.emplace_back(entry[0].get<std::string>(), entry[1].get<std::string>());
  }
  return out;
}

isp::IspConfig parse_isp_config(const json& cfg) {
  isp::IspConfig out;
  if (cfg.contains("t") && !cfg["t"].is_null()) out.t = cfg["t"].get<std::size_t>();
  out.seed = cfg.value("seed", std::uint64_t{0});
  if (cfg.contains("backend"))
    out.backends = isp::BackendPolicy::uniform(
        isp::backend_from_name(cfg["backend"].get<std::string>()));
  if (cfg.contains("backends")) {
    const json& b = cfg["backends"];
    if (b.contains("unicost"))
      out.backends.unicost = isp::backend_from_name(b["unicost"].get<std::string>());
    if (b.contains("diverse"))
      out.backends.diverse = isp::backend_from_name(b["diverse"].get<std::string>());
    if (b.contains("max_cover"))
      out.backends.max_cover = isp::backend_from_name(b["max_cover"].get<std::string>());
  }
  if (cfg.contains("diversity_mode"))
    out.diversity_mode =
        isp::diversity_mode_from_name(cfg["diversity_mode"].get<std::string>());
  if (cfg.contains("categories")) out.categories = string_list(cfg["categories"], "categories");
  if (cfg.contains("pairs")) out.pair_categories = pair_list(cfg["pairs"]);
  out.strict = cfg.value("strict", false);
  out.kmeans_max_iters = cfg.value("kmeans_max_iters", std::size_t{100});
  if (cfg.contains("time_budget_ms"))
    out.time_budget = isp::Duration{cfg["time_budget_ms"].get<std::int64_t>()};
  if (cfg.contains("cost_multipliers")) {
    for (const auto& [id, mult] : cfg["cost_multipliers"].items())
      out.cost_multipliers[id] = mult.get<double>();
  }
  return out;
}

}  // namespace

extern "C" {

const char* isp_version(void) { return "0.1.0"; }

const char* isp_status_name(isp_status status) {
  switch (status) {
    case ISP_OK: return "ok";
    case ISP_ERR_IO: return "io";
    case ISP_ERR_PARSE: return "parse";
    case ISP_ERR_DATA: return "data";
    case ISP_ERR_INFEASIBLE: return "infeasible";
    case ISP_ERR_CONFIG: return "config";
    case ISP_ERR_INTERNAL: return "internal";
  }
  return "?";
}

const char* isp_last_error(void) { return g_last_error.c_str(); }

void isp_string_free(char* text) { std::free(text); }

isp_status isp_catalog_load(const char* path, const char* format, isp_catalog** out) {
  return guarded([&] {
    if (!path || !out) throw Error(ErrorKind::invalid_argument, "path and out are required");
    isp::CatalogFormat fmt = isp::CatalogFormat::auto_detect;
    if (format && *format) {
      std::string name = format;
      if (name == "csv")
        fmt = isp::CatalogFormat::csv;
      else if (name == "json")
        fmt = isp::CatalogFormat::json;
      else if (name != "auto")
        throw Error(ErrorKind::invalid_argument, "unknown catalog format: " + name);
    }
    *out = new isp_catalog{isp::load_catalog(path, fmt)};
  });
}

void isp_catalog_free(isp_catalog* catalog) { delete catalog; }

size_t isp_catalog_item_count(const isp_catalog* catalog) {
  return catalog ? catalog->value.size() : 0;
}

isp_status isp_embedding_tfidf(const isp_catalog* catalog, size_t vocab_size,
                               int normalize, isp_embedding** out) {
  return guarded([&] {
    if (!catalog || !out) throw Error(ErrorKind::invalid_argument, "catalog and out are required");
    *out = new isp_embedding{
        isp::tfidf_embed(catalog->value, vocab_size, normalize != 0)};
  });
}

isp_status isp_embedding_load(const char* path, const isp_catalog* catalog,
                              isp_embedding** out) {
  return guarded([&] {
    if (!path || !catalog || !out)
      throw Error(ErrorKind::invalid_argument, "path, catalog, and out are required");
    *out = new isp_embedding{isp::load_embeddings(path, catalog->value)};
  });
}

isp_status isp_embedding_set_metric(isp_embedding* embedding, const char* metric) {
  return guarded([&] {
    if (!embedding || !metric)
      throw Error(ErrorKind::invalid_argument, "embedding and metric are required");
    embedding->value.set_metric(isp::metric_from_name(metric));
  });
}

size_t isp_embedding_dim(const isp_embedding* embedding) {
  return embedding ? embedding->value.dim() : 0;
}

void isp_embedding_free(isp_embedding* embedding) { delete embedding; }

isp_status isp_solve_json(const isp_catalog* catalog, const isp_embedding* embedding,
                          const char* config_json, char** out_json) {
  return guarded([&] {
    if (!catalog || !embedding || !out_json)
      throw Error(ErrorKind::invalid_argument, "catalog, embedding, and out are required");
    json cfg = parse_config(config_json);
    isp::IspConfig config = parse_isp_config(cfg);
    isp::IspResult result = isp::solve_isp(catalog->value, embedding->value, config);
    json payload = isp::report::isp_result_json(result, cfg.value("include_incidence", false),
                                                cfg.value("include_clusters", false));
    *out_json = dup_string(isp::report::render(payload));
  });
}

isp_status isp_coverage_json(const isp_catalog* catalog, const char* config_json,
                             char** out_json) {
  return guarded([&] {
    if (!catalog || !out_json)
      throw Error(ErrorKind::invalid_argument, "catalog and out are required");
    json cfg = parse_config(config_json);
    if (!cfg.contains("selection"))
      throw Error(ErrorKind::config, "coverage config requires a selection array");
    std::vector<std::string> ids = string_list(cfg["selection"], "selection");
    std::vector<std::string> categories;
    std::vector<std::pair<std::string, std::string>> pairs;
    if (cfg.contains("categories")) categories = string_list(cfg["categories"], "categories");
    if (cfg.contains("pairs")) pairs = pair_list(cfg["pairs"]);

    isp::IncidenceMatrix incidence = isp::build_incidence(catalog->value, categories, pairs);
    isp::Selection selection;
    selection.item_ids = ids;
    for (const std::string& id : ids)
      selection.item_indices.push_back(incidence.column_index(id));
    isp::CoverageReport report = isp::coverage(selection, incidence);

    json payload;
    payload["selection_size"] = ids.size();
    payload["coverage"] = isp::report::coverage_json(report);
    if (cfg.value("include_incidence", false))
      payload["incidence"] = isp::report::incidence_json(incidence);
    *out_json = dup_string(isp::report::render(payload));
  });
}

isp_status isp_warmstart_json(const isp_catalog* catalog, const isp_embedding* embedding,
                              const char* config_json, char** out_json) {
  return guarded([&] {
    if (!catalog || !embedding || !out_json)
      throw Error(ErrorKind::invalid_argument, "catalog, embedding, and out are required");
    json cfg = parse_config(config_json);
    if (!cfg.contains("warm"))
      throw Error(ErrorKind::config, "warmstart config requires a warm array");
    std::vector<std::string> warm = string_list(cfg["warm"], "warm");
    const double q = cfg.value("q", 0.1);
    const std::size_t cap = cfg.value("sample_cap", isp::kDefaultPairSampleCap);
    const std::uint64_t seed = cfg.value("seed", std::uint64_t{0});

    std::unordered_set<std::string> warm_set(warm.begin(), warm.end());
    std::vector<std::string> cold;
    for (const isp::Item& item : catalog->value.items)
      if (!warm_set.contains(item.id)) cold.push_back(item.id);

    isp::WarmStartMap map =
        isp::warm_start(warm, cold, embedding->value, q, cap, seed);

    std::vector<std::string> categories;
    std::vector<std::pair<std::string, std::string>> pairs;
    if (cfg.contains("categories")) categories = string_list(cfg["categories"], "categories");
    if (cfg.contains("pairs")) pairs = pair_list(cfg["pairs"]);
    isp::IncidenceMatrix incidence = isp::build_incidence(catalog->value, categories, pairs);
    const std::size_t selection_size = cfg.value("selection_size", warm.size());

    json payload = isp::report::warm_start_json(map);
    payload["unit_coverage"] = isp::unit_coverage(selection_size, map, incidence);
    *out_json = dup_string(isp::report::render(payload));
  });
}

isp_status isp_simulate_json(const isp_catalog* catalog, const isp_embedding* embedding,
                             const char* config_json, char** out_json) {
  return guarded([&] {
    if (!catalog || !embedding || !out_json)
      throw Error(ErrorKind::invalid_argument, "catalog, embedding, and out are required");
    json cfg = parse_config(config_json);
    isp::SimulationConfig config;
    if (!cfg.contains("K") || !cfg.contains("k") || !cfg.contains("batch"))
      throw Error(ErrorKind::config, "simulate config requires K, k, and batch");
    config.K = cfg["K"].get<std::size_t>();
    config.k = cfg["k"].get<std::size_t>();
    config.batch = cfg["batch"].get<std::size_t>();
    config.n = cfg.value("n", std::size_t{1});
    config.q = cfg.value("q", 0.1);
    config.seed = cfg.value("seed", std::uint64_t{0});
    if (cfg.contains("policies")) {
      config.policies.clear();
      for (const auto& name : cfg["policies"])
        config.policies.push_back(isp::policy_from_name(name.get<std::string>()));
    } else if (cfg.contains("policy")) {
      config.policies = {isp::policy_from_name(cfg["policy"].get<std::string>())};
    }
    if (cfg.contains("weight_scheme"))
      config.weight_scheme =
          isp::weight_scheme_from_name(cfg["weight_scheme"].get<std::string>());
    if (cfg.contains("selection_mode"))
      config.selection_mode =
          isp::selection_mode_from_name(cfg["selection_mode"].get<std::string>());
    if (cfg.contains("categories"))
      config.categories = string_list(cfg["categories"], "categories");
    if (cfg.contains("pairs")) config.pair_categories = pair_list(cfg["pairs"]);
    if (cfg.contains("uncertainty")) {
      for (const auto& [id, u] : cfg["uncertainty"].items())
        config.uncertainty[id] = u.get<double>();
    }
    config.threads = cfg.value("threads", std::size_t{1});

    isp::SimulationResult result = isp::simulate(catalog->value, embedding->value, config);
    *out_json = dup_string(isp::report::render(isp::report::simulation_json(result)));
  });
}

}  // extern "C"
