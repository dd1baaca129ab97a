// Command-line front end. Talks to the core strictly through the C API so
// the shared library stays the single integration surface; the only local
// logic is flag/config merging and report plumbing.
#include <chrono>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "isp.h"

namespace {

using json = nlohmann::ordered_json;

struct CatalogDeleter {
  void operator()(isp_catalog* c) const { isp_catalog_free(c); }
};
struct EmbeddingDeleter {
  void operator()(isp_embedding* e) const { isp_embedding_free(e); }
};
using CatalogPtr = std::unique_ptr<isp_catalog, CatalogDeleter>;
using EmbeddingPtr = std::unique_ptr<isp_embedding, EmbeddingDeleter>;

[[noreturn]] void fail(const std::string& message, int code) {
  std::cerr << "error: " << message << "\n";
  std::exit(code);
}

void check(isp_status status) {
  if (status != ISP_OK) fail(isp_last_error(), 2);
}

std::uint64_t fnv1a64_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open " + path, 2);
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  char buffer[1 << 16];
  while (in.read(buffer, sizeof buffer) || in.gcount() > 0)
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      hash ^= static_cast<unsigned char>(buffer[i]);
      hash *= 0x100000001b3ULL;
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

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string current;
  for (char ch : text) {
    if (ch == ',') {
      if (!current.empty()) out.push_back(current);
      current.clear();
    } else {
      current.push_back(ch);
    }
  }
  if (!current.empty()) out.push_back(current);
  return out;
}

// "genre:language,genre:producer" -> [["genre","language"],["genre","producer"]]
json parse_pairs_flag(const std::string& text) {
  json pairs = json::array();
  for (const std::string& entry : split_list(text)) {
    auto colon = entry.find(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == entry.size())
      fail("--pairs entries must look like category:category", 1);
    pairs.push_back(json::array({entry.substr(0, colon), entry.substr(colon + 1)}));
  }
  return pairs;
}

std::vector<std::string> read_id_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open " + path, 2);
  std::vector<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) ids.push_back(line);
  }
  return ids;
}

struct CommonArgs {
  std::string catalog;
  std::string format = "auto";
  std::string embedding = "tfidf";
  std::string metric;
  std::size_t vocab_size = 512;
  bool normalize = false;
  std::string config_path;
  std::string out_path;
};

void add_common_flags(CLI::App* cmd, CommonArgs& args, bool with_embedding) {
  cmd->add_option("--catalog", args.catalog, "Catalog file (CSV or JSON)")->required();
  cmd->add_option("--format", args.format, "Catalog format: auto|csv|json");
  if (with_embedding) {
    cmd->add_option("--embedding", args.embedding, "tfidf or file:<path>");
    cmd->add_option("--metric", args.metric, "euclidean|cosine (overrides the embedding's)");
    cmd->add_option("--vocab-size", args.vocab_size, "tfidf vocabulary cap");
    cmd->add_flag("--normalize", args.normalize, "L2-normalize tfidf rows");
  }
  cmd->add_option("--config", args.config_path, "JSON config merged under explicit flags");
  cmd->add_option("--out", args.out_path, "Report path (default: stdout)");
}

json load_config_file(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) fail("cannot open " + path, 2);
  json cfg = json::parse(in, nullptr, false);
  if (cfg.is_discarded() || !cfg.is_object()) fail("config file must hold a JSON object", 2);
  return cfg;
}

CatalogPtr load_catalog(const CommonArgs& args) {
  isp_catalog* raw = nullptr;
  check(isp_catalog_load(args.catalog.c_str(), args.format.c_str(), &raw));
  CatalogPtr catalog(raw);
  std::cerr << "[catalog] items=" << isp_catalog_item_count(raw) << "\n";
  return catalog;
}

EmbeddingPtr load_embedding(const CommonArgs& args, const isp_catalog* catalog) {
  isp_embedding* raw = nullptr;
  if (args.embedding == "tfidf") {
    check(isp_embedding_tfidf(catalog, args.vocab_size, args.normalize ? 1 : 0, &raw));
  } else if (args.embedding.rfind("file:", 0) == 0) {
    check(isp_embedding_load(args.embedding.substr(5).c_str(), catalog, &raw));
  } else {
    fail("--embedding must be tfidf or file:<path>", 1);
  }
  EmbeddingPtr embedding(raw);
  if (!args.metric.empty()) check(isp_embedding_set_metric(raw, args.metric.c_str()));
  std::cerr << "[embedding] dim=" << isp_embedding_dim(raw) << "\n";
  return embedding;
}

json manifest_for(const std::string& command, const CommonArgs& args, const json& config) {
  json inputs;
  inputs["catalog"] = json{{"path", args.catalog}, {"fnv1a64", hex64(fnv1a64_file(args.catalog))}};
  if (args.embedding.rfind("file:", 0) == 0) {
    const std::string path = args.embedding.substr(5);
    inputs["embedding"] = json{{"path", path}, {"fnv1a64", hex64(fnv1a64_file(path))}};
  }
  if (!args.config_path.empty())
    inputs["config_file"] =
        json{{"path", args.config_path}, {"fnv1a64", hex64(fnv1a64_file(args.config_path))}};
  json manifest;
  manifest["command"] = command;
  manifest["tool_version"] = isp_version();
  manifest["seed"] = config.contains("seed") ? config["seed"] : json(0);
  manifest["config"] = config;
  manifest["inputs"] = std::move(inputs);
  return manifest;
}

void emit_report(const std::string& command, const CommonArgs& args, const json& config,
                 const char* payload_text) {
  json report;
  report["schema_version"] = "1";
  report["manifest"] = manifest_for(command, args, config);
  report["result"] = json::parse(payload_text);
  const std::string rendered = report.dump(2) + "\n";
  if (args.out_path.empty()) {
    std::cout << rendered;
  } else {
    std::ofstream out(args.out_path, std::ios::binary);
    if (!out) fail("cannot write " + args.out_path, 2);
    out << rendered;
  }
}

/// Runs `produce` (a C API call filling a char*), wraps the payload with the
/// manifest, writes the report, logs wall time to stderr.
template <typename Fn>
int run_command(const std::string& command, const CommonArgs& args, const json& config,
                Fn&& produce) {
  const auto start = std::chrono::steady_clock::now();
  char* payload = nullptr;
  check(produce(&payload));
  emit_report(command, args, config, payload);
  isp_string_free(payload);
  const auto wall =
      std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start);
  std::cerr << "[done] command=" << command << " wall_ms=" << wall.count() << "\n";
  return 0;
}

void log_solve_levels(const json& result) {
  const json& r = result["result"];
  std::cerr << "[level1] unicost size=" << r["unicost"]["size"] << "\n";
  std::cerr << "[level2] diverse size=" << r["diverse"]["size"] << "\n";
  std::cerr << "[level3] final size=" << r["final"]["size"]
            << " covered=" << r["final"]["covered_rows"] << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Item selection toolkit: diverse covering subsets, warm-start maps, "
               "and exploration simulations"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(isp_version()));

  CommonArgs solve_args, coverage_args, warmstart_args, simulate_args;

  // solve
  auto* solve = app.add_subcommand("solve", "Run the three-level selection flow");
  add_common_flags(solve, solve_args, true);
  std::int64_t opt_t = -1;
  std::uint64_t solve_seed = 0;
  std::string solve_backend, solve_categories, solve_pairs, diversity_mode;
  std::int64_t time_budget_ms = -1;
  bool strict = false, dump_incidence = false, dump_clusters = false;
  solve->add_option("--t", opt_t, "Bound on the final subset size");
  solve->add_option("--seed", solve_seed, "Random seed");
  solve->add_option("--backend", solve_backend, "greedy|exact|auto for all levels");
  solve->add_option("--categories", solve_categories, "Comma-separated category subset");
  solve->add_option("--pairs", solve_pairs, "Composite categories, e.g. genre:language");
  solve->add_option("--diversity-mode", diversity_mode, "cardinality_bound|warm_start");
  solve->add_option("--time-budget-ms", time_budget_ms, "Exact solver budget per level");
  solve->add_flag("--strict", strict, "Fail on uncoverable labels");
  solve->add_flag("--dump-incidence", dump_incidence, "Embed the incidence matrix");
  solve->add_flag("--dump-clusters", dump_clusters, "Embed the cluster model");

  // coverage
  auto* coverage = app.add_subcommand("coverage", "Coverage report for a given selection");
  add_common_flags(coverage, coverage_args, false);
  std::string selection_file, selection_ids, coverage_categories, coverage_pairs;
  bool coverage_dump_incidence = false;
  coverage->add_option("--selection", selection_file, "File with one item id per line");
  coverage->add_option("--ids", selection_ids, "Comma-separated item ids");
  coverage->add_option("--categories", coverage_categories, "Comma-separated category subset");
  coverage->add_option("--pairs", coverage_pairs, "Composite categories");
  coverage->add_flag("--dump-incidence", coverage_dump_incidence, "Embed the incidence matrix");

  // warmstart
  auto* warmstart = app.add_subcommand("warmstart", "Map cold items to warm donors");
  add_common_flags(warmstart, warmstart_args, true);
  std::string warm_file, warm_ids, warm_categories, warm_pairs;
  double warm_q = 0.1;
  std::uint64_t warm_seed = 0;
  std::int64_t sample_cap = -1, selection_size = -1;
  warmstart->add_option("--warm", warm_file, "File with one warm item id per line");
  warmstart->add_option("--warm-ids", warm_ids, "Comma-separated warm item ids");
  warmstart->add_option("--q", warm_q, "Distance quantile in (0,1]");
  warmstart->add_option("--seed", warm_seed, "Random seed (pair sampling)");
  warmstart->add_option("--sample-cap", sample_cap, "Pair sample cap for the quantile");
  warmstart->add_option("--selection-size", selection_size, "Denominator for unit coverage");
  warmstart->add_option("--categories", warm_categories, "Comma-separated category subset");
  warmstart->add_option("--pairs", warm_pairs, "Composite categories");

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Cold-start exploration simulation");
  add_common_flags(simulate, simulate_args, true);
  std::int64_t sim_K = -1, sim_k = -1, sim_batch = -1, sim_n = -1, sim_threads = -1;
  double sim_q = -1.0;
  std::uint64_t sim_seed = 0;
  std::string sim_policies, sim_weight_scheme, sim_selection_mode, sim_categories, sim_pairs;
  simulate->add_option("--K", sim_K, "Universe size per repetition");
  simulate->add_option("--k", sim_k, "Initially warm items");
  simulate->add_option("--batch", sim_batch, "Items explored per repetition");
  simulate->add_option("--n", sim_n, "Repetitions");
  simulate->add_option("--q", sim_q, "Distance quantile in (0,1]");
  simulate->add_option("--seed", sim_seed, "Random seed");
  simulate->add_option("--policies", sim_policies, "Comma-separated policy names");
  simulate->add_option("--weight-scheme", sim_weight_scheme, "inverse_round|linear_decay");
  simulate->add_option("--selection-mode", sim_selection_mode, "top_batch|weighted_random");
  simulate->add_option("--threads", sim_threads, "Worker threads across repetitions");
  simulate->add_option("--categories", sim_categories, "Comma-separated category subset");
  simulate->add_option("--pairs", sim_pairs, "Composite categories");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  if (solve->parsed()) {
    json config = load_config_file(solve_args.config_path);
    if (opt_t >= 0) config["t"] = static_cast<std::size_t>(opt_t);
    if (solve->count("--seed")) config["seed"] = solve_seed;
    else if (!config.contains("seed")) config["seed"] = solve_seed;
    if (!solve_backend.empty()) config["backend"] = solve_backend;
    if (!solve_categories.empty()) config["categories"] = split_list(solve_categories);
    if (!solve_pairs.empty()) config["pairs"] = parse_pairs_flag(solve_pairs);
    if (!diversity_mode.empty()) config["diversity_mode"] = diversity_mode;
    if (time_budget_ms >= 0) config["time_budget_ms"] = time_budget_ms;
    if (strict) config["strict"] = true;
    if (dump_incidence) config["include_incidence"] = true;
    if (dump_clusters) config["include_clusters"] = true;

    CatalogPtr catalog = load_catalog(solve_args);
    EmbeddingPtr embedding = load_embedding(solve_args, catalog.get());
    const std::string config_text = config.dump();
    char* payload = nullptr;
    const auto start = std::chrono::steady_clock::now();
    check(isp_solve_json(catalog.get(), embedding.get(), config_text.c_str(), &payload));
    json report;
    report["schema_version"] = "1";
    report["manifest"] = manifest_for("solve", solve_args, config);
    report["result"] = json::parse(payload);
    isp_string_free(payload);
    log_solve_levels(report);
    const std::string rendered = report.dump(2) + "\n";
    if (solve_args.out_path.empty()) {
      std::cout << rendered;
    } else {
      std::ofstream out(solve_args.out_path, std::ios::binary);
      if (!out) fail("cannot write " + solve_args.out_path, 2);
      out << rendered;
    }
    const auto wall = std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::steady_clock::now() - start);
    std::cerr << "[done] command=solve wall_ms=" << wall.count() << "\n";
    return 0;
  }

  if (coverage->parsed()) {
    json config = load_config_file(coverage_args.config_path);
    if (!selection_file.empty()) config["selection"] = read_id_file(selection_file);
    if (!selection_ids.empty()) config["selection"] = split_list(selection_ids);
    if (!coverage_categories.empty()) config["categories"] = split_list(coverage_categories);
    if (!coverage_pairs.empty()) config["pairs"] = parse_pairs_flag(coverage_pairs);
    if (coverage_dump_incidence) config["include_incidence"] = true;
    if (!config.contains("selection")) fail("coverage needs --selection or --ids", 1);

    CatalogPtr catalog = load_catalog(coverage_args);
    const std::string config_text = config.dump();
    return run_command("coverage", coverage_args, config, [&](char** out) {
      return isp_coverage_json(catalog.get(), config_text.c_str(), out);
    });
  }

  if (warmstart->parsed()) {
    json config = load_config_file(warmstart_args.config_path);
    if (!warm_file.empty()) config["warm"] = read_id_file(warm_file);
    if (!warm_ids.empty()) config["warm"] = split_list(warm_ids);
    if (warmstart->count("--q")) config["q"] = warm_q;
    if (warmstart->count("--seed")) config["seed"] = warm_seed;
    if (sample_cap >= 0) config["sample_cap"] = static_cast<std::size_t>(sample_cap);
    if (selection_size >= 0) config["selection_size"] = static_cast<std::size_t>(selection_size);
    if (!warm_categories.empty()) config["categories"] = split_list(warm_categories);
    if (!warm_pairs.empty()) config["pairs"] = parse_pairs_flag(warm_pairs);
    if (!config.contains("warm")) fail("warmstart needs --warm or --warm-ids", 1);

    CatalogPtr catalog = load_catalog(warmstart_args);
    EmbeddingPtr embedding = load_embedding(warmstart_args, catalog.get());
    const std::string config_text = config.dump();
    return run_command("warmstart", warmstart_args, config, [&](char** out) {
      return isp_warmstart_json(catalog.get(), embedding.get(), config_text.c_str(), out);
    });
  }

  if (simulate->parsed()) {
    json config = load_config_file(simulate_args.config_path);
    if (sim_K >= 0) config["K"] = static_cast<std::size_t>(sim_K);
    if (sim_k >= 0) config["k"] = static_cast<std::size_t>(sim_k);
    if (sim_batch >= 0) config["batch"] = static_cast<std::size_t>(sim_batch);
    if (sim_n >= 0) config["n"] = static_cast<std::size_t>(sim_n);
    if (sim_q >= 0.0) config["q"] = sim_q;
    if (simulate->count("--seed")) config["seed"] = sim_seed;
    else if (!config.contains("seed")) config["seed"] = sim_seed;
    if (!sim_policies.empty()) config["policies"] = split_list(sim_policies);
    if (!sim_weight_scheme.empty()) config["weight_scheme"] = sim_weight_scheme;
    if (!sim_selection_mode.empty()) config["selection_mode"] = sim_selection_mode;
    if (sim_threads >= 0) config["threads"] = static_cast<std::size_t>(sim_threads);
    if (!sim_categories.empty()) config["categories"] = split_list(sim_categories);
    if (!sim_pairs.empty()) config["pairs"] = parse_pairs_flag(sim_pairs);

    CatalogPtr catalog = load_catalog(simulate_args);
    EmbeddingPtr embedding = load_embedding(simulate_args, catalog.get());
    const std::string config_text = config.dump();
    return run_command("simulate", simulate_args, config, [&](char** out) {
      return isp_simulate_json(catalog.get(), embedding.get(), config_text.c_str(), out);
    });
  }

  return 1;
}
