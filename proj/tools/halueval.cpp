// halueval: batch hallucination detection and evaluation.
//
//   halueval evaluate --dataset qa.jsonl --task qa --out runs/qa
//   halueval sweep --dataset qa.jsonl --task qa --out runs/qa-sweep
//   halueval leaderboard runs/model-a runs/model-b --out board
//   halueval stats runs/qa/judgments.jsonl --out runs/qa
//   halueval retrieve --dataset qa.jsonl --id q1 --query "who composed it"
//
// Configuration precedence: built-in defaults < --config file < flags.
// Exit codes: 0 ok, 1 runtime failure, 2 usage or configuration error.

#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "halueval/config.hpp"
#include "halueval/error.hpp"
#include "halueval/pipeline.hpp"

namespace {

using halueval::RunConfig;

/// Options that map one-to-one onto config keys. Only the ones given on the
/// command line are applied, after the config file.
class KeyedOptions {
 public:
  void option(CLI::App* app, const std::string& flag, const std::string& key,
              const std::string& help) {
    options_.push_back({app->add_option(flag, values_[key], help), key, false});
  }
  void flag(CLI::App* app, const std::string& flag, const std::string& key,
            const std::string& help) {
    options_.push_back({app->add_flag(flag, help), key, true});
  }
  std::map<std::string, std::string> given() const {
    std::map<std::string, std::string> out;
    for (const auto& o : options_) {
      if (o.opt->count() == 0) continue;
      out[o.key] = o.is_flag ? "true" : values_.at(o.key);
    }
    return out;
  }

 private:
  struct Entry {
    CLI::Option* opt;
    std::string key;
    bool is_flag;
  };
  std::vector<Entry> options_;
  std::map<std::string, std::string> values_;
};

void add_dataset_options(CLI::App* sub, KeyedOptions& keyed) {
  keyed.option(sub, "--dataset", "dataset", "Line-delimited JSON dataset");
  keyed.option(sub, "--task", "task", "qa | summarization");
  keyed.option(sub, "--limit", "limit", "Seeded random subsample of N records");
  keyed.option(sub, "--head", "head", "Keep the first N records");
}

void add_run_options(CLI::App* sub, KeyedOptions& keyed) {
  add_dataset_options(sub, keyed);
  keyed.option(sub, "--scorer", "scorer", "baseline | remote");
  keyed.option(sub, "--endpoint", "endpoint", "Scorer server URL for --scorer remote");
  keyed.option(sub, "--batch-size", "batch_size", "Pairs per scorer request (default 16)");
  keyed.option(sub, "--timeout-ms", "timeout_ms", "Scorer request timeout");
  keyed.option(sub, "--threshold", "threshold", "Hallucination threshold tau (default 0.5)");
  keyed.flag(sub, "--segmented", "segmented", "Score each sentence against its own retrieval");
  keyed.flag(sub, "--non-fabrication", "non_fabrication", "Flag unsupported entities and numbers");
  keyed.option(sub, "--segment-threshold", "segment_threshold", "Failing-segment cutoff");
  keyed.option(sub, "--halving-factor", "halving_factor", "Penalty when a segment fails");
  keyed.option(sub, "--workers", "workers", "Worker threads");
  keyed.option(sub, "--k", "retriever.k", "Retrieved items per query (default 3)");
  keyed.option(sub, "--k1", "retriever.k1", "BM25 k1");
  keyed.option(sub, "--b", "retriever.b", "BM25 b");
  keyed.option(sub, "--window-sentences", "retriever.window_sentences", "Sentences per window");
  keyed.option(sub, "--knowledge-form", "knowledge.form", "unstructured | structured | both");
  keyed.option(sub, "--knowledge-budget", "knowledge.budget", "Premise budget in words");
  keyed.option(sub, "--decomposer", "decomposer", "rule | external");
  keyed.option(sub, "--decomposer-file", "decomposer.file", "Sub-queries for the external decomposer");
}

std::vector<double> parse_grid(const std::string& spec) {
  std::vector<double> grid;
  for (const auto& item : halueval::parse_list(spec)) grid.push_back(std::stod(item));
  return grid;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hallucination detection and evaluation toolkit"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string out_dir;
  std::string seed;
  app.add_option("--config", config_path, "Flat key = value configuration file");
  app.add_option("--out", out_dir, "Output directory (default ./out)");
  app.add_option("--seed", seed, "Sampling seed");

  KeyedOptions eval_keys, sweep_keys, retrieve_keys;

  auto* evaluate = app.add_subcommand("evaluate", "Judge every sample and write reports");
  add_run_options(evaluate, eval_keys);

  auto* sweep = app.add_subcommand("sweep", "Threshold sweep maximizing (TPR + TNR) / 2");
  add_run_options(sweep, sweep_keys);
  std::string grid_spec;
  std::string judgments_for_sweep;
  sweep->add_option("--grid", grid_spec, "Comma-separated thresholds (default 0.05..0.95)");
  sweep->add_option("--judgments", judgments_for_sweep, "Sweep an existing judgments.jsonl");

  auto* leaderboard = app.add_subcommand("leaderboard", "Aggregate per-model runs into a table");
  std::vector<std::string> score_dirs;
  leaderboard->add_option("dirs", score_dirs, "One directory per model with judgments.jsonl");

  auto* stats = app.add_subcommand("stats", "Score CDF and length statistics for one run");
  std::string stats_input;
  stats->add_option("judgments", stats_input, "judgments.jsonl")->required();

  auto* retrieve = app.add_subcommand("retrieve", "Print the top-k knowledge for a query");
  add_dataset_options(retrieve, retrieve_keys);
  retrieve_keys.option(retrieve, "--k", "retriever.k", "Results to print");
  retrieve_keys.option(retrieve, "--window-sentences", "retriever.window_sentences",
                       "Sentences per snippet window");
  halueval::RetrieveOptions retrieve_opts;
  std::string retrieve_file;
  retrieve->add_option("--query", retrieve_opts.query, "Query text")->required();
  retrieve->add_option("--id", retrieve_opts.sample_id, "Sample whose knowledge is searched");
  retrieve->add_option("--file", retrieve_file, "Plain-text document to search instead");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  RunConfig config;
  try {
    if (!config_path.empty()) halueval::load_config_file(config, config_path);
    KeyedOptions* keyed = evaluate->parsed() ? &eval_keys
                          : sweep->parsed()  ? &sweep_keys
                          : retrieve->parsed() ? &retrieve_keys
                                               : nullptr;
    if (keyed) halueval::apply_config(config, keyed->given());
    std::map<std::string, std::string> globals;
    if (!out_dir.empty()) globals["out"] = out_dir;
    if (!seed.empty()) globals["seed"] = seed;
    halueval::apply_config(config, globals);
  } catch (const halueval::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  if (evaluate->parsed()) return halueval::cmd_evaluate(config, std::cerr);

  if (sweep->parsed()) {
    halueval::SweepOptions opts;
    opts.judgments = judgments_for_sweep;
    if (!grid_spec.empty()) {
      try {
        opts.grid = parse_grid(grid_spec);
      } catch (const std::exception&) {
        std::cerr << "error: invalid --grid '" << grid_spec << "'\n";
        return 2;
      }
    }
    return halueval::cmd_sweep(config, opts, std::cerr);
  }

  if (leaderboard->parsed()) {
    std::vector<std::filesystem::path> dirs(score_dirs.begin(), score_dirs.end());
    return halueval::cmd_leaderboard(dirs, config.out, std::cerr);
  }

  if (stats->parsed()) return halueval::cmd_stats(stats_input, config.out, std::cerr);

  retrieve_opts.text_file = retrieve_file;
  return halueval::cmd_retrieve(config, retrieve_opts, std::cout, std::cerr);
}
