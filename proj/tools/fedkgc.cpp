// fedkgc: desk-scale simulator of federated multilingual KG completion.
// Subcommands: gen (synthetic client KGs), train (federated / data_agg /
// isolated pipelines), eval (filtered link-prediction metrics), gradcheck
// (finite-difference self-check of the loss gradients).

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fedkgc/checkpoint.hpp"
#include "fedkgc/config.hpp"
#include "fedkgc/datagen.hpp"
#include "fedkgc/errors.hpp"
#include "fedkgc/eval.hpp"
#include "fedkgc/federation.hpp"
#include "fedkgc/gradcheck.hpp"
#include "fedkgc/kg.hpp"
#include "fedkgc/threads.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace fedkgc;

namespace {

ExperimentConfig load_or_default(const std::string& config_path) {
  if (config_path.empty()) return parse_config(nlohmann::json::object());
  return load_config_file(config_path);
}

void apply_seed(ExperimentConfig& cfg, std::uint64_t seed) {
  cfg.seed = seed;
  cfg.train.seed = seed;
  cfg.federation.seed = seed;
  cfg.gen.seed = seed;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  f << content;
  if (!f) throw DataError("cannot write '" + path.string() + "'");
}

// Client directories = subdirectories holding an entities.tsv, sorted by
// name; the sorted position is the client index everywhere.
std::vector<fs::path> discover_clients(const fs::path& data) {
  if (!fs::is_directory(data)) {
    throw DataError("data directory '" + data.string() + "' does not exist");
  }
  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(data)) {
    if (entry.is_directory() && fs::exists(entry.path() / "entities.tsv")) {
      dirs.push_back(entry.path());
    }
  }
  std::sort(dirs.begin(), dirs.end());
  if (dirs.empty()) {
    throw DataError("no client directories (containing entities.tsv) under '" + data.string() +
                    "'");
  }
  return dirs;
}

std::vector<KnowledgeGraph> load_clients(const std::vector<fs::path>& dirs) {
  std::vector<KnowledgeGraph> graphs;
  graphs.reserve(dirs.size());
  for (const auto& dir : dirs) graphs.push_back(load_kg(dir, dir.filename().string()));
  return graphs;
}

fs::path client_ckpt(const fs::path& run, int index) {
  return run / ("client_" + std::to_string(index) + ".ckpt");
}

std::string rounds_jsonl(const std::vector<RoundLog>& rounds) {
  std::string out;
  for (const auto& r : rounds) {
    ordered_json j;
    j["round"] = r.round;
    j["selected"] = r.selected;
    j["losses"] = r.losses;
    j["checksum"] = checksum_hex(r.checksum);
    out += j.dump() + "\n";
  }
  return out;
}

std::string metrics_jsonl(const std::vector<StepMetric>& metrics) {
  std::string out;
  for (const auto& m : metrics) {
    ordered_json j;
    j["round"] = m.round;
    j["client"] = m.client;
    j["step"] = m.step;
    j["loss"] = m.loss;
    out += j.dump() + "\n";
  }
  return out;
}

void print_rounds(const std::vector<RoundLog>& rounds, int total) {
  for (const auto& r : rounds) {
    std::ostringstream sel;
    for (std::size_t i = 0; i < r.selected.size(); ++i) {
      sel << (i ? " " : "") << r.selected[i];
    }
    double mean = 0.0;
    for (double l : r.losses) mean += l;
    mean /= static_cast<double>(r.losses.size());
    std::cout << "round " << std::setw(3) << r.round << "/" << total << "  clients [" << sel.str()
              << "]  loss " << std::fixed << std::setprecision(4) << mean
              << std::defaultfloat << "\n";
  }
}

int cmd_gen(const ExperimentConfig& cfg, const fs::path& out) {
  validate_gen_config(cfg.gen);
  std::vector<fs::path> dirs = generate(cfg.gen, out);
  for (const auto& dir : dirs) {
    KnowledgeGraph g = load_kg(dir, dir.filename().string());
    std::cout << dir.filename().string() << ": " << g.num_entities() << " entities, "
              << g.num_relations() << " relations, train/valid/test " << g.train.size() << "/"
              << g.valid.size() << "/" << g.test.size() << "\n";
  }
  if (dirs.size() >= 2) {
    std::vector<OverlapPair> pairs = overlap_report(dirs);
    ordered_json rep;
    rep["pairs"] = ordered_json::array();
    for (const auto& p : pairs) {
      rep["pairs"].push_back({{"a", p.a},
                              {"b", p.b},
                              {"shared_facts", p.shared_facts},
                              {"shared_entities", p.shared_entities},
                              {"fact_jaccard", p.fact_jaccard}});
      std::cout << p.a << "~" << p.b << ": " << p.shared_facts << " shared facts (jaccard "
                << std::fixed << std::setprecision(3) << p.fact_jaccard << std::defaultfloat
                << "), " << p.shared_entities << " shared entities\n";
    }
    write_file(out / "overlap_report.json", rep.dump(2) + "\n");
  }
  std::cout << "wrote " << dirs.size() << " client directories under " << out.string() << "\n";
  return 0;
}

int cmd_train(ExperimentConfig cfg, const fs::path& data, const fs::path& out, int threads) {
  std::vector<fs::path> dirs = discover_clients(data);
  std::vector<KnowledgeGraph> graphs = load_clients(dirs);
  const int num_clients = static_cast<int>(graphs.size());
  validate_fed_config(cfg.federation, num_clients);

  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw DataError("cannot create '" + out.string() + "': " + ec.message());

  const int rounds = cfg.federation.rounds;
  switch (cfg.federation.mode) {
    case RunMode::federated: {
      std::vector<FederatedClient> clients;
      clients.reserve(graphs.size());
      for (int i = 0; i < num_clients; ++i) {
        clients.emplace_back(i, graphs[i], cfg.encoder, cfg.train, cfg.federation.scope);
      }
      FedResult res = run_federated(clients, cfg.federation, cfg.encoder, threads);
      print_rounds(res.rounds, rounds);
      save_checkpoint(res.global, out / "global.ckpt");
      for (int i = 0; i < num_clients; ++i) save_checkpoint(res.locals[i], client_ckpt(out, i));
      write_file(out / "rounds.jsonl", rounds_jsonl(res.rounds));
      write_file(out / "metrics.jsonl", metrics_jsonl(res.metrics));
      break;
    }
    case RunMode::isolated: {
      std::vector<FedResult> results(graphs.size());
      parallel_for(graphs.size(), threads, [&](std::size_t i) {
        FederatedClient client(static_cast<int>(i), graphs[i], cfg.encoder, cfg.train,
                               cfg.federation.scope);
        results[i] = run_isolated(client, cfg.federation, cfg.encoder);
      });
      std::string rlines, mlines;
      for (int i = 0; i < num_clients; ++i) {
        std::cout << "client " << i << ":\n";
        print_rounds(results[i].rounds, rounds);
        save_checkpoint(results[i].global, client_ckpt(out, i));
        rlines += rounds_jsonl(results[i].rounds);
        mlines += metrics_jsonl(results[i].metrics);
      }
      write_file(out / "rounds.jsonl", rlines);
      write_file(out / "metrics.jsonl", mlines);
      break;
    }
    case RunMode::data_aggregation: {
      DataAggregationResult res =
          run_data_aggregation(graphs, cfg.federation, cfg.train, cfg.encoder);
      print_rounds(res.rounds, rounds);
      save_checkpoint(res.weights, out / "global.ckpt");
      write_file(out / "rounds.jsonl", rounds_jsonl(res.rounds));
      write_file(out / "metrics.jsonl", metrics_jsonl(res.metrics));
      break;
    }
  }
  write_file(out / "config.json", config_to_json(cfg).dump(2) + "\n");
  std::cout << "run written to " << out.string() << "\n";
  return 0;
}

double round3(double x) { return std::round(x * 1000.0) / 1000.0; }

ordered_json direction_json(const DirectionMetrics& d) {
  return {{"query_count", d.query_count},
          {"mrr", round3(d.mrr)},
          {"hits1", round3(d.hits1)},
          {"hits10", round3(d.hits10)}};
}

int cmd_eval(const fs::path& run, const fs::path& data, const std::string& split_name,
             bool dump_ranks, int threads) {
  ExperimentConfig cfg = load_config_file(run / "config.json");
  Split split = parse_split(split_name);
  std::vector<fs::path> dirs = discover_clients(data);
  std::vector<KnowledgeGraph> graphs = load_clients(dirs);
  const int num_clients = static_cast<int>(graphs.size());
  Tokenizer tk(cfg.encoder.tokenizer);

  // Weights under evaluation, by run mode: isolated clients own their
  // checkpoint outright; data aggregation shares the pooled model; a
  // federated client keeps in-scope parameters from the server and
  // out-of-scope ones from its own checkpoint.
  std::vector<ModelWeights> weights(graphs.size());
  switch (cfg.federation.mode) {
    case RunMode::federated: {
      ModelWeights global = load_checkpoint(run / "global.ckpt");
      validate_weights(global, cfg.encoder);
      for (int i = 0; i < num_clients; ++i) {
        ModelWeights local = load_checkpoint(client_ckpt(run, i));
        validate_weights(local, cfg.encoder);
        if (cfg.eval.use_local_weights) {
          weights[i] = std::move(local);
          continue;
        }
        ModelWeights merged = std::move(local);
        for (const auto& [name, tensor] : global) {
          if (cfg.federation.scope == AggregationScope::shared_names || name == "tok_emb") {
            merged.insert_or_assign(name, tensor);
          }
        }
        weights[i] = std::move(merged);
      }
      break;
    }
    case RunMode::isolated: {
      for (int i = 0; i < num_clients; ++i) {
        weights[i] = load_checkpoint(client_ckpt(run, i));
        validate_weights(weights[i], cfg.encoder);
      }
      break;
    }
    case RunMode::data_aggregation: {
      ModelWeights global = load_checkpoint(run / "global.ckpt");
      validate_weights(global, cfg.encoder);
      for (auto& w : weights) w = global;
      break;
    }
  }

  std::vector<MetricsReport> reports(graphs.size());
  std::vector<std::vector<RankedQueryResult>> dumps(graphs.size());
  for (int i = 0; i < num_clients; ++i) {
    reports[i] = evaluate(weights[i], graphs[i], split, tk, cfg.encoder, cfg.eval, threads,
                          dump_ranks ? &dumps[i] : nullptr);
  }

  ordered_json rep;
  rep["split"] = split_name;
  rep["clients"] = ordered_json::array();
  std::int64_t total_q = 0, total_skip = 0;
  double mrr_sum = 0.0, h1_sum = 0.0, h10_sum = 0.0;
  for (int i = 0; i < num_clients; ++i) {
    const MetricsReport& r = reports[i];
    ordered_json cj;
    cj["client"] = graphs[i].client_name;
    cj["query_count"] = r.query_count;
    cj["skipped_count"] = r.skipped_count;
    cj["mrr"] = round3(r.mrr);
    cj["hits1"] = round3(r.hits1);
    cj["hits10"] = round3(r.hits10);
    cj["tail"] = direction_json(r.tail);
    cj["head"] = direction_json(r.head);
    rep["clients"].push_back(std::move(cj));
    total_q += r.query_count;
    total_skip += r.skipped_count;
    mrr_sum += r.mrr * static_cast<double>(r.query_count);
    h1_sum += r.hits1 * static_cast<double>(r.query_count);
    h10_sum += r.hits10 * static_cast<double>(r.query_count);
  }
  double denom = total_q > 0 ? static_cast<double>(total_q) : 1.0;
  MetricsReport agg;
  agg.query_count = total_q;
  agg.skipped_count = total_skip;
  agg.mrr = mrr_sum / denom;
  agg.hits1 = h1_sum / denom;
  agg.hits10 = h10_sum / denom;
  rep["aggregate"] = {{"query_count", agg.query_count},
                      {"skipped_count", agg.skipped_count},
                      {"mrr", round3(agg.mrr)},
                      {"hits1", round3(agg.hits1)},
                      {"hits10", round3(agg.hits10)}};
  write_file(run / "metrics_report.json", rep.dump(2) + "\n");

  if (dump_ranks) {
    std::string lines;
    for (int i = 0; i < num_clients; ++i) {
      for (const auto& rq : dumps[i]) {
        ordered_json j;
        j["client"] = graphs[i].client_name;
        j["dir"] = rq.query.dir == Direction::forward ? "fwd" : "inv";
        j["known"] = rq.query.known;
        j["relation"] = rq.query.relation;
        j["gold"] = rq.gold;
        j["rank"] = rq.rank;
        j["top10"] = ordered_json::array();
        for (const auto& [entity, score] : rq.top10) {
          j["top10"].push_back({entity, score});
        }
        lines += j.dump() + "\n";
      }
    }
    write_file(run / "ranks.jsonl", lines);
  }

  auto row = [](const std::string& name, double h1, double h10, double mrr) {
    std::cout << std::left << std::setw(12) << name << std::right << std::fixed
              << std::setprecision(2) << std::setw(8) << h1 << std::setw(8) << h10 << std::setw(8)
              << mrr << std::defaultfloat << "\n";
  };
  std::cout << std::left << std::setw(12) << "client" << std::right << std::setw(8) << "H@1"
            << std::setw(8) << "H@10" << std::setw(8) << "MRR" << "\n";
  for (int i = 0; i < num_clients; ++i) {
    row(graphs[i].client_name, reports[i].hits1, reports[i].hits10, reports[i].mrr);
  }
  row("all", agg.hits1, agg.hits10, agg.mrr);
  return 0;
}

int cmd_gradcheck(double eps, int seeds, bool corrupt) {
  GradCheckReport rep = run_gradcheck({eps, seeds, corrupt});
  for (const auto& s : rep.seeds) {
    std::cout << "seed " << s.seed << ": max rel err " << std::scientific << std::setprecision(3)
              << s.max_rel_err << ", max abs err " << s.max_abs_err << std::defaultfloat
              << (s.pass ? "" : "  FAIL at " + s.worst_param + "[" + std::to_string(s.worst_row) +
                                    "," + std::to_string(s.worst_col) + "]")
              << "\n";
  }
  std::cout << "max relative error " << std::scientific << std::setprecision(3) << rep.max_rel_err
            << (rep.pass ? " within" : " exceeds") << " tolerance " << rep.rel_tolerance
            << std::defaultfloat << "\n";
  return rep.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"desk-scale federated multilingual KG-completion simulator", "fedkgc"};
  app.require_subcommand(1);

  std::string config_path, mode_name, split_name = "test";
  std::string data_dir, out_dir, run_dir;
  std::uint64_t seed = 0;
  int threads = 0;
  double eps = 1e-4;
  int seeds = 10;
  bool corrupt = false;
  bool dump_ranks = false;

  CLI::App* gen = app.add_subcommand("gen", "Generate synthetic client KG directories");
  gen->add_option("--config", config_path, "experiment config JSON (defaults when omitted)");
  gen->add_option("--out", out_dir, "output data directory")->required();
  CLI::Option* gen_seed = gen->add_option("--seed", seed, "override the config seed");

  CLI::App* train = app.add_subcommand("train", "Train on a client data directory");
  train->add_option("--config", config_path, "experiment config JSON (defaults when omitted)");
  train->add_option("--data", data_dir, "client data directory")->required();
  train->add_option("--out", run_dir, "run output directory")->required();
  train->add_option("--mode", mode_name,
                    "federated | data_agg | isolated (overrides the config)");
  CLI::Option* train_seed = train->add_option("--seed", seed, "override the config seed");
  train->add_option("--threads", threads, "worker cap (default: FEDKGC_THREADS or 4)");

  CLI::App* eval = app.add_subcommand("eval", "Evaluate a finished training run");
  eval->add_option("--run", run_dir, "run directory written by train")->required();
  eval->add_option("--data", data_dir, "client data directory")->required();
  eval->add_option("--split", split_name, "train | valid | test")->capture_default_str();
  eval->add_flag("--dump-ranks", dump_ranks, "also write per-query ranks.jsonl");
  eval->add_option("--threads", threads, "worker cap (default: FEDKGC_THREADS or 4)");

  CLI::App* gradcheck =
      app.add_subcommand("gradcheck", "Check analytic loss gradients against finite differences");
  gradcheck->add_option("--eps", eps, "central-difference step")->capture_default_str();
  gradcheck->add_option("--seeds", seeds, "number of random configs")->capture_default_str();
  gradcheck->add_flag("--corrupt", corrupt, "inject a deliberate gradient error (must fail)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (gen->parsed()) {
      ExperimentConfig cfg = load_or_default(config_path);
      if (gen_seed->count() > 0) apply_seed(cfg, seed);
      return cmd_gen(cfg, out_dir);
    }
    if (train->parsed()) {
      ExperimentConfig cfg = load_or_default(config_path);
      if (train_seed->count() > 0) apply_seed(cfg, seed);
      if (!mode_name.empty()) cfg.federation.mode = parse_run_mode(mode_name);
      return cmd_train(std::move(cfg), data_dir, run_dir, resolve_threads(threads));
    }
    if (eval->parsed()) {
      return cmd_eval(run_dir, data_dir, split_name, dump_ranks, resolve_threads(threads));
    }
    if (gradcheck->parsed()) {
      return cmd_gradcheck(eps, seeds, corrupt);
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 1;
}
