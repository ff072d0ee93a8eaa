// hyfi: generate synthetic data, train, evaluate, run the property suites and
// export analysis histograms. Every invocation leaves run_<command>.json in --out.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hyfi/checks.hpp"
#include "hyfi/io_util.hpp"
#include "hyfi/model.hpp"
#include "hyfi/synth.hpp"
#include "hyfi/trainer.hpp"

#ifndef HYFI_VERSION
#define HYFI_VERSION "dev"
#endif

namespace fs = std::filesystem;
using nlohmann::json;
using namespace hyfi;

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kDataError = 2;
constexpr int kPropertyFailure = 3;

// Problems with input files or their compatibility, as opposed to bad flags.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Run {
  std::string command;
  fs::path out = ".";
  json config = json::object();
  json seeds = json::object();
  std::vector<fs::path> artifacts;

  void write(const fs::path& name, std::string_view contents) {
    const auto path = out / name;
    io::write_file_atomic(path, contents);
    artifacts.push_back(path);
  }
};

void write_manifest(const Run& run, double seconds, int code, const std::string& error) {
  json m;
  m["command"] = run.command;
  m["config"] = run.config;
  m["seeds"] = run.seeds;
  m["artifacts"] = json::array();
  for (const auto& p : run.artifacts) {
    if (fs::exists(p)) m["artifacts"].push_back(p.string());
  }
  m["tool_version"] = HYFI_VERSION;
  m["duration_seconds"] = seconds;
  m["exit_code"] = code;
  if (!error.empty()) m["error"] = error;
  std::error_code ec;
  fs::create_directories(run.out, ec);
  io::write_file_atomic(run.out / ("run_" + run.command + ".json"), m.dump(2) + "\n");
}

std::pair<std::size_t, std::size_t> parse_dims(const std::string& s) {
  const auto comma = s.find(',');
  if (comma == std::string::npos) throw CLI::ValidationError("--dims", "expected d,d_b");
  try {
    return {std::stoul(s.substr(0, comma)), std::stoul(s.substr(comma + 1))};
  } catch (const std::exception&) {
    throw CLI::ValidationError("--dims", "expected two integers, got '" + s + "'");
  }
}

synth::PairedDataset read_split(const fs::path& data, const std::string& split) {
  if (split != "train" && split != "test") {
    throw std::invalid_argument("--split must be train or test, got '" + split + "'");
  }
  const auto path = data / (split + ".hyfi");
  if (!fs::exists(path)) throw DataError("dataset file " + path.string() + " does not exist");
  try {
    return synth::read_embeddings(path);
  } catch (const std::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

model::HyfiParams read_checkpoint(const fs::path& stem) {
  try {
    return model::load_checkpoint(stem);
  } catch (const std::exception& e) {
    throw DataError("checkpoint " + stem.string() + ": " + e.what());
  }
}

void require_compatible(const synth::PairedDataset& data, const model::ModelConfig& c) {
  if (data.d_semantic != c.d || data.d_perceptual != c.d || data.d_brain != c.d_b) {
    throw DataError("dimension mismatch: data has d=" + std::to_string(data.d_semantic) +
                    " (perceptual " + std::to_string(data.d_perceptual) +
                    "), d_b=" + std::to_string(data.d_brain) + " but checkpoint expects d=" +
                    std::to_string(c.d) + ", d_b=" + std::to_string(c.d_b));
  }
}

// Splices `--key value` pairs from a flat JSON config in front of the real
// flags. Options take their last occurrence, so explicit flags win.
std::vector<std::string> merge_config(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::optional<fs::path> config;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) config = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) config = args[i].substr(9);
  }
  if (!config || args.empty()) return args;
  json j;
  try {
    j = json::parse(io::read_file(*config));
  } catch (const std::exception& e) {
    throw CLI::ValidationError("--config", config->string() + ": " + e.what());
  }
  if (!j.is_object()) throw CLI::ValidationError("--config", "expected a flat JSON object");
  std::vector<std::string> injected;
  for (const auto& [key, value] : j.items()) {
    const std::string flag = "--" + key;
    if (value.is_boolean()) {
      if (value.get<bool>()) injected.push_back(flag);
    } else if (value.is_string()) {
      injected.insert(injected.end(), {flag, value.get<std::string>()});
    } else if (value.is_number()) {
      injected.insert(injected.end(), {flag, value.dump()});
    } else if (value.is_array()) {
      std::string joined;
      for (const auto& x : value) joined += (joined.empty() ? "" : ",") + (x.is_string() ? x.get<std::string>() : x.dump());
      injected.insert(injected.end(), {flag, joined});
    } else {
      throw CLI::ValidationError("--config", "key '" + key + "' must be a scalar or array");
    }
  }
  args.insert(args.begin() + 1, injected.begin(), injected.end());
  return args;
}

// ---------------------------------------------------------------------------

struct GenOptions {
  synth::SynthConfig synth;
  std::string dims = "32,12";
};

int cmd_gen(GenOptions& o, Run& run) {
  std::tie(o.synth.d, o.synth.d_b) = parse_dims(o.dims);
  o.synth.validate();
  run.config = json::parse(synth::config_to_json(o.synth));
  run.seeds["seed"] = o.synth.seed;
  const auto split = synth::generate(o.synth);
  fs::create_directories(run.out);
  run.write("train.hyfi", synth::encode_embeddings(split.train));
  run.write("test.hyfi", synth::encode_embeddings(split.test));
  run.write("dataset.json", synth::config_to_json(o.synth) + "\n");
  std::printf("wrote %zu train / %zu test items to %s\n", split.train.size(), split.test.size(),
              run.out.string().c_str());
  return kOk;
}

struct TrainOptions {
  fs::path data = ".";
  trainer::TrainConfig train;
  std::uint64_t init_seed = 0;
  std::string ablation = "full";
  std::string loss_mode = "standard";
  std::string t_input = "semantic";
  bool fix_alpha_v = false;
};

int cmd_train(TrainOptions& o, Run& run) {
  o.train.ablation = model::parse_ablation(o.ablation);
  o.train.loss_mode = model::parse_loss_mode(o.loss_mode);
  o.train.validate();
  model::ModelConfig mc;
  mc.t_input = model::parse_coefficient_input(o.t_input);
  mc.fix_alpha_v = o.fix_alpha_v;
  run.config = {{"data", o.data.string()},      {"epochs", o.train.epochs},
                {"batch", o.train.batch_size},  {"lr", o.train.lr},
                {"wd", o.train.weight_decay},   {"ablation", o.ablation},
                {"loss-mode", o.loss_mode},     {"t-input", o.t_input},
                {"fix-alpha-v", o.fix_alpha_v}};
  run.seeds = {{"seed", o.init_seed}, {"shuffle-seed", o.train.seed}};

  const auto data = read_split(o.data, "train");
  if (data.d_semantic != data.d_perceptual) {
    throw DataError("semantic and perceptual dimensions differ (" + std::to_string(data.d_semantic) +
                    " vs " + std::to_string(data.d_perceptual) + ")");
  }
  mc.d = data.d_semantic;
  mc.d_b = data.d_brain;
  run.config["dims"] = std::to_string(mc.d) + "," + std::to_string(mc.d_b);

  const auto start = std::chrono::steady_clock::now();
  auto result = trainer::train(data, model::HyfiParams::init(mc, o.init_seed), o.train);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  fs::create_directories(run.out);
  model::save_checkpoint(run.out / "model", result.params);
  run.artifacts.push_back(run.out / "model.manifest");
  run.artifacts.push_back(run.out / "model.bin");
  run.write("history.csv", trainer::history_to_csv(result.history));
  if (result.history.empty()) {
    std::printf("0 epochs: checkpoint holds the initial parameters\n");
  } else {
    std::printf("%zu epochs in %.1fs, loss %.4f -> %.4f\n", result.history.size(), secs,
                result.history.front(), result.history.back());
  }
  return kOk;
}

struct EvalOptions {
  fs::path data = ".";
  fs::path checkpoint = "model";
  std::string split = "test";
};

int cmd_eval(EvalOptions& o, Run& run) {
  run.config = {{"data", o.data.string()}, {"checkpoint", o.checkpoint.string()}, {"split", o.split}};
  const auto params = read_checkpoint(o.checkpoint);
  const auto data = read_split(o.data, o.split);
  require_compatible(data, params.config);
  if (data.size() < 6) throw DataError("top-5 retrieval needs at least 6 test items");
  const std::size_t ks[] = {1, 5};
  const auto report = trainer::evaluate_retrieval(data, params, ks);
  fs::create_directories(run.out);
  run.write("retrieval.json", report.to_json() + "\n");
  run.write("ranks.csv", report.ranks_to_csv());
  std::printf("%zu-way  top-1 %.4f  top-5 %.4f  (chance %.4f)\n", report.n_ways, report.top1,
              report.top5, 1.0 / static_cast<double>(report.n_ways));
  return kOk;
}

struct CheckOptions {
  std::string suite = "all";
  std::size_t trials = 0;
  std::uint64_t seed = 0;
};

int cmd_check(CheckOptions& o, Run& run) {
  run.config = {{"suite", o.suite}, {"trials", o.trials}};
  run.seeds["seed"] = o.seed;
  const auto results = checks::run(o.suite, o.trials, o.seed);
  json report = json::array();
  bool ok = true;
  for (const auto& r : results) {
    std::printf("%-4s %-13s %6zu cases  %zu failures  worst %.3g  %.2fs  (%s)\n",
                r.passed() ? "ok" : "FAIL", r.name.c_str(), r.cases, r.failures, r.worst,
                r.seconds, r.note.c_str());
    ok = ok && r.passed();
    report.push_back({{"suite", r.name}, {"cases", r.cases}, {"failures", r.failures},
                      {"worst", r.worst}, {"seconds", r.seconds}, {"note", r.note}});
  }
  fs::create_directories(run.out);
  run.write("checks.json", report.dump(2) + "\n");
  return ok ? kOk : kPropertyFailure;
}

struct StatsOptions {
  fs::path data = ".";
  fs::path checkpoint = "model";
  std::string split = "test";
  std::string which = "root-distance";
  std::size_t bins = 20;
};

int cmd_stats(StatsOptions& o, Run& run) {
  run.config = {{"data", o.data.string()}, {"checkpoint", o.checkpoint.string()},
                {"split", o.split},        {"which", o.which},
                {"bins", o.bins}};
  if (o.which != "root-distance" && o.which != "coefficient") {
    throw std::invalid_argument("--which must be root-distance or coefficient, got '" + o.which + "'");
  }
  const auto params = read_checkpoint(o.checkpoint);
  const auto data = read_split(o.data, o.split);
  require_compatible(data, params.config);
  if (data.empty()) throw DataError("no items in the " + o.split + " split");
  fs::create_directories(run.out);

  if (o.which == "coefficient") {
    const auto s = trainer::coefficient_stats(data, params, o.bins);
    run.write("coefficient.json", s.to_json() + "\n");
    run.write("coefficient_hist.csv", s.histogram.to_csv());
    std::string per_item = "item,concept,t\n";
    for (std::size_t i = 0; i < s.t.size(); ++i) {
      per_item += std::to_string(i) + "," + std::to_string(data.items[i].concept_id) + "," +
                  std::to_string(s.t[i]) + "\n";
    }
    run.write("coefficient.csv", per_item);
    std::printf("t in [%.4f, %.4f] over %zu items\n", s.t[s.argmin], s.t[s.argmax], s.t.size());
    return kOk;
  }

  // Semantic, perceptual and fused populations always come from the hyperbolic
  // encoder; "visual" and "brain" are whatever the checkpoint's ablation embeds.
  const auto kappa = params.curvature();
  std::vector<hygeo::LorentzPoint> semantic, perceptual, interpolated;
  for (const auto& item : data.items) {
    auto parts = model::visual_parts(item, params);
    semantic.push_back(parts.semantic);
    perceptual.push_back(parts.perceptual);
    interpolated.push_back(parts.interpolated);
  }
  auto stats_of = [&](const model::Embedded& e) {
    return e.hyperbolic ? trainer::root_distance_stats(e.points, kappa, o.bins)
                        : trainer::root_distance_stats(e.vectors, o.bins);
  };
  const std::pair<std::string, trainer::RootDistanceStats> pops[] = {
      {"semantic", trainer::root_distance_stats(semantic, kappa, o.bins)},
      {"perceptual", trainer::root_distance_stats(perceptual, kappa, o.bins)},
      {"interpolated", trainer::root_distance_stats(interpolated, kappa, o.bins)},
      {"visual", stats_of(model::embed_visual(data.items, params))},
      {"brain", stats_of(model::embed_brain(data.items, params))},
  };
  json all;
  for (const auto& [name, s] : pops) {
    all[name] = json::parse(s.to_json());
    run.write("root_distance_" + name + ".csv", s.histogram.to_csv());
    std::printf("%-13s mean %.4f  std %.4f\n", name.c_str(), s.mean, s.std);
  }
  all["ablation"] = model::to_string(params.config.ablation);
  run.write("root_distance.json", all.dump(2) + "\n");
  return kOk;
}

void add_common(CLI::App* sub, Run& run) {
  sub->add_option("--out", run.out, "Output directory")->capture_default_str();
  sub->add_option("--config", "Flat JSON file of flag values; explicit flags win");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"HyFI: hyperbolic feature interpolation for brain-vision alignment"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  app.set_version_flag("--version", HYFI_VERSION);
  Run run;

  GenOptions gen;
  auto* g = app.add_subcommand("gen", "Generate a synthetic paired dataset");
  add_common(g, run);
  g->add_option("--seed", gen.synth.seed)->capture_default_str();
  g->add_option("--concepts", gen.synth.n_concepts, "Training concepts")->capture_default_str();
  g->add_option("--test-concepts", gen.synth.n_test_concepts)->capture_default_str();
  g->add_option("--images", gen.synth.images_per_concept, "Images per training concept")
      ->capture_default_str();
  g->add_option("--dims", gen.dims, "Feature and brain dimensions as d,d_b")->capture_default_str();
  g->add_option("--semantic-scale", gen.synth.semantic_scale)->capture_default_str();
  g->add_option("--perceptual-scale", gen.synth.perceptual_scale)->capture_default_str();
  g->add_option("--entangle", gen.synth.entangle_weight)->capture_default_str();
  g->add_option("--brain-noise", gen.synth.brain_noise_std)->capture_default_str();

  TrainOptions train;
  auto* t = app.add_subcommand("train", "Train a model on <data>/train.hyfi");
  add_common(t, run);
  t->add_option("--data", train.data, "Directory written by gen")->capture_default_str();
  t->add_option("--seed", train.init_seed, "Parameter initialization seed")->capture_default_str();
  t->add_option("--shuffle-seed", train.train.seed, "Minibatch order seed")->capture_default_str();
  t->add_option("--epochs", train.train.epochs)->capture_default_str();
  t->add_option("--batch", train.train.batch_size)->capture_default_str();
  t->add_option("--lr", train.train.lr)->capture_default_str();
  t->add_option("--wd", train.train.weight_decay)->capture_default_str();
  t->add_option("--ablation", train.ablation, "full|no_interp|euclidean_interp|euclidean_space")
      ->capture_default_str();
  t->add_option("--loss-mode", train.loss_mode, "standard|paper_literal")->capture_default_str();
  t->add_option("--t-input", train.t_input, "semantic|perceptual|original|brain")
      ->capture_default_str();
  t->add_flag("--fix-alpha-v", train.fix_alpha_v, "Freeze the visual scale at its initial value");

  EvalOptions eval;
  auto* e = app.add_subcommand("eval", "Zero-shot retrieval on a held-out split");
  add_common(e, run);
  e->add_option("--data", eval.data)->capture_default_str();
  e->add_option("--checkpoint", eval.checkpoint, "Checkpoint stem")->capture_default_str();
  e->add_option("--split", eval.split)->capture_default_str();

  CheckOptions check;
  auto* c = app.add_subcommand("check", "Run randomized property suites");
  add_common(c, run);
  c->add_option("suite", check.suite, "Suite name or all")->capture_default_str();
  c->add_option("--trials", check.trials, "Cases per suite (0 = suite default)")
      ->capture_default_str();
  c->add_option("--seed", check.seed)->capture_default_str();

  StatsOptions stats;
  auto* s = app.add_subcommand("stats", "Export root-distance or coefficient histograms");
  add_common(s, run);
  s->add_option("--data", stats.data)->capture_default_str();
  s->add_option("--checkpoint", stats.checkpoint)->capture_default_str();
  s->add_option("--split", stats.split)->capture_default_str();
  s->add_option("--which", stats.which, "root-distance|coefficient")->capture_default_str();
  s->add_option("--bins", stats.bins)->capture_default_str();

  try {
    auto args = merge_config(argc, argv);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& err) {
    return app.exit(err) == 0 ? kOk : kUsage;
  }

  run.command = app.get_subcommands().front()->get_name();
  const auto start = std::chrono::steady_clock::now();
  int code = kOk;
  std::string error;
  try {
    if (run.command == "gen") code = cmd_gen(gen, run);
    if (run.command == "train") code = cmd_train(train, run);
    if (run.command == "eval") code = cmd_eval(eval, run);
    if (run.command == "check") code = cmd_check(check, run);
    if (run.command == "stats") code = cmd_stats(stats, run);
  } catch (const hygeo::DimensionError& ex) {
    code = kDataError;
    error = ex.what();
  } catch (const std::invalid_argument& ex) {
    code = kUsage;
    error = ex.what();
  } catch (const CLI::Error& ex) {
    code = kUsage;
    error = ex.what();
  } catch (const std::exception& ex) {
    code = kDataError;
    error = ex.what();
  }
  if (!error.empty()) std::cerr << "hyfi " << run.command << ": " << error << "\n";
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  try {
    write_manifest(run, secs, code, error);
  } catch (const std::exception& ex) {
    std::cerr << "hyfi " << run.command << ": cannot write run manifest: " << ex.what() << "\n";
    if (code == kOk) code = kDataError;
  }
  return code;
}
