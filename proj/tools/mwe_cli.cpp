// mwe: train, tag, eval, gradcheck and stats subcommands.
//
// Exit codes: 0 ok, 1 usage, 2 config, 3 corpus parse, 4 training,
// 5 alignment, 6 gradient check failure, 7 I/O or existing output.

#include "mwe/autodiff.hpp"
#include "mwe/checkpoint.hpp"
#include "mwe/corpus.hpp"
#include "mwe/evaluation.hpp"
#include "mwe/gradcheck_suite.hpp"
#include "mwe/model.hpp"
#include "mwe/trainer.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace mwe;

namespace {

enum Exit : int {
  kOk = 0,
  kUsage = 1,
  kConfig = 2,
  kParse = 3,
  kTraining = 4,
  kAlignment = 5,
  kGradcheck = 6,
  kIo = 7,
};

struct Failure {
  int code;
  std::string message;
};

using LangPath = std::pair<std::string, std::string>;

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure{kIo, "cannot open " + path};
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Failure{kIo, "cannot write " + path.string()};
  out << text;
  if (!out) throw Failure{kIo, "failed writing " + path.string()};
}

void refuse_existing(const fs::path& path, bool force) {
  if (!force && fs::exists(path)) throw Failure{kIo, path.string() + " exists; pass --force to overwrite"};
}

Corpus load_corpus(const std::string& path, const std::string& language) {
  const auto text = read_text(path);
  try {
    return parse_cupt(text, language, path);
  } catch (const CuptError& e) {
    throw Failure{kParse, e.what()};
  }
}

Corpus load_merged(const std::vector<LangPath>& inputs) {
  std::vector<std::pair<Corpus, std::string>> parts;
  for (const auto& [lang, path] : inputs) parts.emplace_back(load_corpus(path, lang), lang);
  try {
    return merge_corpora(parts);
  } catch (const CuptError& e) {
    throw Failure{kParse, e.what()};
  }
}

// Run configuration -------------------------------------------------------

json trainer_config_to_json(const TrainerConfig& c) {
  return json{{"learning_rate", c.learning_rate}, {"lambda", c.lambda},         {"schedule", to_string(c.schedule)},
              {"epochs", c.epochs},               {"batch_size", c.batch_size}, {"seed", c.seed},
              {"shuffle", c.shuffle},             {"clip_norm", c.clip_norm}};
}

TrainerConfig trainer_config_from_json(const json& j) {
  TrainerConfig c;
  c.learning_rate = j.at("learning_rate").get<double>();
  c.lambda = j.at("lambda").get<double>();
  c.schedule = lambda_schedule_from(j.at("schedule").get<std::string>());
  c.epochs = j.at("epochs").get<int>();
  c.batch_size = j.at("batch_size").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.shuffle = j.at("shuffle").get<bool>();
  c.clip_norm = j.at("clip_norm").get<double>();
  return c;
}

// Overlays `user` on `defaults`, refusing keys the defaults do not have.
void overlay(json& defaults, const json& user, const std::string& where) {
  if (!user.is_object()) throw Failure{kConfig, where + " must be an object"};
  for (const auto& [key, value] : user.items()) {
    if (!defaults.contains(key)) throw Failure{kConfig, "unknown key " + where + "." + key};
    defaults[key] = value;
  }
}

json inputs_to_json(const std::vector<LangPath>& inputs) {
  json out = json::array();
  for (const auto& [lang, path] : inputs) out.push_back({{"language", lang}, {"path", path}});
  return out;
}

std::vector<LangPath> inputs_from_json(const json& j, const std::string& where) {
  if (!j.is_array()) throw Failure{kConfig, where + " must be an array"};
  std::vector<LangPath> out;
  for (const auto& e : j) out.emplace_back(e.at("language").get<std::string>(), e.at("path").get<std::string>());
  return out;
}

struct TrainArgs {
  std::string config_path;
  std::vector<LangPath> train;
  std::vector<LangPath> dev;
  std::string out;
  bool force = false;

  // Overrides; unset ones leave the config file's value.
  std::optional<int> embedding_dim, window, hidden_dim, discriminator_dim, epochs, batch_size;
  std::optional<double> steepness, lambda, init_range, li_bias_init, learning_rate, clip_norm;
  std::optional<bool> use_li, use_adv, shuffle;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> pooling, schedule;
};

struct RunConfig {
  ModelConfig model;
  TrainerConfig trainer;
  std::vector<LangPath> train;
  std::vector<LangPath> dev;
  std::string out;

  json to_json() const {
    return json{{"model", model_config_to_json(model)},
                {"trainer", trainer_config_to_json(trainer)},
                {"train", inputs_to_json(train)},
                {"dev", inputs_to_json(dev)},
                {"output", out}};
  }
};

RunConfig resolve(const TrainArgs& a) {
  json model = model_config_to_json(ModelConfig{});
  json trainer = trainer_config_to_json(TrainerConfig{});
  json file = json::object();
  if (!a.config_path.empty()) {
    try {
      file = json::parse(read_text(a.config_path));
    } catch (const json::exception& e) {
      throw Failure{kConfig, a.config_path + ": " + e.what()};
    }
    if (!file.is_object()) throw Failure{kConfig, a.config_path + " must hold an object"};
    for (const auto& [key, value] : file.items()) {
      if (key != "model" && key != "trainer" && key != "train" && key != "dev" && key != "output") {
        throw Failure{kConfig, "unknown key " + key};
      }
    }
  }
  if (file.contains("model")) overlay(model, file["model"], "model");
  if (file.contains("trainer")) overlay(trainer, file["trainer"], "trainer");

  auto set = [](json& j, const char* key, const auto& opt) {
    if (opt) j[key] = *opt;
  };
  set(model, "embedding_dim", a.embedding_dim);
  set(model, "window", a.window);
  set(model, "hidden_dim", a.hidden_dim);
  set(model, "discriminator_dim", a.discriminator_dim);
  set(model, "steepness", a.steepness);
  set(model, "use_lateral_inhibition", a.use_li);
  set(model, "use_adversarial", a.use_adv);
  set(model, "lambda", a.lambda);
  set(model, "seed", a.seed);
  set(model, "pooling", a.pooling);
  set(model, "init_range", a.init_range);
  set(model, "li_bias_init", a.li_bias_init);
  set(trainer, "learning_rate", a.learning_rate);
  set(trainer, "lambda", a.lambda);
  set(trainer, "schedule", a.schedule);
  set(trainer, "epochs", a.epochs);
  set(trainer, "batch_size", a.batch_size);
  set(trainer, "seed", a.seed);
  set(trainer, "shuffle", a.shuffle);
  set(trainer, "clip_norm", a.clip_norm);

  RunConfig rc;
  try {
    rc.model = model_config_from_json(model);
    rc.trainer = trainer_config_from_json(trainer);
    rc.model.validate();
    rc.trainer.validate();
    rc.train = a.train.empty() && file.contains("train") ? inputs_from_json(file["train"], "train") : a.train;
    rc.dev = a.dev.empty() && file.contains("dev") ? inputs_from_json(file["dev"], "dev") : a.dev;
    rc.out = !a.out.empty() ? a.out : file.value("output", std::string{});
  } catch (const json::exception& e) {
    throw Failure{kConfig, e.what()};
  } catch (const std::invalid_argument& e) {
    throw Failure{kConfig, e.what()};
  }
  if (rc.train.empty()) throw Failure{kConfig, "no training corpus given (--train LANG PATH)"};
  if (rc.out.empty()) throw Failure{kConfig, "no output directory given (--out DIR)"};
  for (auto* inputs : {&rc.train, &rc.dev}) {
    for (auto& [lang, path] : *inputs) path = fs::absolute(path).lexically_normal().string();
  }
  return rc;
}

// Subcommands -------------------------------------------------------------

int cmd_train(const TrainArgs& args) {
  const auto rc = resolve(args);
  const auto train_corpus = load_merged(rc.train);
  const std::optional<Corpus> dev = rc.dev.empty() ? std::nullopt : std::optional(load_merged(rc.dev));

  const fs::path out(rc.out);
  if (fs::exists(out) && !fs::is_empty(out) && !args.force) {
    throw Failure{kIo, out.string() + " is not empty; pass --force to overwrite"};
  }
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw Failure{kIo, "cannot create " + out.string() + ": " + ec.message()};
  write_text(out / "config.json", rc.to_json().dump(2) + "\n");

  std::optional<Model> model;
  TrainingResult result;
  try {
    model = Model::build(train_corpus, rc.model);
    result = train(*model, train_corpus, dev ? &*dev : nullptr, rc.trainer, [](const EpochRecord& r) {
      std::fprintf(stderr, "epoch %d  lambda %.4f  tag loss %.6f  language loss %.6f", r.epoch, r.lambda, r.tag_loss,
                   r.language_loss);
      if (r.dev) std::fprintf(stderr, "  dev F1 %s", format_percent(r.dev->global.f1).c_str());
      std::fprintf(stderr, "\n");
    });
  } catch (const std::exception& e) {
    throw Failure{kTraining, e.what()};
  }
  write_text(out / "model.json", checkpoint_to_string(*model));
  if (result.best_model) write_text(out / "best.json", checkpoint_to_string(*result.best_model));
  write_text(out / "report.jsonl", report_to_jsonl(result.report));
  write_text(out / "summary.json", report_summary_json(result.report, rc.trainer));
  std::printf("trained %zu sentences for %d epochs; wrote %s\n", train_corpus.sentences.size(), rc.trainer.epochs,
              out.string().c_str());
  return kOk;
}

int cmd_tag(const std::string& model_path, const std::string& input, const std::string& output,
            const std::string& language, bool force) {
  refuse_existing(output, force);
  std::optional<Model> model;
  try {
    model = checkpoint_from_string(read_text(model_path));
  } catch (const Failure&) {
    throw;
  } catch (const std::exception& e) {
    throw Failure{kConfig, model_path + ": " + e.what()};
  }
  const auto lang = !language.empty() ? language : model->languages().empty() ? "XX" : model->languages().front();
  const auto corpus = load_corpus(input, lang);
  Corpus tagged;
  try {
    tagged = tag_corpus(*model, corpus);
  } catch (const std::exception& e) {
    throw Failure{kConfig, e.what()};
  }
  write_text(output, serialize_cupt(tagged));
  return kOk;
}

json scores_json(const MatchCounts& c, const Scores& s) {
  return {{"gold", c.gold},           {"predicted", c.predicted}, {"true_positive", c.true_positive},
          {"precision", s.precision}, {"recall", s.recall},       {"f1", s.f1}};
}

int cmd_eval(const std::string& gold_path, const std::string& pred_path, const std::vector<LangPath>& train_inputs,
             bool sensitive, const std::string& name, const std::string& json_path, bool force) {
  if (!json_path.empty()) refuse_existing(json_path, force);
  const auto gold = load_corpus(gold_path, "XX");
  const auto pred = load_corpus(pred_path, "XX");
  const auto seen = train_inputs.empty() ? std::set<LemmaKey>{} : unseen_keys(load_merged(train_inputs));
  const auto mode = sensitive ? CategoryMode::Sensitive : CategoryMode::Insensitive;
  EvalResult r;
  try {
    r = evaluate(gold, pred, seen, mode);
  } catch (const EvaluationError& e) {
    throw Failure{kAlignment, e.what()};
  }
  std::printf("%s", format_result_table(name, r).c_str());
  if (!json_path.empty()) {
    const json doc{{"system", name},
                   {"category_sensitive", sensitive},
                   {"gold", gold_path},
                   {"prediction", pred_path},
                   {"global", scores_json(r.global_counts, r.global)},
                   {"unseen", scores_json(r.unseen_counts, r.unseen)}};
    write_text(json_path, doc.dump(2) + "\n");
  }
  return kOk;
}

int cmd_gradcheck(double threshold, double corruption) {
  ad::testing::set_sigmoid_adjoint_corruption(corruption);
  const auto entries = run_gradcheck_suite();
  ad::testing::set_sigmoid_adjoint_corruption(1.0);
  int failed = 0;
  std::size_t counted = 0;
  for (const auto& e : entries) {
    const bool ok = e.max_relative_error < threshold;
    const char* verdict = e.expected_fail ? (ok ? "unexpected pass" : "expected fail") : ok ? "ok" : "FAIL";
    if (!e.expected_fail) {
      ++counted;
      failed += ok ? 0 : 1;
    }
    std::printf("%-48s %.3e  %s\n", e.name.c_str(), e.max_relative_error, verdict);
  }
  std::printf("%d of %zu checks above %.0e\n", failed, counted, threshold);
  return failed ? kGradcheck : kOk;
}

int cmd_stats(const std::vector<LangPath>& inputs, bool as_json) {
  const auto stats = corpus_stats(load_merged(inputs));
  auto to_json = [](const LanguageStats& s) {
    return json{{"sentences", s.sentences}, {"tokens", s.tokens}, {"mwes", s.mwes}, {"by_category", s.mwes_by_category}};
  };
  if (as_json) {
    json by = json::object();
    for (const auto& [lang, s] : stats.by_language) by[lang] = to_json(s);
    std::printf("%s\n", json{{"total", to_json(stats.total)}, {"languages", by}}.dump(2).c_str());
    return kOk;
  }
  auto print = [](const std::string& label, const LanguageStats& s) {
    std::printf("%-6s %8zu sentences %9zu tokens %7zu MWEs", label.c_str(), s.sentences, s.tokens, s.mwes);
    for (const auto& [cat, n] : s.mwes_by_category) std::printf("  %s=%zu", cat.c_str(), n);
    std::printf("\n");
  };
  for (const auto& [lang, s] : stats.by_language) print(lang, s);
  print("total", stats.total);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multilingual verbal MWE tagger"};
  app.require_subcommand(1);

  TrainArgs ta;
  auto* train_cmd = app.add_subcommand("train", "train a tagger and write a run directory");
  train_cmd->add_option("--config", ta.config_path, "JSON run config; flags override it");
  train_cmd->add_option("--train", ta.train, "training corpus: LANG PATH (repeatable)");
  train_cmd->add_option("--dev", ta.dev, "dev corpus: LANG PATH (repeatable)");
  train_cmd->add_option("--out", ta.out, "output directory");
  train_cmd->add_flag("--force", ta.force, "write into a non-empty output directory");
  train_cmd->add_option("--embedding-dim", ta.embedding_dim);
  train_cmd->add_option("--window", ta.window);
  train_cmd->add_option("--hidden-dim", ta.hidden_dim);
  train_cmd->add_option("--discriminator-dim", ta.discriminator_dim);
  train_cmd->add_option("--steepness", ta.steepness, "surrogate sigmoid steepness k");
  train_cmd->add_option("--use-li", ta.use_li, "lateral inhibition layer (true/false)");
  train_cmd->add_option("--use-adv", ta.use_adv, "language discriminator (true/false)");
  train_cmd->add_option("--lambda", ta.lambda, "gradient reversal strength");
  train_cmd->add_option("--seed", ta.seed, "seed for initialization and shuffling");
  train_cmd->add_option("--pooling", ta.pooling)->check(CLI::IsMember({"sentence", "token"}));
  train_cmd->add_option("--init-range", ta.init_range);
  train_cmd->add_option("--li-bias-init", ta.li_bias_init);
  train_cmd->add_option("--lr", ta.learning_rate, "learning rate");
  train_cmd->add_option("--epochs", ta.epochs);
  train_cmd->add_option("--batch-size", ta.batch_size);
  train_cmd->add_option("--schedule", ta.schedule)->check(CLI::IsMember({"constant", "dann_ramp"}));
  train_cmd->add_option("--shuffle", ta.shuffle);
  train_cmd->add_option("--clip-norm", ta.clip_norm);

  std::string model_path, input, output, tag_lang;
  bool tag_force = false;
  auto* tag_cmd = app.add_subcommand("tag", "rewrite the MWE column of a .cupt file with predictions");
  tag_cmd->add_option("--model", model_path, "checkpoint")->required();
  tag_cmd->add_option("--input", input, "input .cupt")->required();
  tag_cmd->add_option("--output", output, "output .cupt")->required();
  tag_cmd->add_option("--lang", tag_lang, "language code of the input");
  tag_cmd->add_flag("--force", tag_force);

  std::string gold, pred, name = "system", json_out;
  std::vector<LangPath> eval_train;
  bool sensitive = false;
  bool eval_force = false;
  auto* eval_cmd = app.add_subcommand("eval", "score predictions against gold");
  eval_cmd->add_option("--gold", gold)->required();
  eval_cmd->add_option("--pred", pred)->required();
  eval_cmd->add_option("--train", eval_train, "training corpus for unseen scores: LANG PATH (repeatable)");
  eval_cmd->add_flag("--category-sensitive", sensitive);
  eval_cmd->add_option("--name", name, "row label");
  eval_cmd->add_option("--json", json_out, "machine-readable report");
  eval_cmd->add_flag("--force", eval_force);

  double threshold = 1e-5;
  double corruption = 1.0;
  auto* grad_cmd = app.add_subcommand("gradcheck", "finite-difference check of every differentiable operation");
  grad_cmd->add_option("--threshold", threshold);
  grad_cmd->add_option("--corrupt-adjoint", corruption, "scale the sigmoid adjoint (test hook)");

  std::vector<LangPath> stats_inputs;
  bool stats_json = false;
  auto* stats_cmd = app.add_subcommand("stats", "corpus statistics");
  stats_cmd->add_option("--input", stats_inputs, "LANG PATH (repeatable)")->required();
  stats_cmd->add_flag("--json", stats_json);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*train_cmd) return cmd_train(ta);
    if (*tag_cmd) return cmd_tag(model_path, input, output, tag_lang, tag_force);
    if (*eval_cmd) return cmd_eval(gold, pred, eval_train, sensitive, name, json_out, eval_force);
    if (*grad_cmd) return cmd_gradcheck(threshold, corruption);
    if (*stats_cmd) return cmd_stats(stats_inputs, stats_json);
  } catch (const Failure& f) {
    std::fprintf(stderr, "error: %s\n", f.message.c_str());
    return f.code;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kTraining;
  }
  return kUsage;
}
