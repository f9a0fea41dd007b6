// Copyright 2026 The nerpipe Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// `ner`: one subcommand per pipeline stage, built on the C API.

#include <signal.h>
#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "nerpipe/nerpipe.h"

namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

// Carries a failed C API status out of a command.
struct Failure {
  ner_status status;
  std::string message;
  long line;
};

void Check(ner_status status) {
  if (status != NER_OK) {
    throw Failure{status, ner_last_error_message(), ner_last_error_line()};
  }
}

[[noreturn]] void UsageFail(const std::string& message) {
  throw Failure{NER_E_USAGE, message, 0};
}

int ExitCodeFor(ner_status status) {
  switch (status) {
    case NER_OK:
      return 0;
    case NER_E_USAGE:
    case NER_E_INVALID_ARGUMENT:
      return kExitUsage;
    case NER_E_INTERNAL:
      return kExitInternal;
    default:
      return kExitData;
  }
}

// Takes ownership of a C API string.
std::string Take(char* s) {
  if (s == nullptr) return {};
  std::string out(s);
  ner_string_free(s);
  return out;
}

std::string ReadText(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure{NER_E_IO, "cannot read " + path, 0};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteAtomic(const std::string& path, const std::string& contents) {
  namespace fs = std::filesystem;
  fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  fs::path tmp = target;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << contents;
    out.flush();
    if (!out) throw Failure{NER_E_IO, "cannot write " + tmp.string(), 0};
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) throw Failure{NER_E_IO, "cannot rename onto " + path + ": " + ec.message(), 0};
}

// Prints `text` to stdout, or writes it atomically to `out` when given.
void Output(const std::string& out, const std::string& text) {
  if (out.empty() || out == "-") {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
  } else {
    WriteAtomic(out, text.back() == '\n' ? text : text + "\n");
  }
}

json LoadConfig(const std::string& path) {
  if (path.empty()) return json::object();
  json j;
  try {
    j = json::parse(ReadText(path));
  } catch (const json::exception& e) {
    throw Failure{NER_E_CONFIG, path + ": " + e.what(), 0};
  }
  if (!j.is_object()) throw Failure{NER_E_CONFIG, path + ": expected a JSON object", 0};
  return j;
}

struct Globals {
  std::optional<uint64_t> seed;
  int threads = 1;
};

// Training hyperparameters shared by train and train-student.
struct TrainFlags {
  std::string config;
  std::optional<double> learning_rate, l2, decay;
  std::optional<int> max_epochs, patience, window, hash_bits;
  std::optional<std::string> train_layer, dev_layer;
  std::vector<std::string> labels;
  bool unconstrained = false;

  void Register(CLI::App* cmd) {
    cmd->add_option("--config", config, "JSON file of training options; flags override it")
        ->check(CLI::ExistingFile);
    cmd->add_option("--lr", learning_rate, "SGD learning rate");
    cmd->add_option("--l2", l2, "L2 penalty per update");
    cmd->add_option("--decay", decay, "step size decay: lr / (1 + decay * epoch)");
    cmd->add_option("--epochs", max_epochs, "maximum epochs");
    cmd->add_option("--patience", patience, "early-stopping patience in epochs");
    cmd->add_option("--window", window, "emitter character window (fresh models)");
    cmd->add_option("--hash-bits", hash_bits, "log2 of the emitter feature space (fresh models)");
    cmd->add_option("--labels", labels, "entity labels (fresh models)")->delimiter(',');
    cmd->add_flag("--unconstrained", unconstrained, "disable the BIO transition mask");
    cmd->add_option("--train-layer", train_layer, "span layer to train on");
    cmd->add_option("--dev-layer", dev_layer, "gold layer of the dev set");
  }

  json Options(const Globals& g) const {
    json o = LoadConfig(config);
    if (learning_rate) o["learning_rate"] = *learning_rate;
    if (l2) o["l2"] = *l2;
    if (decay) o["decay"] = *decay;
    if (max_epochs) o["max_epochs"] = *max_epochs;
    if (patience) o["patience"] = *patience;
    if (window) o["window"] = *window;
    if (hash_bits) o["hash_bits"] = *hash_bits;
    if (!labels.empty()) o["labels"] = labels;
    if (unconstrained) o["constrained"] = false;
    if (train_layer) o["train_layer"] = *train_layer;
    if (dev_layer) o["dev_layer"] = *dev_layer;
    if (g.seed) o["seed"] = *g.seed;
    return o;
  }
};

void PrintLog(const char* line, void*) { std::cerr << line << '\n'; }

int Run(int argc, char** argv) {
  CLI::App app{"Weakly supervised NER pipeline: gazetteer annotation, two-stage CRF "
               "training, review and distillation.",
               "ner"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", [] {
    return std::string("ner ") + ner_version() + " (model format " +
           std::to_string(ner_model_format_version()) + ")";
  });

  Globals g;
  app.add_option("--seed", g.seed, "seed for every random choice");
  app.add_option("--threads", g.threads, "worker threads (default 1, deterministic)")
      ->check(CLI::Range(1, 256));

  std::function<void()> action;

  // synth
  {
    auto* cmd = app.add_subcommand("synth", "generate a synthetic benchmark corpus");
    struct Flags {
      std::string config, out;
      std::optional<std::size_t> n_sentences, n_names, n_unlabeled;
      std::optional<double> coverage, noise;
    };
    auto f = std::make_shared<Flags>();
    cmd->add_option("--config", f->config, "JSON synth config; flags override it")
        ->check(CLI::ExistingFile);
    cmd->add_option("--out", f->out, "output directory")->required();
    cmd->add_option("--sentences", f->n_sentences, "labeled sentences");
    cmd->add_option("--names", f->n_names, "distinct company names");
    cmd->add_option("--unlabeled", f->n_unlabeled, "extra unlabeled sentences");
    cmd->add_option("--dict-coverage", f->coverage, "fraction of names in the dictionary");
    cmd->add_option("--noise", f->noise, "boundary noise rate of the coarse layer");
    cmd->callback([&, f] {
      action = [&, f] {
        json c = LoadConfig(f->config);
        if (f->n_sentences) c["n_sentences"] = *f->n_sentences;
        if (f->n_names) c["n_names"] = *f->n_names;
        if (f->n_unlabeled) c["n_unlabeled"] = *f->n_unlabeled;
        if (f->coverage) c["dict_coverage"] = *f->coverage;
        if (f->noise) c["boundary_noise"] = *f->noise;
        if (g.seed) c["seed"] = *g.seed;
        char* result = nullptr;
        Check(ner_synth(c.dump().c_str(), f->out.c_str(), &result));
        json r = json::parse(Take(result));
        for (const auto& [name, crc] : r.at("files").items()) {
          std::cout << crc.get<std::string>() << "  " << name << '\n';
        }
      };
    });
  }

  // match / annotate
  for (bool secondary : {false, true}) {
    auto* cmd = secondary
                    ? app.add_subcommand("annotate",
                                         "dictionary annotation plus a secondary annotator")
                    : app.add_subcommand("match", "annotate a corpus by dictionary matching");
    struct Flags {
      std::string dict, in, out, layer = "coarse", rules, secondary;
      std::size_t min_len = 2;
      bool abbreviations = false;
    };
    auto f = std::make_shared<Flags>();
    cmd->add_option("--dict", f->dict, "dictionary: one name per line, optional TAB label")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--in", f->in, "input JSON Lines corpus")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", f->out, "output JSON Lines corpus")->required();
    cmd->add_option("--layer", f->layer, "name of the added span layer")->capture_default_str();
    cmd->add_option("--min-len", f->min_len, "shortest dictionary surface kept")
        ->capture_default_str();
    cmd->add_flag("--abbreviations", f->abbreviations, "add generated abbreviations");
    cmd->add_option("--rules", f->rules, "abbreviation rules file (implies --abbreviations)")
        ->check(CLI::ExistingFile);
    if (secondary) {
      cmd->add_option("--secondary", f->secondary,
                      "replay file of {\"id\",\"spans\"} lines from another annotator")
          ->required()
          ->check(CLI::ExistingFile);
    }
    cmd->callback([&, f] {
      action = [f] {
        json o = {{"min_surface_len", f->min_len}, {"abbreviations", f->abbreviations}};
        if (!f->rules.empty()) o["rules_path"] = f->rules;
        ner_matcher* matcher = nullptr;
        Check(ner_matcher_build(f->dict.c_str(), o.dump().c_str(), &matcher));
        char* result = nullptr;
        ner_status st = ner_annotate(matcher, f->in.c_str(), f->out.c_str(),
                                     f->secondary.empty() ? nullptr : f->secondary.c_str(),
                                     f->layer.c_str(), &result);
        ner_matcher_free(matcher);
        Check(st);
        json r = json::parse(Take(result));
        for (const auto& w : r.at("warnings")) std::cerr << "warning: " << w.get<std::string>() << '\n';
        r.erase("warnings");
        std::cout << r.dump() << '\n';
      };
    });
  }

  // train
  {
    auto* cmd = app.add_subcommand("train", "outline or detail CRF training");
    struct Flags {
      std::string stage, train, dev, model_in, out;
      TrainFlags t;
    };
    auto f = std::make_shared<Flags>();
    cmd->add_option("--stage", f->stage, "outline: fresh model on the coarse layer; "
                                         "detail: continue on corrected sentences")
        ->required()
        ->check(CLI::IsMember({"outline", "detail"}));
    cmd->add_option("--train", f->train, "training corpus (coarse or corrected JSON Lines)")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--dev", f->dev, "dev corpus for early stopping")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--model", f->model_in, "input model (detail stage)")
        ->check(CLI::ExistingFile);
    cmd->add_option("--out", f->out, "output model file")->required();
    f->t.Register(cmd);
    cmd->callback([&, f] {
      action = [&, f] {
        json o = f->t.Options(g);
        char* result = nullptr;
        if (f->stage == "outline") {
          if (!f->model_in.empty()) UsageFail("--model is only used with --stage detail");
          Check(ner_train_outline(f->train.c_str(), f->dev.c_str(), f->out.c_str(),
                                  o.dump().c_str(), &result));
        } else {
          if (f->model_in.empty()) UsageFail("--stage detail needs --model");
          Check(ner_train_detail(f->model_in.c_str(), f->train.c_str(), f->dev.c_str(),
                                 f->out.c_str(), o.dump().c_str(), &result));
        }
        std::cout << Take(result) << '\n';
      };
    });
  }

  // select
  {
    auto* cmd = app.add_subcommand("select", "queue sentences where model and coarse layer differ");
    struct Flags {
      std::string model, in, layer = "coarse", out;
    };
    auto f = std::make_shared<Flags>();
    cmd->add_option("--model", f->model, "outline model")->required()->check(CLI::ExistingFile);
    cmd->add_option("--in", f->in, "coarse corpus")->required()->check(CLI::ExistingFile);
    cmd->add_option("--layer", f->layer, "machine-annotation layer")->capture_default_str();
    cmd->add_option("--out", f->out, "disagreement store to create")->required();
    cmd->callback([&, f] {
      action = [&, f] {
        char* result = nullptr;
        Check(ner_select(f->model.c_str(), f->in.c_str(), f->layer.c_str(), f->out.c_str(),
                         g.threads, &result));
        std::cout << Take(result) << '\n';
      };
    });
  }

  // serve-review
  {
    auto* cmd = app.add_subcommand("serve-review", "HTTP review service over a disagreement store");
    struct Flags {
      std::string store, dataset, bind, ui_dir;
      std::vector<std::string> labels;
    };
    auto f = std::make_shared<Flags>();
    cmd->add_option("--store", f->store, "disagreement store (default $REVIEW_STORE)")
        ->envname("REVIEW_STORE");
    cmd->add_option("--bind", f->bind, "host:port (default $REVIEW_BIND or 127.0.0.1:8787)")
        ->envname("REVIEW_BIND");
    cmd->add_option("--dataset", f->dataset, "corpus the records must belong to")
        ->check(CLI::ExistingFile);
    cmd->add_option("--ui-dir", f->ui_dir, "static UI directory served at /")
        ->check(CLI::ExistingDirectory);
    cmd->add_option("--labels", f->labels, "entity labels accepted in corrections")
        ->delimiter(',');
    cmd->callback([&, f] {
      action = [f] {
        if (f->store.empty()) UsageFail("serve-review needs --store or REVIEW_STORE");
        json o = {{"store", f->store}};
        if (!f->bind.empty()) o["bind"] = f->bind;
        if (!f->dataset.empty()) o["dataset"] = f->dataset;
        if (!f->ui_dir.empty()) o["ui_dir"] = f->ui_dir;
        if (!f->labels.empty()) o["labels"] = f->labels;

        sigset_t set;
        sigemptyset(&set);
        sigaddset(&set, SIGINT);
        sigaddset(&set, SIGTERM);
        pthread_sigmask(SIG_BLOCK, &set, nullptr);

        ner_review_server* server = nullptr;
        Check(ner_review_server_start(o.dump().c_str(), &server));
        std::cerr << "serving " << f->store << " on port " << ner_review_server_port(server)
                  << '\n';
        int sig = 0;
        sigwait(&set, &sig);
        ner_review_server_stop(server);
        ner_review_server_free(server);
      };
    });
  }

  // export-corrected
  {
    auto* cmd = app.add_subcommand("export-corrected", "corrected sentences of a store as a corpus");
    struct Flags {
      std::string store, out;
    };
    auto f = std::make_shared<Flags>();
    cmd->add_option("--store", f->store, "disagreement store")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", f->out, "output corpus with layer \"corrected\"")->required();
    cmd->callback([&, f] {
      action = [f] {
        char* result = nullptr;
        Check(ner_export_corrected(f->store.c_str(), f->out.c_str(), &result));
        json r = json::parse(Take(result));
        for (const auto& w : r.at("warnings")) std::cerr << "warning: " << w.get<std::string>() << '\n';
        std::cout << json{{"sentences", r.at("sentences")}}.dump() << '\n';
      };
    });
  }

  // oracle-correct
  {
    auto* cmd = app.add_subcommand("oracle-correct",
                                   "answer pending records from a gold layer (synthetic data)");
    struct Flags {
      std::string store, gold, gold_layer = "gold", annotator = "oracle";
    };
    auto f = std::make_shared<Flags>();
    cmd->add_option("--store", f->store, "disagreement store")->required()->check(CLI::ExistingFile);
    cmd->add_option("--gold", f->gold, "corpus holding the gold layer")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--gold-layer", f->gold_layer, "gold layer name")->capture_default_str();
    cmd->add_option("--annotator", f->annotator, "annotator id recorded")->capture_default_str();
    cmd->callback([&, f] {
      action = [f] {
        char* result = nullptr;
        Check(ner_oracle_correct(f->store.c_str(), f->gold.c_str(), f->gold_layer.c_str(),
                                 f->annotator.c_str(), &result));
        std::cout << Take(result) << '\n';
      };
    });
  }

  // distill
  {
    auto* cmd = app.add_subcommand("distill", "pseudo-label unlabeled text with a teacher");
    struct Flags {
      std::string teacher, in, out;
      std::size_t max_len = 512;
    };
    auto f = std::make_shared<Flags>();
    cmd->add_option("--teacher", f->teacher, "teacher model")->required()->check(CLI::ExistingFile);
    cmd->add_option("--in", f->in, "unlabeled corpus")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", f->out, "output corpus with layer \"pseudo\"")->required();
    cmd->add_option("--max-len", f->max_len, "skip sentences longer than this")
        ->capture_default_str();
    cmd->callback([&, f] {
      action = [&, f] {
        char* result = nullptr;
        Check(ner_distill(f->teacher.c_str(), f->in.c_str(), f->out.c_str(), f->max_len,
                          g.threads, &result));
        std::cout << Take(result) << '\n';
      };
    });
  }

  // train-student
  {
    auto* cmd = app.add_subcommand("train-student", "train a small model on pseudo labels");
    struct Flags {
      std::string in, dev, out;
      TrainFlags t;
    };
    auto f = std::make_shared<Flags>();
    cmd->add_option("--in", f->in, "pseudo-labeled corpus")->required()->check(CLI::ExistingFile);
    cmd->add_option("--dev", f->dev, "dev corpus for early stopping")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--out", f->out, "output model file")->required();
    f->t.Register(cmd);
    cmd->callback([&, f] {
      action = [&, f] {
        char* result = nullptr;
        Check(ner_train_student(f->in.c_str(), f->dev.c_str(), f->out.c_str(),
                                f->t.Options(g).dump().c_str(), &result));
        std::cout << Take(result) << '\n';
      };
    });
  }

  // predict
  {
    auto* cmd = app.add_subcommand("predict", "tag a corpus");
    struct Flags {
      std::string model, in, out, layer = "predicted", format = "jsonl";
    };
    auto f = std::make_shared<Flags>();
    cmd->add_option("--model", f->model, "model file")->required()->check(CLI::ExistingFile);
    cmd->add_option("--in", f->in, "input corpus")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", f->out, "output corpus")->required();
    cmd->add_option("--layer", f->layer, "name of the prediction layer")->capture_default_str();
    cmd->add_option("--format", f->format, "corpus format")
        ->check(CLI::IsMember({"jsonl", "column"}))
        ->capture_default_str();
    cmd->callback([&, f] {
      action = [&, f] {
        Check(ner_predict(f->model.c_str(), f->in.c_str(), f->out.c_str(), f->layer.c_str(),
                          g.threads, f->format.c_str()));
      };
    });
  }

  // eval
  {
    auto* cmd = app.add_subcommand("eval", "entity-level precision, recall and F1");
    struct Flags {
      std::string pred, pred_layer = "predicted", gold, gold_layer = "gold", out;
    };
    auto f = std::make_shared<Flags>();
    cmd->add_option("--pred", f->pred, "predicted corpus")->required()->check(CLI::ExistingFile);
    cmd->add_option("--pred-layer", f->pred_layer, "prediction layer")->capture_default_str();
    cmd->add_option("--gold", f->gold, "gold corpus")->required()->check(CLI::ExistingFile);
    cmd->add_option("--gold-layer", f->gold_layer, "gold layer")->capture_default_str();
    cmd->add_option("--out", f->out, "write the metrics JSON here instead of stdout");
    cmd->callback([&, f] {
      action = [f] {
        char* result = nullptr;
        Check(ner_eval(f->pred.c_str(), f->pred_layer.c_str(), f->gold.c_str(),
                       f->gold_layer.c_str(), &result));
        Output(f->out, Take(result));
      };
    });
  }

  // bench
  {
    auto* cmd = app.add_subcommand("bench", "decode throughput");
    struct Flags {
      std::string model, in, out;
      int warmup = 1;
      int repeats = 3;
    };
    auto f = std::make_shared<Flags>();
    cmd->add_option("--model", f->model, "model file")->required()->check(CLI::ExistingFile);
    cmd->add_option("--in", f->in, "corpus to decode")->required()->check(CLI::ExistingFile);
    cmd->add_option("--warmup", f->warmup, "untimed passes")->capture_default_str();
    cmd->add_option("--repeats", f->repeats, "timed passes; the fastest is reported")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    cmd->add_option("--out", f->out, "write the report JSON here instead of stdout");
    cmd->callback([&, f] {
      action = [&, f] {
        char* result = nullptr;
        Check(ner_bench(f->model.c_str(), f->in.c_str(), f->warmup, g.threads, f->repeats,
                        &result));
        Output(f->out, Take(result));
      };
    });
  }

  // report
  {
    auto* cmd = app.add_subcommand("report", "compare runs side by side");
    struct Flags {
      std::string runs, out, table;
    };
    auto f = std::make_shared<Flags>();
    cmd->add_option("--runs", f->runs,
                    "JSON Lines of {\"name\",\"precision\",\"recall\",\"f1\","
                    "\"sentences_per_second\"}")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--out", f->out, "write the JSON Lines report here");
    cmd->add_option("--table", f->table, "write the text table here instead of stdout");
    cmd->callback([&, f] {
      action = [f] {
        char* result = nullptr;
        Check(ner_report(ReadText(f->runs).c_str(), &result));
        json r = json::parse(Take(result));
        Output(f->table, r.at("table").get<std::string>());
        if (!f->out.empty()) WriteAtomic(f->out, r.at("jsonl").get<std::string>());
      };
    });
  }

  // pipeline
  {
    auto* cmd = app.add_subcommand("pipeline", "resumable end-to-end workflow");
    cmd->require_subcommand(1);
    struct Flags {
      std::string config, work_dir, stop_after;
    };
    auto f = std::make_shared<Flags>();
    auto config_json = [&, f] {
      json c = LoadConfig(f->config);
      if (!f->work_dir.empty()) c["work_dir"] = f->work_dir;
      if (g.seed) c["seed"] = *g.seed;
      if (app.get_option("--threads")->count() > 0) c["threads"] = g.threads;
      return c.dump();
    };
    auto* run = cmd->add_subcommand("run", "run from the saved state to completion");
    auto* status = cmd->add_subcommand("status", "print the saved state");
    for (auto* sub : {run, status}) {
      sub->add_option("--config", f->config, "JSON pipeline config")->check(CLI::ExistingFile);
      sub->add_option("--work-dir", f->work_dir, "output directory (overrides the config)");
    }
    run->add_option("--stop-after", f->stop_after, "stop once this stage has completed")
        ->check(CLI::IsMember({"outline", "selecting", "correcting", "detail", "distilling"}));
    run->callback([&, f, config_json] {
      action = [f, config_json] {
        char* state = nullptr;
        Check(ner_pipeline_run(config_json().c_str(),
                               f->stop_after.empty() ? nullptr : f->stop_after.c_str(),
                               PrintLog, nullptr, &state));
        std::cout << ojson::parse(Take(state)).dump(2) << '\n';
      };
    });
    status->callback([&, config_json] {
      action = [config_json] {
        char* state = nullptr;
        Check(ner_pipeline_status(config_json().c_str(), &state));
        std::cout << ojson::parse(Take(state)).dump(2) << '\n';
      };
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }
  if (action) action();
  return 0;
}

void ReportFailure(ner_status status, const std::string& message, long line) {
  ojson record = {{"error", ner_status_name(status)},
                  {"code", static_cast<int>(status)},
                  {"line", line},
                  {"message", message}};
  std::cerr << record.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) << '\n';
  std::cerr << "ner: " << ner_status_name(status) << ": " << message << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return Run(argc, argv);
  } catch (const Failure& f) {
    ReportFailure(f.status, f.message, f.line);
    return ExitCodeFor(f.status);
  } catch (const std::exception& e) {
    ReportFailure(NER_E_INTERNAL, e.what(), 0);
    return kExitInternal;
  }
}
