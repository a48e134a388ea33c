// Command-line front end: ingest | train | predict | evaluate | experiment |
// verify-theory. Exit codes: 0 success, 1 domain error, 2 usage error.

#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "negbayes/classifier.hpp"
#include "negbayes/corpus.hpp"
#include "negbayes/estimators.hpp"
#include "negbayes/experiments.hpp"
#include "negbayes/io.hpp"
#include "negbayes/labeling.hpp"
#include "negbayes/parallel.hpp"
#include "negbayes/theory.hpp"

namespace {

using namespace negbayes;
using nlohmann::json;

CorpusFormat parse_format(const std::string& name) {
  if (name == "jsonl") return CorpusFormat::Jsonl;
  if (name == "labeled_dirs") return CorpusFormat::LabeledDirs;
  throw std::invalid_argument("unknown format '" + name + "' (expected jsonl|labeled_dirs)");
}

// Every randomized artifact gets a sidecar recording what produced it.
void write_meta(const std::string& artifact_path, const json& meta) {
  std::string path = artifact_path + ".meta.json";
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << meta.dump(2) << "\n";
  out.flush();
  if (!out) throw std::runtime_error("write failed for " + path);
}

struct IngestArgs {
  std::string input;
  std::string output;
  std::string format = "jsonl";
  size_t min_count = 1;
};

int cmd_ingest(const IngestArgs& args) {
  std::vector<RawDocument> docs = load_corpus(args.input, parse_format(args.format));
  Vocabulary vocab = build_vocabulary(docs, args.min_count);

  std::map<std::string, int> class_index;
  for (const auto& doc : docs) {
    if (doc.source_class && !doc.source_class->empty()) class_index[*doc.source_class] = 0;
  }
  CorpusBundle bundle;
  for (auto& [name, idx] : class_index) {
    idx = static_cast<int>(bundle.class_names.size());
    bundle.class_names.push_back(name);
  }
  bundle.vocab = std::move(vocab);

  size_t dropped = 0;
  for (const auto& doc : docs) {
    DocVector vec;
    try {
      vec = vectorize(doc, bundle.vocab);  // the only throw is "no in-vocabulary token"
    } catch (const std::runtime_error&) {
      ++dropped;
      continue;
    }
    bundle.docs.push_back(std::move(vec));
    bool labeled = doc.source_class && !doc.source_class->empty();
    bundle.labels.push_back(labeled ? class_index.at(*doc.source_class) : -1);
  }
  save_bundle(bundle, args.output);
  std::cerr << "ingested " << bundle.docs.size() << " documents";
  if (dropped > 0) std::cerr << " (dropped " << dropped << " with no in-vocabulary tokens)";
  std::cerr << ", vocabulary " << bundle.vocab.size() << " terms, " << bundle.class_names.size()
            << " classes -> " << args.output << "\n";
  return 0;
}

struct TrainArgs {
  std::string dataset;
  std::string output;
  std::string estimator;
  double t = 2.0;
  double alpha = 1e-2;
  std::string priors = "from_s1";
};

int cmd_train(const TrainArgs& args) {
  EstimatorTag tag = estimator_from_name(args.estimator);
  LoadedDataset loaded = load_partial_dataset(args.dataset);
  if (!loaded.vocab) {
    throw std::runtime_error(args.dataset +
                             ": dataset carries no vocabulary; export it with one to train");
  }
  EstimatorConfig config;
  config.t = args.t;
  config.alpha = args.alpha;
  if (args.priors == "from_s1") {
    config.prior_mode = PriorMode::FromS1;
  } else if (args.priors == "uniform") {
    config.prior_mode = PriorMode::Uniform;
  } else {
    throw std::invalid_argument("unknown priors mode '" + args.priors +
                                "' (expected from_s1|uniform)");
  }
  const PartialDataset& ds = loaded.dataset;
  ClassParams params = fit(ds, tag, config, static_cast<int>(loaded.vocab->size()));
  save_model(ModelFile{ds.classes, *loaded.vocab, params}, args.output);
  std::cerr << "trained " << estimator_name(tag) << " on |S1|=" << ds.s1_size
            << ", |S2|=" << ds.s2_size << " -> " << args.output << "\n";
  return 0;
}

struct PredictArgs {
  std::string model;
  std::string input;
  std::string output;
  int threads = 1;
};

int cmd_predict(const PredictArgs& args) {
  ModelFile model = load_model(args.model);
  CorpusBundle bundle = load_bundle(args.input);
  if (vocab_hash(model.vocab) != vocab_hash(bundle.vocab)) {
    throw std::runtime_error("vocabulary mismatch: model " + vocab_hash_hex(model.vocab) +
                             " vs input " + vocab_hash_hex(bundle.vocab));
  }
  // bundle labels are carried through by name; classes the model does not know
  // stay unlabeled in the output
  std::vector<int> to_model(bundle.class_names.size(), -1);
  for (size_t c = 0; c < bundle.class_names.size(); ++c) {
    for (int mc = 0; mc < model.classes.k(); ++mc) {
      if (model.classes.names[static_cast<size_t>(mc)] == bundle.class_names[c]) {
        to_model[c] = mc;
        break;
      }
    }
  }

  Scorer scorer(model.params);
  std::vector<Prediction> preds(bundle.docs.size());
  parallel_for(static_cast<int64_t>(bundle.docs.size()), args.threads, [&](int64_t i) {
    auto idx = static_cast<size_t>(i);
    Prediction& pred = preds[idx];
    pred.doc_id = bundle.docs[idx].doc_id;
    pred.scores = scorer.log_score(bundle.docs[idx]);
    pred.predicted = scorer.predict(bundle.docs[idx]);
    int label = bundle.labels[idx];
    if (label >= 0 && to_model[static_cast<size_t>(label)] >= 0) {
      pred.true_class = to_model[static_cast<size_t>(label)];
    }
  });
  save_predictions(preds, model.classes, args.output);
  std::cerr << "predicted " << preds.size() << " documents -> " << args.output << "\n";
  return 0;
}

struct EvaluateArgs {
  std::string model;
  std::string input;
  std::string json_out;
  std::string csv_out;
};

int cmd_evaluate(const EvaluateArgs& args) {
  ModelFile model = load_model(args.model);
  CorpusBundle bundle = load_bundle(args.input);
  if (vocab_hash(model.vocab) != vocab_hash(bundle.vocab)) {
    throw std::runtime_error("vocabulary mismatch: model " + vocab_hash_hex(model.vocab) +
                             " vs input " + vocab_hash_hex(bundle.vocab));
  }
  std::vector<LabeledRecord> test;
  for (size_t i = 0; i < bundle.docs.size(); ++i) {
    int label = bundle.labels[i];
    if (label < 0) continue;
    const std::string& name = bundle.class_names[static_cast<size_t>(label)];
    int model_idx = -1;
    for (int mc = 0; mc < model.classes.k(); ++mc) {
      if (model.classes.names[static_cast<size_t>(mc)] == name) {
        model_idx = mc;
        break;
      }
    }
    if (model_idx < 0) {
      throw std::runtime_error("test class '" + name + "' is not a model class");
    }
    test.push_back(make_s1_record(bundle.docs[i], model_idx, model.classes));
  }
  if (test.empty()) throw std::runtime_error(args.input + ": no labeled documents to evaluate");

  EvalReport report = evaluate(test, model.params);
  if (!args.json_out.empty()) save_eval_report_json(report, model.classes, args.json_out);
  if (!args.csv_out.empty()) save_eval_report_csv(report, model.classes, args.csv_out);
  std::cout << "macro accuracy = " << format_double(report.macro_accuracy) << "\n";
  std::cout << "micro accuracy = " << format_double(report.micro_accuracy) << "\n";
  return 0;
}

struct ExperimentArgs {
  std::string config;
  std::string csv_out;
  std::string json_out;
  std::vector<uint64_t> seeds;
  std::vector<std::string> estimators;
  std::string dataset;
  std::string format;
  std::string preset;
  std::string classes;
  std::optional<double> t;
  std::optional<double> alpha;
  std::optional<size_t> min_count;
  int threads = 1;
};

int cmd_experiment(const ExperimentArgs& args) {
  ExperimentSpec spec = load_experiment_config(args.config);
  if (!args.dataset.empty()) spec.dataset_path = args.dataset;
  if (!args.format.empty()) spec.format = parse_format(args.format);
  if (!args.preset.empty()) spec.preset = preset_from_name(args.preset);
  if (!args.seeds.empty()) spec.seeds = args.seeds;
  if (args.t) spec.t = *args.t;
  if (args.alpha) spec.alpha = *args.alpha;
  if (!args.estimators.empty()) {
    spec.estimators.clear();
    for (const auto& name : args.estimators) spec.estimators.push_back(estimator_from_name(name));
  }
  if (!args.classes.empty()) {
    if (args.classes == "top10") {
      spec.class_selection = ClassSelection::Top10BySize;
    } else if (args.classes == "all") {
      spec.class_selection = ClassSelection::All;
    } else {
      throw std::invalid_argument("unknown class selection '" + args.classes +
                                  "' (expected top10|all)");
    }
  }
  if (args.min_count) spec.min_count = *args.min_count;

  ExperimentReport report = run_experiment(spec, args.threads);
  if (!args.csv_out.empty()) {
    export_report_csv(report, args.csv_out);
    write_meta(args.csv_out, json{{"command", "experiment"},
                                  {"dataset", spec.dataset_path},
                                  {"preset", preset_name(spec.preset)},
                                  {"seeds", spec.seeds},
                                  {"t", spec.t},
                                  {"alpha", spec.alpha}});
  }
  if (!args.json_out.empty()) export_report_json(report, args.json_out);
  for (const auto& agg : report.aggregates) {
    std::cout << estimator_name(agg.estimator) << ": macro mean = " << format_double(agg.mean_macro)
              << " (std " << format_double(agg.std_macro) << ") over " << spec.seeds.size()
              << " seeds\n";
  }
  return 0;
}

struct VerifyArgs {
  std::string config;
  std::string csv_out;
  int64_t trials = 10000;
  uint64_t seed = 1;
  int threads = 1;
};

int cmd_verify_theory(const VerifyArgs& args) {
  TheoryCheckConfig config = load_theory_config(args.config);
  TheoryRun run = run_theory_check(config, args.trials, args.seed, args.threads);
  if (!args.csv_out.empty()) {
    write_study_csv(run.rows, args.csv_out);
    write_meta(args.csv_out, json{{"command", "verify-theory"},
                                  {"config", args.config},
                                  {"check", config.check},
                                  {"trials", args.trials},
                                  {"seed", args.seed}});
  }
  for (const auto& check : run.checks) {
    std::cout << (check.pass ? "PASS " : "FAIL ") << check.name << ": " << check.detail << "\n";
  }
  if (args.csv_out.empty()) std::cout << "\n" << study_csv_string(run.rows);
  return run.all_pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"partially supervised naive Bayes: estimators, experiments, and "
               "closed-form verification"};
  app.require_subcommand(1);
  app.fallthrough();
  int threads = 1;
  app.add_option("--threads", threads, "worker thread cap; results do not depend on it")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  IngestArgs ingest;
  auto* cmd_i = app.add_subcommand("ingest", "tokenize a corpus and write a vectorized bundle");
  cmd_i->add_option("input", ingest.input, "corpus path (jsonl file or labeled_dirs root)")
      ->required();
  cmd_i->add_option("output", ingest.output, "bundle output path")->required();
  cmd_i->add_option("--format", ingest.format, "corpus format")
      ->check(CLI::IsMember({"jsonl", "labeled_dirs"}))
      ->capture_default_str();
  cmd_i->add_option("--min-count", ingest.min_count, "keep terms occurring at least this often")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  TrainArgs train;
  auto* cmd_t = app.add_subcommand("train", "fit an estimator on a partially labeled dataset");
  cmd_t->add_option("dataset", train.dataset, "partial-label dataset path")->required();
  cmd_t->add_option("output", train.output, "model output path")->required();
  cmd_t->add_option("--estimator", train.estimator, "NB|L1|L2|SelfCorrect")->required();
  cmd_t->add_option("--t", train.t, "repetition weight for L2/SelfCorrect (must be > 1)")
      ->capture_default_str();
  cmd_t->add_option("--alpha", train.alpha, "additive smoothing")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  cmd_t->add_option("--priors", train.priors, "class prior mode")
      ->check(CLI::IsMember({"from_s1", "uniform"}))
      ->capture_default_str();

  PredictArgs predict;
  auto* cmd_p = app.add_subcommand("predict", "score a vectorized bundle with a trained model");
  cmd_p->add_option("model", predict.model, "model path")->required();
  cmd_p->add_option("input", predict.input, "bundle path")->required();
  cmd_p->add_option("output", predict.output, "predictions output path (jsonl)")->required();

  EvaluateArgs evaluate;
  auto* cmd_e = app.add_subcommand("evaluate", "evaluate a trained model on a labeled bundle");
  cmd_e->add_option("model", evaluate.model, "model path")->required();
  cmd_e->add_option("input", evaluate.input, "labeled bundle path")->required();
  cmd_e->add_option("--json", evaluate.json_out, "write the full report as JSON");
  cmd_e->add_option("--csv", evaluate.csv_out, "write per-class rows as CSV");

  ExperimentArgs experiment;
  auto* cmd_x = app.add_subcommand("experiment", "run a split/estimator preset over seeds");
  cmd_x->add_option("config", experiment.config, "experiment config (JSON)")->required();
  cmd_x->add_option("--csv", experiment.csv_out, "write per-run accuracies as CSV");
  cmd_x->add_option("--json", experiment.json_out, "write the full report as JSON");
  cmd_x->add_option("--dataset", experiment.dataset, "override the config's dataset path");
  cmd_x->add_option("--format", experiment.format, "override the config's corpus format")
      ->check(CLI::IsMember({"jsonl", "labeled_dirs"}));
  cmd_x->add_option("--preset", experiment.preset,
                    "fig1_mixed|fig2_negative_only|fig3_s1_only|fig4_trainset_eval");
  cmd_x->add_option("--seeds", experiment.seeds, "override the config's seed list")
      ->delimiter(',');
  cmd_x->add_option("--estimators", experiment.estimators, "override the estimator list")
      ->delimiter(',');
  cmd_x->add_option("--classes", experiment.classes, "class selection: top10|all");
  cmd_x->add_option("--t", experiment.t, "repetition weight (default 2)");
  cmd_x->add_option("--alpha", experiment.alpha, "additive smoothing (default 0.01)")
      ->check(CLI::NonNegativeNumber);
  cmd_x->add_option("--min-count", experiment.min_count, "vocabulary pruning threshold")
      ->check(CLI::PositiveNumber);

  VerifyArgs verify;
  auto* cmd_v = app.add_subcommand("verify-theory",
                                   "compare Monte Carlo estimator moments to their closed forms");
  cmd_v->add_option("config", verify.config, "check config (JSON)")->required();
  cmd_v->add_option("csv", verify.csv_out, "per-estimator statistics CSV output path");
  cmd_v->add_option("--trials", verify.trials, "Monte Carlo trials (must be >= 2)")
      ->capture_default_str();
  cmd_v->add_option("--seed", verify.seed, "master seed; reruns are byte-identical")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (cmd_i->parsed()) return cmd_ingest(ingest);
    if (cmd_t->parsed()) return cmd_train(train);
    if (cmd_p->parsed()) {
      predict.threads = threads;
      return cmd_predict(predict);
    }
    if (cmd_e->parsed()) return cmd_evaluate(evaluate);
    if (cmd_x->parsed()) {
      experiment.threads = threads;
      return cmd_experiment(experiment);
    }
    if (cmd_v->parsed()) {
      verify.threads = threads;
      return cmd_verify_theory(verify);
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;  // unreachable: require_subcommand(1)
}
