#include "negbayes/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "negbayes/io.hpp"
#include "negbayes/parallel.hpp"

namespace negbayes {

using nlohmann::json;

std::string preset_name(Preset preset) {
  switch (preset) {
    case Preset::Fig1Mixed: return "fig1_mixed";
    case Preset::Fig2NegativeOnly: return "fig2_negative_only";
    case Preset::Fig3S1Only: return "fig3_s1_only";
    case Preset::Fig4TrainsetEval: return "fig4_trainset_eval";
  }
  throw std::logic_error("unreachable preset");
}

Preset preset_from_name(const std::string& name) {
  if (name == "fig1_mixed") return Preset::Fig1Mixed;
  if (name == "fig2_negative_only") return Preset::Fig2NegativeOnly;
  if (name == "fig3_s1_only") return Preset::Fig3S1Only;
  if (name == "fig4_trainset_eval") return Preset::Fig4TrainsetEval;
  throw std::invalid_argument("unknown preset '" + name +
                              "' (expected fig1_mixed|fig2_negative_only|fig3_s1_only|"
                              "fig4_trainset_eval)");
}

SplitFractions preset_fractions(Preset preset) {
  switch (preset) {
    case Preset::Fig1Mixed: return {0.2, 0.5};
    case Preset::Fig2NegativeOnly: return {0.9, 0.0};
    case Preset::Fig3S1Only: return {0.1, 1.0};
    case Preset::Fig4TrainsetEval: return {0.1, 1.0};
  }
  throw std::logic_error("unreachable preset");
}

std::vector<EstimatorTag> preset_default_estimators(Preset preset) {
  switch (preset) {
    case Preset::Fig1Mixed: return {EstimatorTag::NB, EstimatorTag::L1, EstimatorTag::L2};
    case Preset::Fig2NegativeOnly: return {EstimatorTag::L1, EstimatorTag::L2};
    case Preset::Fig3S1Only: return {EstimatorTag::NB, EstimatorTag::SelfCorrect};
    case Preset::Fig4TrainsetEval: return {EstimatorTag::NB, EstimatorTag::SelfCorrect};
  }
  throw std::logic_error("unreachable preset");
}

bool preset_evaluates_on_train(Preset preset) { return preset == Preset::Fig4TrainsetEval; }

std::pair<ClassSet, std::vector<RawDocument>> select_top_classes(std::vector<RawDocument> corpus,
                                                                 size_t n) {
  std::map<std::string, int64_t> counts;
  for (const auto& doc : corpus) {
    if (doc.source_class && !doc.source_class->empty()) counts[*doc.source_class] += 1;
  }
  if (counts.size() < n) {
    throw std::runtime_error("corpus has " + std::to_string(counts.size()) +
                             " distinct classes; need " + std::to_string(n));
  }
  std::vector<std::pair<std::string, int64_t>> ranked(counts.begin(), counts.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;  // ties toward the smaller name
  });
  std::vector<std::string> kept_names;
  for (size_t i = 0; i < n; ++i) kept_names.push_back(ranked[i].first);
  std::sort(kept_names.begin(), kept_names.end());
  ClassSet classes = ClassSet::of(kept_names);

  std::vector<RawDocument> kept;
  kept.reserve(corpus.size());
  for (auto& doc : corpus) {
    if (!doc.source_class) continue;
    if (std::find(kept_names.begin(), kept_names.end(), *doc.source_class) == kept_names.end()) {
      continue;
    }
    kept.push_back(std::move(doc));
  }
  return {std::move(classes), std::move(kept)};
}

namespace {

void check_estimators_for_preset(Preset preset, std::span<const EstimatorTag> tags) {
  if (preset != Preset::Fig2NegativeOnly) return;
  for (EstimatorTag tag : tags) {
    if (tag == EstimatorTag::NB || tag == EstimatorTag::SelfCorrect) {
      throw std::invalid_argument(estimator_name(tag) +
                                  " requires positively labeled records; fig2_negative_only "
                                  "provides none");
    }
  }
}

int class_index_of(const ClassSet& classes, const std::string& name) {
  for (int i = 0; i < classes.k(); ++i) {
    if (classes.names[static_cast<size_t>(i)] == name) return i;
  }
  return -1;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentSpec& spec, int threads) {
  if (spec.seeds.empty()) throw std::invalid_argument("experiment: no seeds given");
  std::vector<RawDocument> corpus = load_corpus(spec.dataset_path, spec.format);

  ClassSet classes;
  std::vector<RawDocument> kept;
  if (spec.class_selection == ClassSelection::Top10BySize) {
    std::tie(classes, kept) = select_top_classes(std::move(corpus), 10);
  } else {
    std::map<std::string, int64_t> counts;
    for (const auto& doc : corpus) {
      if (doc.source_class && !doc.source_class->empty()) counts[*doc.source_class] += 1;
    }
    std::vector<std::string> names;
    for (const auto& [name, count] : counts) names.push_back(name);
    classes = ClassSet::of(names);
    for (auto& doc : corpus) {
      if (doc.source_class && counts.count(*doc.source_class)) kept.push_back(std::move(doc));
    }
  }

  std::vector<EstimatorTag> estimators =
      spec.estimators.empty() ? preset_default_estimators(spec.preset) : spec.estimators;
  check_estimators_for_preset(spec.preset, estimators);

  Vocabulary vocab = build_vocabulary(kept, spec.min_count);
  std::vector<DocVector> docs;
  std::vector<int> labels;
  docs.reserve(kept.size());
  labels.reserve(kept.size());
  size_t dropped = 0;
  for (const auto& raw : kept) {
    DocVector vec;
    try {
      vec = vectorize(raw, vocab);  // the only throw is "no in-vocabulary token"
    } catch (const std::runtime_error&) {
      ++dropped;
      continue;
    }
    docs.push_back(std::move(vec));
    labels.push_back(class_index_of(classes, *raw.source_class));
  }
  if (dropped > 0) {
    std::cerr << "note: dropped " << dropped << " documents with no in-vocabulary tokens\n";
  }

  SplitFractions fracs = preset_fractions(spec.preset);
  EstimatorConfig config;
  config.t = spec.t;
  config.alpha = spec.alpha;
  config.prior_mode =
      spec.preset == Preset::Fig2NegativeOnly ? PriorMode::Uniform : PriorMode::FromS1;

  size_t n_seeds = spec.seeds.size();
  std::vector<ExperimentRun> runs(estimators.size() * n_seeds);
  parallel_for(static_cast<int64_t>(n_seeds), threads, [&](int64_t si) {
    uint64_t seed = spec.seeds[static_cast<size_t>(si)];
    SplitResult split = split_dataset(docs, labels, classes, fracs.train_frac,
                                      fracs.s1_frac_of_train, seed);
    PartialDataset ds;
    ds.classes = classes;
    ds.s1_size = split.s1.size();
    ds.s2_size = split.s2.size();
    ds.records = std::move(split.s1);
    ds.records.insert(ds.records.end(), std::make_move_iterator(split.s2.begin()),
                      std::make_move_iterator(split.s2.end()));
    std::span<const LabeledRecord> eval_set =
        preset_evaluates_on_train(spec.preset) ? ds.s1() : std::span<const LabeledRecord>(split.test);
    for (size_t ei = 0; ei < estimators.size(); ++ei) {
      ClassParams params = fit(ds, estimators[ei], config, static_cast<int>(vocab.size()));
      runs[ei * n_seeds + static_cast<size_t>(si)] =
          ExperimentRun{estimators[ei], seed, evaluate(eval_set, params)};
    }
  });

  std::vector<ExperimentAggregate> aggregates;
  for (size_t ei = 0; ei < estimators.size(); ++ei) {
    double mean = 0.0, sq = 0.0;
    for (size_t si = 0; si < n_seeds; ++si) {
      double macro = runs[ei * n_seeds + si].report.macro_accuracy;
      mean += macro;
      sq += macro * macro;
    }
    mean /= static_cast<double>(n_seeds);
    sq /= static_cast<double>(n_seeds);
    aggregates.push_back({estimators[ei], mean, std::sqrt(std::max(0.0, sq - mean * mean))});
  }

  ExperimentReport report;
  report.config = spec;
  report.config.estimators = estimators;  // record the resolved list
  report.classes = classes;
  report.runs = std::move(runs);
  report.aggregates = std::move(aggregates);
  return report;
}

ExperimentSpec load_experiment_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  json j;
  try {
    j = json::parse(buf.str());
  } catch (const json::exception& e) {
    throw std::runtime_error(path + ": invalid JSON: " + e.what());
  }
  ExperimentSpec spec;
  if (!j.contains("dataset") || !j["dataset"].is_string()) {
    throw std::runtime_error(path + ": config needs a \"dataset\" path");
  }
  spec.dataset_path = j["dataset"].get<std::string>();
  std::string format = j.value("format", std::string("jsonl"));
  if (format == "jsonl") {
    spec.format = CorpusFormat::Jsonl;
  } else if (format == "labeled_dirs") {
    spec.format = CorpusFormat::LabeledDirs;
  } else {
    throw std::runtime_error(path + ": format must be \"jsonl\" or \"labeled_dirs\"");
  }
  if (!j.contains("preset") || !j["preset"].is_string()) {
    throw std::runtime_error(path + ": config needs a \"preset\" name");
  }
  spec.preset = preset_from_name(j["preset"].get<std::string>());
  if (j.contains("seeds")) spec.seeds = j["seeds"].get<std::vector<uint64_t>>();
  spec.t = j.value("t", 2.0);
  spec.alpha = j.value("alpha", 1e-2);
  if (j.contains("estimators")) {
    for (const auto& name : j["estimators"]) {
      spec.estimators.push_back(estimator_from_name(name.get<std::string>()));
    }
  }
  std::string selection = j.value("classes", std::string("top10"));
  if (selection == "top10") {
    spec.class_selection = ClassSelection::Top10BySize;
  } else if (selection == "all") {
    spec.class_selection = ClassSelection::All;
  } else {
    throw std::runtime_error(path + ": classes must be \"top10\" or \"all\"");
  }
  spec.min_count = j.value("min_count", size_t{1});
  return spec;
}

std::string report_csv_string(const ExperimentReport& report) {
  std::string out = "estimator,seed,class,accuracy\n";
  auto cell = [](double x) { return std::isnan(x) ? std::string() : format_double(x); };
  for (const auto& run : report.runs) {
    for (int c = 0; c < report.classes.k(); ++c) {
      out += estimator_name(run.estimator) + "," + std::to_string(run.seed) + "," +
             report.classes.names[static_cast<size_t>(c)] + "," +
             cell(run.report.per_class_accuracy[static_cast<size_t>(c)]) + "\n";
    }
    out += estimator_name(run.estimator) + "," + std::to_string(run.seed) + ",macro," +
           format_double(run.report.macro_accuracy) + "\n";
  }
  for (const auto& agg : report.aggregates) {
    out += estimator_name(agg.estimator) + ",,macro_mean," + format_double(agg.mean_macro) + "\n";
    out += estimator_name(agg.estimator) + ",,macro_std," + format_double(agg.std_macro) + "\n";
  }
  return out;
}

void export_report_csv(const ExperimentReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << report_csv_string(report);
  out.flush();
  if (!out) throw std::runtime_error("write failed for " + path);
}

namespace {

json report_to_json(const EvalReport& report) {
  json per_class = json::array();
  for (double acc : report.per_class_accuracy) {
    if (std::isnan(acc)) {
      per_class.push_back(nullptr);
    } else {
      per_class.push_back(acc);
    }
  }
  json confusion = json::array();
  for (const auto& row : report.confusion) confusion.push_back(row);
  return json{{"n_test", report.n_test},
              {"macro", report.macro_accuracy},
              {"micro", report.micro_accuracy},
              {"per_class", per_class},
              {"confusion", confusion}};
}

EvalReport report_from_json(const json& j, const std::string& where) {
  EvalReport report;
  report.n_test = j.at("n_test").get<int64_t>();
  report.macro_accuracy = j.at("macro").get<double>();
  report.micro_accuracy = j.at("micro").get<double>();
  for (const auto& cell : j.at("per_class")) {
    report.per_class_accuracy.push_back(cell.is_null() ? std::nan("")
                                                       : cell.get<double>());
  }
  for (const auto& row : j.at("confusion")) {
    report.confusion.push_back(row.get<std::vector<int64_t>>());
  }
  size_t k = report.per_class_accuracy.size();
  if (report.confusion.size() != k) throw std::runtime_error(where + ": confusion shape mismatch");
  for (const auto& row : report.confusion) {
    if (row.size() != k) throw std::runtime_error(where + ": confusion shape mismatch");
  }
  return report;
}

}  // namespace

void export_report_json(const ExperimentReport& report, const std::string& path) {
  json runs = json::array();
  for (const auto& run : report.runs) {
    runs.push_back(json{{"estimator", estimator_name(run.estimator)},
                        {"seed", run.seed},
                        {"report", report_to_json(run.report)}});
  }
  json aggregates = json::array();
  for (const auto& agg : report.aggregates) {
    aggregates.push_back(json{{"estimator", estimator_name(agg.estimator)},
                              {"macro_mean", agg.mean_macro},
                              {"macro_std", agg.std_macro}});
  }
  std::vector<std::string> estimator_names;
  for (EstimatorTag tag : report.config.estimators) estimator_names.push_back(estimator_name(tag));
  json doc{{"dataset", report.config.dataset_path},
           {"format", report.config.format == CorpusFormat::Jsonl ? "jsonl" : "labeled_dirs"},
           {"preset", preset_name(report.config.preset)},
           {"seeds", report.config.seeds},
           {"t", report.config.t},
           {"alpha", report.config.alpha},
           {"estimators", estimator_names},
           {"classes_selection",
            report.config.class_selection == ClassSelection::Top10BySize ? "top10" : "all"},
           {"min_count", report.config.min_count},
           {"classes", report.classes.names},
           {"runs", runs},
           {"aggregates", aggregates}};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << doc.dump(2) << "\n";
  out.flush();
  if (!out) throw std::runtime_error("write failed for " + path);
}

ExperimentReport load_report_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  json j;
  try {
    j = json::parse(buf.str());
  } catch (const json::exception& e) {
    throw std::runtime_error(path + ": invalid JSON: " + e.what());
  }
  try {
    ExperimentReport report;
    report.config.dataset_path = j.at("dataset").get<std::string>();
    report.config.format = j.at("format").get<std::string>() == "jsonl" ? CorpusFormat::Jsonl
                                                                        : CorpusFormat::LabeledDirs;
    report.config.preset = preset_from_name(j.at("preset").get<std::string>());
    report.config.seeds = j.at("seeds").get<std::vector<uint64_t>>();
    report.config.t = j.at("t").get<double>();
    report.config.alpha = j.at("alpha").get<double>();
    for (const auto& name : j.at("estimators")) {
      report.config.estimators.push_back(estimator_from_name(name.get<std::string>()));
    }
    report.config.class_selection = j.at("classes_selection").get<std::string>() == "top10"
                                        ? ClassSelection::Top10BySize
                                        : ClassSelection::All;
    report.config.min_count = j.at("min_count").get<size_t>();
    report.classes = ClassSet::of(j.at("classes").get<std::vector<std::string>>());
    for (const auto& run : j.at("runs")) {
      report.runs.push_back(ExperimentRun{estimator_from_name(run.at("estimator").get<std::string>()),
                                          run.at("seed").get<uint64_t>(),
                                          report_from_json(run.at("report"), path)});
    }
    for (const auto& agg : j.at("aggregates")) {
      report.aggregates.push_back(
          ExperimentAggregate{estimator_from_name(agg.at("estimator").get<std::string>()),
                              agg.at("macro_mean").get<double>(), agg.at("macro_std").get<double>()});
    }
    return report;
  } catch (const json::exception& e) {
    throw std::runtime_error(path + ": malformed report: " + e.what());
  }
}

}  // namespace negbayes
