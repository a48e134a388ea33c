#ifndef NEGBAYES_EXPERIMENTS_HPP
#define NEGBAYES_EXPERIMENTS_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "negbayes/classifier.hpp"
#include "negbayes/corpus.hpp"
#include "negbayes/estimators.hpp"
#include "negbayes/labeling.hpp"

namespace negbayes {

// Split presets. Fractions are (train_frac, s1_frac_of_train):
//   fig1_mixed          (0.2, 0.5)  equal positive and negative training halves
//   fig2_negative_only  (0.9, 0.0)  all training labels negative
//   fig3_s1_only        (0.1, 1.0)  all training labels positive
//   fig4_trainset_eval  (0.1, 1.0)  as fig3 but evaluated on the training split
enum class Preset { Fig1Mixed, Fig2NegativeOnly, Fig3S1Only, Fig4TrainsetEval };

std::string preset_name(Preset preset);
Preset preset_from_name(const std::string& name);

struct SplitFractions {
  double train_frac;
  double s1_frac_of_train;
};
SplitFractions preset_fractions(Preset preset);
std::vector<EstimatorTag> preset_default_estimators(Preset preset);
bool preset_evaluates_on_train(Preset preset);

enum class ClassSelection { Top10BySize, All };

struct ExperimentSpec {
  std::string dataset_path;
  CorpusFormat format = CorpusFormat::Jsonl;
  Preset preset = Preset::Fig1Mixed;
  std::vector<uint64_t> seeds = {1, 2, 3, 4, 5};
  double t = 2.0;
  double alpha = 1e-2;
  std::vector<EstimatorTag> estimators;  // empty = preset defaults
  ClassSelection class_selection = ClassSelection::Top10BySize;
  size_t min_count = 1;  // vocabulary pruning threshold
};

struct ExperimentRun {
  EstimatorTag estimator;
  uint64_t seed;
  EvalReport report;
};

struct ExperimentAggregate {
  EstimatorTag estimator;
  double mean_macro = 0.0;
  double std_macro = 0.0;  // population standard deviation over seeds
};

struct ExperimentReport {
  ExperimentSpec config;
  ClassSet classes;
  std::vector<ExperimentRun> runs;  // estimator-major, seeds in config order
  std::vector<ExperimentAggregate> aggregates;
};

// The n classes with most documents, ties toward the lexicographically
// smaller name. Documents outside the kept classes (or without a class) are
// dropped. Throws if fewer than n distinct classes are present.
std::pair<ClassSet, std::vector<RawDocument>> select_top_classes(std::vector<RawDocument> corpus,
                                                                 size_t n);

// Loads the corpus once, builds one vocabulary over the selected documents,
// then per seed: split per preset, synthesize negatives where the preset
// requires, fit each estimator, evaluate on the test split (or the training
// split for fig4_trainset_eval). fig2 rejects NB/SelfCorrect, which need
// positive data, and estimates priors uniformly.
ExperimentReport run_experiment(const ExperimentSpec& spec, int threads = 1);

ExperimentSpec load_experiment_config(const std::string& path);

// CSV: estimator,seed,class,accuracy — one row per (estimator, seed, class),
// a macro row per (estimator, seed), and macro_mean/macro_std summary rows
// per estimator. JSON carries the full report and reproduces the same CSV.
std::string report_csv_string(const ExperimentReport& report);
void export_report_csv(const ExperimentReport& report, const std::string& path);
void export_report_json(const ExperimentReport& report, const std::string& path);
ExperimentReport load_report_json(const std::string& path);

}  // namespace negbayes

#endif  // NEGBAYES_EXPERIMENTS_HPP
