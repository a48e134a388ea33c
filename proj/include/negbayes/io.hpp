#ifndef NEGBAYES_IO_HPP
#define NEGBAYES_IO_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "negbayes/classifier.hpp"
#include "negbayes/corpus.hpp"
#include "negbayes/estimators.hpp"
#include "negbayes/labeling.hpp"

namespace negbayes {

// %.17g: up to 17 significant digits, enough to round-trip any double exactly.
std::string format_double(double x);

// FNV-1a over the newline-joined terms; used to detect model/corpus
// vocabulary mismatches.
uint64_t vocab_hash(const Vocabulary& vocab);
std::string vocab_hash_hex(const Vocabulary& vocab);

// ---- model file: single JSON object ----------------------------------------
// {"classes":[...], "vocab":[...], "estimator":"NB|L1|L2|SelfCorrect",
//  "t":..., "alpha":..., "priors":[...], "theta":[[...],...]}

struct ModelFile {
  ClassSet classes;
  Vocabulary vocab;
  ClassParams params;
};

void save_model(const ModelFile& model, const std::string& path);
ModelFile load_model(const std::string& path);

// ---- vectorized corpus bundle: JSONL ----------------------------------------
// line 1 header {"classes":[...], "vocab":[...]}; then one record per line
// {"id":..., "counts":{"<term index>":count,...}, "class":...} ("class" optional).

struct CorpusBundle {
  std::vector<std::string> class_names;  // may be empty when the corpus is unlabeled
  Vocabulary vocab;
  std::vector<DocVector> docs;
  std::vector<int> labels;  // parallel to docs; -1 = unlabeled
};

void save_bundle(const CorpusBundle& bundle, const std::string& path);
CorpusBundle load_bundle(const std::string& path);

// ---- partial-label dataset: JSONL -------------------------------------------
// line 1 header {"classes":[...]} (plus "vocab" when available, which training
// needs to emit a complete model); then one record per line
// {"id":..., "counts":{...} or "text":..., "y":[...], "z":[...], "origin":"S1"|"S2"}.

struct LoadedDataset {
  PartialDataset dataset;  // records normalized to S1-block-then-S2-block order
  std::optional<Vocabulary> vocab;
};

void save_partial_dataset(const PartialDataset& ds, const Vocabulary& vocab,
                          const std::string& path);
LoadedDataset load_partial_dataset(const std::string& path);

// ---- prediction / evaluation output -----------------------------------------

// JSONL: {"id":..., "true":name-or-null, "pred":name, "scores":[...]}
void save_predictions(const std::vector<Prediction>& preds, const ClassSet& classes,
                      const std::string& path);

void save_eval_report_json(const EvalReport& report, const ClassSet& classes,
                           const std::string& path);
// one row per class (class,n,correct,accuracy) plus macro/micro summary rows
void save_eval_report_csv(const EvalReport& report, const ClassSet& classes,
                          const std::string& path);

}  // namespace negbayes

#endif  // NEGBAYES_IO_HPP
