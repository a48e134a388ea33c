#ifndef NEGBAYES_CLASSIFIER_HPP
#define NEGBAYES_CLASSIFIER_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "negbayes/estimators.hpp"
#include "negbayes/labeling.hpp"

namespace negbayes {

// Finite stand-in for log(0): large enough in magnitude to lose every
// comparison, small enough to keep scores serializable.
inline constexpr double kLogZero = -1e308;

struct Prediction {
  std::string doc_id;
  std::vector<double> scores;  // length k, log P(C_i) + sum_j x_j log theta_ij
  int predicted = 0;
  std::optional<int> true_class;
};

struct EvalReport {
  std::vector<double> per_class_accuracy;  // recall per class; NaN if the class is absent
  double macro_accuracy = 0.0;             // mean over present classes
  double micro_accuracy = 0.0;
  std::vector<std::vector<int64_t>> confusion;  // [true][predicted]
  int64_t n_test = 0;
};

// Caches log priors and log theta once so scoring many documents is cheap.
class Scorer {
 public:
  explicit Scorer(const ClassParams& params);

  // If any theta_ij = 0 with x_j > 0 (or prior_i = 0), score_i is exactly
  // kLogZero; otherwise the finite log-score.
  std::vector<double> log_score(const DocVector& doc) const;

  // argmax of log_score, ties broken toward the lowest class index.
  int predict(const DocVector& doc) const;

  int k() const { return k_; }

 private:
  int k_ = 0;
  int v_ = 0;
  std::vector<double> log_priors_;
  Matrix log_theta_;
};

// One-shot conveniences over a temporary Scorer.
std::vector<double> log_score(const DocVector& doc, const ClassParams& params);
int predict(const DocVector& doc, const ClassParams& params);

// Scores every test record (ground truth read from its one-hot y) and tallies
// per-class recall, macro/micro accuracy, and the confusion matrix.
EvalReport evaluate(std::span<const LabeledRecord> test, const ClassParams& params);

}  // namespace negbayes

#endif  // NEGBAYES_CLASSIFIER_HPP
