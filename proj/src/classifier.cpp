#include "negbayes/classifier.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace negbayes {

Scorer::Scorer(const ClassParams& params)
    : k_(params.k), v_(params.v), log_priors_(params.k), log_theta_(params.k, params.v) {
  if (k_ < 1 || v_ < 1) throw std::invalid_argument("Scorer: model has no classes or no vocabulary");
  if (static_cast<int>(params.priors.size()) != k_ || params.theta.rows != k_ || params.theta.cols != v_) {
    throw std::invalid_argument("Scorer: model shape mismatch");
  }
  for (int i = 0; i < k_; ++i) {
    double p = params.priors[i];
    log_priors_[i] = p > 0.0 ? std::log(p) : kLogZero;
    for (int j = 0; j < v_; ++j) {
      double th = params.theta(i, j);
      log_theta_(i, j) = th > 0.0 ? std::log(th) : kLogZero;
    }
  }
}

std::vector<double> Scorer::log_score(const DocVector& doc) const {
  std::vector<double> scores(k_);
  for (int i = 0; i < k_; ++i) {
    bool dead = (log_priors_[i] == kLogZero);
    double acc = log_priors_[i];
    for (const auto& [j, c] : doc.counts) {
      if (static_cast<int>(j) >= v_) {
        throw std::invalid_argument("log_score: term index " + std::to_string(j) +
                                    " out of range for vocabulary size " + std::to_string(v_));
      }
      if (dead) continue;
      double lt = log_theta_(i, static_cast<int>(j));
      if (lt == kLogZero) {
        dead = true;
        continue;
      }
      acc += static_cast<double>(c) * lt;
    }
    scores[i] = dead ? kLogZero : acc;
  }
  return scores;
}

int Scorer::predict(const DocVector& doc) const {
  std::vector<double> scores = log_score(doc);
  int best = 0;
  for (int i = 1; i < k_; ++i) {
    if (scores[i] > scores[best]) best = i;  // ties keep the lower index
  }
  return best;
}

std::vector<double> log_score(const DocVector& doc, const ClassParams& params) {
  return Scorer(params).log_score(doc);
}

int predict(const DocVector& doc, const ClassParams& params) {
  return Scorer(params).predict(doc);
}

EvalReport evaluate(std::span<const LabeledRecord> test, const ClassParams& params) {
  if (test.empty()) throw std::invalid_argument("evaluate: empty test set");
  Scorer scorer(params);
  int k = scorer.k();

  EvalReport report;
  report.confusion.assign(k, std::vector<int64_t>(k, 0));
  report.n_test = static_cast<int64_t>(test.size());

  for (const auto& rec : test) {
    if (static_cast<int>(rec.y.size()) != k) {
      throw std::invalid_argument("evaluate: record label length does not match model classes");
    }
    int truth = -1;
    for (int i = 0; i < k; ++i) {
      if (rec.y[i]) {
        if (truth >= 0) throw std::invalid_argument("evaluate: test record has multiple positive labels");
        truth = i;
      }
    }
    if (truth < 0) {
      throw std::invalid_argument("evaluate: test record '" + rec.doc.doc_id + "' has no ground truth");
    }
    int pred = scorer.predict(rec.doc);
    ++report.confusion[truth][pred];
  }

  report.per_class_accuracy.assign(k, std::numeric_limits<double>::quiet_NaN());
  double macro_sum = 0.0;
  int present = 0;
  int64_t correct_total = 0;
  for (int i = 0; i < k; ++i) {
    int64_t row_total = 0;
    for (int j = 0; j < k; ++j) row_total += report.confusion[i][j];
    correct_total += report.confusion[i][i];
    if (row_total > 0) {
      report.per_class_accuracy[i] =
          static_cast<double>(report.confusion[i][i]) / static_cast<double>(row_total);
      macro_sum += report.per_class_accuracy[i];
      ++present;
    }
  }
  report.macro_accuracy = present > 0 ? macro_sum / present : 0.0;
  report.micro_accuracy = static_cast<double>(correct_total) / static_cast<double>(report.n_test);
  return report;
}

}  // namespace negbayes
