#include "negbayes/estimators.hpp"

#include <cctype>
#include <stdexcept>

namespace negbayes {

std::string estimator_name(EstimatorTag tag) {
  switch (tag) {
    case EstimatorTag::NB: return "NB";
    case EstimatorTag::L1: return "L1";
    case EstimatorTag::L2: return "L2";
    case EstimatorTag::SelfCorrect: return "SelfCorrect";
  }
  throw std::invalid_argument("estimator_name: bad tag");
}

EstimatorTag estimator_from_name(const std::string& name) {
  std::string folded;  // case- and underscore-insensitive: "self_correct" == "SelfCorrect"
  for (char c : name) {
    if (c == '_' || c == '-') continue;
    folded.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  if (folded == "nb") return EstimatorTag::NB;
  if (folded == "l1") return EstimatorTag::L1;
  if (folded == "l2") return EstimatorTag::L2;
  if (folded == "selfcorrect") return EstimatorTag::SelfCorrect;
  throw std::invalid_argument("unknown estimator '" + name + "' (expected NB|L1|L2|SelfCorrect)");
}

Matrix apply_smoothing(const Matrix& numerators, double alpha) {
  if (alpha < 0.0) throw std::invalid_argument("apply_smoothing: alpha must be >= 0");
  int k = numerators.rows, v = numerators.cols;
  Matrix theta(k, v);
  for (int i = 0; i < k; ++i) {
    double row_sum = 0.0;
    for (int j = 0; j < v; ++j) {
      double num = numerators(i, j);
      if (num < 0.0) throw std::invalid_argument("apply_smoothing: negative count at class " + std::to_string(i));
      row_sum += num;
    }
    double denom = row_sum + alpha * static_cast<double>(v);
    if (denom <= 0.0) {
      throw std::runtime_error("class " + std::to_string(i) +
                               " has zero total weighted count and no smoothing (alpha = 0)");
    }
    for (int j = 0; j < v; ++j) theta(i, j) = (numerators(i, j) + alpha) / denom;
  }
  return theta;
}

std::vector<double> estimate_priors(std::span<const LabeledRecord> records, int k, PriorMode mode) {
  if (k < 1) throw std::invalid_argument("estimate_priors: k must be >= 1");
  std::vector<double> priors(k, 0.0);
  if (mode == PriorMode::Uniform) {
    for (auto& p : priors) p = 1.0 / static_cast<double>(k);
    return priors;
  }
  // add-one smoothed class frequencies over positively labeled records
  std::vector<int64_t> counts(k, 0);
  int64_t total = 0;
  for (const auto& rec : records) {
    int idx = -1;
    for (int i = 0; i < k && i < static_cast<int>(rec.y.size()); ++i) {
      if (rec.y[i]) {
        idx = (idx < 0) ? i : -2;
        if (idx == -2) break;
      }
    }
    if (idx >= 0) {
      ++counts[idx];
      ++total;
    }
  }
  if (total == 0) {
    throw std::runtime_error(
        "estimate_priors: no positively labeled records; select uniform priors instead");
  }
  for (int i = 0; i < k; ++i) {
    priors[i] = static_cast<double>(counts[i] + 1) / static_cast<double>(total + k);
  }
  return priors;
}

namespace {

// Core shared by all four estimators: numerators(i, j) += w_i * x_j for each
// record, zero weights skipped. NB and L1 run the identical operation
// sequence over positive records, which is what makes the L1-without-
// negatives reduction to NB exact bit for bit.
void accumulate_record(const LabeledRecord& rec, const std::vector<double>& weights, Matrix& num,
                       int v) {
  int k = num.rows;
  for (int i = 0; i < k; ++i) {
    double w = weights[i];
    if (w == 0.0) continue;
    for (const auto& [j, c] : rec.doc.counts) {
      if (static_cast<int>(j) >= v) {
        throw std::invalid_argument("estimator: term index " + std::to_string(j) +
                                    " out of range for vocabulary size " + std::to_string(v));
      }
      num(i, static_cast<int>(j)) += w * static_cast<double>(c);
    }
  }
}

void check_record_shape(const LabeledRecord& rec, int k, const char* who) {
  if (static_cast<int>(rec.y.size()) != k || static_cast<int>(rec.z.size()) != k) {
    throw std::invalid_argument(std::string(who) + ": record y/z length does not match k = " +
                                std::to_string(k));
  }
}

ClassParams finish(Matrix num, std::span<const LabeledRecord> prior_records, int k, int v,
                   const EstimatorConfig& config, EstimatorTag tag, double t_used) {
  ClassParams params;
  params.k = k;
  params.v = v;
  params.theta = apply_smoothing(num, config.alpha);
  params.priors = estimate_priors(prior_records, k, config.prior_mode);
  params.estimator = tag;
  params.alpha = config.alpha;
  params.t = t_used;
  return params;
}

void require_t_above_one(double t, const char* who) {
  if (!(t > 1.0)) {
    throw std::invalid_argument(std::string(who) + ": t must be > 1, got " + std::to_string(t));
  }
}

}  // namespace

ClassParams estimate_nb(std::span<const LabeledRecord> s1, int k, int v,
                        const EstimatorConfig& config) {
  if (k < 1 || v < 1) throw std::invalid_argument("estimate_nb: need k >= 1 and v >= 1");
  Matrix num(k, v);
  std::vector<double> w(k);
  for (const auto& rec : s1) {
    check_record_shape(rec, k, "estimate_nb");
    for (int i = 0; i < k; ++i) w[i] = static_cast<double>(rec.y[i]);
    accumulate_record(rec, w, num, v);
  }
  return finish(std::move(num), s1, k, v, config, EstimatorTag::NB, 0.0);
}

ClassParams estimate_l1(std::span<const LabeledRecord> s1, std::span<const LabeledRecord> s2, int k,
                        int v, const EstimatorConfig& config) {
  if (k < 1 || v < 1) throw std::invalid_argument("estimate_l1: need k >= 1 and v >= 1");
  Matrix num(k, v);
  std::vector<double> w(k);
  for (const auto& rec : s1) {
    check_record_shape(rec, k, "estimate_l1");
    for (int i = 0; i < k; ++i) w[i] = static_cast<double>(rec.y[i]);
    accumulate_record(rec, w, num, v);
  }
  for (const auto& rec : s2) {
    check_record_shape(rec, k, "estimate_l1");
    for (int i = 0; i < k; ++i) w[i] = l1_weight(rec.z, i, k);
    accumulate_record(rec, w, num, v);
  }
  return finish(std::move(num), s1, k, v, config, EstimatorTag::L1, 0.0);
}

ClassParams estimate_l2(std::span<const LabeledRecord> records, int k, int v,
                        const EstimatorConfig& config) {
  if (k < 1 || v < 1) throw std::invalid_argument("estimate_l2: need k >= 1 and v >= 1");
  require_t_above_one(config.t, "estimate_l2");
  Matrix num(k, v);
  std::vector<double> w(k);
  for (const auto& rec : records) {
    check_record_shape(rec, k, "estimate_l2");
    for (int i = 0; i < k; ++i) {
      w[i] = static_cast<double>(rec.y[i]) + config.t - static_cast<double>(rec.z[i]);
    }
    accumulate_record(rec, w, num, v);
  }
  return finish(std::move(num), records, k, v, config, EstimatorTag::L2, config.t);
}

ClassParams estimate_self_correct(std::span<const LabeledRecord> s1, int k, int v,
                                  const EstimatorConfig& config) {
  if (k < 1 || v < 1) throw std::invalid_argument("estimate_self_correct: need k >= 1 and v >= 1");
  require_t_above_one(config.t, "estimate_self_correct");
  Matrix num(k, v);
  std::vector<double> w(k);
  for (const auto& rec : s1) {
    check_record_shape(rec, k, "estimate_self_correct");
    for (int i = 0; i < k; ++i) {
      w[i] = 2.0 * static_cast<double>(rec.y[i]) + config.t - 1.0;
    }
    accumulate_record(rec, w, num, v);
  }
  return finish(std::move(num), s1, k, v, config, EstimatorTag::SelfCorrect, config.t);
}

ClassParams fit(const PartialDataset& ds, EstimatorTag tag, const EstimatorConfig& config, int v) {
  int k = ds.classes.k();
  switch (tag) {
    case EstimatorTag::NB: return estimate_nb(ds.s1(), k, v, config);
    case EstimatorTag::L1: return estimate_l1(ds.s1(), ds.s2(), k, v, config);
    case EstimatorTag::L2: return estimate_l2(ds.all(), k, v, config);
    case EstimatorTag::SelfCorrect: return estimate_self_correct(ds.s1(), k, v, config);
  }
  throw std::invalid_argument("fit: bad estimator tag");
}

}  // namespace negbayes
