#include "negbayes/labeling.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

#include "negbayes/rng.hpp"

namespace negbayes {

ClassSet ClassSet::of(std::vector<std::string> names) {
  if (names.size() < 2) throw std::invalid_argument("ClassSet: need at least 2 classes");
  std::unordered_set<std::string> seen;
  for (const auto& name : names) {
    if (!seen.insert(name).second) throw std::invalid_argument("ClassSet: duplicate class name '" + name + "'");
  }
  ClassSet cs;
  cs.names = std::move(names);
  return cs;
}

ClassSet ClassSet::numbered(int k) {
  std::vector<std::string> names;
  names.reserve(k);
  for (int i = 0; i < k; ++i) names.push_back("c" + std::to_string(i));
  return ClassSet::of(std::move(names));
}

namespace {

int vec_sum(const std::vector<uint8_t>& v) {
  int s = 0;
  for (uint8_t b : v) s += b;
  return s;
}

}  // namespace

void validate_record(const LabeledRecord& rec, int k, const std::string& where) {
  auto fail = [&](const std::string& msg) { throw std::runtime_error(where + ": " + msg); };
  if (static_cast<int>(rec.y.size()) != k || static_cast<int>(rec.z.size()) != k) {
    fail("y/z must have length " + std::to_string(k));
  }
  for (int i = 0; i < k; ++i) {
    if (rec.y[i] > 1 || rec.z[i] > 1) fail("y/z entries must be 0 or 1");
    if (rec.y[i] && rec.z[i]) fail("y and z contradict at class " + std::to_string(i));
  }
  int ys = vec_sum(rec.y), zs = vec_sum(rec.z);
  if (rec.origin == RecordOrigin::S1) {
    if (ys != 1) fail("S1 record must have exactly one positive label");
    if (zs != 0) fail("S1 record must have no negative labels");
  } else {
    if (ys != 0) fail("S2 record must have no positive labels");
    if (zs < 1 || zs > k - 1) fail("S2 record must negate between 1 and k-1 classes");
  }
  if (rec.doc.length == 0) fail("record document is empty");
}

LabeledRecord make_s1_record(DocVector doc, int class_index, const ClassSet& classes) {
  int k = classes.k();
  if (class_index < 0 || class_index >= k) {
    throw std::invalid_argument("make_s1_record: class index " + std::to_string(class_index) +
                                " out of range [0, " + std::to_string(k) + ")");
  }
  LabeledRecord rec;
  rec.doc = std::move(doc);
  rec.y.assign(k, 0);
  rec.z.assign(k, 0);
  rec.y[class_index] = 1;
  rec.origin = RecordOrigin::S1;
  return rec;
}

LabeledRecord make_s2_record(DocVector doc, const std::vector<int>& negated, const ClassSet& classes) {
  int k = classes.k();
  if (negated.empty() || static_cast<int>(negated.size()) > k - 1) {
    throw std::invalid_argument("make_s2_record: must negate between 1 and k-1 classes");
  }
  LabeledRecord rec;
  rec.doc = std::move(doc);
  rec.y.assign(k, 0);
  rec.z.assign(k, 0);
  for (int a : negated) {
    if (a < 0 || a >= k) {
      throw std::invalid_argument("make_s2_record: class index " + std::to_string(a) +
                                  " out of range [0, " + std::to_string(k) + ")");
    }
    if (rec.z[a]) throw std::invalid_argument("make_s2_record: class " + std::to_string(a) + " negated twice");
    rec.z[a] = 1;
  }
  rec.origin = RecordOrigin::S2;
  return rec;
}

double l1_weight(const std::vector<uint8_t>& z, int class_index, int k) {
  if (static_cast<int>(z.size()) != k) throw std::invalid_argument("l1_weight: z must have length k");
  if (class_index < 0 || class_index >= k) throw std::invalid_argument("l1_weight: class index out of range");
  if (z[class_index]) return 0.0;
  int others = 0;
  for (int l = 0; l < k; ++l) {
    if (l != class_index) others += z[l];
  }
  return 1.0 / static_cast<double>(k - others);
}

namespace {

int one_hot_index(const std::vector<uint8_t>& y, const char* who) {
  int idx = -1;
  for (size_t i = 0; i < y.size(); ++i) {
    if (y[i]) {
      if (idx >= 0) throw std::invalid_argument(std::string(who) + ": record has multiple positive labels");
      idx = static_cast<int>(i);
    }
  }
  if (idx < 0) throw std::invalid_argument(std::string(who) + ": record has no positive label");
  return idx;
}

}  // namespace

std::vector<LabeledRecord> synthesize_negative_labels(std::span<const LabeledRecord> s1_records,
                                                      uint64_t seed) {
  std::vector<LabeledRecord> out;
  out.reserve(s1_records.size());
  for (size_t r = 0; r < s1_records.size(); ++r) {
    const auto& rec = s1_records[r];
    int k = static_cast<int>(rec.y.size());
    if (k < 2) throw std::invalid_argument("synthesize_negative_labels: need k >= 2");
    int true_class = one_hot_index(rec.y, "synthesize_negative_labels");

    Rng rng(substream_seed(seed, r));
    // uniform over the k-1 classes other than the true one
    int pick = static_cast<int>(rng.below(static_cast<uint64_t>(k - 1)));
    if (pick >= true_class) ++pick;

    LabeledRecord neg;
    neg.doc = rec.doc;
    neg.y.assign(k, 0);
    neg.z.assign(k, 0);
    neg.z[pick] = 1;
    neg.origin = RecordOrigin::S2;
    out.push_back(std::move(neg));
  }
  return out;
}

SplitResult split_dataset(std::span<const DocVector> docs, std::span<const int> labels,
                          const ClassSet& classes, double train_frac, double s1_frac_of_train,
                          uint64_t seed) {
  if (docs.size() != labels.size()) {
    throw std::invalid_argument("split_dataset: docs and labels differ in length");
  }
  if (!(train_frac > 0.0 && train_frac < 1.0)) {
    throw std::invalid_argument("split_dataset: train_frac must be in (0, 1)");
  }
  if (!(s1_frac_of_train >= 0.0 && s1_frac_of_train <= 1.0)) {
    throw std::invalid_argument("split_dataset: s1_frac_of_train must be in [0, 1]");
  }
  int k = classes.k();

  std::vector<std::vector<size_t>> by_class(k);
  for (size_t d = 0; d < docs.size(); ++d) {
    int c = labels[d];
    if (c < 0 || c >= k) {
      throw std::invalid_argument("split_dataset: label " + std::to_string(c) + " out of range for doc '" +
                                  docs[d].doc_id + "'");
    }
    by_class[c].push_back(d);
  }

  SplitResult result;
  std::vector<LabeledRecord> to_negate;  // training records that lose their positive label
  for (int c = 0; c < k; ++c) {
    auto& members = by_class[c];
    if (members.size() < 2) {
      throw std::runtime_error("split_dataset: class '" + classes.names[c] + "' has " +
                               std::to_string(members.size()) + " document(s); need at least 2");
    }
    Rng rng(substream_seed(seed, static_cast<uint64_t>(c)));
    rng.shuffle(members);

    auto n_c = static_cast<long>(members.size());
    long n_train = std::lround(train_frac * static_cast<double>(n_c));
    n_train = std::max(1L, std::min(n_c - 1, n_train));
    long n_s1 = std::lround(s1_frac_of_train * static_cast<double>(n_train));

    for (long p = 0; p < n_c; ++p) {
      LabeledRecord rec = make_s1_record(docs[members[p]], c, classes);
      if (p < n_s1) {
        result.s1.push_back(std::move(rec));
      } else if (p < n_train) {
        to_negate.push_back(std::move(rec));
      } else {
        result.test.push_back(std::move(rec));
      }
    }
  }

  // substreams 0..k-1 drive the per-class shuffles; k seeds the synthesis
  result.s2 = synthesize_negative_labels(to_negate, substream_seed(seed, static_cast<uint64_t>(k)));
  return result;
}

}  // namespace negbayes
