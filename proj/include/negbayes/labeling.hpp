#ifndef NEGBAYES_LABELING_HPP
#define NEGBAYES_LABELING_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "negbayes/corpus.hpp"

namespace negbayes {

struct ClassSet {
  std::vector<std::string> names;

  int k() const { return static_cast<int>(names.size()); }

  // validates: k >= 2, names distinct
  static ClassSet of(std::vector<std::string> names);
  // "c0", "c1", ... for synthetic settings
  static ClassSet numbered(int k);
};

enum class RecordOrigin { S1, S2 };

// A document with partial labels. y_i = 1 marks positive membership in class
// i, z_i = 1 marks negative membership ("not in class i"). Canonical S1
// records have one-hot y and zero z; canonical S2 records have zero y and
// 1 <= sum(z) <= k-1. The struct itself is open: a record may carry both
// labels at once (y_i*z_i = 0 entrywise), which is how repeated or
// contradictory supervision of the same document is represented.
struct LabeledRecord {
  DocVector doc;
  std::vector<uint8_t> y;
  std::vector<uint8_t> z;
  RecordOrigin origin = RecordOrigin::S1;
};

// Throws std::runtime_error if the record violates the per-origin shape
// invariants above (used when loading records from files).
void validate_record(const LabeledRecord& rec, int k, const std::string& where);

// S1 block first, then S2 block; s1_size + s2_size == records.size().
struct PartialDataset {
  ClassSet classes;
  std::vector<LabeledRecord> records;
  size_t s1_size = 0;
  size_t s2_size = 0;

  std::span<const LabeledRecord> s1() const { return {records.data(), s1_size}; }
  std::span<const LabeledRecord> s2() const { return {records.data() + s1_size, s2_size}; }
  std::span<const LabeledRecord> all() const { return records; }
};

// y one-hot at class_index, z zero, origin S1.
LabeledRecord make_s1_record(DocVector doc, int class_index, const ClassSet& classes);

// y zero, z one at each listed class, origin S2. Requires 1 <= |negated| <= k-1,
// indices in range and distinct.
LabeledRecord make_s2_record(DocVector doc, const std::vector<int>& negated, const ClassSet& classes);

// Fractional class membership implied by a negative-label vector:
// (1 - z_i) / (k - sum_{l != i} z_l). Zero at negated classes, 1/(k - sum z)
// elsewhere; the weights over all classes sum to 1.
double l1_weight(const std::vector<uint8_t>& z, int class_index, int k);

// For each input record (one-hot y giving the true class) emit an S2 record
// of the same document negating one class drawn uniformly from the k-1
// classes other than the true one. Record r uses RNG substream (seed, r), so
// output is deterministic and independent of scheduling.
std::vector<LabeledRecord> synthesize_negative_labels(std::span<const LabeledRecord> s1_records,
                                                      uint64_t seed);

struct SplitResult {
  std::vector<LabeledRecord> s1;    // positive-labeled training records
  std::vector<LabeledRecord> s2;    // synthesized negative-labeled training records
  std::vector<LabeledRecord> test;  // held-out records, ground truth kept in y
};

// Stratified split: per class, shuffle with a seed substream, take
// round(train_frac * n_c) documents (clamped to [1, n_c - 1]) for training,
// the rest for test. Within training, round(s1_frac_of_train * n_train) keep
// their positive label; the remainder get synthesized negative labels.
// Throws if any class has fewer than 2 documents.
SplitResult split_dataset(std::span<const DocVector> docs, std::span<const int> labels,
                          const ClassSet& classes, double train_frac, double s1_frac_of_train,
                          uint64_t seed);

}  // namespace negbayes

#endif  // NEGBAYES_LABELING_HPP
