#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "negbayes/labeling.hpp"

using namespace negbayes;

namespace {

DocVector doc_of(const std::string& id, uint32_t count = 3) {
  DocVector doc;
  doc.doc_id = id;
  doc.counts = {{0, count}};
  doc.length = count;
  return doc;
}

}  // namespace

TEST_CASE("class sets validate their names") {
  CHECK(ClassSet::of({"a", "b"}).k() == 2);
  CHECK_THROWS_AS(ClassSet::of({"only"}), std::invalid_argument);
  CHECK_THROWS_AS(ClassSet::of({"a", "a"}), std::invalid_argument);
  ClassSet numbered = ClassSet::numbered(3);
  CHECK(numbered.names == std::vector<std::string>{"c0", "c1", "c2"});
}

TEST_CASE("make_s1_record sets a one-hot positive label") {
  ClassSet classes = ClassSet::numbered(3);
  LabeledRecord rec = make_s1_record(doc_of("d"), 0, classes);
  CHECK(rec.y == std::vector<uint8_t>{1, 0, 0});
  CHECK(rec.z == std::vector<uint8_t>{0, 0, 0});
  CHECK(rec.origin == RecordOrigin::S1);

  rec = make_s1_record(doc_of("d"), 2, classes);
  CHECK(rec.y == std::vector<uint8_t>{0, 0, 1});

  CHECK_THROWS_AS(make_s1_record(doc_of("d"), 5, classes), std::invalid_argument);
  CHECK_THROWS_AS(make_s1_record(doc_of("d"), -1, classes), std::invalid_argument);
}

TEST_CASE("make_s2_record sets negative labels only") {
  ClassSet classes = ClassSet::numbered(3);
  LabeledRecord rec = make_s2_record(doc_of("d"), {1}, classes);
  CHECK(rec.y == std::vector<uint8_t>{0, 0, 0});
  CHECK(rec.z == std::vector<uint8_t>{0, 1, 0});
  CHECK(rec.origin == RecordOrigin::S2);

  rec = make_s2_record(doc_of("d"), {0, 2}, classes);
  CHECK(rec.z == std::vector<uint8_t>{1, 0, 1});

  CHECK_THROWS_AS(make_s2_record(doc_of("d"), {}, classes), std::invalid_argument);
  CHECK_THROWS_AS(make_s2_record(doc_of("d"), {0, 1, 2}, classes), std::invalid_argument);
  CHECK_THROWS_AS(make_s2_record(doc_of("d"), {1, 1}, classes), std::invalid_argument);
  CHECK_THROWS_AS(make_s2_record(doc_of("d"), {3}, classes), std::invalid_argument);
}

TEST_CASE("validate_record enforces the per-origin shape") {
  ClassSet classes = ClassSet::numbered(3);
  LabeledRecord rec = make_s1_record(doc_of("d"), 1, classes);
  CHECK_NOTHROW(validate_record(rec, 3, "here"));

  SUBCASE("wrong label length") { CHECK_THROWS(validate_record(rec, 4, "here")); }
  SUBCASE("S1 needs exactly one positive") {
    rec.y[2] = 1;
    CHECK_THROWS(validate_record(rec, 3, "here"));
  }
  SUBCASE("overlapping positive and negative is contradictory") {
    rec.z[1] = 1;
    CHECK_THROWS(validate_record(rec, 3, "here"));
  }
  SUBCASE("S2 must negate between 1 and k-1 classes") {
    LabeledRecord s2 = make_s2_record(doc_of("d"), {0}, classes);
    s2.z = {1, 1, 1};
    CHECK_THROWS(validate_record(s2, 3, "here"));
    s2.z = {0, 0, 0};
    CHECK_THROWS(validate_record(s2, 3, "here"));
  }
  SUBCASE("empty document rejected") {
    rec.doc.counts.clear();
    rec.doc.length = 0;
    CHECK_THROWS(validate_record(rec, 3, "here"));
  }
}

TEST_CASE("l1_weight spreads membership over non-negated classes") {
  CHECK(l1_weight({1, 0}, 0, 2) == 0.0);
  CHECK(l1_weight({1, 0}, 1, 2) == 1.0);
  std::vector<uint8_t> z10(10, 0);
  z10[0] = 1;
  CHECK(l1_weight(z10, 3, 10) == doctest::Approx(1.0 / 9.0).epsilon(1e-15));
}

TEST_CASE("l1_weight sums to one for single-negative records") {
  std::vector<uint8_t> z(7, 0);
  z[4] = 1;
  double sum = 0.0;
  for (int i = 0; i < 7; ++i) {
    double w = l1_weight(z, i, 7);
    if (i == 4) {
      CHECK(w == 0.0);
    } else {
      CHECK(w == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
    }
    sum += w;
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("l1_weight sums to one for multi-negative records") {
  std::vector<uint8_t> z{1, 0, 1, 0, 0};
  double sum = 0.0;
  for (int i = 0; i < 5; ++i) sum += l1_weight(z, i, 5);
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(l1_weight(z, 1, 5) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("synthesize_negative_labels forced choice at k=2") {
  ClassSet classes = ClassSet::numbered(2);
  std::vector<LabeledRecord> s1;
  for (int r = 0; r < 20; ++r) s1.push_back(make_s1_record(doc_of("d" + std::to_string(r)), 0, classes));
  auto s2 = synthesize_negative_labels(s1, 99);
  REQUIRE(s2.size() == s1.size());
  for (const auto& rec : s2) {
    CHECK(rec.z == std::vector<uint8_t>{0, 1});
    CHECK(rec.origin == RecordOrigin::S2);
  }
}

TEST_CASE("synthesize_negative_labels picks uniformly among the other classes") {
  // chi-square goodness of fit over 9 cells (k=10, true class 1):
  // critical value at df=8, p=0.001 is 26.124
  const int kDraws = 9000;
  ClassSet classes = ClassSet::numbered(10);
  std::vector<LabeledRecord> s1;
  s1.reserve(kDraws);
  for (int r = 0; r < kDraws; ++r) {
    s1.push_back(make_s1_record(doc_of("d" + std::to_string(r)), 1, classes));
  }
  auto s2 = synthesize_negative_labels(s1, 2024);
  std::vector<int> counts(10, 0);
  for (const auto& rec : s2) {
    int negated = -1;
    for (int i = 0; i < 10; ++i) {
      if (rec.z[static_cast<size_t>(i)]) {
        REQUIRE(negated == -1);
        negated = i;
      }
    }
    REQUIRE(negated >= 0);
    counts[static_cast<size_t>(negated)] += 1;
  }
  CHECK(counts[1] == 0);  // never the true class
  double expected = kDraws / 9.0;
  double chi2 = 0.0;
  for (int i = 0; i < 10; ++i) {
    if (i == 1) continue;
    double dev = counts[static_cast<size_t>(i)] - expected;
    chi2 += dev * dev / expected;
  }
  CHECK(chi2 < 26.124);
}

TEST_CASE("synthesize_negative_labels is deterministic given the seed") {
  ClassSet classes = ClassSet::numbered(5);
  std::vector<LabeledRecord> s1;
  for (int r = 0; r < 50; ++r) s1.push_back(make_s1_record(doc_of("d" + std::to_string(r)), r % 5, classes));
  auto a = synthesize_negative_labels(s1, 7);
  auto b = synthesize_negative_labels(s1, 7);
  auto c = synthesize_negative_labels(s1, 8);
  REQUIRE(a.size() == b.size());
  bool all_same = true, any_diff_seed = false;
  for (size_t r = 0; r < a.size(); ++r) {
    all_same = all_same && a[r].z == b[r].z;
    any_diff_seed = any_diff_seed || a[r].z != c[r].z;
  }
  CHECK(all_same);
  CHECK(any_diff_seed);
}

namespace {

struct SplitFixture {
  ClassSet classes = ClassSet::of({"alpha", "beta"});
  std::vector<DocVector> docs;
  std::vector<int> labels;

  SplitFixture() {
    for (int i = 0; i < 10; ++i) {
      docs.push_back(doc_of("a" + std::to_string(i)));
      labels.push_back(0);
    }
    for (int i = 0; i < 6; ++i) {
      docs.push_back(doc_of("b" + std::to_string(i)));
      labels.push_back(1);
    }
  }
};

}  // namespace

TEST_CASE("split_dataset partitions the corpus without overlap") {
  SplitFixture fx;
  SplitResult split = split_dataset(fx.docs, fx.labels, fx.classes, 0.5, 0.5, 3);

  std::map<std::string, int> true_label;
  for (size_t i = 0; i < fx.docs.size(); ++i) true_label[fx.docs[i].doc_id] = fx.labels[i];

  std::multiset<std::string> seen;
  for (const auto& rec : split.s1) seen.insert(rec.doc.doc_id);
  for (const auto& rec : split.s2) seen.insert(rec.doc.doc_id);
  for (const auto& rec : split.test) seen.insert(rec.doc.doc_id);
  CHECK(seen.size() == fx.docs.size());
  std::set<std::string> unique(seen.begin(), seen.end());
  CHECK(unique.size() == fx.docs.size());

  // class "alpha": 10 docs, train 5, s1 3 (round(2.5) away from zero), s2 2, test 5
  // class "beta":   6 docs, train 3, s1 2,                         s2 1, test 3
  CHECK(split.s1.size() == 5);
  CHECK(split.s2.size() == 3);
  CHECK(split.test.size() == 8);

  for (const auto& rec : split.s1) {
    int label = true_label.at(rec.doc.doc_id);
    CHECK(rec.y[static_cast<size_t>(label)] == 1);
  }
  for (const auto& rec : split.s2) {
    int label = true_label.at(rec.doc.doc_id);
    CHECK(rec.y == std::vector<uint8_t>{0, 0});
    CHECK(rec.z[static_cast<size_t>(label)] == 0);  // never negates the true class
  }
  for (const auto& rec : split.test) {
    int label = true_label.at(rec.doc.doc_id);
    CHECK(rec.y[static_cast<size_t>(label)] == 1);
  }
}

TEST_CASE("split_dataset respects the requested fractions within one document") {
  SplitFixture fx;
  for (double train_frac : {0.2, 0.5, 0.9}) {
    for (double s1_frac : {0.0, 0.5, 1.0}) {
      SplitResult split = split_dataset(fx.docs, fx.labels, fx.classes, train_frac, s1_frac, 11);
      std::map<int, int> train_per_class;
      for (const auto& rec : split.s1) {
        for (int i = 0; i < 2; ++i) {
          if (rec.y[static_cast<size_t>(i)]) train_per_class[i] += 1;
        }
      }
      std::map<std::string, int> true_label;
      for (size_t i = 0; i < fx.docs.size(); ++i) true_label[fx.docs[i].doc_id] = fx.labels[i];
      for (const auto& rec : split.s2) train_per_class[true_label.at(rec.doc.doc_id)] += 1;
      for (int c = 0; c < 2; ++c) {
        double n_c = c == 0 ? 10.0 : 6.0;
        CHECK(std::abs(train_per_class[c] - train_frac * n_c) <= 1.0);
      }
    }
  }
}

TEST_CASE("split_dataset boundary fractions keep every class trainable and testable") {
  SplitFixture fx;
  SplitResult tiny = split_dataset(fx.docs, fx.labels, fx.classes, 0.01, 1.0, 5);
  CHECK(tiny.s1.size() == 2);  // one per class after clamping
  SplitResult huge = split_dataset(fx.docs, fx.labels, fx.classes, 0.99, 1.0, 5);
  CHECK(huge.test.size() == 2);
}

TEST_CASE("split_dataset is deterministic given the seed") {
  SplitFixture fx;
  SplitResult a = split_dataset(fx.docs, fx.labels, fx.classes, 0.5, 0.5, 42);
  SplitResult b = split_dataset(fx.docs, fx.labels, fx.classes, 0.5, 0.5, 42);
  SplitResult c = split_dataset(fx.docs, fx.labels, fx.classes, 0.5, 0.5, 43);
  auto ids = [](const std::vector<LabeledRecord>& recs) {
    std::vector<std::string> out;
    for (const auto& rec : recs) out.push_back(rec.doc.doc_id);
    return out;
  };
  CHECK(ids(a.s1) == ids(b.s1));
  CHECK(ids(a.s2) == ids(b.s2));
  CHECK(ids(a.test) == ids(b.test));
  CHECK(ids(a.s1) != ids(c.s1));
}

TEST_CASE("split_dataset rejects classes with fewer than two documents") {
  ClassSet classes = ClassSet::of({"big", "tiny"});
  std::vector<DocVector> docs{doc_of("a0"), doc_of("a1"), doc_of("b0")};
  std::vector<int> labels{0, 0, 1};
  try {
    split_dataset(docs, labels, classes, 0.5, 0.5, 1);
    FAIL("expected error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("tiny") != std::string::npos);
  }
}

TEST_CASE("split_dataset validates fractions and labels") {
  SplitFixture fx;
  CHECK_THROWS_AS(split_dataset(fx.docs, fx.labels, fx.classes, 0.0, 0.5, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(split_dataset(fx.docs, fx.labels, fx.classes, 1.0, 0.5, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(split_dataset(fx.docs, fx.labels, fx.classes, 0.5, 1.5, 1),
                  std::invalid_argument);
  std::vector<int> bad = fx.labels;
  bad[0] = 9;
  CHECK_THROWS_AS(split_dataset(fx.docs, bad, fx.classes, 0.5, 0.5, 1), std::invalid_argument);
}
