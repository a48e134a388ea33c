#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "negbayes/theory.hpp"

using namespace negbayes;

namespace {

Matrix matrix_of(std::vector<std::vector<double>> rows) {
  Matrix m(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
  for (int i = 0; i < m.rows; ++i) {
    for (int j = 0; j < m.cols; ++j) m(i, j) = rows[static_cast<size_t>(i)][static_cast<size_t>(j)];
  }
  return m;
}

SyntheticSpec small_spec(int64_t n1, int64_t n2,
                         AssignmentMode assignment = AssignmentMode::FixedQuota,
                         NegativeScheme scheme = NegativeScheme::TrueClass) {
  SyntheticSpec spec;
  spec.k = 3;
  spec.v = 4;
  spec.m = 10;
  spec.theta_true = matrix_of({{0.40, 0.30, 0.20, 0.10},
                               {0.10, 0.40, 0.30, 0.20},
                               {0.25, 0.25, 0.25, 0.25}});
  spec.priors_true = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  spec.n1 = n1;
  spec.n2 = n2;
  spec.scheme = scheme;
  spec.assignment = assignment;
  return spec;
}

EstimatorConfig exact_config(double t = 2.0) {
  EstimatorConfig config;
  config.alpha = 0.0;
  config.t = t;
  config.prior_mode = PriorMode::Uniform;
  return config;
}

}  // namespace

TEST_CASE("largest_remainder_quota apportions exactly") {
  SUBCASE("exact proportions") {
    std::vector<double> probs = {0.5, 0.3, 0.2};
    CHECK(largest_remainder_quota(10, probs) == std::vector<int64_t>{5, 3, 2});
  }
  SUBCASE("remainder ties go to the lowest index") {
    std::vector<double> thirds = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
    CHECK(largest_remainder_quota(7, thirds) == std::vector<int64_t>{3, 2, 2});
    std::vector<double> halves = {0.9, 0.1};
    CHECK(largest_remainder_quota(5, halves) == std::vector<int64_t>{5, 0});
  }
  SUBCASE("always sums to n") {
    std::vector<double> probs = {0.17, 0.06, 0.44, 0.33};
    for (int64_t n : {0, 1, 2, 7, 23, 100, 997}) {
      auto quota = largest_remainder_quota(n, probs);
      int64_t total = 0;
      for (int64_t q : quota) total += q;
      CHECK(total == n);
    }
  }
}

TEST_CASE("generate_document") {
  Rng rng(404);
  SUBCASE("token total is exactly m") {
    std::vector<double> row = {0.5, 0.3, 0.2};
    for (int rep = 0; rep < 50; ++rep) {
      DocVector doc = generate_document(row, 17, rng);
      CHECK(doc.length == 17);
      uint64_t total = 0;
      for (auto [idx, count] : doc.counts) {
        CHECK(idx < 3);
        CHECK(count > 0);
        total += count;
      }
      CHECK(total == 17);
    }
  }
  SUBCASE("degenerate row puts every token on one term") {
    std::vector<double> row = {0.0, 1.0, 0.0};
    DocVector doc = generate_document(row, 9, rng);
    REQUIRE(doc.counts.size() == 1);
    CHECK(doc.counts[0] == std::pair<uint32_t, uint32_t>{1, 9});
  }
  SUBCASE("empirical moments match the multinomial") {
    std::vector<double> row = {0.5, 0.3, 0.2};
    const int m = 20;
    const int draws = 10000;
    std::vector<double> sum(3, 0.0), sumsq(3, 0.0);
    for (int rep = 0; rep < draws; ++rep) {
      DocVector doc = generate_document(row, m, rng);
      std::vector<double> dense(3, 0.0);
      for (auto [idx, count] : doc.counts) dense[idx] = count;
      for (int j = 0; j < 3; ++j) {
        sum[j] += dense[j];
        sumsq[j] += dense[j] * dense[j];
      }
    }
    for (int j = 0; j < 3; ++j) {
      double mean = sum[j] / draws;
      double var = sumsq[j] / draws - mean * mean;
      double expect_mean = m * row[j];
      double expect_var = m * row[j] * (1.0 - row[j]);
      // 4 standard errors of the respective estimates
      CHECK(std::abs(mean - expect_mean) < 4.0 * std::sqrt(expect_var / draws));
      CHECK(std::abs(var - expect_var) < 4.0 * expect_var * std::sqrt(2.0 / draws));
    }
  }
}

TEST_CASE("validate_spec rejects inconsistent settings") {
  SyntheticSpec spec = small_spec(10, 10);
  CHECK_NOTHROW(validate_spec(spec));
  SUBCASE("k too small") {
    spec.k = 1;
    CHECK_THROWS_AS(validate_spec(spec), std::invalid_argument);
  }
  SUBCASE("theta rows must sum to one") {
    spec.theta_true(0, 0) += 0.1;
    CHECK_THROWS_AS(validate_spec(spec), std::invalid_argument);
  }
  SUBCASE("priors length") {
    spec.priors_true = {0.5, 0.5};
    CHECK_THROWS_AS(validate_spec(spec), std::invalid_argument);
  }
  SUBCASE("no records at all") {
    spec.n1 = 0;
    spec.n2 = 0;
    CHECK_THROWS_AS(validate_spec(spec), std::invalid_argument);
  }
  SUBCASE("k_count bounds") {
    spec.k_count = 3;
    CHECK_THROWS_AS(validate_spec(spec), std::invalid_argument);
  }
  SUBCASE("multi-negation has no fixed-quota layout") {
    spec.k_count = 2;
    CHECK_THROWS_AS(validate_spec(spec), std::invalid_argument);
    spec.assignment = AssignmentMode::SamplePriors;
    CHECK_NOTHROW(validate_spec(spec));
  }
  SUBCASE("negated_probs belongs to uniform_other") {
    spec.negated_probs = {0.5, 0.3, 0.2};
    CHECK_THROWS_AS(validate_spec(spec), std::invalid_argument);
    spec.scheme = NegativeScheme::UniformOther;
    CHECK_NOTHROW(validate_spec(spec));
    spec.negated_probs = {0.5, 0.5};
    CHECK_THROWS_AS(validate_spec(spec), std::invalid_argument);
  }
}

TEST_CASE("parse_synthetic_spec") {
  SUBCASE("defaults fill in priors, scheme, and assignment") {
    SyntheticSpec spec = parse_synthetic_spec(
        R"({"k":2,"v":2,"m":5,"theta":[[0.7,0.3],[0.2,0.8]],"n1":10})");
    CHECK(spec.k == 2);
    CHECK(spec.priors_true == std::vector<double>{0.5, 0.5});
    CHECK(spec.scheme == NegativeScheme::TrueClass);
    CHECK(spec.assignment == AssignmentMode::SamplePriors);
    CHECK(spec.k_count == 1);
    CHECK(spec.n2 == 0);
  }
  SUBCASE("full form") {
    SyntheticSpec spec = parse_synthetic_spec(
        R"({"k":2,"v":2,"m":5,"theta":[[0.7,0.3],[0.2,0.8]],"priors":[0.6,0.4],
            "n1":4,"n2":6,"scheme":"uniform_other","negated_probs":[0.9,0.1],
            "assignment":"fixed_quota"})");
    CHECK(spec.scheme == NegativeScheme::UniformOther);
    CHECK(spec.assignment == AssignmentMode::FixedQuota);
    CHECK(spec.negated_probs == std::vector<double>{0.9, 0.1});
  }
  SUBCASE("missing keys are named") {
    try {
      parse_synthetic_spec(R"({"k":2,"v":2,"m":5})");
      FAIL("expected error");
    } catch (const std::runtime_error& e) {
      CHECK(std::string(e.what()).find("theta") != std::string::npos);
    }
  }
  SUBCASE("bad scheme string") {
    CHECK_THROWS_AS(parse_synthetic_spec(
                        R"({"k":2,"v":2,"m":5,"theta":[[1.0,0.0],[0.0,1.0]],"n1":1,"scheme":"x"})"),
                    std::runtime_error);
  }
  SUBCASE("invalid JSON") {
    CHECK_THROWS_AS(parse_synthetic_spec("{"), std::runtime_error);
  }
}

TEST_CASE("generate_synthetic_dataset fixed quotas pin the layout") {
  SyntheticSpec spec = small_spec(10, 12);
  spec.priors_true = {0.5, 0.3, 0.2};
  PartialDataset ds = generate_synthetic_dataset(spec, 31);
  REQUIRE(ds.records.size() == 22);
  CHECK(ds.s1_size == 10);
  CHECK(ds.s2_size == 12);
  CHECK(ds.classes.k() == 3);

  // S1 block is class-major with quota (5, 3, 2)
  std::vector<int> s1_class;
  for (const auto& rec : ds.s1()) {
    int truth = -1;
    for (int i = 0; i < 3; ++i) {
      if (rec.y[static_cast<size_t>(i)]) truth = i;
    }
    REQUIRE(truth >= 0);
    s1_class.push_back(truth);
  }
  CHECK(s1_class == std::vector<int>{0, 0, 0, 0, 0, 1, 1, 1, 2, 2});

  // each document carries exactly m tokens
  for (const auto& rec : ds.records) CHECK(rec.doc.length == 10);

  // S2 negation counts follow the pair quotas: cell prob p_c/(k-1)
  std::vector<int> negated(3, 0);
  for (const auto& rec : ds.s2()) {
    int count = 0;
    for (int i = 0; i < 3; ++i) {
      CHECK(rec.y[static_cast<size_t>(i)] == 0);
      if (rec.z[static_cast<size_t>(i)]) {
        ++negated[static_cast<size_t>(i)];
        ++count;
      }
    }
    CHECK(count == 1);
  }
  // cells (c,a): prob(a negated) = sum_{c != a} p_c/2; quotas of 12 records:
  // cells (0,1),(0,2) get 3 each; (1,0),(1,2) get 2,2; (2,0),(2,1) get 1,1
  CHECK(negated == std::vector<int>{3, 4, 5});
}

TEST_CASE("generate_synthetic_dataset is deterministic per seed") {
  SyntheticSpec spec = small_spec(15, 10, AssignmentMode::SamplePriors);
  PartialDataset a = generate_synthetic_dataset(spec, 7);
  PartialDataset b = generate_synthetic_dataset(spec, 7);
  PartialDataset c = generate_synthetic_dataset(spec, 8);
  REQUIRE(a.records.size() == b.records.size());
  bool all_equal = true;
  bool any_diff_from_c = false;
  for (size_t r = 0; r < a.records.size(); ++r) {
    if (a.records[r].doc.counts != b.records[r].doc.counts || a.records[r].y != b.records[r].y ||
        a.records[r].z != b.records[r].z) {
      all_equal = false;
    }
    if (a.records[r].doc.counts != c.records[r].doc.counts || a.records[r].y != c.records[r].y ||
        a.records[r].z != c.records[r].z) {
      any_diff_from_c = true;
    }
  }
  CHECK(all_equal);
  CHECK(any_diff_from_c);
}

TEST_CASE("analytic_nb_variance") {
  CHECK(analytic_nb_variance(0.25, 40, 50) == doctest::Approx(9.375e-5).epsilon(1e-12));
  CHECK(analytic_nb_variance(0.0, 10, 10) == 0.0);
  CHECK(analytic_nb_variance(1.0, 10, 10) == 0.0);
  CHECK(analytic_nb_variance(0.3, 200, 20) ==
        doctest::Approx(0.5 * analytic_nb_variance(0.3, 100, 20)).epsilon(1e-12));
  CHECK_THROWS_AS(analytic_nb_variance(0.3, 0, 20), std::invalid_argument);
}

TEST_CASE("analytic_l1_bias") {
  // 100 fractional records of weight 1 pulling from 0.6 toward 0.2
  CHECK(analytic_l1_bias(0.6, 0.2, 100.0, 100.0, 1.0) == doctest::Approx(-0.2).epsilon(1e-12));
  CHECK(analytic_l1_bias(0.4, 0.4, 50.0, 80.0, 0.5) == 0.0);  // matched means: no pull
  CHECK(analytic_l1_bias(0.4, 0.9, 50.0, 0.0, 0.5) == 0.0);   // no negative records
  CHECK_THROWS_AS(analytic_l1_bias(0.4, 0.9, 0.0, 0.0, 0.5), std::invalid_argument);
}

TEST_CASE("l1_conditional_mean mixes the classes that stay plausible") {
  SyntheticSpec spec = small_spec(6, 6);
  // uniform priors, 6 cells (c,a) with quota 1 each; cells not negating class 0
  // carry documents from classes {0,0,1,2} -> weights (2,1,1)/4
  double expect = (2.0 * spec.theta_true(0, 1) + spec.theta_true(1, 1) + spec.theta_true(2, 1)) / 4.0;
  CHECK(l1_conditional_mean(spec, 0, 1) == doctest::Approx(expect).epsilon(1e-12));

  SyntheticSpec no_neg = small_spec(6, 0);
  CHECK(l1_conditional_mean(no_neg, 0, 1) == no_neg.theta_true(0, 1));  // formula's r_i = 0 case
  CHECK_THROWS_AS(l1_conditional_mean(spec, 3, 0), std::invalid_argument);
}

TEST_CASE("pooled label probabilities") {
  SUBCASE("quota-exact positives, no negatives") {
    SyntheticSpec spec = small_spec(10, 0);
    spec.priors_true = {0.5, 0.3, 0.2};
    auto p = pooled_positive_probs(spec);
    auto q = pooled_negative_probs(spec);
    CHECK(p == std::vector<double>{0.5, 0.3, 0.2});
    CHECK(q == std::vector<double>{0.0, 0.0, 0.0});
  }
  SUBCASE("quota-exact negation rates") {
    SyntheticSpec spec = small_spec(6, 6);
    auto q = pooled_negative_probs(spec);
    // 6 cells, quota 1 each; every class negated by 2 of the 12 records
    CHECK(q[0] == doctest::Approx(2.0 / 12.0).epsilon(1e-12));
    CHECK(q[1] == doctest::Approx(2.0 / 12.0).epsilon(1e-12));
    CHECK(q[2] == doctest::Approx(2.0 / 12.0).epsilon(1e-12));
  }
  SUBCASE("sampled mode uses expectations") {
    SyntheticSpec spec = small_spec(10, 0, AssignmentMode::SamplePriors);
    spec.priors_true = {0.5, 0.3, 0.2};
    auto p = pooled_positive_probs(spec);
    CHECK(p[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(p[2] == doctest::Approx(0.2).epsilon(1e-12));
  }
}

TEST_CASE("analytic_l2_expectation") {
  Matrix theta = matrix_of({{0.7, 0.3}, {0.2, 0.8}});
  SUBCASE("pure positive data from the class itself is unbiased") {
    std::vector<double> p = {1.0, 0.0};
    std::vector<double> q = {0.0, 0.0};
    for (double t : {1.5, 2.0, 10.0}) {
      CHECK(analytic_l2_expectation(theta, p, q, t, 0, 0) == doctest::Approx(0.7).epsilon(1e-12));
      CHECK(analytic_l2_expectation(theta, p, q, t, 0, 1) == doctest::Approx(0.3).epsilon(1e-12));
    }
  }
  SUBCASE("large t flattens to the pooled mixture") {
    std::vector<double> p = {0.3, 0.2};
    std::vector<double> q = {0.25, 0.25};
    double col_sum = theta(0, 0) + theta(1, 0);
    double limit = p[0] * theta(0, 0) + p[1] * theta(1, 0) +
                   (q[0] * (col_sum - theta(0, 0)) + q[1] * (col_sum - theta(1, 0))) / 1.0;
    CHECK(analytic_l2_expectation(theta, p, q, 1e8, 0, 0) == doctest::Approx(limit).epsilon(1e-6));
    CHECK(analytic_l2_expectation(theta, p, q, 1e8, 1, 0) == doctest::Approx(limit).epsilon(1e-6));
  }
  SUBCASE("shape validation") {
    std::vector<double> p = {1.0};
    std::vector<double> q = {0.0};
    CHECK_THROWS_AS(analytic_l2_expectation(theta, p, q, 2.0, 0, 0), std::invalid_argument);
  }
}

TEST_CASE("analytic_l2_variance") {
  Matrix theta = matrix_of({{0.7, 0.3}, {0.2, 0.8}});
  std::vector<double> onehot = {1.0, 0.0};
  std::vector<double> zero = {0.0, 0.0};
  SUBCASE("pure positive data collapses to the plain-count variance") {
    for (double t : {1.5, 2.0, 7.0}) {
      CHECK(analytic_l2_variance(theta, onehot, zero, t, 10, 200, 0, 0) ==
            doctest::Approx(analytic_nb_variance(0.7, 200, 10)).epsilon(1e-12));
    }
  }
  SUBCASE("scales inversely with records and tokens") {
    std::vector<double> p = {0.3, 0.2};
    std::vector<double> q = {0.25, 0.25};
    double base = analytic_l2_variance(theta, p, q, 2.0, 10, 100, 0, 0);
    CHECK(analytic_l2_variance(theta, p, q, 2.0, 10, 200, 0, 0) ==
          doctest::Approx(base / 2.0).epsilon(1e-12));
    CHECK(analytic_l2_variance(theta, p, q, 2.0, 20, 100, 0, 0) ==
          doctest::Approx(base / 2.0).epsilon(1e-12));
  }
}

TEST_CASE("monte_carlo_stats is deterministic and internally consistent") {
  SyntheticSpec spec = small_spec(40, 0);
  EstimatorStats first = monte_carlo_stats(spec, EstimatorTag::NB, exact_config(), 200, 11, 1);
  EstimatorStats again = monte_carlo_stats(spec, EstimatorTag::NB, exact_config(), 200, 11, 1);
  EstimatorStats threaded = monte_carlo_stats(spec, EstimatorTag::NB, exact_config(), 200, 11, 4);

  CHECK(first.trials == 200);
  CHECK(first.mean.data == again.mean.data);
  CHECK(first.variance.data == again.variance.data);
  CHECK(first.mean.data == threaded.mean.data);  // reduction order is trial order
  CHECK(first.variance.data == threaded.variance.data);
  CHECK(first.mse.data == threaded.mse.data);

  for (size_t e = 0; e < first.mean.data.size(); ++e) {
    // mse = bias^2 + variance is an algebraic identity of the accumulators
    CHECK(first.mse.data[e] ==
          doctest::Approx(first.bias.data[e] * first.bias.data[e] + first.variance.data[e])
              .epsilon(1e-9));
    CHECK(first.standard_error.data[e] ==
          doctest::Approx(std::sqrt(first.variance.data[e] / 200.0)).epsilon(1e-12));
  }

  EstimatorStats other_seed = monte_carlo_stats(spec, EstimatorTag::NB, exact_config(), 200, 12, 1);
  CHECK(first.mean.data != other_seed.mean.data);
}

TEST_CASE("monte_carlo_stats guards its preconditions") {
  SyntheticSpec spec = small_spec(40, 0);
  CHECK_THROWS_AS(monte_carlo_stats(spec, EstimatorTag::NB, exact_config(), 1, 11, 1),
                  std::invalid_argument);
  EstimatorConfig smoothed = exact_config();
  smoothed.alpha = 1e-2;
  CHECK_THROWS_AS(monte_carlo_stats(spec, EstimatorTag::NB, smoothed, 100, 11, 1),
                  std::invalid_argument);
}

TEST_CASE("a failing trial reports its index and seed") {
  // quota (1, 0, 0): classes 1 and 2 get no records, so the exact NB fit dies
  SyntheticSpec spec = small_spec(1, 0);
  try {
    monte_carlo_stats(spec, EstimatorTag::NB, exact_config(), 5, 3, 1);
    FAIL("expected error");
  } catch (const std::runtime_error& e) {
    std::string what = e.what();
    CHECK(what.find("trial 0") != std::string::npos);
    CHECK(what.find("seed") != std::string::npos);
  }
}

TEST_CASE("L2 variance formula matches Monte Carlo when no labels are negative") {
  // with q = 0 the printed form has no (k-1) ambiguity and must match
  SyntheticSpec spec = small_spec(100, 0);
  EstimatorStats stats = monte_carlo_stats(spec, EstimatorTag::L2, exact_config(2.0), 4000, 21, 1);
  auto p = pooled_positive_probs(spec);
  auto q = pooled_negative_probs(spec);
  for (int i = 0; i < spec.k; ++i) {
    for (int j = 0; j < spec.v; ++j) {
      double predicted =
          analytic_l2_variance(spec.theta_true, p, q, 2.0, spec.m, spec.n1, i, j);
      CHECK(stats.variance(i, j) / predicted == doctest::Approx(1.0).epsilon(0.1));
    }
  }
}

TEST_CASE("convergence_study lays out rows estimator-major with a shared slope") {
  SyntheticSpec base = small_spec(60, 40);
  std::vector<int64_t> sizes = {100, 200};
  std::vector<EstimatorTag> tags = {EstimatorTag::NB, EstimatorTag::L2};
  auto rows = convergence_study(base, sizes, tags, exact_config(), 150, 5, 1);
  REQUIRE(rows.size() == 4);

  CHECK(rows[0].estimator == EstimatorTag::NB);
  CHECK(rows[1].estimator == EstimatorTag::NB);
  CHECK(rows[2].estimator == EstimatorTag::L2);
  CHECK(rows[3].estimator == EstimatorTag::L2);
  CHECK(rows[0].n_total == 100);
  CHECK(rows[1].n_total == 200);
  CHECK(rows[0].n1 == 60);  // keeps the base 60:40 composition
  CHECK(rows[0].n2 == 40);
  CHECK(rows[1].n1 == 120);
  CHECK(rows[1].n2 == 80);
  CHECK(rows[0].trial_count == 150);

  CHECK(!rows[0].t.has_value());  // t is an L2 knob only
  REQUIRE(rows[2].t.has_value());
  CHECK(*rows[2].t == 2.0);

  REQUIRE(rows[0].slope.has_value());
  CHECK(*rows[0].slope == *rows[1].slope);  // one fit per estimator
  CHECK(*rows[0].slope < 0.0);              // more data, less error
  CHECK(rows[1].mean_mse < rows[0].mean_mse);
  CHECK(rows[3].mean_mse < rows[2].mean_mse);

  SUBCASE("csv rendering") {
    std::string csv = study_csv_string(rows);
    auto first_newline = csv.find('\n');
    CHECK(csv.substr(0, first_newline) ==
          "estimator,n_total,n1,n2,t,trial_count,mean_bias_l2norm,mean_variance,mean_mse,slope");
    CHECK(csv.find("\nNB,100,60,40,,150,") != std::string::npos);
    CHECK(csv.find("\nL2,200,120,80,2,150,") != std::string::npos);
    int lines = 0;
    for (char c : csv) lines += (c == '\n');
    CHECK(lines == 5);  // header + 4 rows, trailing newline
  }

  SUBCASE("sizes must increase") {
    std::vector<int64_t> bad = {200, 100};
    CHECK_THROWS_AS(convergence_study(base, bad, tags, exact_config(), 150, 5, 1),
                    std::invalid_argument);
  }
}

TEST_CASE("named checks produce their documented verdict lines") {
  SUBCASE("nb moments") {
    SyntheticSpec spec = small_spec(60, 0);
    TheoryRun run = check_nb_moments(spec, 10000, 2024, 1);
    REQUIRE(run.checks.size() == 2);
    CHECK(run.checks[0].name == "nb_bias_within_3se");
    CHECK(run.checks[1].name == "nb_variance_within_5pct");
    CHECK(run.checks[0].pass);
    CHECK(run.checks[1].pass);
    CHECK(run.all_pass());
    CHECK(run.rows.size() == 1);
    CHECK(run.rows[0].n_total == 60);
  }
  SUBCASE("l1 bias needs the true_class scheme") {
    SyntheticSpec spec = small_spec(60, 60, AssignmentMode::FixedQuota, NegativeScheme::UniformOther);
    CHECK_THROWS_AS(check_l1_bias(spec, 100, 1, 1), std::invalid_argument);
  }
  SUBCASE("l1 bias against the closed form") {
    SyntheticSpec spec = small_spec(120, 120);
    TheoryRun run = check_l1_bias(spec, 2500, 77, 1);
    REQUIRE(run.checks.size() == 1);
    CHECK(run.checks[0].name == "l1_bias_within_3se");
    CHECK(run.checks[0].pass);
  }
  SUBCASE("l2 moments and the variance-form report") {
    SyntheticSpec spec = small_spec(90, 90, AssignmentMode::FixedQuota, NegativeScheme::UniformOther);
    std::vector<double> ts = {1.5, 3.0};
    TheoryRun run = check_l2_moments(spec, ts, 2500, 99, 1);
    REQUIRE(run.checks.size() == 4);
    CHECK(run.checks[0].name == "l2_mean_within_3se_t=1.5");
    CHECK(run.checks[1].name == "l2_mean_within_3se_t=3");
    CHECK(run.checks[2].name == "l2_bias_monotone_in_t");
    CHECK(run.checks[3].name == "l2_variance_form_report");
    CHECK(run.checks[0].pass);
    CHECK(run.checks[1].pass);
    CHECK(run.checks[2].pass);
    CHECK(run.checks[3].pass);  // informational, never asserted as a failure
    CHECK(run.rows.size() == 2);
    REQUIRE(run.rows[0].t.has_value());
    CHECK(*run.rows[0].t == 1.5);
  }
  SUBCASE("convergence slopes on the plain estimator") {
    SyntheticSpec base = small_spec(80, 0);
    std::vector<int64_t> sizes = {80, 320};
    std::vector<EstimatorTag> tags = {EstimatorTag::NB};
    TheoryRun run = check_convergence_slopes(base, sizes, tags, 2.0, 600, 13, 1);
    REQUIRE(run.checks.size() == 1);
    CHECK(run.checks[0].name == "mse_slope_NB");
    CHECK(run.checks[0].pass);
  }
  SUBCASE("l1 variance beats nb at matched budget") {
    SyntheticSpec spec = small_spec(80, 80);
    TheoryRun run = check_l1_vs_nb_variance(spec, 1500, 42, 1);
    REQUIRE(run.checks.size() == 1);
    CHECK(run.checks[0].name == "l1_variance_below_nb");
    CHECK(run.checks[0].pass);
    CHECK_THROWS_AS(check_l1_vs_nb_variance(small_spec(80, 0), 100, 1, 1), std::invalid_argument);
  }
}

TEST_CASE("config-driven dispatch") {
  auto dir = std::filesystem::temp_directory_path() / "negbayes_theory_test";
  std::filesystem::create_directories(dir);
  auto config_path = (dir / "check.json").string();
  {
    std::ofstream out(config_path);
    out << R"({"check":"nb_moments",
               "spec":{"k":2,"v":2,"m":8,"theta":[[0.7,0.3],[0.2,0.8]],
                       "n1":40,"assignment":"fixed_quota"}})";
  }
  TheoryCheckConfig config = load_theory_config(config_path);
  CHECK(config.check == "nb_moments");
  CHECK(config.spec.k == 2);
  CHECK(config.spec.assignment == AssignmentMode::FixedQuota);

  TheoryRun run = run_theory_check(config, 400, 3, 1);
  CHECK(run.checks.size() == 2);
  CHECK(run.rows.size() == 1);

  SUBCASE("unknown check name") {
    TheoryCheckConfig bad = config;
    bad.check = "banana";
    CHECK_THROWS_AS(run_theory_check(bad, 100, 1, 1), std::invalid_argument);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_theory_config((dir / "absent.json").string()), std::runtime_error);
  }
}
