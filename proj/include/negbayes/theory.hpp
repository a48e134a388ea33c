#ifndef NEGBAYES_THEORY_HPP
#define NEGBAYES_THEORY_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "negbayes/estimators.hpp"
#include "negbayes/labeling.hpp"
#include "negbayes/matrix.hpp"
#include "negbayes/rng.hpp"

namespace negbayes {

// How an S2 record relates its document to its negative label:
//   TrueClass    draw a true class c from the priors, draw the document from
//                class c, then negate k_count classes != c uniformly at random.
//   UniformOther draw the negated class a from negated_probs, then draw the
//                document from a class chosen uniformly among the k-1 others.
enum class NegativeScheme { TrueClass, UniformOther };

// SamplePriors draws every class label independently; FixedQuota instead
// pins the per-class (and per-negation-pair) record counts to
// largest-remainder quotas of n*p. The closed-form moment formulas condition
// on those counts, so the quota mode is what the verification checks use.
enum class AssignmentMode { SamplePriors, FixedQuota };

struct SyntheticSpec {
  int k = 0;
  int v = 0;
  int m = 0;  // tokens per document, fixed
  Matrix theta_true;
  std::vector<double> priors_true;
  int64_t n1 = 0;
  int64_t n2 = 0;
  NegativeScheme scheme = NegativeScheme::TrueClass;
  int k_count = 1;                    // classes negated per S2 record (TrueClass scheme)
  std::vector<double> negated_probs;  // UniformOther scheme; empty means uniform
  AssignmentMode assignment = AssignmentMode::SamplePriors;
};

void validate_spec(const SyntheticSpec& spec);
SyntheticSpec load_synthetic_spec(const std::string& path);
SyntheticSpec parse_synthetic_spec(const std::string& json_text);

// Entrywise Monte Carlo moments of a fitted theta matrix against theta_true.
struct EstimatorStats {
  Matrix mean;
  Matrix bias;      // mean - theta_true
  Matrix variance;  // population variance over trials
  Matrix mse;       // mean squared deviation from theta_true
  Matrix standard_error;
  int64_t trials = 0;
};

// x ~ Multinomial(m, theta_row); sum of counts is exactly m.
DocVector generate_document(std::span<const double> theta_row, int m, Rng& rng);

// Deterministic per seed. FixedQuota record order is class-major for S1 and
// pair-major for S2 so that identical specs always give identical layouts.
PartialDataset generate_synthetic_dataset(const SyntheticSpec& spec, uint64_t seed);

// Integer apportionment of n by probs: floor(n*p) plus one for the largest
// remainders, ties toward the lowest index.
std::vector<int64_t> largest_remainder_quota(int64_t n, std::span<const double> probs);

// ---- closed-form moments ----------------------------------------------------

// Variance of the plain positive-data estimate: theta*(1-theta)/(c_i*m).
double analytic_nb_variance(double theta_ij, int64_t class_size, int m);

// Bias of the L1 estimate when class i receives r_i negative-data records of
// fractional weight k_weight each: r_i*k_weight*(l_ij - theta_ij)/(c_i + r_i*k_weight).
double analytic_l1_bias(double theta_ij, double l_ij, double c_i, double r_i, double k_weight);

// l_ij: expected normalized count E[x_j]/m of an S2 document given that class
// i is not negated, under the ground-truth mixture `spec` describes.
double l1_conditional_mean(const SyntheticSpec& spec, int i, int j);

// Pooled per-record label probabilities over S = S1 u S2:
// p_i = P(y_i = 1), q_i = P(z_i = 1).
std::vector<double> pooled_positive_probs(const SyntheticSpec& spec);
std::vector<double> pooled_negative_probs(const SyntheticSpec& spec);

// Closed-form mean of the L2 estimate under the UniformOther scheme, with
// M_l = sum_b theta_bj - theta_lj:
//   (t*sum_l p_l*theta_lj + p_i*theta_ij + t*sum_l q_l*M_l/(k-1) - q_i*M_i/(k-1))
//   / (p_i - q_i + t)
double analytic_l2_expectation(const Matrix& theta, std::span<const double> p,
                               std::span<const double> q, double t, int i, int j);

// Closed-form variance counterpart, scaling as 1/(m*n_total). Note the
// negative-data terms carry 1/(k-1)^2 exactly as the source formula is
// printed; see check_l2_moments for how the Monte Carlo comparison treats
// that factor.
double analytic_l2_variance(const Matrix& theta, std::span<const double> p,
                            std::span<const double> q, double t, int m, int64_t n_total, int i,
                            int j);

// ---- Monte Carlo engine ------------------------------------------------------

// Trial tau generates a dataset with RNG substream (master_seed, tau), fits
// the tagged estimator (alpha must be 0), and accumulates the fitted theta.
// Per-trial matrices are reduced in trial order, so the result is
// bit-identical regardless of thread count. A trial whose estimator fails
// aborts the run with that trial's seed in the message.
EstimatorStats monte_carlo_stats(const SyntheticSpec& spec, EstimatorTag tag,
                                 const EstimatorConfig& config, int64_t trials,
                                 uint64_t master_seed, int threads = 1);

// One CSV row of a study: aggregate moments of one estimator at one
// configuration. `slope` is the fitted log-log MSE slope, present for
// convergence studies only. `t` is present for L2/SelfCorrect rows only.
struct StudyRow {
  EstimatorTag estimator = EstimatorTag::NB;
  int64_t n_total = 0;
  int64_t n1 = 0;
  int64_t n2 = 0;
  std::optional<double> t;
  int64_t trial_count = 0;
  double mean_bias_l2norm = 0.0;  // Frobenius norm of the bias matrix
  double mean_variance = 0.0;     // entrywise mean
  double mean_mse = 0.0;          // entrywise mean
  std::optional<double> slope;
};

// Scales (n1, n2) of the base spec proportionally to each total size, runs
// all estimators on shared per-trial datasets, and fits the log-log slope of
// mean MSE against total size per estimator.
std::vector<StudyRow> convergence_study(const SyntheticSpec& base, std::span<const int64_t> sizes,
                                        std::span<const EstimatorTag> estimators,
                                        const EstimatorConfig& config, int64_t trials,
                                        uint64_t master_seed, int threads = 1);

// header: estimator,n_total,n1,n2,t,trial_count,mean_bias_l2norm,mean_variance,mean_mse,slope
std::string study_csv_string(std::span<const StudyRow> rows);
void write_study_csv(std::span<const StudyRow> rows, const std::string& path);

// ---- named verification checks ----------------------------------------------

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct TheoryRun {
  std::vector<StudyRow> rows;
  std::vector<CheckResult> checks;

  bool all_pass() const;
};

// Positive-data estimator: entrywise bias within 3 SE of zero, and empirical
// variance within 5% of analytic_nb_variance for theta entries in [0.05, 0.95].
TheoryRun check_nb_moments(const SyntheticSpec& spec, int64_t trials, uint64_t seed, int threads);

// L1 estimator on a TrueClass spec: entrywise bias within 3 SE of
// analytic_l1_bias with l_ij from ground truth.
TheoryRun check_l1_bias(const SyntheticSpec& spec, int64_t trials, uint64_t seed, int threads);

// L2 estimator on a UniformOther spec, one run per t value: empirical mean
// within 3 SE of analytic_l2_expectation per entry, and mean |bias| monotone
// nondecreasing in t. Also reports (without asserting) the ratio of the
// printed variance formula to the Monte Carlo variance.
TheoryRun check_l2_moments(const SyntheticSpec& spec, std::span<const double> t_values,
                           int64_t trials, uint64_t seed, int threads);

// Fitted log-log MSE slope in [-1.2, -0.8] for each listed estimator.
TheoryRun check_convergence_slopes(const SyntheticSpec& base, std::span<const int64_t> sizes,
                                   std::span<const EstimatorTag> estimators, double t,
                                   int64_t trials, uint64_t seed, int threads);

// At matched labeling budget (|S1|=|S2|=n vs positive-only |S1|=n), the mean
// Monte Carlo variance of L1 is strictly below that of NB.
TheoryRun check_l1_vs_nb_variance(const SyntheticSpec& spec, int64_t trials, uint64_t seed,
                                  int threads);

// ---- config-driven dispatch (the verify-theory command) ----------------------

struct TheoryCheckConfig {
  std::string check;  // nb_moments | l1_bias | l2_moments | slopes | l1_vs_nb
  SyntheticSpec spec;
  double t = 2.0;                         // estimator t where applicable
  std::vector<double> t_values;           // l2_moments; defaults to {t}
  std::vector<int64_t> sizes;             // slopes
  std::vector<EstimatorTag> estimators;   // slopes; defaults to {NB, L1, L2}
};

TheoryCheckConfig load_theory_config(const std::string& path);
TheoryRun run_theory_check(const TheoryCheckConfig& config, int64_t trials, uint64_t seed,
                           int threads);

}  // namespace negbayes

#endif  // NEGBAYES_THEORY_HPP
