#ifndef NEGBAYES_ESTIMATORS_HPP
#define NEGBAYES_ESTIMATORS_HPP

#include <span>
#include <string>
#include <vector>

#include "negbayes/labeling.hpp"
#include "negbayes/matrix.hpp"

namespace negbayes {

enum class EstimatorTag { NB, L1, L2, SelfCorrect };

std::string estimator_name(EstimatorTag tag);
EstimatorTag estimator_from_name(const std::string& name);  // accepts NB|L1|L2|SelfCorrect

enum class PriorMode { FromS1, Uniform };

struct EstimatorConfig {
  double t = 2.0;         // likelihood-ratio offset, must be > 1 for L2/SelfCorrect
  double alpha = 1e-2;    // Laplace smoothing; 0 gives the exact closed forms
  PriorMode prior_mode = PriorMode::FromS1;
};

// Fitted multinomial model: row-stochastic k x v term probabilities plus
// class priors. alpha and t record how the fit was produced.
struct ClassParams {
  int k = 0;
  int v = 0;
  Matrix theta;
  std::vector<double> priors;
  EstimatorTag estimator = EstimatorTag::NB;
  double alpha = 0.0;
  double t = 0.0;  // meaningful for L2/SelfCorrect only
};

// theta_ij = (num_ij + alpha) / (rowsum_i + alpha*v). alpha = 0 is plain
// normalization and throws if a row is all zero (names the class index).
Matrix apply_smoothing(const Matrix& numerators, double alpha);

// Class frequencies of positively labeled records, add-one smoothed:
// (|C_i| + 1) / (n + k). Uniform mode ignores the records. FromS1 with no
// positively labeled record throws (caller should select Uniform).
std::vector<double> estimate_priors(std::span<const LabeledRecord> records, int k, PriorMode mode);

// Per-class weighted token counts, normalized. The four estimators differ
// only in the per-record class weight:
//   NB            w_i = y_i                 (positive data only)
//   L1            w_i = y_i on S1 records, l1_weight(z, i) on S2 records
//   L2            w_i = y_i + t - z_i       (any mix of labels, t > 1)
//   SelfCorrect   w_i = 2*y_i + t - 1       (positive data only, t > 1)
ClassParams estimate_nb(std::span<const LabeledRecord> s1, int k, int v,
                        const EstimatorConfig& config);
ClassParams estimate_l1(std::span<const LabeledRecord> s1, std::span<const LabeledRecord> s2, int k,
                        int v, const EstimatorConfig& config);
ClassParams estimate_l2(std::span<const LabeledRecord> records, int k, int v,
                        const EstimatorConfig& config);
ClassParams estimate_self_correct(std::span<const LabeledRecord> s1, int k, int v,
                                  const EstimatorConfig& config);

// Dispatch on tag: NB/SelfCorrect fit ds.s1(), L1 fits (ds.s1(), ds.s2()),
// L2 fits ds.all(). v is the vocabulary size (records may not cover it).
ClassParams fit(const PartialDataset& ds, EstimatorTag tag, const EstimatorConfig& config, int v);

}  // namespace negbayes

#endif  // NEGBAYES_ESTIMATORS_HPP
