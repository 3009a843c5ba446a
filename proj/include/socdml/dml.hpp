#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "socdml/learners.hpp"
#include "socdml/types.hpp"

namespace socdml {

/// Standard normal CDF (absolute error well under 1e-7).
double normal_cdf(double z);
/// Inverse of normal_cdf on (0, 1), bisection-safeguarded Newton to 1e-9.
double normal_quantile(double p);

/// Cross-fitting partition: every unit in exactly one fold, fold sizes within
/// one of each other and, when stratified, per-fold treated counts within one.
struct FoldPlan {
  int n = 0;
  int k = 0;
  std::uint64_t seed = 0;
  bool stratified = true;
  std::vector<int> assignment;  // unit index -> fold in [0, k)

  std::vector<int> fold_sizes() const;
};

FoldPlan make_folds(int n, int k, std::uint64_t seed, const std::vector<int>& treatments,
                    bool stratified = true);

/// Out-of-fold nuisance predictions: entry i comes from models whose training
/// set excluded fold(i) entirely.
struct NuisancePredictions {
  Eigen::VectorXd y_hat;  // E[Y | X, W]
  Eigen::VectorXd t_hat;  // E[T | X, W]
};

struct CrossfitOptions {
  /// Standardize the control block per training fold instead of relying on
  /// globally pre-scaled units. n_modifiers gives the width of the one-hot
  /// block that is left untouched.
  bool scale_within_fold = false;
  int n_modifiers = 0;
};

NuisancePredictions crossfit_nuisances(const std::vector<AnalysisUnit>& units, const FoldPlan& plan,
                                       const Trainer& regressor, const Trainer& classifier,
                                       const CrossfitOptions& options = {});

/// y_tilde = Y - y_hat, t_tilde = T - t_hat.
std::pair<Eigen::VectorXd, Eigen::VectorXd> residualize(const std::vector<AnalysisUnit>& units,
                                                        const NuisancePredictions& preds);

struct FinalStageOptions {
  bool intercept = false;  // adds a plain t_tilde regressor for non-exhaustive one-hots
  bool hc1 = false;        // n/(n-k) small-sample factor on the sandwich
};

/// Final-stage fit and everything inference needs from it.
struct DmlFit {
  Eigen::VectorXd beta;        // per-segment CATE (intercept first when enabled)
  Eigen::MatrixXd covariance;  // heteroskedasticity-robust sandwich
  Eigen::VectorXd residuals_y;
  Eigen::VectorXd residuals_t;
  bool has_intercept = false;

  std::vector<std::string> segment_codes;  // aligned with the one-hot ordering
  std::vector<long> n_treated;             // per segment; filled by estimate()
  std::vector<long> n_control;

  struct Diagnostics {
    double t_hat_min = 0;
    double t_hat_max = 0;
    double mean_residual_y = 0;
    double mean_residual_t = 0;
    long overlap_flags = 0;  // units with t_hat outside [0.05, 0.95]
  } diagnostics;
};

/// Least squares of y_tilde on z_i = t_tilde_i * phi(x_i). With exhaustive
/// one-hots and no intercept this decouples per segment:
/// beta_j = sum_j(y_tilde t_tilde) / sum_j(t_tilde^2). Covariance is the HC0
/// sandwich (Z'Z)^-1 (sum z z' e^2) (Z'Z)^-1.
DmlFit fit_final_stage(const Eigen::VectorXd& residuals_y, const Eigen::VectorXd& residuals_t,
                       const Eigen::MatrixXd& modifiers, const FinalStageOptions& options = {});

/// theta_hat(x) = phi(x)' beta for a valid one-hot x.
double cate_for(const DmlFit& fit, const std::vector<double>& x);

/// Table-1-shaped inference output.
struct CateReport {
  struct Row {
    std::string crop_code;
    double point = 0;
    double std_error = 0;
    double z_score = 0;
    double p_value = 0;
    double ci_low = 0;
    double ci_high = 0;
    long n_treated = 0;
    long n_control = 0;
  };
  double confidence = 0.95;
  std::vector<Row> rows;
  std::vector<std::string> warnings;

  std::string to_json() const;
  static CateReport from_json(const std::string& text);
};

CateReport inference(const DmlFit& fit, double confidence = 0.95);

struct EstimateConfig {
  int folds = 5;
  std::uint64_t seed = 0;
  bool stratified = true;
  double confidence = 0.95;
  LearnerSpec regressor{LearnerKind::rf_regressor};
  LearnerSpec classifier{LearnerKind::rf_classifier};
  bool final_intercept = false;
  bool hc1 = false;
  bool scale_per_fold = false;
  int threads = 1;
};

struct EstimateResult {
  DmlFit fit;
  CateReport report;
  NuisancePredictions nuisances;
  FoldPlan folds;
  std::vector<std::string> warnings;
};

/// Full pipeline on assembled, scaled units:
/// make_folds -> crossfit_nuisances -> residualize -> fit_final_stage ->
/// inference, with overlap diagnostics. Bit-reproducible given (units, config).
EstimateResult estimate(const std::vector<AnalysisUnit>& units, const SegmentVocabulary& vocabulary,
                        const EstimateConfig& config);

}  // namespace socdml
