#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <variant>
#include <vector>

namespace socdml {

enum class LearnerKind { rf_regressor, rf_classifier, ridge_regressor, logistic_classifier };

/// Hyperparameters for every learner kind. Unused fields are ignored by the
/// kinds that do not need them.
struct LearnerSpec {
  LearnerKind kind = LearnerKind::rf_regressor;
  int n_trees = 200;
  int max_depth = -1;        // -1 = unlimited, 0 = root is a leaf
  int min_samples_leaf = 5;
  int mtry = 0;              // 0 = auto: ceil(sqrt(p)) classifier, ceil(p/3) regressor
  bool bootstrap = true;
  double ridge_lambda = 1e-3;
  int logistic_iterations = 100;
  std::uint64_t seed = 0;
  int threads = 1;           // tree-level parallelism; results do not depend on it
};

/// One CART node. feature == -1 marks a leaf; value is then the leaf mean
/// (regression) or the class-1 proportion (classification).
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;
};

struct Tree {
  std::vector<TreeNode> nodes;
  double predict_row(const Eigen::MatrixXd& features, Eigen::Index row) const;
};

struct Forest {
  std::vector<Tree> trees;
};

struct LinearModel {
  Eigen::VectorXd coef;
  double intercept = 0.0;
  bool logistic = false;
};

/// An immutable fitted model; shareable across threads.
class FittedLearner {
 public:
  FittedLearner(LearnerSpec spec, int n_features, double target_min, double target_max, Forest forest)
      : spec_(std::move(spec)), n_features_(n_features), target_min_(target_min),
        target_max_(target_max), model_(std::move(forest)) {}
  FittedLearner(LearnerSpec spec, int n_features, double target_min, double target_max, LinearModel linear)
      : spec_(std::move(spec)), n_features_(n_features), target_min_(target_min),
        target_max_(target_max), model_(std::move(linear)) {}

  const LearnerSpec& spec() const { return spec_; }
  int n_features() const { return n_features_; }
  double target_min() const { return target_min_; }
  double target_max() const { return target_max_; }
  bool is_forest() const { return std::holds_alternative<Forest>(model_); }
  const Forest& forest() const { return std::get<Forest>(model_); }
  const LinearModel& linear() const { return std::get<LinearModel>(model_); }

  /// Debug dump of the model state. Format is not stability-guaranteed.
  std::string dump_json() const;

 private:
  LearnerSpec spec_;
  int n_features_;
  double target_min_;
  double target_max_;
  std::variant<Forest, LinearModel> model_;
};

/// Random-forest regression with variance-reduction splits at midpoints of
/// consecutive sorted unique values. Deterministic given (spec.seed, data):
/// tree i draws from its own stream seeded by spec.seed and i.
FittedLearner fit_regressor(const LearnerSpec& spec, const Eigen::MatrixXd& features,
                            const Eigen::VectorXd& targets);

/// Same construction with Gini impurity; leaf value is the class-1 proportion
/// and the forest probability is the mean of leaf proportions over trees.
/// Throws SingleClass when all labels are equal.
FittedLearner fit_classifier(const LearnerSpec& spec, const Eigen::MatrixXd& features,
                             const Eigen::VectorXd& labels);

/// min ||y - (X b + c)||^2 + lambda ||b||^2 with unpenalized intercept c,
/// solved by normal equations on centered data.
FittedLearner fit_ridge(const LearnerSpec& spec, const Eigen::MatrixXd& features,
                        const Eigen::VectorXd& targets);

/// Binary logistic regression by damped Newton iterations; fixed iteration
/// cap, gradient-norm stop 1e-8.
FittedLearner fit_logistic(const LearnerSpec& spec, const Eigen::MatrixXd& features,
                           const Eigen::VectorXd& labels);

Eigen::VectorXd predict(const FittedLearner& model, const Eigen::MatrixXd& features);

// Type-erased trainers so cross-fitting can plug in forests, linear models,
// or test stubs interchangeably.
using Predictor = std::function<Eigen::VectorXd(const Eigen::MatrixXd&)>;
using Trainer = std::function<Predictor(const Eigen::MatrixXd&, const Eigen::VectorXd&)>;

Trainer make_regressor_trainer(const LearnerSpec& spec);
Trainer make_classifier_trainer(const LearnerSpec& spec);

}  // namespace socdml
