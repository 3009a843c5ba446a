#include "socdml/learners.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "json.hpp"
#include "socdml/errors.hpp"
#include "socdml/rng.hpp"

namespace socdml {
namespace {

struct SplitChoice {
  bool found = false;
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

// Split gain written so that, for a fixed node, maximizing it maximizes the
// impurity reduction exactly:
//   regression:  sum_l^2/n_l + sum_r^2/n_r  (SSE reduction + const)
//   gini:        (c1_l^2 + c0_l^2)/n_l + (c1_r^2 + c0_r^2)/n_r
// Both are symmetric under label swap, which keeps classifier splits
// identical when labels are complemented.

class TreeBuilder {
 public:
  TreeBuilder(const Eigen::MatrixXd& features, const Eigen::VectorXd& targets, bool classification,
              const LearnerSpec& spec, int mtry, Rng rng)
      : features_(features), targets_(targets), classification_(classification), spec_(spec),
        mtry_(mtry), rng_(std::move(rng)) {}

  Tree build(const std::vector<int>& root_indices) {
    Tree tree;
    grow(tree, root_indices, 0);
    return tree;
  }

 private:
  int grow(Tree& tree, const std::vector<int>& indices, int depth) {
    const int node_index = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();

    const int m = static_cast<int>(indices.size());
    const bool depth_capped = spec_.max_depth >= 0 && depth >= spec_.max_depth;
    SplitChoice split;
    if (!depth_capped && m >= 2 * spec_.min_samples_leaf && !pure(indices))
      split = best_split(indices);

    if (!split.found) {
      tree.nodes[node_index].value = leaf_value(indices);
      return node_index;
    }

    std::vector<int> left, right;
    left.reserve(indices.size());
    right.reserve(indices.size());
    for (int i : indices)
      (features_(i, split.feature) <= split.threshold ? left : right).push_back(i);

    tree.nodes[node_index].feature = split.feature;
    tree.nodes[node_index].threshold = split.threshold;
    const int l = grow(tree, left, depth + 1);
    const int r = grow(tree, right, depth + 1);
    tree.nodes[node_index].left = l;
    tree.nodes[node_index].right = r;
    return node_index;
  }

  bool pure(const std::vector<int>& indices) const {
    const double first = targets_[indices.front()];
    for (int i : indices)
      if (targets_[i] != first) return false;
    return true;
  }

  // Canonical accumulation order (sorted values) keeps the fitted tree
  // invariant under permutations of the training rows.
  double leaf_value(const std::vector<int>& indices) const {
    if (classification_) {
      long ones = 0;
      for (int i : indices)
        if (targets_[i] == 1.0) ++ones;
      return static_cast<double>(ones) / static_cast<double>(indices.size());
    }
    std::vector<double> values;
    values.reserve(indices.size());
    for (int i : indices) values.push_back(targets_[i]);
    std::sort(values.begin(), values.end());
    double sum = 0;
    for (double v : values) sum += v;
    return sum / static_cast<double>(values.size());
  }

  SplitChoice best_split(const std::vector<int>& indices) {
    const int p = static_cast<int>(features_.cols());
    std::vector<int> candidates;
    if (mtry_ >= p) {
      candidates.resize(static_cast<std::size_t>(p));
      for (int j = 0; j < p; ++j) candidates[static_cast<std::size_t>(j)] = j;
    } else {
      candidates = sample_without_replacement(rng_, p, mtry_);  // sorted ascending
    }

    const int m = static_cast<int>(indices.size());
    SplitChoice best;
    std::vector<std::pair<double, double>> pairs;  // (feature value, target)
    pairs.reserve(static_cast<std::size_t>(m));

    for (int feature : candidates) {
      pairs.clear();
      for (int i : indices) pairs.emplace_back(features_(i, feature), targets_[i]);
      std::sort(pairs.begin(), pairs.end());
      if (pairs.front().first == pairs.back().first) continue;

      if (classification_) {
        long total_ones = 0;
        for (const auto& pr : pairs)
          if (pr.second == 1.0) ++total_ones;
        long left_ones = 0;
        for (int s = 1; s < m; ++s) {
          if (pairs[static_cast<std::size_t>(s - 1)].second == 1.0) ++left_ones;
          if (pairs[static_cast<std::size_t>(s - 1)].first == pairs[static_cast<std::size_t>(s)].first) continue;
          const int n_l = s, n_r = m - s;
          if (n_l < spec_.min_samples_leaf || n_r < spec_.min_samples_leaf) continue;
          const double c1l = static_cast<double>(left_ones);
          const double c0l = static_cast<double>(n_l) - c1l;
          const double c1r = static_cast<double>(total_ones - left_ones);
          const double c0r = static_cast<double>(n_r) - c1r;
          const double gain =
              (c1l * c1l + c0l * c0l) / n_l + (c1r * c1r + c0r * c0r) / n_r;
          consider(best, gain, feature, s, pairs);
        }
      } else {
        double total_sum = 0;
        for (const auto& pr : pairs) total_sum += pr.second;
        double left_sum = 0;
        for (int s = 1; s < m; ++s) {
          left_sum += pairs[static_cast<std::size_t>(s - 1)].second;
          if (pairs[static_cast<std::size_t>(s - 1)].first == pairs[static_cast<std::size_t>(s)].first) continue;
          const int n_l = s, n_r = m - s;
          if (n_l < spec_.min_samples_leaf || n_r < spec_.min_samples_leaf) continue;
          const double right_sum = total_sum - left_sum;
          const double gain = left_sum * left_sum / n_l + right_sum * right_sum / n_r;
          consider(best, gain, feature, s, pairs);
        }
      }
    }
    return best;
  }

  // Candidates arrive in ascending (feature, threshold) order, so a strict
  // comparison breaks ties toward the lowest feature index, then the lowest
  // threshold.
  void consider(SplitChoice& best, double gain, int feature, int split_pos,
                const std::vector<std::pair<double, double>>& pairs) const {
    if (best.found && gain <= best.gain) return;
    best.found = true;
    best.feature = feature;
    best.gain = gain;
    best.threshold = 0.5 * (pairs[static_cast<std::size_t>(split_pos - 1)].first +
                            pairs[static_cast<std::size_t>(split_pos)].first);
  }

  const Eigen::MatrixXd& features_;
  const Eigen::VectorXd& targets_;
  bool classification_;
  const LearnerSpec& spec_;
  int mtry_;
  Rng rng_;
};

void validate_spec(const LearnerSpec& spec, Eigen::Index p) {
  if (spec.n_trees < 1) throw Error(errc::invalid_config, "n_trees must be >= 1");
  if (spec.min_samples_leaf < 1) throw Error(errc::invalid_config, "min_samples_leaf must be >= 1");
  if (spec.mtry < 0 || spec.mtry > p)
    throw Error(errc::invalid_config, "mtry must be in [1, p] (or 0 for auto)");
  if (spec.ridge_lambda < 0) throw Error(errc::invalid_config, "ridge_lambda must be >= 0");
}

int resolve_mtry(const LearnerSpec& spec, Eigen::Index p, bool classification) {
  if (spec.mtry > 0) return spec.mtry;
  const double raw = classification ? std::sqrt(static_cast<double>(p)) : static_cast<double>(p) / 3.0;
  return std::max(1, static_cast<int>(std::ceil(raw)));
}

FittedLearner fit_forest(const LearnerSpec& spec, const Eigen::MatrixXd& features,
                         const Eigen::VectorXd& targets, bool classification) {
  const Eigen::Index n = features.rows();
  if (n == 0 || targets.size() == 0) throw Error(errc::degenerate_input, "no training rows");
  if (targets.size() != n) throw Error(errc::dimension_mismatch, "targets/features row mismatch");
  validate_spec(spec, features.cols());
  if (classification) {
    bool has0 = false, has1 = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (targets[i] == 0.0)
        has0 = true;
      else if (targets[i] == 1.0)
        has1 = true;
      else
        throw Error(errc::invalid_config, "classifier labels must be 0 or 1");
    }
    if (!has0 || !has1) throw Error(errc::single_class, "all labels equal; no treatment contrast");
  }

  const int mtry = resolve_mtry(spec, features.cols(), classification);
  Forest forest;
  forest.trees.resize(static_cast<std::size_t>(spec.n_trees));

  auto build_one = [&](int t) {
    Rng rng(mix_seed(spec.seed, static_cast<std::uint64_t>(t)));
    std::vector<int> indices;
    indices.reserve(static_cast<std::size_t>(n));
    if (spec.bootstrap) {
      for (Eigen::Index i = 0; i < n; ++i)
        indices.push_back(static_cast<int>(next_below(rng, static_cast<std::uint64_t>(n))));
    } else {
      for (Eigen::Index i = 0; i < n; ++i) indices.push_back(static_cast<int>(i));
    }
    TreeBuilder builder(features, targets, classification, spec, mtry, std::move(rng));
    forest.trees[static_cast<std::size_t>(t)] = builder.build(indices);
  };

  const int workers = std::max(1, spec.threads);
  if (workers == 1 || spec.n_trees == 1) {
    for (int t = 0; t < spec.n_trees; ++t) build_one(t);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    const int k = std::min(workers, spec.n_trees);
    pool.reserve(static_cast<std::size_t>(k));
    for (int w = 0; w < k; ++w)
      pool.emplace_back([&] {
        for (;;) {
          const int t = next.fetch_add(1);
          if (t >= spec.n_trees) break;
          build_one(t);
        }
      });
    for (auto& th : pool) th.join();
  }

  return FittedLearner(spec, static_cast<int>(features.cols()), targets.minCoeff(), targets.maxCoeff(),
                       std::move(forest));
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

double Tree::predict_row(const Eigen::MatrixXd& features, Eigen::Index row) const {
  int node = 0;
  while (nodes[static_cast<std::size_t>(node)].feature >= 0) {
    const TreeNode& nd = nodes[static_cast<std::size_t>(node)];
    node = features(row, nd.feature) <= nd.threshold ? nd.left : nd.right;
  }
  return nodes[static_cast<std::size_t>(node)].value;
}

FittedLearner fit_regressor(const LearnerSpec& spec, const Eigen::MatrixXd& features,
                            const Eigen::VectorXd& targets) {
  return fit_forest(spec, features, targets, false);
}

FittedLearner fit_classifier(const LearnerSpec& spec, const Eigen::MatrixXd& features,
                             const Eigen::VectorXd& labels) {
  return fit_forest(spec, features, labels, true);
}

FittedLearner fit_ridge(const LearnerSpec& spec, const Eigen::MatrixXd& features,
                        const Eigen::VectorXd& targets) {
  const Eigen::Index n = features.rows();
  const Eigen::Index p = features.cols();
  if (n == 0) throw Error(errc::degenerate_input, "no training rows");
  if (targets.size() != n) throw Error(errc::dimension_mismatch, "targets/features row mismatch");
  if (spec.ridge_lambda < 0) throw Error(errc::invalid_config, "ridge_lambda must be >= 0");

  const Eigen::RowVectorXd x_mean = features.colwise().mean();
  const double y_mean = targets.mean();
  const Eigen::MatrixXd xc = features.rowwise() - x_mean;
  const Eigen::VectorXd yc = targets.array() - y_mean;

  Eigen::MatrixXd gram = xc.transpose() * xc;
  gram.diagonal().array() += spec.ridge_lambda;
  const Eigen::VectorXd rhs = xc.transpose() * yc;

  const Eigen::LDLT<Eigen::MatrixXd> solver(gram);
  Eigen::VectorXd beta = solver.solve(rhs);
  const double residual = (gram * beta - rhs).norm();
  if (!(residual <= 1e-8 * (rhs.norm() + 1.0)))
    throw Error(errc::singular_system, "normal equations are rank-deficient (lambda = 0?)");

  LinearModel model;
  model.coef = std::move(beta);
  model.intercept = y_mean - x_mean.dot(model.coef);
  model.logistic = false;
  return FittedLearner(spec, static_cast<int>(p), targets.minCoeff(), targets.maxCoeff(),
                       std::move(model));
}

FittedLearner fit_logistic(const LearnerSpec& spec, const Eigen::MatrixXd& features,
                           const Eigen::VectorXd& labels) {
  const Eigen::Index n = features.rows();
  const Eigen::Index p = features.cols();
  if (n == 0) throw Error(errc::degenerate_input, "no training rows");
  if (labels.size() != n) throw Error(errc::dimension_mismatch, "labels/features row mismatch");
  bool has0 = false, has1 = false;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (labels[i] == 0.0)
      has0 = true;
    else if (labels[i] == 1.0)
      has1 = true;
    else
      throw Error(errc::invalid_config, "classifier labels must be 0 or 1");
  }
  if (!has0 || !has1) throw Error(errc::single_class, "all labels equal; no treatment contrast");

  Eigen::MatrixXd design(n, p + 1);
  design.col(0).setOnes();
  design.rightCols(p) = features;
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(p + 1);

  auto nll = [&](const Eigen::VectorXd& th) {
    const Eigen::VectorXd z = design * th;
    double total = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      // log(1 + e^z) - y z, in the overflow-safe form
      const double zi = z[i];
      total += (zi > 0 ? zi + std::log1p(std::exp(-zi)) : std::log1p(std::exp(zi))) - labels[i] * zi;
    }
    return total;
  };

  double current = nll(theta);
  for (int iter = 0; iter < spec.logistic_iterations; ++iter) {
    const Eigen::VectorXd z = design * theta;
    Eigen::VectorXd prob(n), weight(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      prob[i] = sigmoid(z[i]);
      weight[i] = prob[i] * (1.0 - prob[i]);
    }
    const Eigen::VectorXd grad = design.transpose() * (prob - labels);
    if (grad.lpNorm<Eigen::Infinity>() <= 1e-8) break;
    Eigen::MatrixXd hess = design.transpose() * weight.asDiagonal() * design;
    hess.diagonal().array() += 1e-10;  // collinear one-hots + intercept
    const Eigen::VectorXd direction = Eigen::LDLT<Eigen::MatrixXd>(hess).solve(grad);

    double step = 1.0;
    Eigen::VectorXd trial = theta - step * direction;
    double trial_nll = nll(trial);
    while (trial_nll > current && step > 1e-6) {
      step *= 0.5;
      trial = theta - step * direction;
      trial_nll = nll(trial);
    }
    if (trial_nll > current) break;  // no descent left
    theta = trial;
    current = trial_nll;
  }

  LinearModel model;
  model.coef = theta.tail(p);
  model.intercept = theta[0];
  model.logistic = true;
  return FittedLearner(spec, static_cast<int>(p), 0.0, 1.0, std::move(model));
}

Eigen::VectorXd predict(const FittedLearner& model, const Eigen::MatrixXd& features) {
  if (features.cols() != model.n_features())
    throw Error(errc::dimension_mismatch,
                "model fitted on " + std::to_string(model.n_features()) + " features, got " +
                    std::to_string(features.cols()));
  const Eigen::Index m = features.rows();
  Eigen::VectorXd out(m);
  if (model.is_forest()) {
    const auto& trees = model.forest().trees;
    for (Eigen::Index i = 0; i < m; ++i) {
      double sum = 0;
      for (const auto& tree : trees) sum += tree.predict_row(features, i);
      out[i] = sum / static_cast<double>(trees.size());
    }
  } else {
    const LinearModel& lin = model.linear();
    out = (features * lin.coef).array() + lin.intercept;
    if (lin.logistic)
      for (Eigen::Index i = 0; i < m; ++i) out[i] = sigmoid(out[i]);
  }
  return out;
}

std::string FittedLearner::dump_json() const {
  nlohmann::json j;
  j["n_features"] = n_features_;
  if (is_forest()) {
    nlohmann::json trees = nlohmann::json::array();
    for (const auto& tree : forest().trees) {
      nlohmann::json nodes = nlohmann::json::array();
      for (const auto& nd : tree.nodes)
        nodes.push_back({{"feature", nd.feature},
                         {"threshold", nd.threshold},
                         {"left", nd.left},
                         {"right", nd.right},
                         {"value", nd.value}});
      trees.push_back(std::move(nodes));
    }
    j["trees"] = std::move(trees);
  } else {
    const auto& lin = linear();
    j["coef"] = std::vector<double>(lin.coef.begin(), lin.coef.end());
    j["intercept"] = lin.intercept;
    j["logistic"] = lin.logistic;
  }
  return j.dump();
}

Trainer make_regressor_trainer(const LearnerSpec& spec) {
  return [spec](const Eigen::MatrixXd& features, const Eigen::VectorXd& targets) -> Predictor {
    auto fitted = std::make_shared<FittedLearner>(
        spec.kind == LearnerKind::ridge_regressor ? fit_ridge(spec, features, targets)
                                                  : fit_regressor(spec, features, targets));
    return [fitted](const Eigen::MatrixXd& rows) { return predict(*fitted, rows); };
  };
}

Trainer make_classifier_trainer(const LearnerSpec& spec) {
  return [spec](const Eigen::MatrixXd& features, const Eigen::VectorXd& labels) -> Predictor {
    auto fitted = std::make_shared<FittedLearner>(
        spec.kind == LearnerKind::logistic_classifier ? fit_logistic(spec, features, labels)
                                                      : fit_classifier(spec, features, labels));
    return [fitted](const Eigen::MatrixXd& rows) { return predict(*fitted, rows); };
  };
}

}  // namespace socdml
