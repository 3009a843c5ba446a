#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "socdml/types.hpp"

namespace socdml {

/// Column-wise standardization parameters. Scale is the population standard
/// deviation (divide by n); zero-variance columns get scale 1 so applying the
/// scaler maps them to zero instead of dividing by zero.
struct ScalerParams {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;

  std::string to_json() const;
  static ScalerParams from_json(const std::string& text);
};

/// Fits mean and population std per column. Throws EmptyMatrix on n = 0.
ScalerParams fit_scaler(const Eigen::MatrixXd& matrix);

/// (x - mean) / scale elementwise. Throws DimensionMismatch on column count.
Eigen::MatrixXd apply_scaler(const ScalerParams& params, const Eigen::MatrixXd& matrix);

/// Binary indicator vector at the crop's vocabulary position.
/// Throws UnknownCrop for codes outside the vocabulary.
std::vector<double> one_hot(const std::string& crop_code, const SegmentVocabulary& vocabulary);

}  // namespace socdml
