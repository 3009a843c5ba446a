#include "socdml/preprocess.hpp"

#include <cmath>

#include "json.hpp"
#include "socdml/errors.hpp"

namespace socdml {

using nlohmann::json;

ScalerParams fit_scaler(const Eigen::MatrixXd& matrix) {
  const auto n = matrix.rows();
  const auto p = matrix.cols();
  if (n == 0) throw Error(errc::empty_matrix, "cannot fit scaler on empty matrix");

  ScalerParams params;
  params.mean = matrix.colwise().mean();
  params.scale.resize(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    const double var = (matrix.col(j).array() - params.mean[j]).square().sum() / static_cast<double>(n);
    const double sd = std::sqrt(var);
    params.scale[j] = sd > 0.0 ? sd : 1.0;
  }
  return params;
}

Eigen::MatrixXd apply_scaler(const ScalerParams& params, const Eigen::MatrixXd& matrix) {
  if (matrix.cols() != params.mean.size())
    throw Error(errc::dimension_mismatch,
                "scaler fitted on " + std::to_string(params.mean.size()) + " columns, got " +
                    std::to_string(matrix.cols()));
  Eigen::MatrixXd out = matrix;
  for (Eigen::Index j = 0; j < out.cols(); ++j)
    out.col(j) = (out.col(j).array() - params.mean[j]) / params.scale[j];
  return out;
}

std::vector<double> one_hot(const std::string& crop_code, const SegmentVocabulary& vocabulary) {
  const int idx = vocabulary.index_of(crop_code);
  if (idx < 0) throw Error(errc::unknown_crop, "crop '" + crop_code + "' not in segment vocabulary");
  std::vector<double> out(vocabulary.size(), 0.0);
  out[static_cast<std::size_t>(idx)] = 1.0;
  return out;
}

std::string ScalerParams::to_json() const {
  json j{{"mean", std::vector<double>(mean.begin(), mean.end())},
         {"scale", std::vector<double>(scale.begin(), scale.end())}};
  return j.dump(2);
}

ScalerParams ScalerParams::from_json(const std::string& text) {
  json j = json::parse(text);
  auto mean = j.at("mean").get<std::vector<double>>();
  auto scale = j.at("scale").get<std::vector<double>>();
  ScalerParams params;
  params.mean = Eigen::Map<Eigen::VectorXd>(mean.data(), static_cast<Eigen::Index>(mean.size()));
  params.scale = Eigen::Map<Eigen::VectorXd>(scale.data(), static_cast<Eigen::Index>(scale.size()));
  return params;
}

}  // namespace socdml
