#include "bavardage/preproc.hpp"

#include <cmath>

#include "bavardage/error.hpp"

namespace bavardage {

void PreprocConfig::validate() const {
  if (power_beta && !(*power_beta > 0.0 && *power_beta <= 1.0))
    throw Error("bad_config", "power_beta must lie in (0, 1]");
}

Matrix power_transform(const Matrix& features, std::optional<double> beta) {
  if (!beta) return features;
  const double b = *beta;
  return features.unaryExpr([b](double x) { return std::copysign(std::pow(std::abs(x), b), x); });
}

Vector preprocessing_mean(const Matrix& base_features, const PreprocConfig& cfg) {
  cfg.validate();
  return power_transform(base_features, cfg.power_beta).colwise().mean().transpose();
}

PreprocResult preprocess(const Matrix& features, const Vector& base_mean, const PreprocConfig& cfg) {
  cfg.validate();
  if (cfg.center && base_mean.size() != features.cols())
    throw Error("dimension_mismatch", "base mean has length " + std::to_string(base_mean.size()) +
                                          " but features have " + std::to_string(features.cols()) +
                                          " columns");

  PreprocResult out{power_transform(features, cfg.power_beta),
                    std::vector<bool>(static_cast<std::size_t>(features.rows()), false)};
  if (cfg.center) out.features.rowwise() -= base_mean.transpose();
  if (cfg.l2_normalize) {
    for (Eigen::Index r = 0; r < out.features.rows(); ++r) {
      const double norm = out.features.row(r).norm();
      if (norm > 0.0) out.features.row(r) /= norm;
      else out.zero_norm[static_cast<std::size_t>(r)] = true;
    }
  }
  return out;
}

PreparedSplits prepare_splits(const FeatureBundle& base, const FeatureBundle& novel,
                              const PreprocConfig& cfg) {
  if (base.dim() != novel.dim())
    throw Error("dimension_mismatch", "base features have dimension " + std::to_string(base.dim()) +
                                          ", novel features " + std::to_string(novel.dim()));
  PreparedSplits out{base, novel, {}, preprocessing_mean(base.features, cfg)};
  out.base.features = preprocess(base.features, out.centering_mean, cfg).features;
  out.novel.features = preprocess(novel.features, out.centering_mean, cfg).features;
  out.base.split = SplitTag::base;
  out.stats = compute_base_statistics(out.base);
  return out;
}

}  // namespace bavardage
