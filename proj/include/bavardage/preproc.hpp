#pragma once

#include <optional>
#include <vector>

#include "bavardage/featurestore.hpp"

namespace bavardage {

/// Feature preprocessing applied to base and novel rows alike.
/// Default is center-then-L2-normalize.
struct PreprocConfig {
  bool center = true;
  bool l2_normalize = true;
  std::optional<double> power_beta;  // |x|^beta * sign(x), 0 < beta <= 1

  void validate() const;
};

struct PreprocResult {
  Matrix features;
  std::vector<bool> zero_norm;  // row left unnormalized because its norm was 0
};

/// Element-wise signed power transform; identity when beta is absent.
Matrix power_transform(const Matrix& features, std::optional<double> beta);

/// Mean of the power-transformed base rows, the centering vector for
/// `preprocess`.
Vector preprocessing_mean(const Matrix& base_features, const PreprocConfig& cfg);

/// power transform -> subtract base_mean -> L2 normalize, row by row.
PreprocResult preprocess(const Matrix& features, const Vector& base_mean, const PreprocConfig& cfg);

/// Both splits mapped into the same preprocessed space, plus the base
/// statistics computed there.
struct PreparedSplits {
  FeatureBundle base;
  FeatureBundle novel;
  BaseStatistics stats;
  Vector centering_mean;
};

PreparedSplits prepare_splits(const FeatureBundle& base, const FeatureBundle& novel,
                              const PreprocConfig& cfg);

}  // namespace bavardage
