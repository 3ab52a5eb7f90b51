#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "bavardage/numerics.hpp"

namespace bavardage {

enum class SplitTag { base, validation, novel };

std::string_view to_string(SplitTag tag);
SplitTag split_from_string(std::string_view name);

/// Labelled feature matrix of one dataset split.
///
/// Labels are opaque strings on disk; `label_ids` maps each row to a dense
/// class id in [0, class_names.size()), ids assigned in order of first
/// appearance. All arithmetic downstream is double precision regardless of
/// the stored dtype.
struct FeatureBundle {
  Matrix features;                              // N x D
  std::vector<int> label_ids;                   // length N
  std::vector<std::string> class_names;         // id -> label
  std::vector<std::vector<Eigen::Index>> class_index;  // id -> rows
  SplitTag split = SplitTag::novel;

  Eigen::Index rows() const { return features.rows(); }
  Eigen::Index dim() const { return features.cols(); }
  std::size_t num_classes() const { return class_names.size(); }
  std::string label(Eigen::Index row) const {
    return class_names[static_cast<std::size_t>(label_ids[static_cast<std::size_t>(row)])];
  }
};

/// Builds a bundle from string labels, deriving ids and class_index.
/// Throws BundleError on empty input, length mismatch or non-finite values.
FeatureBundle make_bundle(Matrix features, const std::vector<std::string>& labels,
                          SplitTag split);

/// Re-checks the FeatureBundle invariants; throws BundleError on violation.
void validate_bundle(const FeatureBundle& bundle);

/// Loads either a JSON manifest (with its sibling raw data file) or, for a
/// path ending in `.csv`, rows of `label,v0,v1,...`.
FeatureBundle load_bundle(const std::filesystem::path& path);

enum class StorageType { f32, f64 };

/// Writes `<stem>.json` + `<stem>.bin` under `dir`; returns the manifest path.
std::filesystem::path save_bundle(const FeatureBundle& bundle,
                                  const std::filesystem::path& dir,
                                  const std::string& stem,
                                  StorageType dtype = StorageType::f32);

void save_bundle_csv(const FeatureBundle& bundle, const std::filesystem::path& path);

struct BaseStatistics {
  Vector mean;                   // grand mean of all rows
  Matrix scatter;                // pooled within-class scatter / N_base
  Matrix per_class_means;        // classes x D, row c = mean of class c
  std::size_t sample_count = 0;
};

/// Pooled within-class scatter sum_c sum_{i in c} (x_i - m_c)(x_i - m_c)^T / N.
/// Requires a base-split bundle.
BaseStatistics compute_base_statistics(const FeatureBundle& bundle);

}  // namespace bavardage
