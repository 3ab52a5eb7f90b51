#include "bavardage/featurestore.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "bavardage/error.hpp"

namespace bavardage {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(SplitTag tag) {
  switch (tag) {
    case SplitTag::base: return "base";
    case SplitTag::validation: return "validation";
    case SplitTag::novel: return "novel";
  }
  return "novel";
}

SplitTag split_from_string(std::string_view name) {
  if (name == "base") return SplitTag::base;
  if (name == "validation") return SplitTag::validation;
  if (name == "novel") return SplitTag::novel;
  throw BundleError("bad_manifest", "split", "unknown split tag '" + std::string(name) + "'");
}

namespace {

void check_finite(const Matrix& features) {
  for (Eigen::Index r = 0; r < features.rows(); ++r)
    for (Eigen::Index c = 0; c < features.cols(); ++c)
      if (!std::isfinite(features(r, c))) {
        const std::string where = "row " + std::to_string(r) + ", column " + std::to_string(c);
        throw BundleError("non_finite", where, "non-finite feature value at " + where);
      }
}

template <typename T>
T from_little_endian(T value) {
  if constexpr (std::endian::native == std::endian::little) {
    return value;
  } else {
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
    std::memcpy(&value, bytes, sizeof(T));
    return value;
  }
}

template <typename T>
Matrix read_raw(const fs::path& file, std::int64_t n, std::int64_t d) {
  std::error_code ec;
  const auto bytes = fs::file_size(file, ec);
  if (ec) throw BundleError("missing_file", "data_file", "cannot open data file " + file.string());
  const auto expected = static_cast<std::uintmax_t>(n) * static_cast<std::uintmax_t>(d) * sizeof(T);
  if (bytes != expected) {
    std::ostringstream msg;
    msg << "data file " << file.string() << " holds " << bytes << " bytes, manifest n=" << n
        << " d=" << d << " requires " << expected;
    if (d > 0 && bytes % (static_cast<std::uintmax_t>(d) * sizeof(T)) == 0)
      msg << " (file has " << bytes / (static_cast<std::uintmax_t>(d) * sizeof(T)) << " rows)";
    throw BundleError("length_mismatch", "data_file", msg.str());
  }

  std::ifstream in(file, std::ios::binary);
  if (!in) throw BundleError("missing_file", "data_file", "cannot open data file " + file.string());
  std::vector<T> raw(static_cast<std::size_t>(n * d));
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(expected));
  if (!in) throw BundleError("length_mismatch", "data_file", "short read on " + file.string());

  Matrix out(n, d);
  std::size_t i = 0;
  for (std::int64_t r = 0; r < n; ++r)
    for (std::int64_t c = 0; c < d; ++c) out(r, c) = static_cast<double>(from_little_endian(raw[i++]));
  return out;
}

template <typename T>
const json& require(const json& manifest, const char* key) {
  if (!manifest.contains(key))
    throw BundleError("bad_manifest", key, std::string("manifest lacks '") + key + "'");
  const json& v = manifest.at(key);
  bool ok = false;
  if constexpr (std::is_same_v<T, std::int64_t>) ok = v.is_number_integer();
  if constexpr (std::is_same_v<T, std::string>) ok = v.is_string();
  if constexpr (std::is_same_v<T, json>) ok = v.is_array();
  if (!ok) throw BundleError("bad_manifest", key, std::string("manifest field '") + key + "' has the wrong type");
  return v;
}

FeatureBundle load_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw BundleError("missing_file", "manifest", "cannot open manifest " + path.string());
  json manifest;
  try {
    in >> manifest;
  } catch (const json::exception& e) {
    throw BundleError("bad_manifest", "manifest", "manifest is not valid JSON: " + std::string(e.what()));
  }
  if (!manifest.is_object()) throw BundleError("bad_manifest", "manifest", "manifest must be a JSON object");

  const auto version = require<std::int64_t>(manifest, "version").get<std::int64_t>();
  if (version != 1)
    throw BundleError("unsupported_version", "version",
                      "unsupported bundle format version " + std::to_string(version));
  const auto n = require<std::int64_t>(manifest, "n").get<std::int64_t>();
  const auto d = require<std::int64_t>(manifest, "d").get<std::int64_t>();
  if (n < 1) throw BundleError("empty", "n", "bundle must hold at least one row");
  if (d < 1) throw BundleError("bad_manifest", "d", "feature dimension must be positive");
  const auto dtype = require<std::string>(manifest, "dtype").get<std::string>();
  const auto& labels_json = require<json>(manifest, "labels");
  if (static_cast<std::int64_t>(labels_json.size()) != n)
    throw BundleError("length_mismatch", "labels",
                      "manifest declares n=" + std::to_string(n) + " but lists " +
                          std::to_string(labels_json.size()) + " labels");
  std::vector<std::string> labels;
  labels.reserve(labels_json.size());
  for (const auto& l : labels_json) {
    if (l.is_string()) labels.push_back(l.get<std::string>());
    else if (l.is_number_integer()) labels.push_back(std::to_string(l.get<std::int64_t>()));
    else throw BundleError("bad_manifest", "labels", "labels must be strings or integers");
  }

  const fs::path data_file = path.parent_path() / require<std::string>(manifest, "data_file").get<std::string>();
  if (!fs::exists(data_file))
    throw BundleError("missing_file", "data_file", "data file " + data_file.string() + " does not exist");

  Matrix features;
  if (dtype == "f32") features = read_raw<float>(data_file, n, d);
  else if (dtype == "f64") features = read_raw<double>(data_file, n, d);
  else throw BundleError("bad_dtype", "dtype", "unsupported dtype '" + dtype + "'");

  SplitTag split = SplitTag::novel;
  if (manifest.contains("split")) split = split_from_string(manifest.at("split").get<std::string>());
  return make_bundle(std::move(features), labels, split);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

bool parse_double(const std::string& text, double& out) {
  const char* begin = text.c_str();
  while (*begin == ' ' || *begin == '\t') ++begin;
  char* end = nullptr;
  out = std::strtod(begin, &end);
  if (end == begin) return false;
  while (*end == ' ' || *end == '\t' || *end == '\r') ++end;
  return *end == '\0';
}

FeatureBundle load_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw BundleError("missing_file", "path", "cannot open " + path.string());

  std::vector<std::string> labels;
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() < 2)
      throw BundleError("bad_csv", "line " + std::to_string(line_no), "CSV row needs a label and at least one value");
    std::vector<double> values(fields.size() - 1);
    bool numeric = true;
    for (std::size_t i = 1; i < fields.size(); ++i) numeric = numeric && parse_double(fields[i], values[i - 1]);
    if (!numeric) {
      if (rows.empty() && labels.empty()) continue;  // header
      throw BundleError("bad_csv", "line " + std::to_string(line_no), "unparseable value on CSV line " + std::to_string(line_no));
    }
    if (!rows.empty() && values.size() != rows.front().size())
      throw BundleError("length_mismatch", "line " + std::to_string(line_no),
                        "CSV line " + std::to_string(line_no) + " has " + std::to_string(values.size()) +
                            " values, expected " + std::to_string(rows.front().size()));
    labels.push_back(fields[0]);
    rows.push_back(std::move(values));
  }
  if (rows.empty()) throw BundleError("empty", "path", "CSV file " + path.string() + " holds no rows");

  Matrix features(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c)
      features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  return make_bundle(std::move(features), labels, SplitTag::novel);
}

}  // namespace

FeatureBundle make_bundle(Matrix features, const std::vector<std::string>& labels, SplitTag split) {
  if (features.rows() < 1) throw BundleError("empty", "n", "bundle must hold at least one row");
  if (features.cols() < 1) throw BundleError("bad_manifest", "d", "feature dimension must be positive");
  if (static_cast<std::size_t>(features.rows()) != labels.size())
    throw BundleError("length_mismatch", "labels",
                      std::to_string(features.rows()) + " feature rows but " + std::to_string(labels.size()) + " labels");
  check_finite(features);

  FeatureBundle bundle;
  bundle.features = std::move(features);
  bundle.split = split;
  bundle.label_ids.reserve(labels.size());
  std::unordered_map<std::string, int> ids;
  for (std::size_t r = 0; r < labels.size(); ++r) {
    auto [it, inserted] = ids.try_emplace(labels[r], static_cast<int>(bundle.class_names.size()));
    if (inserted) {
      bundle.class_names.push_back(labels[r]);
      bundle.class_index.emplace_back();
    }
    bundle.label_ids.push_back(it->second);
    bundle.class_index[static_cast<std::size_t>(it->second)].push_back(static_cast<Eigen::Index>(r));
  }
  return bundle;
}

void validate_bundle(const FeatureBundle& bundle) {
  if (bundle.rows() < 1) throw BundleError("empty", "n", "bundle must hold at least one row");
  if (bundle.label_ids.size() != static_cast<std::size_t>(bundle.rows()))
    throw BundleError("length_mismatch", "labels", "label count differs from row count");
  if (bundle.class_index.size() != bundle.class_names.size())
    throw BundleError("bad_index", "class_index", "class_index and class_names differ in size");
  std::vector<int> seen(static_cast<std::size_t>(bundle.rows()), 0);
  for (std::size_t c = 0; c < bundle.class_index.size(); ++c) {
    if (bundle.class_index[c].empty())
      throw BundleError("bad_index", "class_index", "class '" + bundle.class_names[c] + "' has no samples");
    for (auto r : bundle.class_index[c]) {
      if (r < 0 || r >= bundle.rows() || bundle.label_ids[static_cast<std::size_t>(r)] != static_cast<int>(c))
        throw BundleError("bad_index", "class_index", "class_index entry disagrees with labels");
      ++seen[static_cast<std::size_t>(r)];
    }
  }
  for (std::size_t r = 0; r < seen.size(); ++r)
    if (seen[r] != 1)
      throw BundleError("bad_index", "class_index", "row " + std::to_string(r) + " is not indexed exactly once");
  check_finite(bundle.features);
}

FeatureBundle load_bundle(const fs::path& path) {
  if (!fs::exists(path)) throw BundleError("missing_file", "path", "no such file: " + path.string());
  if (path.extension() == ".csv") return load_csv(path);
  return load_manifest(path);
}

fs::path save_bundle(const FeatureBundle& bundle, const fs::path& dir, const std::string& stem, StorageType dtype) {
  fs::create_directories(dir);
  const fs::path data_path = dir / (stem + ".bin");
  const fs::path manifest_path = dir / (stem + ".json");

  std::ofstream data(data_path, std::ios::binary);
  if (!data) throw BundleError("missing_file", "data_file", "cannot write " + data_path.string());
  for (Eigen::Index r = 0; r < bundle.rows(); ++r)
    for (Eigen::Index c = 0; c < bundle.dim(); ++c) {
      if (dtype == StorageType::f32) {
        const float v = from_little_endian(static_cast<float>(bundle.features(r, c)));
        data.write(reinterpret_cast<const char*>(&v), sizeof v);
      } else {
        const double v = from_little_endian(bundle.features(r, c));
        data.write(reinterpret_cast<const char*>(&v), sizeof v);
      }
    }

  json labels = json::array();
  for (Eigen::Index r = 0; r < bundle.rows(); ++r) labels.push_back(bundle.label(r));
  const json manifest = {
      {"version", 1},
      {"n", bundle.rows()},
      {"d", bundle.dim()},
      {"dtype", dtype == StorageType::f32 ? "f32" : "f64"},
      {"labels", labels},
      {"data_file", data_path.filename().string()},
      {"split", std::string(to_string(bundle.split))},
  };
  std::ofstream out(manifest_path);
  if (!out) throw BundleError("missing_file", "manifest", "cannot write " + manifest_path.string());
  out << manifest.dump() << '\n';
  return manifest_path;
}

void save_bundle_csv(const FeatureBundle& bundle, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw BundleError("missing_file", "path", "cannot write " + path.string());
  out.precision(17);
  for (Eigen::Index r = 0; r < bundle.rows(); ++r) {
    out << bundle.label(r);
    for (Eigen::Index c = 0; c < bundle.dim(); ++c) out << ',' << bundle.features(r, c);
    out << '\n';
  }
}

BaseStatistics compute_base_statistics(const FeatureBundle& bundle) {
  if (bundle.rows() < 1) throw Error("empty", "cannot compute statistics of an empty bundle");
  if (bundle.split != SplitTag::base)
    throw Error("wrong_split", "base statistics require a bundle tagged 'base', got '" +
                                   std::string(to_string(bundle.split)) + "'");

  const Eigen::Index d = bundle.dim();
  BaseStatistics stats;
  stats.sample_count = static_cast<std::size_t>(bundle.rows());
  stats.mean = bundle.features.colwise().mean().transpose();
  stats.scatter = Matrix::Zero(d, d);
  stats.per_class_means = Matrix::Zero(static_cast<Eigen::Index>(bundle.num_classes()), d);

  for (std::size_t c = 0; c < bundle.num_classes(); ++c) {
    const auto& rows = bundle.class_index[c];
    Matrix members(static_cast<Eigen::Index>(rows.size()), d);
    for (std::size_t i = 0; i < rows.size(); ++i) members.row(static_cast<Eigen::Index>(i)) = bundle.features.row(rows[i]);
    const Eigen::RowVectorXd class_mean = members.colwise().mean();
    stats.per_class_means.row(static_cast<Eigen::Index>(c)) = class_mean;
    members.rowwise() -= class_mean;
    stats.scatter.noalias() += members.transpose() * members;
  }
  stats.scatter /= static_cast<double>(bundle.rows());
  stats.scatter = 0.5 * (stats.scatter + stats.scatter.transpose()).eval();
  return stats;
}

}  // namespace bavardage
