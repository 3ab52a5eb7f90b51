#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace bavardage {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

namespace numerics {

/// Digamma function psi(x) = d/dx log Gamma(x) for x > 0.
///
/// Shifts the argument above 10 with psi(x) = psi(x+1) - 1/x and finishes
/// with the asymptotic expansion. Throws Error("domain") for x <= 0 or NaN.
double digamma(double x);

/// log Gamma(x) for x > 0 that does not touch the global `signgam`.
double log_gamma(double x);

struct EigenDecomposition {
  Vector values;   // descending
  Matrix vectors;  // column i pairs with values[i]
};

/// Dense symmetric eigendecomposition, eigenvalues sorted in descending order.
/// Each eigenvector is signed so its largest-magnitude entry is positive.
/// Throws Error("not_symmetric") if |A - A^T| exceeds 1e-6 anywhere and
/// Error("no_convergence") if the solver fails.
EigenDecomposition sym_eigh(const Matrix& a);

/// Flip each column so that its largest-magnitude entry (first on ties) is
/// positive.
void canonicalize_signs(Matrix& columns);

/// Row-wise softmax computed in log space: row r -> exp(r - logsumexp(r)).
Matrix normalize_log_rows(const Matrix& logits);

/// Index of the largest entry, lowest index on ties.
Eigen::Index argmax(const Eigen::Ref<const Eigen::RowVectorXd>& row);

// ---------------------------------------------------------------------------
// Random numbers
//
// The engine is std::mt19937_64, whose output sequence is fixed by the
// standard. The std::*_distribution adaptors are not, so the draws below are
// implemented here to keep runs identical across standard libraries.

inline constexpr std::string_view kRngAlgorithm =
    "mt19937_64 seeded by splitmix64(seed, stream); "
    "uniform=53-bit, normal=Marsaglia polar, gamma=Marsaglia-Tsang";

std::uint64_t splitmix64(std::uint64_t x);

/// Seed for an independent stream, e.g. one per task index.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  Rng(std::uint64_t seed, std::uint64_t stream)
      : engine_(stream_seed(seed, stream)) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1).
  double uniform();

  /// Uniform integer on [0, n); n > 0.
  std::uint64_t uniform_index(std::uint64_t n);

  double normal();

  /// Gamma(shape, 1); shape > 0.
  double gamma(double shape);

  /// One draw from the symmetric Dirichlet(concentration * 1_k).
  std::vector<double> dirichlet(double concentration, std::size_t k);

  /// First `count` entries of `items` become a uniform random subset in
  /// random order (partial Fisher-Yates).
  template <typename T>
  void partial_shuffle(std::span<T> items, std::size_t count) {
    for (std::size_t i = 0; i < count && i + 1 < items.size(); ++i) {
      const auto j = i + uniform_index(items.size() - i);
      std::swap(items[i], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace numerics
}  // namespace bavardage
