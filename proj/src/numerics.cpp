#include "bavardage/numerics.hpp"

#include <cmath>
#include <limits>

#include "bavardage/error.hpp"

namespace bavardage::numerics {

double digamma(double x) {
  if (!(x > 0.0) || !std::isfinite(x))
    throw Error("domain", "digamma requires a finite positive argument, got " +
                              std::to_string(x));

  double shift = 0.0;
  while (x < 10.0) {
    shift += 1.0 / x;
    x += 1.0;
  }

  // Bernoulli-number tail of the asymptotic series, in powers of 1/x^2.
  const double r = 1.0 / (x * x);
  const double tail =
      r * (1.0 / 12 -
           r * (1.0 / 120 -
                r * (1.0 / 252 -
                     r * (1.0 / 240 -
                          r * (1.0 / 132 - r * (691.0 / 32760 - r / 12))))));
  return std::log(x) - 0.5 / x - tail - shift;
}

double log_gamma(double x) {
  if (!(x > 0.0))
    throw Error("domain", "log_gamma requires a positive argument");
#if defined(__GLIBC__)
  int sign = 0;
  return ::lgamma_r(x, &sign);
#else
  return std::lgamma(x);
#endif
}

void canonicalize_signs(Matrix& columns) {
  for (Eigen::Index j = 0; j < columns.cols(); ++j) {
    Eigen::Index best = 0;
    double best_abs = -1.0;
    for (Eigen::Index i = 0; i < columns.rows(); ++i) {
      const double a = std::abs(columns(i, j));
      if (a > best_abs) {
        best_abs = a;
        best = i;
      }
    }
    if (columns.rows() > 0 && columns(best, j) < 0.0) columns.col(j) *= -1.0;
  }
}

EigenDecomposition sym_eigh(const Matrix& a) {
  if (a.rows() != a.cols())
    throw Error("not_symmetric", "sym_eigh requires a square matrix");
  if (a.size() > 0 && (a - a.transpose()).cwiseAbs().maxCoeff() > 1e-6)
    throw Error("not_symmetric", "sym_eigh input is not symmetric within 1e-6");

  const Matrix sym = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  if (solver.info() != Eigen::Success)
    throw Error("no_convergence", "symmetric eigensolver did not converge");

  // Eigen sorts ascending.
  EigenDecomposition out;
  out.values = solver.eigenvalues().reverse();
  out.vectors = solver.eigenvectors().rowwise().reverse();
  canonicalize_signs(out.vectors);
  return out;
}

Matrix normalize_log_rows(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const double top = logits.row(r).maxCoeff();
    const Eigen::RowVectorXd shifted = (logits.row(r).array() - top).exp();
    out.row(r) = shifted / shifted.sum();
  }
  return out;
}

Eigen::Index argmax(const Eigen::Ref<const Eigen::RowVectorXd>& row) {
  Eigen::Index best = 0;
  for (Eigen::Index k = 1; k < row.size(); ++k)
    if (row[k] > row[best]) best = k;
  return best;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::uniform_index(std::uint64_t n) {
  // Reject the top partial block so every residue is equally likely.
  const std::uint64_t limit =
      std::numeric_limits<std::uint64_t>::max() -
      std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t v;
  do {
    v = engine_();
  } while (v >= limit);
  return v % n;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * f;
  has_spare_ = true;
  return u * f;
}

double Rng::gamma(double shape) {
  if (!(shape > 0.0)) throw Error("domain", "gamma shape must be positive");
  if (shape < 1.0) {
    // Gamma(a) = Gamma(a+1) * U^(1/a)
    double u;
    do {
      u = uniform();
    } while (u == 0.0);
    return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v)))
      return d * v;
  }
}

std::vector<double> Rng::dirichlet(double concentration, std::size_t k) {
  std::vector<double> p(k);
  double total = 0.0;
  do {
    total = 0.0;
    for (auto& g : p) {
      g = gamma(concentration);
      total += g;
    }
  } while (total == 0.0);
  for (auto& g : p) g /= total;
  return p;
}

}  // namespace bavardage::numerics
