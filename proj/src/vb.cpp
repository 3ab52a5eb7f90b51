#include "bavardage/vb.hpp"

#include <cmath>

#include "bavardage/error.hpp"

namespace bavardage {

using numerics::digamma;
using numerics::log_gamma;

Vector VBPriors::prior_mean(Eigen::Index dims) const {
  if (m_o.size() == 0) return Vector::Zero(dims);
  if (m_o.size() != dims)
    throw Error("dimension_mismatch", "prior mean has length " + std::to_string(m_o.size()) +
                                          ", reduced space has " + std::to_string(dims));
  return m_o;
}

void VBPriors::validate() const {
  if (!(alpha_o > 0.0) || !(beta_o > 0.0) || !(t_vb > 0.0))
    throw Error("bad_config", "alpha_o, beta_o and t_vb must be positive");
  if (!m_o.allFinite()) throw Error("bad_config", "prior mean must be finite");
}

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;  // log(2 pi)

Vector expected_log_weights(const Vector& alpha) {
  const double total = digamma(alpha.sum());
  Vector out(alpha.size());
  for (Eigen::Index k = 0; k < alpha.size(); ++k) out[k] = digamma(alpha[k]) - total;
  return out;
}

// log of the Dirichlet normalizer Gamma(sum a) / prod Gamma(a_k)
double log_dirichlet_norm(const Vector& a) {
  double out = log_gamma(a.sum());
  for (Eigen::Index k = 0; k < a.size(); ++k) out -= log_gamma(a[k]);
  return out;
}

void check_shapes(const Matrix& reduced, const VBPosterior& posterior) {
  if (posterior.means.cols() != reduced.cols() || posterior.alpha.size() != posterior.means.rows() ||
      posterior.beta.size() != posterior.means.rows())
    throw Error("dimension_mismatch", "posterior shape does not match the reduced data");
}

}  // namespace

VBPosterior m_step(const Matrix& reduced, const SoftAssignments& assignments, const VBPriors& priors) {
  if (assignments.rows() != reduced.rows())
    throw Error("dimension_mismatch", "assignments and reduced data differ in row count");
  const Vector m_o = priors.prior_mean(reduced.cols());
  const Vector mass = assignments.class_mass();

  VBPosterior post;
  post.alpha = (mass.array() + priors.alpha_o).matrix();
  post.beta = (mass.array() + priors.beta_o).matrix();
  post.means = assignments.probs.transpose() * reduced;
  post.means.rowwise() += priors.beta_o * m_o.transpose();
  for (Eigen::Index k = 0; k < post.means.rows(); ++k) post.means.row(k) /= post.beta[k];
  return post;
}

Matrix e_step_log_rho(const Matrix& reduced, const VBPosterior& posterior, const VBPriors& priors) {
  check_shapes(reduced, posterior);
  const auto d = static_cast<double>(reduced.cols());
  const Vector elog_pi = expected_log_weights(posterior.alpha);
  // 1/2 log|Lambda| - d/2 log 2 pi with |Lambda| = t_vb^d
  const double log_norm = 0.5 * d * std::log(priors.t_vb) - 0.5 * d * kLog2Pi;

  Matrix out(reduced.rows(), posterior.means.rows());
  for (Eigen::Index k = 0; k < out.cols(); ++k) {
    const Vector quad = priors.t_vb * (reduced.rowwise() - posterior.means.row(k)).rowwise().squaredNorm();
    out.col(k) = (elog_pi[k] + log_norm - 0.5 * d / posterior.beta[k] - 0.5 * quad.array()).matrix();
  }
  return out;
}

SoftAssignments e_step(const Matrix& reduced, const VBPosterior& posterior, const VBPriors& priors,
                       const std::vector<int>& clamped_label) {
  if (clamped_label.size() != static_cast<std::size_t>(reduced.rows()))
    throw Error("dimension_mismatch", "clamp vector length differs from the row count");
  SoftAssignments out{numerics::normalize_log_rows(e_step_log_rho(reduced, posterior, priors)), clamped_label};
  out.clamp();
  return out;
}

double compute_elbo(const Matrix& reduced, const SoftAssignments& assignments, const VBPosterior& posterior,
                    const VBPriors& priors) {
  check_shapes(reduced, posterior);
  if (assignments.rows() != reduced.rows() || assignments.classes() != posterior.means.rows())
    throw Error("dimension_mismatch", "assignments do not match the posterior");

  const auto d = static_cast<double>(reduced.cols());
  const auto k_count = posterior.alpha.size();
  const double t = priors.t_vb;
  const Vector m_o = priors.prior_mean(reduced.cols());
  const Vector elog_pi = expected_log_weights(posterior.alpha);
  const Vector mass = assignments.class_mass();

  // E[log p(U | Z, mu)] + E[log p(Z | pi)]
  double elbo = 0.0;
  for (Eigen::Index k = 0; k < k_count; ++k) {
    const Vector sq = (reduced.rowwise() - posterior.means.row(k)).rowwise().squaredNorm();
    const double expected_quad = assignments.probs.col(k).dot(t * sq) + mass[k] * d / posterior.beta[k];
    elbo += mass[k] * (0.5 * d * std::log(t) - 0.5 * d * kLog2Pi) - 0.5 * expected_quad;
    elbo += mass[k] * elog_pi[k];
  }

  // E[log p(pi)] - E[log q(pi)]
  elbo += log_dirichlet_norm(Vector::Constant(k_count, priors.alpha_o)) + (priors.alpha_o - 1.0) * elog_pi.sum();
  elbo -= log_dirichlet_norm(posterior.alpha) + (posterior.alpha.array() - 1.0).matrix().dot(elog_pi);

  // E[log p(mu)] - E[log q(mu)]
  for (Eigen::Index k = 0; k < k_count; ++k) {
    const double beta_k = posterior.beta[k];
    elbo += 0.5 * d * std::log(priors.beta_o * t) - 0.5 * d * kLog2Pi -
            0.5 * priors.beta_o * t * (posterior.means.row(k).transpose() - m_o).squaredNorm() -
            0.5 * d * priors.beta_o / beta_k;
    elbo -= 0.5 * d * std::log(beta_k * t) - 0.5 * d * kLog2Pi - 0.5 * d;
  }

  // -E[log q(Z)]
  for (Eigen::Index n = 0; n < assignments.rows(); ++n)
    for (Eigen::Index k = 0; k < k_count; ++k) {
      const double o = assignments.probs(n, k);
      if (o > 0.0) elbo -= o * std::log(o);
    }
  return elbo;
}

}  // namespace bavardage
