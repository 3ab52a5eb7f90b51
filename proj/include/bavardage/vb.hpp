#pragma once

#include <vector>

#include "bavardage/softkmeans.hpp"

namespace bavardage {

/// Priors of the reduced-space mixture: pi ~ Dir(alpha_o 1),
/// mu_k ~ N(m_o, (beta_o Lambda)^-1), u_n | z_n = k ~ N(mu_k, Lambda^-1) with
/// the shared fixed precision Lambda = t_vb I.
struct VBPriors {
  double alpha_o = 2.0;
  double beta_o = 10.0;
  Vector m_o;  // empty means the zero vector of the reduced dimension
  double t_vb = 50.0;

  Vector prior_mean(Eigen::Index dims) const;
  void validate() const;
};

/// q(pi) = Dir(alpha), q(mu_k) = N(means_k, (beta_k Lambda)^-1).
struct VBPosterior {
  Vector alpha;
  Vector beta;
  Matrix means;  // K x d
};

VBPosterior m_step(const Matrix& reduced, const SoftAssignments& assignments, const VBPriors& priors);

/// Unnormalized log rho_nk = E[log pi_k] + E[log N(u_n | mu_k, Lambda^-1)].
Matrix e_step_log_rho(const Matrix& reduced, const VBPosterior& posterior, const VBPriors& priors);

/// Normalized responsibilities with clamped rows reset to one-hot.
SoftAssignments e_step(const Matrix& reduced, const VBPosterior& posterior, const VBPriors& priors,
                       const std::vector<int>& clamped_label);

/// Evidence lower bound E_q[log p(U, Z, pi, mu)] - E_q[log q(Z, pi, mu)].
double compute_elbo(const Matrix& reduced, const SoftAssignments& assignments, const VBPosterior& posterior,
                    const VBPriors& priors);

}  // namespace bavardage
