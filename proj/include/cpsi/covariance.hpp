#pragma once

#include <Eigen/Dense>
#include <span>
#include <variant>

#include "cpsi/sequence.hpp"

namespace cpsi {

struct ScaledIdentity {
  double sigma2 = 1.0;
};

// Entry (i, j) is sigma2 * rho^|i - j|.
struct Ar1 {
  double sigma2 = 1.0;
  double rho = 0.0;
};

struct DenseSigma {
  Eigen::MatrixXd matrix;
};

using SigmaSpec = std::variant<ScaledIdentity, Ar1, DenseSigma>;

Eigen::MatrixXd expand_sigma(const SigmaSpec& spec, int locations);

// Kronecker covariance Xi (x) Sigma of vec(X). Xi is D x D across components,
// Sigma is N x N across locations. Sigma is always expanded to a dense matrix;
// the structured descriptor is kept for reporting.
class CovarianceModel {
 public:
  CovarianceModel(Eigen::MatrixXd xi, SigmaSpec sigma, int locations);

  static CovarianceModel identity(int components, int locations);
  static CovarianceModel iid(int components, int locations, double sigma2);
  static CovarianceModel ar1(int components, int locations, double sigma2, double rho);

  int components() const { return static_cast<int>(xi_.rows()); }
  int locations() const { return static_cast<int>(sigma_.rows()); }

  const Eigen::MatrixXd& xi() const { return xi_; }
  const Eigen::MatrixXd& sigma() const { return sigma_; }
  const SigmaSpec& sigma_spec() const { return spec_; }
  bool xi_is_identity() const { return xi_identity_; }

  // (Xi (x) Sigma) v without forming the ND x ND matrix.
  Eigen::VectorXd apply(const Eigen::VectorXd& v) const;
  // v' (Xi (x) Sigma) v.
  double quad_form(const Eigen::VectorXd& v) const;

  // Covariance of c * X when c2 = c^2; the factor is folded into Sigma.
  CovarianceModel scaled(double c2) const;
  // Sigma restricted to the given 1-based locations; the result is dense.
  CovarianceModel restrict_locations(std::span<const int> locations) const;

  // Marginal noise scale per component, sqrt(Xi_ii * mean(diag Sigma)).
  // The detector divides each component by it before scanning.
  Eigen::VectorXd component_scale() const;

  Eigen::MatrixXd dense() const;

 private:
  Eigen::MatrixXd xi_;
  Eigen::MatrixXd sigma_;
  SigmaSpec spec_;
  bool xi_identity_ = false;
};

inline Eigen::VectorXd kron_apply(const CovarianceModel& cov, const Eigen::VectorXd& v) {
  return cov.apply(v);
}
inline double quad_form(const CovarianceModel& cov, const Eigen::VectorXd& v) {
  return cov.quad_form(v);
}

struct Ar1Estimate {
  double sigma2 = 0.0;
  double gamma = 0.0;
  double rho = 0.0;
};

// Moment estimators from change-free reference rows:
//   sigma2 = sum (x_ij - mu_i)^2 / (D N)
//   gamma  = sum_{j>=2} (x_ij - mu_i)(x_i,j-1 - mu_i) / (D (N - 1))
//   rho    = gamma / sigma2
Ar1Estimate estimate_ar1(const SequenceMatrix& reference);
double estimate_iid(const SequenceMatrix& reference);

}  // namespace cpsi
