#pragma once

#include <Eigen/Dense>

#include "cpsi/covariance.hpp"
#include "cpsi/hyperparameters.hpp"
#include "cpsi/scan.hpp"
#include "cpsi/sequence.hpp"

namespace cpsi {

// Test direction for the k-th detected location and its h-th component
// (both 0-based). eta' vec(X) is the difference between the mean of
// X[component, tau-L+1 .. tau-W] and the mean of X[component, tau+W+1 .. tau+L].
struct HypothesisDirection {
  int k = 0;
  int h = 0;
  int location = 0;   // tau_k, 1-based
  int component = 0;  // theta^k_h, 0-based
  double scale = 0.0; // 1 / (L - W)
  Eigen::VectorXd eta;
};

HypothesisDirection build_eta(const Detection& det, const Hyperparameters& hp, int k, int h,
                              int components, int locations);
// Same direction for an explicit (location, component) pair.
HypothesisDirection build_eta(const Hyperparameters& hp, int location, int component,
                              int components, int locations);

// vec(X) restricted to the line a + b z through the observation, with b the
// covariance-weighted direction of eta and a the part of vec(X_obs) that the
// conditioning holds fixed.
struct LineParametrization {
  Eigen::VectorXd a;
  Eigen::VectorXd b;
  double sigma_eta2 = 0.0;
  double z_obs = 0.0;

  double sigma_eta() const { return std::sqrt(sigma_eta2); }
  Eigen::VectorXd point(double z) const { return a + b * z; }
};

LineParametrization build_line(const CovarianceModel& cov, const Eigen::VectorXd& eta,
                               const SequenceMatrix& x_obs);

}  // namespace cpsi
