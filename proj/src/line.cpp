#include "cpsi/line.hpp"

#include "cpsi/errors.hpp"

namespace cpsi {

HypothesisDirection build_eta(const Hyperparameters& hp, int location, int component,
                              int components, int locations) {
  if (hp.w < 0 || hp.w >= hp.l) throw InputError("W must satisfy 0 <= W < L");
  if (component < 0 || component >= components) throw InputError("component out of range");
  if (location - hp.l + 1 < 1 || location + hp.l > locations) {
    throw InputError("test windows fall outside the sequence");
  }
  HypothesisDirection dir;
  dir.location = location;
  dir.component = component;
  dir.scale = 1.0 / (hp.l - hp.w);
  dir.eta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(components) * locations);
  const Eigen::Index base = static_cast<Eigen::Index>(component) * locations;
  for (int j = location - hp.l + 1; j <= location - hp.w; ++j) dir.eta(base + j - 1) = dir.scale;
  for (int j = location + hp.w + 1; j <= location + hp.l; ++j) dir.eta(base + j - 1) = -dir.scale;
  return dir;
}

HypothesisDirection build_eta(const Detection& det, const Hyperparameters& hp, int k, int h,
                              int components, int locations) {
  if (k < 0 || k >= static_cast<int>(det.locations.size())) throw InputError("k out of range");
  const auto& theta = det.components[static_cast<std::size_t>(k)];
  if (h < 0 || h >= static_cast<int>(theta.size())) throw InputError("h out of range");
  HypothesisDirection dir = build_eta(hp, det.locations[static_cast<std::size_t>(k)],
                                      theta[static_cast<std::size_t>(h)], components, locations);
  dir.k = k;
  dir.h = h;
  return dir;
}

LineParametrization build_line(const CovarianceModel& cov, const Eigen::VectorXd& eta,
                               const SequenceMatrix& x_obs) {
  const Eigen::VectorXd x = vec(x_obs);
  if (eta.size() != x.size()) throw InputError("eta length does not match the data");
  const Eigen::VectorXd s_eta = cov.apply(eta);
  const double var = eta.dot(s_eta);
  if (!(var > 0.0)) throw NumericError("degenerate covariance along the test direction");
  LineParametrization line;
  line.sigma_eta2 = var;
  line.b = s_eta / var;
  line.z_obs = eta.dot(x);
  line.a = x - line.b * line.z_obs;
  return line;
}

}  // namespace cpsi
