#include "cpsi/covariance.hpp"

#include <cmath>

#include "cpsi/errors.hpp"

namespace cpsi {

namespace {

void check_symmetric_psd(const Eigen::MatrixXd& m, const char* name) {
  if (m.rows() != m.cols()) throw InputError(std::string(name) + " must be square");
  if (!m.allFinite()) throw InputError(std::string(name) + " has non-finite entries");
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < m.cols(); ++j) {
      if (m(i, j) != m(j, i)) throw InputError(std::string(name) + " is not symmetric");
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m, Eigen::EigenvaluesOnly);
  const double top = std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
  if (eig.eigenvalues().minCoeff() < -1e-10 * top) {
    throw InputError(std::string(name) + " is not positive semi-definite");
  }
}

}  // namespace

Eigen::MatrixXd expand_sigma(const SigmaSpec& spec, int n) {
  if (n < 1) throw InputError("sigma needs at least one location");
  if (const auto* iid = std::get_if<ScaledIdentity>(&spec)) {
    if (!(iid->sigma2 > 0.0) || !std::isfinite(iid->sigma2)) {
      throw InputError("scaled-identity sigma2 must be positive");
    }
    return iid->sigma2 * Eigen::MatrixXd::Identity(n, n);
  }
  if (const auto* ar = std::get_if<Ar1>(&spec)) {
    if (!(ar->sigma2 > 0.0) || !std::isfinite(ar->sigma2)) {
      throw InputError("AR(1) sigma2 must be positive");
    }
    if (!(std::abs(ar->rho) < 1.0)) throw InputError("AR(1) requires |rho| < 1");
    Eigen::MatrixXd s(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) s(i, j) = ar->sigma2 * std::pow(ar->rho, std::abs(i - j));
    }
    return s;
  }
  const auto& dense = std::get<DenseSigma>(spec).matrix;
  if (dense.rows() != n) throw InputError("dense sigma does not match the number of locations");
  check_symmetric_psd(dense, "sigma");
  return dense;
}

CovarianceModel::CovarianceModel(Eigen::MatrixXd xi, SigmaSpec sigma, int locations)
    : xi_(std::move(xi)), sigma_(expand_sigma(sigma, locations)), spec_(std::move(sigma)) {
  if (xi_.rows() < 1) throw InputError("xi needs at least one component");
  check_symmetric_psd(xi_, "xi");
  xi_identity_ = xi_.isIdentity(0.0);
}

CovarianceModel CovarianceModel::identity(int d, int n) {
  return {Eigen::MatrixXd::Identity(d, d), ScaledIdentity{1.0}, n};
}

CovarianceModel CovarianceModel::iid(int d, int n, double sigma2) {
  return {Eigen::MatrixXd::Identity(d, d), ScaledIdentity{sigma2}, n};
}

CovarianceModel CovarianceModel::ar1(int d, int n, double sigma2, double rho) {
  return {Eigen::MatrixXd::Identity(d, d), Ar1{sigma2, rho}, n};
}

Eigen::VectorXd CovarianceModel::apply(const Eigen::VectorXd& v) const {
  const Eigen::Index d = xi_.rows();
  const Eigen::Index n = sigma_.rows();
  if (v.size() != d * n) throw InputError("kron_apply: vector length does not match D * N");
  Eigen::Map<const RowMatrix> blocks(v.data(), d, n);
  // Row i of the result is sum_j Xi_ij (Sigma v_j)'.
  RowMatrix mixed = blocks * sigma_;  // Sigma is symmetric
  if (!xi_identity_) mixed = xi_ * mixed;
  return Eigen::Map<const Eigen::VectorXd>(mixed.data(), mixed.size());
}

double CovarianceModel::quad_form(const Eigen::VectorXd& v) const {
  return std::max(0.0, v.dot(apply(v)));
}

CovarianceModel CovarianceModel::scaled(double c2) const {
  if (!(c2 > 0.0)) throw InputError("covariance scale must be positive");
  SigmaSpec spec = spec_;
  if (auto* iid = std::get_if<ScaledIdentity>(&spec)) {
    iid->sigma2 *= c2;
  } else if (auto* ar = std::get_if<Ar1>(&spec)) {
    ar->sigma2 *= c2;
  } else {
    std::get<DenseSigma>(spec).matrix *= c2;
  }
  return {xi_, std::move(spec), locations()};
}

CovarianceModel CovarianceModel::restrict_locations(std::span<const int> locs) const {
  const auto n = static_cast<Eigen::Index>(locs.size());
  Eigen::MatrixXd sub(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = 0; b < n; ++b) sub(a, b) = sigma_(locs[a] - 1, locs[b] - 1);
  }
  return {xi_, DenseSigma{std::move(sub)}, static_cast<int>(n)};
}

Eigen::VectorXd CovarianceModel::component_scale() const {
  const double mean_diag = sigma_.diagonal().mean();
  Eigen::VectorXd s(xi_.rows());
  for (Eigen::Index i = 0; i < xi_.rows(); ++i) {
    s(i) = std::sqrt(xi_(i, i) * mean_diag);
    if (!(s(i) > 0.0)) throw NumericError("component has zero marginal variance");
  }
  return s;
}

Eigen::MatrixXd CovarianceModel::dense() const {
  const Eigen::Index d = xi_.rows();
  const Eigen::Index n = sigma_.rows();
  Eigen::MatrixXd out(d * n, d * n);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) out.block(i * n, j * n, n, n) = xi_(i, j) * sigma_;
  }
  return out;
}

Ar1Estimate estimate_ar1(const SequenceMatrix& ref) {
  const int d = ref.components();
  const int n = ref.locations();
  if (n < 2) throw InputError("reference needs at least two locations");
  double ss = 0.0;
  double lag = 0.0;
  for (int i = 0; i < d; ++i) {
    const auto row = ref.row(i);
    double mu = 0.0;
    for (double v : row) mu += v;
    mu /= n;
    for (int j = 0; j < n; ++j) {
      const double c = row[j] - mu;
      ss += c * c;
      if (j > 0) lag += c * (row[j - 1] - mu);
    }
  }
  Ar1Estimate est;
  est.sigma2 = ss / (static_cast<double>(d) * n);
  est.gamma = lag / (static_cast<double>(d) * (n - 1));
  if (!(est.sigma2 > 0.0)) throw NumericError("degenerate reference: zero variance estimate");
  est.rho = est.gamma / est.sigma2;
  return est;
}

double estimate_iid(const SequenceMatrix& ref) { return estimate_ar1(ref).sigma2; }

}  // namespace cpsi
