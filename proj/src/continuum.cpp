#include "voxelastic/continuum.hpp"

#include <cmath>
#include <string>

#include "voxelastic/error.hpp"

namespace voxelastic {

void MaterialParams::validate() const {
  if (!(youngs_modulus > 0.0) || !std::isfinite(youngs_modulus)) {
    throw Error(ErrorCode::InvalidConfig, "Young's modulus must be positive");
  }
  if (!(poisson_ratio > -1.0 && poisson_ratio < 0.5)) {
    throw Error(ErrorCode::InvalidConfig, "Poisson ratio must lie in (-1, 0.5)");
  }
  if (!(damping >= 0.0) || !std::isfinite(damping)) {
    throw Error(ErrorCode::InvalidConfig, "damping must be non-negative");
  }
}

double MaterialParams::lambda() const {
  const double nu = poisson_ratio;
  return youngs_modulus * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
}

double MaterialParams::mu() const { return youngs_modulus / (2.0 * (1.0 + poisson_ratio)); }

Mat3 deformation_gradient(std::span<const Vec3> current_offsets, std::span<const Vec3> rest_offsets,
                          const CorrectionTensor& corr, const KernelParams& params) {
  if (current_offsets.size() != rest_offsets.size()) {
    throw Error(ErrorCode::InvalidConfig, "current and rest offset lists differ in length");
  }
  Mat3 F = Mat3::Identity();
  for (std::size_t k = 0; k < rest_offsets.size(); ++k) {
    const Vec3 g = corrected_gradient(rest_offsets[k], corr, params);
    F += (current_offsets[k] - rest_offsets[k]) * g.transpose();
  }
  return F;
}

Mat3 green_lagrange(const Mat3& F) { return 0.5 * (F.transpose() * F - Mat3::Identity()); }

Mat3 second_pk(const Mat3& E, const MaterialParams& mat) {
  return mat.lambda() * E.trace() * Mat3::Identity() + 2.0 * mat.mu() * E;
}

Mat3 first_pk(const Mat3& F, const Mat3& F_dot, const Mat3& S, const MaterialParams& mat) {
  const double J = F.determinant();
  if (!(J > 0.0)) {
    throw Error(ErrorCode::InvertedElement, "det F = " + std::to_string(J));
  }
  Mat3 P = F * S;
  if (mat.damping == 0.0) return P;

  const Mat3 F_inv = F.inverse();
  const Mat3 l = F_dot * F_inv;
  const Mat3 d = 0.5 * (l + l.transpose());
  const Mat3 d_bar = d - (d.trace() / 3.0) * Mat3::Identity();
  const Mat3 pull_back = mat.viscous_literal_f_inv ? F_inv : F_inv.transpose();
  P += 2.0 * J * mat.damping * (d_bar * pull_back);
  return P;
}

Mat3 cauchy(const Mat3& F, const Mat3& S) {
  const double J = F.determinant();
  if (!(J > 0.0)) {
    throw Error(ErrorCode::InvertedElement, "det F = " + std::to_string(J));
  }
  return F * S * F.transpose() / J;
}

double von_mises(const Mat3& F, const Mat3& S) {
  const Mat3 sigma = cauchy(F, S);
  const Mat3 dev = sigma - (sigma.trace() / 3.0) * Mat3::Identity();
  return std::sqrt(1.5 * dev.cwiseProduct(dev).sum());
}

}  // namespace voxelastic
