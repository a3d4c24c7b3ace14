#include "voxelastic/sph_kernel.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "voxelastic/error.hpp"

namespace voxelastic {

void KernelParams::validate() const {
  if (!(h > 1.0) || !std::isfinite(h)) {
    throw Error(ErrorCode::InvalidConfig, "kernel support h must be finite and > 1, got " + std::to_string(h));
  }
}

double weight(double r, const KernelParams& params) {
  const double h = params.h;
  if (r >= h) return 0.0;
  const double d = h - r;
  return 15.0 / (std::numbers::pi * std::pow(h, 6)) * d * d * d;
}

Vec3 weight_gradient(const Vec3& offset, const KernelParams& params) {
  const double r = offset.norm();
  if (r == 0.0) throw Error(ErrorCode::DegenerateOffset, "kernel gradient requested at zero offset");
  const double h = params.h;
  if (r >= h) return Vec3::Zero();
  const double d = h - r;
  return (-45.0 / (std::numbers::pi * std::pow(h, 6)) * d * d / r) * offset;
}

Mat3 guarded_inverse(const Mat3& m) {
  Mat3 adj;
  adj(0, 0) = m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1);
  adj(0, 1) = m(0, 2) * m(2, 1) - m(0, 1) * m(2, 2);
  adj(0, 2) = m(0, 1) * m(1, 2) - m(0, 2) * m(1, 1);
  adj(1, 0) = m(1, 2) * m(2, 0) - m(1, 0) * m(2, 2);
  adj(1, 1) = m(0, 0) * m(2, 2) - m(0, 2) * m(2, 0);
  adj(1, 2) = m(0, 2) * m(1, 0) - m(0, 0) * m(1, 2);
  adj(2, 0) = m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0);
  adj(2, 1) = m(0, 1) * m(2, 0) - m(0, 0) * m(2, 1);
  adj(2, 2) = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  const double det = m(0, 0) * adj(0, 0) + m(0, 1) * adj(1, 0) + m(0, 2) * adj(2, 0);
  const double scale = m.cwiseAbs().maxCoeff();
  if (!(std::abs(det) >= 1e-12 * scale * scale * scale) || scale == 0.0) {
    throw Error(ErrorCode::SingularCorrection, "matrix is singular (det = " + std::to_string(det) + ")");
  }
  return adj / det;
}

CorrectionTensor correction_tensor(std::span<const Vec3> rest_offsets, const KernelParams& params) {
  CorrectionTensor out;
  out.A.setZero();
  for (const Vec3& R : rest_offsets) out.A += R * weight_gradient(R, params).transpose();
  out.A_inv = guarded_inverse(out.A);
  return out;
}

Vec3 corrected_gradient(const Vec3& offset, const CorrectionTensor& corr, const KernelParams& params) {
  return corr.A_inv.transpose() * weight_gradient(offset, params);
}

}  // namespace voxelastic
