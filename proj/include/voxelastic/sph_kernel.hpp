#pragma once

#include <span>

#include "voxelastic/math.hpp"

namespace voxelastic {

struct KernelParams {
  /// Support radius in meters. Must exceed the unit lattice spacing.
  double h = 2.0;

  /// Throws InvalidConfig unless h > 1.
  void validate() const;
};

/// W(r) = 15 / (pi h^6) (h - r)^3 inside the support, 0 outside.
double weight(double r, const KernelParams& params);

/// Analytic gradient of W with respect to the offset R. Zero outside the
/// support; throws DegenerateOffset for R = 0.
Vec3 weight_gradient(const Vec3& offset, const KernelParams& params);

/// A = sum_j R_j (x) grad W(R_j), computed once in the rest configuration.
struct CorrectionTensor {
  Mat3 A = Mat3::Identity();
  Mat3 A_inv = Mat3::Identity();
};

/// Closed-form adjugate inverse. Throws SingularCorrection when
/// |det A| < 1e-12 * max|A_kl|^3, which is what a particle with coplanar or
/// collinear neighbours produces.
CorrectionTensor correction_tensor(std::span<const Vec3> rest_offsets, const KernelParams& params);

/// Column form of grad W A^-1, i.e. A^-T grad W(R).
Vec3 corrected_gradient(const Vec3& offset, const CorrectionTensor& corr, const KernelParams& params);

/// 3x3 inverse by adjugate; throws SingularCorrection under the same guard.
Mat3 guarded_inverse(const Mat3& m);

}  // namespace voxelastic
