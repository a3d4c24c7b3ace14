#pragma once

#include <span>

#include "voxelastic/math.hpp"
#include "voxelastic/sph_kernel.hpp"

namespace voxelastic {

/// Isotropic St. Venant-Kirchhoff material with deviatoric viscous damping.
struct MaterialParams {
  double youngs_modulus = 1e9;  // Pa
  double poisson_ratio = 0.4;
  double damping = 0.0;  // eta, Pa s
  /// Pull the viscous stress back with F^-1 instead of F^-T.
  bool viscous_literal_f_inv = false;

  /// Throws InvalidConfig unless E > 0, -1 < nu < 0.5 and eta >= 0.
  void validate() const;
  double lambda() const;
  double mu() const;
};

/// F = sum_j r_j (x) grad~W(R_j). Evaluated as I + sum_j (r_j - R_j) (x) grad~W(R_j),
/// which is the same sum once the correction identity sum_j R_j (x) grad~W = I
/// is used, but returns exactly I in the rest state.
Mat3 deformation_gradient(std::span<const Vec3> current_offsets, std::span<const Vec3> rest_offsets,
                          const CorrectionTensor& corr, const KernelParams& params);

/// E = (F^T F - I) / 2
Mat3 green_lagrange(const Mat3& F);

Mat3 second_pk(const Mat3& E, const MaterialParams& mat);

/// P = F S + 2 J eta (dbar F^-T), where dbar is the deviatoric part of
/// sym(Fdot F^-1). Throws InvertedElement when det F <= 0.
Mat3 first_pk(const Mat3& F, const Mat3& F_dot, const Mat3& S, const MaterialParams& mat);

/// Cauchy stress J^-1 F S F^T.
Mat3 cauchy(const Mat3& F, const Mat3& S);

/// sqrt(3/2 dev(sigma):dev(sigma)) of the Cauchy stress.
double von_mises(const Mat3& F, const Mat3& S);

}  // namespace voxelastic
