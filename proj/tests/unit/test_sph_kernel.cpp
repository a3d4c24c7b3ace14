#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "voxelastic/error.hpp"
#include "voxelastic/sph_kernel.hpp"

using namespace voxelastic;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<Vec3> face_offsets() {
  return {Vec3(1, 0, 0), Vec3(-1, 0, 0), Vec3(0, 1, 0), Vec3(0, -1, 0), Vec3(0, 0, 1), Vec3(0, 0, -1)};
}

std::vector<Vec3> lattice_offsets(double h) {
  std::vector<Vec3> out;
  for (int x = -2; x <= 2; ++x) {
    for (int y = -2; y <= 2; ++y) {
      for (int z = -2; z <= 2; ++z) {
        const Vec3 r(x, y, z);
        if (r.norm() > 0.0 && r.norm() < h) out.push_back(r);
      }
    }
  }
  return out;
}

// Central difference of W(|R|) along each axis.
Vec3 numeric_gradient(const Vec3& r, const KernelParams& p) {
  const double eps = 1e-6;
  Vec3 g;
  for (int k = 0; k < 3; ++k) {
    Vec3 a = r, b = r;
    a[k] += eps;
    b[k] -= eps;
    g[k] = (weight(a.norm(), p) - weight(b.norm(), p)) / (2 * eps);
  }
  return g;
}

}  // namespace

TEST(Kernel, WeightValues) {
  const KernelParams p{2.0};
  EXPECT_NEAR(weight(1.0, p), 15.0 / (64.0 * kPi), 1e-15);
  EXPECT_NEAR(weight(1.0, p), 0.074604, 1e-6);
  EXPECT_NEAR(weight(0.0, p), 15.0 / (8.0 * kPi), 1e-15);
  EXPECT_NEAR(weight(0.0, p), 0.596831, 1e-6);
  EXPECT_EQ(weight(2.0, p), 0.0);
  EXPECT_EQ(weight(3.5, p), 0.0);
}

TEST(Kernel, WeightIntegratesToOne) {
  // midpoint rule on 4 pi r^2 W(r) dr
  const KernelParams p{2.0};
  const int n = 20000;
  double sum = 0.0;
  for (int k = 0; k < n; ++k) {
    const double r = (k + 0.5) * p.h / n;
    sum += 4 * kPi * r * r * weight(r, p) * p.h / n;
  }
  EXPECT_NEAR(sum, 1.0, 1e-6);
}

TEST(Kernel, GradientValue) {
  const KernelParams p{2.0};
  const Vec3 g = weight_gradient(Vec3(1, 0, 0), p);
  EXPECT_NEAR(g.x(), -45.0 / (64.0 * kPi), 1e-15);
  EXPECT_NEAR(g.x(), -0.223811, 1e-6);
  EXPECT_EQ(g.y(), 0.0);
  EXPECT_EQ(g.z(), 0.0);
}

TEST(Kernel, GradientMatchesFiniteDifference) {
  const KernelParams p{2.0};
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-1.1, 1.1);
  for (int k = 0; k < 100; ++k) {
    const Vec3 r(u(rng), u(rng), u(rng));
    if (r.norm() < 0.05 || r.norm() > 1.95) continue;
    EXPECT_LT((weight_gradient(r, p) - numeric_gradient(r, p)).norm(), 1e-7);
  }
}

TEST(Kernel, GradientOutsideSupportIsZero) {
  const KernelParams p{2.0};
  EXPECT_EQ(weight_gradient(Vec3(2, 0, 0), p), Vec3::Zero());
  EXPECT_EQ(weight_gradient(Vec3(2, 2, 0), p), Vec3::Zero());
}

TEST(Kernel, GradientAtZeroOffsetThrows) {
  try {
    weight_gradient(Vec3::Zero(), KernelParams{2.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateOffset);
  }
}

TEST(Kernel, SupportMustExceedSpacing) {
  EXPECT_THROW(KernelParams{1.0}.validate(), Error);
  EXPECT_NO_THROW(KernelParams{1.5}.validate());
}

TEST(Correction, FaceNeighborsAreIsotropic) {
  const KernelParams p{1.5};
  const auto corr = correction_tensor(face_offsets(), p);
  // two offsets per axis, each contributing -45/(pi h^6) (h-1)^2
  const double diag = 2.0 * -45.0 / (kPi * std::pow(1.5, 6)) * 0.25;
  EXPECT_NEAR(diag, -0.6288, 1e-4);
  EXPECT_TRUE(corr.A.isApprox(diag * Mat3::Identity(), 1e-14));
  EXPECT_TRUE((corr.A * corr.A_inv).isApprox(Mat3::Identity(), 1e-14));
}

TEST(Correction, CorrectedGradientFaceNeighbor) {
  const KernelParams p{1.5};
  const auto corr = correction_tensor(face_offsets(), p);
  const Vec3 g = corrected_gradient(Vec3(1, 0, 0), corr, p);
  EXPECT_NEAR(g.x(), 0.5, 1e-14);
  EXPECT_NEAR(g.y(), 0.0, 1e-15);
  EXPECT_NEAR(g.z(), 0.0, 1e-15);
}

TEST(Correction, ReproducesIdentity) {
  const KernelParams p{2.0};
  const auto offsets = lattice_offsets(p.h);
  const auto corr = correction_tensor(offsets, p);
  Mat3 sum = Mat3::Zero();
  for (const auto& r : offsets) sum += r * corrected_gradient(r, corr, p).transpose();
  EXPECT_LT((sum - Mat3::Identity()).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(Correction, FirstOrderConsistencyForAffineFields) {
  // sum_j (phi_j - phi_i) grad~W(R_ij) = c for phi(X) = c.X on any invertible
  // neighbourhood, including one-sided ones near a free surface.
  const KernelParams p{2.0};
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::bernoulli_distribution keep(0.6);
  int checked = 0;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Vec3> offsets;
    for (const auto& r : lattice_offsets(p.h)) {
      if (keep(rng)) offsets.push_back(r);
    }
    CorrectionTensor corr;
    try {
      corr = correction_tensor(offsets, p);
    } catch (const Error&) {
      continue;
    }
    const Vec3 c(u(rng), u(rng), u(rng));
    Vec3 sum = Vec3::Zero();
    for (const auto& r : offsets) sum += c.dot(r) * corrected_gradient(r, corr, p);
    EXPECT_LT((sum - c).norm(), 1e-12);
    ++checked;
  }
  EXPECT_GT(checked, 40);
}

TEST(Correction, CoplanarNeighborsAreSingular) {
  const std::vector<Vec3> plane{Vec3(1, 0, 0), Vec3(-1, 0, 0), Vec3(0, 1, 0), Vec3(0, -1, 0), Vec3(1, 1, 0)};
  try {
    correction_tensor(plane, KernelParams{2.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SingularCorrection);
  }
  EXPECT_THROW(correction_tensor(std::vector<Vec3>{}, KernelParams{2.0}), Error);
}

TEST(Correction, GuardedInverseMatchesEigen) {
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int k = 0; k < 50; ++k) {
    Mat3 m;
    for (int i = 0; i < 9; ++i) m(i) = u(rng);
    if (std::abs(m.determinant()) < 1e-3) continue;
    EXPECT_TRUE(guarded_inverse(m).isApprox(m.inverse(), 1e-10));
  }
}
