#include "lattice/encoder.hpp"
#include "lattice/mechanics.hpp"

#include "../support/fixtures.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace lattice;
using namespace lattice::mechanics;

namespace {

// The element matrix written out entry by entry: prefactor m^3/r^3, DOFs
// (u, v, w, theta_y, theta_z) per end.
ElementStiffness transcribed(double EA, double EI, double r, int m) {
  const double q = r / m;
  const double a = EA * q * q, k12 = 12 * EI, k6 = 6 * EI * q, k4 = 4 * EI * q * q, k2 = 2 * EI * q * q;
  ElementStiffness K;
  K << a, 0, 0, 0, 0, -a, 0, 0, 0, 0,
       0, k12, 0, 0, k6, 0, -k12, 0, 0, k6,
       0, 0, k12, -k6, 0, 0, 0, -k12, -k6, 0,
       0, 0, -k6, k4, 0, 0, 0, k6, k2, 0,
       0, k6, 0, 0, k4, 0, -k6, 0, 0, k2,
       -a, 0, 0, 0, 0, a, 0, 0, 0, 0,
       0, -k12, 0, 0, -k6, 0, k12, 0, 0, -k6,
       0, 0, -k12, k6, 0, 0, 0, k12, k6, 0,
       0, 0, -k6, k2, 0, 0, 0, k6, k4, 0,
       0, k6, 0, 0, k2, 0, -k6, 0, 0, k4;
  return K * (std::pow(m, 3) / std::pow(r, 3));
}

// Textbook 3D Euler-Bernoulli frame element, DOFs (u, v, w, tx, ty, tz) per end.
ElementStiffness12 space_frame(double EA, double EIy, double EIz, double GJ, double L) {
  ElementStiffness12 K = ElementStiffness12::Zero();
  const double L2 = L * L, L3 = L2 * L;
  auto sym = [&](int i, int j, double v) { K(i, j) = K(j, i) = v; };
  sym(0, 0, EA / L); sym(6, 6, EA / L); sym(0, 6, -EA / L);
  sym(3, 3, GJ / L); sym(9, 9, GJ / L); sym(3, 9, -GJ / L);
  // v - theta_z
  sym(1, 1, 12 * EIz / L3); sym(7, 7, 12 * EIz / L3); sym(1, 7, -12 * EIz / L3);
  sym(1, 5, 6 * EIz / L2); sym(1, 11, 6 * EIz / L2); sym(5, 7, -6 * EIz / L2); sym(7, 11, -6 * EIz / L2);
  sym(5, 5, 4 * EIz / L); sym(11, 11, 4 * EIz / L); sym(5, 11, 2 * EIz / L);
  // w - theta_y
  sym(2, 2, 12 * EIy / L3); sym(8, 8, 12 * EIy / L3); sym(2, 8, -12 * EIy / L3);
  sym(2, 4, -6 * EIy / L2); sym(2, 10, -6 * EIy / L2); sym(4, 8, 6 * EIy / L2); sym(8, 10, 6 * EIy / L2);
  sym(4, 4, 4 * EIy / L); sym(10, 10, 4 * EIy / L); sym(4, 10, 2 * EIy / L);
  return K;
}

UnitCell beam(const Vec3& tip, double EA, double EI) {
  UnitCell cell;
  cell.nodes = {{1, Vec3::Zero()}, {2, tip}};
  cell.obb_lengths = tip.cwiseAbs().cwiseMax(Vec3::Constant(1e-3));
  cell.struts.push_back({1, 2, EA, EI, 1.0, std::nullopt});
  return cell;
}

std::vector<Constraint> clamp(int node) {
  std::vector<Constraint> c;
  for (int k = 0; k < 6; ++k) c.push_back({GlobalSystem::dof(node, k), 0.0});
  return c;
}

}  // namespace

TEST(Element, MatchesTranscriptionAtUnitValues) {
  const ElementStiffness K = element_stiffness_local(1.0, 1.0, 1.0, 1);
  EXPECT_EQ(K, transcribed(1.0, 1.0, 1.0, 1));
}

TEST(Element, MatchesTranscriptionGenerally) {
  for (int m : {1, 2, 5})
    for (double r : {0.5, 3.0}) {
      const ElementStiffness K = element_stiffness_local(7.0, 0.3, r, m);
      const ElementStiffness T = transcribed(7.0, 0.3, r, m);
      EXPECT_LT((K - T).cwiseAbs().maxCoeff(), 1e-12 * T.cwiseAbs().maxCoeff());
    }
}

TEST(Element, SpdUpToRigidModes) {
  for (int m : {1, 2, 8}) {
    const ElementStiffness K = element_stiffness_local(2.0, 0.1, 1.5, m);
    EXPECT_TRUE(K.isApprox(K.transpose(), 0.0));
    Eigen::SelfAdjointEigenSolver<ElementStiffness> es(K);
    const double lmax = es.eigenvalues().maxCoeff();
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-12 * lmax);
    // Three translations and two rotations: five zero modes in the 10-DOF element.
    int zeros = 0;
    for (int k = 0; k < 10; ++k) zeros += std::abs(es.eigenvalues()(k)) < 1e-10 * lmax;
    EXPECT_EQ(zeros, 5);
  }
}

TEST(Element, ExtendedMatchesTextbookFrame) {
  const double EA = 5.0, EI = 0.2, GJ = 0.15, r = 2.0;
  for (int m : {1, 4}) {
    const ElementStiffness12 K = element_stiffness_extended(EA, EI, r, m, GJ);
    const ElementStiffness12 ref = space_frame(EA, EI, EI, GJ, r / m);
    EXPECT_LT((K - ref).cwiseAbs().maxCoeff(), 1e-12 * ref.cwiseAbs().maxCoeff());
  }
  const ElementStiffness12 off = element_stiffness_extended(EA, EI, r, 1, std::nullopt);
  EXPECT_EQ(off.row(3).cwiseAbs().sum(), 0.0);
  EXPECT_EQ(off.row(9).cwiseAbs().sum(), 0.0);
}

TEST(Element, Relations) {
  const Eigen::Matrix2d a = axial_relation(4.0, 2.0);
  EXPECT_EQ(a, (Eigen::Matrix2d() << 2, -2, -2, 2).finished());
  const Eigen::Matrix4d f = flexural_relation(1.0, 1.0);
  EXPECT_EQ(f(0, 0), 12.0);
  EXPECT_EQ(f(1, 1), 4.0);
  EXPECT_EQ(f(1, 3), 2.0);
  EXPECT_EQ(f(0, 1), 6.0);
  EXPECT_THROW(element_stiffness_local(1.0, 1.0, 1.0, 0), DomainError);
  EXPECT_THROW(element_stiffness_local(-1.0, 1.0, 1.0, 1), DomainError);
}

TEST(Transform, AxesAreOrthonormalAndRightHanded) {
  for (const Vec3& b : {Vec3(1, 0, 0), Vec3(0, 0, 2), Vec3(1, 1, 1), Vec3(-0.3, 0.1, 0.95)}) {
    const Eigen::Matrix3d R = local_axes(Vec3::Zero(), b);
    EXPECT_TRUE((R * R.transpose()).isIdentity(1e-14));
    EXPECT_NEAR(R.determinant(), 1.0, 1e-14);
    EXPECT_TRUE(R.row(0).transpose().isApprox(b.normalized()));
  }
  EXPECT_THROW(local_axes(Vec3::Zero(), Vec3::Zero()), GeometryError);
}

TEST(Transform, GlobalElementIsRotationInvariant) {
  // Rigid translations give zero force in any orientation.
  const Vec3 b(0.4, -0.7, 1.1);
  const ElementStiffness12 T = transformation(local_axes(Vec3::Zero(), b));
  const ElementStiffness12 kg = T.transpose() * element_stiffness_extended(3.0, 0.5, b.norm(), 1, 0.4) * T;
  Eigen::Matrix<double, 12, 1> rigid = Eigen::Matrix<double, 12, 1>::Zero();
  rigid << 1, 2, 3, 0, 0, 0, 1, 2, 3, 0, 0, 0;
  EXPECT_LT((kg * rigid).norm(), 1e-12);
  // A small rigid rotation about z: u = theta x p, rotations theta.
  const double th = 1e-3;
  rigid.setZero();
  rigid.segment<3>(3) = Vec3(0, 0, th);
  rigid.segment<3>(6) = Vec3(0, 0, th).cross(b);
  rigid.segment<3>(9) = Vec3(0, 0, th);
  EXPECT_LT((kg * rigid).norm(), 1e-12);
}

TEST(Cantilever, TipDeflectionAndAxialDisplacement) {
  const double EA = 3.0, EI = 0.25, L = 2.0, P = 0.1;
  for (int m : {1, 2, 8})
    for (const Vec3& dir : {Vec3(1, 0, 0), Vec3(1, 2, 2).normalized()}) {
      MechanicsConfig cfg;
      cfg.m = m;
      const UnitCell cell = beam(L * dir, EA, EI);
      const GlobalSystem sys = assemble_global(cell, cfg);
      EXPECT_EQ(sys.dof_count(), 6u * (m + 1));
      const Eigen::Matrix3d R = local_axes(Vec3::Zero(), L * dir);
      const Vec3 lateral = R.row(1).transpose();

      Eigen::VectorXd f = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(sys.dof_count()));
      f.segment<3>(GlobalSystem::dof(1, 0)) = P * lateral;
      auto sol = solve_static(sys.K, clamp(0), f);
      const double bend = sol.displacements.segment<3>(GlobalSystem::dof(1, 0)).dot(lateral);
      EXPECT_NEAR(bend, P * L * L * L / (3 * EI), 1e-9 * P * L * L * L / (3 * EI));

      f.setZero();
      f.segment<3>(GlobalSystem::dof(1, 0)) = P * dir;
      sol = solve_static(sys.K, clamp(0), f);
      const double axial = sol.displacements.segment<3>(GlobalSystem::dof(1, 0)).dot(dir);
      EXPECT_NEAR(axial, P * L / EA, 1e-9 * P * L / EA);
      // Reactions balance the load.
      EXPECT_LT((sol.reactions.segment<3>(0) + P * dir).norm(), 1e-10);
    }
}

TEST(Cantilever, PrescribedDisplacement) {
  const UnitCell cell = beam(Vec3(1, 0, 0), 2.0, 1.0);
  const GlobalSystem sys = assemble_global(cell);
  auto c = clamp(0);
  c.push_back({GlobalSystem::dof(1, 0), 0.01});
  const auto sol = solve_static(sys.K, c, Eigen::VectorXd::Zero(12));
  EXPECT_NEAR(sol.reactions(GlobalSystem::dof(1, 0)), 2.0 * 0.01, 1e-14);
  EXPECT_NEAR(sol.reactions(GlobalSystem::dof(0, 0)), -2.0 * 0.01, 1e-14);
}

TEST(Assembly, SymmetricWithInteriorStations) {
  MechanicsConfig cfg;
  cfg.m = 3;
  const UnitCell cell = fixtures::bcc();
  const GlobalSystem sys = assemble_global(cell, cfg);
  EXPECT_EQ(sys.positions.size(), 9u + 8u * 2u);
  EXPECT_EQ(sys.strut_chains.size(), 8u);
  for (const auto& chain : sys.strut_chains) EXPECT_EQ(chain.size(), 4u);
  EXPECT_LT((sys.K - sys.K.transpose()).cwiseAbs().maxCoeff(), 1e-12 * sys.K.cwiseAbs().maxCoeff());
  EXPECT_FALSE(sys.torsion_singular);
}

TEST(Assembly, TorsionOffLeavesMechanisms) {
  MechanicsConfig cfg;
  cfg.torsion = TorsionPadding::Off;
  const UnitCell cell = beam(Vec3(1, 0, 0), 1.0, 1.0);
  const GlobalSystem sys = assemble_global(cell, cfg);
  EXPECT_TRUE(sys.torsion_singular);
  Eigen::VectorXd f = Eigen::VectorXd::Zero(12);
  f(GlobalSystem::dof(1, 1)) = 1.0;
  try {
    solve_static(sys.K, clamp(0), f);
    FAIL();
  } catch (const SingularSystemError& e) {
    ASSERT_FALSE(e.null_vectors.empty());
    // The mode is the tip twist about the strut axis.
    EXPECT_GT(std::abs(e.null_vectors[0](GlobalSystem::dof(1, 3))), 0.99);
  }
}

TEST(Solve, FreeStructureIsSingular) {
  const GlobalSystem sys = assemble_global(fixtures::sc());
  const Eigen::VectorXd f = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(sys.dof_count()));
  EXPECT_THROW(solve_static(sys.K, {}, f), SingularSystemError);
  EXPECT_THROW(solve_static(sys.K, {{-1, 0.0}}, f), DomainError);
  EXPECT_THROW(solve_static(sys.K, clamp(0), Eigen::VectorXd::Zero(3)), DimensionError);
}
