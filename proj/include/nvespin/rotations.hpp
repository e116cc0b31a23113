#pragma once

#include <array>

#include "nvespin/types.hpp"

namespace nvespin {

Matrix3 rotation_z(double angle_deg);
Matrix3 rotation_y(double angle_deg);

// Composite ZYZ rotation Rz(alpha) * Ry(beta) * Rz(gamma).
Matrix3 euler_zyz_matrix(const EulerAngles& e);

// Applies the ZYZ rotation to a nominal (unit) direction.
Vector3 rotate_field(const Vector3& nominal, const EulerAngles& euler);

// The four NV bond directions: [111], [1,-1,-1], [-1,1,-1], [-1,-1,1],
// normalized. Pairwise angles are arccos(-1/3).
const std::array<Vector3, 4>& nv_site_axes();

// Proper symmetry operation of the diamond lattice mapping site axis 0
// ([111]) onto site axis `site` (identity, or a C2 about x, y, z).
Matrix3 site_symmetry_op(int site);

// The 24 proper rotations of the cubic point group, used to compare
// orientations up to crystal symmetry.
const std::vector<Matrix3>& cubic_rotations();

// Smallest angle (degrees) between a and O*b over all cubic rotations O.
double cubic_equivalent_angle_deg(const Vector3& a, const Vector3& b);

// Re-orients every tensor axis in `base` (defined for the [111] site) onto
// the given site using the lattice symmetry op.
SpinSystem site_system(const SpinSystem& base, int site);

}  // namespace nvespin
