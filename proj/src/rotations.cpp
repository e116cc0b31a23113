#include "nvespin/rotations.hpp"

#include <cmath>

namespace nvespin {

namespace {
constexpr double kDegToRad = M_PI / 180.0;
}

Matrix3 rotation_z(double angle_deg) {
  const double a = angle_deg * kDegToRad;
  Matrix3 r;
  r << std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a), 0, 0, 0, 1;
  return r;
}

Matrix3 rotation_y(double angle_deg) {
  const double a = angle_deg * kDegToRad;
  Matrix3 r;
  r << std::cos(a), 0, std::sin(a), 0, 1, 0, -std::sin(a), 0, std::cos(a);
  return r;
}

Matrix3 euler_zyz_matrix(const EulerAngles& e) {
  return rotation_z(e.alpha_deg) * rotation_y(e.beta_deg) * rotation_z(e.gamma_deg);
}

Vector3 rotate_field(const Vector3& nominal, const EulerAngles& euler) {
  const Vector3 v = normalized_or_throw(nominal, "rotate_field nominal");
  return (euler_zyz_matrix(euler) * v).normalized();
}

const std::array<Vector3, 4>& nv_site_axes() {
  static const std::array<Vector3, 4> axes = {
      Vector3(1, 1, 1).normalized(), Vector3(1, -1, -1).normalized(),
      Vector3(-1, 1, -1).normalized(), Vector3(-1, -1, 1).normalized()};
  return axes;
}

Matrix3 site_symmetry_op(int site) {
  Matrix3 r = Matrix3::Identity();
  switch (site) {
    case 0:
      break;
    case 1:  // C2 about x: [111] -> [1,-1,-1]
      r.diagonal() << 1, -1, -1;
      break;
    case 2:  // C2 about y
      r.diagonal() << -1, 1, -1;
      break;
    case 3:  // C2 about z
      r.diagonal() << -1, -1, 1;
      break;
    default:
      throw std::invalid_argument("site_symmetry_op: site must be 0..3");
  }
  return r;
}

const std::vector<Matrix3>& cubic_rotations() {
  static const std::vector<Matrix3> ops = [] {
    std::vector<Matrix3> out;
    // All signed permutation matrices with determinant +1.
    const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    for (const auto& p : perms) {
      for (int sx = -1; sx <= 1; sx += 2)
        for (int sy = -1; sy <= 1; sy += 2)
          for (int sz = -1; sz <= 1; sz += 2) {
            Matrix3 m = Matrix3::Zero();
            m(0, p[0]) = sx;
            m(1, p[1]) = sy;
            m(2, p[2]) = sz;
            if (m.determinant() > 0.5) out.push_back(m);
          }
    }
    return out;
  }();
  return ops;
}

double cubic_equivalent_angle_deg(const Vector3& a, const Vector3& b) {
  const Vector3 an = a.normalized();
  const Vector3 bn = b.normalized();
  double best = 180.0;
  for (const auto& op : cubic_rotations()) {
    const double c = std::clamp((op * an).dot(bn), -1.0, 1.0);
    best = std::min(best, std::acos(c) / kDegToRad);
  }
  return best;
}

SpinSystem site_system(const SpinSystem& base, int site) {
  const Matrix3 r = site_symmetry_op(site);
  SpinSystem out = base;
  out.zfs.axis = (r * base.zfs.axis).normalized();
  for (size_t k = 0; k < out.nuclei.size(); ++k) {
    out.nuclei[k].hyperfine.axis = (r * base.nuclei[k].hyperfine.axis).normalized();
    if (out.nuclei[k].quadrupole)
      out.nuclei[k].quadrupole->axis = (r * base.nuclei[k].quadrupole->axis).normalized();
  }
  return out;
}

}  // namespace nvespin
