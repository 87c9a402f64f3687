#pragma once

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

namespace rmplan {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec5 = Eigen::Matrix<double, 5, 1>;

/// Cartesian position in millimetres.
using Point3 = Eigen::Vector3d;

inline constexpr double kPi = std::numbers::pi;

constexpr double deg2rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad2deg(double rad) { return rad * 180.0 / kPi; }

/// Wraps an angle into (-pi, pi].
inline double wrap_angle(double a)
{
  a = std::remainder(a, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  return a;
}

/// Direction vector with unit norm enforced at construction.
class UnitVec3
{
public:
  UnitVec3() : v_(Vec3::UnitZ()) {}
  explicit UnitVec3(const Vec3& v) : v_(v.normalized()) {}

  const Vec3& vec() const { return v_; }
  double operator[](int i) const { return v_[i]; }
  operator const Vec3&() const { return v_; }

private:
  Vec3 v_;
};

}  // namespace rmplan
