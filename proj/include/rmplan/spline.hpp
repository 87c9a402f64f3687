#pragma once

#include <string>
#include <vector>

#include "rmplan/types.hpp"

namespace rmplan {

enum class Space { Joint, Position };

const char* to_string(Space s);

/// Natural cubic spline through 3D knots, chord-length parameterised.
/// On interval k, p(t) = a_k + b_k u + c_k u^2 + d_k u^3 with u = t - t_k.
class Trajectory
{
public:
  Trajectory() = default;

  Space space() const { return space_; }
  const std::vector<Vec3>& knots() const { return knots_; }
  const std::vector<double>& params() const { return t_; }
  std::size_t segment_count() const { return knots_.size() < 2 ? 0 : knots_.size() - 1; }
  double t_end() const { return t_.empty() ? 0.0 : t_.back(); }
  const std::vector<std::string>& warnings() const { return warnings_; }

  Vec3 eval(double t) const;
  Vec3 d1(double t) const;
  Vec3 d2(double t) const;
  /// Second derivative from the left/right polynomial at interior knot k.
  Vec3 d2_left(std::size_t k) const;
  Vec3 d2_right(std::size_t k) const;

  std::size_t segment_of(double t) const;

  friend Trajectory spline_fit(const std::vector<Vec3>& nodes, const Vec3& start, const Vec3& goal,
                               Space space);

private:
  Space space_ = Space::Joint;
  std::vector<Vec3> knots_;
  std::vector<double> t_;
  std::vector<Vec3> a_, b_, c_, d_;
  std::vector<std::string> warnings_;
};

/// Fits the node sequence with `start` and `goal` forced as exact endpoints.
/// Consecutive duplicate knots are collapsed with a warning.
Trajectory spline_fit(const std::vector<Vec3>& nodes, const Vec3& start, const Vec3& goal,
                      Space space);

}  // namespace rmplan
