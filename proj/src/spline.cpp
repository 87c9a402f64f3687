#include "rmplan/spline.hpp"

#include <algorithm>

#include "rmplan/error.hpp"

namespace rmplan {

const char* to_string(Space s) { return s == Space::Joint ? "joint" : "position"; }

Trajectory spline_fit(const std::vector<Vec3>& nodes, const Vec3& start, const Vec3& goal,
                      Space space)
{
  Trajectory tr;
  tr.space_ = space;
  std::vector<Vec3> raw;
  raw.push_back(start);
  const std::size_t first = !nodes.empty() && nodes.front() == start ? 1 : 0;
  const std::size_t last = nodes.size() > first && nodes.back() == goal ? nodes.size() - 1 : nodes.size();
  for (std::size_t i = first; i < last; ++i) raw.push_back(nodes[i]);
  raw.push_back(goal);

  std::size_t collapsed = 0;
  for (const auto& p : raw) {
    if (!tr.knots_.empty() && (p - tr.knots_.back()).norm() == 0.0) {
      ++collapsed;
      continue;
    }
    tr.knots_.push_back(p);
  }
  if (collapsed > 0 && raw.size() > 2)
    tr.warnings_.push_back("collapsed " + std::to_string(collapsed) + " duplicate knot(s)");

  const std::size_t m = tr.knots_.size();
  tr.t_.assign(m, 0.0);
  for (std::size_t i = 1; i < m; ++i) tr.t_[i] = tr.t_[i - 1] + (tr.knots_[i] - tr.knots_[i - 1]).norm();
  if (m < 2) return tr;

  const std::size_t n = m - 1;
  std::vector<double> h(n);
  for (std::size_t i = 0; i < n; ++i) h[i] = tr.t_[i + 1] - tr.t_[i];

  // Second derivatives M_i with M_0 = M_n = 0 (natural ends); Thomas algorithm.
  std::vector<Vec3> M(m, Vec3::Zero());
  if (n >= 2) {
    const std::size_t k = n - 1;
    std::vector<double> diag(k), upper(k), lower(k);
    std::vector<Vec3> rhs(k);
    for (std::size_t j = 0; j < k; ++j) {
      const std::size_t i = j + 1;
      lower[j] = h[i - 1];
      diag[j] = 2.0 * (h[i - 1] + h[i]);
      upper[j] = h[i];
      rhs[j] = 6.0 * ((tr.knots_[i + 1] - tr.knots_[i]) / h[i] - (tr.knots_[i] - tr.knots_[i - 1]) / h[i - 1]);
    }
    for (std::size_t j = 1; j < k; ++j) {
      const double w = lower[j] / diag[j - 1];
      diag[j] -= w * upper[j - 1];
      rhs[j] -= w * rhs[j - 1];
    }
    M[k] = rhs[k - 1] / diag[k - 1];
    for (std::size_t j = k - 1; j-- > 0;) M[j + 1] = (rhs[j] - upper[j] * M[j + 2]) / diag[j];
  }

  tr.a_.resize(n);
  tr.b_.resize(n);
  tr.c_.resize(n);
  tr.d_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3& y0 = tr.knots_[i];
    const Vec3& y1 = tr.knots_[i + 1];
    tr.a_[i] = y0;
    tr.b_[i] = (y1 - y0) / h[i] - h[i] * (2.0 * M[i] + M[i + 1]) / 6.0;
    tr.c_[i] = 0.5 * M[i];
    tr.d_[i] = (M[i + 1] - M[i]) / (6.0 * h[i]);
  }
  return tr;
}

std::size_t Trajectory::segment_of(double t) const
{
  if (segment_count() == 0) return 0;
  const auto it = std::upper_bound(t_.begin(), t_.end(), t);
  const auto idx = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, (it - t_.begin()) - 1));
  return std::min(idx, segment_count() - 1);
}

Vec3 Trajectory::eval(double t) const
{
  if (knots_.empty()) throw Error(ErrorCode::DegenerateCurve, "empty trajectory");
  if (segment_count() == 0) return knots_.front();
  const std::size_t k = segment_of(t);
  if (t >= t_.back()) return knots_.back();
  if (t <= 0.0) return knots_.front();
  const double u = t - t_[k];
  return a_[k] + u * (b_[k] + u * (c_[k] + u * d_[k]));
}

Vec3 Trajectory::d1(double t) const
{
  if (segment_count() == 0) return Vec3::Zero();
  const std::size_t k = segment_of(t);
  const double u = std::clamp(t, 0.0, t_.back()) - t_[k];
  return b_[k] + u * (2.0 * c_[k] + 3.0 * u * d_[k]);
}

Vec3 Trajectory::d2(double t) const
{
  if (segment_count() == 0) return Vec3::Zero();
  const std::size_t k = segment_of(t);
  const double u = std::clamp(t, 0.0, t_.back()) - t_[k];
  return 2.0 * c_[k] + 6.0 * u * d_[k];
}

Vec3 Trajectory::d2_left(std::size_t k) const
{
  const double u = t_[k] - t_[k - 1];
  return 2.0 * c_[k - 1] + 6.0 * u * d_[k - 1];
}

Vec3 Trajectory::d2_right(std::size_t k) const { return 2.0 * c_[k]; }

}  // namespace rmplan
