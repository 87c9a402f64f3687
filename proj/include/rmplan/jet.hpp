#pragma once

#include <array>
#include <cmath>

namespace rmplan {

/// Second-order forward-mode number: value, gradient and Hessian with
/// respect to N seeded inputs. Only the operations the kinematics need.
template <int N>
struct Jet2
{
  double v = 0.0;
  std::array<double, N> g{};
  std::array<std::array<double, N>, N> h{};

  Jet2() = default;
  Jet2(double value) : v(value) {}  // NOLINT: implicit constants are convenient

  static Jet2 variable(double value, int index)
  {
    Jet2 j(value);
    j.g[index] = 1.0;
    return j;
  }

  Jet2& operator+=(const Jet2& o)
  {
    v += o.v;
    for (int i = 0; i < N; ++i) {
      g[i] += o.g[i];
      for (int k = 0; k < N; ++k) h[i][k] += o.h[i][k];
    }
    return *this;
  }
  Jet2& operator-=(const Jet2& o)
  {
    v -= o.v;
    for (int i = 0; i < N; ++i) {
      g[i] -= o.g[i];
      for (int k = 0; k < N; ++k) h[i][k] -= o.h[i][k];
    }
    return *this;
  }
  Jet2& operator*=(double s)
  {
    v *= s;
    for (int i = 0; i < N; ++i) {
      g[i] *= s;
      for (int k = 0; k < N; ++k) h[i][k] *= s;
    }
    return *this;
  }
};

template <int N> Jet2<N> operator+(Jet2<N> a, const Jet2<N>& b) { return a += b; }
template <int N> Jet2<N> operator-(Jet2<N> a, const Jet2<N>& b) { return a -= b; }
template <int N> Jet2<N> operator-(Jet2<N> a) { return a *= -1.0; }
template <int N> Jet2<N> operator*(Jet2<N> a, double s) { return a *= s; }
template <int N> Jet2<N> operator*(double s, Jet2<N> a) { return a *= s; }
template <int N> Jet2<N> operator+(Jet2<N> a, double s) { a.v += s; return a; }
template <int N> Jet2<N> operator+(double s, Jet2<N> a) { a.v += s; return a; }
template <int N> Jet2<N> operator-(Jet2<N> a, double s) { a.v -= s; return a; }
template <int N> Jet2<N> operator-(double s, const Jet2<N>& a) { return -a + s; }

template <int N>
Jet2<N> operator*(const Jet2<N>& a, const Jet2<N>& b)
{
  Jet2<N> r(a.v * b.v);
  for (int i = 0; i < N; ++i) {
    r.g[i] = a.v * b.g[i] + b.v * a.g[i];
    for (int k = 0; k < N; ++k)
      r.h[i][k] = a.v * b.h[i][k] + b.v * a.h[i][k] + a.g[i] * b.g[k] + b.g[i] * a.g[k];
  }
  return r;
}

namespace detail {
// phi(a) given phi, phi', phi'' at a.v
template <int N>
Jet2<N> chain(const Jet2<N>& a, double f0, double f1, double f2)
{
  Jet2<N> r(f0);
  for (int i = 0; i < N; ++i) {
    r.g[i] = f1 * a.g[i];
    for (int k = 0; k < N; ++k) r.h[i][k] = f1 * a.h[i][k] + f2 * a.g[i] * a.g[k];
  }
  return r;
}
}  // namespace detail

template <int N> Jet2<N> sin(const Jet2<N>& a)
{
  const double s = std::sin(a.v), c = std::cos(a.v);
  return detail::chain(a, s, c, -s);
}
template <int N> Jet2<N> cos(const Jet2<N>& a)
{
  const double s = std::sin(a.v), c = std::cos(a.v);
  return detail::chain(a, c, -s, -c);
}
template <int N> Jet2<N> sqrt(const Jet2<N>& a)
{
  const double s = std::sqrt(a.v);
  return detail::chain(a, s, 0.5 / s, -0.25 / (s * a.v));
}

}  // namespace rmplan
