#pragma once

// Second-order forward-mode jets: value, gradient and packed Hessian in N
// independent variables.  All chart-level derivatives in the library flow
// through this type, so finite differences stay confined to tests.

#include <array>
#include <cmath>
#include <cstddef>

namespace hexweb {

template <std::size_t N>
class Jet {
 public:
  static constexpr std::size_t kHess = N * (N + 1) / 2;

  constexpr Jet() : v_(0.0), g_{}, h_{} {}
  constexpr Jet(double v) : v_(v), g_{}, h_{} {}  // NOLINT: implicit lift of constants

  static Jet variable(double v, std::size_t i) {
    Jet x(v);
    x.g_[i] = 1.0;
    return x;
  }

  double value() const { return v_; }
  double d(std::size_t i) const { return g_[i]; }
  double dd(std::size_t i, std::size_t j) const { return h_[packed(i, j)]; }

  void set_value(double v) { v_ = v; }
  void set_d(std::size_t i, double x) { g_[i] = x; }
  void set_dd(std::size_t i, std::size_t j, double x) { h_[packed(i, j)] = x; }

  Jet& operator+=(const Jet& o) {
    v_ += o.v_;
    for (std::size_t i = 0; i < N; ++i) g_[i] += o.g_[i];
    for (std::size_t k = 0; k < kHess; ++k) h_[k] += o.h_[k];
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    v_ -= o.v_;
    for (std::size_t i = 0; i < N; ++i) g_[i] -= o.g_[i];
    for (std::size_t k = 0; k < kHess; ++k) h_[k] -= o.h_[k];
    return *this;
  }
  Jet& operator*=(double s) {
    v_ *= s;
    for (auto& x : g_) x *= s;
    for (auto& x : h_) x *= s;
    return *this;
  }
  Jet& operator*=(const Jet& o) {
    Jet r(v_ * o.v_);
    for (std::size_t i = 0; i < N; ++i) r.g_[i] = v_ * o.g_[i] + o.v_ * g_[i];
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t j = i; j < N; ++j) {
        const std::size_t k = packed(i, j);
        r.h_[k] = v_ * o.h_[k] + o.v_ * h_[k] + g_[i] * o.g_[j] + g_[j] * o.g_[i];
      }
    *this = r;
    return *this;
  }
  Jet& operator/=(const Jet& o);

  // Compose with a scalar function given its value and first two derivatives
  // at the current value.
  Jet chain(double f0, double f1, double f2) const {
    Jet r(f0);
    for (std::size_t i = 0; i < N; ++i) r.g_[i] = f1 * g_[i];
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t j = i; j < N; ++j) {
        const std::size_t k = packed(i, j);
        r.h_[k] = f1 * h_[k] + f2 * g_[i] * g_[j];
      }
    return r;
  }

  // The first partial along i, promoted to a jet.  Its own second derivatives
  // would need third-order information and are left at zero.
  Jet partial(std::size_t i) const {
    Jet r(g_[i]);
    for (std::size_t j = 0; j < N; ++j) r.g_[j] = h_[packed(i, j)];
    return r;
  }

 private:
  static constexpr std::size_t packed(std::size_t i, std::size_t j) {
    if (i > j) {
      const std::size_t t = i;
      i = j;
      j = t;
    }
    return i * N - (i * (i - 1)) / 2 + (j - i);
  }

  double v_;
  std::array<double, N> g_;
  std::array<double, kHess> h_;
};

using Jet2 = Jet<2>;
using Jet3 = Jet<3>;

template <std::size_t N>
Jet<N> operator-(const Jet<N>& a) {
  Jet<N> r = a;
  r *= -1.0;
  return r;
}
template <std::size_t N>
Jet<N> operator+(Jet<N> a, const Jet<N>& b) { return a += b; }
template <std::size_t N>
Jet<N> operator-(Jet<N> a, const Jet<N>& b) { return a -= b; }
template <std::size_t N>
Jet<N> operator*(Jet<N> a, const Jet<N>& b) { return a *= b; }
template <std::size_t N>
Jet<N> operator+(Jet<N> a, double b) { return a += Jet<N>(b); }
template <std::size_t N>
Jet<N> operator+(double a, Jet<N> b) { return b += Jet<N>(a); }
template <std::size_t N>
Jet<N> operator-(Jet<N> a, double b) { return a -= Jet<N>(b); }
template <std::size_t N>
Jet<N> operator-(double a, const Jet<N>& b) { return Jet<N>(a) - b; }
template <std::size_t N>
Jet<N> operator*(Jet<N> a, double b) { return a *= b; }
template <std::size_t N>
Jet<N> operator*(double a, Jet<N> b) { return b *= a; }

template <std::size_t N>
Jet<N> inverse(const Jet<N>& x) {
  const double v = x.value();
  return x.chain(1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v));
}

template <std::size_t N>
Jet<N>& Jet<N>::operator/=(const Jet<N>& o) {
  return *this *= inverse(o);
}

template <std::size_t N>
Jet<N> operator/(Jet<N> a, const Jet<N>& b) { return a /= b; }
template <std::size_t N>
Jet<N> operator/(Jet<N> a, double b) { return a *= (1.0 / b); }
template <std::size_t N>
Jet<N> operator/(double a, const Jet<N>& b) { return inverse(b) * a; }

template <std::size_t N>
Jet<N> sqrt(const Jet<N>& x) {
  const double s = std::sqrt(x.value());
  return x.chain(s, 0.5 / s, -0.25 / (s * x.value()));
}
template <std::size_t N>
Jet<N> exp(const Jet<N>& x) {
  const double e = std::exp(x.value());
  return x.chain(e, e, e);
}
template <std::size_t N>
Jet<N> log(const Jet<N>& x) {
  const double v = x.value();
  return x.chain(std::log(v), 1.0 / v, -1.0 / (v * v));
}
template <std::size_t N>
Jet<N> sin(const Jet<N>& x) {
  const double s = std::sin(x.value()), c = std::cos(x.value());
  return x.chain(s, c, -s);
}
template <std::size_t N>
Jet<N> cos(const Jet<N>& x) {
  const double s = std::sin(x.value()), c = std::cos(x.value());
  return x.chain(c, -s, -c);
}
template <std::size_t N>
Jet<N> pow(const Jet<N>& x, double p) {
  const double v = x.value();
  const double vp = std::pow(v, p);
  return x.chain(vp, p * vp / v, p * (p - 1.0) * vp / (v * v));
}
template <std::size_t N>
Jet<N> square(const Jet<N>& x) { return x * x; }

inline double square(double x) { return x * x; }

inline double value_of(double x) { return x; }
template <std::size_t N>
double value_of(const Jet<N>& x) { return x.value(); }

}  // namespace hexweb
