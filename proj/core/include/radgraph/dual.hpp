#pragma once

// Forward-mode dual numbers with a small fixed number of directional slots.
// Used to differentiate right-hand sides psi(z, x, Dx) with respect to the
// unknown value and its chart gradient (at most 1 + 3 slots for n <= 3).

#include <array>
#include <cmath>
#include <cstddef>

namespace radgraph {

class Dual {
 public:
  static constexpr std::size_t kSlots = 4;

  constexpr Dual() = default;
  constexpr Dual(double value) : value_(value) {}  // NOLINT(implicit)

  static Dual variable(double value, std::size_t slot) {
    Dual d(value);
    d.d_[slot] = 1.0;
    return d;
  }

  double value() const { return value_; }
  double d(std::size_t slot) const { return d_[slot]; }
  double& d(std::size_t slot) { return d_[slot]; }

  Dual& operator+=(const Dual& o) {
    value_ += o.value_;
    for (std::size_t i = 0; i < kSlots; ++i) d_[i] += o.d_[i];
    return *this;
  }
  Dual& operator-=(const Dual& o) {
    value_ -= o.value_;
    for (std::size_t i = 0; i < kSlots; ++i) d_[i] -= o.d_[i];
    return *this;
  }
  Dual& operator*=(const Dual& o) {
    for (std::size_t i = 0; i < kSlots; ++i) d_[i] = d_[i] * o.value_ + value_ * o.d_[i];
    value_ *= o.value_;
    return *this;
  }
  Dual& operator/=(const Dual& o) {
    const double inv = 1.0 / o.value_;
    for (std::size_t i = 0; i < kSlots; ++i) d_[i] = (d_[i] - value_ * inv * o.d_[i]) * inv;
    value_ *= inv;
    return *this;
  }

  friend Dual operator+(Dual a, const Dual& b) { return a += b; }
  friend Dual operator-(Dual a, const Dual& b) { return a -= b; }
  friend Dual operator*(Dual a, const Dual& b) { return a *= b; }
  friend Dual operator/(Dual a, const Dual& b) { return a /= b; }
  friend Dual operator-(Dual a) {
    a.value_ = -a.value_;
    for (auto& x : a.d_) x = -x;
    return a;
  }

  // Chain rule helper: f(a) with f'(a) = slope.
  static Dual apply(const Dual& a, double fa, double slope) {
    Dual r(fa);
    for (std::size_t i = 0; i < kSlots; ++i) r.d_[i] = slope * a.d_[i];
    return r;
  }

 private:
  double value_ = 0.0;
  std::array<double, kSlots> d_{};
};

inline double value_of(double x) { return x; }
inline double value_of(const Dual& x) { return x.value(); }

inline Dual sqrt(const Dual& a) {
  const double s = std::sqrt(a.value());
  return Dual::apply(a, s, 0.5 / s);
}
inline Dual exp(const Dual& a) {
  const double e = std::exp(a.value());
  return Dual::apply(a, e, e);
}
inline Dual log(const Dual& a) { return Dual::apply(a, std::log(a.value()), 1.0 / a.value()); }
inline Dual sin(const Dual& a) { return Dual::apply(a, std::sin(a.value()), std::cos(a.value())); }
inline Dual cos(const Dual& a) { return Dual::apply(a, std::cos(a.value()), -std::sin(a.value())); }
inline Dual tan(const Dual& a) {
  const double t = std::tan(a.value());
  return Dual::apply(a, t, 1.0 + t * t);
}
inline Dual sinh(const Dual& a) { return Dual::apply(a, std::sinh(a.value()), std::cosh(a.value())); }
inline Dual cosh(const Dual& a) { return Dual::apply(a, std::cosh(a.value()), std::sinh(a.value())); }
inline Dual atan(const Dual& a) {
  return Dual::apply(a, std::atan(a.value()), 1.0 / (1.0 + a.value() * a.value()));
}
inline Dual asinh(const Dual& a) {
  return Dual::apply(a, std::asinh(a.value()), 1.0 / std::sqrt(a.value() * a.value() + 1.0));
}
inline Dual acosh(const Dual& a) {
  return Dual::apply(a, std::acosh(a.value()), 1.0 / std::sqrt(a.value() * a.value() - 1.0));
}
inline Dual atanh(const Dual& a) {
  return Dual::apply(a, std::atanh(a.value()), 1.0 / (1.0 - a.value() * a.value()));
}
inline Dual abs(const Dual& a) { return a.value() < 0.0 ? -a : a; }
inline Dual pow(const Dual& a, const Dual& b) {
  // a^b = exp(b log a); handles constant exponents on negative bases separately.
  bool b_const = true;
  for (std::size_t i = 0; i < Dual::kSlots; ++i) b_const = b_const && b.d(i) == 0.0;
  const double pv = std::pow(a.value(), b.value());
  if (b_const) {
    const double slope = b.value() == 0.0 ? 0.0 : b.value() * std::pow(a.value(), b.value() - 1.0);
    return Dual::apply(a, pv, slope);
  }
  Dual r(pv);
  const double la = std::log(a.value());
  for (std::size_t i = 0; i < Dual::kSlots; ++i)
    r.d(i) = pv * (b.d(i) * la + b.value() * a.d(i) / a.value());
  return r;
}

}  // namespace radgraph
