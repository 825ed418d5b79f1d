// ttomo - small dense linear algebra, forward-mode jets, deterministic RNG
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

namespace ttomo {

inline constexpr int kDim = 2;  // planar disk domain; index loops stay generic

// ---------------------------------------------------------------------------
// Vectors and matrices

struct Vec2 {
  double x = 0.0, y = 0.0;

  double& operator[](int i) { return i == 0 ? x : y; }
  double operator[](int i) const { return i == 0 ? x : y; }

  Vec2 operator+(Vec2 b) const { return {x + b.x, y + b.y}; }
  Vec2 operator-(Vec2 b) const { return {x - b.x, y - b.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2 operator/(double s) const { return {x / s, y / s}; }
  Vec2 operator-() const { return {-x, -y}; }
  Vec2& operator+=(Vec2 b) { x += b.x; y += b.y; return *this; }
  Vec2& operator-=(Vec2 b) { x -= b.x; y -= b.y; return *this; }
};

inline Vec2 operator*(double s, Vec2 v) { return v * s; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::sqrt(dot(a, a)); }
inline Vec2 perp(Vec2 a) { return {-a.y, a.x}; }

struct Mat2 {
  // row-major a(i,j)
  double m00 = 0, m01 = 0, m10 = 0, m11 = 0;

  static Mat2 identity() { return {1, 0, 0, 1}; }

  double& operator()(int i, int j) {
    return i == 0 ? (j == 0 ? m00 : m01) : (j == 0 ? m10 : m11);
  }
  double operator()(int i, int j) const {
    return i == 0 ? (j == 0 ? m00 : m01) : (j == 0 ? m10 : m11);
  }

  Mat2 operator+(const Mat2& b) const { return {m00 + b.m00, m01 + b.m01, m10 + b.m10, m11 + b.m11}; }
  Mat2 operator-(const Mat2& b) const { return {m00 - b.m00, m01 - b.m01, m10 - b.m10, m11 - b.m11}; }
  Mat2 operator*(double s) const { return {m00 * s, m01 * s, m10 * s, m11 * s}; }

  Vec2 operator*(Vec2 v) const { return {m00 * v.x + m01 * v.y, m10 * v.x + m11 * v.y}; }
  Mat2 operator*(const Mat2& b) const {
    return {m00 * b.m00 + m01 * b.m10, m00 * b.m01 + m01 * b.m11,
            m10 * b.m00 + m11 * b.m10, m10 * b.m01 + m11 * b.m11};
  }

  double det() const { return m00 * m11 - m01 * m10; }
  double trace() const { return m00 + m11; }
  Mat2 transposed() const { return {m00, m10, m01, m11}; }
  Mat2 inverse() const {
    const double d = det();
    return {m11 / d, -m01 / d, -m10 / d, m00 / d};
  }
};

inline Mat2 operator*(double s, const Mat2& a) { return a * s; }
inline Mat2 outer(Vec2 a, Vec2 b) { return {a.x * b.x, a.x * b.y, a.y * b.x, a.y * b.y}; }

// Symmetric 2x2 tensor stored as upper triangle.
struct Sym2 {
  double s00 = 0, s01 = 0, s11 = 0;

  static Sym2 identity() { return {1, 0, 1}; }

  double operator()(int i, int j) const {
    return (i == 0 && j == 0) ? s00 : ((i == 1 && j == 1) ? s11 : s01);
  }
  void set(int i, int j, double v) {
    if (i == 0 && j == 0) s00 = v;
    else if (i == 1 && j == 1) s11 = v;
    else s01 = v;
  }

  Sym2 operator+(Sym2 b) const { return {s00 + b.s00, s01 + b.s01, s11 + b.s11}; }
  Sym2 operator-(Sym2 b) const { return {s00 - b.s00, s01 - b.s01, s11 - b.s11}; }
  Sym2 operator*(double c) const { return {s00 * c, s01 * c, s11 * c}; }
  Sym2& operator+=(Sym2 b) { s00 += b.s00; s01 += b.s01; s11 += b.s11; return *this; }

  Mat2 mat() const { return {s00, s01, s01, s11}; }
  double det() const { return s00 * s11 - s01 * s01; }
  double trace() const { return s00 + s11; }
  Vec2 apply(Vec2 v) const { return {s00 * v.x + s01 * v.y, s01 * v.x + s11 * v.y}; }
  double quad(Vec2 v) const { return s00 * v.x * v.x + 2 * s01 * v.x * v.y + s11 * v.y * v.y; }

  Sym2 inverse() const {
    const double d = det();
    return {s11 / d, -s01 / d, s00 / d};
  }
  // eigenvalues of the symmetric matrix, ascending
  std::array<double, 2> eigenvalues() const {
    const double m = 0.5 * trace();
    const double r = std::sqrt(std::max(0.0, m * m - det()));
    return {m - r, m + r};
  }
  // principal square root (SPD input)
  Sym2 sqrtSpd() const {
    const double sd = std::sqrt(det());
    const double denom = std::sqrt(trace() + 2.0 * sd);
    return {(s00 + sd) / denom, s01 / denom, (s11 + sd) / denom};
  }
};

inline Sym2 operator*(double c, Sym2 s) { return s * c; }
inline Sym2 symOuter(Vec2 a) { return {a.x * a.x, a.x * a.y, a.y * a.y}; }
// symmetrized outer product sym(a b^T)
inline Sym2 symOuter(Vec2 a, Vec2 b) {
  return {a.x * b.x, 0.5 * (a.x * b.y + a.y * b.x), a.y * b.y};
}
// double contraction a_ij b_ij (plain component sum with symmetric duplication)
inline double frob(Sym2 a, Sym2 b) {
  return a.s00 * b.s00 + 2.0 * a.s01 * b.s01 + a.s11 * b.s11;
}

// ---------------------------------------------------------------------------
// Second-order forward-mode jet in two variables: value, gradient, Hessian.
// Metric families are written once against this scalar type, which yields
// exact first and second spatial derivatives of g_ij.

struct Jet2 {
  double v = 0;                       // value
  double g0 = 0, g1 = 0;              // gradient
  double h00 = 0, h01 = 0, h11 = 0;   // Hessian (symmetric)

  Jet2() = default;
  Jet2(double value) : v(value) {}
  static Jet2 var(double value, int index) {
    Jet2 j(value);
    if (index == 0) j.g0 = 1; else j.g1 = 1;
    return j;
  }

  Jet2 operator-() const { return chainNeg(); }
  Jet2 chainNeg() const {
    Jet2 r; r.v = -v; r.g0 = -g0; r.g1 = -g1; r.h00 = -h00; r.h01 = -h01; r.h11 = -h11; return r;
  }
};

inline Jet2 operator+(const Jet2& a, const Jet2& b) {
  Jet2 r; r.v = a.v + b.v; r.g0 = a.g0 + b.g0; r.g1 = a.g1 + b.g1;
  r.h00 = a.h00 + b.h00; r.h01 = a.h01 + b.h01; r.h11 = a.h11 + b.h11; return r;
}
inline Jet2 operator-(const Jet2& a, const Jet2& b) { return a + b.chainNeg(); }
inline Jet2 operator*(const Jet2& a, const Jet2& b) {
  Jet2 r; r.v = a.v * b.v;
  r.g0 = a.g0 * b.v + a.v * b.g0;
  r.g1 = a.g1 * b.v + a.v * b.g1;
  r.h00 = a.h00 * b.v + 2 * a.g0 * b.g0 + a.v * b.h00;
  r.h01 = a.h01 * b.v + a.g0 * b.g1 + a.g1 * b.g0 + a.v * b.h01;
  r.h11 = a.h11 * b.v + 2 * a.g1 * b.g1 + a.v * b.h11;
  return r;
}
// composition with scalar function given f(v), f'(v), f''(v)
inline Jet2 chain(const Jet2& a, double f, double fp, double fpp) {
  Jet2 r; r.v = f;
  r.g0 = fp * a.g0; r.g1 = fp * a.g1;
  r.h00 = fp * a.h00 + fpp * a.g0 * a.g0;
  r.h01 = fp * a.h01 + fpp * a.g0 * a.g1;
  r.h11 = fp * a.h11 + fpp * a.g1 * a.g1;
  return r;
}
inline Jet2 operator/(const Jet2& a, const Jet2& b) {
  const double iv = 1.0 / b.v;
  return a * chain(b, iv, -iv * iv, 2.0 * iv * iv * iv);
}
inline Jet2 operator+(const Jet2& a, double c) { Jet2 r = a; r.v += c; return r; }
inline Jet2 operator+(double c, const Jet2& a) { return a + c; }
inline Jet2 operator-(const Jet2& a, double c) { return a + (-c); }
inline Jet2 operator-(double c, const Jet2& a) { return a.chainNeg() + c; }
inline Jet2 operator*(const Jet2& a, double c) { return a * Jet2(c); }
inline Jet2 operator*(double c, const Jet2& a) { return a * Jet2(c); }
inline Jet2 operator/(const Jet2& a, double c) { return a * Jet2(1.0 / c); }
inline Jet2 operator/(double c, const Jet2& a) { return Jet2(c) / a; }

inline Jet2 exp(const Jet2& a) { const double e = std::exp(a.v); return chain(a, e, e, e); }
inline Jet2 log(const Jet2& a) { return chain(a, std::log(a.v), 1.0 / a.v, -1.0 / (a.v * a.v)); }
inline Jet2 sqrt(const Jet2& a) {
  const double s = std::sqrt(a.v);
  return chain(a, s, 0.5 / s, -0.25 / (s * a.v));
}
inline Jet2 sin(const Jet2& a) { return chain(a, std::sin(a.v), std::cos(a.v), -std::sin(a.v)); }
inline Jet2 cos(const Jet2& a) { return chain(a, std::cos(a.v), -std::sin(a.v), -std::cos(a.v)); }

// atan2(y, x) as a jet; valid away from the origin
inline Jet2 atan2(const Jet2& y, const Jet2& x) {
  const double q = x.v * x.v + y.v * y.v;
  Jet2 r;
  r.v = std::atan2(y.v, x.v);
  // d(atan2) = (x dy - y dx) / q
  const double dx0 = x.g0, dx1 = x.g1, dy0 = y.g0, dy1 = y.g1;
  r.g0 = (x.v * dy0 - y.v * dx0) / q;
  r.g1 = (x.v * dy1 - y.v * dx1) / q;
  // second derivatives via d(num)/q - num*dq/q^2 with num_i = x dy_i - y dx_i
  const double dq0 = 2 * (x.v * dx0 + y.v * dy0);
  const double dq1 = 2 * (x.v * dx1 + y.v * dy1);
  const double n0 = x.v * dy0 - y.v * dx0;
  const double n1 = x.v * dy1 - y.v * dx1;
  const double dn00 = dx0 * dy0 + x.v * y.h00 - dy0 * dx0 - y.v * x.h00;
  const double dn01 = dx1 * dy0 + x.v * y.h01 - dy1 * dx0 - y.v * x.h01;
  const double dn11 = dx1 * dy1 + x.v * y.h11 - dy1 * dx1 - y.v * x.h11;
  r.h00 = dn00 / q - n0 * dq0 / (q * q);
  r.h01 = dn01 / q - n0 * dq1 / (q * q);
  r.h11 = dn11 / q - n1 * dq1 / (q * q);
  return r;
}

// C-infinity transition: 0 for t <= 0, 1 for t >= 1, strictly monotone between.
template <typename T>
T smoothStep01(const T& t);

inline double smoothStep01Value(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / t);
  const double b = std::exp(-1.0 / (1.0 - t));
  return a / (a + b);
}

template <>
inline double smoothStep01<double>(const double& t) { return smoothStep01Value(t); }

template <>
inline Jet2 smoothStep01<Jet2>(const Jet2& t) {
  if (t.v <= 1e-12) return Jet2(0.0);
  if (t.v >= 1.0 - 1e-12) return Jet2(1.0);
  const Jet2 a = exp(-1.0 / t);
  const Jet2 b = exp(-1.0 / (1.0 - t));
  return a / (a + b);
}

// ---------------------------------------------------------------------------
// Deterministic RNG (splitmix64), identical across platforms/library versions.

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t nextU64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }
  // uniform in [0, 1)
  double uniform() { return double(nextU64() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int uniformInt(int n) { return int(nextU64() % std::uint64_t(n)); }

 private:
  std::uint64_t state_;
};

inline bool nearlyEqual(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace ttomo
