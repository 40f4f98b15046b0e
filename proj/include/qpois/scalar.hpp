#pragma once

#include <cmath>
#include <complex>
#include <type_traits>

#include <Eigen/Dense>

namespace qp {

using cd = std::complex<double>;

// Forward-mode dual number over an arbitrary scalar; nesting gives higher
// derivatives (Dual<Dual<cd>> carries mixed second derivatives).
template <class T>
struct Dual {
  T v{};
  T d{};

  Dual() = default;
  Dual(const T& a, const T& b) : v(a), d(b) {}
  template <class S, std::enable_if_t<std::is_convertible_v<S, T>, int> = 0>
  Dual(const S& a) : v(a), d() {}

  Dual& operator+=(const Dual& o) { v += o.v; d += o.d; return *this; }
  Dual& operator-=(const Dual& o) { v -= o.v; d -= o.d; return *this; }
  Dual& operator*=(const Dual& o) { d = d * o.v + v * o.d; v *= o.v; return *this; }
  Dual& operator/=(const Dual& o) { *this = *this / o; return *this; }

  friend Dual operator+(Dual a, const Dual& b) { return a += b; }
  friend Dual operator-(Dual a, const Dual& b) { return a -= b; }
  friend Dual operator*(const Dual& a, const Dual& b) { return {a.v * b.v, a.d * b.v + a.v * b.d}; }
  friend Dual operator/(const Dual& a, const Dual& b) {
    T inv = T(1) / b.v;
    return {a.v * inv, (a.d * b.v - a.v * b.d) * inv * inv};
  }
  friend Dual operator-(const Dual& a) { return {-a.v, -a.d}; }
  friend Dual operator+(const Dual& a) { return a; }
  // Exact comparison only; used by Eigen for trivial checks such as x == 0.
  friend bool operator==(const Dual& a, const Dual& b) { return a.v == b.v && a.d == b.d; }
  friend bool operator!=(const Dual& a, const Dual& b) { return !(a == b); }
};

template <class T> struct is_dual : std::false_type {};
template <class T> struct is_dual<Dual<T>> : std::true_type {};

// Leaf complex value of a possibly nested dual.
inline cd leaf(const cd& x) { return x; }
inline cd leaf(double x) { return x; }
template <class T> cd leaf(const Dual<T>& x) { return leaf(x.v); }

inline double magnitude(const cd& x) { return std::abs(x); }
template <class T> double magnitude(const Dual<T>& x) { return std::abs(leaf(x)); }

template <class T> using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <class T> using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;
using MatC = Mat<cd>;
using VecC = Vec<cd>;

template <class T>
Mat<T> lift(const MatC& m) {
  if constexpr (std::is_same_v<T, cd>) {
    return m;
  } else {
    Mat<T> r(m.rows(), m.cols());
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) r(i, j) = T(m(i, j));
    return r;
  }
}

template <class T>
Vec<T> lift(const VecC& m) {
  Vec<T> r(m.size());
  for (Eigen::Index i = 0; i < m.size(); ++i) r(i) = T(m(i));
  return r;
}

template <class T>
MatC leaf(const Mat<T>& m) {
  MatC r(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) r(i, j) = leaf(m(i, j));
  return r;
}

// Derivative part of a first-order dual, as a matrix.
template <class T>
Mat<T> tangent_part(const Mat<Dual<T>>& m) {
  Mat<T> r(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) r(i, j) = m(i, j).d;
  return r;
}

template <class T>
Mat<Dual<T>> seed(const Mat<T>& base, const Mat<T>& dir) {
  Mat<Dual<T>> r(base.rows(), base.cols());
  for (Eigen::Index i = 0; i < base.rows(); ++i)
    for (Eigen::Index j = 0; j < base.cols(); ++j) r(i, j) = Dual<T>(base(i, j), dir(i, j));
  return r;
}

// Gauss-Jordan inverse with partial pivoting on the leaf modulus; works for
// every scalar of this library including nested duals.
template <class T>
Mat<T> inverse(const Mat<T>& a) {
  const Eigen::Index n = a.rows();
  Mat<T> m = a;
  Mat<T> inv = Mat<T>::Identity(n, n);
  for (Eigen::Index c = 0; c < n; ++c) {
    Eigen::Index piv = c;
    double best = magnitude(m(c, c));
    for (Eigen::Index r = c + 1; r < n; ++r) {
      double v = magnitude(m(r, c));
      if (v > best) { best = v; piv = r; }
    }
    if (piv != c) { m.row(c).swap(m.row(piv)); inv.row(c).swap(inv.row(piv)); }
    T p = T(1) / m(c, c);
    m.row(c) *= p;
    inv.row(c) *= p;
    for (Eigen::Index r = 0; r < n; ++r) {
      if (r == c) continue;
      T f = m(r, c);
      if (magnitude(f) == 0.0 && !is_dual<T>::value) continue;
      m.row(r) -= f * m.row(c);
      inv.row(r) -= f * inv.row(c);
    }
  }
  return inv;
}

template <class T>
T trace(const Mat<T>& a) {
  T s = T(0);
  for (Eigen::Index i = 0; i < a.rows(); ++i) s += a(i, i);
  return s;
}

// Row-major flattening, matching the coordinate map of a Lie algebra model.
template <class T>
Vec<T> flatten(const Mat<T>& a) {
  Vec<T> v(a.rows() * a.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) v(i * a.cols() + j) = a(i, j);
  return v;
}

}  // namespace qp

namespace Eigen {
template <class T>
struct NumTraits<qp::Dual<T>> : GenericNumTraits<qp::Dual<T>> {
  using Real = qp::Dual<T>;
  using NonInteger = qp::Dual<T>;
  using Nested = qp::Dual<T>;
  using Literal = qp::Dual<T>;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 2 * NumTraits<T>::ReadCost,
    AddCost = 2 * NumTraits<T>::AddCost,
    MulCost = 3 * NumTraits<T>::MulCost + NumTraits<T>::AddCost
  };
  static inline Real epsilon() { return Real(NumTraits<T>::epsilon()); }
  static inline Real dummy_precision() { return Real(NumTraits<T>::dummy_precision()); }
  static inline int digits10() { return NumTraits<T>::digits10(); }
};
}  // namespace Eigen
