#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "qpois/liealg.hpp"
#include "qpois/scalar.hpp"

namespace qp {

enum class FactorKind { Full, Class };

struct Factor {
  FactorKind kind = FactorKind::Full;
  MatC rep;  // class representative (Class factors only)
  std::string letter;
};

struct Site {
  std::shared_ptr<const LieAlgebraModel> model;
  std::vector<Factor> factors;

  int arity() const { return static_cast<int>(factors.size()); }
  int d() const { return model->d; }
  int n() const { return model->n; }
  bool all_full() const;
  int letter_index(const std::string& name) const;  // -1 when absent
};

Site concat(const Site& a, const Site& b);

template <class T> using Point = std::vector<Mat<T>>;
using PointC = Point<cd>;

template <class T>
Point<T> inverses(const Point<T>& p) {
  Point<T> r;
  r.reserve(p.size());
  for (const auto& m : p) r.push_back(inverse<T>(m));
  return r;
}

template <class T>
Point<T> lift(const PointC& p) {
  Point<T> r;
  for (const auto& m : p) r.push_back(lift<T>(m));
  return r;
}

struct Letter {
  int factor = 0;
  int exp = 1;  // +1 or -1
};

struct Word {
  std::vector<Letter> letters;

  static Word letter(int f, int e = 1) { return Word{{Letter{f, e}}}; }
  static Word commutator(int a, int b) { return Word{{{a, 1}, {b, 1}, {a, -1}, {b, -1}}}; }
  Word inverse() const;
  Word shifted(int offset) const;
  bool empty() const { return letters.empty(); }
  std::string str(const Site& s) const;
  friend Word operator*(const Word& a, const Word& b);
  friend bool operator==(const Word& a, const Word& b);
};

// Tokens separated by spaces; "x" or "x^-1" (also "x'" ) per letter; "1" is the empty word.
Word parse_word(const Site& s, const std::string& text);

template <class T>
Mat<T> word_eval(const Word& w, const Point<T>& p, const Point<T>& pinv, int n) {
  Mat<T> r = Mat<T>::Identity(n, n);
  for (const auto& l : w.letters) r = r * (l.exp > 0 ? p[l.factor] : pinv[l.factor]);
  return r;
}

template <class T>
Mat<T> word_eval(const Word& w, const Point<T>& p, int n) {
  return word_eval<T>(w, p, inverses<T>(p), n);
}

// Exact Leibniz derivative of the word along per-factor ambient tangents.
template <class T>
Mat<T> word_tangent(const Word& w, const Point<T>& p, const Point<T>& pinv, const std::vector<Mat<T>>& v, int n) {
  const size_t L = w.letters.size();
  std::vector<Mat<T>> pre(L + 1), suf(L + 1);
  pre[0] = Mat<T>::Identity(n, n);
  for (size_t i = 0; i < L; ++i) {
    const auto& l = w.letters[i];
    pre[i + 1] = pre[i] * (l.exp > 0 ? p[l.factor] : pinv[l.factor]);
  }
  suf[L] = Mat<T>::Identity(n, n);
  for (size_t i = L; i-- > 0;) {
    const auto& l = w.letters[i];
    suf[i] = (l.exp > 0 ? p[l.factor] : pinv[l.factor]) * suf[i + 1];
  }
  Mat<T> r = Mat<T>::Zero(n, n);
  for (size_t i = 0; i < L; ++i) {
    const auto& l = w.letters[i];
    const Mat<T>& dv = v[l.factor];
    if (l.exp > 0)
      r += pre[i] * dv * suf[i + 1];
    else
      r -= pre[i] * pinv[l.factor] * dv * pinv[l.factor] * suf[i + 1];
  }
  return r;
}

enum class Side { Left, Right };

// Coefficients of q^{-1} v (Left) or v q^{-1} (Right).
template <class T>
Vec<T> maurer_cartan(const LieAlgebraModel& m, const Mat<T>& qinv, const Mat<T>& v, Side side) {
  return side == Side::Left ? m.coords<T>(Mat<T>(qinv * v)) : m.coords<T>(Mat<T>(v * qinv));
}

// Checked variant used by the public API: NotInSpan when v is not tangent.
VecC maurer_cartan_checked(const LieAlgebraModel& m, const MatC& q, const MatC& v, Side side, double tol = 1e-9);

// q X - X q in every factor.
std::vector<MatC> fund_conj(const Site& s, const PointC& p, const VecC& x);

struct ClassFrame {
  std::vector<MatC> vectors;  // orthonormal (flattened) basis of the tangent space
  std::vector<VecC> lifts;    // minimum-norm X with v = qX - Xq
  int dim = 0;
};
ClassFrame class_tangent_frame(const LieAlgebraModel& m, const MatC& q, double tol = 1e-9);
// Minimum-norm X with v = qX - Xq, plus the residual of that equation.
std::pair<VecC, double> class_lift(const LieAlgebraModel& m, const MatC& q, const MatC& v);

// Tangent vector on a site: one ambient matrix per factor, with lifts on class factors.
template <class T>
struct Tangent {
  std::vector<Mat<T>> v;
  std::vector<Vec<T>> lift;
};

// Tangent frame of a site at a point, in left-trivialized coordinates
// (each factor contributes d coordinates: q^{-1} v).
struct Frame {
  int N = 0;
  int D = 0;
  MatC left;       // D x N
  MatC left_pinv;  // N x D, left inverse of `left`
  std::vector<int> factor_of;
  std::vector<int> offset;  // first frame index of each factor
  std::vector<int> count;
  std::vector<MatC> vec;
  std::vector<VecC> lift;
};

Frame make_frame(const Site& s, const PointC& p);
Tangent<cd> frame_tangent(const Site& s, const Frame& f, int a);
// Tangent from frame coordinates (linear combination of frame vectors).
Tangent<cd> tangent_from_frame(const Site& s, const Frame& f, const VecC& c);
// Left-trivialized coordinates (length D) of a tangent.
VecC left_coords(const Site& s, const PointC& p, const std::vector<MatC>& v);

PointC random_point(const Site& s, std::uint64_t seed);
PointC conjugate_point(const PointC& p, const MatC& g);
double group_membership_residual(const Site& s, const PointC& p);

// Polynomial in word entries and word traces.
struct Atom {
  Word word;
  int i = -1;  // i < 0 means trace
  int j = -1;
};

struct Monomial {
  cd coef = 1.0;
  std::vector<Atom> atoms;
};

struct ScalarField {
  std::vector<Monomial> terms;

  static ScalarField constant(cd c);
  static ScalarField trace(const Word& w);
  static ScalarField entry(const Word& w, int i, int j);
  static ScalarField trace_power(const Word& w, int m);

  ScalarField operator+(const ScalarField& o) const;
  ScalarField operator-(const ScalarField& o) const;
  ScalarField operator*(const ScalarField& o) const;
  ScalarField scaled(cd c) const;

  template <class T>
  T eval(const Point<T>& p, const Point<T>& pinv, int n) const {
    T total = T(0);
    for (const auto& mono : terms) {
      T prod = T(mono.coef);
      for (const auto& a : mono.atoms) {
        Mat<T> w = word_eval<T>(a.word, p, pinv, n);
        prod = prod * (a.i < 0 ? qp::trace<T>(w) : w(a.i, a.j));
      }
      total += prod;
    }
    return total;
  }

  template <class T>
  T eval(const Point<T>& p, int n) const {
    return eval<T>(p, inverses<T>(p), n);
  }
};

// Directional derivative through one dual-number layer: d/de f(p + e v).
template <class T>
T dual_lift(const ScalarField& f, const Point<T>& p, const std::vector<Mat<T>>& v, int n) {
  Point<Dual<T>> q;
  q.reserve(p.size());
  for (size_t a = 0; a < p.size(); ++a) q.push_back(seed<T>(p[a], v[a]));
  return f.eval<Dual<T>>(q, n).d;
}

}  // namespace qp
