#pragma once

#include <array>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "qpois/groupgeom.hpp"
#include "qpois/liealg.hpp"

namespace qp {

// Linear map g -> T_pM given per factor by X -> cl * qX + cr * Xq.
struct GenMap {
  std::vector<std::array<double, 2>> c;

  static GenMap zero(int arity) { return GenMap{std::vector<std::array<double, 2>>(arity, {0.0, 0.0})}; }
  static GenMap conj(int arity) { return GenMap{std::vector<std::array<double, 2>>(arity, {1.0, -1.0})}; }
  static GenMap single(int arity, int factor, double cl, double cr) {
    GenMap g = zero(arity);
    g.c[factor] = {cl, cr};
    return g;
  }
  GenMap operator+(const GenMap& o) const;
  GenMap scaled(double s) const;
  // Places this map inside a larger site at the given factor offset.
  GenMap embedded(int arity, int offset) const;
  bool is_zero() const;
};

// D x d matrix: column j holds the left-trivialized coordinates of G(e_j).
template <class T>
Mat<T> genmap_left(const LieAlgebraModel& m, const GenMap& g, const Point<T>& p, const Point<T>& pinv) {
  const int d = m.d;
  const int k = static_cast<int>(p.size());
  Mat<T> r = Mat<T>::Zero(d * k, d);
  for (int a = 0; a < k; ++a) {
    const auto [cl, cr] = g.c[a];
    if (cl == 0.0 && cr == 0.0) continue;
    Mat<T> blk = T(cl) * Mat<T>::Identity(d, d);
    if (cr != 0.0) blk += T(cr) * m.Ad<T>(pinv[a], p[a]);
    r.block(a * d, 0, d, d) = blk;
  }
  return r;
}

// coef * eta^{jk} a(e_j) ^ b(e_k), with u ^ v = u (x) v - v (x) u.
struct BiTerm {
  double coef = 1.0;
  GenMap a, b;
};

struct ActionComp {
  GenMap fund;
  Word phi;
};

struct QPStructure {
  Site site;
  std::shared_ptr<const PairingData> pairing;
  std::vector<BiTerm> terms;
  std::vector<ActionComp> actions;
  std::string name;
};

// coef * (u^* w_su) . (v^* w_sv), where (a . b)(x, y) = a(x).b(y) - a(y).b(x)
// and w_Left = q^{-1} dq, w_Right = dq q^{-1}.
struct PairTerm {
  double coef = 1.0;
  Word u;
  Side su = Side::Left;
  Word v;
  Side sv = Side::Right;
};

struct QHStructure {
  Site site;
  std::shared_ptr<const PairingData> pairing;
  std::vector<PairTerm> pairs;
  std::vector<int> tau;  // class factors carrying their tau_C
  std::vector<ActionComp> actions;
  std::string name;
};

// Ambient bivector in left-trivialized coordinates (D x D); P(a, b) = a^T P b.
template <class T>
Mat<T> bivector_left(const QPStructure& s, const Point<T>& p, const Point<T>& pinv) {
  const auto& m = *s.site.model;
  const int D = m.d * s.site.arity();
  Mat<T> P = Mat<T>::Zero(D, D);
  Mat<T> H = lift<T>(s.pairing->eta_upper);
  for (const auto& t : s.terms) {
    Mat<T> A = genmap_left<T>(m, t.a, p, pinv);
    Mat<T> B = genmap_left<T>(m, t.b, p, pinv);
    Mat<T> AHB = A * H * B.transpose();
    P += T(t.coef) * (AHB - AHB.transpose());
  }
  return P;
}

// Restriction to the frame: P_fr = F^+ P F^{+T}. Optionally reports the
// norm of the part of P outside the frame span.
MatC bivector_frame(const QPStructure& s, const PointC& p, const Frame& f, double* tangency = nullptr);

// Left-trivialized differential: component (a, i) is df(q_a e_i).
template <class T>
Vec<T> differential_left(const ScalarField& f, const Site& s, const Point<T>& p) {
  const auto& m = *s.model;
  const int d = m.d, k = s.arity(), n = m.n;
  Vec<T> r(d * k);
  for (int a = 0; a < k; ++a)
    for (int i = 0; i < d; ++i) {
      std::vector<Mat<T>> v(k, Mat<T>::Zero(n, n));
      v[a] = p[a] * lift<T>(m.basis[i]);
      r(a * d + i) = dual_lift<T>(f, p, v, n);
    }
  return r;
}

template <class T>
T bivector_pair(const QPStructure& s, const ScalarField& f, const ScalarField& h, const Point<T>& p) {
  Point<T> pinv = inverses<T>(p);
  Mat<T> P = bivector_left<T>(s, p, pinv);
  Vec<T> df = differential_left<T>(f, s.site, p);
  Vec<T> dh = differential_left<T>(h, s.site, p);
  return (df.transpose() * P * dh)(0, 0);
}

// <P, df ^ dh> with the unnormalized wedge, i.e. 2 P(df, dh).
template <class T>
T pb2_bracket(const QPStructure& s, const ScalarField& f, const ScalarField& h, const Point<T>& p) {
  return T(2.0) * bivector_pair<T>(s, f, h, p);
}

// {{f1,f2},f3} + cyclic for the bracket <P, da ^ db>.
cd jacobiator(const QPStructure& s, const ScalarField& f1, const ScalarField& f2, const ScalarField& f3,
              const PointC& p);

// (1/2) eta^{jks} a(e_jM) b(e_kM) c(e_sM), summed over action components;
// covectors in left-trivialized coordinates.
cd eval_phiM(const QPStructure& s, const PointC& p, const VecC& a, const VecC& b, const VecC& c);

template <class T>
T eval_form(const QHStructure& s, const Point<T>& p, const Point<T>& pinv, const Tangent<T>& x,
            const Tangent<T>& y) {
  const auto& m = *s.site.model;
  const int n = m.n;
  Mat<T> eta = lift<T>(s.pairing->lower());
  T total = T(0);
  for (const auto& t : s.pairs) {
    Mat<T> uinv = word_eval<T>(t.u.inverse(), p, pinv, n);
    Mat<T> vinv = word_eval<T>(t.v.inverse(), p, pinv, n);
    Mat<T> du_x = word_tangent<T>(t.u, p, pinv, x.v, n);
    Mat<T> du_y = word_tangent<T>(t.u, p, pinv, y.v, n);
    Mat<T> dv_x = word_tangent<T>(t.v, p, pinv, x.v, n);
    Mat<T> dv_y = word_tangent<T>(t.v, p, pinv, y.v, n);
    Vec<T> ax = maurer_cartan<T>(m, uinv, du_x, t.su);
    Vec<T> ay = maurer_cartan<T>(m, uinv, du_y, t.su);
    Vec<T> bx = maurer_cartan<T>(m, vinv, dv_x, t.sv);
    Vec<T> by = maurer_cartan<T>(m, vinv, dv_y, t.sv);
    T val = (ax.transpose() * eta * by)(0, 0) - (ay.transpose() * eta * bx)(0, 0);
    total += T(t.coef) * val;
  }
  for (int a : s.tau) {
    const Mat<T>& q = p[a];
    const Mat<T>& qi = pinv[a];
    Vec<T> w = m.coords<T>(Mat<T>(qi * y.v[a] + y.v[a] * qi));
    total += T(0.5) * (x.lift[a].transpose() * eta * w)(0, 0);
    (void)q;
  }
  return total;
}

struct FormEval {
  const QHStructure* s;
  template <class T>
  T operator()(const Point<T>& p, const Point<T>& pinv, const Tangent<T>& x, const Tangent<T>& y) const {
    return eval_form<T>(*s, p, pinv, x, y);
  }
};

// Frame matrix S_ab = sigma(f_a, f_b).
MatC form_frame(const QHStructure& s, const PointC& p, const Frame& f);

// Generator field on a site: left-invariant q xi on full factors and the
// conjugation field q xi - xi q on class factors.
struct GenField {
  std::vector<VecC> xi;
};

template <class T>
Tangent<T> field_at(const Site& s, const GenField& X, const Point<T>& p) {
  const auto& m = *s.model;
  Tangent<T> t;
  for (int a = 0; a < s.arity(); ++a) {
    Vec<T> xi = lift<T>(X.xi[a]);
    Mat<T> e = m.element<T>(xi);
    if (s.factors[a].kind == FactorKind::Full) {
      t.v.push_back(p[a] * e);
      t.lift.push_back(Vec<T>::Zero(m.d));
    } else {
      t.v.push_back(p[a] * e - e * p[a]);
      t.lift.push_back(xi);
    }
  }
  return t;
}

GenField field_bracket(const Site& s, const GenField& X, const GenField& Y);

template <class Form>
cd form_on_fields(const Form& form, const Site& s, const PointC& p, const GenField& Y, const GenField& Z) {
  PointC pinv = inverses<cd>(p);
  return form.template operator()<cd>(p, pinv, field_at<cd>(s, Y, p), field_at<cd>(s, Z, p));
}

// X(sigma(Y, Z)) through one dual layer along q -> q + e X(q).
template <class Form>
cd derivative_along(const Form& form, const Site& s, const PointC& p, const GenField& X, const GenField& Y,
                    const GenField& Z) {
  Tangent<cd> xv = field_at<cd>(s, X, p);
  Point<Dual<cd>> q;
  for (int a = 0; a < s.arity(); ++a) q.push_back(seed<cd>(p[a], xv.v[a]));
  Point<Dual<cd>> qinv = inverses<Dual<cd>>(q);
  Dual<cd> val = form.template operator()<Dual<cd>>(q, qinv, field_at<Dual<cd>>(s, Y, q), field_at<Dual<cd>>(s, Z, q));
  return val.d;
}

template <class Form>
cd exterior_d3(const Form& form, const Site& s, const PointC& p, const GenField& X, const GenField& Y,
               const GenField& Z) {
  cd r = derivative_along(form, s, p, X, Y, Z) - derivative_along(form, s, p, Y, X, Z) +
         derivative_along(form, s, p, Z, X, Y);
  r -= form_on_fields(form, s, p, field_bracket(s, X, Y), Z);
  r += form_on_fields(form, s, p, field_bracket(s, X, Z), Y);
  r -= form_on_fields(form, s, p, field_bracket(s, Y, Z), X);
  return r;
}

// Cartan 3-form (1/2)[w(X), w(Y)] . w(Z) at q for ambient tangents.
cd eval_lambda(const LieAlgebraModel& m, const PairingData& p, const MatC& q, const MatC& x, const MatC& y,
               const MatC& z);
// Sum over momentum components of lambda(dPhi X, dPhi Y, dPhi Z).
cd lambda_pullback(const Site& s, const PairingData& pd, const std::vector<ActionComp>& actions, const PointC& p,
                   const Tangent<cd>& x, const Tangent<cd>& y, const Tangent<cd>& z);

struct ChainTerm {
  int coef = 1;
  Word u, v;
};

struct TwoChain {
  std::vector<ChainTerm> terms;

  TwoChain operator+(const TwoChain& o) const;
  TwoChain scaled(int c) const;
  TwoChain shifted(int offset) const;
};

TwoChain torus_chain(int x, int y);
// omega_c as pair terms: each [u|v] contributes (1/2)(u^* w) . (v^* wbar).
std::vector<PairTerm> chain_pairs(const TwoChain& c);
cd two_chain_form(const TwoChain& c, const Site& s, std::shared_ptr<const PairingData> pd, const PointC& p,
                  const Tangent<cd>& x, const Tangent<cd>& y);

// Group 1-chain boundary of the bar complex: d[a|b] = [a] + [b] - [ab], words freely
// reduced, [1] = 0. Keys are reduced words rendered canonically.
std::map<std::string, int> chain_boundary(const TwoChain& c);
std::map<std::string, int> one_chain(const std::vector<std::pair<int, Word>>& terms);
Word free_reduce(const Word& w);

}  // namespace qp
