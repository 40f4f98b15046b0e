#include "qpois/fields.hpp"

#include <algorithm>

namespace qp {

GenMap GenMap::operator+(const GenMap& o) const {
  GenMap r = *this;
  if (r.c.size() < o.c.size()) r.c.resize(o.c.size(), {0.0, 0.0});
  for (size_t a = 0; a < o.c.size(); ++a) {
    r.c[a][0] += o.c[a][0];
    r.c[a][1] += o.c[a][1];
  }
  return r;
}

GenMap GenMap::scaled(double s) const {
  GenMap r = *this;
  for (auto& x : r.c) x = {x[0] * s, x[1] * s};
  return r;
}

GenMap GenMap::embedded(int arity, int offset) const {
  GenMap r = zero(arity);
  for (size_t a = 0; a < c.size(); ++a) r.c[offset + a] = c[a];
  return r;
}

bool GenMap::is_zero() const {
  for (const auto& x : c)
    if (x[0] != 0.0 || x[1] != 0.0) return false;
  return true;
}

MatC bivector_frame(const QPStructure& s, const PointC& p, const Frame& f, double* tangency) {
  PointC pinv = inverses<cd>(p);
  MatC P = bivector_left<cd>(s, p, pinv);
  if (tangency) {
    MatC proj = f.left * f.left_pinv;
    MatC out = P - proj * P;
    *tangency = out.size() ? out.cwiseAbs().maxCoeff() : 0.0;
  }
  return f.left_pinv * P * f.left_pinv.transpose();
}

cd jacobiator(const QPStructure& s, const ScalarField& f1, const ScalarField& f2, const ScalarField& f3,
              const PointC& p) {
  const auto& m = *s.site.model;
  const int d = m.d, k = s.site.arity();
  PointC pinv = inverses<cd>(p);
  MatC P = bivector_left<cd>(s, p, pinv);
  const ScalarField* fs[3] = {&f1, &f2, &f3};
  cd total = 0;
  for (int c = 0; c < 3; ++c) {
    const ScalarField& a = *fs[c];
    const ScalarField& b = *fs[(c + 1) % 3];
    const ScalarField& z = *fs[(c + 2) % 3];
    // {g, z} = 2 P(dg, dz) = 2 dg(w), w = P dz in left coordinates.
    VecC dz = differential_left<cd>(z, s.site, p);
    VecC w = P * dz;
    Point<Dual<cd>> q;
    for (int i = 0; i < k; ++i) {
      MatC dir = p[i] * m.element<cd>(VecC(w.segment(i * d, d)));
      q.push_back(seed<cd>(p[i], dir));
    }
    Dual<cd> g = pb2_bracket<Dual<cd>>(s, a, b, q);
    total += 2.0 * g.d;
  }
  return total;
}

cd eval_phiM(const QPStructure& s, const PointC& p, const VecC& a, const VecC& b, const VecC& c) {
  const auto& m = *s.site.model;
  PointC pinv = inverses<cd>(p);
  const Tensor3& phi = s.pairing->phi;
  cd total = 0;
  for (const auto& act : s.actions) {
    MatC F = genmap_left<cd>(m, act.fund, p, pinv);
    VecC fa = F.transpose() * a, fb = F.transpose() * b, fc = F.transpose() * c;
    for (int j = 0; j < m.d; ++j)
      for (int k = 0; k < m.d; ++k)
        for (int t = 0; t < m.d; ++t) total += 0.5 * phi(j, k, t) * fa(j) * fb(k) * fc(t);
  }
  return total;
}

MatC form_frame(const QHStructure& s, const PointC& p, const Frame& f) {
  PointC pinv = inverses<cd>(p);
  std::vector<Tangent<cd>> ts;
  for (int a = 0; a < f.N; ++a) ts.push_back(frame_tangent(s.site, f, a));
  MatC S(f.N, f.N);
  for (int a = 0; a < f.N; ++a)
    for (int b = 0; b < f.N; ++b) S(a, b) = eval_form<cd>(s, p, pinv, ts[a], ts[b]);
  return S;
}

GenField field_bracket(const Site& s, const GenField& X, const GenField& Y) {
  GenField r;
  for (int a = 0; a < s.arity(); ++a) r.xi.push_back(s.model->bracket(X.xi[a], Y.xi[a]));
  return r;
}

cd eval_lambda(const LieAlgebraModel& m, const PairingData& pd, const MatC& q, const MatC& x, const MatC& y,
               const MatC& z) {
  MatC qi = inverse<cd>(q);
  VecC wx = m.coords<cd>(MatC(qi * x)), wy = m.coords<cd>(MatC(qi * y)), wz = m.coords<cd>(MatC(qi * z));
  VecC br = m.bracket(wx, wy);
  return 0.5 * (br.transpose() * pd.lower() * wz)(0, 0);
}

cd lambda_pullback(const Site& s, const PairingData& pd, const std::vector<ActionComp>& actions, const PointC& p,
                   const Tangent<cd>& x, const Tangent<cd>& y, const Tangent<cd>& z) {
  const auto& m = *s.model;
  PointC pinv = inverses<cd>(p);
  cd total = 0;
  for (const auto& act : actions) {
    MatC phi = word_eval<cd>(act.phi, p, pinv, m.n);
    MatC dx = word_tangent<cd>(act.phi, p, pinv, x.v, m.n);
    MatC dy = word_tangent<cd>(act.phi, p, pinv, y.v, m.n);
    MatC dz = word_tangent<cd>(act.phi, p, pinv, z.v, m.n);
    total += eval_lambda(m, pd, phi, dx, dy, dz);
  }
  return total;
}

TwoChain TwoChain::operator+(const TwoChain& o) const {
  TwoChain r = *this;
  r.terms.insert(r.terms.end(), o.terms.begin(), o.terms.end());
  return r;
}

TwoChain TwoChain::scaled(int c) const {
  TwoChain r = *this;
  for (auto& t : r.terms) t.coef *= c;
  return r;
}

TwoChain TwoChain::shifted(int offset) const {
  TwoChain r = *this;
  for (auto& t : r.terms) {
    t.u = t.u.shifted(offset);
    t.v = t.v.shifted(offset);
  }
  return r;
}

TwoChain torus_chain(int x, int y) {
  Word X = Word::letter(x), Y = Word::letter(y);
  Word Xi = X.inverse(), Yi = Y.inverse();
  TwoChain c;
  c.terms = {{-1, X, Y}, {-1, Xi, Yi}, {-1, X * Y, Xi * Yi}, {1, X, Xi}, {1, Y, Yi}};
  return c;
}

std::vector<PairTerm> chain_pairs(const TwoChain& c) {
  std::vector<PairTerm> r;
  for (const auto& t : c.terms) r.push_back(PairTerm{0.5 * t.coef, t.u, Side::Left, t.v, Side::Right});
  return r;
}

cd two_chain_form(const TwoChain& c, const Site& s, std::shared_ptr<const PairingData> pd, const PointC& p,
                  const Tangent<cd>& x, const Tangent<cd>& y) {
  QHStructure q;
  q.site = s;
  q.pairing = std::move(pd);
  q.pairs = chain_pairs(c);
  PointC pinv = inverses<cd>(p);
  return eval_form<cd>(q, p, pinv, x, y);
}

Word free_reduce(const Word& w) {
  std::vector<Letter> st;
  for (const auto& l : w.letters) {
    if (!st.empty() && st.back().factor == l.factor && st.back().exp == -l.exp)
      st.pop_back();
    else
      st.push_back(l);
  }
  return Word{st};
}

namespace {
std::string key(const Word& w) {
  std::string k;
  for (const auto& l : w.letters) k += std::to_string(l.factor) + (l.exp > 0 ? "+" : "-") + ",";
  return k;
}
void add(std::map<std::string, int>& m, const Word& w, int c) {
  Word r = free_reduce(w);
  if (r.empty() || c == 0) return;
  int& v = m[key(r)];
  v += c;
  if (v == 0) m.erase(key(r));
}
}  // namespace

std::map<std::string, int> chain_boundary(const TwoChain& c) {
  std::map<std::string, int> m;
  for (const auto& t : c.terms) {
    add(m, t.u, t.coef);
    add(m, t.v, t.coef);
    add(m, t.u * t.v, -t.coef);
  }
  return m;
}

std::map<std::string, int> one_chain(const std::vector<std::pair<int, Word>>& terms) {
  std::map<std::string, int> m;
  for (const auto& [c, w] : terms) add(m, w, c);
  return m;
}

}  // namespace qp
