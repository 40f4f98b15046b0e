#include "qpois/groupgeom.hpp"

#include <sstream>

#include "qpois/expm.hpp"
#include "qpois/random.hpp"

namespace qp {

bool Site::all_full() const {
  for (const auto& f : factors)
    if (f.kind != FactorKind::Full) return false;
  return true;
}

int Site::letter_index(const std::string& name) const {
  for (int i = 0; i < arity(); ++i)
    if (factors[i].letter == name) return i;
  return -1;
}

Site concat(const Site& a, const Site& b) {
  Site s = a;
  if (!s.model) s.model = b.model;
  for (const auto& f : b.factors) s.factors.push_back(f);
  return s;
}

Word Word::inverse() const {
  Word r;
  for (auto it = letters.rbegin(); it != letters.rend(); ++it) r.letters.push_back({it->factor, -it->exp});
  return r;
}

Word Word::shifted(int offset) const {
  Word r = *this;
  for (auto& l : r.letters) l.factor += offset;
  return r;
}

Word operator*(const Word& a, const Word& b) {
  Word r = a;
  r.letters.insert(r.letters.end(), b.letters.begin(), b.letters.end());
  return r;
}

bool operator==(const Word& a, const Word& b) {
  if (a.letters.size() != b.letters.size()) return false;
  for (size_t i = 0; i < a.letters.size(); ++i)
    if (a.letters[i].factor != b.letters[i].factor || a.letters[i].exp != b.letters[i].exp) return false;
  return true;
}

std::string Word::str(const Site& s) const {
  if (letters.empty()) return "1";
  std::string out;
  for (size_t i = 0; i < letters.size(); ++i) {
    if (i) out += ' ';
    const auto& l = letters[i];
    out += l.factor < s.arity() ? s.factors[l.factor].letter : ("f" + std::to_string(l.factor));
    if (l.exp < 0) out += "^-1";
  }
  return out;
}

Word parse_word(const Site& s, const std::string& text) {
  std::istringstream in(text);
  std::string tok;
  Word w;
  while (in >> tok) {
    if (tok == "1") continue;
    int e = 1;
    if (tok.size() > 3 && tok.compare(tok.size() - 3, 3, "^-1") == 0) {
      e = -1;
      tok.resize(tok.size() - 3);
    } else if (!tok.empty() && tok.back() == '\'') {
      e = -1;
      tok.pop_back();
    }
    int idx = s.letter_index(tok);
    if (idx < 0) throw Error(ErrorCode::ConfigError, "unknown letter '" + tok + "' in word '" + text + "'");
    w.letters.push_back({idx, e});
  }
  return w;
}

VecC maurer_cartan_checked(const LieAlgebraModel& m, const MatC& q, const MatC& v, Side side, double tol) {
  MatC qi = inverse<cd>(q);
  MatC x = side == Side::Left ? MatC(qi * v) : MatC(v * qi);
  VecC c = m.coords<cd>(x);
  if ((m.element<cd>(c) - x).norm() > tol * std::max(1.0, x.norm()))
    throw Error(ErrorCode::NotInSpan, "tangent is not tangent to the group");
  return c;
}

std::vector<MatC> fund_conj(const Site& s, const PointC& p, const VecC& x) {
  MatC X = s.model->element<cd>(x);
  std::vector<MatC> r;
  for (const auto& q : p) r.push_back(q * X - X * q);
  return r;
}

namespace {
MatC commutator_map(const LieAlgebraModel& m, const MatC& q) {
  MatC M(m.n * m.n, m.d);
  for (int j = 0; j < m.d; ++j) M.col(j) = flatten<cd>(MatC(q * m.basis[j] - m.basis[j] * q));
  return M;
}

MatC unflatten(const VecC& v, int n) {
  MatC m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = v(i * n + j);
  return m;
}
}  // namespace

ClassFrame class_tangent_frame(const LieAlgebraModel& m, const MatC& q, double tol) {
  MatC M = commutator_map(m, q);
  Eigen::JacobiSVD<MatC> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  double top = s.size() ? s(0) : 0.0;
  ClassFrame f;
  for (int i = 0; i < s.size(); ++i)
    if (s(i) > tol * std::max(1.0, top)) ++f.dim;
  MatC pinv = M.completeOrthogonalDecomposition().pseudoInverse();
  for (int i = 0; i < f.dim; ++i) {
    VecC u = svd.matrixU().col(i);
    f.vectors.push_back(unflatten(u, m.n));
    f.lifts.push_back(pinv * u);
  }
  return f;
}

std::pair<VecC, double> class_lift(const LieAlgebraModel& m, const MatC& q, const MatC& v) {
  MatC M = commutator_map(m, q);
  VecC x = M.completeOrthogonalDecomposition().solve(flatten<cd>(v));
  double res = (M * x - flatten<cd>(v)).norm();
  return {x, res};
}

Frame make_frame(const Site& s, const PointC& p) {
  const auto& m = *s.model;
  const int d = m.d;
  Frame f;
  f.D = d * s.arity();
  std::vector<VecC> cols;
  for (int a = 0; a < s.arity(); ++a) {
    f.offset.push_back(static_cast<int>(cols.size()));
    MatC qi = inverse<cd>(p[a]);
    if (s.factors[a].kind == FactorKind::Full) {
      for (int i = 0; i < d; ++i) {
        VecC c = VecC::Zero(f.D);
        c(a * d + i) = 1.0;
        cols.push_back(c);
        f.factor_of.push_back(a);
        f.vec.push_back(p[a] * m.basis[i]);
        f.lift.push_back(VecC());
      }
      f.count.push_back(d);
    } else {
      ClassFrame cf = class_tangent_frame(m, p[a]);
      for (int i = 0; i < cf.dim; ++i) {
        VecC c = VecC::Zero(f.D);
        c.segment(a * d, d) = m.coords<cd>(MatC(qi * cf.vectors[i]));
        cols.push_back(c);
        f.factor_of.push_back(a);
        f.vec.push_back(cf.vectors[i]);
        f.lift.push_back(cf.lifts[i]);
      }
      f.count.push_back(cf.dim);
    }
  }
  f.N = static_cast<int>(cols.size());
  f.left = MatC::Zero(f.D, f.N);
  for (int i = 0; i < f.N; ++i) f.left.col(i) = cols[i];
  f.left_pinv = f.N ? MatC(f.left.completeOrthogonalDecomposition().pseudoInverse()) : MatC(0, f.D);
  return f;
}

Tangent<cd> frame_tangent(const Site& s, const Frame& f, int a) {
  const int n = s.n();
  Tangent<cd> t;
  t.v.assign(s.arity(), MatC::Zero(n, n));
  t.lift.assign(s.arity(), VecC::Zero(s.d()));
  t.v[f.factor_of[a]] = f.vec[a];
  if (f.lift[a].size()) t.lift[f.factor_of[a]] = f.lift[a];
  return t;
}

Tangent<cd> tangent_from_frame(const Site& s, const Frame& f, const VecC& c) {
  const int n = s.n();
  Tangent<cd> t;
  t.v.assign(s.arity(), MatC::Zero(n, n));
  t.lift.assign(s.arity(), VecC::Zero(s.d()));
  for (int a = 0; a < f.N; ++a) {
    t.v[f.factor_of[a]] += c(a) * f.vec[a];
    if (f.lift[a].size()) t.lift[f.factor_of[a]] += c(a) * f.lift[a];
  }
  return t;
}

VecC left_coords(const Site& s, const PointC& p, const std::vector<MatC>& v) {
  const int d = s.d();
  VecC r(d * s.arity());
  for (int a = 0; a < s.arity(); ++a)
    r.segment(a * d, d) = s.model->coords<cd>(MatC(inverse<cd>(p[a]) * v[a]));
  return r;
}

PointC random_point(const Site& s, std::uint64_t seed_value) {
  const auto& m = *s.model;
  Rng rng(seed_value);
  PointC p;
  for (const auto& f : s.factors) {
    if (f.kind == FactorKind::Full) {
      p.push_back(random_group_element(m, rng, 0.45));
    } else {
      MatC k = random_group_element(m, rng, 0.45);
      p.push_back(k * f.rep * inverse<cd>(k));
    }
  }
  return p;
}

PointC conjugate_point(const PointC& p, const MatC& g) {
  MatC gi = inverse<cd>(g);
  PointC r;
  for (const auto& q : p) r.push_back(g * q * gi);
  return r;
}

double group_membership_residual(const Site& s, const PointC& p) {
  const auto& m = *s.model;
  double worst = 0.0;
  for (const auto& q : p) {
    if (m.sl_block > 0) worst = std::max(worst, std::abs(q.topLeftCorner(m.sl_block, m.sl_block).determinant() - 1.0));
    // Block structure: q must normalize the algebra, checked through Ad of a basis element.
    for (int j = 0; j < m.d; ++j) {
      MatC y = q * m.basis[j] * inverse<cd>(q);
      worst = std::max(worst, m.span_residual(y));
    }
  }
  return worst;
}

ScalarField ScalarField::constant(cd c) { return ScalarField{{Monomial{c, {}}}}; }
ScalarField ScalarField::trace(const Word& w) { return ScalarField{{Monomial{1.0, {Atom{w, -1, -1}}}}}; }
ScalarField ScalarField::entry(const Word& w, int i, int j) { return ScalarField{{Monomial{1.0, {Atom{w, i, j}}}}}; }
ScalarField ScalarField::trace_power(const Word& w, int m) {
  Word p;
  for (int i = 0; i < m; ++i) p = p * w;
  return trace(p);
}

ScalarField ScalarField::operator+(const ScalarField& o) const {
  ScalarField r = *this;
  r.terms.insert(r.terms.end(), o.terms.begin(), o.terms.end());
  return r;
}

ScalarField ScalarField::operator-(const ScalarField& o) const { return *this + o.scaled(-1.0); }

ScalarField ScalarField::operator*(const ScalarField& o) const {
  ScalarField r;
  for (const auto& a : terms)
    for (const auto& b : o.terms) {
      Monomial m{a.coef * b.coef, a.atoms};
      m.atoms.insert(m.atoms.end(), b.atoms.begin(), b.atoms.end());
      r.terms.push_back(std::move(m));
    }
  return r;
}

ScalarField ScalarField::scaled(cd c) const {
  ScalarField r = *this;
  for (auto& m : r.terms) m.coef *= c;
  return r;
}

}  // namespace qp
