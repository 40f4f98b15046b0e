#include "qpois/quasi.hpp"

#include <algorithm>

#include "qpois/random.hpp"

namespace qp {

namespace {

Site single_site(std::shared_ptr<const LieAlgebraModel> m, const std::vector<std::string>& letters) {
  Site s;
  s.model = std::move(m);
  for (const auto& l : letters) s.factors.push_back(Factor{FactorKind::Full, MatC(), l});
  return s;
}

std::vector<ActionComp> double_actions() {
  // G acts by (x q1, q2 x^-1), G~ by (q1 y^-1, y q2); fundamental fields use exp(-tX).
  ActionComp g{GenMap{{{0.0, -1.0}, {1.0, 0.0}}}, Word{{{0, 1}, {1, 1}}}};
  ActionComp gt{GenMap{{{1.0, 0.0}, {0.0, -1.0}}}, Word{{{0, -1}, {1, -1}}}};
  return {g, gt};
}

ActionComp shifted(const ActionComp& a, int arity, int offset) {
  return ActionComp{a.fund.embedded(arity, offset), a.phi.shifted(offset)};
}

double max_abs(const MatC& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }
double max_abs(const VecC& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

// Ambient tangent of an action component's fundamental field at X.
Tangent<cd> fund_tangent(const Site& s, const GenMap& g, const PointC& p, const VecC& x) {
  const auto& m = *s.model;
  MatC X = m.element<cd>(x);
  Tangent<cd> t;
  for (int a = 0; a < s.arity(); ++a) {
    const auto [cl, cr] = g.c[a];
    t.v.push_back(cl * p[a] * X + cr * X * p[a]);
    t.lift.push_back(s.factors[a].kind == FactorKind::Class ? VecC(cl * x) : VecC(VecC::Zero(m.d)));
  }
  return t;
}

}  // namespace

QPStructure conj_bivector(const Site& one_factor, PairingPtr pd) {
  QPStructure s;
  s.site = one_factor;
  s.pairing = std::move(pd);
  const int k = one_factor.arity();
  s.terms.push_back(BiTerm{0.5, GenMap::single(k, 0, 0.0, 1.0), GenMap::single(k, 0, 1.0, 0.0)});
  s.actions.push_back(ActionComp{GenMap::conj(k), Word::letter(0)});
  s.name = one_factor.factors[0].kind == FactorKind::Class ? "P_C" : "P_G";
  return s;
}

QHStructure class_form(const Site& one_class, PairingPtr pd) {
  QHStructure s;
  s.site = one_class;
  s.pairing = std::move(pd);
  s.tau.push_back(0);
  s.actions.push_back(ActionComp{GenMap::conj(one_class.arity()), Word::letter(0)});
  s.name = "tau_C";
  return s;
}

QPStructure double_bivector(std::shared_ptr<const LieAlgebraModel> m, PairingPtr pd, const std::string& x,
                            const std::string& y) {
  QPStructure s;
  s.site = single_site(std::move(m), {x, y});
  s.pairing = std::move(pd);
  s.terms.push_back(BiTerm{0.5, GenMap::single(2, 0, 1.0, 0.0), GenMap::single(2, 1, 0.0, 1.0)});
  s.terms.push_back(BiTerm{0.5, GenMap::single(2, 0, 0.0, 1.0), GenMap::single(2, 1, 1.0, 0.0)});
  s.actions = double_actions();
  s.name = "P_times";
  return s;
}

QHStructure double_form(std::shared_ptr<const LieAlgebraModel> m, PairingPtr pd, const std::string& x,
                        const std::string& y) {
  QHStructure s;
  s.site = single_site(std::move(m), {x, y});
  s.pairing = std::move(pd);
  s.pairs.push_back(PairTerm{-0.5, Word::letter(0), Side::Left, Word::letter(1), Side::Right});
  s.pairs.push_back(PairTerm{-0.5, Word::letter(0), Side::Right, Word::letter(1), Side::Left});
  s.actions = double_actions();
  s.name = "sigma_times";
  return s;
}

QPStructure zero_bivector(const Site& s, PairingPtr pd, std::vector<ActionComp> actions) {
  QPStructure r;
  r.site = s;
  r.pairing = std::move(pd);
  r.actions = std::move(actions);
  r.name = "zero";
  return r;
}

QPStructure product(const QPStructure& a, const QPStructure& b) {
  QPStructure r;
  r.site = concat(a.site, b.site);
  r.pairing = a.pairing;
  const int k = r.site.arity(), off = a.site.arity();
  for (const auto& t : a.terms) r.terms.push_back(BiTerm{t.coef, t.a.embedded(k, 0), t.b.embedded(k, 0)});
  for (const auto& t : b.terms) r.terms.push_back(BiTerm{t.coef, t.a.embedded(k, off), t.b.embedded(k, off)});
  for (const auto& c : a.actions) r.actions.push_back(shifted(c, k, 0));
  for (const auto& c : b.actions) r.actions.push_back(shifted(c, k, off));
  r.name = a.name + "*" + b.name;
  return r;
}

QHStructure product(const QHStructure& a, const QHStructure& b) {
  QHStructure r;
  r.site = concat(a.site, b.site);
  r.pairing = a.pairing;
  const int k = r.site.arity(), off = a.site.arity();
  r.pairs = a.pairs;
  for (auto t : b.pairs) {
    t.u = t.u.shifted(off);
    t.v = t.v.shifted(off);
    r.pairs.push_back(t);
  }
  r.tau = a.tau;
  for (int t : b.tau) r.tau.push_back(t + off);
  for (const auto& c : a.actions) r.actions.push_back(shifted(c, k, 0));
  for (const auto& c : b.actions) r.actions.push_back(shifted(c, k, off));
  r.name = a.name + "*" + b.name;
  return r;
}

namespace {
template <class S>
void check_fuse(const S& s, int i, int j) {
  const int c = static_cast<int>(s.actions.size());
  if (i < 0 || j < 0 || i >= c || j >= c || i >= j)
    throw Error(ErrorCode::IncompatibleActions, "fusion needs two distinct action components i < j");
}

std::vector<ActionComp> fused_actions(const std::vector<ActionComp>& acts, int i, int j) {
  std::vector<ActionComp> r;
  for (int c = 0; c < static_cast<int>(acts.size()); ++c) {
    if (c == j) continue;
    if (c == i)
      r.push_back(ActionComp{acts[i].fund + acts[j].fund, acts[i].phi * acts[j].phi});
    else
      r.push_back(acts[c]);
  }
  return r;
}
}  // namespace

QPStructure fuse(const QPStructure& s, int i, int j) {
  check_fuse(s, i, j);
  QPStructure r = s;
  // P_fus = P - chi_M, 2 chi_M = eta^{jk} fund^1(e_j) ^ fund^2(e_k)
  r.terms.push_back(BiTerm{-0.5, s.actions[i].fund, s.actions[j].fund});
  r.actions = fused_actions(s.actions, i, j);
  r.name = "fus(" + s.name + ")";
  return r;
}

QHStructure fuse(const QHStructure& s, int i, int j) {
  check_fuse(s, i, j);
  QHStructure r = s;
  // sigma_fus = sigma - (1/2)(Phi^1, Phi^2)^*(w1 . wbar2)
  r.pairs.push_back(PairTerm{-0.5, s.actions[i].phi, Side::Left, s.actions[j].phi, Side::Right});
  r.actions = fused_actions(s.actions, i, j);
  r.name = "fus(" + s.name + ")";
  return r;
}

SurfaceDescriptor assemble_surface_site(std::shared_ptr<const LieAlgebraModel> m, PairingPtr pd, int genus,
                                        const std::vector<MatC>& class_reps, SurfaceVariant variant) {
  const int nc = static_cast<int>(class_reps.size());
  if (genus < 0 || (genus == 0 && nc < 3))
    throw Error(ErrorCode::BadSignature, "surface signature needs genus >= 1 or at least three punctures");
  const bool classes = variant == SurfaceVariant::Classes;
  SurfaceDescriptor out;
  out.genus = genus;

  std::optional<QPStructure> P;
  std::optional<QHStructure> S;
  TwoChain chain;
  auto absorb = [&](const QPStructure& bp, const std::optional<QHStructure>& bs, const TwoChain& bc) {
    if (!P) {
      P = bp;
      if (bs) S = bs;
      chain = bc;
      return;
    }
    const int off = P->site.arity();
    Word acc = P->actions[0].phi;
    Word next = bp.actions[0].phi.shifted(off);
    P = fuse(product(*P, bp));
    if (S && bs) S = fuse(product(*S, *bs));
    chain = chain + bc.shifted(off);
    chain.terms.push_back(ChainTerm{-1, acc, next});
  };

  for (int j = 1; j <= genus; ++j) {
    const std::string x = "x" + std::to_string(j), y = "y" + std::to_string(j);
    QPStructure d = fuse(double_bivector(m, pd, x, y));
    std::optional<QHStructure> ds;
    if (classes) ds = fuse(double_form(m, pd, x, y));
    absorb(d, ds, torus_chain(0, 1));
  }
  for (int j = 0; j < nc; ++j) {
    Site one;
    one.model = m;
    one.factors.push_back(Factor{classes ? FactorKind::Class : FactorKind::Full, class_reps[j],
                                 "z" + std::to_string(j + 1)});
    QPStructure k = conj_bivector(one, pd);
    std::optional<QHStructure> ks;
    if (classes) ks = class_form(one, pd);
    absorb(k, ks, TwoChain{});
  }

  out.bivector = *P;
  out.bivector.name = classes ? "P_surface" : "GP_surface";
  out.relator = P->actions[0].phi;
  for (int a = 0; a < P->site.arity(); ++a)
    if (P->site.factors[a].letter[0] == 'z') out.class_factors.push_back(a);
  out.chain = chain;
  if (classes) {
    out.form = *S;
    out.form->name = "sigma_surface";
    QHStructure c;
    c.site = P->site;
    c.pairing = pd;
    c.pairs = chain_pairs(chain);
    c.tau = out.class_factors;
    c.actions = P->actions;
    c.name = "omega_c";
    out.chain_form = c;
  }
  return out;
}

TensorAtPoint P_G_at(std::shared_ptr<const LieAlgebraModel> m, PairingPtr pd, const MatC& q) {
  Site s;
  s.model = std::move(m);
  s.factors.push_back(Factor{FactorKind::Full, MatC(), "x"});
  QPStructure P = conj_bivector(s, std::move(pd));
  TensorAtPoint t;
  t.kind = TensorKind::Bivector;
  t.frame = make_frame(s, {q});
  t.coeffs = bivector_frame(P, {q}, t.frame, &t.residual);
  return t;
}

TensorAtPoint restrict_to_class(const QPStructure& s, const PointC& p, double tol) {
  TensorAtPoint t;
  t.kind = TensorKind::Bivector;
  t.frame = make_frame(s.site, p);
  t.coeffs = bivector_frame(s, p, t.frame, &t.residual);
  double scale = 1.0;
  for (const auto& q : p) scale = std::max(scale, q.norm() * inverse<cd>(q).norm());
  if (t.residual > tol * scale) throw Error(ErrorCode::NotTangent, "bivector leaves the class tangent space");
  return t;
}

TauValue tau_C_at(const LieAlgebraModel& m, const PairingData& pd, const MatC& q, const MatC& v, const MatC& w,
                  std::uint64_t seed) {
  auto [x, res] = class_lift(m, q, v);
  if (res > 1e-8 * std::max(1.0, v.norm())) throw Error(ErrorCode::LiftFailed, "tangent is not tangent to the class");
  const MatC& eta = pd.lower();
  MatC qi = inverse<cd>(q);
  VecC ww = m.coords<cd>(MatC(qi * w + w * qi));
  auto tau = [&](const VecC& X) { return 0.5 * (X.transpose() * eta * ww)(0, 0); };
  TauValue out;
  out.value = tau(x);
  // Shift the lift by a stabilizer element of q.
  MatC M(m.n * m.n, m.d);
  for (int j = 0; j < m.d; ++j) M.col(j) = flatten<cd>(MatC(q * m.basis[j] - m.basis[j] * q));
  Eigen::JacobiSVD<MatC> svd(M, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  Rng rng(seed);
  VecC z = VecC::Zero(m.d);
  double top = s.size() ? s(0) : 0.0;
  for (int i = 0; i < m.d; ++i) {
    double si = i < s.size() ? s(i) : 0.0;
    if (si <= 1e-9 * std::max(1.0, top)) z += rng.cnormal() * svd.matrixV().col(i);
  }
  out.well_definedness = std::abs(tau(VecC(x + z)) - out.value);
  return out;
}

TensorAtPoint double_at(std::shared_ptr<const LieAlgebraModel> m, PairingPtr pd, const MatC& q1, const MatC& q2,
                        TensorKind mode) {
  TensorAtPoint t;
  t.kind = mode;
  PointC p{q1, q2};
  if (mode == TensorKind::Bivector) {
    QPStructure P = double_bivector(m, pd);
    t.frame = make_frame(P.site, p);
    t.coeffs = bivector_frame(P, p, t.frame, &t.residual);
  } else {
    QHStructure S = double_form(m, pd);
    t.frame = make_frame(S.site, p);
    t.coeffs = form_frame(S, p, t.frame);
  }
  return t;
}

MatC momentum_differential(const Site& s, const std::vector<ActionComp>& acts, const PointC& p, const Frame& f) {
  const auto& m = *s.model;
  const int d = m.d;
  PointC pinv = inverses<cd>(p);
  MatC D(d * acts.size(), f.N);
  for (size_t c = 0; c < acts.size(); ++c) {
    MatC phinv = word_eval<cd>(acts[c].phi.inverse(), p, pinv, m.n);
    for (int a = 0; a < f.N; ++a) {
      Tangent<cd> t = frame_tangent(s, f, a);
      MatC dphi = word_tangent<cd>(acts[c].phi, p, pinv, t.v, m.n);
      D.block(c * d, a, d, 1) = maurer_cartan<cd>(m, phinv, dphi, Side::Left);
    }
  }
  return D;
}

MatC fund_frame(const Site& s, const std::vector<ActionComp>& acts, const PointC& p, const Frame& f) {
  const int d = s.d();
  PointC pinv = inverses<cd>(p);
  MatC F(f.N, d * acts.size());
  for (size_t c = 0; c < acts.size(); ++c)
    F.block(0, c * d, f.N, d) = f.left_pinv * genmap_left<cd>(*s.model, acts[c].fund, p, pinv);
  return F;
}

namespace {
// Ad_{Phi_c} for each component.
std::vector<MatC> momentum_ad(const Site& s, const std::vector<ActionComp>& acts, const PointC& p) {
  const auto& m = *s.model;
  PointC pinv = inverses<cd>(p);
  std::vector<MatC> r;
  for (const auto& a : acts) {
    MatC phi = word_eval<cd>(a.phi, p, pinv, m.n);
    r.push_back(m.Ad<cd>(phi, inverse<cd>(phi)));
  }
  return r;
}
}  // namespace

double momentum_residual(const QPStructure& s, const PointC& p) {
  const auto& m = *s.site.model;
  const int d = m.d;
  Frame f = make_frame(s.site, p);
  MatC P = bivector_frame(s, p, f);
  MatC D = momentum_differential(s.site, s.actions, p, f);
  MatC F = fund_frame(s.site, s.actions, p, f);
  std::vector<MatC> ad = momentum_ad(s.site, s.actions, p);
  const MatC& H = s.pairing->eta_upper;
  double worst = 0.0;
  for (size_t c = 0; c < s.actions.size(); ++c) {
    MatC adinv = ad[c].inverse();
    for (int k = 0; k < d; ++k) {
      VecC alpha = D.row(c * d + k).transpose();
      VecC lhs = 2.0 * P.transpose() * alpha;
      VecC e = VecC::Zero(d);
      e(k) = 1.0;
      VecC X = H * (e + adinv.transpose() * e);
      VecC rhs = F.block(0, c * d, f.N, d) * X;
      worst = std::max(worst, max_abs(VecC(lhs - rhs)));
    }
  }
  return worst;
}

double momentum_residual(const QHStructure& s, const PointC& p) {
  const auto& m = *s.site.model;
  const int d = m.d;
  Frame f = make_frame(s.site, p);
  PointC pinv = inverses<cd>(p);
  MatC D = momentum_differential(s.site, s.actions, p, f);
  std::vector<MatC> ad = momentum_ad(s.site, s.actions, p);
  const MatC& eta = s.pairing->lower();
  double worst = 0.0;
  for (size_t c = 0; c < s.actions.size(); ++c) {
    for (int k = 0; k < d; ++k) {
      VecC e = VecC::Zero(d);
      e(k) = 1.0;
      Tangent<cd> fx = fund_tangent(s.site, s.actions[c].fund, p, e);
      for (int a = 0; a < f.N; ++a) {
        cd lhs = eval_form<cd>(s, p, pinv, fx, frame_tangent(s.site, f, a));
        VecC w = D.block(c * d, a, d, 1);
        cd rhs = 0.5 * ((eta * e).transpose() * (w + ad[c] * w))(0, 0);
        worst = std::max(worst, std::abs(lhs - rhs));
      }
    }
  }
  return worst;
}

MatC rho_Phi(const Site& s, const std::vector<ActionComp>& acts, const PointC& p, const Frame& f) {
  const int d = s.d();
  MatC D = momentum_differential(s, acts, p, f);
  MatC F = fund_frame(s, acts, p, f);
  std::vector<MatC> ad = momentum_ad(s, acts, p);
  MatC rho = MatC::Zero(f.N, f.N);
  for (size_t c = 0; c < acts.size(); ++c) {
    MatC I = MatC::Identity(d, d);
    rho += F.block(0, c * d, f.N, d) * (I - ad[c]) * D.block(c * d, 0, d, f.N);
  }
  return rho;
}

DualityResidual duality_residual(const QPStructure& P, const QHStructure& sigma, const PointC& p) {
  sigma.pairing->require_nondegenerate("duality_residual");
  Frame f = make_frame(P.site, p);
  MatC Pf = bivector_frame(P, p, f);
  MatC S = form_frame(sigma, p, f);
  MatC rho = rho_Phi(P.site, P.actions, p, f);
  MatC I = MatC::Identity(f.N, f.N);
  DualityResidual r;
  r.p_sigma = max_abs(MatC(Pf * S - (I - 0.25 * rho)));
  r.sigma_p = max_abs(MatC(S * Pf - (I - 0.25 * rho.transpose())));
  return r;
}

namespace {
MatC kernel_basis(const MatC& A, double tol) {
  if (A.cols() == 0) return MatC(0, 0);
  Eigen::JacobiSVD<MatC> svd(A, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  double top = s.size() ? s(0) : 0.0;
  int rank = 0;
  for (int i = 0; i < s.size(); ++i)
    if (s(i) > tol * std::max(1.0, top)) ++rank;
  return svd.matrixV().rightCols(A.cols() - rank);
}

int rank_of(const MatC& A, double tol) {
  if (A.size() == 0) return 0;
  Eigen::JacobiSVD<MatC> svd(A);
  const auto& s = svd.singularValues();
  double top = s(0);
  int r = 0;
  for (int i = 0; i < s.size(); ++i)
    if (s(i) > tol * std::max(1.0, top)) ++r;
  return r;
}
}  // namespace

TensorAtPoint reconstruct_dual(const QPStructure* P, const QHStructure* sigma, ReconstructDirection dir,
                               const PointC& p, double tol) {
  const bool from_form = dir == ReconstructDirection::BivectorFromForm;
  if (from_form && !sigma) throw Error(ErrorCode::Unsupported, "reconstruction needs the 2-form");
  if (!from_form && !P) throw Error(ErrorCode::Unsupported, "reconstruction needs the bivector");
  const Site& site = from_form ? sigma->site : P->site;
  const auto& acts = from_form ? sigma->actions : P->actions;
  const PairingData& pd = from_form ? *sigma->pairing : *P->pairing;
  pd.require_nondegenerate("reconstruct_dual");
  const int d = site.d();
  const int C = static_cast<int>(acts.size());
  Frame f = make_frame(site, p);
  const int N = f.N;
  MatC D = momentum_differential(site, acts, p, f);
  MatC F = fund_frame(site, acts, p, f);
  MatC rho = rho_Phi(site, acts, p, f);
  std::vector<MatC> ad = momentum_ad(site, acts, p);
  const MatC& eta = *pd.eta_lower;
  const MatC H = eta.inverse();
  MatC I = MatC::Identity(N, N);

  TensorAtPoint out;
  out.frame = f;
  MatC stacked(N, C * d + N);
  // rhs(z) maps an unknown z = (group part, frame part) to the image.
  MatC rhs(N, C * d + N);
  if (from_form) {
    out.kind = TensorKind::Bivector;
    MatC S = form_frame(*sigma, p, f);
    stacked << D.transpose(), S.transpose();
    for (int c = 0; c < C; ++c) {
      MatC adinv = ad[c].inverse();
      MatC Id = MatC::Identity(d, d);
      rhs.block(0, c * d, N, d) = 0.5 * F.block(0, c * d, N, d) * H * (Id + adinv.transpose());
    }
    rhs.block(0, C * d, N, N) = I - 0.25 * rho;
  } else {
    out.kind = TensorKind::TwoForm;
    MatC Pf = bivector_frame(*P, p, f);
    stacked << F, Pf.transpose();
    for (int c = 0; c < C; ++c) {
      MatC Id = MatC::Identity(d, d);
      rhs.block(0, c * d, N, d) = 0.5 * D.block(c * d, 0, d, N).transpose() * (Id + ad[c].transpose()) * eta;
    }
    rhs.block(0, C * d, N, N) = I - 0.25 * rho.transpose();
  }
  if (N > 0 && rank_of(stacked, tol) < N)
    throw Error(ErrorCode::NotEpimorphism, "stacked map is not onto the frame at this point");
  auto cod = stacked.completeOrthogonalDecomposition();
  MatC Z = N > 0 ? MatC(cod.solve(MatC::Identity(N, N))) : MatC(C * d + N, 0);
  MatC img = rhs * Z;  // column b is the image of frame covector b
  out.coeffs = img.transpose();
  MatC K = kernel_basis(stacked, tol);
  out.residual = K.cols() ? max_abs(MatC(rhs * K)) : 0.0;
  return out;
}

RankReport nondegeneracy_check(const QHStructure& s, const PointC& p, double tol) {
  Frame f = make_frame(s.site, p);
  MatC S = form_frame(s, p, f);
  MatC D = momentum_differential(s.site, s.actions, p, f);
  MatC st(S.rows() + D.rows(), f.N);
  st << S.transpose(), D;
  RankReport r;
  r.expected = f.N;
  if (f.N == 0) return r;
  Eigen::JacobiSVD<MatC> svd(st);
  const auto& sv = svd.singularValues();
  r.rank = rank_of(st, tol);
  r.smallest_singular = sv(std::min<Eigen::Index>(sv.size(), f.N) - 1);
  r.kernel_intersection = f.N - r.rank;
  return r;
}

RankReport nondegeneracy_check(const QPStructure& s, const PointC& p, double tol) {
  Frame f = make_frame(s.site, p);
  MatC Pf = bivector_frame(s, p, f);
  MatC F = fund_frame(s.site, s.actions, p, f);
  MatC st(f.N, f.N + F.cols());
  st << Pf.transpose(), F;
  RankReport r;
  r.expected = f.N;
  if (f.N == 0) return r;
  Eigen::JacobiSVD<MatC> svd(st);
  const auto& sv = svd.singularValues();
  r.rank = rank_of(st, tol);
  r.smallest_singular = sv(f.N - 1);
  r.kernel_intersection = f.N - r.rank;
  return r;
}

double quasi_closed_residual(const QHStructure& s, const std::vector<PointC>& points, int triples,
                             std::uint64_t seed) {
  double worst = 0.0;
  FormEval form{&s};
  const auto& m = *s.site.model;
  for (size_t i = 0; i < points.size(); ++i) {
    Rng rng(split_seed(seed, i));
    const PointC& p = points[i];
    for (int t = 0; t < triples; ++t) {
      GenField X, Y, Z;
      for (int a = 0; a < s.site.arity(); ++a) {
        X.xi.push_back(random_algebra(m, rng));
        Y.xi.push_back(random_algebra(m, rng));
        Z.xi.push_back(random_algebra(m, rng));
      }
      cd ds = exterior_d3(form, s.site, p, X, Y, Z);
      cd lam = lambda_pullback(s.site, *s.pairing, s.actions, p, field_at<cd>(s.site, X, p),
                               field_at<cd>(s.site, Y, p), field_at<cd>(s.site, Z, p));
      worst = std::max(worst, std::abs(ds - lam));
    }
  }
  return worst;
}

double mult_calibration_residual(std::shared_ptr<const LieAlgebraModel> m, PairingPtr pd, int points, int triples,
                                 std::uint64_t seed) {
  QHStructure w;
  w.site = single_site(m, {"x", "y"});
  w.pairing = pd;
  w.pairs.push_back(PairTerm{0.5, Word::letter(0), Side::Left, Word::letter(1), Side::Right});
  const GenMap none = GenMap::zero(2);
  const std::vector<ActionComp> factors{{none, Word::letter(0)}, {none, Word::letter(1)}};
  const std::vector<ActionComp> product_map{{none, Word{{{0, 1}, {1, 1}}}}};
  FormEval form{&w};
  double worst = 0.0;
  for (int i = 0; i < points; ++i) {
    PointC p = random_point(w.site, split_seed(seed, i));
    Rng rng(split_seed(seed ^ 0xC0FFEEull, i));
    for (int t = 0; t < triples; ++t) {
      GenField X, Y, Z;
      for (int a = 0; a < 2; ++a) {
        X.xi.push_back(random_algebra(*m, rng));
        Y.xi.push_back(random_algebra(*m, rng));
        Z.xi.push_back(random_algebra(*m, rng));
      }
      Tangent<cd> x = field_at<cd>(w.site, X, p), y = field_at<cd>(w.site, Y, p), z = field_at<cd>(w.site, Z, p);
      cd lhs = exterior_d3(form, w.site, p, X, Y, Z);
      cd rhs = lambda_pullback(w.site, *pd, factors, p, x, y, z) - lambda_pullback(w.site, *pd, product_map, p, x, y, z);
      worst = std::max(worst, std::abs(lhs - rhs));
    }
  }
  return worst;
}

double invariance_residual(const QPStructure& s, const PointC& p, const MatC& g) {
  const auto& m = *s.site.model;
  PointC gp = conjugate_point(p, g);
  MatC P0 = bivector_left<cd>(s, p, inverses<cd>(p));
  MatC P1 = bivector_left<cd>(s, gp, inverses<cd>(gp));
  MatC A = m.Ad<cd>(g, inverse<cd>(g));
  const int k = s.site.arity(), d = m.d;
  MatC B = MatC::Zero(k * d, k * d);
  for (int a = 0; a < k; ++a) B.block(a * d, a * d, d, d) = A;
  return max_abs(MatC(P1 - B * P0 * B.transpose()));
}

double invariance_residual(const QHStructure& s, const PointC& p, const MatC& g) {
  const auto& m = *s.site.model;
  PointC gp = conjugate_point(p, g);
  MatC gi = inverse<cd>(g);
  MatC A = m.Ad<cd>(g, gi);
  Frame f = make_frame(s.site, p);
  PointC pinv = inverses<cd>(p), gpinv = inverses<cd>(gp);
  double worst = 0.0;
  std::vector<Tangent<cd>> t0, t1;
  for (int a = 0; a < f.N; ++a) {
    Tangent<cd> t = frame_tangent(s.site, f, a);
    Tangent<cd> u = t;
    for (int b = 0; b < s.site.arity(); ++b) {
      u.v[b] = g * t.v[b] * gi;
      u.lift[b] = A * t.lift[b];
    }
    t0.push_back(t);
    t1.push_back(u);
  }
  for (int a = 0; a < f.N; ++a)
    for (int b = 0; b < f.N; ++b)
      worst = std::max(worst, std::abs(eval_form<cd>(s, gp, gpinv, t1[a], t1[b]) -
                                       eval_form<cd>(s, p, pinv, t0[a], t0[b])));
  return worst;
}

double bivector_difference(const QPStructure& a, const QPStructure& b, const PointC& p) {
  Frame f = make_frame(a.site, p);
  return max_abs(MatC(bivector_frame(a, p, f) - bivector_frame(b, p, f)));
}

double form_difference(const QHStructure& a, const QHStructure& b, const PointC& p) {
  Frame f = make_frame(a.site, p);
  return max_abs(MatC(form_frame(a, p, f) - form_frame(b, p, f)));
}

}  // namespace qp
