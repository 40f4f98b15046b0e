#include "qpois/dirac.hpp"
#include "support.hpp"

using namespace qpt;

namespace {

double subspace_distance(const LagrangianSubspace& a, const LagrangianSubspace& b) {
  if (a.basis.cols() != b.basis.cols()) return 1.0;
  MatC pa = a.basis * a.basis.adjoint(), pb = b.basis * b.basis.adjoint();
  return maxabs(pa - pb);
}

MatC random_antisymmetric(int n, Rng& rng) {
  MatC a(n, n);
  for (int i = 0; i < n * n; ++i) a(i / n, i % n) = rng.cnormal();
  return a - a.transpose();
}

}  // namespace

TEST(SplitPairing, TrivialValues) {
  Rng rng(1);
  VecC v = rng.cnormal_vec(3), w = rng.cnormal_vec(3), al = rng.cnormal_vec(3);
  VecC a(6), b(6), c(6);
  a << v, VecC::Zero(3);
  b << w, VecC::Zero(3);
  EXPECT_EQ(std::abs(split_pairing(a, b)), 0.0);
  a << VecC::Zero(3), v;
  b << VecC::Zero(3), w;
  EXPECT_EQ(std::abs(split_pairing(a, b)), 0.0);
  c << v, al;
  EXPECT_LE(std::abs(split_pairing(c, c) - 2.0 * (al.transpose() * v)(0, 0)), 1e-14);
}

TEST(Graphs, SummandsAndDuality) {
  const int N = 4;
  EXPECT_LE(subspace_distance(graph_of_form(MatC::Zero(N, N)), tangent_summand(N)), 1e-15);
  EXPECT_LE(subspace_distance(graph_of_bivector(MatC::Zero(N, N)), cotangent_summand(N)), 1e-15);
  Rng rng(2);
  MatC S = random_antisymmetric(N, rng);
  LagrangianSubspace gs = graph_of_form(S);
  EXPECT_TRUE(gs.lagrangian());
  EXPECT_LE(subspace_distance(gs, graph_of_bivector(S.inverse())), 1e-12);
  // a symmetric form is not isotropic
  MatC sym = S * S.transpose() + MatC::Identity(N, N);
  EXPECT_FALSE(graph_of_form(sym).lagrangian());
}

TEST(CartanDirac, FibersAtIdentity) {
  const auto& pd = *sl2_trace();
  TargetPoint t = target_from_values(*sl2(), {MatC::Identity(2, 2)});
  DiracFibers fb = cartan_dirac_fibers(pd, t);
  EXPECT_LE(maxabs(fb.E.topRows(3)), 1e-15);
  EXPECT_LE(maxabs(fb.E.bottomRows(3) - *pd.eta_lower), 1e-15);
  EXPECT_LE(maxabs(fb.F.topRows(3) - 2.0 * MatC::Identity(3, 3)), 1e-15);
  EXPECT_LE(maxabs(fb.F.bottomRows(3)), 1e-15);
  Projections pq = projections_pq(pd, t);
  EXPECT_LE(maxabs(pq.p.topLeftCorner(3, 3)), 1e-15);
}

TEST(CartanDirac, ProjectionsAreTheObliqueSplitting) {
  const auto& pd = *sl2_trace();
  Site s = full_site(sl2(), 1);
  QPStructure PG = conj_bivector(s, sl2_trace());
  for (int i = 0; i < 8; ++i) {
    TargetPoint t = momentum_target(s, PG.actions, random_point(s, split_seed(5, i)));
    Projections pq = projections_pq(pd, t);
    DiracFibers fb = cartan_dirac_fibers(pd, t);
    const int T = t.dim();
    MatC EF(2 * T, 2 * T);
    EF << fb.E, fb.F;
    MatC D = MatC::Zero(2 * T, 2 * T);
    D.topLeftCorner(T, T).setIdentity();
    MatC oblique = EF * D * EF.inverse();
    EXPECT_LE(maxabs(pq.p - oblique), 1e-12);
    ProjectionReport r = projection_report(pd, t);
    EXPECT_LE(std::max({r.p_idempotent, r.q_idempotent, r.sum_identity, r.pq_zero}), 1e-10);
    EXPECT_LE(std::max({r.image_p, r.image_q, r.lagrangian}), 1e-9);
  }
}

TEST(CartanDirac, PairingBetweenTheSummands) {
  // <e(X), f(Y)> = 2 X.Y: a Lagrangian complement pairs non-degenerately with E
  const auto& pd = *sl2_trace();
  Site s = full_site(sl2(), 1);
  QPStructure PG = conj_bivector(s, sl2_trace());
  TargetPoint t = momentum_target(s, PG.actions, random_point(s, 3));
  DiracFibers fb = cartan_dirac_fibers(pd, t);
  MatC G = split_gram(fb.E, fb.F);
  EXPECT_LE(maxabs(G - 2.0 * *pd.eta_lower), 1e-12);
  EXPECT_LE(maxabs(split_gram(fb.E, fb.E)), 1e-12);
  EXPECT_LE(maxabs(split_gram(fb.F, fb.F)), 1e-12);
}

TEST(Transport, ForwardAndBackwardImages) {
  Rng rng(4);
  const int N = 4;
  MorphismData id;
  id.N = id.T = N;
  id.S = random_antisymmetric(N, rng);
  id.dPhi = MatC::Identity(N, N);
  LagrangianSubspace fwd = transport_image(tangent_summand(N), id, TransportDirection::Forward);
  EXPECT_LE(subspace_distance(fwd, graph_of_form(id.S)), 1e-12);

  id.S.setZero();
  LagrangianSubspace E = graph_of_form(random_antisymmetric(N, rng));
  EXPECT_LE(subspace_distance(transport_image(E, id, TransportDirection::Backward), E), 1e-12);

  MorphismData zero;
  zero.N = N;
  zero.T = 0;
  zero.S = random_antisymmetric(N, rng);
  zero.dPhi = MatC(0, N);
  LagrangianSubspace back = transport_image(LagrangianSubspace{MatC(0, 0), 0}, zero, TransportDirection::Backward);
  EXPECT_LE(subspace_distance(back, graph_of_form(MatC(-zero.S))), 1e-12);
}

TEST(Strongness, TrivialTargets) {
  Rng rng(6);
  const int N = 4;
  MorphismData md;
  md.N = N;
  md.T = 0;
  md.dPhi = MatC(0, N);
  md.S = random_antisymmetric(N, rng);
  EXPECT_TRUE(strongness_check(md, tangent_summand(N)).strong);
  md.S.setZero();
  StrongnessReport r = strongness_check(md, tangent_summand(N));
  EXPECT_FALSE(r.strong);
  EXPECT_EQ(r.intersection_dim, N);
}

TEST(Equivalence, ShippedSites) {
  std::vector<QHStructure> sites{double_form(sl2(), sl2_trace()), fuse(double_form(sl2(), sl2_trace())),
                                 class_form(class_site(sl2(), diag2(1.5, 1 / 1.5)), sl2_trace())};
  sites.push_back(*assemble_surface_site(sl2(), sl2_trace(), 1, {diag2(1.3, 1 / 1.3)}, SurfaceVariant::Classes).form);
  for (const auto& S : sites)
    for (int i = 0; i < 6; ++i) {
      PointC p = random_point(S.site, split_seed(7, i));
      EquivalenceReport e = dirac_equivalence(S, p);
      EXPECT_TRUE(e.momentum) << S.name;
      EXPECT_TRUE(e.agree()) << S.name;
      EXPECT_TRUE(e.a) << S.name;
      RankReport r = nondegeneracy_check(S, p);
      EXPECT_EQ(e.a, r.full());
    }
}

TEST(Equivalence, NegativeControl) {
  MorphismData md;
  md.N = 3;
  md.T = 0;
  md.S = MatC::Zero(3, 3);
  md.dPhi = MatC(0, 3);
  TargetPoint t;
  t.d = 3;
  EquivalenceReport e = dirac_equivalence(*sl2_trace(), md, t);
  EXPECT_TRUE(e.agree());
  EXPECT_FALSE(e.a);
}

TEST(Equivalence, DegeneratePairingRefused) {
  auto deg_m = model(make_sl2_plus_abelian(1));
  auto deg = pairing(trace_pairing(*deg_m, 1.0, {true, true, true, false}));
  Site s = full_site(deg_m, 1);
  TargetPoint t = momentum_target(s, conj_bivector(s, deg).actions, random_point(s, 1));
  try {
    projections_pq(*deg, t);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegeneratePairing);
  }
}

TEST(TechChain, ClassOfOrderFour) {
  // diag(i, -i) squares to -I, so Ad_{Phi^-1} has eigenvalue -1 on a 2-dimensional space
  MatC q = MatC::Zero(2, 2);
  q(0, 0) = cd(0, 1);
  q(1, 1) = cd(0, -1);
  QHStructure tau = class_form(class_site(sl2(), q), sl2_trace());
  for (int i = 0; i < 4; ++i) {
    TechChain t = tech_chain(tau, random_point(tau.site, split_seed(8, i)));
    EXPECT_EQ(t.ker_ad, 2);
    EXPECT_EQ(t.ker_sigma, 2);
    EXPECT_EQ(t.fund_rank, 2);
    EXPECT_EQ(t.dphi_rank, 2);
    EXPECT_EQ(t.ker_target, 2);
    EXPECT_LE(t.fund_in_kernel, 1e-10);
    EXPECT_LE(t.dphi_in_target, 1e-10);
  }
}
