#include "support.hpp"

using namespace qpt;

namespace {

double qp_law(const QPStructure& P, int points, std::uint64_t seed) {
  Rng rng(seed);
  return max_over_points(P.site, points, seed, [&](const PointC& p, int) {
    ScalarField f1 = test_function(P.site, rng), f2 = test_function(P.site, rng), f3 = test_function(P.site, rng);
    VecC a = differential_left<cd>(f1, P.site, p), b = differential_left<cd>(f2, P.site, p),
         c = differential_left<cd>(f3, P.site, p);
    return std::abs(jacobiator(P, f1, f2, f3, p) - 2.0 * eval_phiM(P, p, a, b, c));
  });
}

template <class S>
double momentum(const S& s, int points, std::uint64_t seed) {
  return max_over_points(s.site, points, seed, [&](const PointC& p, int) { return momentum_residual(s, p); });
}

SurfaceDescriptor surface(int genus, int classes, SurfaceVariant v,
                          std::shared_ptr<const LieAlgebraModel> m = sl2(), PairingPtr pd = sl2_trace()) {
  std::vector<MatC> reps;
  const double ev[] = {1.3, 1.5, 1.2};
  for (int i = 0; i < classes; ++i) {
    MatC r = MatC::Identity(m->n, m->n);
    r(0, 0) = ev[i % 3];
    r(1, 1) = 1 / ev[i % 3];
    reps.push_back(r);
  }
  return assemble_surface_site(std::move(m), std::move(pd), genus, reps, v);
}

}  // namespace

TEST(ConjBivector, PointValues) {
  MatC I = MatC::Identity(2, 2);
  EXPECT_LE(maxabs(P_G_at(sl2(), sl2_trace(), I).coeffs), 1e-15);
  auto ab = model(make_abelian(2));
  EXPECT_LE(maxabs(P_G_at(ab, pairing(trace_pairing(*ab)), diag2(2, 3)).coeffs), 1e-15);
  TensorAtPoint t = P_G_at(sl2(), sl2_trace(), diag2(2.0, 0.5));
  EXPECT_GT(maxabs(t.coeffs), 0.1);
  QPStructure PG = conj_bivector(full_site(sl2(), 1), sl2_trace());
  EXPECT_LE(momentum_residual(PG, {diag2(2.0, 0.5)}), 1e-10);
}

TEST(ConjBivector, WrongMomentumIsDetected) {
  QPStructure PG = conj_bivector(full_site(sl2(), 1), sl2_trace());
  PG.actions[0].phi = Word{{{0, 1}, {0, 1}}};  // x^2
  EXPECT_GT(momentum(PG, 4, 2), 1e-3);
}

TEST(ClassBivector, RestrictsToClass) {
  QPStructure PC = conj_bivector(class_site(sl2(), diag2(2.0, 0.5)), sl2_trace());
  double w = max_over_points(PC.site, 8, 4, [&](const PointC& p, int) { return restrict_to_class(PC, p).residual; });
  EXPECT_LE(w, 1e-10);
  QPStructure central = conj_bivector(class_site(sl2(), MatC::Identity(2, 2)), sl2_trace());
  TensorAtPoint t = restrict_to_class(central, {MatC::Identity(2, 2)});
  EXPECT_EQ(t.coeffs.size(), 0);
}

TEST(ClassBivector, NonInvariantPairingLeavesClass) {
  PairingData bad = *sl2_trace();
  bad.eta_upper(1, 1) = 3.0;
  bad.eta_upper(0, 0) = 1.0;
  QPStructure PC = conj_bivector(class_site(sl2(), diag2(2.0, 0.5)), pairing(bad));
  PointC p = random_point(PC.site, 5);
  Frame f = make_frame(PC.site, p);
  double res = 0;
  bivector_frame(PC, p, f, &res);
  EXPECT_GT(res, 1e-3);
  try {
    restrict_to_class(PC, p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotTangent);
  }
}

TEST(ClassForm, AlternatingAndWellDefined) {
  const auto& m = *sl2();
  Rng rng(6);
  MatC q = diag2(1.5, 1 / 1.5);
  MatC g = random_group_element(m, rng);
  q = g * q * g.inverse();
  auto tangent = [&] {
    MatC X = m.element<cd>(rng.cnormal_vec(3));
    return MatC(q * X - X * q);
  };
  MatC v = tangent(), w = tangent();
  EXPECT_LE(std::abs(tau_C_at(m, *sl2_trace(), q, v, v).value), 1e-10);
  TauValue a = tau_C_at(m, *sl2_trace(), q, v, w), b = tau_C_at(m, *sl2_trace(), q, w, v);
  EXPECT_LE(std::abs(a.value + b.value), 1e-10);
  EXPECT_LE(a.well_definedness, 1e-10);
  try {
    tau_C_at(m, *sl2_trace(), q, MatC(q * m.basis[0]), w);  // left translate, not tangent to the class
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::LiftFailed);
  }
}

TEST(Double, IdentityPointMatchesContraction) {
  auto ab = model(make_abelian(2));
  auto pd = pairing(trace_pairing(*ab));
  MatC I = MatC::Identity(2, 2);
  TensorAtPoint t = double_at(ab, pd, I, I, TensorKind::Bivector);
  MatC ambient = t.frame.left * t.coeffs * t.frame.left.transpose();
  MatC want = MatC::Zero(4, 4);
  want.topRightCorner(2, 2) = pd->eta_upper;
  want.bottomLeftCorner(2, 2) = -pd->eta_upper.transpose();
  EXPECT_LE(maxabs(ambient - want), 1e-14);
  EXPECT_GT(maxabs(ambient), 0.1);
}

TEST(QuasiPoissonLaw, BaseAndFusedStructures) {
  EXPECT_LE(qp_law(conj_bivector(full_site(sl2(), 1), sl2_trace()), 16, 1), 1e-7);
  auto PX = double_bivector(sl2(), sl2_trace());
  EXPECT_LE(qp_law(PX, 16, 2), 1e-7);
  EXPECT_LE(qp_law(fuse(PX), 16, 3), 1e-7);
  EXPECT_LE(qp_law(surface(1, 1, SurfaceVariant::FullGroups).bivector, 16, 4), 1e-7);
  EXPECT_LE(qp_law(surface(2, 2, SurfaceVariant::FullGroups).bivector, 8, 5), 1e-7);
}

TEST(QuasiPoissonLaw, OtherGroups) {
  auto sl3 = model(make_sl(3));
  EXPECT_LE(qp_law(conj_bivector(full_site(sl3, 1), pairing(trace_pairing(*sl3))), 6, 6), 1e-7);
  auto gl2 = model(make_gl(2));
  EXPECT_LE(qp_law(double_bivector(gl2, pairing(trace_pairing(*gl2))), 6, 7), 1e-7);
}

TEST(QuasiPoissonLaw, JacobiatorIsNotZeroForEntryFunctions) {
  // guards against a vacuous law: the right-hand side must be generically nonzero
  auto P1 = fuse(double_bivector(sl2(), sl2_trace()));
  Rng rng(3);
  PointC p = random_point(P1.site, 3);
  ScalarField f1 = test_function(P1.site, rng), f2 = test_function(P1.site, rng), f3 = test_function(P1.site, rng);
  EXPECT_GT(std::abs(jacobiator(P1, f1, f2, f3, p)), 1e-3);
}

TEST(Momentum, BivectorMode) {
  EXPECT_LE(momentum(conj_bivector(full_site(sl2(), 1), sl2_trace()), 16, 1), 1e-9);
  auto PX = double_bivector(sl2(), sl2_trace());
  EXPECT_LE(momentum(PX, 16, 2), 1e-9);
  EXPECT_LE(momentum(fuse(PX), 16, 3), 1e-9);
  for (auto [g, n] : {std::pair{1, 0}, {1, 1}, {2, 0}}) {
    EXPECT_LE(momentum(surface(g, n, SurfaceVariant::FullGroups).bivector, 16, 4), 1e-9) << g << n;
    EXPECT_LE(momentum(surface(g, n, SurfaceVariant::Classes).bivector, 16, 5), 1e-9) << g << n;
  }
}

TEST(Momentum, FormMode) {
  QHStructure tau = class_form(class_site(sl2(), diag2(2.0, 0.5)), sl2_trace());
  EXPECT_LE(momentum(tau, 16, 1), 1e-10);
  EXPECT_LE(momentum(double_form(sl2(), sl2_trace()), 16, 2), 1e-9);
  for (auto [g, n] : {std::pair{1, 0}, {1, 1}, {2, 0}})
    EXPECT_LE(momentum(*surface(g, n, SurfaceVariant::Classes).form, 16, 3), 1e-9) << g << n;
}

TEST(RhoPhi, VanishesAtIdentity) {
  QPStructure PG = conj_bivector(full_site(sl2(), 1), sl2_trace());
  PointC p{MatC::Identity(2, 2)};
  Frame f = make_frame(PG.site, p);
  EXPECT_LE(maxabs(rho_Phi(PG.site, PG.actions, p, f)), 1e-15);
  std::vector<ActionComp> constant{ActionComp{GenMap::conj(1), Word{}}};
  PointC q = random_point(PG.site, 3);
  EXPECT_LE(maxabs(rho_Phi(PG.site, constant, q, make_frame(PG.site, q))), 1e-15);
}

TEST(QuasiClosed, Forms) {
  auto pts = [](const Site& s, int n, std::uint64_t seed) {
    std::vector<PointC> r;
    for (int i = 0; i < n; ++i) r.push_back(random_point(s, split_seed(seed, i)));
    return r;
  };
  QHStructure SX = double_form(sl2(), sl2_trace());
  EXPECT_LE(quasi_closed_residual(SX, pts(SX.site, 16, 1)), 1e-7);
  QHStructure tau = class_form(class_site(sl2(), diag2(2.0, 0.5)), sl2_trace());
  EXPECT_LE(quasi_closed_residual(tau, pts(tau.site, 16, 2)), 1e-7);
  QHStructure S11 = *surface(1, 1, SurfaceVariant::Classes).form;
  EXPECT_LE(quasi_closed_residual(S11, pts(S11.site, 16, 3)), 1e-7);
  EXPECT_LE(mult_calibration_residual(sl2(), sl2_trace(), 16), 1e-7);
  auto sl3 = model(make_sl(3));
  EXPECT_LE(mult_calibration_residual(sl3, pairing(trace_pairing(*sl3)), 4), 1e-7);
}

TEST(QuasiClosed, DroppingTheCrossTermBreaksIt) {
  QHStructure SX = double_form(sl2(), sl2_trace());
  SX.pairs.pop_back();
  std::vector<PointC> p{random_point(SX.site, 1), random_point(SX.site, 2)};
  EXPECT_GT(quasi_closed_residual(SX, p), 1e-3);
}

TEST(Fusion, ZeroPairingLeavesTensorUnchanged) {
  auto zero = pairing(make_pairing(*sl2(), MatC::Zero(3, 3), MatC::Zero(3, 3)));
  Site s = full_site(sl2(), 2);
  std::vector<ActionComp> acts{ActionComp{GenMap::single(2, 0, 1, -1), Word::letter(0)},
                               ActionComp{GenMap::single(2, 1, 1, -1), Word::letter(1)}};
  QPStructure Z = zero_bivector(s, zero, acts);
  QPStructure F = fuse(Z);
  PointC p = random_point(s, 4);
  EXPECT_EQ(bivector_difference(Z, F, p), 0.0);
}

TEST(Fusion, Associative) {
  QPStructure PG = conj_bivector(full_site(sl2(), 1), sl2_trace());
  QPStructure triple = product(product(PG, PG), PG);
  QPStructure left = fuse(fuse(triple, 0, 1), 0, 1);
  QPStructure right = fuse(fuse(triple, 1, 2), 0, 1);
  double w = max_over_points(triple.site, 8, 6, [&](const PointC& p, int) { return bivector_difference(left, right, p); });
  EXPECT_LE(w, 1e-12);
  EXPECT_LE(momentum(left, 4, 7), 1e-9);
}

TEST(Fusion, Errors) {
  auto PX = double_bivector(sl2(), sl2_trace());
  try {
    fuse(PX, 1, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IncompatibleActions);
  }
  try {
    assemble_surface_site(sl2(), sl2_trace(), 0, {diag2(2, 0.5), diag2(2, 0.5)}, SurfaceVariant::Classes);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::BadSignature);
  }
}

TEST(Surface, PointLikeSite) {
  MatC c = MatC::Identity(2, 2);
  SurfaceDescriptor sd =
      assemble_surface_site(sl2(), sl2_trace(), 0, {c, c, MatC(-c)}, SurfaceVariant::Classes);
  PointC p = random_point(sd.bivector.site, 1);
  Frame f = make_frame(sd.bivector.site, p);
  EXPECT_EQ(f.N, 0);
  EXPECT_EQ(bivector_frame(sd.bivector, p, f).size(), 0);
}

TEST(Surface, Invariance) {
  SurfaceDescriptor sd = surface(1, 1, SurfaceVariant::Classes);
  Rng rng(3);
  double w = max_over_points(sd.bivector.site, 8, 9, [&](const PointC& p, int) {
    MatC g = random_group_element(*sl2(), rng);
    return std::max(invariance_residual(sd.bivector, p, g), invariance_residual(*sd.form, p, g));
  });
  EXPECT_LE(w, 1e-9);
}

TEST(Surface, FusedFormEqualsChainForm) {
  for (auto [g, n] : {std::pair{1, 1}, {2, 1}, {0, 3}}) {
    SurfaceDescriptor sd = surface(g, n, SurfaceVariant::Classes);
    double w = max_over_points(sd.bivector.site, 6, 10,
                               [&](const PointC& p, int) { return form_difference(*sd.form, *sd.chain_form, p); });
    EXPECT_LE(w, 1e-9) << g << n;
  }
}

TEST(Duality, DualPairs) {
  auto check = [](const QPStructure& P, const QHStructure& S, double tol) {
    double w = max_over_points(P.site, 16, 11, [&](const PointC& p, int) { return duality_residual(P, S, p).max(); });
    EXPECT_LE(w, tol) << P.name;
  };
  Site cls = class_site(sl2(), diag2(2.0, 0.5));
  check(conj_bivector(cls, sl2_trace()), class_form(cls, sl2_trace()), 1e-9);
  auto PX = double_bivector(sl2(), sl2_trace());
  auto SX = double_form(sl2(), sl2_trace());
  check(PX, SX, 1e-9);
  check(fuse(PX), fuse(SX), 1e-9);
  for (auto [g, n] : {std::pair{1, 1}, {2, 0}, {0, 3}}) {
    SurfaceDescriptor sd = surface(g, n, SurfaceVariant::Classes);
    check(sd.bivector, *sd.form, 1e-8);
  }
  auto sl3 = model(make_sl(3));
  auto pd3 = pairing(trace_pairing(*sl3));
  check(double_bivector(sl3, pd3), double_form(sl3, pd3), 1e-8);
}

TEST(Reconstruction, RoundTrips) {
  auto PX = double_bivector(sl2(), sl2_trace());
  auto SX = double_form(sl2(), sl2_trace());
  SurfaceDescriptor sd = surface(1, 1, SurfaceVariant::Classes);
  for (auto [P, S] : {std::pair{&PX, &SX}, {&sd.bivector, &*sd.form}}) {
    double w = max_over_points(P->site, 16, 12, [&](const PointC& p, int) {
      TensorAtPoint b = reconstruct_dual(nullptr, S, ReconstructDirection::BivectorFromForm, p);
      MatC ref = bivector_frame(*P, p, b.frame);
      TensorAtPoint f = reconstruct_dual(P, nullptr, ReconstructDirection::FormFromBivector, p);
      MatC sref = form_frame(*S, p, f.frame);
      return std::max({maxabs(b.coeffs - ref), maxabs(f.coeffs - sref), b.residual, f.residual});
    });
    EXPECT_LE(w, 1e-8);
  }
  try {
    reconstruct_dual(nullptr, nullptr, ReconstructDirection::BivectorFromForm, random_point(PX.site, 1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Unsupported);
  }
}

TEST(Nondegeneracy, Ranks) {
  SurfaceDescriptor sd = surface(1, 1, SurfaceVariant::Classes);
  double deficit = max_over_points(sd.bivector.site, 8, 13, [&](const PointC& p, int) {
    RankReport a = nondegeneracy_check(*sd.form, p), b = nondegeneracy_check(sd.bivector, p);
    return static_cast<double>((a.expected - a.rank) + (b.expected - b.rank));
  });
  EXPECT_EQ(deficit, 0.0);

  auto deg_m = model(make_sl2_plus_abelian(1));
  auto deg = pairing(trace_pairing(*deg_m, 1.0, {true, true, true, false}));
  auto PX = double_bivector(deg_m, deg);
  RankReport r = nondegeneracy_check(PX, random_point(PX.site, 3));
  // P is blind to the abelian block, and there the two central fields
  // (-q1 X, q2 X) and (q1 X, -q2 X) are proportional: one direction is missed
  EXPECT_EQ(r.expected - r.rank, 1);

  Site s = full_site(sl2(), 1);
  QPStructure zero = zero_bivector(s, sl2_trace(), {ActionComp{GenMap::zero(1), Word{}}});
  EXPECT_EQ(nondegeneracy_check(zero, random_point(s, 1)).rank, 0);
}
