#include "qpois/charvar.hpp"
#include "support.hpp"

using namespace qpt;

namespace {

struct Torus {
  SurfaceDescriptor sd;
  ScalarField tx, ty, txy;
};

Torus torus(SurfaceVariant v = SurfaceVariant::FullGroups, std::vector<MatC> classes = {}) {
  Torus t{assemble_surface_site(sl2(), sl2_trace(), 1, classes, v), {}, {}, {}};
  const Site& s = t.sd.bivector.site;
  t.tx = trace_function(parse_word(s, "x1"));
  t.ty = trace_function(parse_word(s, "y1"));
  t.txy = trace_function(parse_word(s, "x1 y1"));
  return t;
}

MatC minus_identity() { return MatC(-MatC::Identity(2, 2)); }

}  // namespace

TEST(Invariants, TraceWordsAreInvariant) {
  Torus t = torus();
  const Site& s = t.sd.bivector.site;
  PointC p = random_point(s, 3);
  EXPECT_LE(conjugation_invariance(s, t.txy, p), 1e-12);
  EXPECT_LE(infinitesimal_invariance(t.sd.bivector, t.txy, p), 1e-12);
  ScalarField entry = ScalarField::entry(parse_word(s, "x1"), 0, 1);
  EXPECT_GT(conjugation_invariance(s, entry, p), 1e-3);
  try {
    hamiltonian_field(t.sd.bivector, entry, p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotInvariant);
  }
}

TEST(Bracket, TrivialIdentities) {
  Torus t = torus();
  const auto& P = t.sd.bivector;
  PointC p = random_point(P.site, 4);
  EXPECT_LE(std::abs(bracket(P, t.tx, t.tx, p)), 1e-13);
  EXPECT_LE(std::abs(bracket(P, t.tx, t.ty, p) + bracket(P, t.ty, t.tx, p)), 1e-13);
  ScalarField prod = t.ty * t.txy;
  cd lhs = bracket(P, t.tx, prod, p);
  cd rhs = bracket(P, t.tx, t.ty, p) * t.txy.eval<cd>(p, 2) + t.ty.eval<cd>(p, 2) * bracket(P, t.tx, t.txy, p);
  EXPECT_LE(std::abs(lhs - rhs), 1e-9);
  QPStructure zero = zero_bivector(P.site, sl2_trace(), P.actions);
  EXPECT_EQ(std::abs(bracket(zero, t.tx, t.ty, p)), 0.0);
}

TEST(Bracket, DualFormTie) {
  Torus t = torus(SurfaceVariant::Classes, {diag2(1.3, 1 / 1.3)});
  const auto& P = t.sd.bivector;
  const auto& S = *t.sd.form;
  Rng rng(5);
  for (int i = 0; i < 8; ++i) {
    PointC p = random_point(P.site, split_seed(9, i));
    PointC pinv = inverses<cd>(p);
    HamiltonianField xf = hamiltonian_field(P, t.tx, p), xh = hamiltonian_field(P, t.txy, p);
    EXPECT_LE(std::abs(eval_form<cd>(S, p, pinv, xf.field, xh.field) - bracket(P, t.txy, t.tx, p)), 1e-8);
    // sigma(X_f, .) = df
    Frame f = make_frame(P.site, p);
    Tangent<cd> v = tangent_from_frame(P.site, f, rng.cnormal_vec(f.N));
    cd df_v = dual_lift<cd>(t.tx, p, v.v, 2);
    EXPECT_LE(std::abs(eval_form<cd>(S, p, pinv, xf.field, v) - df_v), 1e-8);
  }
}

TEST(Solver, CommutingStartIsAlreadySolved) {
  Torus t = torus();
  const Site& s = t.sd.bivector.site;
  MatC A = diag2(2.0, 0.5), B = diag2(0.25, 4.0);
  RepSample r = solve_relator_from(s, t.sd.relator, MatC::Identity(2, 2), {A, B});
  EXPECT_LE(r.residual, 1e-15);
  EXPECT_EQ(r.iterations, 0);
  EXPECT_EQ(relator_residual(s, t.sd.relator, MatC::Identity(2, 2), {A, B}), 0.0);
}

TEST(Solver, ConvergesToCentralTargets) {
  Torus t = torus();
  const Site& s = t.sd.bivector.site;
  for (const MatC& target : {MatC(MatC::Identity(2, 2)), minus_identity()})
    for (int i = 0; i < 8; ++i) {
      RepSample r = solve_relator(s, t.sd.relator, target, split_seed(13, i));
      EXPECT_LE(r.residual, 1e-10);
      EXPECT_LE(r.iterations, 200);
      MatC value = word_eval<cd>(t.sd.relator, r.point, 2);
      EXPECT_LE(maxabs(value - target), 1e-9);
      EXPECT_LE(group_membership_residual(s, r.point), 1e-10);
    }
}

TEST(Solver, ClassFactorsKeepTheirSpectrum) {
  Torus t = torus(SurfaceVariant::Classes, {diag2(1.5, 1 / 1.5)});
  const Site& s = t.sd.bivector.site;
  RepSample r = solve_relator(s, t.sd.relator, MatC::Identity(2, 2), 21);
  EXPECT_LE(r.residual, 1e-10);
  const MatC& z = r.point[s.arity() - 1];
  EXPECT_NEAR(std::abs(z.trace() - (1.5 + 1 / 1.5)), 0.0, 1e-12);
}

TEST(Solver, Sl3) {
  auto sl3 = model(make_sl(3));
  auto sd = assemble_surface_site(sl3, pairing(trace_pairing(*sl3)), 1, {}, SurfaceVariant::FullGroups);
  for (int i = 0; i < 3; ++i) {
    RepSample r = solve_relator(sd.bivector.site, sd.relator, MatC::Identity(3, 3), split_seed(2, i));
    EXPECT_LE(r.residual, 1e-10);
    EXPECT_LE(r.iterations, 200);
  }
}

TEST(Solver, DeterministicAndBounded) {
  Torus t = torus();
  const Site& s = t.sd.bivector.site;
  RepSample a = solve_relator(s, t.sd.relator, minus_identity(), 99);
  RepSample b = solve_relator(s, t.sd.relator, minus_identity(), 99);
  for (size_t i = 0; i < a.point.size(); ++i) EXPECT_EQ(maxabs(a.point[i] - b.point[i]), 0.0);
  EXPECT_EQ(a.iterations, b.iterations);
  SolverOptions tight;
  tight.max_iters = 1;
  try {
    solve_relator(s, t.sd.relator, minus_identity(), 99, tight);
    FAIL();
  } catch (const Error& e) {
    EXPECT_TRUE(e.code() == ErrorCode::MaxIters || e.code() == ErrorCode::Stalled);
  }
}

TEST(Reduction, JacobiOnInvariantsAtSolvedPoints) {
  Torus t = torus();
  const auto& P = t.sd.bivector;
  for (const MatC& target : {MatC(MatC::Identity(2, 2)), minus_identity()})
    for (int i = 0; i < 16; ++i) {
      RepSample r = solve_relator(P.site, t.sd.relator, target, split_seed(17, i));
      EXPECT_LE(std::abs(jacobiator_invariant(P, t.tx, t.ty, t.txy, r.point)), 1e-7);
    }
  // the same identity fails for matrix entries, by exactly the phi_M term
  Rng rng(3);
  PointC p = random_point(P.site, 5);
  ScalarField f1 = test_function(P.site, rng), f2 = test_function(P.site, rng), f3 = test_function(P.site, rng);
  cd J = jacobiator(P, f1, f2, f3, p);
  VecC a = differential_left<cd>(f1, P.site, p), b = differential_left<cd>(f2, P.site, p),
       c = differential_left<cd>(f3, P.site, p);
  EXPECT_GT(std::abs(J), 1e-3);
  EXPECT_LE(std::abs(J - 2.0 * eval_phiM(P, p, a, b, c)), 1e-8);
  EXPECT_LE(std::abs(jacobiator_invariant(P, f1, f2, f3, p) - 0.25 * J), 1e-12);
}

TEST(Reduction, PoissonIdeal) {
  Torus t = torus();
  const auto& P = t.sd.bivector;
  std::vector<PointC> pts;
  for (int i = 0; i < 8; ++i) pts.push_back(solve_relator(P.site, t.sd.relator, minus_identity(), split_seed(4, i)).point);
  EXPECT_LE(poisson_ideal_residual(P, t.sd.relator, minus_identity(), t.txy, pts), 1e-7);
  ScalarField F = ScalarField::trace(t.sd.relator);
  EXPECT_LE(poisson_ideal_residual(P, t.sd.relator, minus_identity(), F, pts), 1e-12);
  // invariant f brackets to zero with tr(Phi^m) everywhere. Over a central level the field of tr(Phi^m)
  // vanishes, so only a generic point separates a matrix entry from an invariant.
  PointC generic = random_point(P.site, 3);
  EXPECT_LE(poisson_ideal_residual(P, t.sd.relator, minus_identity(), t.txy, {generic}), 1e-9);
  ScalarField entry = ScalarField::entry(parse_word(P.site, "x1"), 0, 1);
  EXPECT_LE(poisson_ideal_residual(P, t.sd.relator, minus_identity(), entry, pts), 1e-7);
  EXPECT_GT(poisson_ideal_residual(P, t.sd.relator, minus_identity(), entry, {generic}), 1e-3);
}

TEST(Reduction, LevelTangencyAndFieldInvariance) {
  Torus t = torus();
  const auto& P = t.sd.bivector;
  Rng rng(8);
  for (int i = 0; i < 6; ++i) {
    PointC p = solve_relator(P.site, t.sd.relator, MatC::Identity(2, 2), split_seed(6, i)).point;
    HamiltonianField xf = hamiltonian_field(P, t.txy, p);
    EXPECT_LE(xf.level_tangency, 1e-9);
    MatC g = random_group_element(*sl2(), rng);
    HamiltonianField moved = hamiltonian_field(P, t.txy, conjugate_point(p, g));
    for (size_t a = 0; a < xf.field.v.size(); ++a)
      EXPECT_LE(maxabs(MatC(g * xf.field.v[a] * g.inverse()) - moved.field.v[a]), 1e-9);
  }
}

TEST(Reduction, AbelianModelIsFlat) {
  auto ab = model(make_abelian(2));
  auto sd = assemble_surface_site(ab, pairing(trace_pairing(*ab)), 1, {}, SurfaceVariant::FullGroups);
  const Site& s = sd.bivector.site;
  ScalarField f = trace_function(parse_word(s, "x1")), h = trace_function(parse_word(s, "y1")),
              k = trace_function(parse_word(s, "x1 y1^-1"));
  PointC p = random_point(s, 2);
  EXPECT_LE(std::abs(jacobiator_invariant(sd.bivector, f, h, k, p)), 1e-12);
}
