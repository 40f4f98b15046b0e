// Acceptance driver: one PASS/FAIL line per criterion.
//   qpois-acceptance [c1 c2 ...]
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "qpois/charvar.hpp"
#include "qpois/cli.hpp"
#include "qpois/dirac.hpp"
#include "qpois/quasi.hpp"
#include "qpois/random.hpp"

using namespace qp;

namespace {

using ModelPtr = std::shared_ptr<const LieAlgebraModel>;

ModelPtr model(LieAlgebraModel m) { return std::make_shared<const LieAlgebraModel>(std::move(m)); }
PairingPtr pairing(PairingData p) { return std::make_shared<const PairingData>(std::move(p)); }

constexpr int kPoints = 16;

struct Algebra {
  std::string name;
  ModelPtr m;
  PairingPtr pd;
  std::vector<MatC> classes;  // regular semisimple representatives
  std::vector<MatC> targets;  // central targets for the relator solver
};

MatC diag(std::vector<cd> v) {
  MatC m = MatC::Zero(v.size(), v.size());
  for (size_t i = 0; i < v.size(); ++i) m(i, i) = v[i];
  return m;
}

Algebra sl2() {
  static Algebra a{"sl2", model(make_sl(2)), nullptr, {diag({1.5, 1 / 1.5}), diag({1.3, 1 / 1.3})},
                   {MatC::Identity(2, 2), diag({-1.0, -1.0})}};
  if (!a.pd) a.pd = pairing(trace_pairing(*a.m));
  return a;
}

Algebra sl3() {
  auto m = model(make_sl(3));
  return {"sl3", m, pairing(trace_pairing(*m)), {diag({2.0, 0.8, 0.625})}, {MatC::Identity(3, 3)}};
}

Algebra gl2() {
  auto m = model(make_gl(2));
  return {"gl2", m, pairing(trace_pairing(*m)), {diag({1.5, 0.5})}, {MatC::Identity(2, 2)}};
}

// sl2 + one abelian direction, form supported on the sl2 block only
Algebra degenerate() {
  auto m = model(make_sl2_plus_abelian(1));
  return {"sl2+ab1 (degenerate H)", m, pairing(trace_pairing(*m, 1.0, {true, true, true, false})),
          {diag({1.5, 1 / 1.5, 1.0}), diag({1.3, 1 / 1.3, 1.0})},
          {MatC::Identity(3, 3), diag({-1.0, -1.0, 1.0})}};
}

std::vector<std::pair<std::string, ModelPtr>> shipped_models() {
  return {{"sl2", model(make_sl(2))},          {"sl3", model(make_sl(3))},
          {"gl2", model(make_gl(2))},          {"gl3", model(make_gl(3))},
          {"abelian2", model(make_abelian(2))}, {"sl2+ab1", model(make_sl2_plus_abelian(1))}};
}

ScalarField random_function(const Site& s, Rng& rng) {
  const int k = s.arity(), n = s.n();
  auto pick = [&](int hi) { return std::min(hi - 1, static_cast<int>(rng.uniform() * hi)); };
  ScalarField f = ScalarField::entry(Word::letter(pick(k)), pick(n), pick(n)).scaled(rng.cnormal());
  Word w;
  const int len = 1 + pick(3);
  for (int i = 0; i < len; ++i) w.letters.push_back({pick(k), rng.uniform() < 0.5 ? 1 : -1});
  return f + ScalarField::trace(w).scaled(rng.cnormal());
}

template <class F>
double sweep(const Site& s, std::uint64_t seed, F fn, int count = kPoints) {
  double w = 0.0;
  for (int i = 0; i < count; ++i) {
    double r = fn(random_point(s, split_seed(seed, i)), i);
    if (std::isnan(r)) return r;
    w = std::max(w, r);
  }
  return w;
}

SurfaceDescriptor surface(const Algebra& a, int genus, int classes, SurfaceVariant v) {
  std::vector<MatC> reps(a.classes.begin(), a.classes.begin() + classes);
  return assemble_surface_site(a.m, a.pd, genus, reps, v);
}

Site one_factor(const ModelPtr& m) {
  Site s;
  s.model = m;
  s.factors.push_back(Factor{FactorKind::Full, MatC(), "x"});
  return s;
}

Site class_factor(const ModelPtr& m, const MatC& rep) {
  Site s;
  s.model = m;
  s.factors.push_back(Factor{FactorKind::Class, rep, "z"});
  return s;
}

// Tracks the worst residual of each named part against its tolerance.
struct Tally {
  bool ok = true;
  std::vector<std::string> parts;
  void residual(const std::string& what, double r, double tol) {
    const bool pass = !std::isnan(r) && r <= tol;
    ok = ok && pass;
    parts.push_back(fmt::format("{} {:.2e}{}{:.0e}", what, r, pass ? "<=" : ">", tol));
  }
  void flag(const std::string& what, bool pass) {
    ok = ok && pass;
    parts.push_back(fmt::format("{} {}", what, pass ? "ok" : "NO"));
  }
  std::string text() const {
    std::string s;
    for (size_t i = 0; i < parts.size(); ++i) s += (i ? "; " : "") + parts[i];
    return s;
  }
};

template <class F>
void guarded(Tally& t, const std::string& what, F fn) {
  try {
    fn();
  } catch (const Error& e) {
    t.ok = false;
    t.parts.push_back(what + " threw " + e.what());
  }
}

// ---- criteria ----

void cartan_antisymmetry(Tally& t, const std::vector<Algebra>& algs) {
  for (const auto& a : algs) t.residual(a.name, a.pd->phi_antisymmetry, 1e-10);
}

void chi_identity(Tally& t, const std::vector<std::pair<std::string, ModelPtr>>& models) {
  for (const auto& [name, m] : models) {
    guarded(t, name, [&] { t.residual(name, verify_chi_identity(*m, trace_pairing(*m)), 1e-10); });
  }
}

double qp_law(const QPStructure& P, std::uint64_t seed) {
  return sweep(P.site, seed, [&](const PointC& p, int i) {
    Rng rng(split_seed(seed ^ 0x51, i));
    ScalarField f1 = random_function(P.site, rng), f2 = random_function(P.site, rng),
                f3 = random_function(P.site, rng);
    cd J = jacobiator(P, f1, f2, f3, p);
    VecC a = differential_left<cd>(f1, P.site, p), b = differential_left<cd>(f2, P.site, p),
         c = differential_left<cd>(f3, P.site, p);
    return std::abs(J - 2.0 * eval_phiM(P, p, a, b, c));
  });
}

void quasi_poisson(Tally& t, const Algebra& a) {
  const double tol = 1e-7;
  guarded(t, "P_G", [&] { t.residual("P_G", qp_law(conj_bivector(one_factor(a.m), a.pd), 31), tol); });
  guarded(t, "Px", [&] { t.residual("Px", qp_law(double_bivector(a.m, a.pd), 32), tol); });
  guarded(t, "P1", [&] { t.residual("P1", qp_law(fuse(double_bivector(a.m, a.pd)), 33), tol); });
  guarded(t, "P11", [&] { t.residual("P11", qp_law(surface(a, 1, 1, SurfaceVariant::Classes).bivector, 34), tol); });
  guarded(t, "P22", [&] { t.residual("P22", qp_law(surface(a, 2, 2, SurfaceVariant::Classes).bivector, 35), tol); });
}

template <class S>
double momentum(const S& s, std::uint64_t seed) {
  return sweep(s.site, seed, [&](const PointC& p, int) { return momentum_residual(s, p); });
}

void momentum_laws(Tally& t, const Algebra& a, bool forms) {
  const double tol = 1e-9;
  guarded(t, "P_G", [&] { t.residual("P_G", momentum(conj_bivector(one_factor(a.m), a.pd), 41), tol); });
  guarded(t, "Px", [&] { t.residual("Px", momentum(double_bivector(a.m, a.pd), 42), tol); });
  guarded(t, "P1", [&] { t.residual("P1", momentum(fuse(double_bivector(a.m, a.pd)), 43), tol); });
  const std::vector<std::pair<int, int>> sigs{{1, 0}, {1, 1}, {2, 0}};
  for (auto [g, n] : sigs) {
    const std::string tag = fmt::format("P{}{}", g, n);
    guarded(t, tag, [&] {
      t.residual(tag, momentum(surface(a, g, n, SurfaceVariant::Classes).bivector, 44 + 10 * g + n), tol);
    });
  }
  if (!forms) return;
  guarded(t, "tau_C", [&] { t.residual("tau_C", momentum(class_form(class_factor(a.m, a.classes[0]), a.pd), 51), tol); });
  guarded(t, "sigma_x", [&] { t.residual("sigma_x", momentum(double_form(a.m, a.pd), 52), tol); });
  for (auto [g, n] : sigs) {
    const std::string tag = fmt::format("sigma{}{}", g, n);
    guarded(t, tag, [&] {
      t.residual(tag, momentum(*surface(a, g, n, SurfaceVariant::Classes).form, 54 + 10 * g + n), tol);
    });
  }
}

void quasi_closedness(Tally& t, const Algebra& a) {
  const double tol = 1e-7;
  guarded(t, "calibration", [&] { t.residual("calibration", mult_calibration_residual(a.m, a.pd, kPoints, 3, 61), tol); });
  auto closed = [&](const std::string& tag, const QHStructure& S, std::uint64_t seed) {
    guarded(t, tag, [&] {
      t.residual(tag, sweep(S.site, seed, [&](const PointC& p, int i) {
                   return quasi_closed_residual(S, {p}, 2, split_seed(seed ^ 0x77, i));
                 }), tol);
    });
  };
  closed("sigma_x", double_form(a.m, a.pd), 62);
  closed("tau_C", class_form(class_factor(a.m, a.classes[0]), a.pd), 63);
  closed("sigma11", *surface(a, 1, 1, SurfaceVariant::Classes).form, 64);
}

struct DualPair {
  std::string name;
  QPStructure P;
  QHStructure S;
};

std::vector<DualPair> dual_pairs(const Algebra& a, bool with_fused_double) {
  std::vector<DualPair> v;
  Site z = class_factor(a.m, a.classes[0]);
  v.push_back({"class", conj_bivector(z, a.pd), class_form(z, a.pd)});
  v.push_back({"double", double_bivector(a.m, a.pd), double_form(a.m, a.pd)});
  if (with_fused_double) v.push_back({"fused_double", fuse(double_bivector(a.m, a.pd)), fuse(double_form(a.m, a.pd))});
  SurfaceDescriptor sd = surface(a, 1, 1, SurfaceVariant::Classes);
  v.push_back({"surface11", sd.bivector, *sd.form});
  return v;
}

void duality(Tally& t, const Algebra& a) {
  std::uint64_t seed = 70;
  for (const auto& d : dual_pairs(a, true))
    guarded(t, d.name, [&] {
      t.residual(d.name, sweep(d.P.site, ++seed, [&](const PointC& p, int) { return duality_residual(d.P, d.S, p).max(); }),
                 1e-8);
    });
}

void reconstruction(Tally& t, const Algebra& a) {
  std::uint64_t seed = 80;
  for (const auto& d : dual_pairs(a, false)) {
    if (d.name == "class") continue;
    double kernel = 0.0;
    guarded(t, d.name, [&] {
      double to_p = sweep(d.P.site, ++seed, [&](const PointC& p, int) {
        TensorAtPoint r = reconstruct_dual(nullptr, &d.S, ReconstructDirection::BivectorFromForm, p);
        MatC ref = bivector_frame(d.P, p, r.frame);
        kernel = std::max(kernel, r.residual);
        return (r.coeffs - ref).cwiseAbs().maxCoeff();
      });
      double to_s = sweep(d.P.site, ++seed, [&](const PointC& p, int) {
        TensorAtPoint r = reconstruct_dual(&d.P, nullptr, ReconstructDirection::FormFromBivector, p);
        MatC ref = form_frame(d.S, p, r.frame);
        kernel = std::max(kernel, r.residual);
        return (r.coeffs - ref).cwiseAbs().maxCoeff();
      });
      t.residual(d.name + " sigma->P", to_p, 1e-8);
      t.residual(d.name + " P->sigma", to_s, 1e-8);
      t.residual(d.name + " kernel", kernel, 1e-8);
    });
  }
}

void dirac_sweep(Tally& t, const Algebra& a) {
  std::uint64_t seed = 90;
  for (const auto& d : dual_pairs(a, true)) {
    double idem = 0.0, sum = 0.0, orth = 0.0;
    int disagreements = 0;
    guarded(t, d.name, [&] {
      sweep(d.S.site, ++seed, [&](const PointC& p, int) {
        ProjectionReport r = projection_report(*a.pd, momentum_target(d.S.site, d.S.actions, p));
        idem = std::max({idem, r.p_idempotent, r.q_idempotent});
        sum = std::max(sum, r.sum_identity);
        orth = std::max(orth, r.orthogonality);
        EquivalenceReport e = dirac_equivalence(d.S, p);
        disagreements += !e.agree();
        return 0.0;
      });
      t.residual(d.name + " idempotent", idem, 1e-10);
      t.residual(d.name + " p+q=Id", sum, 1e-10);
      t.residual(d.name + " E.F", orth, 1e-10);
      t.flag(d.name + " criteria agree", disagreements == 0);
    });
  }
}

void reduction(Tally& t, const Algebra& a) {
  SurfaceDescriptor sd = surface(a, 1, 0, SurfaceVariant::FullGroups);
  const QPStructure& P = sd.bivector;
  std::vector<ScalarField> inv;
  for (const char* w : {"x1", "y1", "x1 y1", "x1 y1^-1"}) inv.push_back(trace_function(parse_word(P.site, w)));
  std::uint64_t seed = 100;
  for (const MatC& target : a.targets) {
    const std::string tag = std::abs(target(0, 0) - 1.0) < 1e-12 ? "I" : "-I";
    double solver = 0.0, jac = 0.0, ideal = 0.0;
    int iters = 0;
    guarded(t, "target " + tag, [&] {
      for (int i = 0; i < kPoints; ++i) {
        RepSample r = solve_relator(P.site, sd.relator, target, split_seed(++seed, i));
        solver = std::max(solver, r.residual);
        iters = std::max(iters, r.iterations);
        for (size_t k = 0; k + 2 < inv.size(); ++k)
          jac = std::max(jac, std::abs(jacobiator_invariant(P, inv[k], inv[k + 1], inv[k + 2], r.point)));
        for (const auto& f : inv) ideal = std::max(ideal, poisson_ideal_residual(P, sd.relator, target, f, {r.point}));
      }
      t.residual(tag + " solver", solver, 1e-10);
      t.flag(fmt::format("{} iterations {}<=200", tag, iters), iters <= 200);
      t.residual(tag + " Jacobi", jac, 1e-7);
      t.residual(tag + " ideal", ideal, 1e-7);
    });
  }
}

void degenerate_regression(Tally& t) {
  Algebra a = degenerate();
  Tally sub;
  cartan_antisymmetry(sub, {a});
  t.flag("c1", sub.ok);
  sub = {};
  chi_identity(sub, {{a.name, a.m}});
  guarded(sub, "chi", [&] { sub.residual("chi", verify_chi_identity(*a.m, *a.pd), 1e-10); });
  t.flag("c2", sub.ok);
  sub = {};
  quasi_poisson(sub, a);
  t.flag("c3", sub.ok);
  sub = {};
  momentum_laws(sub, a, false);
  t.flag("c4", sub.ok);
  sub = {};
  reduction(sub, a);
  t.flag("c9", sub.ok);
  if (!t.ok) t.parts.push_back(sub.text());

  // duality and Dirac entry points must refuse
  auto refuses = [&](const std::string& what, const std::function<void()>& fn) {
    try {
      fn();
      t.flag(what + " refused", false);
    } catch (const Error& e) {
      t.flag(what + " refused", e.code() == ErrorCode::DegeneratePairing);
    }
  };
  DualPair d = dual_pairs(a, false)[1];
  PointC p = random_point(d.P.site, 7);
  refuses("duality", [&] { duality_residual(d.P, d.S, p); });
  refuses("reconstruct", [&] { reconstruct_dual(&d.P, nullptr, ReconstructDirection::FormFromBivector, p); });
  refuses("dirac", [&] { projections_pq(*a.pd, momentum_target(d.S.site, d.S.actions, p)); });
  refuses("equivalence", [&] { dirac_equivalence(d.S, p); });

  cli::RunConfig cfg = cli::parse_config(cli::json::parse(R"({"group": {"family": "product", "abelian": 1},
      "pairing": {"mask": [true, true, true, false]}, "site": {"genus": 1, "variant": "full"},
      "seed": 5, "samples": 4})"));
  for (const char* suite : {"duality", "dirac"}) {
    cli::Report r = cli::run_suite(cfg, suite, 1);
    bool all_refused = !r.checks.empty();
    for (const auto& c : r.checks) all_refused = all_refused && c.status == cli::Status::Refused;
    t.flag(std::string("suite ") + suite + " refused", all_refused);
  }
}

void determinism(Tally& t) {
  namespace fs = std::filesystem;
  cli::RunConfig cfg = cli::parse_config(cli::json::parse(R"({"group": {"family": "SL", "n": 2},
      "site": {"genus": 1, "classes": [[[1.5, 0], [0, 0.6666666666666666]]], "variant": "classes"},
      "words": [["x1", "y1"]], "targets": [[[1, 0], [0, 1]], [[-1, 0], [0, -1]]], "seed": 7, "samples": 4})"));
  fs::path dir = fs::temp_directory_path() / fmt::format("qpois_accept_{}", static_cast<long>(::getpid()));
  fs::create_directories(dir);
  auto read = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  for (const char* what : {"verify", "bracket"}) {
    std::string name = what;
    auto run = [&](int jobs) {
      return name == "verify" ? cli::run_suite(cfg, "all", jobs) : cli::compute_brackets(cfg, jobs);
    };
    cli::write_report(run(1), (dir / "a.json").string());
    cli::write_report(run(1), (dir / "b.json").string());
    cli::write_report(run(4), (dir / "c.json").string());
    std::string a = read(dir / "a.json");
    t.flag(name + " rerun identical", !a.empty() && a == read(dir / "b.json"));
    t.flag(name + " jobs=4 identical", a == read(dir / "c.json"));
  }
  fs::remove_all(dir);
}

struct Criterion {
  int id;
  std::string title;
  double limit_s;
  std::function<void(Tally&)> run;
};

}  // namespace

int main(int argc, char** argv) {
  std::vector<Criterion> all{
      {1, "Cartan element antisymmetry", 1.0,
       [](Tally& t) { cartan_antisymmetry(t, {sl2(), sl3(), degenerate()}); }},
      {2, "[chi,chi] = Delta(phi) - phi^1 - phi^2", 1.0, [](Tally& t) { chi_identity(t, shipped_models()); }},
      {3, "quasi-Poisson law", 30.0, [](Tally& t) { quasi_poisson(t, sl2()); }},
      {4, "momentum laws", 30.0, [](Tally& t) { momentum_laws(t, sl2(), true); }},
      {5, "quasi-closedness", 60.0, [](Tally& t) { quasi_closedness(t, sl2()); }},
      {6, "duality", 30.0, [](Tally& t) { duality(t, sl2()); }},
      {7, "reconstruction round trip", 30.0, [](Tally& t) { reconstruction(t, sl2()); }},
      {8, "Dirac sweep", 30.0, [](Tally& t) { dirac_sweep(t, sl2()); }},
      {9, "reduction", 120.0, [](Tally& t) { reduction(t, sl2()); }},
      {10, "degenerate-H regression", 60.0, [](Tally& t) { degenerate_regression(t); }},
      {11, "determinism", 10.0, [](Tally& t) { determinism(t); }},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    std::string a = argv[i];
    if (!a.empty() && a[0] == 'c') a = a.substr(1);
    try {
      only.insert(std::stoi(a));
    } catch (...) {
      std::fprintf(stderr, "usage: %s [c1 .. c11]\n", argv[0]);
      return 2;
    }
  }
  int failed = 0;
  for (const auto& c : all) {
    if (!only.empty() && !only.count(c.id)) continue;
    Tally t;
    auto t0 = std::chrono::steady_clock::now();
    c.run(t);
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < c.limit_s;
    const bool pass = t.ok && in_time;
    failed += !pass;
    std::printf("%s c%d %s [%.2fs < %.0fs%s] %s\n", pass ? "PASS" : "FAIL", c.id, c.title.c_str(), secs, c.limit_s,
                in_time ? "" : " EXCEEDED", t.text().c_str());
    std::fflush(stdout);
  }
  return failed ? 1 : 0;
}
