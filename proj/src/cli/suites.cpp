#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <thread>

#include <spdlog/spdlog.h>

#include "qpois/charvar.hpp"
#include "qpois/cli.hpp"
#include "qpois/dirac.hpp"
#include "qpois/random.hpp"

namespace qp::cli {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

struct TaskError {
  bool set = false;
  ErrorCode code = ErrorCode::SolverFailed;
  std::string what;
};

// Runs fn(0..count-1) on a pool; results are stored by index so the reduction
// does not depend on the job count. The lowest-index error is rethrown.
template <class R, class F>
std::vector<R> parallel_map(int jobs, int count, F fn) {
  std::vector<R> out(count);
  std::vector<TaskError> errs(count);
  std::atomic<int> next{0};
  auto worker = [&] {
    for (;;) {
      int i = next.fetch_add(1);
      if (i >= count) return;
      try {
        out[i] = fn(i);
      } catch (const Error& e) {
        errs[i] = {true, e.code(), e.what()};
      } catch (const std::exception& e) {
        errs[i] = {true, ErrorCode::SolverFailed, e.what()};
      }
    }
  };
  const int nt = std::max(1, std::min(jobs, count));
  if (nt == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nt; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errs)
    if (e.set) throw Error(e.code, e.what);
  return out;
}

double max_of(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) {
    if (std::isnan(x)) return kNaN;
    m = std::max(m, x);
  }
  return m;
}

struct Ctx {
  const RunConfig* cfg = nullptr;
  std::shared_ptr<const LieAlgebraModel> m;
  PairingPtr pd;
  bool invariant = true;
  bool has_lower = false;
  bool nondeg = false;
  int jobs = 1;
  Report* report = nullptr;
};

std::shared_ptr<const LieAlgebraModel> build_model(const GroupSpec& g) {
  if (g.family == "SL") return std::make_shared<LieAlgebraModel>(make_sl(g.n));
  if (g.family == "GL") return std::make_shared<LieAlgebraModel>(make_gl(g.n));
  if (g.family == "product") return std::make_shared<LieAlgebraModel>(make_sl2_plus_abelian(g.abelian));
  return std::make_shared<LieAlgebraModel>(make_abelian(g.n));
}

PairingPtr build_pairing(const LieAlgebraModel& m, const PairingSpec& p) {
  if (!p.mask.empty() && static_cast<int>(p.mask.size()) != m.d)
    throw Error(ErrorCode::ConfigError, "pairing.mask: length must equal the algebra dimension");
  if (!p.upper) return std::make_shared<PairingData>(trace_pairing(m, p.scale, p.mask));
  if (p.upper->rows() != m.d || p.upper->cols() != m.d)
    throw Error(ErrorCode::ConfigError, "pairing.upper: must be d x d");
  if (p.lower && (p.lower->rows() != m.d || p.lower->cols() != m.d))
    throw Error(ErrorCode::ConfigError, "pairing.lower: must be d x d");
  try {
    return std::make_shared<PairingData>(make_pairing(m, p.lower, *p.upper));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NotConvenient) throw;
    // Keep the tensor so the invariance checks can report on it.
    PairingData d;
    d.eta_lower = p.lower;
    d.eta_upper = *p.upper;
    auto [phi, res] = cartan3(m, *p.upper, std::numeric_limits<double>::infinity());
    d.phi = phi;
    d.phi_antisymmetry = res;
    d.chi = chi2(*p.upper);
    return std::make_shared<PairingData>(d);
  }
}

Ctx make_ctx(const RunConfig& cfg, int jobs, Report& r) {
  Ctx c;
  c.cfg = &cfg;
  c.m = build_model(cfg.group);
  c.pd = build_pairing(*c.m, cfg.pairing);
  c.jobs = jobs;
  c.report = &r;
  c.has_lower = c.pd->eta_lower.has_value();
  c.nondeg = c.pd->lower_nondegenerate();
  double inv = ad_invariance_residual(*c.m, c.pd->eta_upper, TensorIndex::Upper, 32, cfg.seed);
  if (c.has_lower) inv = std::max(inv, ad_invariance_residual(*c.m, *c.pd->eta_lower, TensorIndex::Lower, 32, cfg.seed));
  c.invariant = inv <= cfg.tol.exact && c.pd->phi_antisymmetry <= cfg.tol.exact;
  return c;
}

enum Need { kNone = 0, kInvariant = 1, kLower = 2, kNondeg = 4 };

void add_check(Ctx& c, const std::string& name, const std::string& anchor, double tol, int samples, int needs,
               const std::function<double()>& body) {
  Check k;
  k.name = name;
  k.anchor = anchor;
  k.tolerance = tol;
  k.samples = samples;
  k.seed = c.cfg->seed;
  if ((needs & kInvariant) && !c.invariant) {
    k.status = Status::Skipped;
    k.reason = "pairing is not Ad-invariant";
  } else if ((needs & kNondeg) && !c.nondeg) {
    k.status = Status::Skipped;
    k.reason = "DegeneratePairing";
  } else if ((needs & kLower) && !c.has_lower) {
    k.status = Status::Skipped;
    k.reason = "no bilinear form given";
  } else {
    try {
      k.residual = body();
      k.status = (!std::isnan(k.residual) && k.residual <= tol) ? Status::Pass : Status::Fail;
    } catch (const Error& e) {
      k.residual = kNaN;
      k.status = Status::Fail;
      k.reason = e.what();
    }
  }
  spdlog::debug("{} -> {} ({:.3e})", k.name, to_string(k.status), k.residual);
  c.report->checks.push_back(k);
}

std::uint64_t seed_for(const Ctx& c, const std::string& tag, int i) {
  return split_seed(c.cfg->seed ^ fnv1a(tag), static_cast<std::uint64_t>(i));
}

std::vector<PointC> points_for(const Ctx& c, const Site& s, const std::string& tag) {
  std::vector<PointC> pts;
  for (int i = 0; i < c.cfg->samples; ++i) pts.push_back(random_point(s, seed_for(c, tag, i)));
  return pts;
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

struct Structures {
  QPStructure PG, PX, P1;
  QHStructure SX, S1;
  SurfaceDescriptor full, classes;
  std::vector<QPStructure> PC;
  std::vector<QHStructure> tau;
};

Structures build_structures(const Ctx& c) {
  const RunConfig& cfg = *c.cfg;
  Structures s;
  Site one;
  one.model = c.m;
  one.factors.push_back(Factor{FactorKind::Full, MatC(), "x"});
  s.PG = conj_bivector(one, c.pd);
  s.PX = double_bivector(c.m, c.pd);
  s.SX = double_form(c.m, c.pd);
  s.P1 = fuse(s.PX);
  s.S1 = fuse(s.SX);
  s.full = assemble_surface_site(c.m, c.pd, cfg.site.genus, cfg.site.classes, SurfaceVariant::FullGroups);
  s.classes = assemble_surface_site(c.m, c.pd, cfg.site.genus, cfg.site.classes, SurfaceVariant::Classes);
  for (size_t i = 0; i < cfg.site.classes.size(); ++i) {
    Site z;
    z.model = c.m;
    z.factors.push_back(Factor{FactorKind::Class, cfg.site.classes[i], "z" + std::to_string(i + 1)});
    s.PC.push_back(conj_bivector(z, c.pd));
    s.tau.push_back(class_form(z, c.pd));
  }
  return s;
}

double qp_law(const Ctx& c, const QPStructure& P, const std::string& tag) {
  auto pts = points_for(c, P.site, tag);
  return max_of(parallel_map<double>(c.jobs, static_cast<int>(pts.size()), [&](int i) {
    Rng rng(seed_for(c, tag + "/f", i));
    ScalarField f1 = random_function(P.site, rng), f2 = random_function(P.site, rng),
                f3 = random_function(P.site, rng);
    const PointC& p = pts[i];
    cd J = jacobiator(P, f1, f2, f3, p);
    VecC a = differential_left<cd>(f1, P.site, p), b = differential_left<cd>(f2, P.site, p),
         d = differential_left<cd>(f3, P.site, p);
    return std::abs(J - 2.0 * eval_phiM(P, p, a, b, d));
  }));
}

template <class S>
double momentum_sweep(const Ctx& c, const S& s, const std::string& tag) {
  auto pts = points_for(c, s.site, tag);
  return max_of(parallel_map<double>(c.jobs, static_cast<int>(pts.size()),
                                     [&](int i) { return momentum_residual(s, pts[i]); }));
}

std::string class_tag(size_t i) { return "class" + std::to_string(i + 1); }

void core_suite(Ctx& c, const Structures& st) {
  const auto& cfg = *c.cfg;
  const auto& m = *c.m;
  const int ns = cfg.samples;
  add_check(c, "algebra.structure_jacobi", "Lie algebra structure constants", cfg.tol.exact, 1, kNone,
            [&] { return structure_jacobi_residual(m); });
  add_check(c, "algebra.reconstruction", "bracket reconstruction from structure constants", cfg.tol.exact, 1, kNone,
            [&] { return structure_reconstruction_residual(m); });
  add_check(c, "pairing.ad_invariance.upper", "Ad-invariance of H", cfg.tol.exact, 32, kNone,
            [&] { return ad_invariance_residual(m, c.pd->eta_upper, TensorIndex::Upper, 32, cfg.seed); });
  if (c.has_lower)
    add_check(c, "pairing.ad_invariance.lower", "Ad-invariance of the bilinear form", cfg.tol.exact, 32, kNone,
              [&] { return ad_invariance_residual(m, *c.pd->eta_lower, TensorIndex::Lower, 32, cfg.seed); });
  add_check(c, "pairing.psi_inverse", "psi_H inverse to the form", cfg.tol.exact, 1, kNondeg,
            [&] { return psi_inverse_residual(*c.pd); });
  add_check(c, "cartan.antisymmetry", "total antisymmetry of the Cartan element", cfg.tol.exact, 1, kInvariant,
            [&] { return c.pd->phi_antisymmetry; });
  add_check(c, "chi.schouten_identity", "[chi, chi] = Delta(phi) - phi^1 - phi^2", cfg.tol.exact, 1, kInvariant,
            [&] { return verify_chi_identity(m, *c.pd); });
  add_check(c, "ideal.closure", "g_H is an ideal carrying a non-degenerate form", cfg.tol.exact, 1, kNone,
            [&] {
              IdealReport ir = ideal_of_H(m, *c.pd);
              if (ir.dim > 0 && ir.certificate < 1e-8) return 1.0 / std::max(ir.certificate, 1e-300);
              // closed under brackets with all of g
              double w = ir.projection_residual;
              MatC proj = ir.basis * ir.basis.adjoint();
              for (int u = 0; u < m.d; ++u)
                for (int b = 0; b < ir.dim; ++b) {
                  VecC v = m.bracket(VecC::Unit(m.d, u), ir.basis.col(b));
                  w = std::max(w, (v - proj * v).cwiseAbs().maxCoeff());
                }
              return w;
            });

  struct Named {
    std::string name;
    const QPStructure* P;
  };
  std::vector<Named> bivs{{"P_G", &st.PG}, {"P_times", &st.PX}, {"P_fused", &st.P1},
                          {"surface_full", &st.full.bivector}, {"surface_classes", &st.classes.bivector}};
  for (const auto& b : bivs)
    add_check(c, "quasi_poisson." + b.name, "Jacobiator equals phi_M", cfg.tol.jacobi, ns, kInvariant,
              [&] { return qp_law(c, *b.P, "qp/" + b.name); });
  for (const auto& b : bivs)
    add_check(c, "momentum.bivector." + b.name, "bivector momentum identity", cfg.tol.law, ns, kInvariant,
              [&] { return momentum_sweep(c, *b.P, "mom/" + b.name); });
  for (size_t i = 0; i < st.PC.size(); ++i)
    add_check(c, "momentum.bivector.P_" + class_tag(i), "bivector momentum identity", cfg.tol.law, ns, kInvariant,
              [&, i] { return momentum_sweep(c, st.PC[i], "mom/PC" + std::to_string(i)); });

  struct NamedF {
    std::string name;
    const QHStructure* S;
  };
  std::vector<NamedF> forms{{"sigma_times", &st.SX}, {"sigma_fused", &st.S1}, {"sigma_surface", &*st.classes.form}};
  for (size_t i = 0; i < st.tau.size(); ++i) forms.push_back({"tau_" + class_tag(i), &st.tau[i]});
  for (const auto& f : forms)
    add_check(c, "momentum.form." + f.name, "2-form momentum identity", cfg.tol.law, ns, kInvariant | kLower,
              [&] { return momentum_sweep(c, *f.S, "momf/" + f.name); });
  add_check(c, "quasi_closed.calibration", "(1/2) d(w1 . wbar2) = lambda_2 - mult^* lambda + lambda_1",
            cfg.tol.closed, ns, kInvariant | kLower,
            [&] { return mult_calibration_residual(c.m, c.pd, ns, 3, cfg.seed); });
  for (const auto& f : forms)
    add_check(c, "quasi_closed." + f.name, "d sigma = Phi^* lambda", cfg.tol.closed, ns, kInvariant | kLower, [&] {
      auto pts = points_for(c, f.S->site, "qc/" + f.name);
      return max_of(parallel_map<double>(c.jobs, ns, [&](int i) {
        return quasi_closed_residual(*f.S, {pts[i]}, 2, seed_for(c, "qcf/" + f.name, i));
      }));
    });
  add_check(c, "form.chain_agreement", "fused surface form equals the 2-chain form", cfg.tol.law, ns,
            kInvariant | kLower, [&] {
              auto pts = points_for(c, st.classes.bivector.site, "chain");
              return max_of(parallel_map<double>(c.jobs, ns, [&](int i) {
                return form_difference(*st.classes.form, *st.classes.chain_form, pts[i]);
              }));
            });
  add_check(c, "invariance.surface_bivector", "G-invariance of the surface bivector", cfg.tol.law, ns, kInvariant,
            [&] {
              const auto& P = st.classes.bivector;
              auto pts = points_for(c, P.site, "inv");
              return max_of(parallel_map<double>(c.jobs, ns, [&](int i) {
                Rng rng(seed_for(c, "inv/g", i));
                return invariance_residual(P, pts[i], random_group_element(m, rng, 0.5));
              }));
            });
  add_check(c, "invariance.surface_form", "G-invariance of the surface 2-form", cfg.tol.law, ns,
            kInvariant | kLower, [&] {
              const auto& S = *st.classes.form;
              auto pts = points_for(c, S.site, "invf");
              return max_of(parallel_map<double>(c.jobs, ns, [&](int i) {
                Rng rng(seed_for(c, "invf/g", i));
                return invariance_residual(S, pts[i], random_group_element(m, rng, 0.5));
              }));
            });
  for (size_t i = 0; i < st.PC.size(); ++i)
    add_check(c, "tangency.P_" + class_tag(i), "P_G restricts to the class", cfg.tol.law, ns, kNone, [&, i] {
      auto pts = points_for(c, st.PC[i].site, "tan" + std::to_string(i));
      return max_of(parallel_map<double>(c.jobs, ns, [&](int k) {
        Frame f = make_frame(st.PC[i].site, pts[k]);
        double res = 0.0;
        bivector_frame(st.PC[i], pts[k], f, &res);
        return res;
      }));
    });
}

bool refuse_if_degenerate(Ctx& c, const std::string& suite) {
  if (c.nondeg) return false;
  Check k;
  k.name = suite + ".pairing";
  k.anchor = "requires a non-degenerate form";
  k.status = Status::Refused;
  k.reason = "DegeneratePairing";
  k.seed = c.cfg->seed;
  c.report->checks.push_back(k);
  return true;
}

void duality_suite(Ctx& c, const Structures& st) {
  if (refuse_if_degenerate(c, "duality")) return;
  const auto& cfg = *c.cfg;
  const int ns = cfg.samples;
  struct Pair {
    std::string name;
    const QPStructure* P;
    const QHStructure* S;
  };
  std::vector<Pair> pairs{{"double", &st.PX, &st.SX}, {"fused_double", &st.P1, &st.S1},
                          {"surface", &st.classes.bivector, &*st.classes.form}};
  for (size_t i = 0; i < st.PC.size(); ++i) pairs.push_back({class_tag(i), &st.PC[i], &st.tau[i]});
  for (const auto& pr : pairs)
    add_check(c, "duality." + pr.name, "P# s# = Id - rho/4 and s# P# = Id - rho*/4", cfg.tol.duality, ns,
              kInvariant | kNondeg, [&] {
                auto pts = points_for(c, pr.P->site, "dual/" + pr.name);
                return max_of(parallel_map<double>(c.jobs, ns,
                                                   [&](int i) { return duality_residual(*pr.P, *pr.S, pts[i]).max(); }));
              });
  for (const auto& pr : pairs) {
    add_check(c, "reconstruct.bivector." + pr.name, "bivector recovered from the 2-form", cfg.tol.duality, ns,
              kInvariant | kNondeg, [&] {
                auto pts = points_for(c, pr.P->site, "rec/" + pr.name);
                return max_of(parallel_map<double>(c.jobs, ns, [&](int i) {
                  TensorAtPoint t = reconstruct_dual(nullptr, pr.S, ReconstructDirection::BivectorFromForm, pts[i]);
                  MatC ref = bivector_frame(*pr.P, pts[i], t.frame);
                  return std::max(t.residual, (t.coeffs - ref).cwiseAbs().maxCoeff());
                }));
              });
    add_check(c, "reconstruct.form." + pr.name, "2-form recovered from the bivector", cfg.tol.duality, ns,
              kInvariant | kNondeg, [&] {
                auto pts = points_for(c, pr.P->site, "recf/" + pr.name);
                return max_of(parallel_map<double>(c.jobs, ns, [&](int i) {
                  TensorAtPoint t = reconstruct_dual(pr.P, nullptr, ReconstructDirection::FormFromBivector, pts[i]);
                  MatC ref = form_frame(*pr.S, pts[i], t.frame);
                  return std::max(t.residual, (t.coeffs - ref).cwiseAbs().maxCoeff());
                }));
              });
    add_check(c, "nondegeneracy." + pr.name, "ker sigma meets ker dPhi trivially (rank deficit)", 0.0, ns,
              kInvariant | kNondeg, [&] {
                auto pts = points_for(c, pr.P->site, "nd/" + pr.name);
                return max_of(parallel_map<double>(c.jobs, ns, [&](int i) {
                  RankReport a = nondegeneracy_check(*pr.S, pts[i]);
                  RankReport b = nondegeneracy_check(*pr.P, pts[i]);
                  return static_cast<double>(std::max(a.expected - a.rank, b.expected - b.rank));
                }));
              });
  }
}

void dirac_suite(Ctx& c, const Structures& st) {
  if (refuse_if_degenerate(c, "dirac")) return;
  const auto& cfg = *c.cfg;
  const int ns = cfg.samples;
  struct Site_ {
    std::string name;
    const QHStructure* S;
  };
  std::vector<Site_> sites{{"double", &st.SX}, {"fused_double", &st.S1}, {"surface", &*st.classes.form}};
  for (size_t i = 0; i < st.tau.size(); ++i) sites.push_back({class_tag(i), &st.tau[i]});
  for (const auto& s : sites) {
    auto reports = [&, s](const std::string& tag) {
      auto pts = points_for(c, s.S->site, "dirac/" + s.name + tag);
      return parallel_map<ProjectionReport>(c.jobs, ns, [&](int i) {
        return projection_report(*c.pd, momentum_target(s.S->site, s.S->actions, pts[i]));
      });
    };
    add_check(c, "dirac.projections." + s.name, "p^2 = p, q^2 = q, p + q = Id", cfg.tol.exact, ns,
              kInvariant | kNondeg, [&] {
                double w = 0.0;
                for (const auto& r : reports("/pq"))
                  w = std::max({w, r.p_idempotent, r.q_idempotent, r.sum_identity, r.pq_zero});
                return w;
              });
    add_check(c, "dirac.images." + s.name, "range p = E, range q = F", cfg.tol.law, ns, kInvariant | kNondeg, [&] {
      double w = 0.0;
      for (const auto& r : reports("/img")) w = std::max({w, r.image_p, r.image_q, r.lagrangian});
      return w;
    });
    add_check(c, "dirac.orthogonality." + s.name, "<E, F> = 0 under the split pairing", cfg.tol.exact, ns,
              kInvariant | kNondeg, [&] {
                double w = 0.0;
                for (const auto& r : reports("/orth")) w = std::max(w, r.orthogonality);
                return w;
              });
    add_check(c, "dirac.equivalence." + s.name, "non-degeneracy / strongness conditions agree (disagreements)",
              0.0, ns, kInvariant | kNondeg, [&] {
                auto pts = points_for(c, s.S->site, "eq/" + s.name);
                auto v = parallel_map<double>(c.jobs, ns, [&](int i) {
                  EquivalenceReport e = dirac_equivalence(*s.S, pts[i], cfg.tol.law);
                  return e.agree() ? 0.0 : 1.0;
                });
                double n = 0.0;
                for (double x : v) n += x;
                return n;
              });
    add_check(c, "dirac.transport." + s.name, "forward image of TM under (Id, sigma) is Gr_sigma", cfg.tol.law,
              ns, kInvariant | kNondeg, [&] {
                auto pts = points_for(c, s.S->site, "tr/" + s.name);
                return max_of(parallel_map<double>(c.jobs, ns, [&](int i) {
                  MorphismData md = morphism_at(*s.S, pts[i]);
                  md.dPhi = MatC::Identity(md.N, md.N);
                  md.T = md.N;
                  LagrangianSubspace img = transport_image(tangent_summand(md.N), md, TransportDirection::Forward);
                  LagrangianSubspace g = graph_of_form(md.S);
                  if (img.basis.cols() != g.basis.cols()) return 1.0;
                  MatC diff = img.basis - g.basis * (g.basis.adjoint() * img.basis);
                  return diff.size() ? diff.cwiseAbs().maxCoeff() : 0.0;
                }));
              });
    add_check(c, "dirac.tech_chain." + s.name, "fund on ker(Id + Ad) and dPhi on ker sigma", cfg.tol.law, ns,
              kInvariant | kNondeg, [&] {
                auto pts = points_for(c, s.S->site, "tc/" + s.name);
                return max_of(parallel_map<double>(c.jobs, ns, [&](int i) {
                  TechChain t = tech_chain(*s.S, pts[i]);
                  double mismatch = std::abs(t.fund_rank - t.ker_ad) + std::abs(t.dphi_rank - t.ker_target) +
                                    std::abs(t.ker_sigma - t.ker_ad);
                  return std::max({mismatch, t.fund_in_kernel, t.dphi_in_target});
                }));
              });
  }
  add_check(c, "dirac.negative_control", "sigma = 0 with trivial momentum is nowhere strong", 0.0, 1,
            kInvariant | kNondeg, [&] {
              MorphismData md;
              md.N = c.m->d;
              md.T = 0;
              md.S = MatC::Zero(md.N, md.N);
              md.dPhi = MatC(0, md.N);
              TargetPoint t;
              t.d = c.m->d;
              EquivalenceReport e = dirac_equivalence(*c.pd, md, t);
              return static_cast<double>(e.a + e.b + e.c + e.d);
            });
}

struct ModuliSite {
  const QPStructure* P;
  const QHStructure* S;  // may be null
  Word relator;
  std::vector<ScalarField> invariants;
  std::vector<std::string> labels;
};

ModuliSite moduli_site(const Ctx& c, const Structures& st) {
  const bool classes = c.cfg->site.variant == SurfaceVariant::Classes;
  const SurfaceDescriptor& sd = classes ? st.classes : st.full;
  ModuliSite ms;
  ms.P = &sd.bivector;
  ms.S = (classes && sd.form) ? &*sd.form : nullptr;
  ms.relator = sd.relator;
  const Site& s = ms.P->site;
  std::vector<std::string> words;
  if (c.cfg->site.genus >= 1)
    words = {"x1", "y1", "x1 y1", "x1 y1^-1"};
  else
    words = {"z1 z2", "z2 z3", "z1 z3"};
  for (const auto& [u, v] : c.cfg->words) {
    words.push_back(u);
    words.push_back(v);
  }
  for (const auto& w : words) {
    ms.invariants.push_back(trace_function(parse_word(s, w)));
    ms.labels.push_back(w);
  }
  return ms;
}

std::vector<MatC> targets_of(const Ctx& c) {
  if (!c.cfg->targets.empty()) return c.cfg->targets;
  return {MatC::Identity(c.m->n, c.m->n)};
}

struct SolveOutcome {
  bool ok = false;
  RepSample sample;
  std::string error;
};

std::vector<SolveOutcome> solve_all(const Ctx& c, const ModuliSite& ms, const MatC& target, const std::string& tag) {
  SolverOptions opt;
  opt.max_iters = c.cfg->max_iters;
  opt.tol = c.cfg->tol.solver;
  return parallel_map<SolveOutcome>(c.jobs, c.cfg->samples, [&](int i) {
    SolveOutcome o;
    try {
      o.sample = solve_relator(ms.P->site, ms.relator, target, seed_for(c, tag, i), opt);
      o.ok = true;
    } catch (const Error& e) {
      o.error = e.what();
    }
    return o;
  });
}

void moduli_suite(Ctx& c, const Structures& st) {
  const auto& cfg = *c.cfg;
  const int ns = cfg.samples;
  ModuliSite ms = moduli_site(c, st);
  auto targets = targets_of(c);
  for (size_t ti = 0; ti < targets.size(); ++ti) {
    const std::string tt = "t" + std::to_string(ti);
    std::vector<SolveOutcome> sols;
    Check solver;
    add_check(c, "moduli.solver." + tt, "relator solved to tolerance", cfg.tol.solver, ns, kNone, [&] {
      sols = solve_all(c, ms, targets[ti], "solve/" + tt);
      double w = 0.0;
      for (const auto& s : sols) {
        if (!s.ok) throw Error(ErrorCode::SolverFailed, s.error);
        w = std::max(w, s.sample.residual);
      }
      return w;
    });
    std::vector<PointC> pts;
    for (const auto& s : sols)
      if (s.ok) pts.push_back(s.sample.point);
    const int np = static_cast<int>(pts.size());
    const auto& inv = ms.invariants;
    add_check(c, "moduli.invariance." + tt, "trace functions are conjugation invariant", cfg.tol.exact, np, kNone,
              [&] {
                return max_of(parallel_map<double>(c.jobs, np, [&](int i) {
                  double w = 0.0;
                  for (const auto& f : inv)
                    w = std::max(w, conjugation_invariance(ms.P->site, f, pts[i], 3, seed_for(c, "ci/" + tt, i)));
                  return w;
                }));
              });
    add_check(c, "moduli.jacobi." + tt, "Jacobi identity on invariant functions", cfg.tol.jacobi, np, kInvariant,
              [&] {
                return max_of(parallel_map<double>(c.jobs, np, [&](int i) {
                  double w = 0.0;
                  const int ni = static_cast<int>(inv.size());
                  for (int a = 0; a + 2 < ni; ++a)
                    w = std::max(w, std::abs(jacobiator_invariant(*ms.P, inv[a], inv[a + 1], inv[a + 2], pts[i])));
                  return w;
                }));
              });
    add_check(c, "moduli.poisson_ideal." + tt, "{f, chi o Phi - chi(c)} vanishes on the level set", cfg.tol.jacobi,
              np, kInvariant, [&] {
                return max_of(parallel_map<double>(c.jobs, np, [&](int i) {
                  double w = 0.0;
                  for (const auto& f : inv)
                    w = std::max(w, poisson_ideal_residual(*ms.P, ms.relator, targets[ti], f, {pts[i]}));
                  return w;
                }));
              });
    add_check(c, "moduli.level_tangency." + tt, "dPhi(X_f) = 0 for invariant f", cfg.tol.law, np, kInvariant, [&] {
      return max_of(parallel_map<double>(c.jobs, np, [&](int i) {
        double w = 0.0;
        for (const auto& f : inv) w = std::max(w, hamiltonian_field(*ms.P, f, pts[i]).level_tangency);
        return w;
      }));
    });
    add_check(c, "moduli.bracket_algebra." + tt, "antisymmetry and Leibniz rule on trace functions", cfg.tol.law,
              np, kNone, [&] {
                return max_of(parallel_map<double>(c.jobs, np, [&](int i) {
                  const PointC& p = pts[i];
                  double w = 0.0;
                  for (size_t a = 0; a + 2 < inv.size(); ++a) {
                    const auto &f = inv[a], &h = inv[a + 1], &k = inv[a + 2];
                    w = std::max(w, std::abs(bracket(*ms.P, f, h, p) + bracket(*ms.P, h, f, p)));
                    cd lhs = bracket(*ms.P, f, h * k, p);
                    cd rhs = bracket(*ms.P, f, h, p) * k.eval<cd>(p, c.m->n) + h.eval<cd>(p, c.m->n) * bracket(*ms.P, f, k, p);
                    w = std::max(w, std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)));
                  }
                  return w;
                }));
              });
    add_check(c, "moduli.field_invariance." + tt, "X_f at g.p equals g.X_f(p)", cfg.tol.law, np, kInvariant, [&] {
      return max_of(parallel_map<double>(c.jobs, np, [&](int i) {
        Rng rng(seed_for(c, "xfinv/" + tt, i));
        MatC g = random_group_element(*c.m, rng, 0.5), gi = g.inverse();
        PointC q = conjugate_point(pts[i], g);
        double w = 0.0;
        for (const auto& f : inv) {
          HamiltonianField a = hamiltonian_field(*ms.P, f, pts[i]);
          HamiltonianField b = hamiltonian_field(*ms.P, f, q);
          for (size_t j = 0; j < a.field.v.size(); ++j)
            w = std::max(w, (MatC(g * a.field.v[j] * gi) - b.field.v[j]).cwiseAbs().maxCoeff());
        }
        return w;
      }));
    });
    if (ms.S)
      add_check(c, "moduli.dual_tie." + tt, "sigma(X_f, X_h) = P(dh, df)", cfg.tol.duality, np,
                kInvariant | kNondeg, [&] {
                  return max_of(parallel_map<double>(c.jobs, np, [&](int i) {
                    const PointC& p = pts[i];
                    PointC pinv = inverses<cd>(p);
                    double w = 0.0;
                    for (size_t a = 0; a + 1 < inv.size(); ++a) {
                      HamiltonianField xf = hamiltonian_field(*ms.P, inv[a], p);
                      HamiltonianField xh = hamiltonian_field(*ms.P, inv[a + 1], p);
                      cd lhs = eval_form<cd>(*ms.S, p, pinv, xf.field, xh.field);
                      cd rhs = bracket(*ms.P, inv[a + 1], inv[a], p);
                      w = std::max(w, std::abs(lhs - rhs));
                    }
                    return w;
                  }));
                });
  }
}

}  // namespace

Report run_suite(const RunConfig& cfg, const std::string& suite, int jobs) {
  Report r;
  r.command = "verify";
  r.suite = suite;
  r.seed = cfg.seed;
  r.config = cfg.echo;
  const bool all = suite == "all";
  if (!all && suite != "core" && suite != "duality" && suite != "dirac" && suite != "moduli" && suite != "empty")
    throw Error(ErrorCode::ConfigError, "unknown suite '" + suite + "'");
  if (suite == "empty") return r;
  Ctx c = make_ctx(cfg, jobs, r);
  Structures st = build_structures(c);
  if (all || suite == "core") core_suite(c, st);
  if (all || suite == "duality") duality_suite(c, st);
  if (all || suite == "dirac") dirac_suite(c, st);
  if (all || suite == "moduli") moduli_suite(c, st);
  return r;
}

Report compute_brackets(const RunConfig& cfg, int jobs) {
  Report r;
  r.command = "bracket";
  r.seed = cfg.seed;
  r.config = cfg.echo;
  Ctx c = make_ctx(cfg, jobs, r);
  Structures st = build_structures(c);
  ModuliSite ms = moduli_site(c, st);
  const Site& s = ms.P->site;
  std::vector<std::pair<std::string, std::string>> pairs = cfg.words;
  if (pairs.empty()) pairs = {{ms.labels[0], ms.labels[1]}};
  std::vector<std::pair<ScalarField, ScalarField>> fns;
  for (const auto& [u, v] : pairs) fns.emplace_back(trace_function(parse_word(s, u)), trace_function(parse_word(s, v)));
  auto targets = targets_of(c);
  r.rows = json::array();
  for (size_t ti = 0; ti < targets.size(); ++ti) {
    auto sols = solve_all(c, ms, targets[ti], "solve/t" + std::to_string(ti));
    for (int i = 0; i < static_cast<int>(sols.size()); ++i) {
      const auto& so = sols[i];
      for (size_t k = 0; k < pairs.size(); ++k) {
        json row;
        row["target"] = ti;
        row["sample"] = i;
        row["u"] = pairs[k].first;
        row["v"] = pairs[k].second;
        if (!so.ok) {
          row["status"] = "SolverFailed";
          row["reason"] = so.error;
          r.rows.push_back(row);
          continue;
        }
        const PointC& p = so.sample.point;
        cd val = bracket(*ms.P, fns[k].first, fns[k].second, p);
        Rng rng(seed_for(c, "reconj", i));
        MatC g = random_group_element(*c.m, rng, 0.5);
        cd moved = bracket(*ms.P, fns[k].first, fns[k].second, conjugate_point(p, g));
        row["status"] = "ok";
        row["residual"] = so.sample.residual;
        row["iterations"] = so.sample.iterations;
        row["value"] = json::array({val.real(), val.imag()});
        row["conjugation_delta"] = std::abs(moved - val);
        r.rows.push_back(row);
      }
    }
  }
  return r;
}

Report sample_reps(const RunConfig& cfg, int jobs) {
  Report r;
  r.command = "sample";
  r.seed = cfg.seed;
  r.config = cfg.echo;
  Ctx c = make_ctx(cfg, jobs, r);
  Structures st = build_structures(c);
  ModuliSite ms = moduli_site(c, st);
  auto targets = targets_of(c);
  r.rows = json::array();
  for (size_t ti = 0; ti < targets.size(); ++ti) {
    auto sols = solve_all(c, ms, targets[ti], "solve/t" + std::to_string(ti));
    for (int i = 0; i < static_cast<int>(sols.size()); ++i) {
      json row;
      row["target"] = ti;
      row["sample"] = i;
      if (!sols[i].ok) {
        row["status"] = "SolverFailed";
        row["reason"] = sols[i].error;
      } else {
        row["status"] = "ok";
        row["residual"] = sols[i].sample.residual;
        row["iterations"] = sols[i].sample.iterations;
        json pt = json::object();
        for (int a = 0; a < ms.P->site.arity(); ++a)
          pt[ms.P->site.factors[a].letter] = matrix_json(sols[i].sample.point[a]);
        row["point"] = pt;
      }
      r.rows.push_back(row);
    }
  }
  return r;
}

}  // namespace qp::cli
