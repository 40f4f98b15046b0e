#include "qpois/charvar.hpp"

#include <algorithm>
#include <cmath>

#include "qpois/expm.hpp"
#include "qpois/random.hpp"

namespace qp {

ScalarField trace_function(const Word& w) { return ScalarField::trace(w); }

double conjugation_invariance(const Site& s, const ScalarField& f, const PointC& p, int samples,
                              std::uint64_t seed) {
  Rng rng(seed);
  const cd base = f.eval<cd>(p, s.n());
  double worst = 0.0;
  for (int i = 0; i < samples; ++i) {
    MatC g = random_group_element(*s.model, rng, 0.7);
    cd moved = f.eval<cd>(conjugate_point(p, g), s.n());
    worst = std::max(worst, std::abs(moved - base) / std::max(1.0, std::abs(base)));
  }
  return worst;
}

double infinitesimal_invariance(const QPStructure& P, const ScalarField& f, const PointC& p) {
  const auto& m = *P.site.model;
  PointC pinv = inverses<cd>(p);
  VecC df = differential_left<cd>(f, P.site, p);
  double worst = 0.0;
  for (const auto& a : P.actions) {
    MatC F = genmap_left<cd>(m, a.fund, p, pinv);
    VecC r = F.transpose() * df;
    if (r.size()) worst = std::max(worst, r.cwiseAbs().maxCoeff());
  }
  return worst;
}

cd bracket(const QPStructure& P, const ScalarField& f, const ScalarField& h, const PointC& p) {
  return bivector_pair<cd>(P, f, h, p);
}

HamiltonianField hamiltonian_field(const QPStructure& P, const ScalarField& f, const PointC& p, double tol) {
  const auto& m = *P.site.model;
  VecC df = differential_left<cd>(f, P.site, p);
  double scale = std::max(1.0, df.size() ? df.cwiseAbs().maxCoeff() : 0.0);
  if (infinitesimal_invariance(P, f, p) > tol * scale)
    throw Error(ErrorCode::NotInvariant, "function is not invariant under the action");
  PointC pinv = inverses<cd>(p);
  MatC Pl = bivector_left<cd>(P, p, pinv);
  HamiltonianField h;
  h.left = Pl.transpose() * df;
  const int d = m.d;
  for (int a = 0; a < P.site.arity(); ++a) {
    h.field.v.push_back(MatC(p[a] * m.element<cd>(VecC(h.left.segment(a * d, d)))));
    h.field.lift.push_back(VecC::Zero(d));
  }
  Frame fr = make_frame(P.site, p);
  h.frame = fr.left_pinv * h.left;
  // Lifts for class factors, so forms with tau terms can be evaluated on X_f.
  Tangent<cd> t = tangent_from_frame(P.site, fr, h.frame);
  h.field.lift = t.lift;
  for (const auto& a : P.actions) {
    MatC dphi = word_tangent<cd>(a.phi, p, pinv, h.field.v, m.n);
    h.level_tangency = std::max(h.level_tangency, dphi.cwiseAbs().maxCoeff());
  }
  return h;
}

cd jacobiator_invariant(const QPStructure& P, const ScalarField& f, const ScalarField& h, const ScalarField& k,
                        const PointC& p) {
  // The pb2 bracket is twice P(df, dh), so its Jacobiator is four times ours.
  return 0.25 * jacobiator(P, f, h, k, p);
}

double jacobi_invariants(const QPStructure& P, const ScalarField& f, const ScalarField& h, const ScalarField& k,
                         const std::vector<PointC>& points) {
  double worst = 0.0;
  for (const auto& p : points) worst = std::max(worst, std::abs(jacobiator_invariant(P, f, h, k, p)));
  return worst;
}

double poisson_ideal_residual(const QPStructure& P, const Word& phi, const MatC& c, const ScalarField& f,
                              const std::vector<PointC>& points) {
  const int n = P.site.n();
  double worst = 0.0;
  MatC cm = MatC::Identity(n, n);
  for (int mpow = 1; mpow <= n; ++mpow) {
    cm = cm * c;
    ScalarField F = ScalarField::trace_power(phi, mpow) - ScalarField::constant(cm.trace());
    for (const auto& p : points) worst = std::max(worst, std::abs(bracket(P, f, F, p)));
  }
  return worst;
}

namespace {

struct Param {
  PointC point;
  std::vector<MatC> conj;  // class conjugators; unused for full factors
};

PointC realize(const Site& s, const Param& q) {
  PointC p = q.point;
  for (int a = 0; a < s.arity(); ++a)
    if (s.factors[a].kind == FactorKind::Class) p[a] = q.conj[a] * s.factors[a].rep * inverse<cd>(q.conj[a]);
  return p;
}

VecC residual_vec(const Site& s, const Word& phi, const MatC& tinv, const PointC& p) {
  PointC pinv = inverses<cd>(p);
  MatC r = word_eval<cd>(phi, p, pinv, s.n()) * tinv - MatC::Identity(s.n(), s.n());
  return flatten<cd>(r);
}

}  // namespace

double relator_residual(const Site& s, const Word& phi, const MatC& target, const PointC& p) {
  return residual_vec(s, phi, inverse<cd>(target), p).norm();
}

namespace {

RepSample solve_param(const Site& s, const Word& phi, const MatC& target, Param cur, const SolverOptions& opt) {
  const auto& m = *s.model;
  const int d = m.d, k = s.arity(), n = m.n;
  const int np = d * k;
  MatC tinv = inverse<cd>(target);
  PointC p = realize(s, cur);
  VecC r = residual_vec(s, phi, tinv, p);
  double res = r.norm();
  double mu = opt.damping;
  RepSample out;
  out.target = target;
  int it = 0;
  for (; it < opt.max_iters && res > opt.tol; ++it) {
    PointC pinv = inverses<cd>(p);
    MatC Jc(n * n, np);
    for (int a = 0; a < k; ++a)
      for (int i = 0; i < d; ++i) {
        std::vector<MatC> v(k, MatC::Zero(n, n));
        const MatC& e = m.basis[i];
        v[a] = s.factors[a].kind == FactorKind::Full ? MatC(p[a] * e) : MatC(e * p[a] - p[a] * e);
        Jc.col(a * d + i) = flatten<cd>(MatC(word_tangent<cd>(phi, p, pinv, v, n) * tinv));
      }
    // Real form of the holomorphic system.
    const int rows = 2 * n * n, cols = 2 * np;
    Eigen::MatrixXd J(rows, cols);
    J << Jc.real(), -Jc.imag(), Jc.imag(), Jc.real();
    Eigen::VectorXd rr(rows);
    rr << r.real(), r.imag();
    Eigen::MatrixXd JtJ = J.transpose() * J;
    Eigen::VectorXd g = J.transpose() * rr;
    bool accepted = false;
    for (int tries = 0; tries < 30 && !accepted; ++tries) {
      Eigen::MatrixXd A = JtJ + mu * Eigen::MatrixXd::Identity(cols, cols);
      Eigen::VectorXd step = -A.ldlt().solve(g);
      if (!step.allFinite()) {
        mu *= 10;
        continue;
      }
      VecC xi(np);
      for (int j = 0; j < np; ++j) xi(j) = cd(step(j), step(np + j));
      Param trial = cur;
      for (int a = 0; a < k; ++a) {
        MatC X = m.element<cd>(VecC(xi.segment(a * d, d)));
        if (s.factors[a].kind == FactorKind::Full)
          trial.point[a] = retract(m, MatC(cur.point[a] * expm<cd>(X)));
        else
          trial.conj[a] = retract(m, MatC(expm<cd>(X) * cur.conj[a]));
      }
      PointC tp = realize(s, trial);
      VecC tr = residual_vec(s, phi, tinv, tp);
      if (tr.norm() < res) {
        if (step.norm() < 1e-15 && res - tr.norm() < 1e-16) break;
        cur = trial;
        p = tp;
        r = tr;
        res = tr.norm();
        mu = std::max(mu / 10.0, 1e-15);
        accepted = true;
      } else {
        mu *= 10.0;
      }
    }
    if (!accepted) {
      out.point = p;
      out.residual = res;
      out.iterations = it;
      throw Error(ErrorCode::Stalled, "relator solver stalled at residual " + std::to_string(res));
    }
  }
  out.point = p;
  out.residual = res;
  out.iterations = it;
  if (res > opt.tol)
    throw Error(ErrorCode::MaxIters, "relator solver hit the iteration cap at residual " + std::to_string(res));
  return out;
}

}  // namespace

RepSample solve_relator_from(const Site& s, const Word& phi, const MatC& target, const PointC& start,
                             const SolverOptions& opt) {
  Param cur;
  cur.point = start;
  cur.conj.assign(s.arity(), MatC::Identity(s.n(), s.n()));
  for (int a = 0; a < s.arity(); ++a)
    if (s.factors[a].kind == FactorKind::Class) {
      // Continue from the given value: redefine the class factor's base point as start[a].
      if (std::abs(start[a].trace() - s.factors[a].rep.trace()) > 1e-8 * std::max(1.0, start[a].norm()))
        throw Error(ErrorCode::SolverFailed, "start point is not in the prescribed class");
    }
  Site local = s;
  for (int a = 0; a < s.arity(); ++a)
    if (s.factors[a].kind == FactorKind::Class) local.factors[a].rep = start[a];
  return solve_param(local, phi, target, cur, opt);
}

RepSample solve_relator(const Site& s, const Word& phi, const MatC& target, std::uint64_t seed,
                        const SolverOptions& opt) {
  // Same draws as random_point, keeping the class conjugators.
  Rng rng(seed);
  Param cur;
  for (const auto& f : s.factors) {
    MatC g = random_group_element(*s.model, rng, 0.45);
    if (f.kind == FactorKind::Full) {
      cur.point.push_back(g);
      cur.conj.push_back(MatC::Identity(s.n(), s.n()));
    } else {
      cur.point.push_back(g * f.rep * inverse<cd>(g));
      cur.conj.push_back(g);
    }
  }
  RepSample r = solve_param(s, phi, target, cur, opt);
  r.seed = seed;
  return r;
}

}  // namespace qp
