#pragma once

#include <cstdint>
#include <vector>

#include "qpois/quasi.hpp"

namespace qp {

ScalarField trace_function(const Word& w);

// max over sampled g of |f(g p g^-1) - f(p)|, relative to max(1, |f(p)|).
double conjugation_invariance(const Site& s, const ScalarField& f, const PointC& p, int samples = 4,
                              std::uint64_t seed = 17);
// max |df(X_M)| over the structure's infinitesimal actions.
double infinitesimal_invariance(const QPStructure& P, const ScalarField& f, const PointC& p);

// {f, h} = P(df, dh).
cd bracket(const QPStructure& P, const ScalarField& f, const ScalarField& h, const PointC& p);

struct HamiltonianField {
  Tangent<cd> field;
  VecC left;                    // ambient left coordinates
  VecC frame;                   // frame coordinates
  double level_tangency = 0.0;  // |dPhi(X_f)|
};
// X_f = P#(df); NotInvariant unless df kills the infinitesimal action.
HamiltonianField hamiltonian_field(const QPStructure& P, const ScalarField& f, const PointC& p, double tol = 1e-8);

// {{f,h},k} + cyclic for the bracket P(df, dh).
cd jacobiator_invariant(const QPStructure& P, const ScalarField& f, const ScalarField& h, const ScalarField& k,
                        const PointC& p);
double jacobi_invariants(const QPStructure& P, const ScalarField& f, const ScalarField& h, const ScalarField& k,
                         const std::vector<PointC>& points);

// max |{f, tr(Phi^m) - tr(c^m)}| over points and m = 1..n.
double poisson_ideal_residual(const QPStructure& P, const Word& phi, const MatC& c, const ScalarField& f,
                              const std::vector<PointC>& points);

struct RepSample {
  PointC point;
  double residual = 0.0;  // || Phi(p) target^-1 - I ||_F
  int iterations = 0;
  MatC target;
  std::uint64_t seed = 0;
};

struct SolverOptions {
  int max_iters = 200;
  double tol = 1e-10;
  double damping = 1e-3;
};

// Levenberg-Marquardt on Phi(p) target^-1 - I; class factors move by conjugation only.
RepSample solve_relator(const Site& s, const Word& phi, const MatC& target, std::uint64_t seed,
                        const SolverOptions& opt = {});
RepSample solve_relator_from(const Site& s, const Word& phi, const MatC& target, const PointC& start,
                             const SolverOptions& opt = {});

// Class conjugators recovered for a point of the site (z = k rep k^-1).
double relator_residual(const Site& s, const Word& phi, const MatC& target, const PointC& p);

}  // namespace qp
