#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qpois/fields.hpp"

namespace qp {

enum class TensorKind { Bivector, TwoForm };

struct TensorAtPoint {
  TensorKind kind = TensorKind::Bivector;
  MatC coeffs;  // antisymmetric, in the frame
  Frame frame;
  double residual = 0.0;  // tangency or well-definedness residual, by context
};

using PairingPtr = std::shared_ptr<const PairingData>;

// Base structures.
QPStructure conj_bivector(const Site& one_factor, PairingPtr pd);  // P_G or P_C on a single factor
QHStructure class_form(const Site& one_class, PairingPtr pd);       // tau_C with momentum the inclusion
QPStructure double_bivector(std::shared_ptr<const LieAlgebraModel> m, PairingPtr pd,
                            const std::string& x = "x", const std::string& y = "y");
QHStructure double_form(std::shared_ptr<const LieAlgebraModel> m, PairingPtr pd, const std::string& x = "x",
                        const std::string& y = "y");
QPStructure zero_bivector(const Site& s, PairingPtr pd, std::vector<ActionComp> actions);

// Disjoint product: factors, terms and action components of b follow those of a.
QPStructure product(const QPStructure& a, const QPStructure& b);
QHStructure product(const QHStructure& a, const QHStructure& b);

// Fuses action components i < j into their diagonal; momentum Phi_i Phi_j.
QPStructure fuse(const QPStructure& s, int i = 0, int j = 1);
QHStructure fuse(const QHStructure& s, int i = 0, int j = 1);

enum class SurfaceVariant { Classes, FullGroups };

struct SurfaceDescriptor {
  QPStructure bivector;
  std::optional<QHStructure> form;        // fusion route (classes variant only)
  std::optional<QHStructure> chain_form;  // omega_c + sum z_j^* tau_j
  TwoChain chain;
  Word relator;
  std::vector<int> class_factors;
  int genus = 0;
};

SurfaceDescriptor assemble_surface_site(std::shared_ptr<const LieAlgebraModel> m, PairingPtr pd, int genus,
                                        const std::vector<MatC>& class_reps, SurfaceVariant variant);

TensorAtPoint P_G_at(std::shared_ptr<const LieAlgebraModel> m, PairingPtr pd, const MatC& q);
TensorAtPoint restrict_to_class(const QPStructure& s, const PointC& p, double tol = 1e-8);

struct TauValue {
  cd value;
  double well_definedness = 0.0;
};
TauValue tau_C_at(const LieAlgebraModel& m, const PairingData& pd, const MatC& q, const MatC& v, const MatC& w,
                  std::uint64_t seed = 11);

TensorAtPoint double_at(std::shared_ptr<const LieAlgebraModel> m, PairingPtr pd, const MatC& q1, const MatC& q2,
                        TensorKind mode);

// D x N matrix: left coordinates at Phi_c of dPhi_c applied to each frame vector,
// one d-row block per action component.
MatC momentum_differential(const Site& s, const std::vector<ActionComp>& acts, const PointC& p, const Frame& f);
// N x (d * components) matrix of the infinitesimal actions in frame coordinates.
MatC fund_frame(const Site& s, const std::vector<ActionComp>& acts, const PointC& p, const Frame& f);

double momentum_residual(const QPStructure& s, const PointC& p);
double momentum_residual(const QHStructure& s, const PointC& p);

MatC rho_Phi(const Site& s, const std::vector<ActionComp>& acts, const PointC& p, const Frame& f);

struct DualityResidual {
  double p_sigma = 0.0;  // || P# s# - (Id - rho/4) ||
  double sigma_p = 0.0;  // || s# P# - (Id - rho*/4) ||
  double max() const { return std::max(p_sigma, sigma_p); }
};
DualityResidual duality_residual(const QPStructure& P, const QHStructure& sigma, const PointC& p);

enum class ReconstructDirection { BivectorFromForm, FormFromBivector };
TensorAtPoint reconstruct_dual(const QPStructure* P, const QHStructure* sigma, ReconstructDirection dir,
                               const PointC& p, double tol = 1e-9);

struct RankReport {
  int rank = 0;
  int expected = 0;
  double smallest_singular = 0.0;
  int kernel_intersection = 0;  // dim(TM^sigma cap ker dPhi) in two-form mode
  bool full() const { return rank == expected; }
};
RankReport nondegeneracy_check(const QHStructure& s, const PointC& p, double tol = 1e-8);
RankReport nondegeneracy_check(const QPStructure& s, const PointC& p, double tol = 1e-8);

// max over points and sampled field triples of |d sigma - Phi^* lambda|.
double quasi_closed_residual(const QHStructure& s, const std::vector<PointC>& points, int triples = 3,
                             std::uint64_t seed = 5);

// (1/2) d(w1 . wbar2) - (lambda_2 - mult^* lambda + lambda_1) on G x G, max over
// random points and generator-field triples.
double mult_calibration_residual(std::shared_ptr<const LieAlgebraModel> m, PairingPtr pd, int points = 16,
                                 int triples = 3, std::uint64_t seed = 3);

// Equivariance under simultaneous conjugation by g.
double invariance_residual(const QPStructure& s, const PointC& p, const MatC& g);
double invariance_residual(const QHStructure& s, const PointC& p, const MatC& g);

// Value-level equality of two bivectors / forms at a point (frame coordinates).
double bivector_difference(const QPStructure& a, const QPStructure& b, const PointC& p);
double form_difference(const QHStructure& a, const QHStructure& b, const PointC& p);

}  // namespace qp
