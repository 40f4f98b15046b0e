#pragma once

#include "qpois/quasi.hpp"

namespace qp {

// Vectors of V + V* stacked as (v; alpha), with <(v,a),(w,b)> = a(w) + b(v).
cd split_pairing(const VecC& a, const VecC& b);
MatC split_gram(const MatC& A, const MatC& B);  // A^T J B

struct LagrangianSubspace {
  MatC basis;  // 2N x k, orthonormal columns
  int N = 0;
  double isotropy() const;
  bool lagrangian(double tol = 1e-10) const { return basis.cols() == N && isotropy() <= tol; }
};

// Orthonormal basis of the column span; rank by singular values above tol.
LagrangianSubspace span_of(const MatC& cols, int N, double tol = 1e-8);

LagrangianSubspace tangent_summand(int N);
LagrangianSubspace cotangent_summand(int N);
// Gr_sigma = {(v, s#v)}, Gr_P = {(P#a, a)} for frame matrices.
LagrangianSubspace graph_of_form(const MatC& S);
LagrangianSubspace graph_of_bivector(const MatC& P);

// Target of a momentum map with C components: G^C in left coordinates.
struct TargetPoint {
  std::vector<MatC> phi;  // Phi_c(p)
  std::vector<MatC> ad;   // Ad_{Phi_c}
  int d = 0;
  int dim() const { return d * static_cast<int>(phi.size()); }
};
TargetPoint momentum_target(const Site& s, const std::vector<ActionComp>& acts, const PointC& p);
TargetPoint target_from_values(const LieAlgebraModel& m, const std::vector<MatC>& values);

struct DiracFibers {
  MatC E;  // 2T x T, column X -> ((L-R)X, (1/2)(L*^-1 + R*^-1) psi X)
  MatC F;  // 2T x T, column X -> ((L+R)X, (1/2)(L*^-1 - R*^-1) psi X)
};
DiracFibers cartan_dirac_fibers(const PairingData& pd, const TargetPoint& t);

struct Projections {
  MatC p, q;  // 2T x 2T
};
Projections projections_pq(const PairingData& pd, const TargetPoint& t);

struct ProjectionReport {
  double p_idempotent = 0.0;
  double q_idempotent = 0.0;
  double sum_identity = 0.0;
  double image_p = 0.0;  // distance of range(p) from E
  double image_q = 0.0;
  double pq_zero = 0.0;  // || p q ||
  double orthogonality = 0.0;  // max |<E x, F y>|
  double lagrangian = 0.0;     // worst isotropy of E and F
};
ProjectionReport projection_report(const PairingData& pd, const TargetPoint& t);

// Pointwise data of a morphism (Phi, sigma): M -> target.
struct MorphismData {
  MatC S;   // N x N frame matrix of sigma
  MatC dPhi;  // T x N
  int N = 0;
  int T = 0;
};
MorphismData morphism_at(const QHStructure& s, const PointC& p);

enum class TransportDirection { Forward, Backward };
// Forward: E on M -> {(dPhi v, a) : (v, dPhi^T a - sigma# v) in E}.
// Backward: E on the target -> {(v, dPhi^T b - sigma# v) : (dPhi v, b) in E}.
LagrangianSubspace transport_image(const LagrangianSubspace& E, const MorphismData& md, TransportDirection dir,
                                   double tol = 1e-8);

struct StrongnessReport {
  bool strong = false;
  int intersection_dim = 0;
  double margin = 0.0;  // sine of the smallest principal angle
};
// ker(Phi, sigma) = {(v, -sigma# v) : dPhi v = 0} against a Lagrangian E of M.
StrongnessReport strongness_check(const MorphismData& md, const LagrangianSubspace& E, double tol = 1e-8);

struct EquivalenceReport {
  bool momentum = false;
  bool a = false, b = false, c = false, d = false;
  bool agree() const { return a == b && b == c && c == d; }
};
EquivalenceReport dirac_equivalence(const QHStructure& s, const PointC& p, double momentum_tol = 1e-9,
                                    double tol = 1e-8);
// Same four tests on raw pointwise data (no momentum requirement, used for controls).
EquivalenceReport dirac_equivalence(const PairingData& pd, const MorphismData& md, const TargetPoint& t,
                                    double tol = 1e-8);

struct TechChain {
  int ker_ad = 0;         // dim ker(Id + Ad_{Phi^-1})
  int ker_sigma = 0;      // dim ker sigma#
  int fund_rank = 0;      // rank of fund on ker(Id + Ad_{Phi^-1})
  double fund_in_kernel = 0.0;  // || sigma# fund(X) || on that kernel
  int dphi_rank = 0;      // rank of dPhi on ker sigma#
  int ker_target = 0;     // dim ker(L^-1 + R^-1)
  double dphi_in_target = 0.0;
};
TechChain tech_chain(const QHStructure& s, const PointC& p, double tol = 1e-8);

}  // namespace qp
