#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qpois/errors.hpp"
#include "qpois/scalar.hpp"

namespace qp {

// Dense d x d x d array, index order (i, j, k) with i slowest.
struct Tensor3 {
  int d = 0;
  std::vector<cd> a;

  Tensor3() = default;
  explicit Tensor3(int dim) : d(dim), a(static_cast<size_t>(dim) * dim * dim, cd(0)) {}
  cd& operator()(int i, int j, int k) { return a[(static_cast<size_t>(i) * d + j) * d + k]; }
  const cd& operator()(int i, int j, int k) const { return a[(static_cast<size_t>(i) * d + j) * d + k]; }
  double max_abs() const;
};

struct LieAlgebraModel {
  int d = 0;  // dimension of the algebra
  int n = 0;  // ambient matrix size
  std::vector<MatC> basis;
  Tensor3 c;     // c(k, u, v) = eta^k_{u,v}, i.e. [e_u, e_v] = c(k,u,v) e_k
  MatC coord;    // d x n^2 left inverse of the flattened basis
  int sl_block = 0;  // leading block whose determinant is normalized to 1 (0: none)
  std::string name;

  template <class T>
  Vec<T> coords(const Mat<T>& x) const {
    Vec<T> f = flatten(x);
    if constexpr (std::is_same_v<T, cd>) {
      return coord * f;
    } else {
      return lift<T>(coord) * f;
    }
  }

  template <class T>
  Mat<T> element(const Vec<T>& x) const {
    Mat<T> m = Mat<T>::Zero(n, n);
    for (int j = 0; j < d; ++j) m += x(j) * lift<T>(basis[j]);
    return m;
  }

  // Matrix of X -> q X q^{-1} in basis coordinates.
  template <class T>
  Mat<T> Ad(const Mat<T>& q, const Mat<T>& qinv) const {
    Mat<T> r(d, d);
    for (int j = 0; j < d; ++j) r.col(j) = coords<T>(Mat<T>(q * lift<T>(basis[j]) * qinv));
    return r;
  }

  VecC bracket(const VecC& x, const VecC& y) const;
  // Residual of expressing x in the span of the basis.
  double span_residual(const MatC& x) const;
};

LieAlgebraModel build_lie_algebra(const std::vector<MatC>& basis, double tol = 1e-10);
LieAlgebraModel make_sl(int n);
LieAlgebraModel make_gl(int n);
// Diagonal matrices of size n.
LieAlgebraModel make_abelian(int n);
// sl(2) in the leading 2x2 block plus `abelian` diagonal directions.
LieAlgebraModel make_sl2_plus_abelian(int abelian);

VecC adjoint_action(const LieAlgebraModel& m, const MatC& q, const VecC& x, double tol = 1e-10);
double structure_jacobi_residual(const LieAlgebraModel& m);
double structure_reconstruction_residual(const LieAlgebraModel& m);

struct ChiBlocks {
  MatC block12;  // coefficient of e^1_j (x) e^2_k
  MatC block21;  // coefficient of e^2_k (x) e^1_j, stored with index order (k, j)
};

struct PairingData {
  std::optional<MatC> eta_lower;  // the form, possibly degenerate
  MatC eta_upper;                 // the 2-tensor H
  Tensor3 phi;                    // eta^{j,k,s}
  double phi_antisymmetry = 0.0;
  ChiBlocks chi;

  // True when eta_lower exists and is invertible (within 1e-10 relative).
  bool lower_nondegenerate() const;
  const MatC& lower() const;  // throws DegeneratePairing if absent
  // Throws DegeneratePairing unless lower_nondegenerate().
  void require_nondegenerate(const char* where) const;
};

enum class TensorIndex { Lower, Upper };

// scale * tr(e_j e_k) on the masked indices; H is the inverse of the masked
// block (zero elsewhere). An empty mask means all indices.
PairingData trace_pairing(const LieAlgebraModel& m, double scale = 1.0, std::vector<bool> mask = {});
PairingData make_pairing(const LieAlgebraModel& m, std::optional<MatC> lower, const MatC& upper);

std::pair<Tensor3, double> cartan3(const LieAlgebraModel& m, const MatC& upper, double tol = 1e-10);
ChiBlocks chi2(const MatC& upper);
double verify_chi_identity(const LieAlgebraModel& m, const PairingData& p);
double ad_invariance_residual(const LieAlgebraModel& m, const MatC& tensor, TensorIndex idx,
                              int samples = 32, std::uint64_t seed = 1);
double psi_inverse_residual(const PairingData& p);

struct IdealReport {
  MatC basis;            // d x r coordinates spanning g_H
  MatC restricted_form;  // r x r induced form on g_H
  double certificate = 0.0;
  double projection_residual = 0.0;
  int dim = 0;
};
IdealReport ideal_of_H(const LieAlgebraModel& m, const PairingData& p, double tol = 1e-9);

// Random algebra element with i.i.d. standard complex normal coefficients.
class Rng;
VecC random_algebra(const LieAlgebraModel& m, Rng& rng);
// exp of a scaled random algebra element, retracted to the modeled group.
MatC random_group_element(const LieAlgebraModel& m, Rng& rng, double scale = 0.5);
MatC retract(const LieAlgebraModel& m, const MatC& q);

}  // namespace qp
