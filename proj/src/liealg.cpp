#include "qpois/liealg.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "qpois/expm.hpp"
#include "qpois/random.hpp"

namespace qp {

const char* to_string(ErrorCode c) {
  switch (c) {
    case ErrorCode::NotClosed: return "NotClosed";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::NotInSpan: return "NotInSpan";
    case ErrorCode::NotConvenient: return "NotConvenient";
    case ErrorCode::NotTangent: return "NotTangent";
    case ErrorCode::LiftFailed: return "LiftFailed";
    case ErrorCode::IncompatibleActions: return "IncompatibleActions";
    case ErrorCode::BadSignature: return "BadSignature";
    case ErrorCode::NotEpimorphism: return "NotEpimorphism";
    case ErrorCode::DegeneratePairing: return "DegeneratePairing";
    case ErrorCode::NotInvariant: return "NotInvariant";
    case ErrorCode::MaxIters: return "MaxIters";
    case ErrorCode::Stalled: return "Stalled";
    case ErrorCode::SolverFailed: return "SolverFailed";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::Unsupported: return "Unsupported";
  }
  return "Unknown";
}

double Tensor3::max_abs() const {
  double m = 0.0;
  for (const auto& x : a) m = std::max(m, std::abs(x));
  return m;
}

VecC LieAlgebraModel::bracket(const VecC& x, const VecC& y) const {
  VecC r = VecC::Zero(d);
  for (int k = 0; k < d; ++k)
    for (int u = 0; u < d; ++u)
      for (int v = 0; v < d; ++v) r(k) += c(k, u, v) * x(u) * y(v);
  return r;
}

double LieAlgebraModel::span_residual(const MatC& x) const {
  VecC cx = coords<cd>(x);
  return (element<cd>(cx) - x).norm();
}

LieAlgebraModel build_lie_algebra(const std::vector<MatC>& basis, double tol) {
  LieAlgebraModel m;
  if (basis.empty()) throw Error(ErrorCode::RankDeficient, "empty basis");
  m.n = static_cast<int>(basis.front().rows());
  m.d = static_cast<int>(basis.size());
  for (const auto& b : basis)
    if (b.rows() != m.n || b.cols() != m.n) throw Error(ErrorCode::RankDeficient, "basis matrices differ in shape");
  m.basis = basis;
  MatC flat(m.n * m.n, m.d);
  for (int j = 0; j < m.d; ++j) flat.col(j) = flatten<cd>(basis[j]);
  Eigen::JacobiSVD<MatC> svd(flat);
  const auto& sv = svd.singularValues();
  if (sv(m.d - 1) <= tol * std::max(1.0, sv(0)))
    throw Error(ErrorCode::RankDeficient, "basis matrices are linearly dependent");
  m.coord = flat.completeOrthogonalDecomposition().pseudoInverse();
  m.c = Tensor3(m.d);
  for (int u = 0; u < m.d; ++u) {
    for (int v = 0; v < m.d; ++v) {
      MatC br = basis[u] * basis[v] - basis[v] * basis[u];
      VecC cc = m.coords<cd>(br);
      double res = (m.element<cd>(cc) - br).norm();
      if (res > tol * std::max(1.0, br.norm()))
        throw Error(ErrorCode::NotClosed, "commutator leaves the span");
      for (int k = 0; k < m.d; ++k) m.c(k, u, v) = cc(k);
    }
  }
  return m;
}

namespace {
MatC unit(int n, int i, int j) {
  MatC e = MatC::Zero(n, n);
  e(i, j) = 1.0;
  return e;
}
}  // namespace

LieAlgebraModel make_sl(int n) {
  std::vector<MatC> b;
  if (n == 2) {
    b = {unit(2, 0, 0) - unit(2, 1, 1), unit(2, 0, 1), unit(2, 1, 0)};
  } else {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (i != j) b.push_back(unit(n, i, j));
    for (int i = 0; i + 1 < n; ++i) b.push_back(unit(n, i, i) - unit(n, i + 1, i + 1));
  }
  LieAlgebraModel m = build_lie_algebra(b);
  m.sl_block = n;
  m.name = "sl" + std::to_string(n);
  return m;
}

LieAlgebraModel make_gl(int n) {
  std::vector<MatC> b;
  if (n == 2) {
    b = {unit(2, 0, 0) - unit(2, 1, 1), unit(2, 0, 1), unit(2, 1, 0), MatC::Identity(2, 2)};
  } else {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) b.push_back(unit(n, i, j));
  }
  LieAlgebraModel m = build_lie_algebra(b);
  m.name = "gl" + std::to_string(n);
  return m;
}

LieAlgebraModel make_abelian(int n) {
  std::vector<MatC> b;
  for (int j = 0; j < n; ++j) b.push_back(unit(n, j, j));
  LieAlgebraModel m = build_lie_algebra(b);
  m.name = "ab" + std::to_string(n);
  return m;
}

LieAlgebraModel make_sl2_plus_abelian(int abelian) {
  const int n = 2 + abelian;
  std::vector<MatC> b = {unit(n, 0, 0) - unit(n, 1, 1), unit(n, 0, 1), unit(n, 1, 0)};
  for (int j = 0; j < abelian; ++j) b.push_back(unit(n, 2 + j, 2 + j));
  LieAlgebraModel m = build_lie_algebra(b);
  m.sl_block = 2;
  m.name = "sl2+ab" + std::to_string(abelian);
  return m;
}

VecC adjoint_action(const LieAlgebraModel& m, const MatC& q, const VecC& x, double tol) {
  MatC qi = inverse<cd>(q);
  MatC y = q * m.element<cd>(x) * qi;
  VecC c = m.coords<cd>(y);
  if ((m.element<cd>(c) - y).norm() > tol * std::max(1.0, y.norm()))
    throw Error(ErrorCode::NotInSpan, "conjugate leaves the algebra");
  return c;
}

double structure_jacobi_residual(const LieAlgebraModel& m) {
  double worst = 0.0;
  const int d = m.d;
  for (int u = 0; u < d; ++u)
    for (int v = 0; v < d; ++v)
      for (int w = 0; w < d; ++w)
        for (int p = 0; p < d; ++p) {
          cd s = 0;
          for (int q = 0; q < d; ++q)
            s += m.c(q, u, v) * m.c(p, q, w) + m.c(q, v, w) * m.c(p, q, u) + m.c(q, w, u) * m.c(p, q, v);
          worst = std::max(worst, std::abs(s));
        }
  return worst;
}

double structure_reconstruction_residual(const LieAlgebraModel& m) {
  double worst = 0.0;
  for (int u = 0; u < m.d; ++u)
    for (int v = 0; v < m.d; ++v) {
      MatC br = m.basis[u] * m.basis[v] - m.basis[v] * m.basis[u];
      MatC rec = MatC::Zero(m.n, m.n);
      for (int k = 0; k < m.d; ++k) rec += m.c(k, u, v) * m.basis[k];
      worst = std::max(worst, (rec - br).norm());
    }
  return worst;
}

bool PairingData::lower_nondegenerate() const {
  if (!eta_lower) return false;
  Eigen::JacobiSVD<MatC> svd(*eta_lower);
  const auto& s = svd.singularValues();
  if (s.size() == 0) return true;
  return s(s.size() - 1) > 1e-10 * std::max(1.0, s(0));
}

const MatC& PairingData::lower() const {
  if (!eta_lower) throw Error(ErrorCode::DegeneratePairing, "no bilinear form on the algebra");
  return *eta_lower;
}

void PairingData::require_nondegenerate(const char* where) const {
  if (!lower_nondegenerate())
    throw Error(ErrorCode::DegeneratePairing, std::string(where) + " needs a non-degenerate form");
}

std::pair<Tensor3, double> cartan3(const LieAlgebraModel& m, const MatC& H, double tol) {
  const int d = m.d;
  Tensor3 phi(d);
  // eta^{j,k,s} = eta^{j,u} eta^k_{u,v} eta^{v,s}
  for (int j = 0; j < d; ++j)
    for (int k = 0; k < d; ++k)
      for (int s = 0; s < d; ++s) {
        cd acc = 0;
        for (int u = 0; u < d; ++u) {
          if (H(j, u) == cd(0)) continue;
          for (int v = 0; v < d; ++v) acc += H(j, u) * m.c(k, u, v) * H(v, s);
        }
        phi(j, k, s) = acc;
      }
  double res = 0.0;
  for (int j = 0; j < d; ++j)
    for (int k = 0; k < d; ++k)
      for (int s = 0; s < d; ++s) {
        res = std::max(res, std::abs(phi(j, k, s) + phi(k, j, s)));
        res = std::max(res, std::abs(phi(j, k, s) + phi(j, s, k)));
      }
  if (res > tol * std::max(1.0, phi.max_abs()))
    throw Error(ErrorCode::NotConvenient, "Cartan 3-tensor is not totally antisymmetric");
  return {phi, res};
}

ChiBlocks chi2(const MatC& H) { return {0.5 * H, -0.5 * H.transpose()}; }

PairingData make_pairing(const LieAlgebraModel& m, std::optional<MatC> lower, const MatC& upper) {
  PairingData p;
  p.eta_lower = std::move(lower);
  p.eta_upper = upper;
  auto [phi, res] = cartan3(m, upper);
  p.phi = std::move(phi);
  p.phi_antisymmetry = res;
  p.chi = chi2(upper);
  return p;
}

PairingData trace_pairing(const LieAlgebraModel& m, double scale, std::vector<bool> mask) {
  const int d = m.d;
  if (mask.empty()) mask.assign(d, true);
  MatC lower = MatC::Zero(d, d);
  for (int j = 0; j < d; ++j)
    for (int k = 0; k < d; ++k)
      if (mask[j] && mask[k]) lower(j, k) = scale * trace<cd>(MatC(m.basis[j] * m.basis[k]));
  std::vector<int> idx;
  for (int j = 0; j < d; ++j)
    if (mask[j]) idx.push_back(j);
  const int r = static_cast<int>(idx.size());
  MatC block(r, r);
  for (int a = 0; a < r; ++a)
    for (int b = 0; b < r; ++b) block(a, b) = lower(idx[a], idx[b]);
  MatC upper = MatC::Zero(d, d);
  if (r > 0) {
    MatC bi = block.fullPivLu().inverse();
    for (int a = 0; a < r; ++a)
      for (int b = 0; b < r; ++b) upper(idx[a], idx[b]) = bi(a, b);
  }
  return make_pairing(m, lower, upper);
}

namespace {

// Coefficient arrays in (g1 + g2)^{(x)3}, index = copy * d + basis index.
struct Cube {
  int D;
  std::vector<cd> a;
  explicit Cube(int dd) : D(dd), a(static_cast<size_t>(dd) * dd * dd, cd(0)) {}
  cd& at(int i, int j, int k) { return a[(static_cast<size_t>(i) * D + j) * D + k]; }
  // Adds c * (x ^ y ^ z) with the unnormalized alternating sum over S_3.
  void add_wedge(cd c, int x, int y, int z) {
    at(x, y, z) += c;
    at(y, z, x) += c;
    at(z, x, y) += c;
    at(y, x, z) -= c;
    at(x, z, y) -= c;
    at(z, y, x) -= c;
  }
};

}  // namespace

double verify_chi_identity(const LieAlgebraModel& m, const PairingData& p) {
  const int d = m.d;
  const int D = 2 * d;
  Cube lhs(D), rhs(D);
  // 4[chi,chi] = eta^{jks}(e1_j ^ e2_k ^ e2_s + e2_j ^ e1_k ^ e1_s)
  for (int j = 0; j < d; ++j)
    for (int k = 0; k < d; ++k)
      for (int s = 0; s < d; ++s) {
        cd c = 0.25 * p.phi(j, k, s);
        if (c == cd(0)) continue;
        lhs.add_wedge(c, j, d + k, d + s);
        lhs.add_wedge(c, d + j, k, s);
      }
  // Delta(phi) - phi^1 - phi^2 with phi = (1/12) eta^{jks} e_j ^ e_k ^ e_s and
  // Delta(e) = e^1 + e^2.
  for (int j = 0; j < d; ++j)
    for (int k = 0; k < d; ++k)
      for (int s = 0; s < d; ++s) {
        cd c = p.phi(j, k, s) / 12.0;
        if (c == cd(0)) continue;
        for (int mask = 1; mask < 7; ++mask) {
          int a = (mask & 1) ? d + j : j;
          int b = (mask & 2) ? d + k : k;
          int e = (mask & 4) ? d + s : s;
          rhs.add_wedge(c, a, b, e);
        }
      }
  double worst = 0.0;
  for (size_t i = 0; i < lhs.a.size(); ++i) worst = std::max(worst, std::abs(lhs.a[i] - rhs.a[i]));
  return worst;
}

VecC random_algebra(const LieAlgebraModel& m, Rng& rng) { return rng.cnormal_vec(m.d); }

MatC retract(const LieAlgebraModel& m, const MatC& q) {
  if (m.sl_block <= 0) return q;
  const int b = m.sl_block;
  MatC r = q;
  cd det = q.topLeftCorner(b, b).determinant();
  cd root = std::pow(det, 1.0 / b);
  r.topLeftCorner(b, b) /= root;
  return r;
}

MatC random_group_element(const LieAlgebraModel& m, Rng& rng, double scale) {
  VecC x = random_algebra(m, rng) * scale;
  return retract(m, expm<cd>(m.element<cd>(x)));
}

double ad_invariance_residual(const LieAlgebraModel& m, const MatC& t, TensorIndex idx, int samples,
                              std::uint64_t seed) {
  Rng rng(seed);
  double worst = 0.0;
  for (int i = 0; i < samples; ++i) {
    MatC q = random_group_element(m, rng, 0.7);
    MatC a = m.Ad<cd>(q, inverse<cd>(q));
    MatC moved = idx == TensorIndex::Upper ? MatC(a * t * a.transpose()) : MatC(a.transpose() * t * a);
    worst = std::max(worst, (moved - t).cwiseAbs().maxCoeff());
  }
  return worst;
}

double psi_inverse_residual(const PairingData& p) {
  p.require_nondegenerate("psi_inverse_residual");
  const MatC& l = *p.eta_lower;
  return (p.eta_upper * l - MatC::Identity(l.rows(), l.cols())).cwiseAbs().maxCoeff();
}

IdealReport ideal_of_H(const LieAlgebraModel& m, const PairingData& p, double tol) {
  IdealReport rep;
  const MatC& H = p.eta_upper;
  Eigen::JacobiSVD<MatC> svd(H, Eigen::ComputeFullU);
  const auto& s = svd.singularValues();
  int r = 0;
  double top = s.size() ? s(0) : 0.0;
  for (int i = 0; i < s.size(); ++i)
    if (s(i) > tol * std::max(1.0, top)) ++r;
  rep.dim = r;
  rep.basis = svd.matrixU().leftCols(r);
  if (r == 0) {
    rep.restricted_form = MatC(0, 0);
    rep.projection_residual = H.cwiseAbs().maxCoeff();
    return rep;
  }
  MatC B = rep.basis;
  MatC K = B.adjoint() * H * B.conjugate();
  rep.projection_residual = (B * K * B.transpose() - H).cwiseAbs().maxCoeff();
  rep.restricted_form = K.inverse();
  Eigen::JacobiSVD<MatC> ks(rep.restricted_form);
  rep.certificate = ks.singularValues()(r - 1);
  (void)m;
  return rep;
}

}  // namespace qp
