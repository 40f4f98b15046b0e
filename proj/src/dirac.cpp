#include "qpois/dirac.hpp"

#include <algorithm>

namespace qp {

namespace {

double max_abs(const MatC& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

MatC J(int N) {
  MatC j = MatC::Zero(2 * N, 2 * N);
  j.topRightCorner(N, N) = MatC::Identity(N, N);
  j.bottomLeftCorner(N, N) = MatC::Identity(N, N);
  return j;
}

int rank_of(const MatC& A, double tol) {
  if (A.size() == 0) return 0;
  Eigen::JacobiSVD<MatC> svd(A);
  const auto& s = svd.singularValues();
  int r = 0;
  for (int i = 0; i < s.size(); ++i)
    if (s(i) > tol * std::max(1.0, s(0))) ++r;
  return r;
}

MatC kernel_basis(const MatC& A, double tol) {
  if (A.cols() == 0) return MatC(0, 0);
  if (A.rows() == 0) return MatC::Identity(A.cols(), A.cols());
  Eigen::JacobiSVD<MatC> svd(A, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  int r = 0;
  for (int i = 0; i < s.size(); ++i)
    if (s(i) > tol * std::max(1.0, s(0))) ++r;
  return svd.matrixV().rightCols(A.cols() - r);
}

MatC block_diag(const std::vector<MatC>& blocks) {
  int n = 0;
  for (const auto& b : blocks) n += static_cast<int>(b.rows());
  MatC r = MatC::Zero(n, n);
  int o = 0;
  for (const auto& b : blocks) {
    r.block(o, o, b.rows(), b.cols()) = b;
    o += static_cast<int>(b.rows());
  }
  return r;
}

// Distance between column spans (both orthonormal): || (I - QQ^H) B ||.
double span_distance(const MatC& Q, const MatC& B) {
  if (B.cols() == 0) return 0.0;
  if (Q.cols() == 0) return max_abs(B);
  return max_abs(MatC(B - Q * (Q.adjoint() * B)));
}

}  // namespace

cd split_pairing(const VecC& a, const VecC& b) {
  const int N = static_cast<int>(a.size() / 2);
  return (a.tail(N).array() * b.head(N).array()).sum() + (b.tail(N).array() * a.head(N).array()).sum();
}

MatC split_gram(const MatC& A, const MatC& B) { return A.transpose() * J(static_cast<int>(A.rows() / 2)) * B; }

double LagrangianSubspace::isotropy() const { return max_abs(split_gram(basis, basis)); }

LagrangianSubspace span_of(const MatC& cols, int N, double tol) {
  LagrangianSubspace L;
  L.N = N;
  if (cols.cols() == 0) {
    L.basis = MatC(2 * N, 0);
    return L;
  }
  Eigen::JacobiSVD<MatC> svd(cols, Eigen::ComputeThinU);
  const auto& s = svd.singularValues();
  int r = 0;
  for (int i = 0; i < s.size(); ++i)
    if (s(i) > tol * std::max(1.0, s(0))) ++r;
  L.basis = svd.matrixU().leftCols(r);
  return L;
}

LagrangianSubspace tangent_summand(int N) {
  MatC b = MatC::Zero(2 * N, N);
  b.topRows(N) = MatC::Identity(N, N);
  return LagrangianSubspace{b, N};
}

LagrangianSubspace cotangent_summand(int N) {
  MatC b = MatC::Zero(2 * N, N);
  b.bottomRows(N) = MatC::Identity(N, N);
  return LagrangianSubspace{b, N};
}

LagrangianSubspace graph_of_form(const MatC& S) {
  const int N = static_cast<int>(S.rows());
  MatC b(2 * N, N);
  b << MatC::Identity(N, N), S.transpose();
  return span_of(b, N);
}

LagrangianSubspace graph_of_bivector(const MatC& P) {
  const int N = static_cast<int>(P.rows());
  MatC b(2 * N, N);
  b << P.transpose(), MatC::Identity(N, N);
  return span_of(b, N);
}

TargetPoint target_from_values(const LieAlgebraModel& m, const std::vector<MatC>& values) {
  TargetPoint t;
  t.d = m.d;
  for (const auto& v : values) {
    t.phi.push_back(v);
    t.ad.push_back(m.Ad<cd>(v, inverse<cd>(v)));
  }
  return t;
}

TargetPoint momentum_target(const Site& s, const std::vector<ActionComp>& acts, const PointC& p) {
  PointC pinv = inverses<cd>(p);
  std::vector<MatC> vals;
  for (const auto& a : acts) vals.push_back(word_eval<cd>(a.phi, p, pinv, s.n()));
  return target_from_values(*s.model, vals);
}

DiracFibers cartan_dirac_fibers(const PairingData& pd, const TargetPoint& t) {
  pd.require_nondegenerate("cartan_dirac_fibers");
  const MatC& eta = *pd.eta_lower;
  const int d = t.d, T = t.dim();
  DiracFibers f;
  f.E = MatC::Zero(2 * T, T);
  f.F = MatC::Zero(2 * T, T);
  MatC I = MatC::Identity(d, d);
  for (size_t c = 0; c < t.phi.size(); ++c) {
    const MatC& Ap = t.ad[c];
    MatC Am = Ap.inverse();
    const int o = static_cast<int>(c) * d;
    f.E.block(o, o, d, d) = I - Am;
    f.E.block(T + o, o, d, d) = 0.5 * (I + Ap.transpose()) * eta;
    f.F.block(o, o, d, d) = I + Am;
    f.F.block(T + o, o, d, d) = 0.5 * (I - Ap.transpose()) * eta;
  }
  return f;
}

Projections projections_pq(const PairingData& pd, const TargetPoint& t) {
  pd.require_nondegenerate("projections_pq");
  const MatC& eta = *pd.eta_lower;
  const MatC H = eta.inverse();
  const int d = t.d;
  MatC I = MatC::Identity(d, d);
  std::vector<MatC> p11, p12, p21, p22, q11, q12, q21, q22;
  for (size_t c = 0; c < t.phi.size(); ++c) {
    const MatC& Ap = t.ad[c];
    MatC Am = Ap.inverse();
    p11.push_back(0.25 * (I - Am) * (I - Ap));
    p12.push_back(0.5 * (I - Am) * (I + Ap) * H);
    p21.push_back(0.125 * eta * (I + Am) * (I - Ap));
    p22.push_back(0.25 * (I + Ap.transpose()) * (I + Am.transpose()));
    q11.push_back(0.25 * (I + Am) * (I + Ap));
    q12.push_back(0.5 * (I + Am) * (I - Ap) * H);
    q21.push_back(0.125 * eta * (I - Am) * (I + Ap));
    q22.push_back(0.25 * (I - Ap.transpose()) * (I - Am.transpose()));
  }
  const int T = t.dim();
  Projections r;
  r.p = MatC(2 * T, 2 * T);
  r.q = MatC(2 * T, 2 * T);
  r.p << block_diag(p11), block_diag(p12), block_diag(p21), block_diag(p22);
  r.q << block_diag(q11), block_diag(q12), block_diag(q21), block_diag(q22);
  return r;
}

ProjectionReport projection_report(const PairingData& pd, const TargetPoint& t) {
  DiracFibers f = cartan_dirac_fibers(pd, t);
  Projections pq = projections_pq(pd, t);
  const int T = t.dim();
  MatC I = MatC::Identity(2 * T, 2 * T);
  ProjectionReport r;
  r.p_idempotent = max_abs(MatC(pq.p * pq.p - pq.p));
  r.q_idempotent = max_abs(MatC(pq.q * pq.q - pq.q));
  r.sum_identity = max_abs(MatC(pq.p + pq.q - I));
  r.pq_zero = max_abs(MatC(pq.p * pq.q));
  LagrangianSubspace E = span_of(f.E, T), F = span_of(f.F, T);
  r.image_p = std::max(span_distance(E.basis, pq.p), span_distance(E.basis, MatC(pq.p * f.E - f.E)));
  r.image_q = std::max(span_distance(F.basis, pq.q), span_distance(F.basis, MatC(pq.q * f.F - f.F)));
  r.orthogonality = max_abs(split_gram(f.E, f.F));
  r.lagrangian = std::max(max_abs(split_gram(f.E, f.E)), max_abs(split_gram(f.F, f.F)));
  if (E.basis.cols() != T || F.basis.cols() != T) r.lagrangian = std::max(r.lagrangian, 1.0);
  return r;
}

MorphismData morphism_at(const QHStructure& s, const PointC& p) {
  Frame f = make_frame(s.site, p);
  MorphismData md;
  md.N = f.N;
  md.S = form_frame(s, p, f);
  md.dPhi = momentum_differential(s.site, s.actions, p, f);
  md.T = static_cast<int>(md.dPhi.rows());
  return md;
}

LagrangianSubspace transport_image(const LagrangianSubspace& E, const MorphismData& md, TransportDirection dir,
                                   double tol) {
  const int N = md.N, T = md.T;
  const int k = static_cast<int>(E.basis.cols());
  if (dir == TransportDirection::Forward) {
    MatC Et = E.basis.topRows(N), Eb = E.basis.bottomRows(N);
    // unknowns (v, a, c): v = Et c, dPhi^T a - S^T v = Eb c
    MatC A = MatC::Zero(2 * N, N + T + k);
    A.block(0, 0, N, N) = MatC::Identity(N, N);
    A.block(0, N + T, N, k) = -Et;
    A.block(N, 0, N, N) = -md.S.transpose();
    A.block(N, N, N, T) = md.dPhi.transpose();
    A.block(N, N + T, N, k) = -Eb;
    MatC K = kernel_basis(A, tol);
    MatC img(2 * T, K.cols());
    for (int i = 0; i < K.cols(); ++i) {
      VecC z = K.col(i);
      img.col(i) << md.dPhi * z.head(N), z.segment(N, T);
    }
    return span_of(img, T, tol);
  }
  MatC Et = E.basis.topRows(T), Eb = E.basis.bottomRows(T);
  MatC A(T, N + k);
  A << md.dPhi, -Et;
  MatC K = kernel_basis(A, tol);
  MatC img(2 * N, K.cols());
  for (int i = 0; i < K.cols(); ++i) {
    VecC v = K.col(i).head(N), c = K.col(i).tail(k);
    img.col(i) << v, md.dPhi.transpose() * (Eb * c) - md.S.transpose() * v;
  }
  return span_of(img, N, tol);
}

StrongnessReport strongness_check(const MorphismData& md, const LagrangianSubspace& E, double tol) {
  const int N = md.N;
  MatC K = kernel_basis(md.dPhi, tol);
  if (md.T == 0) K = MatC::Identity(N, N);
  MatC ker(2 * N, K.cols());
  ker << K, -md.S.transpose() * K;
  LagrangianSubspace Q = span_of(ker, N, tol);
  StrongnessReport r;
  const int a = static_cast<int>(Q.basis.cols()), b = static_cast<int>(E.basis.cols());
  MatC both(2 * N, a + b);
  both << Q.basis, E.basis;
  r.intersection_dim = a + b - rank_of(both, tol);
  if (a == 0 || b == 0) {
    r.margin = 1.0;
  } else {
    Eigen::JacobiSVD<MatC> svd(MatC(Q.basis.adjoint() * E.basis));
    double smax = std::min(1.0, svd.singularValues()(0));
    r.margin = std::sqrt(std::max(0.0, 1.0 - smax * smax));
  }
  r.strong = r.intersection_dim == 0;
  return r;
}

EquivalenceReport dirac_equivalence(const PairingData& pd, const MorphismData& md, const TargetPoint& t,
                                    double tol) {
  pd.require_nondegenerate("dirac_equivalence");
  const int N = md.N;
  EquivalenceReport r;
  r.momentum = true;
  MatC st(N + md.T, N);
  st << md.S.transpose(), md.dPhi;
  r.a = rank_of(st, tol) == N;
  r.b = strongness_check(md, tangent_summand(N), tol).strong;
  DiracFibers f = cartan_dirac_fibers(pd, t);
  LagrangianSubspace Ft = span_of(f.F, t.dim(), tol);
  LagrangianSubspace Fs = transport_image(Ft, md, TransportDirection::Backward, tol);
  MatC c(2 * N, Fs.basis.cols() + N);
  c << Fs.basis, tangent_summand(N).basis;
  r.c = rank_of(c, tol) == 2 * N;
  MorphismData bare = md;
  bare.S = MatC::Zero(N, N);
  LagrangianSubspace F0 = transport_image(Ft, bare, TransportDirection::Backward, tol);
  LagrangianSubspace G = graph_of_form(md.S);
  MatC dd(2 * N, F0.basis.cols() + G.basis.cols());
  dd << F0.basis, G.basis;
  r.d = rank_of(dd, tol) == 2 * N;
  return r;
}

EquivalenceReport dirac_equivalence(const QHStructure& s, const PointC& p, double momentum_tol, double tol) {
  MorphismData md = morphism_at(s, p);
  TargetPoint t = momentum_target(s.site, s.actions, p);
  EquivalenceReport r = dirac_equivalence(*s.pairing, md, t, tol);
  r.momentum = momentum_residual(s, p) <= momentum_tol;
  r.a = r.a && r.momentum;
  r.b = r.b && r.momentum;
  return r;
}

TechChain tech_chain(const QHStructure& s, const PointC& p, double tol) {
  s.pairing->require_nondegenerate("tech_chain");
  Frame f = make_frame(s.site, p);
  TargetPoint t = momentum_target(s.site, s.actions, p);
  MatC S = form_frame(s, p, f);
  MatC D = momentum_differential(s.site, s.actions, p, f);
  MatC F = fund_frame(s.site, s.actions, p, f);
  std::vector<MatC> minus, plus;
  for (const auto& a : t.ad) {
    MatC I = MatC::Identity(t.d, t.d);
    minus.push_back(I + a.inverse());
    plus.push_back(I + a);
  }
  TechChain r;
  MatC Ka = kernel_basis(block_diag(minus), tol);
  r.ker_ad = static_cast<int>(Ka.cols());
  MatC fk = F * Ka;
  r.fund_rank = rank_of(fk, tol);
  r.fund_in_kernel = fk.cols() ? max_abs(MatC(S.transpose() * fk)) : 0.0;
  MatC Ks = kernel_basis(S.transpose(), tol);
  r.ker_sigma = static_cast<int>(Ks.cols());
  MatC dk = D * Ks;
  r.dphi_rank = rank_of(dk, tol);
  MatC Kt = kernel_basis(block_diag(plus), tol);
  r.ker_target = static_cast<int>(Kt.cols());
  r.dphi_in_target = dk.cols() ? max_abs(MatC(block_diag(plus) * dk)) : 0.0;
  return r;
}

}  // namespace qp
