#pragma once

#include <gtest/gtest.h>

#include <memory>

#include "qpois/expm.hpp"
#include "qpois/quasi.hpp"
#include "qpois/random.hpp"

namespace qpt {

using namespace qp;

inline std::shared_ptr<const LieAlgebraModel> model(LieAlgebraModel m) {
  return std::make_shared<const LieAlgebraModel>(std::move(m));
}
inline PairingPtr pairing(PairingData p) { return std::make_shared<const PairingData>(std::move(p)); }

inline std::shared_ptr<const LieAlgebraModel> sl2() {
  static auto m = model(make_sl(2));
  return m;
}
inline PairingPtr sl2_trace() {
  static auto p = pairing(trace_pairing(*sl2(), 1.0));
  return p;
}

inline Site full_site(std::shared_ptr<const LieAlgebraModel> m, int k) {
  Site s;
  s.model = std::move(m);
  const char* names[] = {"x", "y", "z", "w", "u", "v"};
  for (int a = 0; a < k; ++a) s.factors.push_back(Factor{FactorKind::Full, MatC(), names[a]});
  return s;
}

inline Site class_site(std::shared_ptr<const LieAlgebraModel> m, const MatC& rep) {
  Site s;
  s.model = std::move(m);
  s.factors.push_back(Factor{FactorKind::Class, rep, "z"});
  return s;
}

inline MatC diag2(double a, double b) {
  MatC m = MatC::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

inline double maxabs(const MatC& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

// Entry and trace functions that are not conjugation invariant.
inline ScalarField test_function(const Site& s, Rng& rng) {
  const int k = s.arity(), n = s.n();
  auto pick = [&](int hi) { return std::min(hi - 1, static_cast<int>(rng.uniform() * hi)); };
  ScalarField f = ScalarField::entry(Word::letter(pick(k)), pick(n), pick(n)).scaled(rng.cnormal());
  Word w;
  for (int i = 0; i < 2; ++i) w.letters.push_back({pick(k), rng.uniform() < 0.5 ? 1 : -1});
  return f + ScalarField::entry(w, pick(n), pick(n)).scaled(rng.cnormal());
}

template <class F>
double max_over_points(const Site& s, int count, std::uint64_t seed, F fn) {
  double w = 0.0;
  for (int i = 0; i < count; ++i) w = std::max(w, fn(random_point(s, split_seed(seed, i)), i));
  return w;
}

}  // namespace qpt
