#pragma once

#include <algorithm>
#include <cmath>

#include "qpois/scalar.hpp"

namespace qp {

// Degree-13 Padé approximant with scaling and squaring (Higham 2005).
// The scaling exponent depends on leaf values only, so derivative parts are
// propagated through the same rational function.
template <class T>
Mat<T> expm(const Mat<T>& a) {
  static constexpr double b[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                                 1187353796428800.0,  129060195264000.0,   10559470521600.0,
                                 670442572800.0,      33522128640.0,       1323241920.0,
                                 40840800.0,          960960.0,            16380.0,
                                 182.0,               1.0};
  const Eigen::Index n = a.rows();
  double norm1 = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    double col = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) col += magnitude(a(i, j));
    norm1 = std::max(norm1, col);
  }
  int s = 0;
  if (norm1 > 5.371920351148152) s = static_cast<int>(std::ceil(std::log2(norm1 / 5.371920351148152)));
  Mat<T> x = a;
  if (s > 0) x *= T(std::ldexp(1.0, -s));

  const Mat<T> id = Mat<T>::Identity(n, n);
  const Mat<T> x2 = x * x;
  const Mat<T> x4 = x2 * x2;
  const Mat<T> x6 = x4 * x2;
  Mat<T> u1 = x6 * (T(b[13]) * x6 + T(b[11]) * x4 + T(b[9]) * x2) + T(b[7]) * x6 + T(b[5]) * x4 +
              T(b[3]) * x2 + T(b[1]) * id;
  Mat<T> u = x * u1;
  Mat<T> v = x6 * (T(b[12]) * x6 + T(b[10]) * x4 + T(b[8]) * x2) + T(b[6]) * x6 + T(b[4]) * x4 +
             T(b[2]) * x2 + T(b[0]) * id;
  Mat<T> r = inverse<T>(v - u) * (v + u);
  for (int i = 0; i < s; ++i) r = r * r;
  return r;
}

}  // namespace qp
