#pragma once

#include <cstdint>
#include <random>

#include "qpois/scalar.hpp"

namespace qp {

// splitmix64 step; used to derive independent per-task seeds from one master seed.
inline std::uint64_t split_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ull * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double normal() { return dist_(eng_); }
  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(eng_); }
  // Standard complex normal: independent real and imaginary parts of variance 1/2.
  cd cnormal() {
    double re = normal(), im = normal();
    return {re * M_SQRT1_2, im * M_SQRT1_2};
  }
  VecC cnormal_vec(Eigen::Index n) {
    VecC v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = cnormal();
    return v;
  }
  std::mt19937_64& engine() { return eng_; }

 private:
  std::mt19937_64 eng_;
  std::normal_distribution<double> dist_{0.0, 1.0};
};

}  // namespace qp
