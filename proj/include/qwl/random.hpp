// SPDX-License-Identifier: MIT
// Copyright (c) 2026 The qwl authors

#pragma once

#include <cstdint>
#include <random>

#include "qwl/numerics.hpp"

namespace qwl {

/// Seeded generator; every randomized routine takes one explicitly.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform(double lo = 0.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }
  cplx cnormal() { return {normal(), normal()}; }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

CMatrix random_complex(Rng& rng, int rows, int cols);
CMatrix random_hermitian(Rng& rng, int d);
CMatrix random_psd(Rng& rng, int d, int rank = -1);
/// Haar-distributed unitary.
CMatrix random_unitary(Rng& rng, int d);

}  // namespace qwl
