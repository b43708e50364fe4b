// SPDX-License-Identifier: MIT
// Copyright (c) 2026 The qwl authors

#include "qwl/random.hpp"

#include <cmath>

namespace qwl {

CMatrix random_complex(Rng& rng, int rows, int cols) {
  CMatrix a(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) a(i, j) = rng.cnormal() / std::sqrt(2.0);
  return a;
}

CMatrix random_hermitian(Rng& rng, int d) { return hermitian_part(random_complex(rng, d, d)); }

CMatrix random_psd(Rng& rng, int d, int rank) {
  const CMatrix g = random_complex(rng, d, rank < 0 ? d : rank);
  return g * g.adjoint();
}

CMatrix random_unitary(Rng& rng, int d) {
  const CMatrix z = random_complex(rng, d, d);
  Eigen::HouseholderQR<CMatrix> qr(z);
  CMatrix q = qr.householderQ();
  const CMatrix r = qr.matrixQR();
  for (int k = 0; k < d; ++k) {
    const cplx rk = r(k, k);
    if (std::abs(rk) > 0) q.col(k) *= rk / std::abs(rk);
  }
  return q;
}

}  // namespace qwl
