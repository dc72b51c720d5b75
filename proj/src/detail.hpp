#pragma once

#include "tqdeim/tensor.hpp"

namespace tqdeim::detail {

// Number of leading Fourier slices that carry independent data.
inline Index independent_slices(Index depth, bool conjugate_symmetric) {
    return conjugate_symmetric ? depth / 2 + 1 : depth;
}

// Slice k is its own conjugate mirror (DC and, for even depth, Nyquist).
inline bool self_conjugate(Index depth, Index k) { return k == 0 || 2 * k == depth; }

// Fills slices q/2+1 .. q-1 with conjugates of their mirrors 1 .. (q-1)/2.
void fill_conjugate_mirror(FourierTensor3& t);

// Largest singular value of a complex matrix.
double spectral_norm(const Eigen::Ref<const Eigen::MatrixXcd>& m);
double spectral_norm(const Eigen::Ref<const Eigen::MatrixXd>& m);

} // namespace tqdeim::detail
