#pragma once

#include <optional>
#include <vector>

#include "tqdeim/tensor.hpp"

namespace tqdeim {

// A = U * S * W^T with U (m,k,q), S (k,k,q) f-diagonal, W (l,k,q).
struct TSvdFactors {
    Tensor3 u;
    Tensor3 s;
    Tensor3 w;
    // Column j holds the singular values of Fourier slice j, nonincreasing.
    // Always min(m, l) rows, even for a truncated factorization.
    Eigen::MatrixXd fourier_singular_values;

    Index rank() const { return u.cols(); }
};

struct TQrFactors {
    Tensor3 q;
    Tensor3 r;
    // Column permutation for the pivoted variant: (A * P)(:, j, :) = A(:, pivots[j], :).
    std::optional<IndexSet> pivots;
};

// Column-pivoted Householder QR, A(:, permutation) = Q * R with Q thin.
template <typename Scalar>
struct PivotedQr {
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> q;
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> r;
    std::vector<Index> permutation;
};

// Pivot choice is the column with the largest remaining norm; columns whose
// norm is within 1e-14 (relative) of the maximum tie and the smallest index wins.
// With `steps` set, only that many elimination steps run and Q/R are left empty.
template <typename Scalar>
PivotedQr<Scalar> pivoted_qr(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& a,
                             std::optional<Index> steps = std::nullopt);

TSvdFactors t_svd(const Tensor3& a, std::optional<Index> rank = std::nullopt);

// t-spectral norm of S(n:, n:, :). Zero when n equals the retained rank.
double t_svd_tail_spectral(const TSvdFactors& factors, Index n);

// Tensor built from the first `n` terms of the factorization.
Tensor3 t_svd_reconstruct(const TSvdFactors& factors, std::optional<Index> n = std::nullopt);

TQrFactors t_qr(const Tensor3& a);

// Full pivoted t-QR: pivots come from the first Fourier slice, every other
// slice is factored with the same column permutation.
TQrFactors t_pqr(const Tensor3& a);

// Sampling rows for a basis U (N, n, M): first n pivots of the column-pivoted
// QR of the conjugate transpose of fft3(U)(:, :, fourier_slice). fourier_slice
// is 1-based.
IndexSet t_pqr_pivots(const Tensor3& u, Index fourier_slice = 1);

// Inverse computed slice by slice in the Fourier domain. Throws SingularError
// naming the 1-based slice; appends a warning for condition estimates > 1e12.
Tensor3 t_inverse(const Tensor3& a, std::vector<Warning>* warnings = nullptr);

} // namespace tqdeim
