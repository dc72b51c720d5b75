#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tqdeim/factor.hpp"
#include "tqdeim/tensor.hpp"

namespace tqdeim {

enum class Method { tqdeim, qdeim };

std::string to_string(Method method);
Method parse_method(const std::string& name);

struct Provenance {
    Dims train_dims{};
    std::uint64_t seed = 0;
};

struct FitOptions {
    // 1-based Fourier slice whose basis rows are pivoted. Only the t-Q-DEIM fit uses it.
    Index pivot_slice = 1;
    std::uint64_t seed = 0;
};

struct TQDeimModel {
    Tensor3 basis;  // U (N, n, M), t-orthogonal lateral slices
    IndexSet pivots;
    Tensor3 d;  // U * inverse(U(p, :, :))
    double amplification = 0.0;
    Index pivot_slice = 1;
    Provenance provenance;
    std::vector<Warning> warnings;

    Index rank() const { return basis.cols(); }
};

struct QDeimModel {
    Eigen::MatrixXd basis;  // (N, n), orthonormal columns
    IndexSet pivots;
    Eigen::MatrixXd d;  // U * inverse(U(p, :))
    double amplification = 0.0;
    Provenance provenance;
    std::vector<Warning> warnings;

    Index rank() const { return Index(basis.cols()); }
};

// Snapshot matrix for Q-DEIM: column j*q + k holds A(:, j, k).
Eigen::MatrixXd vectorize(const Tensor3& a);
Tensor3 devectorize(const Eigen::MatrixXd& m, Index cols, Index depth);

TQDeimModel fit_tqdeim(const Tensor3& train, Index n, const FitOptions& options = {});
// Reuses a precomputed t-SVD of the training tensor; n must not exceed its rank.
TQDeimModel fit_tqdeim(const TSvdFactors& factors, Index n, const FitOptions& options = {});

// sampled holds f(p, :, :) in pivot order, shape (n, l, M).
Tensor3 reconstruct_tqdeim(const TQDeimModel& model, const Tensor3& sampled);

// Left singular vectors of vectorize(train), all min(m, l*q) of them.
Eigen::MatrixXd qdeim_left_singular_vectors(const Tensor3& train);

QDeimModel fit_qdeim(const Tensor3& train, Index n, const FitOptions& options = {});
QDeimModel fit_qdeim(const Eigen::MatrixXd& left_singular_vectors, Index n,
                     const FitOptions& options = {});

Eigen::MatrixXd reconstruct_qdeim(const QDeimModel& model, const Eigen::MatrixXd& sampled);
// Tensor form: every frontal column of every lateral slice is reconstructed.
Tensor3 reconstruct_qdeim(const QDeimModel& model, const Tensor3& sampled);

// ||(P^T * U)^-1|| = max over Fourier slices k of 1 / sigma_min(U^(p, :, k)).
double amplification_factor(const TQDeimModel& model);
double amplification_factor(const QDeimModel& model);

// t-spectral norm of (I - U * U^T) * f.
double projection_error(const TQDeimModel& model, const Tensor3& f);
double projection_error(const QDeimModel& model, const Tensor3& f);

struct ErrorEstimate {
    double bound = 0.0;
    double true_error = 0.0;
    double proj_error = 0.0;
};

ErrorEstimate error_bound(const TQDeimModel& model, const Tensor3& f);
ErrorEstimate error_bound(const QDeimModel& model, const Tensor3& f);

// Dimension-only estimate M * sqrt(N - n + 1) * sqrt(4^n + 6n - 1) / 3 of the
// amplification factor. Returns +inf when the value overflows a double.
double apriori_estimate(Index N, Index n, Index M);
double log_apriori_estimate(Index N, Index n, Index M);

struct SampleError {
    Index index = 0;  // 1-based lateral slice
    double true_error = 0.0;
    double proj_error = 0.0;
    double bound = 0.0;
    double rel_frob_error = 0.0;
    double norm = 0.0;  // t-spectral norm of the sample itself

    double rel_error() const { return norm > 0.0 ? true_error / norm : 0.0; }
    // Error bound within the 1e-9 relative slack, measured against max(bound, norm).
    bool bound_holds() const;
};

struct ErrorReport {
    Method method = Method::tqdeim;
    Index rank = 0;
    double amplification = 0.0;
    std::vector<SampleError> samples;
    double eps_abs = 0.0;  // mean true error (t-spectral)
    double eps_rel = 0.0;  // mean true error relative to ||f||
    std::vector<Warning> warnings;
};

// One row per lateral slice of data.
ErrorReport evaluate(const TQDeimModel& model, const Tensor3& data);
ErrorReport evaluate(const QDeimModel& model, const Tensor3& data);

struct SweepRow {
    Method method = Method::tqdeim;
    Index n = 0;
    double eps_abs_train = 0.0;
    double eps_abs_test = 0.0;
    double eps_rel_train = 0.0;
    double eps_rel_test = 0.0;
    double proj_train = 0.0;  // mean projection error
    double proj_test = 0.0;
    double amplification = 0.0;
};

// Ranks are deduplicated and sorted; rows are grouped by method, then n.
std::vector<SweepRow> sensitivity_sweep(const Tensor3& train, const Tensor3& test,
                                        std::vector<Index> ranks,
                                        const std::vector<Method>& methods,
                                        const FitOptions& options = {});

// t-spectral norm of every lateral slice, from a single transform of a.
std::vector<double> lateral_spectral_norms(const Tensor3& a);

} // namespace tqdeim
