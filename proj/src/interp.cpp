#include "tqdeim/interp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "detail.hpp"
#include "tqdeim/parallel.hpp"

namespace tqdeim {

namespace {

void check_rank(Index n, Index limit, const char* what) {
    if (n < 1 || n > limit) {
        throw NumericalError(std::string(what) + ": rank " + std::to_string(n) + " outside [1, " +
                             std::to_string(limit) + "]");
    }
}

double smallest_singular_value(const Eigen::MatrixXcd& m) {
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(m);
    return svd.singularValues()(svd.singularValues().size() - 1);
}

double inverse_norm(double sigma_min) {
    return sigma_min > 0.0 ? 1.0 / sigma_min : std::numeric_limits<double>::infinity();
}

std::vector<double> lateral_frobenius_norms(const Tensor3& a) {
    std::vector<double> out(a.cols(), 0.0);
    for (Index k = 0; k < a.depth(); ++k) {
        const auto slice = a.slice(k);
        for (Index j = 0; j < a.cols(); ++j) out[j] += slice.col(Eigen::Index(j)).squaredNorm();
    }
    for (double& v : out) v = std::sqrt(v);
    return out;
}

ErrorReport assemble_report(Method method, Index rank, double amplification,
                            const Tensor3& data, const Tensor3& approx, const Tensor3& residual,
                            const std::vector<Warning>& warnings) {
    const Tensor3 error = data - approx;
    const auto true_errors = lateral_spectral_norms(error);
    const auto proj_errors = lateral_spectral_norms(residual);
    const auto norms = lateral_spectral_norms(data);
    const auto err_frob = lateral_frobenius_norms(error);
    const auto data_frob = lateral_frobenius_norms(data);

    ErrorReport report;
    report.method = method;
    report.rank = rank;
    report.amplification = amplification;
    report.warnings = warnings;
    for (Index j = 0; j < data.cols(); ++j) {
        SampleError s;
        s.index = j + 1;
        s.true_error = true_errors[j];
        s.proj_error = proj_errors[j];
        s.bound = amplification * proj_errors[j];
        s.rel_frob_error = data_frob[j] > 0.0 ? err_frob[j] / data_frob[j] : 0.0;
        s.norm = norms[j];
        report.eps_abs += s.true_error;
        report.eps_rel += s.rel_error();
        report.samples.push_back(s);
    }
    if (!report.samples.empty()) {
        report.eps_abs /= double(report.samples.size());
        report.eps_rel /= double(report.samples.size());
    }
    return report;
}

double mean(const std::vector<SampleError>& samples, double SampleError::*field) {
    double sum = 0.0;
    for (const auto& s : samples) sum += s.*field;
    return samples.empty() ? 0.0 : sum / double(samples.size());
}

} // namespace

std::string to_string(Method method) { return method == Method::tqdeim ? "tqdeim" : "qdeim"; }

Method parse_method(const std::string& name) {
    if (name == "tqdeim") return Method::tqdeim;
    if (name == "qdeim") return Method::qdeim;
    throw ConfigError("unknown method '" + name + "' (expected tqdeim or qdeim)");
}

Eigen::MatrixXd vectorize(const Tensor3& a) {
    const Index q = a.depth();
    Eigen::MatrixXd out(Eigen::Index(a.rows()), Eigen::Index(a.cols() * q));
    for (Index k = 0; k < q; ++k) {
        const auto slice = a.slice(k);
        for (Index j = 0; j < a.cols(); ++j) out.col(Eigen::Index(j * q + k)) = slice.col(Eigen::Index(j));
    }
    return out;
}

Tensor3 devectorize(const Eigen::MatrixXd& m, Index cols, Index depth) {
    if (Index(m.cols()) != cols * depth) {
        throw DimensionError("devectorize: column count must equal cols * depth");
    }
    Tensor3 out(Index(m.rows()), cols, depth);
    for (Index k = 0; k < depth; ++k) {
        auto slice = out.slice(k);
        for (Index j = 0; j < cols; ++j) slice.col(Eigen::Index(j)) = m.col(Eigen::Index(j * depth + k));
    }
    return out;
}

TQDeimModel fit_tqdeim(const TSvdFactors& factors, Index n, const FitOptions& options) {
    check_rank(n, factors.rank(), "fit_tqdeim");
    TQDeimModel model;
    model.basis = lateral_slices(factors.u, 0, n);
    model.pivots = t_pqr_pivots(model.basis, options.pivot_slice);
    model.pivot_slice = options.pivot_slice;
    const Tensor3 inverse = t_inverse(sample_rows(model.basis, model.pivots), &model.warnings);
    model.d = t_product(model.basis, inverse);
    if (!all_finite(model.d)) throw NumericalError("fit_tqdeim: interpolation tensor is not finite");
    model.amplification = amplification_factor(model);
    model.provenance.train_dims = Dims{factors.u.rows(), factors.w.rows(), factors.u.depth()};
    model.provenance.seed = options.seed;
    return model;
}

TQDeimModel fit_tqdeim(const Tensor3& train, Index n, const FitOptions& options) {
    check_rank(n, std::min(train.rows(), train.cols()), "fit_tqdeim");
    return fit_tqdeim(t_svd(train, n), n, options);
}

Tensor3 reconstruct_tqdeim(const TQDeimModel& model, const Tensor3& sampled) {
    if (sampled.rows() != model.rank() || sampled.depth() != model.d.depth()) {
        throw DimensionError("reconstruct_tqdeim: expected sampled rows of shape (" +
                             std::to_string(model.rank()) + ", l, " +
                             std::to_string(model.d.depth()) + ")");
    }
    return t_product(model.d, sampled);
}

Eigen::MatrixXd qdeim_left_singular_vectors(const Tensor3& train) {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(vectorize(train), Eigen::ComputeThinU);
    return svd.matrixU();
}

QDeimModel fit_qdeim(const Eigen::MatrixXd& left_singular_vectors, Index n,
                     const FitOptions& options) {
    check_rank(n, Index(left_singular_vectors.cols()), "fit_qdeim");
    QDeimModel model;
    model.basis = left_singular_vectors.leftCols(Eigen::Index(n));
    auto perm = pivoted_qr<double>(model.basis.transpose(), n).permutation;
    perm.resize(n);
    model.pivots = IndexSet(std::move(perm));

    Eigen::MatrixXd sampled(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (Index i = 0; i < n; ++i) sampled.row(Eigen::Index(i)) = model.basis.row(Eigen::Index(model.pivots[i]));
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(sampled);
    const double rcond = lu.rcond();
    if (!(rcond > 0.0)) throw SingularError("fit_qdeim: sampled basis is singular", 1);
    if (1.0 / rcond > 1e12) {
        model.warnings.push_back({"ill_conditioned", "sampled basis condition estimate " +
                                                         std::to_string(1.0 / rcond)});
    }
    model.d = model.basis * lu.inverse();
    model.amplification = amplification_factor(model);
    model.provenance.seed = options.seed;
    return model;
}

QDeimModel fit_qdeim(const Tensor3& train, Index n, const FitOptions& options) {
    check_rank(n, std::min(train.rows(), train.cols() * train.depth()), "fit_qdeim");
    QDeimModel model = fit_qdeim(qdeim_left_singular_vectors(train), n, options);
    model.provenance.train_dims = train.dims();
    return model;
}

Eigen::MatrixXd reconstruct_qdeim(const QDeimModel& model, const Eigen::MatrixXd& sampled) {
    if (Index(sampled.rows()) != model.rank()) {
        throw DimensionError("reconstruct_qdeim: expected " + std::to_string(model.rank()) +
                             " sampled rows");
    }
    return model.d * sampled;
}

Tensor3 reconstruct_qdeim(const QDeimModel& model, const Tensor3& sampled) {
    return devectorize(reconstruct_qdeim(model, vectorize(sampled)), sampled.cols(),
                       sampled.depth());
}

double amplification_factor(const TQDeimModel& model) {
    const FourierTensor3 sampled = fft3(sample_rows(model.basis, model.pivots));
    const Index slices = detail::independent_slices(sampled.depth(), true);
    std::vector<double> factors(slices);
    parallel_for(slices, [&](Index k) {
        factors[k] = inverse_norm(smallest_singular_value(sampled.slice(k)));
    });
    return *std::max_element(factors.begin(), factors.end());
}

double amplification_factor(const QDeimModel& model) {
    Eigen::MatrixXcd sampled(Eigen::Index(model.rank()), model.basis.cols());
    for (Index i = 0; i < model.rank(); ++i) {
        sampled.row(Eigen::Index(i)) = model.basis.row(Eigen::Index(model.pivots[i])).cast<Complex>();
    }
    return inverse_norm(smallest_singular_value(sampled));
}

double projection_error(const TQDeimModel& model, const Tensor3& f) {
    if (f.rows() != model.basis.rows() || f.depth() != model.basis.depth()) {
        throw DimensionError("projection_error: function shape does not match the basis");
    }
    const Tensor3 coeffs = t_product(t_transpose(model.basis), f);
    return t_spectral_norm(f - t_product(model.basis, coeffs));
}

double projection_error(const QDeimModel& model, const Tensor3& f) {
    if (f.rows() != Index(model.basis.rows())) {
        throw DimensionError("projection_error: function shape does not match the basis");
    }
    const Eigen::MatrixXd x = vectorize(f);
    const Eigen::MatrixXd r = x - model.basis * (model.basis.transpose() * x);
    return t_spectral_norm(devectorize(r, f.cols(), f.depth()));
}

ErrorEstimate error_bound(const TQDeimModel& model, const Tensor3& f) {
    ErrorEstimate e;
    e.proj_error = projection_error(model, f);
    e.true_error = t_spectral_norm(f - reconstruct_tqdeim(model, sample_rows(f, model.pivots)));
    e.bound = model.amplification * e.proj_error;
    return e;
}

ErrorEstimate error_bound(const QDeimModel& model, const Tensor3& f) {
    ErrorEstimate e;
    e.proj_error = projection_error(model, f);
    e.true_error = t_spectral_norm(f - reconstruct_qdeim(model, sample_rows(f, model.pivots)));
    e.bound = model.amplification * e.proj_error;
    return e;
}

double log_apriori_estimate(Index N, Index n, Index M) {
    if (n < 1 || n > N || M < 1) throw NumericalError("apriori_estimate: requires 1 <= n <= N, M >= 1");
    const double dn = double(n);
    // log(4^n + 6n - 1) = n log 4 + log1p((6n - 1) / 4^n)
    const double log_growth = dn * std::log(4.0) + std::log1p((6.0 * dn - 1.0) * std::exp(-dn * std::log(4.0)));
    return std::log(double(M)) + 0.5 * std::log(double(N - n + 1)) + 0.5 * log_growth - std::log(3.0);
}

double apriori_estimate(Index N, Index n, Index M) {
    if (n < 1 || n > N || M < 1) throw NumericalError("apriori_estimate: requires 1 <= n <= N, M >= 1");
    if (n > 500) return std::exp(log_apriori_estimate(N, n, M));
    const double dn = double(n);
    return double(M) * std::sqrt(double(N - n + 1)) * std::sqrt(std::pow(4.0, dn) + 6.0 * dn - 1.0) / 3.0;
}

bool SampleError::bound_holds() const {
    return bound >= true_error - 1e-9 * std::max(bound, norm);
}

std::vector<double> lateral_spectral_norms(const Tensor3& a) {
    const FourierTensor3 ahat = fft3(a);
    const Index slices = detail::independent_slices(a.depth(), true);
    std::vector<double> out(a.cols(), 0.0);
    for (Index k = 0; k < slices; ++k) {
        const auto slice = ahat.slice(k);
        for (Index j = 0; j < a.cols(); ++j) {
            out[j] = std::max(out[j], slice.col(Eigen::Index(j)).norm());
        }
    }
    return out;
}

ErrorReport evaluate(const TQDeimModel& model, const Tensor3& data) {
    if (data.rows() != model.basis.rows() || data.depth() != model.basis.depth()) {
        throw DimensionError("evaluate: data shape does not match the model");
    }
    const Tensor3 approx = reconstruct_tqdeim(model, sample_rows(data, model.pivots));
    const Tensor3 projected = t_product(model.basis, t_product(t_transpose(model.basis), data));
    return assemble_report(Method::tqdeim, model.rank(), model.amplification, data, approx,
                           data - projected, model.warnings);
}

ErrorReport evaluate(const QDeimModel& model, const Tensor3& data) {
    if (data.rows() != Index(model.basis.rows())) {
        throw DimensionError("evaluate: data shape does not match the model");
    }
    const Tensor3 approx = reconstruct_qdeim(model, sample_rows(data, model.pivots));
    const Eigen::MatrixXd x = vectorize(data);
    const Eigen::MatrixXd projected = model.basis * (model.basis.transpose() * x);
    return assemble_report(Method::qdeim, model.rank(), model.amplification, data, approx,
                           devectorize(x - projected, data.cols(), data.depth()),
                           model.warnings);
}

std::vector<SweepRow> sensitivity_sweep(const Tensor3& train, const Tensor3& test,
                                        std::vector<Index> ranks,
                                        const std::vector<Method>& methods,
                                        const FitOptions& options) {
    if (ranks.empty()) throw ConfigError("sensitivity_sweep: empty rank list");
    std::sort(ranks.begin(), ranks.end());
    ranks.erase(std::unique(ranks.begin(), ranks.end()), ranks.end());

    std::vector<SweepRow> rows;
    auto add_row = [&](Method method, Index n, const ErrorReport& tr, const ErrorReport& te) {
        SweepRow row;
        row.method = method;
        row.n = n;
        row.eps_abs_train = tr.eps_abs;
        row.eps_abs_test = te.eps_abs;
        row.eps_rel_train = tr.eps_rel;
        row.eps_rel_test = te.eps_rel;
        row.proj_train = mean(tr.samples, &SampleError::proj_error);
        row.proj_test = mean(te.samples, &SampleError::proj_error);
        row.amplification = tr.amplification;
        rows.push_back(row);
    };

    for (Method method : methods) {
        if (method == Method::tqdeim) {
            check_rank(ranks.back(), std::min(train.rows(), train.cols()), "sensitivity_sweep");
            const TSvdFactors factors = t_svd(train);
            for (Index n : ranks) {
                const auto model = fit_tqdeim(factors, n, options);
                add_row(method, n, evaluate(model, train), evaluate(model, test));
            }
        } else {
            check_rank(ranks.back(), std::min(train.rows(), train.cols() * train.depth()),
                       "sensitivity_sweep");
            const Eigen::MatrixXd left = qdeim_left_singular_vectors(train);
            for (Index n : ranks) {
                const auto model = fit_qdeim(left, n, options);
                add_row(method, n, evaluate(model, train), evaluate(model, test));
            }
        }
    }
    return rows;
}

} // namespace tqdeim
