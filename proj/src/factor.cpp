#include "tqdeim/factor.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "detail.hpp"
#include "tqdeim/parallel.hpp"

namespace tqdeim {

namespace {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
Scalar unit_phase(const Scalar& x) {
    const double mag = std::abs(x);
    if (mag == 0.0) return Scalar(1);
    return x / mag;
}

// Makes the largest-magnitude entry of every left singular vector real positive.
template <typename Scalar>
void fix_phase(Matrix<Scalar>& u, Matrix<Scalar>& v) {
    for (Eigen::Index c = 0; c < u.cols(); ++c) {
        Eigen::Index arg = 0;
        double best = -1.0;
        for (Eigen::Index i = 0; i < u.rows(); ++i) {
            const double mag = std::abs(u(i, c));
            if (mag > best) {
                best = mag;
                arg = i;
            }
        }
        const Scalar phase = unit_phase(u(arg, c));
        if constexpr (std::is_same_v<Scalar, double>) {
            u.col(c) *= phase;
            v.col(c) *= phase;
        } else {
            u.col(c) *= std::conj(phase);
            v.col(c) *= std::conj(phase);
        }
    }
}

template <typename Scalar>
struct SliceSvd {
    Matrix<Scalar> u;
    Eigen::VectorXd sigma;
    Matrix<Scalar> v;
};

template <typename Scalar>
SliceSvd<Scalar> slice_svd(const Matrix<Scalar>& a) {
    const Eigen::Index m = a.rows(), l = a.cols();
    SliceSvd<Scalar> out;
    if (m == l) {
        Eigen::BDCSVD<Matrix<Scalar>> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
        out = {svd.matrixU(), svd.singularValues(), svd.matrixV()};
    } else {
        // Snapshot slices are tall (or wide): reduce to the small triangular
        // factor first, A = Q R, and take the SVD of R only.
        const bool tall = m > l;
        const Matrix<Scalar> b = tall ? Matrix<Scalar>(a) : Matrix<Scalar>(a.adjoint());
        const Eigen::Index r = b.cols();
        Eigen::HouseholderQR<Matrix<Scalar>> qr(b);
        const Matrix<Scalar> upper = qr.matrixQR().topRows(r).template triangularView<Eigen::Upper>();
        Eigen::BDCSVD<Matrix<Scalar>> svd(upper, Eigen::ComputeFullU | Eigen::ComputeFullV);
        Matrix<Scalar> left = Matrix<Scalar>::Zero(b.rows(), r);
        left.topRows(r) = svd.matrixU();
        left.applyOnTheLeft(qr.householderQ());
        if (tall) {
            out = {std::move(left), svd.singularValues(), svd.matrixV()};
        } else {
            out = {svd.matrixV(), svd.singularValues(), std::move(left)};
        }
    }
    fix_phase(out.u, out.v);
    return out;
}

template <typename Scalar>
std::pair<Matrix<Scalar>, Matrix<Scalar>> thin_qr(const Matrix<Scalar>& a) {
    const Eigen::Index r = std::min(a.rows(), a.cols());
    Eigen::HouseholderQR<Matrix<Scalar>> qr(a);
    Matrix<Scalar> q = qr.householderQ() * Matrix<Scalar>::Identity(a.rows(), r);
    Matrix<Scalar> upper = qr.matrixQR().topRows(r).template triangularView<Eigen::Upper>();
    return {std::move(q), std::move(upper)};
}

// Applies a column permutation: out(:, j) = a(:, perm[j]).
template <typename Derived>
auto permute_columns(const Eigen::MatrixBase<Derived>& a, const std::vector<Index>& perm) {
    Matrix<typename Derived::Scalar> out(a.rows(), a.cols());
    for (Index j = 0; j < perm.size(); ++j) out.col(Eigen::Index(j)) = a.col(Eigen::Index(perm[j]));
    return out;
}

// Single DFT coefficient along the third dimension: sum_k a_k exp(-2 pi i s k / q).
MatrixXcd dft_slice(const Tensor3& a, Index s) {
    const Index q = a.depth();
    MatrixXcd out = MatrixXcd::Zero(Eigen::Index(a.rows()), Eigen::Index(a.cols()));
    for (Index k = 0; k < q; ++k) {
        const double angle = -2.0 * std::numbers::pi * double((s * k) % q) / double(q);
        out += a.slice(k).cast<Complex>() * Complex(std::cos(angle), std::sin(angle));
    }
    return out;
}

} // namespace

template <typename Scalar>
PivotedQr<Scalar> pivoted_qr(const Matrix<Scalar>& a, std::optional<Index> steps) {
    const Eigen::Index m = a.rows();
    const Eigen::Index n = a.cols();
    const Eigen::Index kmax = std::min(m, n);
    const Eigen::Index count = steps ? std::min<Eigen::Index>(Eigen::Index(*steps), kmax) : kmax;

    Matrix<Scalar> work = a;
    PivotedQr<Scalar> out;
    out.permutation.resize(std::size_t(n));
    std::iota(out.permutation.begin(), out.permutation.end(), Index(0));

    std::vector<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>> reflectors;
    std::vector<double> betas;

    for (Eigen::Index j = 0; j < count; ++j) {
        // Residual norms are recomputed rather than downdated.
        Eigen::VectorXd norms(n - j);
        for (Eigen::Index c = j; c < n; ++c) norms(c - j) = work.col(c).tail(m - j).norm();
        const double best = norms.maxCoeff();
        Eigen::Index pick = 0;
        while (norms(pick) < best - 1e-14 * best) ++pick;
        if (pick != 0) {
            work.col(j).swap(work.col(j + pick));
            std::swap(out.permutation[std::size_t(j)], out.permutation[std::size_t(j + pick)]);
        }

        Eigen::Matrix<Scalar, Eigen::Dynamic, 1> v = work.col(j).tail(m - j);
        const double xnorm = v.norm();
        if (xnorm == 0.0) {
            reflectors.emplace_back(Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(m - j));
            betas.push_back(0.0);
            continue;
        }
        const Scalar alpha = -unit_phase(v(0)) * xnorm;
        v(0) -= alpha;
        const double beta = 2.0 / v.squaredNorm();
        auto trailing = work.block(j, j, m - j, n - j);
        trailing -= (beta * v) * (v.adjoint() * trailing);
        work(j, j) = alpha;
        work.col(j).tail(m - j - 1).setZero();
        reflectors.push_back(std::move(v));
        betas.push_back(beta);
    }

    if (steps) return out;

    out.r = work.topRows(kmax).template triangularView<Eigen::Upper>();
    out.q = Matrix<Scalar>::Identity(m, kmax);
    for (Eigen::Index j = Eigen::Index(reflectors.size()) - 1; j >= 0; --j) {
        const auto& v = reflectors[std::size_t(j)];
        auto block = out.q.bottomRows(m - j);
        block -= (betas[std::size_t(j)] * v) * (v.adjoint() * block);
    }
    return out;
}

template PivotedQr<double> pivoted_qr(const Matrix<double>&, std::optional<Index>);
template PivotedQr<Complex> pivoted_qr(const Matrix<Complex>&, std::optional<Index>);

TSvdFactors t_svd(const Tensor3& a, std::optional<Index> rank) {
    const Index m = a.rows();
    const Index l = a.cols();
    const Index q = a.depth();
    const Index full = std::min(m, l);
    const Index k = rank.value_or(full);
    if (k < 1 || k > full) {
        throw NumericalError("t_svd: rank " + std::to_string(k) + " outside [1, " +
                             std::to_string(full) + "]");
    }

    const FourierTensor3 ahat = fft3(a);
    FourierTensor3 uhat(m, k, q);
    FourierTensor3 shat(k, k, q);
    FourierTensor3 what(l, k, q);
    MatrixXd sigma(static_cast<Eigen::Index>(full), static_cast<Eigen::Index>(q));

    const auto kk = Eigen::Index(k);
    parallel_for(q / 2 + 1, [&](Index s) {
        const auto cs = Eigen::Index(s);
        if (detail::self_conjugate(q, s)) {
            const auto f = slice_svd<double>(MatrixXd(ahat.slice(s).real()));
            uhat.slice(s) = f.u.leftCols(kk).cast<Complex>();
            what.slice(s) = f.v.leftCols(kk).cast<Complex>();
            sigma.col(cs) = f.sigma;
        } else {
            const auto f = slice_svd<Complex>(ahat.slice(s));
            uhat.slice(s) = f.u.leftCols(kk);
            what.slice(s) = f.v.leftCols(kk);
            sigma.col(cs) = f.sigma;
        }
        for (Eigen::Index i = 0; i < kk; ++i) shat.slice(s)(i, i) = sigma(i, cs);
    });
    for (Index s = q / 2 + 1; s < q; ++s) sigma.col(Eigen::Index(s)) = sigma.col(Eigen::Index(q - s));
    for (auto* t : {&uhat, &shat, &what}) {
        t->set_conjugate_symmetric(true);
        detail::fill_conjugate_mirror(*t);
    }
    return TSvdFactors{ifft3(uhat), ifft3(shat), ifft3(what), std::move(sigma)};
}

double t_svd_tail_spectral(const TSvdFactors& factors, Index n) {
    const Index k = factors.rank();
    if (n > k) {
        throw NumericalError("t_svd_tail_spectral: n = " + std::to_string(n) +
                             " exceeds retained rank " + std::to_string(k));
    }
    if (n == k) return 0.0;
    return t_spectral_norm(sub_tensor(factors.s, n, k - n, n, k - n));
}

Tensor3 t_svd_reconstruct(const TSvdFactors& factors, std::optional<Index> n) {
    const Index k = n.value_or(factors.rank());
    if (k < 1 || k > factors.rank()) throw NumericalError("t_svd_reconstruct: rank out of range");
    const Tensor3 u = lateral_slices(factors.u, 0, k);
    const Tensor3 s = sub_tensor(factors.s, 0, k, 0, k);
    const Tensor3 w = lateral_slices(factors.w, 0, k);
    return t_product(t_product(u, s), t_transpose(w));
}

TQrFactors t_qr(const Tensor3& a) {
    const Index m = a.rows();
    const Index l = a.cols();
    const Index q = a.depth();
    const Index r = std::min(m, l);
    const FourierTensor3 ahat = fft3(a);
    FourierTensor3 qhat(m, r, q);
    FourierTensor3 rhat(r, l, q);

    parallel_for(q / 2 + 1, [&](Index s) {
        if (detail::self_conjugate(q, s)) {
            auto [qs, rs] = thin_qr<double>(MatrixXd(ahat.slice(s).real()));
            qhat.slice(s) = qs.cast<Complex>();
            rhat.slice(s) = rs.cast<Complex>();
        } else {
            auto [qs, rs] = thin_qr<Complex>(ahat.slice(s));
            qhat.slice(s) = qs;
            rhat.slice(s) = rs;
        }
    });
    for (auto* t : {&qhat, &rhat}) {
        t->set_conjugate_symmetric(true);
        detail::fill_conjugate_mirror(*t);
    }
    return TQrFactors{ifft3(qhat), ifft3(rhat), std::nullopt};
}

TQrFactors t_pqr(const Tensor3& a) {
    const Index m = a.rows();
    const Index l = a.cols();
    const Index q = a.depth();
    const Index r = std::min(m, l);
    const FourierTensor3 ahat = fft3(a);
    FourierTensor3 qhat(m, r, q);
    FourierTensor3 rhat(r, l, q);

    // The first Fourier slice is the sum of the frontal slices, hence real.
    const auto lead = pivoted_qr<double>(MatrixXd(ahat.slice(0).real()));
    qhat.slice(0) = lead.q.cast<Complex>();
    rhat.slice(0) = lead.r.cast<Complex>();
    const auto& perm = lead.permutation;

    parallel_for(q / 2, [&](Index i) {
        const Index s = i + 1;
        if (detail::self_conjugate(q, s)) {
            auto [qs, rs] = thin_qr<double>(permute_columns(MatrixXd(ahat.slice(s).real()), perm));
            qhat.slice(s) = qs.cast<Complex>();
            rhat.slice(s) = rs.cast<Complex>();
        } else {
            auto [qs, rs] = thin_qr<Complex>(permute_columns(ahat.slice(s), perm));
            qhat.slice(s) = qs;
            rhat.slice(s) = rs;
        }
    });
    for (auto* t : {&qhat, &rhat}) {
        t->set_conjugate_symmetric(true);
        detail::fill_conjugate_mirror(*t);
    }
    return TQrFactors{ifft3(qhat), ifft3(rhat), IndexSet(perm)};
}

IndexSet t_pqr_pivots(const Tensor3& u, Index fourier_slice) {
    const Index n = u.cols();
    if (n > u.rows()) throw DimensionError("t_pqr_pivots: basis has more columns than rows");
    if (fourier_slice < 1 || fourier_slice > u.depth()) {
        throw DimensionError("t_pqr_pivots: Fourier slice " + std::to_string(fourier_slice) +
                             " outside [1, " + std::to_string(u.depth()) + "]");
    }
    const Index s = fourier_slice - 1;
    const MatrixXcd lead = dft_slice(u, s);

    std::vector<Index> perm;
    if (detail::self_conjugate(u.depth(), s)) {
        perm = pivoted_qr<double>(MatrixXd(lead.real().transpose()), n).permutation;
    } else {
        perm = pivoted_qr<Complex>(lead.adjoint(), n).permutation;
    }
    perm.resize(n);
    return IndexSet(std::move(perm));
}

Tensor3 t_inverse(const Tensor3& a, std::vector<Warning>* warnings) {
    if (a.rows() != a.cols()) throw DimensionError("t_inverse: frontal slices must be square");
    const Index n = a.rows();
    const Index q = a.depth();
    const FourierTensor3 ahat = fft3(a);
    FourierTensor3 inv(n, n, q);
    inv.set_conjugate_symmetric(true);

    const Index slices = q / 2 + 1;
    std::vector<double> rcond(slices, 0.0);
    std::vector<char> singular(slices, 0);
    parallel_for(slices, [&](Index s) {
        Eigen::PartialPivLU<MatrixXcd> lu(ahat.slice(s));
        const auto diag = lu.matrixLU().diagonal();
        if ((diag.array() == Complex(0.0)).any()) {
            singular[s] = 1;
            return;
        }
        rcond[s] = lu.rcond();
        if (!(rcond[s] > 0.0) || !std::isfinite(rcond[s])) {
            singular[s] = 1;
            return;
        }
        inv.slice(s) = lu.inverse();
    });

    for (Index s = 0; s < slices; ++s) {
        if (singular[s]) {
            throw SingularError("t_inverse: Fourier slice " + std::to_string(s + 1) + " is singular",
                                s + 1);
        }
        if (warnings && 1.0 / rcond[s] > 1e12) {
            warnings->push_back({"ill_conditioned", "Fourier slice " + std::to_string(s + 1) +
                                                        " condition estimate " +
                                                        std::to_string(1.0 / rcond[s])});
        }
    }
    detail::fill_conjugate_mirror(inv);
    return ifft3(inv);
}

} // namespace tqdeim
