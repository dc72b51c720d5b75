#include "tqdeim/tensor.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <string>
#include <unordered_set>

#include "detail.hpp"
#include "tqdeim/parallel.hpp"

namespace tqdeim {

namespace {

std::atomic<std::uint64_t> g_facewise_madds{0};

void require(bool condition, const char* message) {
    if (!condition) throw DimensionError(message);
}

constexpr Index kTubesPerTask = 256;

} // namespace

namespace stats {
std::uint64_t facewise_multiply_adds() { return g_facewise_madds.load(); }
void reset_facewise_multiply_adds() { g_facewise_madds = 0; }
} // namespace stats

IndexSet::IndexSet(std::vector<Index> zero_based) : indices_(std::move(zero_based)) {
    std::unordered_set<Index> seen;
    for (Index i : indices_) {
        if (!seen.insert(i).second) {
            throw DimensionError("index set contains duplicate index " + std::to_string(i + 1));
        }
    }
}

IndexSet::IndexSet(std::initializer_list<Index> zero_based)
    : IndexSet(std::vector<Index>(zero_based)) {}

IndexSet IndexSet::from_one_based(const std::vector<std::int64_t>& indices) {
    std::vector<Index> zero;
    zero.reserve(indices.size());
    for (auto i : indices) {
        if (i < 1) throw DimensionError("1-based index must be >= 1, got " + std::to_string(i));
        zero.push_back(static_cast<Index>(i - 1));
    }
    return IndexSet(std::move(zero));
}

std::vector<std::int64_t> IndexSet::one_based() const {
    std::vector<std::int64_t> out;
    out.reserve(indices_.size());
    for (Index i : indices_) out.push_back(static_cast<std::int64_t>(i) + 1);
    return out;
}

void IndexSet::check_bound(Index bound) const {
    for (Index i : indices_) {
        if (i >= bound) {
            throw DimensionError("index " + std::to_string(i + 1) + " exceeds row count " +
                                 std::to_string(bound));
        }
    }
}

namespace detail {

void fill_conjugate_mirror(FourierTensor3& t) {
    const Index q = t.depth();
    for (Index k = q / 2 + 1; k < q; ++k) {
        t.slice(k) = t.slice(q - k).conjugate();
    }
}

double spectral_norm(const Eigen::Ref<const Eigen::MatrixXcd>& m) {
    if (m.size() == 0) return 0.0;
    if (m.rows() == 1 || m.cols() == 1) return m.norm();
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(m);
    return svd.singularValues()(0);
}

double spectral_norm(const Eigen::Ref<const Eigen::MatrixXd>& m) {
    if (m.size() == 0) return 0.0;
    if (m.rows() == 1 || m.cols() == 1) return m.norm();
    Eigen::BDCSVD<Eigen::MatrixXd> svd(m);
    return svd.singularValues()(0);
}

} // namespace detail

Eigen::MatrixXd unfold(const Tensor3& a) {
    const auto m = Eigen::Index(a.rows());
    Eigen::MatrixXd out(m * Eigen::Index(a.depth()), Eigen::Index(a.cols()));
    for (Index k = 0; k < a.depth(); ++k) {
        out.middleRows(Eigen::Index(k) * m, m) = a.slice(k);
    }
    return out;
}

Tensor3 fold(const Eigen::MatrixXd& m, Index rows, Index depth) {
    require(rows > 0 && depth > 0, "fold: rows and depth must be positive");
    require(Index(m.rows()) == rows * depth, "fold: row count must equal rows * depth");
    require(m.cols() > 0, "fold: matrix has no columns");
    Tensor3 out(rows, Index(m.cols()), depth);
    for (Index k = 0; k < depth; ++k) {
        out.slice(k) = m.middleRows(Eigen::Index(k * rows), Eigen::Index(rows));
    }
    return out;
}

Eigen::MatrixXd bcirc(const Tensor3& a) {
    const auto m = Eigen::Index(a.rows());
    const auto l = Eigen::Index(a.cols());
    const Index q = a.depth();
    Eigen::MatrixXd out(m * Eigen::Index(q), l * Eigen::Index(q));
    for (Index bi = 0; bi < q; ++bi) {
        for (Index bj = 0; bj < q; ++bj) {
            out.block(Eigen::Index(bi) * m, Eigen::Index(bj) * l, m, l) =
                a.slice((bi + q - bj) % q);
        }
    }
    return out;
}

FourierTensor3 fft3(const Tensor3& a) {
    const Index q = a.depth();
    const Index n = a.slice_size();
    FourierTensor3 out(a.rows(), a.cols(), q);
    out.set_conjugate_symmetric(true);
    const auto src = a.data();
    auto dst = out.data();
    if (q == 1) {
        std::copy(src.begin(), src.end(), dst.begin());
        return out;
    }

    const Index tasks = (n + kTubesPerTask - 1) / kTubesPerTask;
    parallel_for(tasks, [&](Index task) {
        Eigen::FFT<double> fft;
        std::vector<double> tube(q);
        std::vector<Complex> spectrum(q);
        const Index end = std::min(n, (task + 1) * kTubesPerTask);
        for (Index t = task * kTubesPerTask; t < end; ++t) {
            for (Index k = 0; k < q; ++k) tube[k] = src[k * n + t];
            fft.fwd(spectrum, tube);
            // Exact mirror so downstream kernels can rely on the symmetry.
            dst[t] = Complex(spectrum[0].real(), 0.0);
            for (Index k = 1; k <= q / 2; ++k) {
                dst[k * n + t] = spectrum[k];
                dst[(q - k) * n + t] = std::conj(spectrum[k]);
            }
            if (q % 2 == 0) dst[(q / 2) * n + t] = Complex(spectrum[q / 2].real(), 0.0);
        }
    });
    return out;
}

Tensor3 ifft3(const FourierTensor3& a) {
    const Index q = a.depth();
    const Index n = a.slice_size();
    Tensor3 out(a.rows(), a.cols(), q);
    const auto src = a.data();
    auto dst = out.data();

    const Index tasks = (n + kTubesPerTask - 1) / kTubesPerTask;
    std::vector<double> residue(tasks, 0.0);
    parallel_for(tasks, [&](Index task) {
        Eigen::FFT<double> fft;
        std::vector<Complex> spectrum(q);
        std::vector<Complex> tube(q);
        const Index end = std::min(n, (task + 1) * kTubesPerTask);
        double worst = 0.0;
        for (Index t = task * kTubesPerTask; t < end; ++t) {
            for (Index k = 0; k < q; ++k) spectrum[k] = src[k * n + t];
            if (q == 1) {
                tube[0] = spectrum[0];
            } else {
                fft.inv(tube, spectrum);
            }
            for (Index k = 0; k < q; ++k) {
                dst[k * n + t] = tube[k].real();
                worst = std::max(worst, std::abs(tube[k].imag()));
            }
        }
        residue[task] = worst;
    });

    const double worst = residue.empty() ? 0.0 : *std::max_element(residue.begin(), residue.end());
    const double scale = frobenius_norm(a);
    if (worst > 1e-8 * scale) {
        throw NumericalError("ifft3: imaginary residue " + std::to_string(worst) +
                             " exceeds tolerance; input is not conjugate symmetric");
    }
    return out;
}

FourierTensor3 facewise_multiply(const FourierTensor3& a, const FourierTensor3& b) {
    require(a.cols() == b.rows(), "facewise_multiply: inner dimensions differ");
    require(a.depth() == b.depth(), "facewise_multiply: depth differs");
    const Index q = a.depth();
    const bool symmetric = a.conjugate_symmetric() && b.conjugate_symmetric();
    FourierTensor3 out(a.rows(), b.cols(), q);
    out.set_conjugate_symmetric(symmetric);

    const Index slices = detail::independent_slices(q, symmetric);
    parallel_for(slices, [&](Index k) { out.slice(k).noalias() = a.slice(k) * b.slice(k); });
    if (symmetric) detail::fill_conjugate_mirror(out);
    g_facewise_madds += std::uint64_t(slices) * a.rows() * a.cols() * b.cols();
    return out;
}

Tensor3 t_product(const Tensor3& a, const Tensor3& b) {
    require(a.cols() == b.rows(), "t_product: inner dimensions differ");
    require(a.depth() == b.depth(), "t_product: depth differs");
    return ifft3(facewise_multiply(fft3(a), fft3(b)));
}

Tensor3 t_transpose(const Tensor3& a) {
    const Index q = a.depth();
    Tensor3 out(a.cols(), a.rows(), q);
    for (Index k = 0; k < q; ++k) {
        out.slice(k) = a.slice((q - k) % q).transpose();
    }
    return out;
}

Tensor3 t_identity(Index rows, Index depth) {
    Tensor3 out(rows, rows, depth);
    for (Index i = 0; i < rows; ++i) out(i, i, 0) = 1.0;
    return out;
}

double frobenius_norm(const Tensor3& a) {
    double sum = 0.0;
    for (double v : a.data()) sum += v * v;
    return std::sqrt(sum);
}

double frobenius_norm(const FourierTensor3& a) {
    double sum = 0.0;
    for (const Complex& v : a.data()) sum += std::norm(v);
    return std::sqrt(sum);
}

double t_spectral_norm(const FourierTensor3& a) {
    const Index slices = detail::independent_slices(a.depth(), a.conjugate_symmetric());
    std::vector<double> norms(slices);
    parallel_for(slices, [&](Index k) { norms[k] = detail::spectral_norm(a.slice(k)); });
    return *std::max_element(norms.begin(), norms.end());
}

double t_spectral_norm(const Tensor3& a) {
    if (a.depth() == 1) return detail::spectral_norm(Eigen::MatrixXd(a.slice(0)));
    return t_spectral_norm(fft3(a));
}

Tensor3 sample_rows(const Tensor3& a, const IndexSet& rows) {
    require(!rows.empty(), "sample_rows: empty index set");
    rows.check_bound(a.rows());
    Tensor3 out(rows.size(), a.cols(), a.depth());
    for (Index k = 0; k < a.depth(); ++k) {
        auto src = a.slice(k);
        auto dst = out.slice(k);
        for (Index i = 0; i < rows.size(); ++i) dst.row(Eigen::Index(i)) = src.row(Eigen::Index(rows[i]));
    }
    return out;
}

Tensor3 sampling_tensor(Index rows, const IndexSet& p, Index depth) {
    require(!p.empty(), "sampling_tensor: empty index set");
    p.check_bound(rows);
    Tensor3 out(rows, p.size(), depth);
    for (Index j = 0; j < p.size(); ++j) out(p[j], j, 0) = 1.0;
    return out;
}

Tensor3 sub_tensor(const Tensor3& a, Index row_begin, Index row_count, Index col_begin,
                   Index col_count) {
    require(row_count > 0 && col_count > 0, "sub_tensor: empty range");
    require(row_begin + row_count <= a.rows() && col_begin + col_count <= a.cols(),
            "sub_tensor: range out of bounds");
    Tensor3 out(row_count, col_count, a.depth());
    for (Index k = 0; k < a.depth(); ++k) {
        out.slice(k) = a.slice(k).block(Eigen::Index(row_begin), Eigen::Index(col_begin),
                                        Eigen::Index(row_count), Eigen::Index(col_count));
    }
    return out;
}

Tensor3 lateral_slices(const Tensor3& a, Index begin, Index count) {
    return sub_tensor(a, 0, a.rows(), begin, count);
}

Tensor3 select_lateral(const Tensor3& a, const std::vector<Index>& cols) {
    require(!cols.empty(), "select_lateral: no columns selected");
    Tensor3 out(a.rows(), cols.size(), a.depth());
    for (Index j = 0; j < cols.size(); ++j) {
        require(cols[j] < a.cols(), "select_lateral: column out of range");
        for (Index k = 0; k < a.depth(); ++k) {
            out.slice(k).col(Eigen::Index(j)) = a.slice(k).col(Eigen::Index(cols[j]));
        }
    }
    return out;
}

Tensor3 concat_lateral(const Tensor3& a, const Tensor3& b) {
    require(a.rows() == b.rows() && a.depth() == b.depth(), "concat_lateral: shapes differ");
    Tensor3 out(a.rows(), a.cols() + b.cols(), a.depth());
    for (Index k = 0; k < a.depth(); ++k) {
        out.slice(k).leftCols(Eigen::Index(a.cols())) = a.slice(k);
        out.slice(k).rightCols(Eigen::Index(b.cols())) = b.slice(k);
    }
    return out;
}

Tensor3 operator+(const Tensor3& a, const Tensor3& b) {
    require(a.dims() == b.dims(), "tensor sum: shapes differ");
    std::vector<double> out(a.size());
    for (Index i = 0; i < out.size(); ++i) out[i] = a.data()[i] + b.data()[i];
    return Tensor3(a.rows(), a.cols(), a.depth(), std::move(out));
}

Tensor3 operator-(const Tensor3& a, const Tensor3& b) {
    require(a.dims() == b.dims(), "tensor difference: shapes differ");
    std::vector<double> out(a.size());
    for (Index i = 0; i < out.size(); ++i) out[i] = a.data()[i] - b.data()[i];
    return Tensor3(a.rows(), a.cols(), a.depth(), std::move(out));
}

Tensor3 operator*(double s, const Tensor3& a) {
    std::vector<double> out(a.size());
    for (Index i = 0; i < out.size(); ++i) out[i] = s * a.data()[i];
    return Tensor3(a.rows(), a.cols(), a.depth(), std::move(out));
}

bool all_finite(const Tensor3& a) {
    return std::all_of(a.data().begin(), a.data().end(), [](double v) { return std::isfinite(v); });
}

} // namespace tqdeim
