#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

#include "tqdeim/errors.hpp"

namespace tqdeim {

using Index = std::size_t;
using Complex = std::complex<double>;

template <typename Scalar>
using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Dims {
    Index rows = 0;
    Index cols = 0;
    Index depth = 0;

    Index size() const { return rows * cols * depth; }
    bool operator==(const Dims&) const = default;
};

// Dense m x l x q tensor stored as q contiguous frontal slices, each row-major m x l.
template <typename Scalar>
class BasicTensor3 {
public:
    using value_type = Scalar;
    using SliceMap = Eigen::Map<RowMatrix<Scalar>>;
    using ConstSliceMap = Eigen::Map<const RowMatrix<Scalar>>;

    BasicTensor3() = default;

    BasicTensor3(Index rows, Index cols, Index depth)
        : dims_{rows, cols, depth}, data_(rows * cols * depth, Scalar(0)) {
        check_dims();
    }

    BasicTensor3(Index rows, Index cols, Index depth, std::vector<Scalar> data)
        : dims_{rows, cols, depth}, data_(std::move(data)) {
        check_dims();
        if (data_.size() != dims_.size()) {
            throw DimensionError("tensor data length does not match its dimensions");
        }
    }

    const Dims& dims() const { return dims_; }
    Index rows() const { return dims_.rows; }
    Index cols() const { return dims_.cols; }
    Index depth() const { return dims_.depth; }
    Index size() const { return data_.size(); }
    Index slice_size() const { return dims_.rows * dims_.cols; }

    Scalar& operator()(Index i, Index j, Index k) {
        return data_[k * slice_size() + i * dims_.cols + j];
    }
    const Scalar& operator()(Index i, Index j, Index k) const {
        return data_[k * slice_size() + i * dims_.cols + j];
    }

    std::span<Scalar> data() { return data_; }
    std::span<const Scalar> data() const { return data_; }
    const std::vector<Scalar>& values() const { return data_; }

    // Frontal slice k (0-based) as an Eigen view.
    SliceMap slice(Index k) {
        return SliceMap(data_.data() + k * slice_size(), Eigen::Index(dims_.rows),
                        Eigen::Index(dims_.cols));
    }
    ConstSliceMap slice(Index k) const {
        return ConstSliceMap(data_.data() + k * slice_size(), Eigen::Index(dims_.rows),
                             Eigen::Index(dims_.cols));
    }

    bool operator==(const BasicTensor3& other) const {
        return dims_ == other.dims_ && data_ == other.data_;
    }

private:
    void check_dims() const {
        if (dims_.rows == 0 || dims_.cols == 0 || dims_.depth == 0) {
            throw DimensionError("tensor dimensions must be positive");
        }
    }

    Dims dims_{};
    std::vector<Scalar> data_;
};

using Tensor3 = BasicTensor3<double>;

// Frontal slices after a DFT along the third dimension.
class FourierTensor3 : public BasicTensor3<Complex> {
public:
    using BasicTensor3<Complex>::BasicTensor3;

    // True when slice k and slice (q - k) mod q are known to be conjugates,
    // i.e. the data is the transform of a real tensor. Slice-wise kernels only
    // touch the first q/2 + 1 slices in that case.
    bool conjugate_symmetric() const { return conjugate_symmetric_; }
    void set_conjugate_symmetric(bool value) { conjugate_symmetric_ = value; }

private:
    bool conjugate_symmetric_ = false;
};

// Ordered set of distinct row indices. Stored 0-based; the external (file/CLI)
// convention is 1-based.
class IndexSet {
public:
    IndexSet() = default;
    explicit IndexSet(std::vector<Index> zero_based);
    IndexSet(std::initializer_list<Index> zero_based);

    static IndexSet from_one_based(const std::vector<std::int64_t>& indices);

    Index size() const { return indices_.size(); }
    bool empty() const { return indices_.empty(); }
    Index operator[](Index i) const { return indices_[i]; }
    const std::vector<Index>& indices() const { return indices_; }
    std::vector<std::int64_t> one_based() const;

    // Throws DimensionError if any index is >= bound.
    void check_bound(Index bound) const;

    auto begin() const { return indices_.begin(); }
    auto end() const { return indices_.end(); }
    bool operator==(const IndexSet&) const = default;

private:
    std::vector<Index> indices_;
};

Eigen::MatrixXd unfold(const Tensor3& a);
Tensor3 fold(const Eigen::MatrixXd& m, Index rows, Index depth);
Eigen::MatrixXd bcirc(const Tensor3& a);

FourierTensor3 fft3(const Tensor3& a);
// Throws NumericalError when the imaginary residue exceeds 1e-8 * ||a||_F.
Tensor3 ifft3(const FourierTensor3& a);

FourierTensor3 facewise_multiply(const FourierTensor3& a, const FourierTensor3& b);

Tensor3 t_product(const Tensor3& a, const Tensor3& b);
Tensor3 t_transpose(const Tensor3& a);
Tensor3 t_identity(Index rows, Index depth);

double frobenius_norm(const Tensor3& a);
double frobenius_norm(const FourierTensor3& a);
double t_spectral_norm(const Tensor3& a);
double t_spectral_norm(const FourierTensor3& a);

Tensor3 sample_rows(const Tensor3& a, const IndexSet& rows);

// Permutation tensor whose first frontal slice holds columns p_j of the N x N
// identity and whose other slices are zero, so that t_transpose(P) * f = f(p,:,:).
Tensor3 sampling_tensor(Index rows, const IndexSet& p, Index depth);

Tensor3 lateral_slices(const Tensor3& a, Index begin, Index count);
Tensor3 select_lateral(const Tensor3& a, const std::vector<Index>& cols);
Tensor3 concat_lateral(const Tensor3& a, const Tensor3& b);
Tensor3 sub_tensor(const Tensor3& a, Index row_begin, Index row_count, Index col_begin,
                   Index col_count);

Tensor3 operator+(const Tensor3& a, const Tensor3& b);
Tensor3 operator-(const Tensor3& a, const Tensor3& b);
Tensor3 operator*(double s, const Tensor3& a);

bool all_finite(const Tensor3& a);

namespace stats {
// Complex multiply-adds performed by facewise_multiply since the last reset.
std::uint64_t facewise_multiply_adds();
void reset_facewise_multiply_adds();
} // namespace stats

} // namespace tqdeim
