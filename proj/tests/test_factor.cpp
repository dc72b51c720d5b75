#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "oracles.hpp"
#include "tqdeim/errors.hpp"
#include "tqdeim/factor.hpp"

using namespace tqdeim;

namespace {

double identity_residual(const Tensor3& x) {
    return oracle::max_abs_diff(oracle::t_product(oracle::t_transpose(x), x), t_identity(x.cols(), x.depth()));
}

// Random tensor with t-orthogonal lateral slices.
Tensor3 random_orthogonal(oracle::Rng& rng, Index m, Index n, Index q) {
    return t_svd(rng.tensor(m, n, q)).u;
}

bool fourier_upper_triangular(const Tensor3& r, double tol) {
    for (const auto& slice : oracle::dft_slices(r))
        for (Eigen::Index j = 0; j < slice.cols(); ++j)
            for (Eigen::Index i = j + 1; i < slice.rows(); ++i)
                if (std::abs(slice(i, j)) > tol) return false;
    return true;
}

} // namespace

TEST_CASE("t_svd") {
    SUBCASE("identity has unit singular values in every Fourier slice") {
        const TSvdFactors f = t_svd(t_identity(3, 2));
        for (const auto& slice : oracle::dft_slices(f.s)) {
            CHECK((slice - Eigen::MatrixXcd::Identity(3, 3)).norm() <= 1e-12);
        }
    }
    SUBCASE("q = 1 matches the matrix SVD") {
        oracle::Rng rng(1);
        const Tensor3 a = rng.tensor(5, 3, 1);
        const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(Eigen::MatrixXd(a.slice(0))).singularValues();
        const TSvdFactors f = t_svd(a);
        for (int i = 0; i < 3; ++i) CHECK(f.s(Index(i), Index(i), 0) == doctest::Approx(sv(i)).epsilon(1e-12));
    }
    SUBCASE("truncation error equals the Fourier tail") {
        oracle::Rng rng(2);
        const Tensor3 a = rng.tensor(6, 4, 3);
        const TSvdFactors f = t_svd(a, 2);
        const double err = oracle::frob(a - t_svd_reconstruct(f));
        CHECK(err == doctest::Approx(oracle::svd_tail_frobenius(a, 2)).epsilon(1e-9));
    }
    SUBCASE("factor invariants") {
        oracle::Rng rng(3);
        for (auto [m, l, q] : {std::tuple{6, 4, 3}, {3, 7, 4}, {5, 5, 1}, {4, 2, 6}}) {
            const Tensor3 a = rng.tensor(m, l, q);
            const TSvdFactors f = t_svd(a);
            CHECK(identity_residual(f.u) <= 1e-10);
            CHECK(identity_residual(f.w) <= 1e-10);
            const Tensor3 rec = oracle::t_product(oracle::t_product(f.u, f.s), oracle::t_transpose(f.w));
            CHECK(oracle::rel_diff(rec, a) <= 1e-9);
            const auto ref = oracle::dft_slices(a);
            const auto shat = oracle::dft_slices(f.s);
            for (Index k = 0; k < Index(q); ++k) {
                const Eigen::MatrixXcd& s = shat[k];
                CHECK((s - Eigen::MatrixXcd(s.diagonal().asDiagonal())).norm() <= 1e-10 * (1 + s.norm()));
                const Eigen::VectorXd sv = oracle::singular_values(ref[k]);
                for (Eigen::Index i = 0; i < sv.size(); ++i) {
                    CHECK(std::abs(s(i, i) - sv(i)) <= 1e-10 * (1 + sv(0)));
                    CHECK(f.fourier_singular_values(i, Eigen::Index(k)) == doctest::Approx(sv(i)).epsilon(1e-10));
                }
            }
        }
    }
    SUBCASE("rank out of range") {
        oracle::Rng rng(4);
        CHECK_THROWS_AS(t_svd(rng.tensor(4, 3, 2), 4), NumericalError);
        CHECK_THROWS_AS(t_svd(rng.tensor(4, 3, 2), 0), NumericalError);
    }
}

TEST_CASE("t_svd_tail_spectral") {
    oracle::Rng rng(5);
    const Tensor3 a = rng.tensor(6, 4, 3);
    const TSvdFactors f = t_svd(a);
    CHECK(t_svd_tail_spectral(f, f.rank()) == 0.0);
    CHECK_THROWS_AS(t_svd_tail_spectral(f, f.rank() + 1), NumericalError);
    for (Index n = 0; n < f.rank(); ++n) {
        CHECK(t_svd_tail_spectral(f, n) == doctest::Approx(oracle::svd_tail_spectral(a, n)).epsilon(1e-10));
    }
    const Tensor3 b = rng.tensor(5, 4, 1);
    const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(Eigen::MatrixXd(b.slice(0))).singularValues();
    CHECK(t_svd_tail_spectral(t_svd(b), 2) == doctest::Approx(sv(2)).epsilon(1e-12));
}

TEST_CASE("t_qr") {
    oracle::Rng rng(6);
    SUBCASE("orthogonal input gives unit-modulus diagonal R") {
        const Tensor3 u = random_orthogonal(rng, 5, 3, 4);
        const TQrFactors f = t_qr(u);
        for (const auto& slice : oracle::dft_slices(f.r)) {
            CHECK((slice - Eigen::MatrixXcd(slice.diagonal().asDiagonal())).norm() <= 1e-10);
            for (Eigen::Index i = 0; i < slice.rows(); ++i) CHECK(std::abs(slice(i, i)) == doctest::Approx(1.0));
        }
    }
    SUBCASE("q = 1 is the matrix QR") {
        const Tensor3 a = rng.tensor(5, 3, 1);
        const TQrFactors f = t_qr(a);
        const Eigen::MatrixXd qr = f.q.slice(0) * f.r.slice(0);
        CHECK((qr - Eigen::MatrixXd(a.slice(0))).norm() <= 1e-12 * a.slice(0).norm());
        CHECK(Eigen::MatrixXd(f.r.slice(0)).isUpperTriangular(1e-14));
    }
    SUBCASE("random reconstruction") {
        for (auto [m, l, q] : {std::tuple{5, 3, 2}, {3, 5, 3}, {6, 6, 5}}) {
            const Tensor3 a = rng.tensor(m, l, q);
            const TQrFactors f = t_qr(a);
            CHECK(oracle::rel_diff(oracle::t_product(f.q, f.r), a) <= 1e-9);
            CHECK(identity_residual(f.q) <= 1e-10);
            CHECK(fourier_upper_triangular(f.r, 1e-10));
        }
    }
}

TEST_CASE("t_pqr") {
    oracle::Rng rng(7);
    for (auto [m, l, q] : {std::tuple{6, 4, 3}, {4, 6, 4}, {5, 5, 1}}) {
        const Tensor3 a = rng.tensor(m, l, q);
        const TQrFactors f = t_pqr(a);
        REQUIRE(f.pivots.has_value());
        CHECK(identity_residual(f.q) <= 1e-10);
        CHECK(fourier_upper_triangular(f.r, 1e-10));
        const Tensor3 permuted = select_lateral(a, f.pivots->indices());
        CHECK(oracle::rel_diff(oracle::t_product(f.q, f.r), permuted) <= 1e-9);
        // Pivots come from the first (DC) Fourier slice.
        const auto dc = oracle::dft_slices(a)[0];
        CHECK(oracle::greedy_pivots(dc, Index(std::min(m, l))) ==
              std::vector<Index>(f.pivots->indices().begin(), f.pivots->indices().begin() + std::min(m, l)));
    }
}

TEST_CASE("t_pqr_pivots") {
    SUBCASE("embedded unit rows are picked in magnitude order") {
        // First Fourier slice equals the DC sum of the slices: put rows e_1*2, e_2 at rows 3 and 7.
        Tensor3 u(10, 2, 3);
        u(6, 0, 0) = 2.0;  // row 7 (1-based), larger
        u(2, 1, 0) = 1.0;  // row 3
        const IndexSet p = t_pqr_pivots(u);
        CHECK(p.one_based() == std::vector<std::int64_t>{7, 3});
    }
    SUBCASE("q = 1 equals the pivoted QR of the transposed basis") {
        oracle::Rng rng(8);
        const Tensor3 u = rng.tensor(12, 4, 1);
        const auto ref = oracle::greedy_pivots(Eigen::MatrixXd(u.slice(0).transpose()), 4);
        CHECK(t_pqr_pivots(u).indices() == ref);
    }
    SUBCASE("random orthonormal bases match the greedy oracle") {
        oracle::Rng rng(9);
        for (int trial = 0; trial < 10; ++trial) {
            const Tensor3 u = random_orthogonal(rng, 20, 4, 3);
            const Eigen::MatrixXcd first = oracle::dft_slices(u)[0];
            const auto ref = oracle::greedy_pivots(Eigen::MatrixXcd(first.adjoint()), 4);
            CHECK(t_pqr_pivots(u).indices() == ref);
            CHECK(t_pqr_pivots(u) == t_pqr_pivots(u));
        }
    }
    SUBCASE("other Fourier slices") {
        oracle::Rng rng(10);
        const Tensor3 u = random_orthogonal(rng, 15, 3, 5);
        for (Index s = 1; s <= 5; ++s) {
            const Eigen::MatrixXcd slice = oracle::dft_slices(u)[s - 1];
            const auto ref = oracle::greedy_pivots(Eigen::MatrixXcd(slice.adjoint()), 3);
            CHECK(t_pqr_pivots(u, s).indices() == ref);
        }
        CHECK_THROWS(t_pqr_pivots(u, 0));
        CHECK_THROWS(t_pqr_pivots(u, 6));
    }
}

TEST_CASE("pivoted_qr tie breaking picks the smallest index") {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(3, 4);
    a(0, 1) = 1.0;
    a(1, 3) = 1.0;
    a(2, 2) = 1.0;
    const auto f = pivoted_qr<double>(a);
    CHECK(f.permutation[0] == 1);
    CHECK(f.permutation[1] == 2);
    CHECK(f.permutation[2] == 3);
}

TEST_CASE("t_inverse") {
    const Tensor3 i = t_identity(3, 4);
    CHECK(oracle::max_abs_diff(t_inverse(i), i) <= 1e-15);

    oracle::Rng rng(11);
    const Tensor3 m = rng.tensor(4, 4, 1);
    const Eigen::MatrixXd ref = Eigen::MatrixXd(m.slice(0)).inverse();
    CHECK((Eigen::MatrixXd(t_inverse(m).slice(0)) - ref).norm() <= 1e-12 * ref.norm());

    for (int trial = 0; trial < 20; ++trial) {
        const Tensor3 a = t_identity(4, 3) + 0.3 * rng.tensor(4, 4, 3);
        const Tensor3 inv = t_inverse(a);
        CHECK(oracle::max_abs_diff(oracle::t_product(a, inv), t_identity(4, 3)) <= 1e-9);
        CHECK(oracle::max_abs_diff(oracle::t_product(inv, a), t_identity(4, 3)) <= 1e-9);
    }
}

TEST_CASE("t_inverse reports the singular slice") {
    // Slices (I, -I): the DC Fourier slice is zero, the Nyquist slice is 2I.
    Tensor3 a(2, 2, 2);
    a.slice(0).setIdentity();
    a.slice(1) = -Eigen::Matrix2d::Identity();
    try {
        (void)t_inverse(a);
        FAIL("expected SingularError");
    } catch (const SingularError& e) {
        CHECK(e.slice() == 1);
    }
    a.slice(1).setIdentity();  // now the Nyquist slice vanishes
    try {
        (void)t_inverse(a);
        FAIL("expected SingularError");
    } catch (const SingularError& e) {
        CHECK(e.slice() == 2);
    }
}

TEST_CASE("t_inverse warns on ill conditioning") {
    Tensor3 a = t_identity(2, 1);
    a(1, 1, 0) = 1e-14;
    std::vector<Warning> warnings;
    (void)t_inverse(a, &warnings);
    CHECK(warnings.size() == 1);
}

TEST_CASE("property: truncated t-SVD error bookkeeping") {
    oracle::Rng rng(12);
    for (int trial = 0; trial < 50; ++trial) {
        const Index m = rng.uniform(2, 8), l = rng.uniform(2, 8), q = rng.uniform(1, 6);
        const Tensor3 a = rng.tensor(m, l, q);
        const TSvdFactors f = t_svd(a);
        for (Index n = 1; n <= f.rank(); ++n) {
            const double err = oracle::frob(a - t_svd_reconstruct(f, n));
            const double tail = oracle::svd_tail_frobenius(a, n);
            CHECK(std::abs(err - tail) <= 1e-9 * std::max(tail, 1e-300) + 1e-12 * oracle::frob(a));
        }
    }
}

TEST_CASE("property: leading lateral slices of an orthogonal tensor") {
    oracle::Rng rng(13);
    for (int trial = 0; trial < 20; ++trial) {
        const Index m = rng.uniform(2, 8), q = rng.uniform(1, 6);
        const Tensor3 a = t_svd(rng.tensor(m, m, q)).u;
        for (Index k = 1; k <= m; ++k) {
            const Tensor3 b = lateral_slices(a, 0, k);
            const Tensor3 prod = t_product(t_transpose(b), a);
            Tensor3 expected(k, m, q);
            for (Index i = 0; i < k; ++i) expected(i, i, 0) = 1.0;
            CHECK(oracle::max_abs_diff(prod, expected) <= 1e-10);
        }
    }
}

TEST_CASE("property: pivots are deterministic across runs") {
    oracle::Rng rng(14);
    const Tensor3 u = random_orthogonal(rng, 30, 6, 7);
    const IndexSet first = t_pqr_pivots(u);
    for (int i = 0; i < 5; ++i) CHECK(t_pqr_pivots(u) == first);
}
