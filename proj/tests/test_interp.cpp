#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "oracles.hpp"
#include "tqdeim/datagen.hpp"
#include "tqdeim/errors.hpp"
#include "tqdeim/factor.hpp"
#include "tqdeim/interp.hpp"

using namespace tqdeim;

namespace {

Tensor3 orthogonal(oracle::Rng& rng, Index m, Index n, Index q) { return t_svd(rng.tensor(m, n, q)).u; }

// Data lying exactly in the t-span of an n-column orthogonal basis.
Tensor3 low_rank(oracle::Rng& rng, Index m, Index n, Index l, Index q) {
    return t_product(orthogonal(rng, m, n, q), rng.tensor(n, l, q));
}

// D * P^T as an explicit (N, N, M) tensor.
Tensor3 full_projector(const TQDeimModel& model) {
    const Index N = model.basis.rows(), M = model.basis.depth();
    return t_product(model.d, t_transpose(sampling_tensor(N, model.pivots, M)));
}

Tensor3 small_burgers() {
    BurgersConfig cfg;
    cfg.nx = 96;
    cfg.nt = 48;
    cfg.n_params = 12;
    return gen_burgers(cfg).tensor;
}

} // namespace

TEST_CASE("fit_tqdeim") {
    oracle::Rng rng(1);
    SUBCASE("training data in the span is reconstructed exactly") {
        const Tensor3 train = low_rank(rng, 20, 4, 9, 5);
        const TQDeimModel model = fit_tqdeim(train, 4);
        const Tensor3 rec = reconstruct_tqdeim(model, sample_rows(train, model.pivots));
        CHECK(oracle::max_abs_diff(rec, train) <= 1e-8);
        CHECK(oracle::max_abs_diff(t_product(t_transpose(model.basis), model.basis), t_identity(4, 5)) <= 1e-10);
        CHECK(model.provenance.train_dims == train.dims());
    }
    SUBCASE("q = 1 agrees with Q-DEIM") {
        const Tensor3 train = rng.tensor(15, 6, 1);
        const TQDeimModel t = fit_tqdeim(train, 4);
        const QDeimModel m = fit_qdeim(train, 4);
        CHECK(t.pivots == m.pivots);
        CHECK((Eigen::MatrixXd(t.d.slice(0)) - m.d).norm() <= 1e-10 * m.d.norm());
    }
    SUBCASE("interpolation at the pivots on Burgers data") {
        const TQDeimModel model = fit_tqdeim(small_burgers(), 8);
        CHECK(oracle::max_abs_diff(sample_rows(model.d, model.pivots), t_identity(8, model.d.depth())) <= 1e-8);
        CHECK(all_finite(model.d));
    }
    SUBCASE("rank out of range") {
        const Tensor3 train = rng.tensor(6, 3, 2);
        CHECK_THROWS_AS(fit_tqdeim(train, 0), NumericalError);
        CHECK_THROWS_AS(fit_tqdeim(train, 4), NumericalError);
    }
    SUBCASE("pivot slice is configurable") {
        const Tensor3 train = rng.tensor(20, 6, 5);
        FitOptions options;
        options.pivot_slice = 2;
        const TQDeimModel model = fit_tqdeim(train, 3, options);
        CHECK(model.pivot_slice == 2);
        CHECK(model.pivots == t_pqr_pivots(model.basis, 2));
    }
}

TEST_CASE("reconstruct_tqdeim") {
    oracle::Rng rng(2);
    const Tensor3 train = low_rank(rng, 18, 3, 7, 4);
    const TQDeimModel model = fit_tqdeim(train, 3);

    const Tensor3 f = lateral_slices(train, 2, 1);
    CHECK(oracle::max_abs_diff(reconstruct_tqdeim(model, sample_rows(f, model.pivots)), f) <= 1e-8);

    const Tensor3 zero = reconstruct_tqdeim(model, Tensor3(3, 2, 4));
    CHECK(zero == Tensor3(18, 2, 4));

    const Tensor3 g = rng.tensor(18, 5, 4);
    const Tensor3 rec = reconstruct_tqdeim(model, sample_rows(g, model.pivots));
    CHECK(oracle::max_abs_diff(sample_rows(rec, model.pivots), sample_rows(g, model.pivots)) <= 1e-8);

    CHECK_THROWS_AS(reconstruct_tqdeim(model, Tensor3(2, 1, 4)), DimensionError);
    CHECK_THROWS_AS(reconstruct_tqdeim(model, Tensor3(3, 1, 5)), DimensionError);

    SUBCASE("Burgers test slices respect the bound") {
        const Tensor3 data = small_burgers();
        const TQDeimModel m = fit_tqdeim(lateral_slices(data, 0, 8), 6);
        for (Index j = 8; j < data.cols(); ++j) {
            const ErrorEstimate e = error_bound(m, lateral_slices(data, j, 1));
            CHECK(e.bound >= e.true_error - 1e-9 * e.bound);
        }
    }
}

TEST_CASE("fit_qdeim and reconstruct_qdeim") {
    oracle::Rng rng(3);
    SUBCASE("rank-n data is reconstructed exactly") {
        const Eigen::MatrixXd u = Eigen::HouseholderQR<Eigen::MatrixXd>(rng.matrix(12, 3)).householderQ() *
                                  Eigen::MatrixXd::Identity(12, 3);
        const Eigen::MatrixXd data = u * rng.matrix(3, 8);
        const Tensor3 t(12, 8, 1, [&] {
            std::vector<double> v(96);
            for (int i = 0; i < 12; ++i)
                for (int j = 0; j < 8; ++j) v[size_t(i * 8 + j)] = data(i, j);
            return v;
        }());
        const QDeimModel model = fit_qdeim(t, 3);
        Eigen::MatrixXd sampled(3, 8);
        for (int i = 0; i < 3; ++i) sampled.row(i) = data.row(Eigen::Index(model.pivots[Index(i)]));
        CHECK((reconstruct_qdeim(model, sampled) - data).cwiseAbs().maxCoeff() <= 1e-8);
        CHECK((model.basis.transpose() * model.basis - Eigen::MatrixXd::Identity(3, 3)).norm() <= 1e-10);
    }
    SUBCASE("n = m gives an exact square interpolant") {
        const Tensor3 t = rng.tensor(5, 4, 3);
        const QDeimModel model = fit_qdeim(t, 5);
        Eigen::MatrixXd dp(5, 5);
        for (int i = 0; i < 5; ++i) dp.row(i) = model.d.row(Eigen::Index(model.pivots[Index(i)]));
        CHECK((dp - Eigen::MatrixXd::Identity(5, 5)).norm() <= 1e-8);
        const Tensor3 rec = reconstruct_qdeim(model, sample_rows(t, model.pivots));
        CHECK(oracle::max_abs_diff(rec, t) <= 1e-8);
    }
    SUBCASE("pivots match the greedy oracle") {
        for (int trial = 0; trial < 5; ++trial) {
            const Tensor3 t = rng.tensor(25, 4, 6);
            const QDeimModel model = fit_qdeim(t, 5);
            CHECK(model.pivots.indices() == oracle::greedy_pivots(Eigen::MatrixXd(model.basis.transpose()), 5));
        }
    }
    SUBCASE("vectorization order is lateral-major, time-minor") {
        const Tensor3 t = rng.tensor(4, 3, 5);
        const Eigen::MatrixXd v = vectorize(t);
        for (Index j = 0; j < 3; ++j)
            for (Index k = 0; k < 5; ++k)
                for (Index i = 0; i < 4; ++i) CHECK(v(Eigen::Index(i), Eigen::Index(j * 5 + k)) == t(i, j, k));
        CHECK(devectorize(v, 3, 5) == t);
    }
    SUBCASE("rank out of range") {
        CHECK_THROWS_AS(fit_qdeim(rng.tensor(6, 2, 2), 7), NumericalError);
    }
}

TEST_CASE("amplification_factor") {
    oracle::Rng rng(4);
    SUBCASE("identity rows give 1") {
        TQDeimModel model;
        model.basis = lateral_slices(t_identity(10, 4), 0, 3);
        model.pivots = IndexSet{0, 1, 2};
        CHECK(amplification_factor(model) == doctest::Approx(1.0).epsilon(1e-14));
    }
    SUBCASE("q = 1 equals the Q-DEIM factor") {
        const Tensor3 t = rng.tensor(14, 5, 1);
        const TQDeimModel tm = fit_tqdeim(t, 4);
        const QDeimModel qm = fit_qdeim(t, 4);
        Eigen::MatrixXd up(4, 4);
        for (int i = 0; i < 4; ++i) up.row(i) = qm.basis.row(Eigen::Index(qm.pivots[Index(i)]));
        const double ref = Eigen::JacobiSVD<Eigen::MatrixXd>(Eigen::MatrixXd(up.inverse())).singularValues()(0);
        CHECK(amplification_factor(tm) == doctest::Approx(ref).epsilon(1e-9));
        CHECK(amplification_factor(qm) == doctest::Approx(ref).epsilon(1e-9));
    }
    SUBCASE("two computations agree") {
        for (int trial = 0; trial < 5; ++trial) {
            const TQDeimModel model = fit_tqdeim(rng.tensor(20, 6, 5), 4);
            const double ref = oracle::t_spectral_norm(t_inverse(sample_rows(model.basis, model.pivots)));
            CHECK(amplification_factor(model) == doctest::Approx(ref).epsilon(1e-9));
            CHECK(model.amplification == doctest::Approx(ref).epsilon(1e-9));
        }
    }
}

TEST_CASE("projection_error") {
    oracle::Rng rng(5);
    const Tensor3 train = rng.tensor(16, 8, 4);
    const TSvdFactors full = t_svd(train);
    const TQDeimModel model = fit_tqdeim(full, 3);

    const Tensor3 in_span = t_product(model.basis, rng.tensor(3, 1, 4));
    CHECK(projection_error(model, in_span) <= 1e-9 * oracle::t_spectral_norm(in_span));

    const Tensor3 outside = t_product(lateral_slices(full.u, 5, 1), rng.tensor(1, 1, 4));
    CHECK(projection_error(model, outside) == doctest::Approx(oracle::t_spectral_norm(outside)).epsilon(1e-9));

    const double tail = t_svd_tail_spectral(full, 3);
    for (Index j = 0; j < train.cols(); ++j) {
        CHECK(projection_error(model, lateral_slices(train, j, 1)) <= tail + 1e-9);
    }
    CHECK_THROWS_AS(projection_error(model, rng.tensor(15, 1, 4)), DimensionError);
}

TEST_CASE("error_bound") {
    oracle::Rng rng(6);
    const Tensor3 train = rng.tensor(24, 10, 6);
    const TQDeimModel model = fit_tqdeim(train, 5);

    const ErrorEstimate zero = error_bound(model, t_product(model.basis, rng.tensor(5, 1, 6)));
    CHECK(zero.bound <= 1e-9);
    CHECK(zero.true_error <= 1e-9);
    CHECK(zero.proj_error <= 1e-9);

    for (int trial = 0; trial < 20; ++trial) {
        const Tensor3 f = rng.tensor(24, 1, 6);
        const ErrorEstimate e = error_bound(model, f);
        CHECK(e.bound == doctest::Approx(model.amplification * e.proj_error).epsilon(1e-14));
        CHECK(e.bound >= e.true_error * (1 - 1e-9));
        CHECK(e.true_error == doctest::Approx(
                                  oracle::t_spectral_norm(f - reconstruct_tqdeim(model, sample_rows(f, model.pivots))))
                                  .epsilon(1e-9));
    }

    SUBCASE("Q-DEIM bound in the same norm") {
        const QDeimModel qm = fit_qdeim(train, 5);
        for (int trial = 0; trial < 10; ++trial) {
            const ErrorEstimate e = error_bound(qm, rng.tensor(24, 1, 6));
            CHECK(e.bound >= e.true_error * (1 - 1e-9));
        }
    }
}

TEST_CASE("evaluate") {
    oracle::Rng rng(7);
    const Tensor3 train = rng.tensor(20, 8, 4), test = rng.tensor(20, 5, 4);
    const TQDeimModel model = fit_tqdeim(train, 4);
    const ErrorReport report = evaluate(model, test);
    REQUIRE(report.samples.size() == 5);
    double mean = 0.0;
    for (Index j = 0; j < 5; ++j) {
        const auto& s = report.samples[j];
        CHECK(s.index == j + 1);
        const ErrorEstimate e = error_bound(model, lateral_slices(test, j, 1));
        CHECK(s.true_error == doctest::Approx(e.true_error).epsilon(1e-10));
        CHECK(s.proj_error == doctest::Approx(e.proj_error).epsilon(1e-10));
        CHECK(s.bound == doctest::Approx(e.bound).epsilon(1e-10));
        CHECK(s.bound_holds());
        mean += s.true_error / 5.0;
    }
    CHECK(report.eps_abs == doctest::Approx(mean).epsilon(1e-12));
    CHECK_THROWS_AS(evaluate(model, rng.tensor(19, 2, 4)), DimensionError);
}

TEST_CASE("apriori_estimate") {
    CHECK(apriori_estimate(1, 1, 1) == doctest::Approx(1.0).epsilon(1e-15));
    // M = 1 is the matrix Q-DEIM form sqrt(N - n + 1) sqrt(4^n + 6n - 1) / 3
    CHECK(apriori_estimate(50, 4, 1) ==
          doctest::Approx(std::sqrt(47.0) * std::sqrt(256.0 + 24 - 1) / 3.0).epsilon(1e-14));
    CHECK(apriori_estimate(1000, 10, 1000) == doctest::Approx(double(oracle::apriori(1000, 10, 1000))).epsilon(1e-13));
    CHECK(apriori_estimate(5, 5, 7) == doctest::Approx(7.0 * std::sqrt(1024.0 + 29.0) / 3.0).epsilon(1e-14));
    // large n goes through the log domain
    const long double ref = oracle::apriori(4000, 600, 10);
    CHECK(log_apriori_estimate(4000, 600, 10) == doctest::Approx(double(std::log(ref))).epsilon(1e-12));
    CHECK(apriori_estimate(4000, 600, 10) == doctest::Approx(double(ref)).epsilon(1e-12));
    CHECK(std::isinf(apriori_estimate(4000, 1100, 10)));
    CHECK(apriori_estimate(4000, 501, 1) == doctest::Approx(double(oracle::apriori(4000, 501, 1))).epsilon(1e-12));
}

TEST_CASE("sensitivity_sweep") {
    oracle::Rng rng(8);
    const Tensor3 train = rng.tensor(12, 6, 4), test = rng.tensor(12, 3, 4);

    const auto full = sensitivity_sweep(train, test, {6}, {Method::tqdeim});
    REQUIRE(full.size() == 1);
    CHECK(full[0].eps_abs_train <= 1e-7);

    const auto rows = sensitivity_sweep(train, test, {5, 2, 3, 2, 5}, {Method::tqdeim, Method::qdeim});
    REQUIRE(rows.size() == 6);
    const std::vector<Index> ns{2, 3, 5, 2, 3, 5};
    for (size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].n == ns[i]);
        CHECK(rows[i].method == (i < 3 ? Method::tqdeim : Method::qdeim));
    }
    for (size_t i = 1; i < 3; ++i) {
        CHECK(rows[i].proj_train <= rows[i - 1].proj_train + 1e-12);
        CHECK(rows[i + 3].proj_train <= rows[i + 2].proj_train + 1e-12);
    }
}

TEST_CASE("property: projector identities") {
    oracle::Rng rng(9);
    for (int trial = 0; trial < 20; ++trial) {
        const Index N = rng.uniform(4, 32), q = rng.uniform(1, 5);
        const Index l = rng.uniform(2, 8);
        const Index n = rng.uniform(1, std::min(N, l));
        const TQDeimModel model = fit_tqdeim(rng.tensor(N, l, q), n);
        const Tensor3 d = full_projector(model);

        CHECK(oracle::max_abs_diff(t_product(d, d), d) <= 1e-8 * std::max(1.0, model.amplification));
        for (const auto& slice : oracle::dft_slices(d)) {
            CHECK((slice * slice - slice).cwiseAbs().maxCoeff() <= 1e-8 * std::max(1.0, model.amplification));
        }
        if (n < N) {
            const double a = oracle::t_spectral_norm(t_identity(N, q) - d);
            const double b = oracle::t_spectral_norm(d);
            CHECK(std::abs(a - b) <= 1e-8 * b);
        }
    }
}

TEST_CASE("property: q = 1 equivalence") {
    oracle::Rng rng(10);
    for (int trial = 0; trial < 20; ++trial) {
        const Index m = rng.uniform(5, 30), l = rng.uniform(2, 10);
        const Index n = rng.uniform(1, std::min(m, l));
        const Tensor3 train = rng.tensor(m, l, 1), test = rng.tensor(m, 3, 1);
        const TQDeimModel t = fit_tqdeim(train, n);
        const QDeimModel q = fit_qdeim(train, n);
        CHECK(t.pivots == q.pivots);
        const Tensor3 rt = reconstruct_tqdeim(t, sample_rows(test, t.pivots));
        const Tensor3 rq = reconstruct_qdeim(q, sample_rows(test, q.pivots));
        CHECK(oracle::max_abs_diff(rt, rq) <= 1e-10 * std::max(1.0, oracle::frob(rq)));
    }
}

TEST_CASE("property: reconstruction multiply-adds scale with n N M") {
    oracle::Rng rng(11);
    for (auto [N, n, M] : {std::tuple{40, 3, 8}, {80, 3, 8}, {40, 6, 8}, {40, 3, 16}}) {
        const TQDeimModel model = fit_tqdeim(rng.tensor(N, 8, M), n);
        const Tensor3 sampled = rng.tensor(n, 1, M);
        stats::reset_facewise_multiply_adds();
        (void)reconstruct_tqdeim(model, sampled);
        CHECK(stats::facewise_multiply_adds() == std::uint64_t(N * n * (M / 2 + 1)));
    }
}
