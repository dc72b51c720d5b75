#include "tqdeim/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <string>

#include "tqdeim/parallel.hpp"

namespace tqdeim {

namespace {

constexpr double kDivergence = 1e3;

// Factored tridiagonal system (Thomas algorithm) reused across time steps.
class Tridiagonal {
public:
    Tridiagonal(std::vector<double> lower, std::vector<double> diag, std::vector<double> upper)
        : lower_(std::move(lower)), upper_(std::move(upper)), pivot_(diag.size()) {
        const std::size_t n = diag.size();
        pivot_[0] = diag[0];
        for (std::size_t i = 1; i < n; ++i) {
            lower_[i] /= pivot_[i - 1];
            pivot_[i] = diag[i] - lower_[i] * upper_[i - 1];
        }
    }

    void solve(std::vector<double>& rhs) const {
        const std::size_t n = pivot_.size();
        for (std::size_t i = 1; i < n; ++i) rhs[i] -= lower_[i] * rhs[i - 1];
        rhs[n - 1] /= pivot_[n - 1];
        for (std::size_t i = n - 1; i-- > 0;) rhs[i] = (rhs[i] - upper_[i] * rhs[i + 1]) / pivot_[i];
    }

private:
    std::vector<double> lower_;
    std::vector<double> upper_;
    std::vector<double> pivot_;
};

std::vector<double> linspace(double lo, double hi, Index count) {
    std::vector<double> out(count);
    for (Index i = 0; i < count; ++i) {
        out[i] = count == 1 ? lo : lo + (hi - lo) * double(i) / double(count - 1);
    }
    return out;
}

std::vector<double> logspace(double lo, double hi, Index count) {
    auto out = linspace(std::log(lo), std::log(hi), count);
    for (double& v : out) v = std::exp(v);
    if (count > 1) {
        out.front() = lo;
        out.back() = hi;
    }
    return out;
}

void check_divergence(const std::vector<double>& w, const char* model) {
    for (double v : w) {
        if (!std::isfinite(v) || std::abs(v) > kDivergence) {
            throw NumericalError(std::string(model) + ": solution diverged (|w| > 1e3)");
        }
    }
}

void validate(const BurgersConfig& cfg) {
    if (cfg.nx < 8 || cfg.nt < 8) throw ConfigError("burgers: nx and nt must be at least 8");
    if (!(cfg.mu_lo > 0.0) || !(cfg.mu_lo <= cfg.mu_hi)) {
        throw ConfigError("burgers: viscosity range must satisfy 0 < mu_lo <= mu_hi");
    }
    if (cfg.n_params < 1) throw ConfigError("burgers: n_params must be positive");
    if (!(cfg.t_final > 0.0)) throw ConfigError("burgers: t_final must be positive");
}

void validate(const FhnConfig& cfg) {
    if (cfg.nx < 4 || cfg.nt < 2 || cfg.grid < 1) throw ConfigError("fhn: dimensions must be positive");
    if (!(cfg.eps_lo > 0.0) || !(cfg.eps_lo <= cfg.eps_hi)) {
        throw ConfigError("fhn: epsilon range must satisfy 0 < eps_lo <= eps_hi");
    }
    if (!(cfg.c_lo >= 0.0) || !(cfg.c_lo <= cfg.c_hi)) {
        throw ConfigError("fhn: c range must satisfy 0 <= c_lo <= c_hi");
    }
    if (!(cfg.t_final > 0.0)) throw ConfigError("fhn: t_final must be positive");
}

// Unbiased draw in [0, bound) from raw 64-bit output, identical on every platform.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
        const std::uint64_t r = rng();
        if (r >= threshold) return r % bound;
    }
}

SnapshotDataset subset(const SnapshotDataset& ds, std::vector<Index> cols, const char* tag) {
    std::sort(cols.begin(), cols.end());
    SnapshotDataset out;
    out.tensor = select_lateral(ds.tensor, cols);
    out.param_names = ds.param_names;
    for (Index c : cols) {
        out.params.push_back(ds.params[c]);
        out.source_indices.push_back(ds.source_indices[c]);
    }
    out.space = ds.space;
    out.time = ds.time;
    out.split = tag;
    return out;
}

} // namespace

Eigen::MatrixXd burgers_trajectory(const BurgersConfig& cfg, double mu) {
    validate(cfg);
    const Index nx = cfg.nx;
    const double dx = 1.0 / double(nx - 1);
    const double dt_out = cfg.t_final / double(cfg.nt - 1);

    std::vector<double> w(nx);
    for (Index i = 0; i < nx; ++i) w[i] = std::sin(std::numbers::pi * double(i) * dx);
    w.front() = w.back() = 0.0;
    const double wmax = std::max(1e-12, *std::max_element(w.begin(), w.end()));

    Index substeps = cfg.substeps;
    if (substeps == 0) {
        const double dt_max = std::min(0.5 * dx / wmax, 0.5 * mu / (wmax * wmax));
        substeps = Index(std::ceil(dt_out / dt_max));
    }
    const double dt = dt_out / double(substeps);

    // Backward Euler diffusion on interior nodes 1..nx-2.
    const Index n = nx - 2;
    const double r = mu * dt / (dx * dx);
    const Tridiagonal implicit(std::vector<double>(n, -r), std::vector<double>(n, 1.0 + 2.0 * r),
                               std::vector<double>(n, -r));

    Eigen::MatrixXd out(Eigen::Index(nx), Eigen::Index(cfg.nt));
    out.col(0) = Eigen::Map<const Eigen::VectorXd>(w.data(), Eigen::Index(nx));
    std::vector<double> rhs(n);
    for (Index step = 1; step < cfg.nt; ++step) {
        for (Index sub = 0; sub < substeps; ++sub) {
            double speed = 0.0;
            for (double v : w) speed = std::max(speed, std::abs(v));
            if (speed * dt > dx) {
                throw NumericalError("burgers: convection step violates CFL (dt = " +
                                     std::to_string(dt) + ", max|w| = " + std::to_string(speed) + ")");
            }
            // Conservative central flux for -(w^2 / 2)_x.
            for (Index i = 1; i + 1 < nx; ++i) {
                const double flux = 0.25 * (w[i + 1] * w[i + 1] - w[i - 1] * w[i - 1]) / dx;
                rhs[i - 1] = w[i] - dt * flux;
            }
            implicit.solve(rhs);
            std::copy(rhs.begin(), rhs.end(), w.begin() + 1);
            check_divergence(w, "burgers");
        }
        out.col(Eigen::Index(step)) = Eigen::Map<const Eigen::VectorXd>(w.data(), Eigen::Index(nx));
    }
    return out;
}

SnapshotDataset gen_burgers(const BurgersConfig& cfg) {
    validate(cfg);
    SnapshotDataset ds;
    ds.param_names = {"mu"};
    const auto mus = logspace(cfg.mu_lo, cfg.mu_hi, cfg.n_params);
    ds.space = linspace(0.0, 1.0, cfg.nx);
    ds.time = linspace(0.0, cfg.t_final, cfg.nt);
    ds.tensor = Tensor3(cfg.nx, cfg.n_params, cfg.nt);

    std::vector<Eigen::MatrixXd> runs(cfg.n_params);
    parallel_for(cfg.n_params, [&](Index p) { runs[p] = burgers_trajectory(cfg, mus[p]); });
    for (Index p = 0; p < cfg.n_params; ++p) {
        ds.params.push_back({mus[p]});
        ds.source_indices.push_back(p);
        for (Index k = 0; k < cfg.nt; ++k) {
            ds.tensor.slice(k).col(Eigen::Index(p)) = runs[p].col(Eigen::Index(k));
        }
    }
    return ds;
}

double fhn_stimulus(double t) { return 50000.0 * t * t * t * std::exp(-15.0 * t); }

Eigen::MatrixXd fhn_trajectory(const FhnConfig& cfg, double eps, double c) {
    validate(cfg);
    const Index nx = cfg.nx;
    const double dx = 1.0 / double(nx - 1);
    const double dt_out = cfg.t_final / double(cfg.nt - 1);
    Index substeps = cfg.substeps;
    if (substeps == 0) substeps = Index(std::ceil(dt_out / (0.05 * eps)));
    const double dt = dt_out / double(substeps);

    // w1_t = eps w1_xx + (g(w1) - w2 + c) / eps with ghost-node Neumann rows.
    const double r = eps * dt / (dx * dx);
    std::vector<double> lower(nx, -r), diag(nx, 1.0 + 2.0 * r), upper(nx, -r);
    upper[0] = -2.0 * r;
    lower[nx - 1] = -2.0 * r;
    const Tridiagonal implicit(std::move(lower), std::move(diag), std::move(upper));

    std::vector<double> w1(nx, 0.001), w2(nx, 0.001), rhs(nx);
    Eigen::MatrixXd out(Eigen::Index(2 * nx), Eigen::Index(cfg.nt));
    auto store = [&](Index col) {
        for (Index i = 0; i < nx; ++i) {
            out(Eigen::Index(i), Eigen::Index(col)) = w1[i];
            out(Eigen::Index(nx + i), Eigen::Index(col)) = w2[i];
        }
    };
    store(0);

    for (Index step = 1; step < cfg.nt; ++step) {
        for (Index sub = 0; sub < substeps; ++sub) {
            const double t_next = double(step - 1) * dt_out + double(sub + 1) * dt;
            for (Index i = 0; i < nx; ++i) {
                const double v = w1[i];
                const double g = cfg.kinetics ? v * (v - 0.1) * (1.0 - v) : 0.0;
                rhs[i] = v + dt * (g - w2[i] + c) / eps;
            }
            // Ghost node w_{-1} = w_1 + 2 dx I_ext enters the first row.
            if (cfg.stimulus) rhs[0] += r * 2.0 * dx * fhn_stimulus(t_next);
            for (Index i = 0; i < nx; ++i) w2[i] += dt * (cfg.b * w1[i] - cfg.gamma * w2[i] + c);
            implicit.solve(rhs);
            w1.swap(rhs);
        }
        check_divergence(w1, "fhn");
        check_divergence(w2, "fhn");
        store(step);
    }
    return out;
}

SnapshotDataset gen_fhn(const FhnConfig& cfg) {
    validate(cfg);
    SnapshotDataset ds;
    ds.param_names = {"eps", "c"};
    const auto eps = linspace(cfg.eps_lo, cfg.eps_hi, cfg.grid);
    const auto cs = linspace(cfg.c_lo, cfg.c_hi, cfg.grid);
    const Index count = cfg.grid * cfg.grid;
    ds.space = linspace(0.0, 1.0, cfg.nx);
    ds.time = linspace(0.0, cfg.t_final, cfg.nt);
    ds.tensor = Tensor3(2 * cfg.nx, count, cfg.nt);

    std::vector<Eigen::MatrixXd> runs(count);
    parallel_for(count, [&](Index p) {
        runs[p] = fhn_trajectory(cfg, eps[p / cfg.grid], cs[p % cfg.grid]);
    });
    for (Index p = 0; p < count; ++p) {
        ds.params.push_back({eps[p / cfg.grid], cs[p % cfg.grid]});
        ds.source_indices.push_back(p);
        for (Index k = 0; k < cfg.nt; ++k) {
            ds.tensor.slice(k).col(Eigen::Index(p)) = runs[p].col(Eigen::Index(k));
        }
    }
    return ds;
}

std::pair<SnapshotDataset, SnapshotDataset> split_dataset(const SnapshotDataset& ds,
                                                          Index train_count, Index test_count,
                                                          std::uint64_t seed) {
    const Index count = ds.tensor.cols();
    if (train_count < 1 || test_count < 1) throw ConfigError("split: both splits must be nonempty");
    if (train_count + test_count > count) {
        throw ConfigError("split: " + std::to_string(train_count) + " + " +
                          std::to_string(test_count) + " exceeds " + std::to_string(count) +
                          " slices");
    }
    std::vector<Index> order(count);
    std::iota(order.begin(), order.end(), Index(0));
    std::mt19937_64 rng(seed);
    for (Index i = count; i-- > 1;) std::swap(order[i], order[bounded(rng, i + 1)]);

    std::vector<Index> train(order.begin(), order.begin() + std::ptrdiff_t(train_count));
    std::vector<Index> test(order.begin() + std::ptrdiff_t(train_count),
                            order.begin() + std::ptrdiff_t(train_count + test_count));
    return {subset(ds, std::move(train), "train"), subset(ds, std::move(test), "test")};
}

std::pair<SnapshotDataset, SnapshotDataset> split_dataset(const SnapshotDataset& ds,
                                                          double train_fraction,
                                                          std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw ConfigError("split: train fraction must lie in (0, 1)");
    }
    const Index count = ds.tensor.cols();
    const auto train = Index(std::floor(train_fraction * double(count)));
    if (train == 0 || train == count) {
        throw ConfigError("split: fraction " + std::to_string(train_fraction) +
                          " leaves an empty split of " + std::to_string(count) + " slices");
    }
    return split_dataset(ds, train, count - train, seed);
}

} // namespace tqdeim
