#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "tqdeim/tensor.hpp"

namespace tqdeim {

// Viscous Burgers w_t = -w w_x + mu w_xx on [0, 1], w(0) = w(1) = 0, w(x, 0) = sin(pi x).
struct BurgersConfig {
    Index nx = 1000;
    Index nt = 1000;  // stored snapshots, including t = 0
    double t_final = 2.0;
    double mu_lo = 0.004;
    double mu_hi = 0.04;
    Index n_params = 50;  // log-uniformly spaced viscosities
    std::uint64_t seed = 0;
    // Internal steps per stored snapshot; 0 picks the smallest count that keeps
    // the explicit convection step within half the CFL and advection-diffusion limits.
    Index substeps = 0;
};

// FitzHugh-Nagumo on [0, 1]:
//   eps w1_t = eps^2 w1_xx + g(w1) - w2 + c,   w2_t = b w1 - gamma w2 + c
//   w1_x(0, t) = -I_ext(t), w1_x(1, t) = 0, w1 = w2 = 0.001 at t = 0
// with g(w) = w (w - 0.1)(1 - w) and I_ext(t) = 50000 t^3 exp(-15 t).
struct FhnConfig {
    Index nx = 512;  // nodes per variable
    Index nt = 501;
    double t_final = 5.0;
    double eps_lo = 0.01;
    double eps_hi = 0.04;
    double c_lo = 0.025;
    double c_hi = 0.075;
    double b = 0.5;
    double gamma = 2.0;
    Index grid = 6;  // samples per parameter, grid x grid total
    std::uint64_t seed = 0;
    Index substeps = 0;
    bool kinetics = true;  // false drops g(w1)
    bool stimulus = true;  // false drops I_ext
};

struct SnapshotDataset {
    Tensor3 tensor;  // (space, parameter, time)
    std::vector<std::string> param_names;
    std::vector<std::vector<double>> params;  // aligned with lateral slices
    std::vector<Index> source_indices;        // 0-based lateral index in the unsplit dataset
    std::vector<double> space;
    std::vector<double> time;
    std::string split = "full";
};

SnapshotDataset gen_burgers(const BurgersConfig& cfg);

// A single Burgers trajectory as an (nx, nt) matrix, row = grid node.
Eigen::MatrixXd burgers_trajectory(const BurgersConfig& cfg, double mu);

SnapshotDataset gen_fhn(const FhnConfig& cfg);

// Rows 0..nx-1 hold w1, rows nx..2nx-1 hold w2; one column per stored time.
Eigen::MatrixXd fhn_trajectory(const FhnConfig& cfg, double eps, double c);

double fhn_stimulus(double t);

// floor(train_fraction * count) slices go to training, the rest to test.
std::pair<SnapshotDataset, SnapshotDataset> split_dataset(const SnapshotDataset& ds,
                                                          double train_fraction,
                                                          std::uint64_t seed);

// Explicit counts; train_count + test_count may be less than the slice count.
std::pair<SnapshotDataset, SnapshotDataset> split_dataset(const SnapshotDataset& ds,
                                                          Index train_count, Index test_count,
                                                          std::uint64_t seed);

} // namespace tqdeim
