#include "tqdeim/cli.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <algorithm>
#include <filesystem>
#include <optional>
#include <ostream>
#include <sstream>

#include "tqdeim/datagen.hpp"
#include "tqdeim/interp.hpp"
#include "tqdeim/io.hpp"
#include "tqdeim/parallel.hpp"

namespace tqdeim::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct GlobalOptions {
    std::uint64_t seed = 0;
    bool quiet = false;
    unsigned threads = 1;
};

struct SplitOptions {
    std::optional<double> fraction;
    std::optional<Index> train_count;
    std::optional<Index> test_count;
};

json dims_json(const Dims& d) { return json::array({d.rows, d.cols, d.depth}); }

void report_warnings(const std::vector<Warning>& warnings, const GlobalOptions& g,
                     std::ostream& err) {
    if (g.quiet) return;
    for (const auto& w : warnings) err << "warning [" << w.code << "]: " << w.message << '\n';
}

// Values from a JSON config file fill any option that was not given on the command line.
template <typename T>
void from_config(const json& config, const std::string& key, const CLI::Option* opt, T& target) {
    if (opt->count() > 0 || !config.contains(key)) return;
    try {
        target = config.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError("config key '" + key + "': " + e.what());
    }
}

template <typename T>
void from_config(const json& config, const std::string& key, const CLI::Option* opt,
                 std::optional<T>& target) {
    if (opt->count() > 0 || !config.contains(key)) return;
    try {
        target = config.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError("config key '" + key + "': " + e.what());
    }
}

json load_config(const std::string& path) {
    if (path.empty()) return json::object();
    try {
        return json::parse(read_text(path));
    } catch (const json::exception& e) {
        throw ConfigError("config " + path + ": " + e.what());
    }
}

std::pair<SnapshotDataset, SnapshotDataset> apply_split(const SnapshotDataset& ds,
                                                        const SplitOptions& split,
                                                        std::uint64_t seed) {
    if (split.train_count || split.test_count) {
        if (!split.train_count || !split.test_count) {
            throw ConfigError("--train-count and --test-count must be given together");
        }
        if (split.fraction) throw ConfigError("--split conflicts with explicit counts");
        return split_dataset(ds, *split.train_count, *split.test_count, seed);
    }
    if (!split.fraction) throw ConfigError("one of --split or --train-count/--test-count is required");
    return split_dataset(ds, *split.fraction, seed);
}

void write_dataset(const fs::path& dir, const SnapshotDataset& train, const SnapshotDataset& test) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    write_t3b(dir / "train.t3b", train.tensor);
    write_t3b(dir / "test.t3b", test.tensor);
    write_text(dir / "params.json", params_json(train, test));
}

std::vector<Method> parse_methods(const std::string& name) {
    if (name == "both") return {Method::tqdeim, Method::qdeim};
    return {parse_method(name)};
}

} // namespace

std::vector<Index> parse_ranks(const std::string& spec) {
    std::vector<Index> ranks;
    auto to_index = [&](const std::string& token) -> Index {
        std::size_t used = 0;
        long long v = 0;
        try {
            v = std::stoll(token, &used);
        } catch (const std::exception&) {
            throw ConfigError("invalid rank '" + token + "' in '" + spec + "'");
        }
        if (used != token.size() || v < 1) throw ConfigError("invalid rank '" + token + "' in '" + spec + "'");
        return Index(v);
    };
    std::stringstream ss(spec);
    std::string part;
    while (std::getline(ss, part, ',')) {
        if (part.empty()) continue;
        const auto colon = part.find(':');
        if (colon == std::string::npos) {
            ranks.push_back(to_index(part));
            continue;
        }
        const Index lo = to_index(part.substr(0, colon));
        const Index hi = to_index(part.substr(colon + 1));
        if (hi < lo) throw ConfigError("empty rank range '" + part + "'");
        for (Index n = lo; n <= hi; ++n) ranks.push_back(n);
    }
    if (ranks.empty()) throw ConfigError("rank list '" + spec + "' is empty");
    std::sort(ranks.begin(), ranks.end());
    ranks.erase(std::unique(ranks.begin(), ranks.end()), ranks.end());
    return ranks;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"t-Q-DEIM sparse interpolation of tensor-valued data", "tqdeim"};
    app.require_subcommand(1);
    GlobalOptions g;
    app.add_option("--seed", g.seed, "Seed for dataset splitting and provenance");
    app.add_flag("--quiet", g.quiet, "Suppress diagnostics on stderr");
    app.add_option("--threads", g.threads, "Worker threads for per-slice kernels")
        ->check(CLI::PositiveNumber);

    // gen
    auto* gen = app.add_subcommand("gen", "Generate a PDE snapshot dataset and split it");
    gen->require_subcommand(1);
    std::string gen_out = ".";
    std::string gen_config;
    SplitOptions split;

    BurgersConfig burgers;
    auto* gen_burgers_cmd = gen->add_subcommand("burgers", "Viscous Burgers' equation");
    FhnConfig fhn;
    auto* gen_fhn_cmd = gen->add_subcommand("fhn", "FitzHugh-Nagumo equations");

    struct GenOptions {
        CLI::Option* split;
        CLI::Option* train_count;
        CLI::Option* test_count;
        CLI::Option* nx;
        CLI::Option* nt;
        CLI::Option* t_final;
        CLI::Option* substeps;
    };
    auto common = [&](CLI::App* cmd, Index& nx, Index& nt, double& t_final, Index& substeps) {
        GenOptions o{};
        o.split = cmd->add_option("--split", split.fraction, "Training fraction in (0, 1)");
        o.train_count = cmd->add_option("--train-count", split.train_count, "Training slice count");
        o.test_count = cmd->add_option("--test-count", split.test_count, "Test slice count");
        o.nx = cmd->add_option("--nx", nx, "Grid points (per variable)");
        o.nt = cmd->add_option("--nt", nt, "Stored time snapshots");
        o.t_final = cmd->add_option("--t-final", t_final, "Final time");
        o.substeps = cmd->add_option("--substeps", substeps, "Internal steps per snapshot (0 = auto)");
        cmd->add_option("--out", gen_out, "Output directory");
        cmd->add_option("--config", gen_config, "JSON config file")->check(CLI::ExistingFile);
        return o;
    };
    const GenOptions bo = common(gen_burgers_cmd, burgers.nx, burgers.nt, burgers.t_final, burgers.substeps);
    auto* b_mu_lo = gen_burgers_cmd->add_option("--mu-lo", burgers.mu_lo, "Smallest viscosity");
    auto* b_mu_hi = gen_burgers_cmd->add_option("--mu-hi", burgers.mu_hi, "Largest viscosity");
    auto* b_params = gen_burgers_cmd->add_option("--n-params", burgers.n_params, "Viscosity samples");
    const GenOptions fo = common(gen_fhn_cmd, fhn.nx, fhn.nt, fhn.t_final, fhn.substeps);
    auto* f_eps_lo = gen_fhn_cmd->add_option("--eps-lo", fhn.eps_lo, "Smallest epsilon");
    auto* f_eps_hi = gen_fhn_cmd->add_option("--eps-hi", fhn.eps_hi, "Largest epsilon");
    auto* f_c_lo = gen_fhn_cmd->add_option("--c-lo", fhn.c_lo, "Smallest c");
    auto* f_c_hi = gen_fhn_cmd->add_option("--c-hi", fhn.c_hi, "Largest c");
    auto* f_grid = gen_fhn_cmd->add_option("--grid", fhn.grid, "Samples per parameter");

    // train
    auto* train = app.add_subcommand("train", "Fit a t-Q-DEIM or Q-DEIM model");
    std::string train_input, train_out, train_method = "tqdeim";
    Index train_rank = 0;
    Index fourier_slice = 1;
    train->add_option("--input", train_input, "Training tensor (.t3b)")->required();
    train->add_option("--rank", train_rank, "Reduced dimension n")->required();
    train->add_option("--method", train_method, "tqdeim or qdeim");
    train->add_option("--out", train_out, "Model bundle directory")->required();
    train->add_option("--fourier-slice", fourier_slice, "1-based Fourier slice used for pivoting");

    // infer
    auto* infer = app.add_subcommand("infer", "Reconstruct full tensors from sampled rows");
    std::string infer_model, infer_samples, infer_full, infer_out;
    infer->add_option("--model", infer_model, "Model bundle directory")->required();
    auto* samples_opt = infer->add_option("--samples", infer_samples, "Sampled rows (n, l, q) in pivot order");
    auto* full_opt = infer->add_option("--from-full", infer_full, "Full tensor to sample at the pivots");
    samples_opt->excludes(full_opt);
    infer->add_option("--out", infer_out, "Reconstruction (.t3b)")->required();

    // evaluate
    auto* evaluate_cmd = app.add_subcommand("evaluate", "Error report with the a-posteriori bound");
    std::string eval_model, eval_input, eval_out, eval_format = "csv";
    evaluate_cmd->add_option("--model", eval_model, "Model bundle directory")->required();
    evaluate_cmd->add_option("--input", eval_input, "Full test tensor (.t3b)")->required();
    evaluate_cmd->add_option("--out", eval_out, "Report path")->required();
    evaluate_cmd->add_option("--format", eval_format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));

    // sweep
    auto* sweep = app.add_subcommand("sweep", "Errors as a function of the reduced dimension");
    std::string sweep_train, sweep_test, sweep_ranks, sweep_out, sweep_method = "both";
    sweep->add_option("--train", sweep_train, "Training tensor (.t3b)")->required();
    sweep->add_option("--test", sweep_test, "Test tensor (.t3b)")->required();
    sweep->add_option("--ranks", sweep_ranks, "Rank list, e.g. 2:9 or 3,8,10")->required();
    sweep->add_option("--method", sweep_method, "tqdeim, qdeim or both");
    sweep->add_option("--out", sweep_out, "Sweep CSV path")->required();
    sweep->add_option("--fourier-slice", fourier_slice, "1-based Fourier slice used for pivoting");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    }

    set_num_threads(g.threads);
    try {
        if (gen->parsed()) {
            const json config = load_config(gen_config);
            const bool is_burgers = gen_burgers_cmd->parsed();
            const GenOptions& o = is_burgers ? bo : fo;
            from_config(config, "split", o.split, split.fraction);
            from_config(config, "train_count", o.train_count, split.train_count);
            from_config(config, "test_count", o.test_count, split.test_count);
            SnapshotDataset ds;
            std::string model;
            if (is_burgers) {
                from_config(config, "nx", o.nx, burgers.nx);
                from_config(config, "nt", o.nt, burgers.nt);
                from_config(config, "t_final", o.t_final, burgers.t_final);
                from_config(config, "substeps", o.substeps, burgers.substeps);
                from_config(config, "mu_lo", b_mu_lo, burgers.mu_lo);
                from_config(config, "mu_hi", b_mu_hi, burgers.mu_hi);
                from_config(config, "n_params", b_params, burgers.n_params);
                burgers.seed = g.seed;
                ds = gen_burgers(burgers);
                model = "burgers";
            } else {
                from_config(config, "nx", o.nx, fhn.nx);
                from_config(config, "nt", o.nt, fhn.nt);
                from_config(config, "t_final", o.t_final, fhn.t_final);
                from_config(config, "substeps", o.substeps, fhn.substeps);
                from_config(config, "eps_lo", f_eps_lo, fhn.eps_lo);
                from_config(config, "eps_hi", f_eps_hi, fhn.eps_hi);
                from_config(config, "c_lo", f_c_lo, fhn.c_lo);
                from_config(config, "c_hi", f_c_hi, fhn.c_hi);
                from_config(config, "grid", f_grid, fhn.grid);
                fhn.seed = g.seed;
                ds = gen_fhn(fhn);
                model = "fhn";
            }
            // Validate the split before the (possibly long) write.
            auto [tr, te] = apply_split(ds, split, g.seed);
            write_dataset(gen_out, tr, te);
            out << json{{"command", "gen"},
                        {"model", model},
                        {"train_dims", dims_json(tr.tensor.dims())},
                        {"test_dims", dims_json(te.tensor.dims())},
                        {"out", gen_out}}
                       .dump()
                << '\n';
        } else if (train->parsed()) {
            const Method method = parse_method(train_method);
            const Tensor3 data = read_tensor(train_input);
            FitOptions options;
            options.pivot_slice = fourier_slice;
            options.seed = g.seed;
            json summary{{"command", "train"}, {"method", to_string(method)}, {"rank", train_rank}};
            Index rows = data.rows();
            Index depth = data.depth();
            if (method == Method::tqdeim) {
                const auto model = fit_tqdeim(data, train_rank, options);
                save_model(train_out, model);
                summary["pivots"] = model.pivots.one_based();
                summary["amplification"] = model.amplification;
                report_warnings(model.warnings, g, err);
            } else {
                const auto model = fit_qdeim(data, train_rank, options);
                save_model(train_out, model);
                summary["pivots"] = model.pivots.one_based();
                summary["amplification"] = model.amplification;
                depth = 1;
                report_warnings(model.warnings, g, err);
            }
            summary["apriori_estimate"] = apriori_estimate(rows, train_rank, depth);
            summary["out"] = train_out;
            out << summary.dump() << '\n';
        } else if (infer->parsed()) {
            if (infer_samples.empty() && infer_full.empty()) {
                throw ConfigError("one of --samples or --from-full is required");
            }
            const AnyModel any = load_model(infer_model);
            const IndexSet& pivots = std::visit([](const auto& m) -> const IndexSet& { return m.pivots; }, any);
            const Tensor3 sampled = infer_samples.empty() ? sample_rows(read_tensor(infer_full), pivots)
                                                          : read_tensor(infer_samples);
            if (sampled.rows() != pivots.size()) {
                throw DimensionError("sampled tensor has " + std::to_string(sampled.rows()) +
                                     " rows but the model has " + std::to_string(pivots.size()) +
                                     " pivots");
            }
            const Tensor3 approx = std::visit(
                [&](const auto& m) {
                    if constexpr (std::is_same_v<std::decay_t<decltype(m)>, TQDeimModel>) {
                        return reconstruct_tqdeim(m, sampled);
                    } else {
                        return reconstruct_qdeim(m, sampled);
                    }
                },
                any);
            write_t3b(infer_out, approx);
            out << json{{"command", "infer"}, {"dims", dims_json(approx.dims())}, {"out", infer_out}}.dump()
                << '\n';
        } else if (evaluate_cmd->parsed()) {
            const AnyModel any = load_model(eval_model);
            const Tensor3 data = read_tensor(eval_input);
            const ErrorReport report = std::visit([&](const auto& m) { return evaluate(m, data); }, any);
            for (const auto& s : report.samples) {
                if (!s.bound_holds()) {
                    throw NumericalError("error bound violated at sample " + std::to_string(s.index));
                }
            }
            report_warnings(report.warnings, g, err);
            write_report(eval_out, report, eval_format == "json" ? ReportFormat::json : ReportFormat::csv);
            out << json{{"command", "evaluate"},
                        {"method", to_string(report.method)},
                        {"rank", report.rank},
                        {"samples", report.samples.size()},
                        {"eps_abs", report.eps_abs},
                        {"eps_rel", report.eps_rel},
                        {"amplification", report.amplification},
                        {"out", eval_out}}
                       .dump()
                << '\n';
        } else if (sweep->parsed()) {
            const auto ranks = parse_ranks(sweep_ranks);
            const auto methods = parse_methods(sweep_method);
            const Tensor3 tr = read_tensor(sweep_train);
            const Tensor3 te = read_tensor(sweep_test);
            FitOptions options;
            options.pivot_slice = fourier_slice;
            options.seed = g.seed;
            const auto rows = sensitivity_sweep(tr, te, ranks, methods, options);
            write_text(sweep_out, sweep_csv(rows));
            out << json{{"command", "sweep"}, {"rows", rows.size()}, {"ranks", ranks}, {"out", sweep_out}}.dump()
                << '\n';
        }
    } catch (const ConfigError& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const IoError& e) {
        err << "i/o error: " << e.what() << '\n';
        return kExitIo;
    } catch (const FormatError& e) {
        err << "format error: " << e.what() << '\n';
        return kExitIo;
    } catch (const Error& e) {
        err << "numerical error: " << e.what() << '\n';
        return kExitNumerical;
    }
    return kExitOk;
}

} // namespace tqdeim::cli
