#include "tqdeim/io.hpp"

#include "json.hpp"

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>

namespace tqdeim {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr char kMagic[4] = {'T', '3', 'B', '1'};

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int b = 0; b < 8; ++b) out.push_back(std::uint8_t(v >> (8 * b)));
}

std::uint64_t get_u64(std::span<const std::uint8_t> bytes, std::size_t offset) {
    std::uint64_t v = 0;
    for (int b = 0; b < 8; ++b) v |= std::uint64_t(bytes[offset + std::size_t(b)]) << (8 * b);
    return v;
}

void put_f64(std::vector<std::uint8_t>& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

double get_f64(std::span<const std::uint8_t> bytes, std::size_t offset) {
    return std::bit_cast<double>(get_u64(bytes, offset));
}

std::vector<std::uint8_t> header(std::uint8_t dtype, const Dims& dims) {
    std::vector<std::uint8_t> out(kMagic, kMagic + 4);
    out.push_back(dtype);
    out.insert(out.end(), 3, 0);
    put_u64(out, dims.rows);
    put_u64(out, dims.cols);
    put_u64(out, dims.depth);
    return out;
}

std::vector<std::uint8_t> read_bytes(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError("failed reading " + path.string());
    return bytes;
}

void write_bytes(const fs::path& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
    if (!out) throw IoError("failed writing " + path.string());
}

std::string timestamp() {
    std::time_t now = 0;
    if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) {
        now = std::time_t(std::strtoll(epoch, nullptr, 10));
    } else {
        now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    }
    std::tm utc{};
    gmtime_r(&now, &utc);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &utc);
    return buf;
}

json warnings_json(const std::vector<Warning>& warnings) {
    json out = json::array();
    for (const auto& w : warnings) out.push_back({{"code", w.code}, {"message", w.message}});
    return out;
}

std::vector<Warning> warnings_from(const json& j) {
    std::vector<Warning> out;
    if (!j.contains("warnings")) return out;
    for (const auto& w : j.at("warnings")) out.push_back({w.at("code"), w.at("message")});
    return out;
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

json read_json(const fs::path& path) {
    if (!fs::exists(path)) throw IoError("missing file " + path.string());
    try {
        return json::parse(read_text(path));
    } catch (const json::exception& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

void save_bundle(const fs::path& dir, Method method, const Tensor3& u, const Tensor3& d,
                 const IndexSet& pivots, Index pivot_slice, double amplification,
                 const Provenance& provenance, const std::vector<Warning>& warnings) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

    write_t3b(dir / "U.t3b", u);
    write_t3b(dir / "D.t3b", d);
    write_json(dir / "pivots.json", json{{"indices", pivots.one_based()},
                                         {"rank", pivots.size()},
                                         {"pivot_slice", pivot_slice}});
    const auto& td = provenance.train_dims;
    write_json(dir / "meta.json",
               json{{"format_version", kModelFormatVersion},
                    {"method", to_string(method)},
                    {"dims", {u.rows(), u.cols(), u.depth()}},
                    {"train_dims", {td.rows, td.cols, td.depth}},
                    {"seed", provenance.seed},
                    {"created", timestamp()},
                    {"amplification", amplification},
                    {"warnings", warnings_json(warnings)}});
}

} // namespace

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<std::uint8_t> encode_t3b(const Tensor3& a) {
    auto out = header(kT3bReal, a.dims());
    out.reserve(kT3bHeaderSize + 8 * a.size());
    for (double v : a.data()) put_f64(out, v);
    return out;
}

std::vector<std::uint8_t> encode_t3b(const FourierTensor3& a) {
    auto out = header(kT3bComplex, a.dims());
    out.reserve(kT3bHeaderSize + 16 * a.size());
    for (const Complex& v : a.data()) {
        put_f64(out, v.real());
        put_f64(out, v.imag());
    }
    return out;
}

AnyTensor decode_t3b(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kT3bHeaderSize) throw FormatError("t3b: truncated header");
    if (!std::equal(kMagic, kMagic + 4, bytes.begin())) throw FormatError("t3b: bad magic");
    const std::uint8_t dtype = bytes[4];
    if (dtype != kT3bReal && dtype != kT3bComplex) {
        throw FormatError("t3b: unknown dtype " + std::to_string(dtype));
    }
    if (bytes[5] != 0 || bytes[6] != 0 || bytes[7] != 0) throw FormatError("t3b: reserved bytes not zero");
    const std::uint64_t m = get_u64(bytes, 8);
    const std::uint64_t l = get_u64(bytes, 16);
    const std::uint64_t q = get_u64(bytes, 24);
    if (m == 0 || l == 0 || q == 0) throw FormatError("t3b: zero dimension");
    const std::uint64_t width = dtype == kT3bReal ? 8 : 16;
    const std::uint64_t limit = (bytes.size() - kT3bHeaderSize) / width;
    if (m > limit || l > limit / m || q > limit / (m * l)) throw FormatError("t3b: truncated payload");
    const std::uint64_t count = m * l * q;
    if (bytes.size() != kT3bHeaderSize + count * width) {
        throw FormatError("t3b: payload length " + std::to_string(bytes.size() - kT3bHeaderSize) +
                          " does not match dims");
    }

    if (dtype == kT3bReal) {
        std::vector<double> data(count);
        for (std::uint64_t i = 0; i < count; ++i) {
            data[i] = get_f64(bytes, kT3bHeaderSize + 8 * i);
            if (!std::isfinite(data[i])) throw FormatError("t3b: non-finite value");
        }
        return Tensor3(m, l, q, std::move(data));
    }
    std::vector<Complex> data(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        const double re = get_f64(bytes, kT3bHeaderSize + 16 * i);
        const double im = get_f64(bytes, kT3bHeaderSize + 16 * i + 8);
        if (!std::isfinite(re) || !std::isfinite(im)) throw FormatError("t3b: non-finite value");
        data[i] = Complex(re, im);
    }
    return FourierTensor3(m, l, q, std::move(data));
}

void write_t3b(const fs::path& path, const Tensor3& a) { write_bytes(path, encode_t3b(a)); }

void write_t3b(const fs::path& path, const FourierTensor3& a) { write_bytes(path, encode_t3b(a)); }

AnyTensor read_t3b(const fs::path& path) {
    const auto bytes = read_bytes(path);
    try {
        return decode_t3b(bytes);
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

Tensor3 read_tensor(const fs::path& path) {
    auto any = read_t3b(path);
    if (auto* real = std::get_if<Tensor3>(&any)) return std::move(*real);
    throw FormatError(path.string() + ": expected a real tensor, found complex");
}

void save_model(const fs::path& dir, const TQDeimModel& model) {
    save_bundle(dir, Method::tqdeim, model.basis, model.d, model.pivots, model.pivot_slice,
                model.amplification, model.provenance, model.warnings);
}

void save_model(const fs::path& dir, const QDeimModel& model) {
    auto as_tensor = [](const Eigen::MatrixXd& m) {
        Tensor3 t(Index(m.rows()), Index(m.cols()), 1);
        t.slice(0) = m;
        return t;
    };
    save_bundle(dir, Method::qdeim, as_tensor(model.basis), as_tensor(model.d), model.pivots, 1,
                model.amplification, model.provenance, model.warnings);
}

AnyModel load_model(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw IoError("model directory " + dir.string() + " not found");
    const json meta = read_json(dir / "meta.json");
    const json piv = read_json(dir / "pivots.json");
    const Tensor3 u = read_tensor(dir / "U.t3b");
    const Tensor3 d = read_tensor(dir / "D.t3b");

    Method method;
    std::vector<Index> dims;
    IndexSet pivots;
    Index rank = 0;
    Index pivot_slice = 1;
    Provenance provenance;
    double amplification = 0.0;
    try {
        if (meta.at("format_version").get<int>() != kModelFormatVersion) {
            throw FormatError("unsupported model format version");
        }
        method = parse_method(meta.at("method").get<std::string>());
        dims = meta.at("dims").get<std::vector<Index>>();
        const auto td = meta.at("train_dims").get<std::vector<Index>>();
        if (td.size() != 3) throw FormatError("train_dims must have three entries");
        provenance.train_dims = Dims{td[0], td[1], td[2]};
        provenance.seed = meta.at("seed").get<std::uint64_t>();
        amplification = meta.at("amplification").get<double>();
        pivots = IndexSet::from_one_based(piv.at("indices").get<std::vector<std::int64_t>>());
        rank = piv.at("rank").get<Index>();
        pivot_slice = piv.at("pivot_slice").get<Index>();
    } catch (const json::exception& e) {
        throw FormatError(dir.string() + ": malformed model metadata: " + e.what());
    } catch (const ConfigError& e) {
        throw FormatError(dir.string() + ": " + e.what());
    } catch (const DimensionError& e) {
        throw FormatError(dir.string() + ": " + e.what());
    }

    auto inconsistent = [&](const std::string& what) {
        return FormatError(dir.string() + ": inconsistent model bundle: " + what);
    };
    if (dims.size() != 3 || Dims{dims[0], dims[1], dims[2]} != u.dims()) {
        throw inconsistent("meta dims do not match U.t3b");
    }
    if (d.dims() != u.dims()) throw inconsistent("D.t3b and U.t3b differ in shape");
    if (pivots.size() != rank || rank != u.cols()) throw inconsistent("pivot count differs from rank");
    try {
        pivots.check_bound(u.rows());
    } catch (const DimensionError& e) {
        throw inconsistent(e.what());
    }

    const auto warnings = warnings_from(meta);
    if (method == Method::tqdeim) {
        TQDeimModel model;
        model.basis = u;
        model.d = d;
        model.pivots = std::move(pivots);
        model.pivot_slice = pivot_slice;
        model.amplification = amplification;
        model.provenance = provenance;
        model.warnings = warnings;
        return model;
    }
    if (u.depth() != 1) throw inconsistent("qdeim bundle must hold depth-1 tensors");
    QDeimModel model;
    model.basis = u.slice(0);
    model.d = d.slice(0);
    model.pivots = std::move(pivots);
    model.amplification = amplification;
    model.provenance = provenance;
    model.warnings = warnings;
    return model;
}

std::string report_csv(const ErrorReport& report) {
    std::ostringstream out;
    out << "sample_index,true_error,proj_error,bound,rel_frob_error\n";
    for (const auto& s : report.samples) {
        out << s.index << ',' << format_double(s.true_error) << ',' << format_double(s.proj_error)
            << ',' << format_double(s.bound) << ',' << format_double(s.rel_frob_error) << '\n';
    }
    return out.str();
}

std::string report_json(const ErrorReport& report) {
    json samples = json::array();
    for (const auto& s : report.samples) {
        samples.push_back({{"sample_index", s.index},
                           {"true_error", s.true_error},
                           {"proj_error", s.proj_error},
                           {"bound", s.bound},
                           {"rel_frob_error", s.rel_frob_error}});
    }
    const json j{{"method", to_string(report.method)},
                 {"rank", report.rank},
                 {"amplification", report.amplification},
                 {"eps_abs", report.eps_abs},
                 {"eps_rel", report.eps_rel},
                 {"samples", samples},
                 {"warnings", warnings_json(report.warnings)}};
    return j.dump(2) + "\n";
}

void write_report(const fs::path& path, const ErrorReport& report, ReportFormat format) {
    write_text(path, format == ReportFormat::csv ? report_csv(report) : report_json(report));
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::ostringstream out;
    out << "method,n,eps_abs_train,eps_abs_test,eps_rel_train,eps_rel_test,proj_train,proj_test,"
           "amplification\n";
    for (const auto& r : rows) {
        out << to_string(r.method) << ',' << r.n << ',' << format_double(r.eps_abs_train) << ','
            << format_double(r.eps_abs_test) << ',' << format_double(r.eps_rel_train) << ','
            << format_double(r.eps_rel_test) << ',' << format_double(r.proj_train) << ','
            << format_double(r.proj_test) << ',' << format_double(r.amplification) << '\n';
    }
    return out.str();
}

std::string params_json(const SnapshotDataset& train, const SnapshotDataset& test) {
    auto split = [](const SnapshotDataset& ds) {
        std::vector<Index> source;
        for (Index i : ds.source_indices) source.push_back(i + 1);
        return json{{"params", ds.params}, {"source_indices", source}};
    };
    const json j{{"names", train.param_names},
                 {"train", split(train)},
                 {"test", split(test)},
                 {"space", train.space},
                 {"time", train.time}};
    return j.dump(2) + "\n";
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw IoError("failed writing " + path.string());
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace tqdeim
