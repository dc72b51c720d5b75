#include <pybind11/pybind11.h>
#include <pybind11/numpy.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "tqdeim/datagen.hpp"
#include "tqdeim/factor.hpp"
#include "tqdeim/interp.hpp"
#include "tqdeim/io.hpp"
#include "tqdeim/parallel.hpp"

namespace py = pybind11;
using namespace tqdeim;

namespace {

using Array = py::array_t<double, py::array::forcecast>;

// numpy (m, l, q) <-> Tensor3. Any memory order is accepted on input.
Tensor3 to_tensor(const Array& a) {
    if (a.ndim() != 3) throw DimensionError("expected a 3-d array of shape (m, l, q)");
    const auto v = a.unchecked<3>();
    Tensor3 t(Index(v.shape(0)), Index(v.shape(1)), Index(v.shape(2)));
    for (py::ssize_t k = 0; k < v.shape(2); ++k)
        for (py::ssize_t i = 0; i < v.shape(0); ++i)
            for (py::ssize_t j = 0; j < v.shape(1); ++j) t(Index(i), Index(j), Index(k)) = v(i, j, k);
    return t;
}

// Zero-copy view over the tensor storage; the capsule keeps the tensor alive.
py::array_t<double> to_array(Tensor3 t) {
    auto* owned = new Tensor3(std::move(t));
    py::capsule keep(owned, [](void* p) { delete static_cast<Tensor3*>(p); });
    const auto m = py::ssize_t(owned->rows()), l = py::ssize_t(owned->cols()), q = py::ssize_t(owned->depth());
    const auto d = py::ssize_t(sizeof(double));
    return py::array_t<double>({m, l, q}, {l * d, d, m * l * d}, owned->data().data(), keep);
}

py::array_t<double> to_array(const Eigen::MatrixXd& m) {
    py::array_t<double> out({py::ssize_t(m.rows()), py::ssize_t(m.cols())});
    auto v = out.mutable_unchecked<2>();
    for (py::ssize_t i = 0; i < v.shape(0); ++i)
        for (py::ssize_t j = 0; j < v.shape(1); ++j) v(i, j) = m(i, j);
    return out;
}

py::dict report_dict(const ErrorReport& r) {
    py::list samples;
    for (const auto& s : r.samples) {
        py::dict d;
        d["sample_index"] = s.index;
        d["true_error"] = s.true_error;
        d["proj_error"] = s.proj_error;
        d["bound"] = s.bound;
        d["rel_frob_error"] = s.rel_frob_error;
        samples.append(d);
    }
    py::dict out;
    out["method"] = to_string(r.method);
    out["rank"] = r.rank;
    out["amplification"] = r.amplification;
    out["eps_abs"] = r.eps_abs;
    out["eps_rel"] = r.eps_rel;
    out["samples"] = samples;
    return out;
}

} // namespace

PYBIND11_MODULE(_tqdeim, m) {
    m.doc() = "t-product tensor algebra and t-Q-DEIM sparse interpolation";

    static py::exception<Error> base(m, "Error", PyExc_RuntimeError);
    py::register_exception<DimensionError>(m, "DimensionError", base.ptr());
    py::register_exception<FormatError>(m, "FormatError", base.ptr());
    py::register_exception<IoError>(m, "IoError", base.ptr());
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<NumericalError>(m, "NumericalError", base.ptr());

    m.def("set_num_threads", &set_num_threads, py::arg("count"));

    m.def("t_product", [](const Array& a, const Array& b) { return to_array(t_product(to_tensor(a), to_tensor(b))); });
    m.def("t_transpose", [](const Array& a) { return to_array(t_transpose(to_tensor(a))); });
    m.def("t_identity", [](Index n, Index q) { return to_array(t_identity(n, q)); });
    m.def("t_inverse", [](const Array& a) { return to_array(t_inverse(to_tensor(a))); });
    m.def("t_spectral_norm", [](const Array& a) { return t_spectral_norm(to_tensor(a)); });
    m.def("frobenius_norm", [](const Array& a) { return frobenius_norm(to_tensor(a)); });
    m.def(
        "t_svd",
        [](const Array& a, std::optional<Index> rank) {
            TSvdFactors f = t_svd(to_tensor(a), rank);
            return py::make_tuple(to_array(std::move(f.u)), to_array(std::move(f.s)), to_array(std::move(f.w)));
        },
        py::arg("a"), py::arg("rank") = py::none());
    m.def("apriori_estimate", &apriori_estimate, py::arg("N"), py::arg("n"), py::arg("M"));

    py::class_<TQDeimModel>(m, "TQDeimModel")
        .def_property_readonly("basis", [](const TQDeimModel& x) { return to_array(x.basis); })
        .def_property_readonly("d", [](const TQDeimModel& x) { return to_array(x.d); })
        .def_property_readonly("pivots", [](const TQDeimModel& x) { return x.pivots.one_based(); })
        .def_property_readonly("rank", &TQDeimModel::rank)
        .def_readonly("amplification", &TQDeimModel::amplification)
        .def("sample", [](const TQDeimModel& x, const Array& f) { return to_array(sample_rows(to_tensor(f), x.pivots)); })
        .def("reconstruct",
             [](const TQDeimModel& x, const Array& sampled) { return to_array(reconstruct_tqdeim(x, to_tensor(sampled))); })
        .def("error_bound",
             [](const TQDeimModel& x, const Array& f) {
                 const ErrorEstimate e = error_bound(x, to_tensor(f));
                 return py::make_tuple(e.bound, e.true_error, e.proj_error);
             })
        .def("evaluate", [](const TQDeimModel& x, const Array& data) { return report_dict(evaluate(x, to_tensor(data))); })
        .def("save", [](const TQDeimModel& x, const std::filesystem::path& dir) { save_model(dir, x); });

    py::class_<QDeimModel>(m, "QDeimModel")
        .def_property_readonly("basis", [](const QDeimModel& x) { return to_array(x.basis); })
        .def_property_readonly("d", [](const QDeimModel& x) { return to_array(x.d); })
        .def_property_readonly("pivots", [](const QDeimModel& x) { return x.pivots.one_based(); })
        .def_property_readonly("rank", &QDeimModel::rank)
        .def_readonly("amplification", &QDeimModel::amplification)
        .def("sample", [](const QDeimModel& x, const Array& f) { return to_array(sample_rows(to_tensor(f), x.pivots)); })
        .def("reconstruct",
             [](const QDeimModel& x, const Array& sampled) { return to_array(reconstruct_qdeim(x, to_tensor(sampled))); })
        .def("evaluate", [](const QDeimModel& x, const Array& data) { return report_dict(evaluate(x, to_tensor(data))); })
        .def("save", [](const QDeimModel& x, const std::filesystem::path& dir) { save_model(dir, x); });

    m.def(
        "fit_tqdeim",
        [](const Array& train, Index n, Index pivot_slice) {
            FitOptions options;
            options.pivot_slice = pivot_slice;
            return fit_tqdeim(to_tensor(train), n, options);
        },
        py::arg("train"), py::arg("n"), py::arg("pivot_slice") = 1);
    m.def(
        "fit_qdeim", [](const Array& train, Index n) { return fit_qdeim(to_tensor(train), n); }, py::arg("train"),
        py::arg("n"));
    m.def("load_model", [](const std::filesystem::path& dir) -> py::object {
        return std::visit([](auto&& model) { return py::cast(std::move(model)); }, load_model(dir));
    });

    m.def("read_t3b", [](const std::filesystem::path& path) { return to_array(read_tensor(path)); });
    m.def("write_t3b", [](const std::filesystem::path& path, const Array& a) { write_t3b(path, to_tensor(a)); });

    m.def(
        "gen_burgers",
        [](Index nx, Index nt, Index n_params, double t_final, double mu_lo, double mu_hi) {
            BurgersConfig cfg;
            cfg.nx = nx;
            cfg.nt = nt;
            cfg.n_params = n_params;
            cfg.t_final = t_final;
            cfg.mu_lo = mu_lo;
            cfg.mu_hi = mu_hi;
            return to_array(gen_burgers(cfg).tensor);
        },
        py::arg("nx") = 1000, py::arg("nt") = 1000, py::arg("n_params") = 50, py::arg("t_final") = 2.0,
        py::arg("mu_lo") = 0.004, py::arg("mu_hi") = 0.04);
    m.def(
        "gen_fhn",
        [](Index nx, Index nt, Index grid, double t_final) {
            FhnConfig cfg;
            cfg.nx = nx;
            cfg.nt = nt;
            cfg.grid = grid;
            cfg.t_final = t_final;
            return to_array(gen_fhn(cfg).tensor);
        },
        py::arg("nx") = 512, py::arg("nt") = 501, py::arg("grid") = 6, py::arg("t_final") = 5.0);

    m.def("vectorize", [](const Array& a) { return to_array(vectorize(to_tensor(a))); });
}
