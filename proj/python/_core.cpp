#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "stickytail/classifier.hpp"
#include "stickytail/extreme_value.hpp"
#include "stickytail/kernel.hpp"
#include "stickytail/model.hpp"
#include "stickytail/report.hpp"

namespace py = pybind11;
using namespace stickytail;

namespace {

ModelParams make_model(const Vec2& mu, const Mat2& sigma, const Mat2& refl, const Vec2& stick) {
    ModelParams p;
    p.mu = mu;
    p.sigma = sigma;
    p.refl = refl;
    p.stick = stick;
    return validate(p);
}

py::dict tail_dict(const TailAsymptotic& t) {
    py::dict d;
    d["alpha"] = t.alpha;
    d["p"] = t.p;
    d["regime"] = t.regime;
    d["dominant"] = std::string(to_string(t.dominant));
    d["experimental"] = t.experimental;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Tail asymptotics of sticky reflected Brownian motion in the quadrant";

    py::register_exception<Error>(m, "StickytailError");

    py::class_<ModelParams>(m, "Model")
        .def(py::init(&make_model), py::arg("mu"), py::arg("sigma") = identity2(), py::arg("R") = identity2(),
             py::arg("u") = Vec2{1.0, 1.0})
        .def_readonly("mu", &ModelParams::mu)
        .def_readonly("sigma", &ModelParams::sigma)
        .def_readonly("R", &ModelParams::refl)
        .def_readonly("u", &ModelParams::stick)
        .def("__repr__", [](const ModelParams& p) {
            return "Model(mu=[" + std::to_string(p.mu[0]) + ", " + std::to_string(p.mu[1]) + "], ...)";
        });

    m.def("local_time_rates", [](const ModelParams& p) {
        const auto r = local_time_rates(p);
        py::dict d;
        d["e_T1"] = r.rates.e_T1;
        d["e_L1"] = r.rates.e_L1;
        d["e_L2"] = r.rates.e_L2;
        return d;
    });
    m.def("branch_points", [](const ModelParams& p) {
        const auto b = branch_points(p);
        py::dict d;
        d["x1"] = b.x1;
        d["x2"] = b.x2;
        d["y1"] = b.y1;
        d["y2"] = b.y2;
        return d;
    });
    m.def("singularity_candidates", [](const ModelParams& p) {
        const auto c = singularity_candidates(p);
        py::dict d;
        d["x_star"] = c.x_star;
        d["y_star"] = c.y_star;
        d["x_tilde"] = c.x_tilde;
        d["x2"] = c.x2;
        return d;
    });
    m.def("classify_boundary", [](int face, const ModelParams& p) { return tail_dict(classify_boundary(face, p)); },
          py::arg("face"), py::arg("model"));
    m.def("classify_marginal", [](int axis, const ModelParams& p) { return tail_dict(classify_marginal(axis, p)); },
          py::arg("axis"), py::arg("model"));
    m.def(
        "classify_direction",
        [](const Vec2& dir, const ModelParams& p) { return tail_dict(classify_direction(DirectionalQuery(dir), p)); },
        py::arg("direction"), py::arg("model"));
    m.def(
        "ev_norming",
        [](double n, double alpha, double p, double k) {
            TailAsymptotic t;
            t.alpha = alpha;
            t.p = p;
            const auto e = ev_norming(n, t, k);
            return py::make_tuple(e.a_n, e.b_n);
        },
        py::arg("n"), py::arg("alpha"), py::arg("p"), py::arg("k") = 1.0, "(a_n, b_n) for block maxima of n draws");
    m.def("gumbel_cdf", &gumbel_cdf, py::arg("x"));

    // JSON text in, JSON text out; the Python wrapper converts to dicts
    m.def("_analyze", [](const std::string& text) { return run_analyze(parse_config_text(text)).to_json().dump(); });
    m.def(
        "_verify",
        [](const std::string& text, unsigned threads) {
            const auto cfg = parse_config_text(text);
            py::gil_scoped_release release;
            return run_verify(cfg, threads).to_json().dump();
        },
        py::arg("config"), py::arg("threads") = 1);
}
