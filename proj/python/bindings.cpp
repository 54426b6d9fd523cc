/*
 * Copyright 2026 The dualmink Authors.
 * This file is licensed to you under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License. You may obtain a copy
 * of the License at http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software distributed under
 * the License is distributed on an "AS IS" BASIS, WITHOUT WARRANTIES OR REPRESENTATIONS
 * OF ANY KIND, either express or implied. See the License for the specific language
 * governing permissions and limitations under the License.
 */
#include <dualmink/errors.hpp>
#include <dualmink/io.hpp>
#include <dualmink/measures.hpp>
#include <dualmink/parallel.hpp>
#include <dualmink/solver.hpp>
#include <dualmink/verify.hpp>

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace dualmink;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;
using Release = py::call_guard<py::gil_scoped_release>;

Array to_numpy(std::span<const double> v)
{
    Array out(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

int level_of_size(std::size_t n)
{
    for (int level = 0; level <= SphericalGrid::kMaxLevel; ++level) {
        if (n == 10 * (std::size_t(1) << (2 * level)) + 2) return level;
    }
    throw ConfigError("field of " + std::to_string(n) + " values matches no grid level");
}

/// Node values on the grid whose size matches the array.
ScalarField field_from_array(const Array& values)
{
    if (values.ndim() != 1) throw ConfigError("field values must be a 1-d array");
    const auto n = static_cast<std::size_t>(values.size());
    std::vector<double> v(values.data(), values.data() + n);
    return ScalarField(build_geodesic_grid(level_of_size(n)), std::move(v));
}

Array nodes_of(int level)
{
    const auto grid = build_geodesic_grid(level);
    Array out({static_cast<py::ssize_t>(grid->size()), py::ssize_t(3)});
    auto m = out.mutable_unchecked<2>();
    for (std::size_t i = 0; i < grid->size(); ++i) {
        for (int k = 0; k < 3; ++k) m(static_cast<py::ssize_t>(i), k) = grid->node(i)[k];
    }
    return out;
}

Json parse(const std::string& text) { return text.empty() ? Json::object() : Json::parse(text); }

std::string report_text(const EstimateReport& rep) { return rep.to_json().dump(); }

GridPtr optional_grid(int level) { return level > 0 ? build_geodesic_grid(level) : nullptr; }

} // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Native core of dualmink";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<InvalidBodyError>(m, "InvalidBodyError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
    py::register_exception<AmbiguityError>(m, "AmbiguityError", PyExc_RuntimeError);

    m.def("set_max_threads", &set_max_threads, py::arg("n"));
    m.def("max_threads", &max_threads);

    m.def("grid_nodes", &nodes_of, py::arg("level"), "Unit node vectors of the level-L grid, shape (N, 3).");
    m.def(
        "grid_weights", [](int level) { return to_numpy(build_geodesic_grid(level)->weights()); }, py::arg("level"));

    py::class_<ConvexBody>(m, "ConvexBody")
        .def_static("ball", [](double r) { return ConvexBody::ball(r); }, py::arg("radius") = 1.0)
        .def_static("cube", [](double a) { return ConvexBody::cube(a); }, py::arg("half_side") = 1.0)
        .def_static(
            "ellipsoid", [](const Vec3& r, const Vec3& c, const Mat3& a) { return ConvexBody::ellipsoid(r, c, a); },
            py::arg("half_axes"), py::arg("center") = Vec3::Zero(), py::arg("axes") = Mat3::Identity())
        .def_static(
            "polytope",
            [](const Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>& pts) {
                std::vector<Vec3> v;
                for (Eigen::Index i = 0; i < pts.rows(); ++i) v.push_back(pts.row(i).transpose());
                return ConvexBody::polytope(v);
            },
            py::arg("vertices"))
        .def_static(
            "support_grid", [](const Array& u) { return ConvexBody::support_grid(field_from_array(u)); },
            py::arg("values"), "Support values at the nodes of the grid whose size matches.")
        .def_static(
            "from_json", [](const std::string& text) { return body_from_json(Json::parse(text)); }, py::arg("text"))
        .def("to_json", [](const ConvexBody& b) { return body_to_json(b).dump(); })
        .def_property_readonly("kind",
                               [](const ConvexBody& b) {
                                   switch (b.kind()) {
                                   case ConvexBody::Kind::Ellipsoid:
                                       return "ellipsoid";
                                   case ConvexBody::Kind::Polytope:
                                       return "polytope";
                                   case ConvexBody::Kind::SupportGrid:
                                       return "support_grid";
                                   }
                                   return "unknown";
                               })
        .def("scaled", &ConvexBody::scaled, py::arg("s"))
        .def("support", [](const ConvexBody& b, const Vec3& v) { return support(b, v); }, py::arg("v"))
        .def("radial", [](const ConvexBody& b, const Vec3& w) { return radial(b, w); }, py::arg("w"))
        .def("volume", [](const ConvexBody& b) { return volume(b); })
        .def(
            "sample_support", [](const ConvexBody& b, int level) {
                return to_numpy(sample_support(b, build_geodesic_grid(level)).values());
            },
            py::arg("level") = 4);

    m.def(
        "lp_dual_curvature",
        [](const ConvexBody& b, double p, double q, const std::string& region, int level) {
            return lp_dual_curvature(b, p, q, RegionSpec::parse(region), optional_grid(level));
        },
        py::arg("body"), py::arg("p"), py::arg("q"), py::arg("region") = "full", py::arg("level") = 0, Release());
    m.def(
        "dual_curvature_radial",
        [](const ConvexBody& b, double q, const std::string& region, int level) {
            return dual_curvature_radial(b, q, RegionSpec::parse(region), optional_grid(level));
        },
        py::arg("body"), py::arg("q"), py::arg("region") = "full", py::arg("level") = 0, Release());
    m.def(
        "dual_curvature_boundary",
        [](const ConvexBody& b, double q, const std::string& region, int level) {
            return dual_curvature_boundary(b, q, RegionSpec::parse(region), optional_grid(level));
        },
        py::arg("body"), py::arg("q"), py::arg("region") = "full", py::arg("level") = 0, Release());
    m.def(
        "surface_area",
        [](const ConvexBody& b, const std::string& region, int level) {
            return surface_area_measure(b, optional_grid(level))(RegionSpec::parse(region));
        },
        py::arg("body"), py::arg("region") = "full", py::arg("level") = 0, Release());
    m.def(
        "cone_volume",
        [](const ConvexBody& b, const std::string& region, int level) {
            return cone_volume_measure(b, optional_grid(level))(RegionSpec::parse(region));
        },
        py::arg("body"), py::arg("region") = "full", py::arg("level") = 0, Release());
    m.def(
        "lp_dual_density",
        [](const ConvexBody& b, double p, double q, int level) {
            DensityResult d = [&] {
                py::gil_scoped_release release;
                return lp_dual_density(b, p, q, optional_grid(level));
            }();
            return py::make_tuple(to_numpy(d.f.values()), d.lambda);
        },
        py::arg("body"), py::arg("p"), py::arg("q"), py::arg("level") = 4,
        "Nodal density and lambda = max(sup f, 1 / inf f).");

    m.def(
        "john_ellipsoid",
        [](const ConvexBody& b) {
            const auto e = john_ellipsoid(b);
            const auto c = john_containment(b, e);
            py::dict out;
            out["center"] = Vec3(e.center);
            out["half_axes"] = Vec3(e.half_axes);
            out["axes"] = Mat3(e.axes);
            out["volume"] = e.volume();
            out["inner_excess"] = c.inner_excess;
            out["outer_excess"] = c.outer_excess;
            return out;
        },
        py::arg("body"));

    m.def(
        "residual",
        [](const Array& u, const Array& f, double p, double q) {
            return to_numpy(residual(field_from_array(u), field_from_array(f), p, q).values());
        },
        py::arg("u"), py::arg("f"), py::arg("p"), py::arg("q"));
    m.def(
        "convexify", [](const Array& u) { return to_numpy(convexify(field_from_array(u)).values()); },
        py::arg("u"));
    m.def(
        "solve",
        [](const Array& f, double p, double q, const std::string& config) {
            const auto field = field_from_array(f);
            const auto cfg = SolverConfig::from_json(parse(config));
            py::gil_scoped_release release;
            return solve(field, p, q, cfg).to_json().dump();
        },
        py::arg("f"), py::arg("p"), py::arg("q"), py::arg("config") = "",
        "Solve report as JSON text; `config` is a solver configuration document.");

    m.def(
        "run_suite",
        [](const std::string& name, const std::string& config) {
            const auto cfg = SuiteConfig::from_json(parse(config));
            py::gil_scoped_release release;
            if (name == "c0") return report_text(c0_suite(cfg));
            if (name == "basic-estimate") return report_text(basic_estimate_suite(cfg));
            if (name == "proposition") return report_text(proposition_suite(cfg));
            throw ConfigError("unknown suite '" + name + "'");
        },
        py::arg("name"), py::arg("config") = "");
    m.def(
        "uniqueness_probe",
        [](const Array& f, double p, double q, int n_starts, std::uint64_t seed, double epsilon, double delta,
           double agree_tol, const std::string& solver) {
            UniquenessConfig c;
            c.p = p;
            c.q = q;
            c.n_starts = n_starts;
            c.seed = seed;
            c.epsilon = epsilon;
            c.delta = delta;
            c.agree_tol = agree_tol;
            c.solver = SolverConfig::from_json(parse(solver));
            const auto field = field_from_array(f);
            py::gil_scoped_release release;
            return report_text(uniqueness_probe(field, c));
        },
        py::arg("f"), py::arg("p") = 0.3, py::arg("q") = 3.05, py::arg("n_starts") = 5, py::arg("seed") = 1,
        py::arg("epsilon") = 0.1, py::arg("delta") = 0.2, py::arg("agree_tol") = 5e-3, py::arg("solver") = "");
    m.def(
        "bump_density",
        [](int level, double amplitude) {
            return to_numpy(bump_density(build_geodesic_grid(level), amplitude).values());
        },
        py::arg("level") = 4, py::arg("amplitude") = 0.02);
    m.def(
        "degeneration_probe",
        [](double p, double q, std::optional<std::vector<double>> schedule, int level, bool allow_unsupported) {
            DegenerationConfig c;
            c.p = p;
            c.q = q;
            if (schedule) c.schedule = *schedule;
            c.level = level;
            c.allow_unsupported = allow_unsupported;
            py::gil_scoped_release release;
            return report_text(degeneration_probe(c));
        },
        py::arg("p") = -2.0, py::arg("q") = 3.0, py::arg("schedule") = py::none(), py::arg("level") = 4,
        py::arg("allow_unsupported") = false);
}
