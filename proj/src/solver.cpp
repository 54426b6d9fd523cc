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
#include <dualmink/solver.hpp>

#include <dualmink/errors.hpp>
#include <dualmink/hull.hpp>
#include <dualmink/measures.hpp>
#include <dualmink/parallel.hpp>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <array>
#include <random>

namespace dualmink {

namespace {

double sup_abs(std::span<const double> v)
{
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

void require_same_grid(const ScalarField& a, const ScalarField& b)
{
    if (&a.grid() != &b.grid()) throw ConfigError("fields live on different grids");
}

/// Node data shared by the density, the residual and the Jacobian.
struct NodeState
{
    Vec2 g;
    Mat2 m; // Hess u + u I
    double a; // |grad u|^2 + u^2
};

NodeState node_state(const SphericalGrid& grid, std::span<const double> u, std::size_t i)
{
    const LocalJet jet = grid.jet(u, i);
    NodeState s;
    s.g = jet.gradient;
    s.m = jet.hessian + u[i] * Mat2::Identity();
    s.a = s.g.squaredNorm() + u[i] * u[i];
    if (!(u[i] > 0.0)) throw DegeneracyError("support values must be positive", i);
    if (!(s.m.determinant() > 0.0) || !(s.m(0, 0) > 0.0)) {
        throw DegeneracyError("Hess u + u I is not positive definite", i);
    }
    return s;
}

double log_density(const NodeState& s, double u, double p, double q)
{
    return 0.5 * (q - 3.0) * std::log(s.a) + (1.0 - p) * std::log(u) + std::log(s.m.determinant());
}

std::vector<double> residual_values(const SphericalGrid& grid, std::span<const double> u, std::span<const double> f,
                                    double p, double q)
{
    std::vector<double> r(grid.size());
    parallel_for(grid.size(), [&](std::size_t i) {
        r[i] = log_density(node_state(grid, u, i), u[i], p, q) - std::log(f[i]);
    });
    return r;
}

/// d r_i / d log u_k over the fit stencil of each node.
Eigen::SparseMatrix<double> log_jacobian(const SphericalGrid& grid, std::span<const double> u, double p, double q)
{
    const std::size_t n = grid.size();
    std::vector<std::vector<Eigen::Triplet<double>>> rows(n);
    parallel_for(n, [&](std::size_t i) {
        const NodeState s = node_state(grid, u, i);
        const auto& fit = grid.fit_rows(i);
        const auto ring = grid.stencil(i);
        const double det = s.m.determinant();
        auto& out = rows[i];
        out.reserve(ring.size() + 1);
        for (Eigen::Index j = 0; j < fit.cols(); ++j) {
            const std::size_t k = j == 0 ? i : ring[j - 1];
            const double self = j == 0 ? 1.0 : 0.0;
            const double da = 2.0 * (s.g.x() * fit(1, j) + s.g.y() * fit(2, j) + u[i] * self);
            const double d11 = fit(3, j) + self;
            const double d12 = fit(4, j);
            const double d22 = fit(5, j) + self;
            const double ddet = s.m(1, 1) * d11 - 2.0 * s.m(0, 1) * d12 + s.m(0, 0) * d22;
            double d = 0.5 * (q - 3.0) * da / s.a + ddet / det;
            if (j == 0) d += (1.0 - p) / u[i];
            out.emplace_back(static_cast<int>(i), static_cast<int>(k), d * u[k]);
        }
    });
    std::vector<Eigen::Triplet<double>> all;
    for (auto& r : rows) all.insert(all.end(), r.begin(), r.end());
    Eigen::SparseMatrix<double> jac(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    jac.setFromTriplets(all.begin(), all.end());
    return jac;
}

std::vector<double> newton_direction(const SphericalGrid& grid, std::span<const double> u,
                                     std::span<const double> r, double p, double q)
{
    const auto jac = log_jacobian(grid, u, p, q);
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(jac);
    if (lu.info() != Eigen::Success) throw DegeneracyError("Newton system is singular");
    Eigen::VectorXd rhs = -Eigen::Map<const Eigen::VectorXd>(r.data(), static_cast<Eigen::Index>(r.size()));
    Eigen::VectorXd d = lu.solve(rhs);
    if (lu.info() != Eigen::Success || !d.allFinite()) throw DegeneracyError("Newton solve failed");
    return {d.data(), d.data() + d.size()};
}

const char* scheme_name(SolverConfig::Scheme s)
{
    return s == SolverConfig::Scheme::Newton ? "newton" : "multiplicative";
}

} // namespace

// ---------------------------------------------------------------------------------------
// Config

void SolverConfig::validate() const
{
    if (!(tau > 0.0 && tau <= 1.0)) throw ConfigError("tau must lie in (0, 1]");
    if (!(tol_residual > 0.0)) throw ConfigError("tol_residual must be positive");
    if (max_iter < 0) throw ConfigError("max_iter must be non-negative");
    if (convexify_every < 0) throw ConfigError("convexify_every must be non-negative");
    if (!(rho_min > 0.0)) throw ConfigError("rho_min must be positive");
    if (!(tol_convex > 0.0)) throw ConfigError("tol_convex must be positive");
    if (max_halvings < 0) throw ConfigError("max_halvings must be non-negative");
    if (level < 0 || level > SphericalGrid::kMaxLevel) throw ConfigError("level must lie in [0, 7]");
    if (!(init.radius > 0.0)) throw ConfigError("init radius must be positive");
    if (!(init.amplitude >= 0.0)) throw ConfigError("init amplitude must be non-negative");
}

Json SolverConfig::to_json() const
{
    Json doc;
    doc["level"] = level;
    doc["tau"] = tau;
    doc["tol_residual"] = tol_residual;
    doc["max_iter"] = max_iter;
    doc["convexify_every"] = convexify_every;
    Json in;
    switch (init.kind) {
    case InitSpec::Kind::Ball:
        in["type"] = "ball";
        in["radius"] = init.radius;
        break;
    case InitSpec::Kind::Random:
        in["type"] = "random";
        in["radius"] = init.radius;
        in["seed"] = init.seed;
        in["amplitude"] = init.amplitude;
        break;
    case InitSpec::Kind::Field:
        in["type"] = "field";
        if (init.field) in["field"] = field_to_json(*init.field);
        break;
    }
    doc["init"] = std::move(in);
    doc["rho_min"] = rho_min;
    doc["tol_convex"] = tol_convex;
    doc["scheme"] = scheme_name(scheme);
    doc["max_halvings"] = max_halvings;
    doc["allow_unsupported"] = allow_unsupported;
    return doc;
}

SolverConfig SolverConfig::from_json(const Json& doc)
{
    if (!doc.is_object()) throw DocumentError("", "solver config must be an object");
    SolverConfig c;
    auto integer = [&](const char* key, int& out) {
        if (!doc.contains(key)) return;
        const auto& v = doc[key];
        if (!v.is_number_integer()) throw DocumentError(std::string("/") + key, "expected an integer");
        out = v.get<int>();
    };
    for (const auto& [key, value] : doc.items()) {
        static const char* known[] = {"level", "tau", "tol_residual", "max_iter", "convexify_every", "init",
                                      "rho_min", "tol_convex", "scheme", "max_halvings", "allow_unsupported"};
        if (std::none_of(std::begin(known), std::end(known), [&](const char* k) { return key == k; })) {
            throw DocumentError("/" + key, "unknown solver option");
        }
    }
    integer("level", c.level);
    integer("max_iter", c.max_iter);
    integer("convexify_every", c.convexify_every);
    integer("max_halvings", c.max_halvings);
    if (doc.contains("tau")) c.tau = json_number(doc, "/tau");
    if (doc.contains("tol_residual")) c.tol_residual = json_number(doc, "/tol_residual");
    if (doc.contains("rho_min")) c.rho_min = json_number(doc, "/rho_min");
    if (doc.contains("tol_convex")) c.tol_convex = json_number(doc, "/tol_convex");
    if (doc.contains("scheme")) {
        const auto& s = doc["scheme"];
        if (s == "newton") {
            c.scheme = Scheme::Newton;
        } else if (s == "multiplicative") {
            c.scheme = Scheme::Multiplicative;
        } else {
            throw DocumentError("/scheme", "expected \"newton\" or \"multiplicative\"");
        }
    }
    if (doc.contains("allow_unsupported")) {
        if (!doc["allow_unsupported"].is_boolean()) throw DocumentError("/allow_unsupported", "expected a boolean");
        c.allow_unsupported = doc["allow_unsupported"].get<bool>();
    }
    if (doc.contains("init")) {
        const auto& in = doc["init"];
        if (!in.is_object() || !in.contains("type") || !in["type"].is_string()) {
            throw DocumentError("/init", "expected an object with a \"type\"");
        }
        const auto type = in["type"].get<std::string>();
        if (type == "ball") {
            c.init.kind = InitSpec::Kind::Ball;
        } else if (type == "random") {
            c.init.kind = InitSpec::Kind::Random;
            if (in.contains("seed")) {
                if (!in["seed"].is_number_unsigned()) throw DocumentError("/init/seed", "expected a non-negative integer");
                c.init.seed = in["seed"].get<std::uint64_t>();
            }
            if (in.contains("amplitude")) c.init.amplitude = json_number(doc, "/init/amplitude");
        } else if (type == "field") {
            c.init.kind = InitSpec::Kind::Field;
            if (!in.contains("field")) throw DocumentError("/init", "field start needs a \"field\" member");
            try {
                c.init.field = field_from_json(in["field"]);
            } catch (const DocumentError& e) {
                throw DocumentError("/init/field" + e.pointer(), e.what());
            }
        } else {
            throw DocumentError("/init/type", "expected \"ball\", \"random\" or \"field\"");
        }
        if (in.contains("radius")) c.init.radius = json_number(doc, "/init/radius");
    }
    try {
        c.validate();
    } catch (const ConfigError& e) {
        throw DocumentError("", e.what());
    }
    return c;
}

std::string to_string(SolveStatus s)
{
    switch (s) {
    case SolveStatus::Converged:
        return "converged";
    case SolveStatus::MaxIter:
        return "max_iter";
    case SolveStatus::Degenerate:
        return "degenerate";
    }
    return "unknown";
}

Json SolveReport::to_json() const
{
    Json doc;
    doc["status"] = to_string(status);
    doc["iterations"] = iterations;
    doc["final_residual"] = residual_history.empty() ? 0.0 : residual_history.back();
    doc["lambda"] = std::isfinite(lambda) ? Json(lambda) : Json(nullptr);
    if (!message.empty()) doc["message"] = message;
    doc["residual_history"] = residual_history;
    doc["solution"] = {{"type", "support_grid"}, {"level", u.grid().level()},
                       {"values", std::vector<double>(u.values().begin(), u.values().end())}};
    return doc;
}

// ---------------------------------------------------------------------------------------
// Operators

ScalarField lp_density_of_field(const ScalarField& u, double p, double q)
{
    const auto& grid = u.grid();
    std::vector<double> out(grid.size());
    parallel_for(grid.size(), [&](std::size_t i) {
        out[i] = std::exp(log_density(node_state(grid, u.values(), i), u[i], p, q));
    });
    return ScalarField(u.grid_ptr(), std::move(out));
}

ScalarField residual(const ScalarField& u, const ScalarField& f, double p, double q)
{
    require_same_grid(u, f);
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (!(f[i] > 0.0)) throw ConfigError("prescribed density must be positive (node " + std::to_string(i) + ")");
    }
    return ScalarField(u.grid_ptr(), residual_values(u.grid(), u.values(), f.values(), p, q));
}

ScalarField convexify(const ScalarField& u)
{
    const auto& grid = u.grid();
    const std::size_t n = grid.size();
    std::vector<Vec3> polar(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(u[i] > 0.0)) throw DegeneracyError("support values must be positive", i);
        polar[i] = grid.node(i) / u[i];
    }
    ConvexHull hull;
    try {
        hull = convex_hull(polar);
    } catch (const NumericalError& e) {
        throw DegeneracyError(std::string("Wulff shape is degenerate: ") + e.what());
    }
    for (std::size_t f = 0; f < hull.offsets.size(); ++f) {
        if (!(hull.offsets[f] > 0.0)) throw DegeneracyError("origin is not interior to the Wulff shape");
    }
    std::vector<char> is_vertex(n, 0);
    for (auto v : hull.vertices) is_vertex[v] = 1;
    std::vector<double> out(n);
    parallel_for(n, [&](std::size_t i) {
        if (is_vertex[i]) {
            out[i] = u[i];
            return;
        }
        // h_P(v) = 1 / rho_{P*}(v) with P* = conv{v_j / u_j}.
        double best = 0.0;
        for (std::size_t f = 0; f < hull.offsets.size(); ++f) {
            best = std::max(best, hull.normals[f].dot(grid.node(i)) / hull.offsets[f]);
        }
        out[i] = std::min(u[i], best);
    });
    return ScalarField(u.grid_ptr(), std::move(out));
}

ScalarField random_smooth_field(GridPtr grid, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    std::vector<std::array<int, 3>> powers;
    for (int a = 0; a <= 3; ++a) {
        for (int b = 0; a + b <= 3; ++b) {
            for (int c = 0; a + b + c <= 3; ++c) {
                if (a + b + c > 0) powers.push_back({a, b, c});
            }
        }
    }
    std::vector<double> cs(powers.size());
    for (auto& c : cs) c = coef(rng);
    std::vector<double> poly(grid->size());
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const Vec3& v = grid->node(i);
        double s = 0.0;
        for (std::size_t k = 0; k < powers.size(); ++k) {
            s += cs[k] * std::pow(v.x(), powers[k][0]) * std::pow(v.y(), powers[k][1]) * std::pow(v.z(), powers[k][2]);
        }
        poly[i] = s;
    }
    const double scale = sup_abs(poly);
    if (scale > 0.0) {
        for (auto& x : poly) x /= scale;
    }
    return ScalarField(std::move(grid), std::move(poly));
}

ScalarField initial_field(const InitSpec& init, GridPtr grid)
{
    switch (init.kind) {
    case InitSpec::Kind::Ball:
        return ScalarField::constant(std::move(grid), init.radius);
    case InitSpec::Kind::Field:
        if (!init.field) throw ConfigError("field start without a field");
        if (&init.field->grid() != grid.get()) throw ConfigError("start field lives on a different grid");
        return *init.field;
    case InitSpec::Kind::Random: {
        const auto poly = random_smooth_field(grid, init.seed);
        std::vector<double> vals(poly.size());
        for (std::size_t i = 0; i < vals.size(); ++i) vals[i] = init.radius * std::exp(init.amplitude * poly[i]);
        return ScalarField(std::move(grid), std::move(vals));
    }
    }
    throw ConfigError("unknown start kind");
}

// ---------------------------------------------------------------------------------------
// Solve

SolveReport solve(const ScalarField& f, double p, double q, const SolverConfig& config)
{
    config.validate();
    if (!std::isfinite(p) || !std::isfinite(q)) throw ConfigError("p and q must be finite");
    if (!config.allow_unsupported && !(p >= 0.0 && p < 1.0 && q > 2.0 + p)) {
        throw ConfigError("unsupported regime: need 0 <= p < 1 and q > 2 + p");
    }
    if (config.scheme == SolverConfig::Scheme::Multiplicative && q == p) throw ConfigError("q - p must be nonzero");
    const auto& grid = f.grid();
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (!(f[i] > 0.0) || !std::isfinite(f[i])) {
            throw ConfigError("prescribed density must be positive (node " + std::to_string(i) + ")");
        }
    }
    const std::size_t n = grid.size();

    SolveReport rep{initial_field(config.init, f.grid_ptr()), SolveStatus::MaxIter, {}, 0, 1.0, {}};
    std::vector<double> u(rep.u.values().begin(), rep.u.values().end());
    std::vector<double> r;

    auto finish = [&](SolveStatus status, std::string message) {
        rep.status = status;
        rep.message = std::move(message);
        rep.u = ScalarField(f.grid_ptr(), u);
        try {
            rep.lambda = density_lambda(lp_density_of_field(rep.u, p, q));
        } catch (const DegeneracyError&) {
            rep.lambda = std::numeric_limits<double>::infinity();
        }
        return rep;
    };
    auto project = [&]() {
        const auto c = convexify(ScalarField(f.grid_ptr(), u));
        u.assign(c.values().begin(), c.values().end());
        r = residual_values(grid, u, f.values(), p, q);
    };

    try {
        project();
    } catch (const DegeneracyError& e) {
        return finish(SolveStatus::Degenerate, std::string("initial field: ") + e.what());
    }
    double sup = sup_abs(r);
    rep.residual_history.push_back(sup);

    int since_convexify = 0;
    std::vector<double> trial(n);
    while (true) {
        if (sup <= config.tol_residual) {
            // Termination projection; iterate on if it undoes convergence.
            std::vector<double> keep = u;
            try {
                project();
            } catch (const DegeneracyError& e) {
                return finish(SolveStatus::Degenerate, e.what());
            }
            const double after = sup_abs(r);
            if (after <= config.tol_residual) {
                if (after != sup) rep.residual_history.push_back(after);
                if (*std::min_element(u.begin(), u.end()) < config.rho_min) {
                    return finish(SolveStatus::Degenerate, "solution violates the origin margin");
                }
                if (min_curvature_eigenvalue(ScalarField(f.grid_ptr(), u)) < -config.tol_convex) {
                    return finish(SolveStatus::Degenerate, "solution fails the convexity check");
                }
                return finish(SolveStatus::Converged, {});
            }
            sup = after;
            rep.residual_history.push_back(sup);
            since_convexify = 0;
        }
        if (rep.iterations >= config.max_iter) {
            try {
                project();
            } catch (const DegeneracyError& e) {
                return finish(SolveStatus::Degenerate, e.what());
            }
            return finish(SolveStatus::MaxIter, "iteration limit reached");
        }

        std::vector<double> dir;
        try {
            if (config.scheme == SolverConfig::Scheme::Newton) {
                dir = newton_direction(grid, u, r, p, q);
            } else {
                dir.resize(n);
                for (std::size_t i = 0; i < n; ++i) dir[i] = -r[i] / (q - p);
            }
        } catch (const DegeneracyError& e) {
            return finish(SolveStatus::Degenerate, e.what());
        }

        bool accepted = false;
        double t = config.tau;
        std::vector<double> trial_r;
        for (int h = 0; h <= config.max_halvings && !accepted; ++h, t *= 0.5) {
            for (std::size_t i = 0; i < n; ++i) trial[i] = u[i] * std::exp(t * dir[i]);
            try {
                trial_r = residual_values(grid, trial, f.values(), p, q);
            } catch (const DegeneracyError&) {
                continue;
            }
            accepted = sup_abs(trial_r) <= sup;
        }
        if (!accepted) {
            return finish(SolveStatus::Degenerate,
                          "no admissible step after " + std::to_string(config.max_halvings) + " halvings");
        }
        u.swap(trial);
        r.swap(trial_r);
        sup = sup_abs(r);
        ++rep.iterations;
        rep.residual_history.push_back(sup);

        if (config.convexify_every > 0 && ++since_convexify >= config.convexify_every) {
            since_convexify = 0;
            try {
                project();
            } catch (const DegeneracyError& e) {
                return finish(SolveStatus::Degenerate, e.what());
            }
            const double after = sup_abs(r);
            if (after != sup) {
                sup = after;
                rep.residual_history.push_back(sup);
            }
        }
    }
}

} // namespace dualmink
