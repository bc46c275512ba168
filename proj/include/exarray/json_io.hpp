#pragma once

// JSON schemas for value spaces, sets, distributions, rho specs and event
// hypergraphs, plus JSON/CSV writers for every report type.
//
//   ValueSpace   "real" | "unit" | {"discrete": m}
//   SetExpr      {"closed": [a, b]} | {"open": [a, b]} | {"points": [i, ...]}
//                | "full" | "empty" | {"union": [...]} | {"intersection": [...]}
//                | {"complement": <SetExpr>}
//                open endpoints may be "-inf" / "inf"
//   Distribution "uniform" | {"piecewise_linear_cdf": [[x, F], ...]}
//                | {"pmf": [w, ...]} | {"empirical": {"space": ..., "values": [...]}}
//   RhoSpec      {"version": 1, "arity": n, "dissociated": bool, "output": <space>,
//                 "family": {<name>: {...}}}  or  {..., "expr": <Expr>}
//   Expr         {"const": v} | {"xi": [positions]} | {"add"|"mul"|"min"|"max": [...]}
//                | {"sub"|"lt"|"le"|"gt"|"ge": [a, b]}
//                | {"step": {"arg": <Expr>, "breaks": [...], "values": [...]}}
//   Event        {"vertices": [...], "arity": n, "space": <space>,
//                 "constraints": {"a,b": <SetExpr>, ...}}

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "exarray/definetti.hpp"
#include "exarray/distill.hpp"
#include "exarray/errors.hpp"
#include "exarray/events.hpp"
#include "exarray/measure.hpp"
#include "exarray/montecarlo.hpp"
#include "exarray/representation.hpp"

namespace exarray::io {

using nlohmann::json;

inline constexpr int kSchemaVersion = 1;

namespace detail {

inline std::string child(const std::string& path, const std::string& key) {
    return path + "/" + key;
}
inline std::string child(const std::string& path, std::size_t i) {
    return path + "/" + std::to_string(i);
}

inline const json& field(const json& j, const std::string& key, const std::string& path) {
    if (!j.is_object()) throw SchemaError(path, "expected an object");
    auto it = j.find(key);
    if (it == j.end()) throw SchemaError(path, "missing field \"" + key + "\"");
    return *it;
}

inline double number(const json& j, const std::string& path) {
    if (!j.is_number()) throw SchemaError(path, "expected a number");
    return j.get<double>();
}

inline double endpoint(const json& j, const std::string& path) {
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        throw SchemaError(path, "unknown endpoint \"" + s + "\"");
    }
    return number(j, path);
}

inline std::int64_t integer(const json& j, const std::string& path) {
    if (!j.is_number_integer()) throw SchemaError(path, "expected an integer");
    return j.get<std::int64_t>();
}

inline const json& array(const json& j, const std::string& path) {
    if (!j.is_array()) throw SchemaError(path, "expected an array");
    return j;
}

/// Single-key object -> (key, value).
inline std::pair<std::string, const json*> tagged(const json& j, const std::string& path) {
    if (!j.is_object() || j.size() != 1) {
        throw SchemaError(path, "expected an object with exactly one tag");
    }
    return {j.begin().key(), &j.begin().value()};
}

inline json endpoint_json(double v) {
    if (std::isinf(v)) return v > 0 ? json("inf") : json("-inf");
    return v;
}

/// Non-finite numbers become null.
inline json number_json(double v) {
    if (!std::isfinite(v)) return nullptr;
    return v;
}

template <class Fn>
auto wrap(const std::string& path, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const SchemaError&) {
        throw;
    } catch (const Error& e) {
        throw SchemaError(path, e.what());
    }
}

} // namespace detail

// ---------------------------------------------------------------------------
// ValueSpace

inline json to_json(const ValueSpace& s) {
    switch (s.kind()) {
    case ValueSpace::Kind::RealLine: return "real";
    case ValueSpace::Kind::UnitInterval: return "unit";
    case ValueSpace::Kind::Discrete: return json{{"discrete", s.points()}};
    }
    return nullptr;
}

inline ValueSpace value_space_from_json(const json& j, const std::string& path = "") {
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "real") return ValueSpace::real_line();
        if (s == "unit") return ValueSpace::unit_interval();
        throw SchemaError(path, "unknown value space \"" + s + "\"");
    }
    const auto [tag, body] = detail::tagged(j, path);
    if (tag != "discrete") throw SchemaError(path, "unknown value space \"" + tag + "\"");
    const auto m = detail::integer(*body, detail::child(path, tag));
    return detail::wrap(path, [&] { return ValueSpace::discrete(m); });
}

// ---------------------------------------------------------------------------
// SetExpr

inline json to_json(const SetExpr& b) {
    switch (b.kind()) {
    case SetExpr::Kind::Closed: return json{{"closed", {b.lo(), b.hi()}}};
    case SetExpr::Kind::Open:
        return json{{"open", {detail::endpoint_json(b.lo()), detail::endpoint_json(b.hi())}}};
    case SetExpr::Kind::Points: return json{{"points", b.point_list()}};
    case SetExpr::Kind::Full: return "full";
    case SetExpr::Kind::Empty: return "empty";
    case SetExpr::Kind::Union:
    case SetExpr::Kind::Intersection: {
        json parts = json::array();
        for (const auto& c : b.children()) parts.push_back(to_json(c));
        return json{{b.kind() == SetExpr::Kind::Union ? "union" : "intersection", parts}};
    }
    case SetExpr::Kind::Complement: return json{{"complement", to_json(b.children().front())}};
    }
    return nullptr;
}

inline SetExpr set_from_json(const json& j, const std::string& path = "") {
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "full") return SetExpr::full();
        if (s == "empty") return SetExpr::empty();
        throw SchemaError(path, "unknown set \"" + s + "\"");
    }
    const auto [tag, body] = detail::tagged(j, path);
    const auto p = detail::child(path, tag);
    if (tag == "closed" || tag == "open") {
        const auto& ab = detail::array(*body, p);
        if (ab.size() != 2) throw SchemaError(p, "interval needs [a, b]");
        const double a = detail::endpoint(ab[0], detail::child(p, 0));
        const double b = detail::endpoint(ab[1], detail::child(p, 1));
        return detail::wrap(p, [&] { return tag == "closed" ? SetExpr::closed(a, b) : SetExpr::open(a, b); });
    }
    if (tag == "points") {
        std::vector<std::int64_t> pts;
        const auto& arr = detail::array(*body, p);
        for (std::size_t i = 0; i < arr.size(); ++i) pts.push_back(detail::integer(arr[i], detail::child(p, i)));
        return SetExpr::points(std::move(pts));
    }
    if (tag == "union" || tag == "intersection") {
        std::vector<SetExpr> parts;
        const auto& arr = detail::array(*body, p);
        for (std::size_t i = 0; i < arr.size(); ++i) parts.push_back(set_from_json(arr[i], detail::child(p, i)));
        return tag == "union" ? SetExpr::union_of(std::move(parts))
                              : SetExpr::intersection_of(std::move(parts));
    }
    if (tag == "complement") return SetExpr::complement(set_from_json(*body, p));
    throw SchemaError(path, "unknown set tag \"" + tag + "\"");
}

// ---------------------------------------------------------------------------
// ReferenceDistribution

inline json to_json(const ReferenceDistribution& mu) {
    switch (mu.kind()) {
    case ReferenceDistribution::Kind::UniformOnUnitInterval: return "uniform";
    case ReferenceDistribution::Kind::PiecewiseLinearCdf: {
        json knots = json::array();
        for (const auto& k : mu.knots()) knots.push_back({k.x, k.cdf});
        return json{{"piecewise_linear_cdf", knots}};
    }
    case ReferenceDistribution::Kind::DiscretePmf: return json{{"pmf", mu.weights()}};
    case ReferenceDistribution::Kind::EmpiricalSample:
        return json{{"empirical", {{"space", to_json(mu.space())}, {"values", mu.values()}}}};
    }
    return nullptr;
}

inline ReferenceDistribution distribution_from_json(const json& j, const std::string& path = "") {
    if (j.is_string()) {
        if (j.get<std::string>() == "uniform") return ReferenceDistribution::uniform();
        throw SchemaError(path, "unknown distribution \"" + j.get<std::string>() + "\"");
    }
    const auto [tag, body] = detail::tagged(j, path);
    const auto p = detail::child(path, tag);
    if (tag == "uniform") return ReferenceDistribution::uniform();
    if (tag == "piecewise_linear_cdf") {
        std::vector<ReferenceDistribution::Knot> knots;
        const auto& arr = detail::array(*body, p);
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const auto kp = detail::child(p, i);
            const auto& pair = detail::array(arr[i], kp);
            if (pair.size() != 2) throw SchemaError(kp, "knot needs [x, F]");
            knots.push_back({detail::number(pair[0], detail::child(kp, 0)),
                             detail::number(pair[1], detail::child(kp, 1))});
        }
        return detail::wrap(p, [&] { return ReferenceDistribution::piecewise_linear_cdf(knots); });
    }
    if (tag == "pmf") {
        std::vector<double> w;
        const auto& arr = detail::array(*body, p);
        for (std::size_t i = 0; i < arr.size(); ++i) w.push_back(detail::number(arr[i], detail::child(p, i)));
        return detail::wrap(p, [&] { return ReferenceDistribution::pmf(w); });
    }
    if (tag == "empirical") {
        const auto space = value_space_from_json(detail::field(*body, "space", p), detail::child(p, "space"));
        std::vector<double> v;
        const auto vp = detail::child(p, "values");
        const auto& arr = detail::array(detail::field(*body, "values", p), vp);
        for (std::size_t i = 0; i < arr.size(); ++i) v.push_back(detail::number(arr[i], detail::child(vp, i)));
        return detail::wrap(p, [&] { return ReferenceDistribution::empirical(space, v); });
    }
    throw SchemaError(path, "unknown distribution tag \"" + tag + "\"");
}

// ---------------------------------------------------------------------------
// Expr and RhoSpec

namespace detail {

inline const std::map<std::string, Expr::Op>& op_names() {
    static const std::map<std::string, Expr::Op> names = {
        {"add", Expr::Op::Add}, {"sub", Expr::Op::Sub}, {"mul", Expr::Op::Mul},
        {"min", Expr::Op::Min}, {"max", Expr::Op::Max}, {"lt", Expr::Op::Lt},
        {"le", Expr::Op::Le},   {"gt", Expr::Op::Gt},   {"ge", Expr::Op::Ge}};
    return names;
}

} // namespace detail

inline json to_json(const Expr& e) {
    switch (e.op()) {
    case Expr::Op::Const: return json{{"const", e.value()}};
    case Expr::Op::Latent: return json{{"xi", e.sigma()}};
    case Expr::Op::Step:
        return json{{"step",
                     {{"arg", to_json(e.args().front())},
                      {"breaks", e.breaks()},
                      {"values", e.step_values()}}}};
    default: break;
    }
    for (const auto& [name, op] : detail::op_names()) {
        if (op == e.op()) {
            json args = json::array();
            for (const auto& a : e.args()) args.push_back(to_json(a));
            return json{{name, args}};
        }
    }
    return nullptr;
}

inline Expr expr_from_json(const json& j, const std::string& path = "") {
    const auto [tag, body] = detail::tagged(j, path);
    const auto p = detail::child(path, tag);
    if (tag == "const") return Expr::constant(detail::number(*body, p));
    if (tag == "xi") {
        std::vector<std::size_t> sigma;
        const auto& arr = detail::array(*body, p);
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const auto v = detail::integer(arr[i], detail::child(p, i));
            if (v <= 0) throw SchemaError(detail::child(p, i), "latent positions are 1-based");
            sigma.push_back(static_cast<std::size_t>(v));
        }
        return detail::wrap(p, [&] { return Expr::xi(sigma); });
    }
    if (tag == "step") {
        const auto arg = expr_from_json(detail::field(*body, "arg", p), detail::child(p, "arg"));
        std::vector<double> breaks, values;
        const auto bp = detail::child(p, "breaks");
        const auto& barr = detail::array(detail::field(*body, "breaks", p), bp);
        for (std::size_t i = 0; i < barr.size(); ++i) breaks.push_back(detail::number(barr[i], detail::child(bp, i)));
        const auto vp = detail::child(p, "values");
        const auto& varr = detail::array(detail::field(*body, "values", p), vp);
        for (std::size_t i = 0; i < varr.size(); ++i) values.push_back(detail::number(varr[i], detail::child(vp, i)));
        return detail::wrap(p, [&] { return Expr::step(arg, breaks, values); });
    }
    auto it = detail::op_names().find(tag);
    if (it == detail::op_names().end()) throw SchemaError(path, "unknown expression tag \"" + tag + "\"");
    std::vector<Expr> args;
    const auto& arr = detail::array(*body, p);
    for (std::size_t i = 0; i < arr.size(); ++i) args.push_back(expr_from_json(arr[i], detail::child(p, i)));
    return detail::wrap(p, [&] { return Expr::apply(it->second, std::move(args)); });
}

inline json to_json(const RhoSpec& rho) {
    json j{{"version", kSchemaVersion},
           {"arity", rho.arity()},
           {"dissociated", rho.dissociated()},
           {"output", to_json(rho.output())}};
    std::visit(
        [&](const auto& b) {
            using T = std::decay_t<decltype(b)>;
            if constexpr (std::is_same_v<T, ConstantGraphon>) {
                j["family"] = {{"constant_graphon", {{"p", b.p}}}};
            } else if constexpr (std::is_same_v<T, ProductGraphon>) {
                j["family"] = {{"product_graphon", json::object()}};
            } else if constexpr (std::is_same_v<T, StepGraphon>) {
                j["family"] = {{"step_graphon", {{"matrix", b.matrix}}}};
            } else if constexpr (std::is_same_v<T, CoinMixture>) {
                j["family"] = {{"coin_mixture", {{"probs", b.probs}, {"weights", b.weights}}}};
            } else if constexpr (std::is_same_v<T, IdentityLatent>) {
                j["family"] = {{"identity_latent", json::object()}};
            } else {
                j["expr"] = to_json(b);
            }
        },
        rho.body());
    return j;
}

/// Built-in families default arity, dissociated flag and output space; any
/// field given explicitly overrides the default (validate_spec then reports
/// inconsistencies).
inline RhoSpec rho_from_json(const json& j, const std::string& path = "") {
    if (!j.is_object()) throw SchemaError(path, "rho spec must be an object");
    if (j.contains("version")) {
        const auto v = detail::integer(j["version"], detail::child(path, "version"));
        if (v != kSchemaVersion) throw SchemaError(detail::child(path, "version"), "unsupported version");
    }
    const bool has_family = j.contains("family");
    const bool has_expr = j.contains("expr");
    if (has_family == has_expr) throw SchemaError(path, "rho spec needs exactly one of \"family\" or \"expr\"");

    auto opt_arity = [&]() -> std::optional<std::size_t> {
        if (!j.contains("arity")) return std::nullopt;
        const auto a = detail::integer(j["arity"], detail::child(path, "arity"));
        if (a <= 0 || a > static_cast<std::int64_t>(kMaxArity)) {
            throw SchemaError(detail::child(path, "arity"), "arity must be in 1.." + std::to_string(kMaxArity));
        }
        return static_cast<std::size_t>(a);
    }();
    auto opt_dissoc = [&]() -> std::optional<bool> {
        if (!j.contains("dissociated")) return std::nullopt;
        if (!j["dissociated"].is_boolean()) throw SchemaError(detail::child(path, "dissociated"), "expected a boolean");
        return j["dissociated"].get<bool>();
    }();
    auto opt_output = [&]() -> std::optional<ValueSpace> {
        if (!j.contains("output")) return std::nullopt;
        return value_space_from_json(j["output"], detail::child(path, "output"));
    }();

    if (has_expr) {
        const auto ep = detail::child(path, "expr");
        if (!opt_arity || !opt_dissoc || !opt_output) {
            throw SchemaError(path, "expression specs need \"arity\", \"dissociated\" and \"output\"");
        }
        return detail::wrap(path, [&] {
            return RhoSpec::expression(*opt_arity, *opt_dissoc, *opt_output, expr_from_json(j["expr"], ep));
        });
    }

    const auto fp = detail::child(path, "family");
    const auto [tag, body] = detail::tagged(j["family"], fp);
    const auto p = detail::child(fp, tag);
    auto numbers = [&](const json& arr, const std::string& ap) {
        std::vector<double> out;
        detail::array(arr, ap);
        for (std::size_t i = 0; i < arr.size(); ++i) out.push_back(detail::number(arr[i], detail::child(ap, i)));
        return out;
    };
    RhoSpec base = [&]() -> RhoSpec {
        if (tag == "constant_graphon") {
            return RhoSpec::constant_graphon(detail::number(detail::field(*body, "p", p), detail::child(p, "p")));
        }
        if (tag == "product_graphon") return RhoSpec::product_graphon();
        if (tag == "step_graphon") {
            const auto mp = detail::child(p, "matrix");
            const auto& rows = detail::array(detail::field(*body, "matrix", p), mp);
            std::vector<std::vector<double>> matrix;
            for (std::size_t i = 0; i < rows.size(); ++i) matrix.push_back(numbers(rows[i], detail::child(mp, i)));
            return RhoSpec::step_graphon(std::move(matrix));
        }
        if (tag == "coin_mixture") {
            return RhoSpec::coin_mixture(
                numbers(detail::field(*body, "probs", p), detail::child(p, "probs")),
                numbers(detail::field(*body, "weights", p), detail::child(p, "weights")));
        }
        if (tag == "identity_latent") return RhoSpec::identity_latent(opt_arity.value_or(2));
        throw SchemaError(fp, "unknown family \"" + tag + "\"");
    }();
    return detail::wrap(path, [&] {
        return RhoSpec(opt_arity.value_or(base.arity()), opt_dissoc.value_or(base.dissociated()),
                       opt_output.value_or(base.output()), base.body());
    });
}

// ---------------------------------------------------------------------------
// EventHypergraph

inline json to_json(const EventHypergraph& h) {
    json constraints = json::object();
    for (const auto& c : h.constraints()) constraints[h.describe_edge(c.edge)] = to_json(c.set);
    return json{{"vertices", h.vertices()},
                {"arity", h.arity()},
                {"space", to_json(h.space())},
                {"constraints", constraints}};
}

/// `default_space` is used when the file has no "space" field.
inline EventHypergraph event_from_json(const json& j, std::optional<ValueSpace> default_space = {},
                                       const std::string& path = "") {
    const auto vp = detail::child(path, "vertices");
    const auto& varr = detail::array(detail::field(j, "vertices", path), vp);
    std::vector<std::string> vertices;
    for (std::size_t i = 0; i < varr.size(); ++i) {
        if (!varr[i].is_string()) throw SchemaError(detail::child(vp, i), "vertex labels are strings");
        vertices.push_back(varr[i].get<std::string>());
    }
    const auto a = detail::integer(detail::field(j, "arity", path), detail::child(path, "arity"));
    if (a <= 0) throw SchemaError(detail::child(path, "arity"), "arity must be positive");
    std::optional<ValueSpace> space = default_space;
    if (j.contains("space")) space = value_space_from_json(j["space"], detail::child(path, "space"));
    if (!space) throw SchemaError(path, "missing field \"space\"");

    const auto cp = detail::child(path, "constraints");
    const auto& cobj = detail::field(j, "constraints", path);
    if (!cobj.is_object()) throw SchemaError(cp, "expected an object keyed by comma-separated labels");
    std::map<std::vector<std::string>, SetExpr> constraints;
    for (auto it = cobj.begin(); it != cobj.end(); ++it) {
        std::vector<std::string> labels;
        std::stringstream ss(it.key());
        std::string item;
        while (std::getline(ss, item, ',')) {
            const auto b = item.find_first_not_of(' ');
            const auto e = item.find_last_not_of(' ');
            labels.push_back(b == std::string::npos ? std::string{} : item.substr(b, e - b + 1));
        }
        const auto kp = detail::child(cp, it.key());
        auto set = set_from_json(it.value(), kp);
        std::sort(labels.begin(), labels.end());
        if (!constraints.emplace(labels, std::move(set)).second) {
            throw SchemaError(kp, "duplicate constraint");
        }
    }
    return detail::wrap(path, [&] {
        return EventHypergraph(vertices, static_cast<std::size_t>(a), *space, constraints);
    });
}

// ---------------------------------------------------------------------------
// Reports

inline json to_json(const EstimateReport& r) {
    return json{{"estimate", r.estimate},
                {"standard_error", r.standard_error},
                {"ci99", {r.ci_low, r.ci_high}},
                {"replicates", r.replicates},
                {"successes", r.successes},
                {"seed", r.seed},
                {"mode", to_string(r.mode)},
                {"M", r.index_bound}};
}

inline json to_json(const TestReport& t) {
    json j{{"test", t.kind},
           {"z", detail::number_json(t.z)},
           {"threshold", t.threshold},
           {"verdict", to_string(t.verdict)},
           {"first", to_json(t.first)},
           {"second", to_json(t.second)}};
    if (!t.marginals.empty()) {
        json m = json::array();
        for (const auto& r : t.marginals) m.push_back(to_json(r));
        j["marginals"] = m;
    }
    return j;
}

inline json to_json(const ConvergenceTable& t) {
    json rows = json::array();
    for (const auto& r : t.rows) {
        rows.push_back({{"M", r.m},
                        {"injectivity", r.injectivity},
                        {"empirical", to_json(r.empirical)},
                        {"corrected", to_json(r.corrected)},
                        {"expected", r.expected},
                        {"z", detail::number_json(r.z)},
                        {"degenerate", r.degenerate}});
    }
    return json{{"direct", to_json(t.direct)}, {"rows", rows}};
}

inline json to_json(const SecondMomentReport& r) {
    return json{{"M", r.m},
                {"blocks", r.blocks},
                {"block_size", r.block_size},
                {"placements_per_block", r.placements},
                {"realizations", r.realizations},
                {"seed", r.seed},
                {"mean_frequency", r.mean_frequency},
                {"within_variance", r.within_variance},
                {"across_variance", r.across_variance},
                {"binomial_variance", r.binomial_variance},
                {"ratio", detail::number_json(r.ratio)},
                {"within_over_binomial", detail::number_json(r.within_over_binomial)},
                {"degenerate", r.degenerate},
                {"note", r.note}};
}

inline json to_json(const Histogram& h) {
    json bins = json::array();
    for (std::size_t i = 0; i < h.mass.size(); ++i) {
        bins.push_back({{"bin_left", h.edges[i]}, {"bin_right", h.edges[i + 1]}, {"mass", h.mass[i]}});
    }
    return json{{"replicates", h.replicates}, {"seed", h.seed}, {"bins", bins}};
}

inline json to_json(const BlockEstimate& e) {
    return json{{"blocks", e.blocks},
                {"matrix", e.matrix},
                {"assignment", e.assignment},
                {"group_sizes", e.group_sizes}};
}

inline json to_json(const ValidationReport& v) {
    return json{{"valid", v.valid}, {"dissociated", v.dissociated}, {"findings", v.findings}};
}

inline json edge_list_json(const RealizedArray& a) {
    json edges = json::array();
    a.for_each([&](std::span<const std::uint64_t> e, double v) {
        edges.push_back({{"edge", std::vector<std::uint64_t>(e.begin(), e.end())}, {"value", v}});
    });
    return json{{"arity", a.arity()}, {"k", a.index_bound()}, {"seed", a.seed()}, {"edges", edges}};
}

// ---------------------------------------------------------------------------
// CSV

namespace detail {

inline std::string num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

inline std::string estimate_header(const std::string& prefix) {
    return prefix + "estimate," + prefix + "standard_error," + prefix + "ci_low," + prefix +
           "ci_high," + prefix + "replicates," + prefix + "successes";
}

inline std::string estimate_row(const EstimateReport& r) {
    return num(r.estimate) + "," + num(r.standard_error) + "," + num(r.ci_low) + "," +
           num(r.ci_high) + "," + std::to_string(r.replicates) + "," + std::to_string(r.successes);
}

} // namespace detail

inline std::string to_csv(const EstimateReport& r) {
    return "mode,M,seed," + detail::estimate_header("") + "\n" + to_string(r.mode) + "," +
           std::to_string(r.index_bound) + "," + std::to_string(r.seed) + "," +
           detail::estimate_row(r) + "\n";
}

inline std::string to_csv(const ConvergenceTable& t) {
    std::string out = "M,injectivity,p_M,se_M,p_M_corrected,se_corrected,p_direct,se_direct,expected,z,degenerate\n";
    for (const auto& r : t.rows) {
        out += std::to_string(r.m) + "," + detail::num(r.injectivity) + "," +
               detail::num(r.empirical.estimate) + "," + detail::num(r.empirical.standard_error) + "," +
               detail::num(r.corrected.estimate) + "," + detail::num(r.corrected.standard_error) + "," +
               detail::num(t.direct.estimate) + "," + detail::num(t.direct.standard_error) + "," +
               detail::num(r.expected) + "," + detail::num(r.z) + "," + (r.degenerate ? "1" : "0") + "\n";
    }
    return out;
}

inline std::string to_csv(const TestReport& t) {
    return "test,z,threshold,verdict," + detail::estimate_header("first_") + "," +
           detail::estimate_header("second_") + "\n" + t.kind + "," + detail::num(t.z) + "," +
           detail::num(t.threshold) + "," + to_string(t.verdict) + "," + detail::estimate_row(t.first) +
           "," + detail::estimate_row(t.second) + "\n";
}

inline std::string to_csv(const SecondMomentReport& r) {
    return "M,blocks,block_size,placements,realizations,mean_frequency,within_variance,"
           "across_variance,binomial_variance,ratio,degenerate\n" +
           std::to_string(r.m) + "," + std::to_string(r.blocks) + "," + std::to_string(r.block_size) +
           "," + std::to_string(r.placements) + "," + std::to_string(r.realizations) + "," +
           detail::num(r.mean_frequency) + "," + detail::num(r.within_variance) + "," +
           detail::num(r.across_variance) + "," + detail::num(r.binomial_variance) + "," +
           detail::num(r.ratio) + "," + (r.degenerate ? "1" : "0") + "\n";
}

inline std::string to_csv(const Histogram& h) {
    std::string out = "bin_left,bin_right,mass\n";
    for (std::size_t i = 0; i < h.mass.size(); ++i) {
        out += detail::num(h.edges[i]) + "," + detail::num(h.edges[i + 1]) + "," + detail::num(h.mass[i]) + "\n";
    }
    return out;
}

inline std::string to_csv(const BlockEstimate& e) {
    std::string out = "row,col,density\n";
    for (std::size_t i = 0; i < e.blocks; ++i) {
        for (std::size_t j = 0; j < e.blocks; ++j) {
            out += std::to_string(i) + "," + std::to_string(j) + "," + detail::num(e.matrix[i][j]) + "\n";
        }
    }
    return out;
}

inline std::string edge_list_csv(const RealizedArray& a) {
    std::string out;
    for (std::size_t i = 0; i < a.arity(); ++i) out += "i" + std::to_string(i + 1) + ",";
    out += "value\n";
    a.for_each([&](std::span<const std::uint64_t> e, double v) {
        for (auto idx : e) out += std::to_string(idx) + ",";
        out += detail::num(v) + "\n";
    });
    return out;
}

} // namespace exarray::io
