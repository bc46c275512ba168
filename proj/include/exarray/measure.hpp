#pragma once

// Value spaces, measurable-set expressions and their exact measures.
//
// Sets are normalized to sorted disjoint intervals (real spaces) or sorted
// point lists (discrete spaces) before measuring. The compact class is the
// finite unions of closed bounded intervals on real spaces and all subsets of
// a finite discrete space.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "exarray/errors.hpp"

namespace exarray {

class ValueSpace {
public:
    enum class Kind { RealLine, UnitInterval, Discrete };

    static ValueSpace real_line() noexcept { return ValueSpace(Kind::RealLine, 0); }
    static ValueSpace unit_interval() noexcept { return ValueSpace(Kind::UnitInterval, 0); }
    static ValueSpace discrete(std::int64_t m) {
        if (m <= 0) throw DomainError("discrete space needs a positive number of points");
        return ValueSpace(Kind::Discrete, m);
    }

    Kind kind() const noexcept { return kind_; }
    /// Number of points of a discrete space; 0 otherwise.
    std::int64_t points() const noexcept { return m_; }
    bool is_discrete() const noexcept { return kind_ == Kind::Discrete; }
    bool is_real() const noexcept { return !is_discrete(); }

    bool admits(double x) const noexcept {
        switch (kind_) {
        case Kind::RealLine: return std::isfinite(x);
        case Kind::UnitInterval: return x >= 0.0 && x <= 1.0;
        case Kind::Discrete:
            return x == std::floor(x) && x >= 0.0 && x < static_cast<double>(m_);
        }
        return false;
    }

    std::string describe() const {
        switch (kind_) {
        case Kind::RealLine: return "RealLine";
        case Kind::UnitInterval: return "UnitInterval";
        case Kind::Discrete: return "Discrete(" + std::to_string(m_) + ")";
        }
        return "?";
    }

    friend bool operator==(const ValueSpace&, const ValueSpace&) = default;

private:
    ValueSpace(Kind k, std::int64_t m) : kind_(k), m_(m) {}
    Kind kind_;
    std::int64_t m_;
};

/// Expression tree describing a measurable set.
class SetExpr {
public:
    enum class Kind { Closed, Open, Points, Full, Empty, Union, Intersection, Complement };

    static SetExpr closed(double a, double b) {
        if (!std::isfinite(a) || !std::isfinite(b) || a > b) {
            throw DomainError("closed interval needs finite endpoints with a <= b");
        }
        SetExpr s(Kind::Closed);
        s.lo_ = a;
        s.hi_ = b;
        return s;
    }
    /// Infinite endpoints are allowed; (a, a) is empty.
    static SetExpr open(double a, double b) {
        if (std::isnan(a) || std::isnan(b) || a > b) {
            throw DomainError("open interval needs a <= b");
        }
        SetExpr s(Kind::Open);
        s.lo_ = a;
        s.hi_ = b;
        return s;
    }
    static SetExpr points(std::vector<std::int64_t> pts) {
        std::sort(pts.begin(), pts.end());
        pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
        SetExpr s(Kind::Points);
        s.points_ = std::move(pts);
        return s;
    }
    static SetExpr full() { return SetExpr(Kind::Full); }
    static SetExpr empty() { return SetExpr(Kind::Empty); }
    static SetExpr union_of(std::vector<SetExpr> parts) {
        SetExpr s(Kind::Union);
        s.children_ = std::move(parts);
        return s;
    }
    static SetExpr intersection_of(std::vector<SetExpr> parts) {
        SetExpr s(Kind::Intersection);
        s.children_ = std::move(parts);
        return s;
    }
    static SetExpr complement(SetExpr inner) {
        SetExpr s(Kind::Complement);
        s.children_.push_back(std::move(inner));
        return s;
    }

    Kind kind() const noexcept { return kind_; }
    double lo() const noexcept { return lo_; }
    double hi() const noexcept { return hi_; }
    const std::vector<std::int64_t>& point_list() const noexcept { return points_; }
    const std::vector<SetExpr>& children() const noexcept { return children_; }

    friend bool operator==(const SetExpr&, const SetExpr&) = default;

private:
    explicit SetExpr(Kind k) : kind_(k) {}

    Kind kind_;
    double lo_ = 0.0;
    double hi_ = 0.0;
    std::vector<std::int64_t> points_;
    std::vector<SetExpr> children_;
};

/// Set-theoretic membership, no typing checks.
inline bool contains(const SetExpr& b, double x) noexcept {
    switch (b.kind()) {
    case SetExpr::Kind::Closed: return x >= b.lo() && x <= b.hi();
    case SetExpr::Kind::Open: return x > b.lo() && x < b.hi();
    case SetExpr::Kind::Points: {
        if (x != std::floor(x)) return false;
        const auto& p = b.point_list();
        return std::binary_search(p.begin(), p.end(), static_cast<std::int64_t>(x));
    }
    case SetExpr::Kind::Full: return true;
    case SetExpr::Kind::Empty: return false;
    case SetExpr::Kind::Union:
        return std::any_of(b.children().begin(), b.children().end(),
                           [x](const SetExpr& c) { return contains(c, x); });
    case SetExpr::Kind::Intersection:
        return std::all_of(b.children().begin(), b.children().end(),
                           [x](const SetExpr& c) { return contains(c, x); });
    case SetExpr::Kind::Complement: return !contains(b.children().front(), x);
    }
    return false;
}

/// Throws TypingError when a leaf of `b` cannot live in `space`: point lists
/// belong to discrete spaces and interval leaves to real ones.
inline void check_typing(const ValueSpace& space, const SetExpr& b) {
    switch (b.kind()) {
    case SetExpr::Kind::Closed:
    case SetExpr::Kind::Open:
        if (space.is_discrete()) {
            throw TypingError("interval leaf used on " + space.describe());
        }
        return;
    case SetExpr::Kind::Points:
        if (!space.is_discrete()) {
            throw TypingError("point-set leaf used on " + space.describe());
        }
        for (auto p : b.point_list()) {
            if (p < 0 || p >= space.points()) {
                throw TypingError("point " + std::to_string(p) + " outside " + space.describe());
            }
        }
        return;
    case SetExpr::Kind::Union:
    case SetExpr::Kind::Intersection:
    case SetExpr::Kind::Complement:
        for (const auto& c : b.children()) check_typing(space, c);
        return;
    case SetExpr::Kind::Full:
    case SetExpr::Kind::Empty: return;
    }
}

/// Membership with typing: `x` must lie in `space` and `b` must type-check.
inline bool contains(const ValueSpace& space, const SetExpr& b, double x) {
    if (!space.admits(x)) {
        throw TypingError("value " + std::to_string(x) + " is not a point of " + space.describe());
    }
    check_typing(space, b);
    return contains(b, x);
}

// ---------------------------------------------------------------------------
// Normal forms

/// One connected component with explicit endpoint closedness. Infinite
/// endpoints are always open.
struct Interval {
    double lo;
    double hi;
    bool lo_closed;
    bool hi_closed;

    bool empty() const noexcept {
        return lo > hi || (lo == hi && !(lo_closed && hi_closed));
    }
    bool contains(double x) const noexcept {
        return (x > lo || (lo_closed && x == lo)) && (x < hi || (hi_closed && x == hi));
    }
    friend bool operator==(const Interval&, const Interval&) = default;
};

/// Sorted, pairwise disjoint, non-adjacent intervals.
class IntervalSet {
public:
    IntervalSet() = default;

    static IntervalSet of(std::vector<Interval> parts) {
        IntervalSet s;
        for (auto& p : parts) {
            if (std::isinf(p.lo)) p.lo_closed = false;
            if (std::isinf(p.hi)) p.hi_closed = false;
        }
        std::erase_if(parts, [](const Interval& p) { return p.empty(); });
        std::sort(parts.begin(), parts.end(), [](const Interval& a, const Interval& b) {
            if (a.lo != b.lo) return a.lo < b.lo;
            return a.lo_closed && !b.lo_closed;
        });
        for (const auto& p : parts) {
            if (!s.parts_.empty()) {
                Interval& last = s.parts_.back();
                const bool touches =
                    p.lo < last.hi || (p.lo == last.hi && (p.lo_closed || last.hi_closed));
                if (touches) {
                    if (p.hi > last.hi) {
                        last.hi = p.hi;
                        last.hi_closed = p.hi_closed;
                    } else if (p.hi == last.hi) {
                        last.hi_closed = last.hi_closed || p.hi_closed;
                    }
                    continue;
                }
            }
            s.parts_.push_back(p);
        }
        return s;
    }

    static IntervalSet real_line() {
        return of({{-std::numeric_limits<double>::infinity(),
                    std::numeric_limits<double>::infinity(), false, false}});
    }

    const std::vector<Interval>& parts() const noexcept { return parts_; }
    bool empty() const noexcept { return parts_.empty(); }

    bool contains(double x) const noexcept {
        return std::any_of(parts_.begin(), parts_.end(),
                           [x](const Interval& p) { return p.contains(x); });
    }

    IntervalSet unite(const IntervalSet& other) const {
        std::vector<Interval> all = parts_;
        all.insert(all.end(), other.parts_.begin(), other.parts_.end());
        return of(std::move(all));
    }

    IntervalSet intersect(const IntervalSet& other) const {
        std::vector<Interval> out;
        std::size_t i = 0, j = 0;
        while (i < parts_.size() && j < other.parts_.size()) {
            const Interval& a = parts_[i];
            const Interval& b = other.parts_[j];
            Interval c{};
            if (a.lo > b.lo) {
                c.lo = a.lo;
                c.lo_closed = a.lo_closed;
            } else if (b.lo > a.lo) {
                c.lo = b.lo;
                c.lo_closed = b.lo_closed;
            } else {
                c.lo = a.lo;
                c.lo_closed = a.lo_closed && b.lo_closed;
            }
            if (a.hi < b.hi) {
                c.hi = a.hi;
                c.hi_closed = a.hi_closed;
            } else if (b.hi < a.hi) {
                c.hi = b.hi;
                c.hi_closed = b.hi_closed;
            } else {
                c.hi = a.hi;
                c.hi_closed = a.hi_closed && b.hi_closed;
            }
            if (!c.empty()) out.push_back(c);
            const bool a_first = a.hi < b.hi || (a.hi == b.hi && !a.hi_closed);
            if (a_first) {
                ++i;
            } else {
                ++j;
            }
        }
        return of(std::move(out));
    }

    /// Complement relative to the whole real line.
    IntervalSet complement() const {
        constexpr double inf = std::numeric_limits<double>::infinity();
        std::vector<Interval> gaps;
        double lo = -inf;
        bool lo_closed = false;
        for (const auto& p : parts_) {
            gaps.push_back({lo, p.lo, lo_closed, !p.lo_closed});
            lo = p.hi;
            lo_closed = !p.hi_closed;
        }
        gaps.push_back({lo, inf, lo_closed, false});
        return of(std::move(gaps));
    }

    friend bool operator==(const IntervalSet&, const IntervalSet&) = default;

private:
    std::vector<Interval> parts_;
};

/// Sorted distinct points of a discrete space.
using PointSet = std::vector<std::int64_t>;

using NormalForm = std::variant<IntervalSet, PointSet>;

namespace detail {

inline IntervalSet universe_intervals(const ValueSpace& space) {
    if (space.kind() == ValueSpace::Kind::UnitInterval) {
        return IntervalSet::of({{0.0, 1.0, true, true}});
    }
    return IntervalSet::real_line();
}

inline IntervalSet normalize_real(const ValueSpace& space, const SetExpr& b) {
    switch (b.kind()) {
    case SetExpr::Kind::Closed:
        return IntervalSet::of({{b.lo(), b.hi(), true, true}}).intersect(universe_intervals(space));
    case SetExpr::Kind::Open:
        return IntervalSet::of({{b.lo(), b.hi(), false, false}})
            .intersect(universe_intervals(space));
    case SetExpr::Kind::Full: return universe_intervals(space);
    case SetExpr::Kind::Empty: return {};
    case SetExpr::Kind::Union: {
        IntervalSet acc;
        for (const auto& c : b.children()) acc = acc.unite(normalize_real(space, c));
        return acc;
    }
    case SetExpr::Kind::Intersection: {
        IntervalSet acc = universe_intervals(space);
        for (const auto& c : b.children()) acc = acc.intersect(normalize_real(space, c));
        return acc;
    }
    case SetExpr::Kind::Complement:
        return normalize_real(space, b.children().front())
            .complement()
            .intersect(universe_intervals(space));
    case SetExpr::Kind::Points: break;
    }
    throw TypingError("point-set leaf used on " + space.describe());
}

inline PointSet normalize_discrete(const ValueSpace& space, const SetExpr& b) {
    const auto m = space.points();
    auto all = [m] {
        PointSet p(static_cast<std::size_t>(m));
        std::iota(p.begin(), p.end(), std::int64_t{0});
        return p;
    };
    switch (b.kind()) {
    case SetExpr::Kind::Points: {
        for (auto p : b.point_list()) {
            if (p < 0 || p >= m) {
                throw TypingError("point " + std::to_string(p) + " outside " + space.describe());
            }
        }
        return b.point_list();
    }
    case SetExpr::Kind::Full: return all();
    case SetExpr::Kind::Empty: return {};
    case SetExpr::Kind::Union: {
        PointSet acc;
        for (const auto& c : b.children()) {
            PointSet next = normalize_discrete(space, c);
            PointSet merged;
            std::set_union(acc.begin(), acc.end(), next.begin(), next.end(),
                           std::back_inserter(merged));
            acc = std::move(merged);
        }
        return acc;
    }
    case SetExpr::Kind::Intersection: {
        PointSet acc = all();
        for (const auto& c : b.children()) {
            PointSet next = normalize_discrete(space, c);
            PointSet kept;
            std::set_intersection(acc.begin(), acc.end(), next.begin(), next.end(),
                                  std::back_inserter(kept));
            acc = std::move(kept);
        }
        return acc;
    }
    case SetExpr::Kind::Complement: {
        PointSet inner = normalize_discrete(space, b.children().front());
        PointSet universe = all();
        PointSet out;
        std::set_difference(universe.begin(), universe.end(), inner.begin(), inner.end(),
                            std::back_inserter(out));
        return out;
    }
    case SetExpr::Kind::Closed:
    case SetExpr::Kind::Open: break;
    }
    throw TypingError("interval leaf used on " + space.describe());
}

} // namespace detail

/// Normal form of `b` inside `space` (intervals are clipped to [0,1] on the
/// unit interval).
inline NormalForm normalize(const ValueSpace& space, const SetExpr& b) {
    if (space.is_discrete()) return detail::normalize_discrete(space, b);
    return detail::normalize_real(space, b);
}

inline bool is_empty_set(const ValueSpace& space, const SetExpr& b) {
    return std::visit([](const auto& nf) { return nf.empty(); }, normalize(space, b));
}

/// Symbolic containment: K minus B is empty in normal form.
inline bool is_subset(const ValueSpace& space, const SetExpr& k, const SetExpr& b) {
    return is_empty_set(space, SetExpr::intersection_of({k, SetExpr::complement(b)}));
}

/// Rebuild an expression from a normal form.
inline SetExpr to_expr(const NormalForm& nf) {
    if (const auto* pts = std::get_if<PointSet>(&nf)) return SetExpr::points(*pts);
    std::vector<SetExpr> parts;
    for (const auto& p : std::get<IntervalSet>(nf).parts()) {
        if (p.lo_closed && p.hi_closed) {
            parts.push_back(SetExpr::closed(p.lo, p.hi));
            continue;
        }
        std::vector<SetExpr> pieces{SetExpr::open(p.lo, p.hi)};
        if (p.lo_closed) pieces.push_back(SetExpr::closed(p.lo, p.lo));
        if (p.hi_closed) pieces.push_back(SetExpr::closed(p.hi, p.hi));
        parts.push_back(pieces.size() == 1 ? pieces.front() : SetExpr::union_of(std::move(pieces)));
    }
    if (parts.empty()) return SetExpr::empty();
    return parts.size() == 1 ? parts.front() : SetExpr::union_of(std::move(parts));
}

// ---------------------------------------------------------------------------
// Reference distributions

class ReferenceDistribution {
public:
    enum class Kind { UniformOnUnitInterval, PiecewiseLinearCdf, DiscretePmf, EmpiricalSample };

    struct Knot {
        double x;
        double cdf;
    };

    static ReferenceDistribution uniform() {
        return ReferenceDistribution(Kind::UniformOnUnitInterval, ValueSpace::unit_interval());
    }

    /// Knots need strictly increasing x, nondecreasing cdf, cdf 0 at the first
    /// knot and 1 at the last.
    static ReferenceDistribution piecewise_linear_cdf(std::vector<Knot> knots) {
        if (knots.size() < 2) throw DomainError("piecewise-linear cdf needs at least two knots");
        for (std::size_t i = 0; i < knots.size(); ++i) {
            if (!std::isfinite(knots[i].x) || !std::isfinite(knots[i].cdf)) {
                throw DomainError("cdf knots must be finite");
            }
            if (i > 0 && (knots[i].x <= knots[i - 1].x || knots[i].cdf < knots[i - 1].cdf)) {
                throw DomainError("cdf knots must have increasing x and nondecreasing cdf");
            }
        }
        if (std::abs(knots.front().cdf) > 1e-12 || std::abs(knots.back().cdf - 1.0) > 1e-12) {
            throw DomainError("cdf must run from 0 to 1 within 1e-12");
        }
        knots.front().cdf = 0.0;
        knots.back().cdf = 1.0;
        ReferenceDistribution d(Kind::PiecewiseLinearCdf, ValueSpace::real_line());
        d.knots_ = std::move(knots);
        return d;
    }

    static ReferenceDistribution pmf(std::vector<double> weights) {
        if (weights.empty()) throw DomainError("pmf needs at least one weight");
        double total = 0.0;
        for (double w : weights) {
            if (!(w >= 0.0) || !std::isfinite(w)) throw DomainError("pmf weights must be >= 0");
            total += w;
        }
        if (std::abs(total - 1.0) > 1e-12) throw DomainError("pmf weights must sum to 1 within 1e-12");
        ReferenceDistribution d(Kind::DiscretePmf,
                                ValueSpace::discrete(static_cast<std::int64_t>(weights.size())));
        d.weights_ = std::move(weights);
        return d;
    }

    static ReferenceDistribution empirical(ValueSpace space, std::vector<double> values) {
        if (values.empty()) throw DomainError("empirical sample is empty");
        for (double v : values) {
            if (!space.admits(v)) {
                throw TypingError("sample value " + std::to_string(v) + " outside " +
                                  space.describe());
            }
        }
        ReferenceDistribution d(Kind::EmpiricalSample, space);
        d.values_ = std::move(values);
        return d;
    }

    Kind kind() const noexcept { return kind_; }
    const ValueSpace& space() const noexcept { return space_; }
    bool analytic() const noexcept { return kind_ != Kind::EmpiricalSample; }
    bool continuous() const noexcept {
        return kind_ == Kind::UniformOnUnitInterval || kind_ == Kind::PiecewiseLinearCdf;
    }
    const std::vector<Knot>& knots() const noexcept { return knots_; }
    const std::vector<double>& weights() const noexcept { return weights_; }
    const std::vector<double>& values() const noexcept { return values_; }

    /// Cumulative distribution function; continuous kinds only.
    double cdf(double x) const {
        if (kind_ == Kind::UniformOnUnitInterval) return std::clamp(x, 0.0, 1.0);
        if (kind_ != Kind::PiecewiseLinearCdf) throw UnsupportedError("cdf needs a continuous law");
        if (x <= knots_.front().x) return 0.0;
        if (x >= knots_.back().x) return 1.0;
        auto it = std::upper_bound(knots_.begin(), knots_.end(), x,
                                   [](double v, const Knot& k) { return v < k.x; });
        const Knot& r = *it;
        const Knot& l = *(it - 1);
        const double t = (x - l.x) / (r.x - l.x);
        return l.cdf + t * (r.cdf - l.cdf);
    }

    double support_lo() const noexcept {
        return kind_ == Kind::PiecewiseLinearCdf ? knots_.front().x : 0.0;
    }
    double support_hi() const noexcept {
        return kind_ == Kind::PiecewiseLinearCdf ? knots_.back().x : 1.0;
    }

private:
    ReferenceDistribution(Kind k, ValueSpace s) : kind_(k), space_(s) {}

    Kind kind_;
    ValueSpace space_;
    std::vector<Knot> knots_;
    std::vector<double> weights_;
    std::vector<double> values_;
};

namespace detail {

inline double interval_mass(const ReferenceDistribution& mu, const IntervalSet& s) {
    double total = 0.0;
    for (const auto& p : s.parts()) total += mu.cdf(p.hi) - mu.cdf(p.lo);
    return total;
}

} // namespace detail

/// Exact probability of `b` under `mu` (counting for empirical samples).
inline double measure_of(const SetExpr& b, const ReferenceDistribution& mu) {
    const ValueSpace& space = mu.space();
    if (mu.kind() == ReferenceDistribution::Kind::EmpiricalSample) {
        try {
            check_typing(space, b);
            (void)normalize(space, b);
        } catch (const TypingError& e) {
            throw UnsupportedError(std::string("set cannot be normalized for this sample: ") +
                                   e.what());
        }
        std::size_t hits = 0;
        for (double v : mu.values()) hits += contains(b, v) ? 1 : 0;
        return static_cast<double>(hits) / static_cast<double>(mu.values().size());
    }
    if (mu.kind() == ReferenceDistribution::Kind::DiscretePmf) {
        double total = 0.0;
        for (auto p : detail::normalize_discrete(space, b)) {
            total += mu.weights()[static_cast<std::size_t>(p)];
        }
        return std::clamp(total, 0.0, 1.0);
    }
    return std::clamp(detail::interval_mass(mu, detail::normalize_real(space, b)), 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Inner approximation by the compact class

namespace detail {

// Largest x in [a, limit] with F(x) - F(a) <= budget.
inline double shrink_lower(const ReferenceDistribution& mu, double a, double limit, double budget) {
    const double fa = mu.cdf(a);
    if (mu.cdf(limit) - fa <= budget) return limit;
    double lo = a, hi = limit;
    for (int i = 0; i < 200; ++i) {
        const double mid = lo + (hi - lo) / 2;
        if (mid <= lo || mid >= hi) break;
        if (mu.cdf(mid) - fa <= budget) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return lo;
}

// Smallest x in [limit, b] with F(b) - F(x) <= budget.
inline double shrink_upper(const ReferenceDistribution& mu, double b, double limit, double budget) {
    const double fb = mu.cdf(b);
    if (fb - mu.cdf(limit) <= budget) return limit;
    double lo = limit, hi = b;
    for (int i = 0; i < 200; ++i) {
        const double mid = lo + (hi - lo) / 2;
        if (mid <= lo || mid >= hi) break;
        if (fb - mu.cdf(mid) <= budget) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return hi;
}

} // namespace detail

/// A finite union K of compact-class sets with K inside B and
/// mu(B) - mu(K) <= eps. Open endpoints are pulled inwards by bisection on
/// the cdf; the budget is split equally over the components that need it and
/// then over each component's open endpoints.
inline SetExpr inner_approx(const SetExpr& b, const ReferenceDistribution& mu, double eps) {
    if (!(eps > 0.0)) throw DomainError("inner_approx needs eps > 0");
    if (!mu.analytic()) throw UnsupportedError("inner_approx needs an analytic distribution");
    const ValueSpace& space = mu.space();
    if (space.is_discrete()) return SetExpr::points(detail::normalize_discrete(space, b));

    const IntervalSet normal = detail::normalize_real(space, b);
    std::vector<Interval> comps;
    for (Interval p : normal.parts()) {
        if (std::isinf(p.lo)) {
            if (!p.contains(mu.support_lo())) continue; // no mass
            p.lo = mu.support_lo();
            p.lo_closed = true;
        }
        if (std::isinf(p.hi)) {
            if (!p.contains(mu.support_hi())) continue;
            p.hi = mu.support_hi();
            p.hi_closed = true;
        }
        comps.push_back(p);
    }

    const auto needs_shrink = [](const Interval& p) { return !(p.lo_closed && p.hi_closed); };
    const auto open_count =
        static_cast<double>(std::count_if(comps.begin(), comps.end(), needs_shrink));
    // Slight under-spend keeps the summed deficit below eps after rounding.
    const double per_component = open_count > 0 ? eps * (1.0 - 1e-9) / open_count : 0.0;

    std::vector<SetExpr> out;
    for (const Interval& p : comps) {
        if (!needs_shrink(p)) {
            out.push_back(SetExpr::closed(p.lo, p.hi));
            continue;
        }
        double lo = p.lo, hi = p.hi;
        if (!p.lo_closed && !p.hi_closed) {
            const double mid = p.lo + (p.hi - p.lo) / 2;
            lo = detail::shrink_lower(mu, p.lo, mid, per_component / 2);
            hi = detail::shrink_upper(mu, p.hi, mid, per_component / 2);
        } else if (!p.lo_closed) {
            lo = detail::shrink_lower(mu, p.lo, p.hi, per_component);
        } else {
            hi = detail::shrink_upper(mu, p.hi, p.lo, per_component);
        }
        // Degenerate float-width components: drop them, their mass is within budget.
        if (!p.lo_closed && lo <= p.lo) lo = std::nextafter(p.lo, p.hi);
        if (!p.hi_closed && hi >= p.hi) hi = std::nextafter(p.hi, p.lo);
        if (lo > hi) continue;
        out.push_back(SetExpr::closed(lo, hi));
    }
    if (out.empty()) return SetExpr::empty();
    return out.size() == 1 ? out.front() : SetExpr::union_of(std::move(out));
}

/// Whether `b` is a finite union of compact-class members on `space`.
inline bool is_compact_class(const ValueSpace& space, const SetExpr& b) {
    switch (b.kind()) {
    case SetExpr::Kind::Closed: return space.is_real();
    case SetExpr::Kind::Points: return space.is_discrete();
    case SetExpr::Kind::Empty: return true;
    case SetExpr::Kind::Union:
        return std::all_of(b.children().begin(), b.children().end(),
                           [&](const SetExpr& c) { return is_compact_class(space, c); });
    default: return false;
    }
}

struct CompactnessReport {
    bool holds = true;
    /// Members of a subfamily that intersect pairwise but have empty total
    /// intersection, when `holds` is false.
    std::vector<std::size_t> counterexample;
    std::size_t subfamilies_checked = 0;
};

/// Every subfamily whose members intersect pairwise must have a nonempty
/// total intersection. It suffices to check the maximal such subfamilies,
/// i.e. the maximal cliques of the pairwise-intersection graph; families with
/// an empty pairwise intersection impose nothing.
inline CompactnessReport compactness_report(const ValueSpace& space,
                                            const std::vector<SetExpr>& family) {
    for (const auto& k : family) {
        if (!is_compact_class(space, k)) {
            throw DomainError("compactness_check members must be finite unions of compact-class sets");
        }
    }
    const std::size_t m = family.size();
    std::vector<std::vector<bool>> adj(m, std::vector<bool>(m, false));
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i + 1; j < m; ++j) {
            adj[i][j] = adj[j][i] =
                !is_empty_set(space, SetExpr::intersection_of({family[i], family[j]}));
        }
    }

    CompactnessReport report;
    std::vector<std::size_t> clique;
    // Bron-Kerbosch with pivoting.
    auto expand = [&](auto&& self, std::vector<std::size_t> cand, std::vector<std::size_t> excl) {
        if (!report.holds) return;
        if (cand.empty() && excl.empty()) {
            ++report.subfamilies_checked;
            std::vector<SetExpr> members;
            for (auto i : clique) members.push_back(family[i]);
            if (!members.empty() && is_empty_set(space, SetExpr::intersection_of(members))) {
                report.holds = false;
                report.counterexample = clique;
                std::sort(report.counterexample.begin(), report.counterexample.end());
            }
            return;
        }
        std::size_t pivot = cand.empty() ? excl.front() : cand.front();
        std::size_t best = 0;
        for (auto u : cand) {
            std::size_t d = 0;
            for (auto v : cand) d += adj[u][v] ? 1 : 0;
            if (d >= best) {
                best = d;
                pivot = u;
            }
        }
        const std::vector<std::size_t> snapshot = cand;
        for (auto v : snapshot) {
            if (adj[pivot][v]) continue;
            std::vector<std::size_t> nc, ne;
            for (auto u : cand) if (adj[v][u]) nc.push_back(u);
            for (auto u : excl) if (adj[v][u]) ne.push_back(u);
            clique.push_back(v);
            self(self, std::move(nc), std::move(ne));
            clique.pop_back();
            std::erase(cand, v);
            excl.push_back(v);
        }
    };
    std::vector<std::size_t> all(m);
    std::iota(all.begin(), all.end(), std::size_t{0});
    expand(expand, std::move(all), {});
    return report;
}

inline bool compactness_check(const ValueSpace& space, const std::vector<SetExpr>& family) {
    return compactness_report(space, family).holds;
}

} // namespace exarray
