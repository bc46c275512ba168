#pragma once

// Event hypergraphs (S, {B_e}) and their evaluation against arrays.

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "exarray/errors.hpp"
#include "exarray/measure.hpp"
#include "exarray/representation.hpp"

namespace exarray {

/// f : S -> {1, 2, ...}, stored by vertex position.
using IndexMap = std::vector<std::uint64_t>;

/// A finite vertex set with one constraint per n-subset. Edges are sorted
/// tuples of vertex positions, stored in lexicographic order.
class EventHypergraph {
public:
    struct Constraint {
        std::vector<std::size_t> edge;
        SetExpr set;
    };

    /// `constraints` is keyed by vertex labels in any order. Every n-subset of
    /// the vertices needs exactly one entry; use SetExpr::full() for "no
    /// constraint".
    EventHypergraph(std::vector<std::string> vertices, std::size_t arity, ValueSpace space,
                    const std::map<std::vector<std::string>, SetExpr>& constraints)
        : vertices_(std::move(vertices)), arity_(arity), space_(space) {
        init_edges();
        std::vector<bool> seen(constraints_.size(), false);
        for (const auto& [labels, set] : constraints) {
            std::vector<std::size_t> edge;
            for (const auto& l : labels) edge.push_back(position_of(l));
            std::sort(edge.begin(), edge.end());
            if (edge.size() != arity_ || std::adjacent_find(edge.begin(), edge.end()) != edge.end()) {
                throw DomainError("constraint key must name " + std::to_string(arity_) +
                                  " distinct vertices");
            }
            const auto slot = slot_of(edge);
            if (seen[slot]) throw DomainError("duplicate constraint for one edge");
            seen[slot] = true;
            check_typing(space_, set);
            constraints_[slot].set = set;
        }
        for (std::size_t i = 0; i < seen.size(); ++i) {
            if (!seen[i]) {
                throw DomainError("missing constraint for edge " + describe_edge(constraints_[i].edge));
            }
        }
    }

    /// Every edge gets the same constraint.
    static EventHypergraph uniform(std::vector<std::string> vertices, std::size_t arity,
                                   ValueSpace space, const SetExpr& set) {
        EventHypergraph h(std::move(vertices), arity, space);
        check_typing(space, set);
        for (auto& c : h.constraints_) c.set = set;
        return h;
    }

    /// Listed edges get their constraint, every other edge gets Full.
    static EventHypergraph with_defaults(std::vector<std::string> vertices, std::size_t arity,
                                         ValueSpace space,
                                         const std::map<std::vector<std::string>, SetExpr>& some) {
        EventHypergraph h(std::move(vertices), arity, space);
        std::map<std::vector<std::string>, SetExpr> full;
        for (const auto& c : h.constraints_) {
            std::vector<std::string> labels;
            for (auto p : c.edge) labels.push_back(h.vertices_[p]);
            full.emplace(labels, SetExpr::full());
        }
        for (const auto& [labels, set] : some) {
            std::vector<std::size_t> edge;
            for (const auto& l : labels) edge.push_back(h.position_of(l));
            std::sort(edge.begin(), edge.end());
            std::vector<std::string> canon;
            for (auto p : edge) canon.push_back(h.vertices_[p]);
            full.insert_or_assign(canon, set);
        }
        return EventHypergraph(h.vertices_, arity, space, full);
    }

    const std::vector<std::string>& vertices() const noexcept { return vertices_; }
    std::size_t vertex_count() const noexcept { return vertices_.size(); }
    std::size_t arity() const noexcept { return arity_; }
    const ValueSpace& space() const noexcept { return space_; }
    const std::vector<Constraint>& constraints() const noexcept { return constraints_; }

    const SetExpr& constraint(std::span<const std::size_t> sorted_edge) const {
        return constraints_[slot_of(sorted_edge)].set;
    }

    bool all_full() const noexcept {
        return std::all_of(constraints_.begin(), constraints_.end(), [](const Constraint& c) {
            return c.set.kind() == SetExpr::Kind::Full;
        });
    }

    std::size_t position_of(const std::string& label) const {
        auto it = std::find(vertices_.begin(), vertices_.end(), label);
        if (it == vertices_.end()) throw DomainError("unknown vertex label '" + label + "'");
        return static_cast<std::size_t>(it - vertices_.begin());
    }

    std::string describe_edge(std::span<const std::size_t> edge) const {
        std::string s;
        for (std::size_t i = 0; i < edge.size(); ++i) s += (i ? "," : "") + vertices_[edge[i]];
        return s;
    }

    friend bool operator==(const EventHypergraph& a, const EventHypergraph& b) {
        if (a.vertices_ != b.vertices_ || a.arity_ != b.arity_ || !(a.space_ == b.space_)) {
            return false;
        }
        for (std::size_t i = 0; i < a.constraints_.size(); ++i) {
            if (!(a.constraints_[i].set == b.constraints_[i].set)) return false;
        }
        return true;
    }

private:
    EventHypergraph(std::vector<std::string> vertices, std::size_t arity, ValueSpace space)
        : vertices_(std::move(vertices)), arity_(arity), space_(space) {
        init_edges();
    }

    void init_edges() {
        if (arity_ == 0 || arity_ > kMaxArity) throw ArityError("event arity out of range");
        if (vertices_.size() < arity_) {
            throw DomainError("event hypergraph needs at least " + std::to_string(arity_) +
                              " vertices");
        }
        auto sorted = vertices_;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
            throw DomainError("vertex labels must be distinct");
        }
        std::vector<std::size_t> e(arity_);
        std::iota(e.begin(), e.end(), std::size_t{0});
        const std::size_t s = vertices_.size();
        while (true) {
            slots_.emplace(e, constraints_.size());
            constraints_.push_back({e, SetExpr::full()});
            std::size_t j = arity_;
            while (j > 0 && e[j - 1] == s - arity_ + (j - 1)) --j;
            if (j == 0) break;
            ++e[j - 1];
            for (std::size_t i = j; i < arity_; ++i) e[i] = e[i - 1] + 1;
        }
    }

    std::size_t slot_of(std::span<const std::size_t> sorted_edge) const {
        auto it = slots_.find(std::vector<std::size_t>(sorted_edge.begin(), sorted_edge.end()));
        if (it == slots_.end()) throw DomainError("not an edge of the hypergraph");
        return it->second;
    }

    std::vector<std::string> vertices_;
    std::size_t arity_;
    ValueSpace space_;
    std::vector<Constraint> constraints_;
    std::map<std::vector<std::size_t>, std::size_t> slots_;
};

// ---------------------------------------------------------------------------
// Common shapes

namespace events {

inline std::vector<std::string> labels(std::size_t count, const std::string& prefix = "v") {
    std::vector<std::string> out;
    for (std::size_t i = 1; i <= count; ++i) out.push_back(prefix + std::to_string(i));
    return out;
}

/// S = [n], the single constraint B.
inline EventHypergraph single_edge(std::size_t arity, ValueSpace space, const SetExpr& b) {
    return EventHypergraph::uniform(labels(arity), arity, space, b);
}

/// Every n-subset of an s-vertex set constrained to B.
inline EventHypergraph clique(std::size_t vertices, std::size_t arity, ValueSpace space,
                              const SetExpr& b) {
    return EventHypergraph::uniform(labels(vertices), arity, space, b);
}

/// Three vertices, every edge constrained to B (for n = 1, three vertices).
inline EventHypergraph triangle(std::size_t arity, ValueSpace space, const SetExpr& b) {
    return clique(3, arity, space, b);
}

/// `count` vertex-disjoint edges constrained to B, everything else Full.
inline EventHypergraph disjoint_edges(std::size_t count, std::size_t arity, ValueSpace space,
                                      const SetExpr& b) {
    const auto names = labels(count * arity);
    std::map<std::vector<std::string>, SetExpr> some;
    for (std::size_t c = 0; c < count; ++c) {
        std::vector<std::string> e(names.begin() + static_cast<std::ptrdiff_t>(c * arity),
                                   names.begin() + static_cast<std::ptrdiff_t>((c + 1) * arity));
        some.emplace(e, b);
    }
    return EventHypergraph::with_defaults(names, arity, space, some);
}

} // namespace events

// ---------------------------------------------------------------------------
// Evaluation

inline bool is_injective(std::span<const std::uint64_t> f) {
    std::vector<std::uint64_t> v(f.begin(), f.end());
    std::sort(v.begin(), v.end());
    return std::adjacent_find(v.begin(), v.end()) == v.end();
}

namespace detail {

/// No checks; f must be injective and in range.
template <ArrayLike A>
bool event_holds(const EventHypergraph& h, std::span<const std::uint64_t> f, const A& array) {
    std::array<std::uint64_t, kMaxArity> image{};
    const std::size_t n = h.arity();
    for (const auto& c : h.constraints()) {
        if (c.set.kind() == SetExpr::Kind::Full) continue;
        for (std::size_t i = 0; i < n; ++i) image[i] = f[c.edge[i]];
        std::sort(image.begin(), image.begin() + static_cast<std::ptrdiff_t>(n));
        if (!contains(c.set, array.at(std::span<const std::uint64_t>(image.data(), n)))) {
            return false;
        }
    }
    return true;
}

} // namespace detail

/// True iff array[f(e)] lies in B_e for every edge e of H. f must be injective.
template <ArrayLike A>
bool evaluate_event(const EventHypergraph& h, std::span<const std::uint64_t> f, const A& array) {
    if (array.arity() != h.arity()) {
        throw ArityError("array arity " + std::to_string(array.arity()) +
                         " does not match event arity " + std::to_string(h.arity()));
    }
    if (f.size() != h.vertex_count()) throw DomainError("index map must cover every vertex");
    for (auto v : f) {
        if (v == 0 || v > array.index_bound()) {
            throw RangeError("index " + std::to_string(v) + " outside 1.." +
                             std::to_string(array.index_bound()));
        }
    }
    if (!is_injective(f)) throw InjectivityError("evaluate_event needs an injective index map");
    return detail::event_holds(h, f, array);
}

template <ArrayLike A>
bool evaluate_event(const EventHypergraph& h, const IndexMap& f, const A& array) {
    return evaluate_event(h, std::span<const std::uint64_t>(f), array);
}

inline bool is_bijection(std::span<const std::size_t> perm, std::size_t size) {
    if (perm.size() != size) return false;
    std::vector<bool> hit(size, false);
    for (auto p : perm) {
        if (p >= size || hit[p]) return false;
        hit[p] = true;
    }
    return true;
}

/// H relabeled by pi (pi[i] is the image of vertex position i): the
/// constraint of pi(e) in the result is the constraint of e in H.
inline EventHypergraph relabel(const EventHypergraph& h, std::span<const std::size_t> perm) {
    if (!is_bijection(perm, h.vertex_count())) {
        throw DomainError("relabel needs a bijection of the vertex set");
    }
    std::map<std::vector<std::string>, SetExpr> out;
    for (const auto& c : h.constraints()) {
        std::vector<std::string> labels;
        for (auto p : c.edge) labels.push_back(h.vertices()[perm[p]]);
        out.emplace(std::move(labels), c.set);
    }
    return EventHypergraph(h.vertices(), h.arity(), h.space(), out);
}

/// (f o pi)[i] = f[pi[i]].
inline IndexMap compose(std::span<const std::uint64_t> f, std::span<const std::size_t> perm) {
    IndexMap out(perm.size());
    for (std::size_t i = 0; i < perm.size(); ++i) out[i] = f[perm[i]];
    return out;
}

} // namespace exarray
