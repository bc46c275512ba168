#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "exarray/events.hpp"
#include "exarray/montecarlo.hpp"
#include "exarray/representation.hpp"

using namespace exarray;

namespace {

const ValueSpace kBinary = ValueSpace::discrete(2);
const SetExpr kOne = SetExpr::points({1});

RealizedArray graph(std::uint64_t k, std::initializer_list<std::pair<std::uint64_t, std::uint64_t>> ones) {
    return RealizedArray::tabulate(2, k, [&](std::span<const std::uint64_t> e) {
        for (auto [a, b] : ones) {
            if (std::min(a, b) == e[0] && std::max(a, b) == e[1]) return 1.0;
        }
        return 0.0;
    });
}

EventHypergraph random_interval_event(std::mt19937& rng, std::size_t s, std::size_t n) {
    std::uniform_real_distribution<double> u(0, 1);
    const auto names = events::labels(s);
    std::map<std::vector<std::string>, SetExpr> cons;
    std::vector<std::size_t> e(n);
    std::iota(e.begin(), e.end(), std::size_t{0});
    // All n-subsets of s positions.
    std::vector<bool> sel(s, false);
    std::fill(sel.begin(), sel.begin() + static_cast<std::ptrdiff_t>(n), true);
    do {
        std::vector<std::string> key;
        for (std::size_t i = 0; i < s; ++i) {
            if (sel[i]) key.push_back(names[i]);
        }
        double a = u(rng), b = u(rng);
        if (a > b) std::swap(a, b);
        const int kind = std::uniform_int_distribution<int>(0, 3)(rng);
        SetExpr c = kind == 0   ? SetExpr::full()
                    : kind == 1 ? SetExpr::open(a, b)
                                : SetExpr::union_of({SetExpr::closed(0, a), SetExpr::closed(b, 1)});
        cons.emplace(key, c);
    } while (std::prev_permutation(sel.begin(), sel.end()));
    return EventHypergraph(names, n, ValueSpace::unit_interval(), cons);
}

IndexMap random_injection(std::mt19937& rng, std::size_t s, std::uint64_t k) {
    std::vector<std::uint64_t> pool(k);
    std::iota(pool.begin(), pool.end(), std::uint64_t{1});
    std::shuffle(pool.begin(), pool.end(), rng);
    return IndexMap(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(s));
}

std::vector<std::size_t> random_perm(std::mt19937& rng, std::size_t s) {
    std::vector<std::size_t> p(s);
    std::iota(p.begin(), p.end(), std::size_t{0});
    std::shuffle(p.begin(), p.end(), rng);
    return p;
}

} // namespace

TEST(EventHypergraph, EveryEdgeNeedsOneConstraint) {
    const std::vector<std::string> v{"a", "b", "c"};
    EXPECT_THROW(EventHypergraph(v, 2, kBinary, {{{"a", "b"}, kOne}, {{"a", "c"}, kOne}}), DomainError);
    EXPECT_THROW(EventHypergraph(v, 2, kBinary, {{{"a", "b"}, kOne}, {{"b", "a"}, kOne}, {{"a", "c"}, kOne}, {{"b", "c"}, kOne}}),
                 DomainError);
    EXPECT_THROW(EventHypergraph(v, 2, kBinary, {{{"a", "z"}, kOne}}), DomainError);
    EXPECT_THROW(EventHypergraph(v, 2, kBinary, {{{"a", "a"}, kOne}}), DomainError);
    EXPECT_THROW(EventHypergraph({"a", "a"}, 2, kBinary, {}), DomainError);
    EXPECT_THROW(EventHypergraph({"a"}, 2, kBinary, {}), DomainError);
}

TEST(EventHypergraph, ConstraintsAreTypeChecked) {
    EXPECT_THROW(events::single_edge(2, kBinary, SetExpr::closed(0, 1)), TypingError);
    EXPECT_THROW(events::single_edge(2, kBinary, SetExpr::points({2})), TypingError);
    EXPECT_THROW(events::single_edge(2, ValueSpace::unit_interval(), kOne), TypingError);
}

TEST(EventHypergraph, FullIsStoredExplicitly) {
    const auto h = events::disjoint_edges(2, 2, kBinary, kOne);
    EXPECT_EQ(h.vertex_count(), 4u);
    EXPECT_EQ(h.constraints().size(), 6u);
    std::size_t full = 0;
    for (const auto& c : h.constraints()) full += c.set.kind() == SetExpr::Kind::Full ? 1 : 0;
    EXPECT_EQ(full, 4u);
    const std::vector<std::size_t> e01{0, 1};
    EXPECT_EQ(h.constraint(e01), kOne);
}

TEST(EvaluateEvent, AllFullIsAlwaysTrue) {
    const auto h = events::clique(4, 2, kBinary, SetExpr::full());
    const auto a = graph(10, {});
    EXPECT_TRUE(h.all_full());
    EXPECT_TRUE(evaluate_event(h, IndexMap{3, 9, 1, 5}, a));
}

TEST(EvaluateEvent, TriangleOnCompleteGraph) {
    const auto h = events::triangle(2, kBinary, kOne);
    const auto a = realize_array(RhoSpec::constant_graphon(1.0), 1, 6);
    EXPECT_TRUE(evaluate_event(h, IndexMap{1, 2, 3}, a));
    EXPECT_TRUE(evaluate_event(h, IndexMap{6, 2, 4}, a));
}

TEST(EvaluateEvent, TriangleWithOneMissingEdge) {
    const auto h = events::triangle(2, kBinary, kOne);
    const auto a = graph(3, {{1, 2}, {1, 3}});
    EXPECT_FALSE(evaluate_event(h, IndexMap{1, 2, 3}, a));
    const auto full = graph(3, {{1, 2}, {1, 3}, {2, 3}});
    EXPECT_TRUE(evaluate_event(h, IndexMap{1, 2, 3}, full));
}

TEST(EvaluateEvent, Errors) {
    const auto h = events::triangle(2, kBinary, kOne);
    const auto a = graph(4, {});
    EXPECT_THROW(evaluate_event(h, IndexMap{1, 1, 2}, a), InjectivityError);
    EXPECT_THROW(evaluate_event(h, IndexMap{1, 2, 5}, a), RangeError);
    EXPECT_THROW(evaluate_event(h, IndexMap{0, 1, 2}, a), RangeError);
    EXPECT_THROW(evaluate_event(h, IndexMap{1, 2}, a), DomainError);
    const auto three = realize_array(RhoSpec::identity_latent(3), 1, 4);
    EXPECT_THROW(evaluate_event(h, IndexMap{1, 2, 3}, three), ArityError);
}

TEST(Relabel, IdentityGivesAnEqualHypergraph) {
    std::mt19937 rng(1);
    const auto h = random_interval_event(rng, 5, 2);
    std::vector<std::size_t> id(5);
    std::iota(id.begin(), id.end(), std::size_t{0});
    EXPECT_EQ(relabel(h, id), h);
}

TEST(Relabel, SwappingTriangleVerticesKeepsConstraints) {
    const auto h = events::triangle(2, kBinary, kOne);
    const std::vector<std::size_t> swap{1, 0, 2};
    EXPECT_EQ(relabel(h, swap), h);
}

TEST(Relabel, NonBijectionIsRejected) {
    const auto h = events::triangle(2, kBinary, kOne);
    EXPECT_THROW(relabel(h, std::vector<std::size_t>{0, 0, 1}), DomainError);
    EXPECT_THROW(relabel(h, std::vector<std::size_t>{0, 1}), DomainError);
    EXPECT_THROW(relabel(h, std::vector<std::size_t>{0, 1, 3}), DomainError);
}

TEST(Relabel, MovesConstraintsAlongThePermutation) {
    const std::vector<std::string> v{"a", "b", "c"};
    const EventHypergraph h(v, 2, kBinary,
                            {{{"a", "b"}, kOne}, {{"a", "c"}, SetExpr::points({0})}, {{"b", "c"}, SetExpr::full()}});
    // a -> b, b -> c, c -> a
    const auto r = relabel(h, std::vector<std::size_t>{1, 2, 0});
    EXPECT_EQ(r.constraint(std::vector<std::size_t>{1, 2}), kOne);
    EXPECT_EQ(r.constraint(std::vector<std::size_t>{0, 1}), SetExpr::points({0}));
    EXPECT_EQ(r.constraint(std::vector<std::size_t>{0, 2}), SetExpr::full());
}

TEST(Relabel, EvaluationIdentityOnRandomCases) {
    std::mt19937 rng(2024);
    int agree_true = 0;
    for (int t = 0; t < 100; ++t) {
        const std::size_t n = 2 + static_cast<std::size_t>(t % 2);
        const std::size_t s = n + 1 + static_cast<std::size_t>(t % 3);
        const auto h = random_interval_event(rng, s, n);
        const auto a = realize_array(RhoSpec::identity_latent(n), static_cast<std::uint64_t>(t), 12);
        const auto f = random_injection(rng, s, 12);
        const auto pi = random_perm(rng, s);
        const bool lhs = evaluate_event(relabel(h, pi), f, a);
        const bool rhs = evaluate_event(h, compose(f, pi), a);
        ASSERT_EQ(lhs, rhs) << "case " << t;
        agree_true += lhs ? 1 : 0;
    }
    // Guard against a vacuous pass where every case is false.
    EXPECT_GT(agree_true, 0);
}

TEST(Monotonicity, EnlargingAConstraintNeverBreaksAnEvent) {
    std::mt19937 rng(77);
    std::uniform_real_distribution<double> u(0, 1);
    for (int t = 0; t < 200; ++t) {
        const auto h = random_interval_event(rng, 4, 2);
        const auto a = realize_array(RhoSpec::identity_latent(2), static_cast<std::uint64_t>(t), 8);
        const auto f = random_injection(rng, 4, 8);
        // Enlarge one random edge by Union(B_e, C).
        const std::size_t slot = std::uniform_int_distribution<std::size_t>(0, h.constraints().size() - 1)(rng);
        double lo = u(rng), hi = u(rng);
        if (lo > hi) std::swap(lo, hi);
        std::map<std::vector<std::string>, SetExpr> cons;
        for (std::size_t i = 0; i < h.constraints().size(); ++i) {
            const auto& c = h.constraints()[i];
            std::vector<std::string> key;
            for (auto p : c.edge) key.push_back(h.vertices()[p]);
            cons.emplace(key, i == slot ? SetExpr::union_of({c.set, SetExpr::closed(lo, hi)}) : c.set);
        }
        const EventHypergraph bigger(h.vertices(), 2, h.space(), cons);
        if (evaluate_event(h, f, a)) {
            ASSERT_TRUE(evaluate_event(bigger, f, a));
        }
    }
}

TEST(SingleEdge, FrequencyMatchesPushforwardMeasure) {
    // IdentityLatent pushes xi[12] forward unchanged, so P(Y in B) is the
    // Lebesgue measure of B.
    const auto b = SetExpr::union_of({SetExpr::closed(0.1, 0.25), SetExpr::open(0.6, 0.9)});
    const auto h = events::single_edge(2, ValueSpace::unit_interval(), b);
    const auto r = estimate_direct(RhoSpec::identity_latent(2), h, 100000, 5);
    const double p = measure_of(b, ReferenceDistribution::uniform());
    EXPECT_NEAR(p, 0.45, 1e-15);
    EXPECT_LE(std::abs(r.estimate - p), 4 * std::sqrt(p * (1 - p) / 1e5));
}

TEST(SingleEdge, ConstantGraphonPushforward) {
    const auto h = events::single_edge(2, kBinary, SetExpr::points({0}));
    const auto r = estimate_direct(RhoSpec::constant_graphon(0.3), h, 100000, 6);
    EXPECT_LE(std::abs(r.estimate - 0.7), 4 * std::sqrt(0.21 / 1e5));
}
