#pragma once

// Monte Carlo estimators of event-hypergraph probabilities and the
// diagnostics built on them.
//
// Every replicate draws from a seed derived from (master seed, replicate
// index), and replicates only ever contribute integer counts, so results do
// not depend on the worker count or on scheduling.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "exarray/errors.hpp"
#include "exarray/events.hpp"
#include "exarray/latent.hpp"
#include "exarray/representation.hpp"

namespace exarray {

// ---------------------------------------------------------------------------
// Deterministic sharding

/// Splits [0, count) into `workers` contiguous shards. Each shard folds into
/// its own accumulator; accumulators are then combined in shard order.
template <class Acc, class Fn>
Acc parallel_reduce(std::uint64_t count, unsigned workers, Fn&& fn) {
    workers = std::max(1U, workers);
    if (workers == 1 || count < 2) {
        Acc acc{};
        for (std::uint64_t r = 0; r < count; ++r) fn(r, acc);
        return acc;
    }
    const std::uint64_t shards = std::min<std::uint64_t>(workers, count);
    std::vector<Acc> partial(shards);
    std::vector<std::exception_ptr> errors(shards);
    std::vector<std::thread> threads;
    threads.reserve(shards);
    for (std::uint64_t s = 0; s < shards; ++s) {
        threads.emplace_back([&, s] {
            try {
                const std::uint64_t begin = count * s / shards;
                const std::uint64_t end = count * (s + 1) / shards;
                for (std::uint64_t r = begin; r < end; ++r) fn(r, partial[s]);
            } catch (...) {
                errors[s] = std::current_exception();
            }
        });
    }
    for (auto& t : threads) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    Acc total{};
    for (auto& p : partial) total += p;
    return total;
}

/// Runs fn(r) for every r with the same sharding; fn writes disjoint slots.
template <class Fn>
void parallel_for(std::uint64_t count, unsigned workers, Fn&& fn) {
    struct Nothing {
        Nothing& operator+=(const Nothing&) { return *this; }
    };
    (void)parallel_reduce<Nothing>(count, workers, [&](std::uint64_t r, Nothing&) { fn(r); });
}

// ---------------------------------------------------------------------------
// Injectivity

struct InjectivityProbability {
    boost::multiprecision::cpp_rational exact;
    double value;
};

/// Probability that a uniform map from an s-set into {1..M} is injective:
/// prod_{i<s} (M - i) / M, in exact rational arithmetic.
inline InjectivityProbability injectivity_probability(std::uint64_t s, std::uint64_t m) {
    if (m == 0) throw DomainError("index bound M must be >= 1");
    using boost::multiprecision::cpp_int;
    using boost::multiprecision::cpp_rational;
    if (s > m) return {cpp_rational(0), 0.0};
    cpp_int num = 1;
    cpp_int den = 1;
    for (std::uint64_t i = 0; i < s; ++i) {
        num *= cpp_int(m - i);
        den *= cpp_int(m);
    }
    cpp_rational exact(num, den);
    return {exact, static_cast<double>(exact)};
}

// ---------------------------------------------------------------------------
// Reports

enum class EstimateMode { Direct, Empirical, ConditionalOnInjective };

inline const char* to_string(EstimateMode m) noexcept {
    switch (m) {
    case EstimateMode::Direct: return "direct";
    case EstimateMode::Empirical: return "empirical";
    case EstimateMode::ConditionalOnInjective: return "conditional-on-injective";
    }
    return "?";
}

/// Two-sided 0.99 normal quantile.
inline constexpr double kZ99 = 2.5758293035489004;
inline constexpr double kVerdictThreshold = 4.0;

struct EstimateReport {
    double estimate = 0.0;
    double standard_error = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    std::uint64_t replicates = 0;
    std::uint64_t successes = 0;
    std::uint64_t seed = 0;
    EstimateMode mode = EstimateMode::Direct;
    /// M for the empirical modes, 0 for direct.
    std::uint64_t index_bound = 0;

    static EstimateReport from_counts(std::uint64_t successes, std::uint64_t n, std::uint64_t seed,
                                      EstimateMode mode, std::uint64_t index_bound = 0) {
        if (n == 0) throw DomainError("need at least one replicate");
        EstimateReport r;
        r.successes = successes;
        r.replicates = n;
        r.seed = seed;
        r.mode = mode;
        r.index_bound = index_bound;
        r.estimate = static_cast<double>(successes) / static_cast<double>(n);
        r.set_error(std::sqrt(r.estimate * (1.0 - r.estimate) / static_cast<double>(n)));
        return r;
    }

    void set_error(double se) {
        standard_error = se;
        ci_low = std::clamp(estimate - kZ99 * se, 0.0, 1.0);
        ci_high = std::clamp(estimate + kZ99 * se, 0.0, 1.0);
    }

    bool covers(double p) const noexcept { return ci_low <= p && p <= ci_high; }
};

/// Divides an empirical estimate by the exact injectivity probability.
inline EstimateReport condition_on_injective(const EstimateReport& empirical, std::uint64_t s) {
    if (empirical.mode != EstimateMode::Empirical) {
        throw DomainError("only empirical estimates can be conditioned on injectivity");
    }
    const double inj = injectivity_probability(s, empirical.index_bound).value;
    EstimateReport r = empirical;
    r.mode = EstimateMode::ConditionalOnInjective;
    if (inj == 0.0) {
        r.estimate = 0.0;
        r.set_error(0.0);
        return r;
    }
    r.estimate = std::min(1.0, empirical.estimate / inj);
    r.set_error(empirical.standard_error / inj);
    return r;
}

enum class Verdict { Consistent, Inconsistent };

inline const char* to_string(Verdict v) noexcept {
    return v == Verdict::Consistent ? "consistent" : "inconsistent";
}

struct TestReport {
    std::string kind;
    double z = 0.0;
    EstimateReport first;
    EstimateReport second;
    /// Extra per-event estimates (marginals of the dissociation test).
    std::vector<EstimateReport> marginals;
    double threshold = kVerdictThreshold;
    Verdict verdict = Verdict::Consistent;
};

namespace detail {

/// num / den with 0/0 read as 0.
inline double safe_z(double num, double den) noexcept {
    if (den > 0.0) return num / den;
    if (num == 0.0) return 0.0;
    return num > 0 ? std::numeric_limits<double>::infinity()
                   : -std::numeric_limits<double>::infinity();
}

inline Verdict verdict_for(double z, double threshold = kVerdictThreshold) noexcept {
    return std::abs(z) <= threshold ? Verdict::Consistent : Verdict::Inconsistent;
}

/// z = (p1 - p2) / sqrt(se1^2 + se2^2) for independent estimates.
inline TestReport compare_independent(std::string kind, const EstimateReport& a,
                                      const EstimateReport& b) {
    TestReport t;
    t.kind = std::move(kind);
    t.first = a;
    t.second = b;
    t.z = safe_z(a.estimate - b.estimate,
                 std::sqrt(a.standard_error * a.standard_error + b.standard_error * b.standard_error));
    t.verdict = verdict_for(t.z);
    return t;
}

struct Count {
    std::uint64_t hits = 0;
    Count& operator+=(const Count& o) {
        hits += o.hits;
        return *this;
    }
};

// Domain tags for derived seeds.
inline constexpr std::uint64_t kReplicateTag = 0x7265706c;
inline constexpr std::uint64_t kMapTag = 0x6d6170;
inline constexpr std::uint64_t kArrayTag = 0x617272;
inline constexpr std::uint64_t kSharedArrayTag = 0x736861;
inline constexpr std::uint64_t kHarnessDirectTag = 0x687364;
inline constexpr std::uint64_t kHarnessEmpiricalTag = 0x687365;
inline constexpr std::uint64_t kSecondMomentTag = 0x736d64;

inline std::uint64_t uniform_index(std::uint64_t bits, std::uint64_t m) noexcept {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(bits) * m) >> 64) + 1;
}

inline void check_event_matches(const RhoSpec& rho, const EventHypergraph& h) {
    if (h.arity() != rho.arity()) {
        throw DomainError("event arity " + std::to_string(h.arity()) + " does not match rho arity " +
                          std::to_string(rho.arity()));
    }
    if (!(h.space() == rho.output())) {
        throw DomainError("event value space " + h.space().describe() +
                          " does not match rho output " + rho.output().describe());
    }
}

inline void check_map(const EventHypergraph& h, std::span<const std::uint64_t> f) {
    if (f.size() != h.vertex_count()) throw DomainError("index map must cover every vertex");
    for (auto v : f) {
        if (v == 0) throw RangeError("indices start at 1");
    }
    if (!is_injective(f)) throw InjectivityError("index map is not injective");
}

} // namespace detail

inline std::uint64_t replicate_seed(std::uint64_t master, std::uint64_t replicate) noexcept {
    return derive_seed(master, detail::kReplicateTag, replicate);
}

struct RunOptions {
    unsigned workers = 1;
    /// Pins xi[empty] in every replicate (conditioning hook for tests).
    std::optional<double> fixed_global{};
};

// ---------------------------------------------------------------------------
// Estimators

/// P(B_{S,{B_e},Y}) by direct sampling: each replicate draws a fresh latent
/// hierarchy and evaluates H under the identity map vertex i -> i + 1.
inline EstimateReport estimate_direct(const RhoSpec& rho, const EventHypergraph& h, std::uint64_t n,
                                      std::uint64_t seed, const RunOptions& opt = {}) {
    detail::check_event_matches(rho, h);
    if (n == 0) throw DomainError("N must be >= 1");
    IndexMap f(h.vertex_count());
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = i + 1;
    const auto total = parallel_reduce<detail::Count>(
        n, opt.workers, [&](std::uint64_t r, detail::Count& acc) {
            const LazyArray a(rho, LatentField{replicate_seed(seed, r), opt.fixed_global},
                              f.size());
            acc.hits += detail::event_holds(h, f, a) ? 1 : 0;
        });
    return EstimateReport::from_counts(total.hits, n, seed, EstimateMode::Direct);
}

/// P(B_{S,{B_e},M}): f drawn uniformly from all M^|S| maps; a replicate
/// succeeds only when f is injective and every constraint holds. With
/// `reuse_array` one array serves every replicate, otherwise each replicate
/// draws its own.
inline EstimateReport estimate_empirical(const RhoSpec& rho, const EventHypergraph& h,
                                         std::uint64_t m, std::uint64_t n, std::uint64_t seed,
                                         bool reuse_array = false, const RunOptions& opt = {}) {
    detail::check_event_matches(rho, h);
    if (m == 0) throw DomainError("M must be >= 1");
    if (n == 0) throw DomainError("N must be >= 1");
    const std::size_t s = h.vertex_count();
    const std::uint64_t shared = derive_seed(seed, detail::kSharedArrayTag, 0);
    const auto total = parallel_reduce<detail::Count>(
        n, opt.workers, [&](std::uint64_t r, detail::Count& acc) {
            const std::uint64_t rs = replicate_seed(seed, r);
            IndexMap f(s);
            for (std::size_t i = 0; i < s; ++i) {
                f[i] = detail::uniform_index(derive_seed(rs, detail::kMapTag, i), m);
            }
            if (!is_injective(f)) return;
            const std::uint64_t as = reuse_array ? shared : derive_seed(rs, detail::kArrayTag, 0);
            const LazyArray a(rho, LatentField{as, opt.fixed_global}, m);
            acc.hits += detail::event_holds(h, f, a) ? 1 : 0;
        });
    return EstimateReport::from_counts(total.hits, n, seed, EstimateMode::Empirical, m);
}

/// The empirical estimator against one fixed array (M = its index bound).
template <ArrayLike A>
EstimateReport estimate_empirical_on(const A& array, const EventHypergraph& h, std::uint64_t n,
                                     std::uint64_t seed, unsigned workers = 1) {
    if (array.arity() != h.arity()) throw DomainError("array arity does not match the event");
    if (n == 0) throw DomainError("N must be >= 1");
    const std::uint64_t m = array.index_bound();
    const std::size_t s = h.vertex_count();
    const auto total = parallel_reduce<detail::Count>(
        n, workers, [&](std::uint64_t r, detail::Count& acc) {
            const std::uint64_t rs = replicate_seed(seed, r);
            std::vector<std::uint64_t> f(s);
            for (std::size_t i = 0; i < s; ++i) {
                f[i] = detail::uniform_index(derive_seed(rs, detail::kMapTag, i), m);
            }
            if (!is_injective(f)) return;
            acc.hits += detail::event_holds(h, f, array) ? 1 : 0;
        });
    return EstimateReport::from_counts(total.hits, n, seed, EstimateMode::Empirical, m);
}

// ---------------------------------------------------------------------------
// Convergence harness

struct ConvergenceRow {
    std::uint64_t m = 0;
    double injectivity = 0.0;
    EstimateReport empirical;
    EstimateReport corrected;
    /// inj(|S|, M) * p_direct
    double expected = 0.0;
    double z = 0.0;
    bool degenerate = false;
};

struct ConvergenceTable {
    EstimateReport direct;
    std::vector<ConvergenceRow> rows;
};

/// Checks P(B_M) = inj(|S|, M) P(B_X) at each M of the schedule against one
/// direct estimate. Streams for the direct run and for each M are independent.
inline ConvergenceTable convergence_harness(const RhoSpec& rho, const EventHypergraph& h,
                                            const std::vector<std::uint64_t>& schedule,
                                            std::uint64_t n, std::uint64_t seed,
                                            const RunOptions& opt = {}) {
    if (schedule.empty()) throw DomainError("M schedule is empty");
    ConvergenceTable t;
    t.direct = estimate_direct(rho, h, n, derive_seed(seed, detail::kHarnessDirectTag, 0), opt);
    t.direct.seed = seed;
    const std::size_t s = h.vertex_count();
    for (auto m : schedule) {
        ConvergenceRow row;
        row.m = m;
        row.injectivity = injectivity_probability(s, m).value;
        row.empirical = estimate_empirical(
            rho, h, m, n, derive_seed(seed, detail::kHarnessEmpiricalTag, m), false, opt);
        row.corrected = condition_on_injective(row.empirical, s);
        row.expected = row.injectivity * t.direct.estimate;
        const double se = std::sqrt(row.empirical.standard_error * row.empirical.standard_error +
                                    row.injectivity * row.injectivity *
                                        t.direct.standard_error * t.direct.standard_error);
        row.z = detail::safe_z(row.empirical.estimate - row.expected, se);
        row.degenerate = row.injectivity == 0.0;
        t.rows.push_back(row);
    }
    return t;
}

// ---------------------------------------------------------------------------
// Exchangeability

/// Paired comparison of H under f1 and under f2 on the same replicate arrays.
/// `make(seed, k)` returns the replicate's array over {1..k}; any ArrayLike
/// works, including generators that are not exchangeable.
template <class Factory>
    requires std::invocable<Factory&, std::uint64_t, std::uint64_t>
TestReport exchangeability_test(Factory&& make, const EventHypergraph& h,
                                std::span<const std::uint64_t> f1,
                                std::span<const std::uint64_t> f2, std::uint64_t n,
                                std::uint64_t seed, unsigned workers = 1) {
    detail::check_map(h, f1);
    detail::check_map(h, f2);
    if (n == 0) throw DomainError("N must be >= 1");
    const std::uint64_t k = std::max(*std::max_element(f1.begin(), f1.end()),
                                     *std::max_element(f2.begin(), f2.end()));
    struct Acc {
        std::uint64_t a = 0, b = 0, discordant = 0;
        Acc& operator+=(const Acc& o) {
            a += o.a;
            b += o.b;
            discordant += o.discordant;
            return *this;
        }
    };
    const auto c = parallel_reduce<Acc>(n, workers, [&](std::uint64_t r, Acc& acc) {
        const auto array = make(replicate_seed(seed, r), k);
        const bool x = detail::event_holds(h, f1, array);
        const bool y = detail::event_holds(h, f2, array);
        acc.a += x ? 1 : 0;
        acc.b += y ? 1 : 0;
        acc.discordant += x != y ? 1 : 0;
    });
    TestReport t;
    t.kind = "exchangeability";
    t.first = EstimateReport::from_counts(c.a, n, seed, EstimateMode::Direct, k);
    t.second = EstimateReport::from_counts(c.b, n, seed, EstimateMode::Direct, k);
    const double nd = static_cast<double>(n);
    const double mean = (static_cast<double>(c.a) - static_cast<double>(c.b)) / nd;
    // d_r = x_r - y_r takes values in {-1, 0, 1}; sum d_r^2 = #discordant.
    const double var = n > 1 ? std::max(0.0, (static_cast<double>(c.discordant) - nd * mean * mean) /
                                                 (nd - 1.0))
                             : 0.0;
    t.z = detail::safe_z(mean, std::sqrt(var / nd));
    t.verdict = detail::verdict_for(t.z);
    return t;
}

inline TestReport exchangeability_test(const RhoSpec& rho, const EventHypergraph& h,
                                       std::span<const std::uint64_t> f1,
                                       std::span<const std::uint64_t> f2, std::uint64_t n,
                                       std::uint64_t seed, unsigned workers = 1) {
    detail::check_event_matches(rho, h);
    return exchangeability_test(
        [&rho](std::uint64_t s, std::uint64_t k) { return LazyArray(rho, LatentField{s}, k); }, h, f1,
        f2, n, seed, workers);
}

// ---------------------------------------------------------------------------
// Dissociation

/// Compares P(A and B) with P(A) P(B) for events on index-disjoint maps.
/// The statistic is D = p_AB - p_A p_B with delta-method standard error.
inline TestReport dissociation_test(const RhoSpec& rho, const EventHypergraph& h1,
                                    const EventHypergraph& h2, std::span<const std::uint64_t> f1,
                                    std::span<const std::uint64_t> f2, std::uint64_t n,
                                    std::uint64_t seed, const RunOptions& opt = {}) {
    detail::check_event_matches(rho, h1);
    detail::check_event_matches(rho, h2);
    detail::check_map(h1, f1);
    detail::check_map(h2, f2);
    if (n == 0) throw DomainError("N must be >= 1");
    for (auto v : f1) {
        if (std::find(f2.begin(), f2.end(), v) != f2.end()) {
            throw DomainError("index maps must have disjoint ranges");
        }
    }
    const std::uint64_t k = std::max(*std::max_element(f1.begin(), f1.end()),
                                     *std::max_element(f2.begin(), f2.end()));
    struct Acc {
        std::uint64_t a = 0, b = 0, ab = 0;
        Acc& operator+=(const Acc& o) {
            a += o.a;
            b += o.b;
            ab += o.ab;
            return *this;
        }
    };
    const auto c = parallel_reduce<Acc>(n, opt.workers, [&](std::uint64_t r, Acc& acc) {
        const LazyArray array(rho, LatentField{replicate_seed(seed, r), opt.fixed_global}, k);
        const bool x = detail::event_holds(h1, f1, array);
        const bool y = detail::event_holds(h2, f2, array);
        acc.a += x ? 1 : 0;
        acc.b += y ? 1 : 0;
        acc.ab += x && y ? 1 : 0;
    });
    const double nd = static_cast<double>(n);
    const double pa = static_cast<double>(c.a) / nd;
    const double pb = static_cast<double>(c.b) / nd;
    const double pab = static_cast<double>(c.ab) / nd;
    const double diff = pab - pa * pb;

    // Influence values psi = ab - pb a - pa b over the 2x2 table.
    const double n11 = static_cast<double>(c.ab);
    const double n10 = static_cast<double>(c.a - c.ab);
    const double n01 = static_cast<double>(c.b - c.ab);
    const double n00 = nd - n11 - n10 - n01;
    const double v11 = 1.0 - pa - pb, v10 = -pb, v01 = -pa, v00 = 0.0;
    const double mean = (n11 * v11 + n10 * v10 + n01 * v01) / nd;
    const auto sq = [mean](double v) { return (v - mean) * (v - mean); };
    const double var =
        n > 1 ? (n11 * sq(v11) + n10 * sq(v10) + n01 * sq(v01) + n00 * sq(v00)) / (nd - 1.0) : 0.0;

    TestReport t;
    t.kind = "dissociation";
    t.first = EstimateReport::from_counts(c.ab, n, seed, EstimateMode::Direct, k);
    t.second = t.first;
    t.second.successes = 0;
    t.second.estimate = pa * pb;
    t.second.set_error(std::sqrt(pb * pb * pa * (1 - pa) + pa * pa * pb * (1 - pb)) / std::sqrt(nd));
    t.marginals = {EstimateReport::from_counts(c.a, n, seed, EstimateMode::Direct, k),
                   EstimateReport::from_counts(c.b, n, seed, EstimateMode::Direct, k)};
    t.z = detail::safe_z(diff, std::sqrt(var / nd));
    t.verdict = detail::verdict_for(t.z);
    return t;
}

// ---------------------------------------------------------------------------
// Second-moment diagnostic

struct SecondMomentReport {
    std::uint64_t m = 0;
    std::uint64_t blocks = 0;
    std::uint64_t block_size = 0;
    /// Index-disjoint placements of S per block.
    std::uint64_t placements = 0;
    std::uint64_t realizations = 0;
    std::uint64_t seed = 0;
    double mean_frequency = 0.0;
    /// Mean over realizations of the variance across blocks.
    double within_variance = 0.0;
    /// Mean over blocks of the variance across realizations.
    double across_variance = 0.0;
    /// p(1 - p) / placements
    double binomial_variance = 0.0;
    /// across / within
    double ratio = std::numeric_limits<double>::quiet_NaN();
    double within_over_binomial = std::numeric_limits<double>::quiet_NaN();
    bool degenerate = false;
    std::string note;
};

/// Splits {1..M} into index-disjoint blocks and, inside each block, places S
/// on consecutive disjoint index groups. Within one realization the block
/// frequencies of a dissociated array are i.i.d., so their spread matches the
/// spread across realizations; a global latent inflates the latter.
inline SecondMomentReport second_moment_diag(const RhoSpec& rho, const EventHypergraph& h,
                                             std::uint64_t m, std::uint64_t blocks,
                                             std::uint64_t n, std::uint64_t seed,
                                             const RunOptions& opt = {}) {
    detail::check_event_matches(rho, h);
    if (blocks == 0 || m % blocks != 0) throw DomainError("M must be divisible by the block count");
    if (n == 0) throw DomainError("N must be >= 1");
    const std::uint64_t s = h.vertex_count();
    const std::uint64_t b = m / blocks;
    if (b < s) throw DomainError("block size is smaller than the vertex count of the event");

    SecondMomentReport rep;
    rep.m = m;
    rep.blocks = blocks;
    rep.block_size = b;
    rep.placements = b / s;
    rep.realizations = n;
    rep.seed = seed;

    std::vector<double> freq(n * blocks);
    parallel_for(n, opt.workers, [&](std::uint64_t r) {
        const LazyArray array(
            rho, LatentField{derive_seed(seed, detail::kSecondMomentTag, r), opt.fixed_global}, m);
        std::vector<std::uint64_t> f(s);
        for (std::uint64_t j = 0; j < blocks; ++j) {
            std::uint64_t hits = 0;
            for (std::uint64_t t = 0; t < rep.placements; ++t) {
                for (std::uint64_t i = 0; i < s; ++i) f[i] = j * b + t * s + i + 1;
                hits += detail::event_holds(h, f, array) ? 1 : 0;
            }
            freq[r * blocks + j] = static_cast<double>(hits) / static_cast<double>(rep.placements);
        }
    });

    double total = 0.0;
    for (double v : freq) total += v;
    rep.mean_frequency = total / static_cast<double>(freq.size());
    rep.binomial_variance =
        rep.mean_frequency * (1.0 - rep.mean_frequency) / static_cast<double>(rep.placements);

    if (blocks >= 2) {
        double acc = 0.0;
        for (std::uint64_t r = 0; r < n; ++r) {
            double mean = 0.0;
            for (std::uint64_t j = 0; j < blocks; ++j) mean += freq[r * blocks + j];
            mean /= static_cast<double>(blocks);
            double ss = 0.0;
            for (std::uint64_t j = 0; j < blocks; ++j) {
                ss += (freq[r * blocks + j] - mean) * (freq[r * blocks + j] - mean);
            }
            acc += ss / static_cast<double>(blocks - 1);
        }
        rep.within_variance = acc / static_cast<double>(n);
    }
    if (n >= 2) {
        double acc = 0.0;
        for (std::uint64_t j = 0; j < blocks; ++j) {
            double mean = 0.0;
            for (std::uint64_t r = 0; r < n; ++r) mean += freq[r * blocks + j];
            mean /= static_cast<double>(n);
            double ss = 0.0;
            for (std::uint64_t r = 0; r < n; ++r) {
                ss += (freq[r * blocks + j] - mean) * (freq[r * blocks + j] - mean);
            }
            acc += ss / static_cast<double>(n - 1);
        }
        rep.across_variance = acc / static_cast<double>(blocks);
    }

    if (blocks < 2) {
        rep.degenerate = true;
        rep.note = "insufficient blocks: need at least 2 for a within-realization variance";
    } else if (n < 2) {
        rep.degenerate = true;
        rep.note = "insufficient realizations: need at least 2 for an across-realization variance";
    } else if (rep.within_variance == 0.0) {
        rep.degenerate = true;
        rep.note = "zero within-realization variance";
    } else {
        rep.ratio = rep.across_variance / rep.within_variance;
    }
    if (rep.binomial_variance > 0.0 && blocks >= 2) {
        rep.within_over_binomial = rep.within_variance / rep.binomial_variance;
    }
    return rep;
}

} // namespace exarray
