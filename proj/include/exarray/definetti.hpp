#pragma once

// The n = 1 case: mixtures of i.i.d. coin sequences.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "exarray/errors.hpp"
#include "exarray/events.hpp"
#include "exarray/latent.hpp"
#include "exarray/montecarlo.hpp"
#include "exarray/representation.hpp"

namespace exarray {

/// Finite-support mixing distribution: component j has success probability
/// q_j and weight w_j.
class MixtureSpec {
public:
    struct Component {
        double q;
        double w;
    };

    explicit MixtureSpec(std::vector<Component> components) : components_(std::move(components)) {
        if (components_.empty()) throw DomainError("mixture needs at least one component");
        double total = 0.0;
        for (const auto& c : components_) {
            if (!(c.q >= 0.0 && c.q <= 1.0)) throw DomainError("component probability outside [0,1]");
            if (!(c.w >= 0.0)) throw DomainError("component weight must be nonnegative");
            total += c.w;
        }
        if (std::abs(total - 1.0) > 1e-12) throw DomainError("mixture weights must sum to 1");
    }

    /// Midpoint discretization of the uniform mixing law on [0,1].
    static MixtureSpec discretized_uniform(std::size_t cells) {
        if (cells == 0) throw DomainError("need at least one cell");
        std::vector<Component> c;
        for (std::size_t j = 0; j < cells; ++j) {
            c.push_back({(static_cast<double>(j) + 0.5) / static_cast<double>(cells),
                         1.0 / static_cast<double>(cells)});
        }
        return MixtureSpec(std::move(c));
    }

    const std::vector<Component>& components() const noexcept { return components_; }

    RhoSpec to_rho() const {
        std::vector<double> q, w;
        for (const auto& c : components_) {
            q.push_back(c.q);
            w.push_back(c.w);
        }
        return RhoSpec::coin_mixture(std::move(q), std::move(w));
    }

private:
    std::vector<Component> components_;
};

/// sum_j w_j q_j^k: probability that k designated variables are all 1.
inline double mixture_moment(const MixtureSpec& mu, int k) {
    if (k < 0) throw DomainError("moment order must be >= 0");
    double total = 0.0;
    for (const auto& c : mu.components()) total += c.w * std::pow(c.q, k);
    return total;
}

/// Moments of the uniform mixing law: 1 / (k + 1).
inline double uniform_mixture_moment(int k) {
    if (k < 0) throw DomainError("moment order must be >= 0");
    return 1.0 / static_cast<double>(k + 1);
}

/// S of k vertices, each constrained to {1}.
inline EventHypergraph all_ones_event(std::size_t k) {
    return events::clique(k, 1, ValueSpace::discrete(2), SetExpr::points({1}));
}

struct Histogram {
    std::vector<double> edges;
    /// Fraction of replicates per bin [edges[i], edges[i+1]); the last bin is closed.
    std::vector<double> mass;
    std::uint64_t replicates = 0;
    std::uint64_t seed = 0;

    /// Total mass of the bins lying inside [lo, hi].
    double mass_between(double lo, double hi) const {
        double total = 0.0;
        for (std::size_t i = 0; i < mass.size(); ++i) {
            if (edges[i] >= lo && edges[i + 1] <= hi) total += mass[i];
        }
        return total;
    }
};

/// Per replicate, realize X_1..X_L and record their mean; returns the
/// histogram of those means over the caller's bin edges.
inline Histogram frequency_limit_histogram(const RhoSpec& rho, std::uint64_t length,
                                           std::uint64_t n, std::uint64_t seed,
                                           std::vector<double> edges, const RunOptions& opt = {}) {
    if (rho.arity() != 1) throw DomainError("frequency histograms need an arity-1 rho");
    if (length == 0) throw DomainError("sequence length must be >= 1");
    if (n == 0) throw DomainError("N must be >= 1");
    if (edges.size() < 2 || !std::is_sorted(edges.begin(), edges.end()) ||
        std::adjacent_find(edges.begin(), edges.end()) != edges.end()) {
        throw DomainError("bin edges must be strictly increasing with at least two entries");
    }
    std::vector<double> means(n);
    parallel_for(n, opt.workers, [&](std::uint64_t r) {
        const LazyArray a(rho, LatentField{replicate_seed(seed, r), opt.fixed_global}, length);
        std::uint64_t ones = 0;
        for (std::uint64_t i = 1; i <= length; ++i) {
            ones += a.at(std::span<const std::uint64_t>(&i, 1)) != 0.0 ? 1 : 0;
        }
        means[r] = static_cast<double>(ones) / static_cast<double>(length);
    });

    Histogram hist;
    hist.edges = std::move(edges);
    hist.mass.assign(hist.edges.size() - 1, 0.0);
    hist.replicates = n;
    hist.seed = seed;
    std::vector<std::uint64_t> counts(hist.mass.size(), 0);
    for (double v : means) {
        if (v < hist.edges.front() || v > hist.edges.back()) continue;
        auto it = std::upper_bound(hist.edges.begin(), hist.edges.end(), v);
        auto bin = static_cast<std::size_t>(it - hist.edges.begin()) - 1;
        bin = std::min(bin, counts.size() - 1);
        ++counts[bin];
    }
    for (std::size_t i = 0; i < counts.size(); ++i) {
        hist.mass[i] = static_cast<double>(counts[i]) / static_cast<double>(n);
    }
    return hist;
}

} // namespace exarray
