#pragma once

// Step-function rho recovered from one realized binary graph array by degree
// sorting and block averaging.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <vector>

#include "exarray/errors.hpp"
#include "exarray/events.hpp"
#include "exarray/montecarlo.hpp"
#include "exarray/representation.hpp"

namespace exarray {

struct BlockEstimate {
    std::size_t blocks = 0;
    /// Symmetric density matrix, entries in [0,1].
    std::vector<std::vector<double>> matrix;
    /// Block of vertex v at index v - 1.
    std::vector<std::size_t> assignment;
    std::vector<std::size_t> group_sizes;

    RhoSpec to_rho() const { return RhoSpec::step_graphon(matrix); }
};

/// Sort vertices by degree (descending, ties by index), cut the order into B
/// contiguous groups of near-equal size with the remainder spread over the
/// leading groups, and average edges between and within groups.
inline BlockEstimate estimate_block_rho(const RealizedArray& a, std::size_t blocks) {
    if (a.arity() != 2) throw DomainError("block estimation needs an arity-2 array");
    const std::uint64_t k = a.index_bound();
    if (blocks == 0 || k < 2 * blocks) throw DomainError("need k >= 2B");

    std::vector<std::uint64_t> degree(k + 1, 0);
    a.for_each([&](std::span<const std::uint64_t> e, double v) {
        if (v != 0.0 && v != 1.0) throw DomainError("block estimation needs binary values");
        if (v == 1.0) {
            ++degree[e[0]];
            ++degree[e[1]];
        }
    });

    std::vector<std::uint64_t> order(k);
    std::iota(order.begin(), order.end(), std::uint64_t{1});
    std::stable_sort(order.begin(), order.end(), [&](std::uint64_t x, std::uint64_t y) {
        return degree[x] > degree[y];
    });

    BlockEstimate est;
    est.blocks = blocks;
    est.assignment.assign(k, 0);
    est.group_sizes.assign(blocks, k / blocks);
    for (std::size_t g = 0; g < k % blocks; ++g) ++est.group_sizes[g];
    std::size_t pos = 0;
    for (std::size_t g = 0; g < blocks; ++g) {
        for (std::size_t i = 0; i < est.group_sizes[g]; ++i) est.assignment[order[pos++] - 1] = g;
    }

    std::vector<std::vector<std::uint64_t>> hits(blocks, std::vector<std::uint64_t>(blocks, 0));
    a.for_each([&](std::span<const std::uint64_t> e, double v) {
        if (v == 0.0) return;
        auto g1 = est.assignment[e[0] - 1];
        auto g2 = est.assignment[e[1] - 1];
        if (g1 > g2) std::swap(g1, g2);
        ++hits[g1][g2];
    });
    est.matrix.assign(blocks, std::vector<double>(blocks, 0.0));
    for (std::size_t g1 = 0; g1 < blocks; ++g1) {
        for (std::size_t g2 = g1; g2 < blocks; ++g2) {
            const double n1 = static_cast<double>(est.group_sizes[g1]);
            const double n2 = static_cast<double>(est.group_sizes[g2]);
            const double pairs = g1 == g2 ? n1 * (n1 - 1.0) / 2.0 : n1 * n2;
            const double d = static_cast<double>(hits[g1][g2]) / pairs;
            est.matrix[g1][g2] = d;
            est.matrix[g2][g1] = d;
        }
    }
    return est;
}

/// Estimates H under the recovered step graphon (direct sampling) and under
/// empirical sampling of the source array (conditioned on injectivity), and
/// compares them as independent estimates.
inline TestReport resample_and_compare(const BlockEstimate& est, const RealizedArray& source,
                                       const EventHypergraph& h, std::uint64_t n,
                                       std::uint64_t seed, unsigned workers = 1) {
    const RhoSpec rho = est.to_rho();
    const auto model =
        estimate_direct(rho, h, n, derive_seed(seed, 0x6469726563, 0), RunOptions{workers});
    const auto empirical = estimate_empirical_on(source, h, n, derive_seed(seed, 0x656d70, 0), workers);
    auto report = detail::compare_independent(
        "resample", model, condition_on_injective(empirical, h.vertex_count()));
    report.first.seed = seed;
    report.second.seed = seed;
    return report;
}

} // namespace exarray
