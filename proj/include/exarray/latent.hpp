#pragma once

// Keyed source of uniform latents xi[sigma], one per finite index subset.
//
// A latent is a pure function of (seed, |sigma|, sorted indices of sigma):
// there is no generator state, so values agree across overlapping edges,
// across runs and across any parallel evaluation order.

#include <algorithm>
#include <array>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "exarray/errors.hpp"

namespace exarray {

/// Largest supported array arity. A latent family holds 2^n values,
/// and 2^6 masks fit in one 64-bit presence word.
inline constexpr std::size_t kMaxArity = 6;

namespace detail {

// splitmix64 finalizer
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
inline constexpr std::uint64_t kLatentDomain = 0x6c6174656e742d31ULL; // "latent-1"

constexpr std::uint64_t hash_subset(std::uint64_t seed, const std::uint64_t* indices,
                                    std::size_t count) noexcept {
    std::uint64_t h = mix64(seed ^ kLatentDomain);
    h = mix64(h + kGolden * (static_cast<std::uint64_t>(count) + 1));
    for (std::size_t i = 0; i < count; ++i) {
        h = mix64(h ^ mix64(indices[i] + kGolden));
    }
    return h;
}

/// Top 53 bits as a double in [0, 1).
constexpr double to_unit(std::uint64_t bits) noexcept {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

} // namespace detail

/// Derive an independent 64-bit seed from a parent seed, a domain tag and a
/// counter. Used for replicate seeds and sub-streams.
constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t tag,
                                    std::uint64_t counter) noexcept {
    std::uint64_t h = detail::mix64(parent ^ detail::mix64(tag + detail::kGolden));
    return detail::mix64(h + detail::kGolden * (counter + 1));
}

/// Canonical finite index subset sigma, with the arity bound n it lives under.
class SubsetKey {
public:
    /// `indices` must already be strictly increasing.
    SubsetKey(std::vector<std::uint64_t> indices, std::size_t arity_bound)
        : indices_(std::move(indices)), arity_bound_(arity_bound) {
        if (arity_bound_ == 0) throw ArityError("arity bound must be positive");
        for (std::size_t i = 1; i < indices_.size(); ++i) {
            if (indices_[i - 1] >= indices_[i]) {
                throw CanonicalizationError(
                    "subset indices must be strictly increasing (got " + describe() + ")");
            }
        }
        if (indices_.size() > arity_bound_) {
            throw ArityError("subset " + describe() + " exceeds arity bound " +
                             std::to_string(arity_bound_));
        }
    }

    /// Sorts the presentation order away. Repeated indices are still an error.
    static SubsetKey from_unordered(std::vector<std::uint64_t> indices, std::size_t arity_bound) {
        std::sort(indices.begin(), indices.end());
        return SubsetKey(std::move(indices), arity_bound);
    }

    static SubsetKey empty(std::size_t arity_bound) { return SubsetKey({}, arity_bound); }

    std::span<const std::uint64_t> indices() const noexcept { return indices_; }
    std::size_t size() const noexcept { return indices_.size(); }
    std::size_t arity_bound() const noexcept { return arity_bound_; }

    friend bool operator==(const SubsetKey& a, const SubsetKey& b) noexcept {
        return a.indices_ == b.indices_;
    }
    friend auto operator<=>(const SubsetKey& a, const SubsetKey& b) noexcept {
        return a.indices_ <=> b.indices_;
    }

    std::string describe() const {
        std::string s = "{";
        for (std::size_t i = 0; i < indices_.size(); ++i) {
            if (i) s += ",";
            s += std::to_string(indices_[i]);
        }
        return s + "}";
    }

private:
    std::vector<std::uint64_t> indices_;
    std::size_t arity_bound_;
};

/// xi[sigma] for one seed.
inline double latent(std::uint64_t seed, const SubsetKey& key) noexcept {
    return detail::to_unit(detail::hash_subset(seed, key.indices().data(), key.size()));
}

/// The latents of all 2^n subsets of one edge. Subset masks are relative to
/// the edge: bit j stands for the j-th smallest index of the edge, i.e. for
/// position j+1 of [n].
class LatentFamily {
public:
    LatentFamily() = default;

    /// An empty family (no latents present) over a strictly increasing edge.
    explicit LatentFamily(std::span<const std::uint64_t> edge) : arity_(edge.size()) {
        if (arity_ == 0 || arity_ > kMaxArity) {
            throw ArityError("edge size must be in 1.." + std::to_string(kMaxArity));
        }
        std::copy(edge.begin(), edge.end(), edge_.begin());
        for (std::size_t i = 1; i < arity_; ++i) {
            if (edge_[i - 1] >= edge_[i]) {
                throw CanonicalizationError("edge indices must be strictly increasing");
            }
        }
    }

    std::size_t arity() const noexcept { return arity_; }
    std::span<const std::uint64_t> edge() const noexcept { return {edge_.data(), arity_}; }
    std::size_t mask_count() const noexcept { return std::size_t{1} << arity_; }
    std::size_t size() const noexcept { return static_cast<std::size_t>(std::popcount(present_)); }

    bool has(std::uint32_t mask) const noexcept {
        return mask < mask_count() && ((present_ >> mask) & 1U);
    }

    double at(std::uint32_t mask) const {
        if (!has(mask)) {
            throw IncompleteAssignmentError("latent for subset mask " + std::to_string(mask) +
                                            " of the edge is not assigned");
        }
        return values_[mask];
    }

    /// Lookup by absolute subset; the key must be a subset of the edge.
    double at(const SubsetKey& key) const { return at(mask_of(key)); }

    void set(std::uint32_t mask, double value) {
        if (mask >= mask_count()) throw DomainError("subset mask outside the edge");
        values_[mask] = value;
        present_ |= std::uint64_t{1} << mask;
    }

    void erase(std::uint32_t mask) noexcept {
        if (mask < mask_count()) present_ &= ~(std::uint64_t{1} << mask);
    }

    std::uint32_t mask_of(const SubsetKey& key) const {
        std::uint32_t mask = 0;
        std::size_t j = 0;
        for (std::uint64_t idx : key.indices()) {
            while (j < arity_ && edge_[j] < idx) ++j;
            if (j == arity_ || edge_[j] != idx) {
                throw DomainError("subset " + key.describe() + " is not contained in the edge");
            }
            mask |= std::uint32_t{1} << j;
        }
        return mask;
    }

    /// Absolute subset for a relative mask.
    SubsetKey key_of(std::uint32_t mask) const {
        std::vector<std::uint64_t> idx;
        for (std::size_t j = 0; j < arity_; ++j) {
            if ((mask >> j) & 1U) idx.push_back(edge_[j]);
        }
        return SubsetKey(std::move(idx), arity_);
    }

private:
    std::array<std::uint64_t, kMaxArity> edge_{};
    std::array<double, std::size_t{1} << kMaxArity> values_{};
    std::uint64_t present_ = 0;
    std::size_t arity_ = 0;
};

/// A seeded latent hierarchy. `fixed_global` pins xi[empty] to a chosen
/// value, which is how tests condition an array on its global latent.
struct LatentField {
    std::uint64_t seed = 0;
    std::optional<double> fixed_global{};

    double value(std::span<const std::uint64_t> sorted_indices) const noexcept {
        if (sorted_indices.empty() && fixed_global) return *fixed_global;
        return detail::to_unit(
            detail::hash_subset(seed, sorted_indices.data(), sorted_indices.size()));
    }

    double value(const SubsetKey& key) const noexcept { return value(key.indices()); }

    /// Every subset of a strictly increasing edge, including the empty one.
    LatentFamily family(std::span<const std::uint64_t> sorted_edge) const {
        LatentFamily fam(sorted_edge);
        std::array<std::uint64_t, kMaxArity> buf{};
        const std::size_t n = sorted_edge.size();
        for (std::uint32_t mask = 0; mask < (std::uint32_t{1} << n); ++mask) {
            std::size_t c = 0;
            for (std::size_t j = 0; j < n; ++j) {
                if ((mask >> j) & 1U) buf[c++] = sorted_edge[j];
            }
            fam.set(mask, value(std::span<const std::uint64_t>(buf.data(), c)));
        }
        return fam;
    }
};

/// All 2^n latents of an edge of size exactly n (n = the key's arity bound).
inline LatentFamily latent_family(std::uint64_t seed, const SubsetKey& edge) {
    if (edge.size() != edge.arity_bound()) {
        throw ArityError("edge " + edge.describe() + " has size " + std::to_string(edge.size()) +
                         ", expected arity " + std::to_string(edge.arity_bound()));
    }
    return LatentField{seed}.family(edge.indices());
}

} // namespace exarray
