#pragma once

// Representation functions rho and the arrays Y_e = rho({xi_sigma : sigma in e}).

#include <algorithm>
#include <cmath>
#include <concepts>
#include <functional>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "exarray/errors.hpp"
#include "exarray/latent.hpp"
#include "exarray/measure.hpp"

namespace exarray {

/// Expression over the latents xi[sigma] of one edge, sigma a subset of
/// positions {1..n}. Comparisons yield 0/1 indicators.
class Expr {
public:
    enum class Op { Const, Latent, Add, Sub, Mul, Min, Max, Lt, Le, Gt, Ge, Step };

    static Expr constant(double v) {
        Expr e(Op::Const);
        e.value_ = v;
        return e;
    }
    /// xi[sigma]; positions are 1-based and may be given in any order.
    static Expr xi(std::vector<std::size_t> sigma) {
        std::sort(sigma.begin(), sigma.end());
        if (std::adjacent_find(sigma.begin(), sigma.end()) != sigma.end()) {
            throw CanonicalizationError("latent subset has repeated positions");
        }
        if (!sigma.empty() && sigma.front() == 0) {
            throw DomainError("latent positions are 1-based");
        }
        Expr e(Op::Latent);
        e.sigma_ = std::move(sigma);
        return e;
    }
    static Expr apply(Op op, std::vector<Expr> args) {
        if (op == Op::Const || op == Op::Latent || op == Op::Step) {
            throw DomainError("apply() takes an arithmetic or comparison operator");
        }
        const bool binary = op == Op::Sub || op == Op::Lt || op == Op::Le || op == Op::Gt ||
                            op == Op::Ge;
        if (binary ? args.size() != 2 : args.empty()) {
            throw DomainError(binary ? "operator takes exactly two operands"
                                     : "operator needs at least one operand");
        }
        Expr e(op);
        e.args_ = std::move(args);
        return e;
    }
    /// Piecewise-constant table: values[i] where i = #breaks <= arg.
    static Expr step(Expr arg, std::vector<double> breaks, std::vector<double> values) {
        if (values.size() != breaks.size() + 1) {
            throw DomainError("step table needs one more value than breaks");
        }
        if (!std::is_sorted(breaks.begin(), breaks.end())) {
            throw DomainError("step breaks must be sorted");
        }
        Expr e(Op::Step);
        e.args_.push_back(std::move(arg));
        e.breaks_ = std::move(breaks);
        e.step_values_ = std::move(values);
        return e;
    }

    Op op() const noexcept { return op_; }
    double value() const noexcept { return value_; }
    const std::vector<std::size_t>& sigma() const noexcept { return sigma_; }
    const std::vector<Expr>& args() const noexcept { return args_; }
    const std::vector<double>& breaks() const noexcept { return breaks_; }
    const std::vector<double>& step_values() const noexcept { return step_values_; }

    double eval(const LatentFamily& fam) const {
        switch (op_) {
        case Op::Const: return value_;
        case Op::Latent: {
            std::uint32_t mask = 0;
            for (auto pos : sigma_) {
                if (pos > fam.arity()) {
                    throw SpecValidationError("xi references position " + std::to_string(pos) +
                                              " outside [" + std::to_string(fam.arity()) + "]");
                }
                mask |= std::uint32_t{1} << (pos - 1);
            }
            return fam.at(mask);
        }
        case Op::Add: {
            double s = 0.0;
            for (const auto& a : args_) s += a.eval(fam);
            return s;
        }
        case Op::Sub: return args_[0].eval(fam) - args_[1].eval(fam);
        case Op::Mul: {
            double p = 1.0;
            for (const auto& a : args_) p *= a.eval(fam);
            return p;
        }
        case Op::Min: {
            double m = args_[0].eval(fam);
            for (std::size_t i = 1; i < args_.size(); ++i) m = std::min(m, args_[i].eval(fam));
            return m;
        }
        case Op::Max: {
            double m = args_[0].eval(fam);
            for (std::size_t i = 1; i < args_.size(); ++i) m = std::max(m, args_[i].eval(fam));
            return m;
        }
        case Op::Lt: return args_[0].eval(fam) < args_[1].eval(fam) ? 1.0 : 0.0;
        case Op::Le: return args_[0].eval(fam) <= args_[1].eval(fam) ? 1.0 : 0.0;
        case Op::Gt: return args_[0].eval(fam) > args_[1].eval(fam) ? 1.0 : 0.0;
        case Op::Ge: return args_[0].eval(fam) >= args_[1].eval(fam) ? 1.0 : 0.0;
        case Op::Step: {
            const double x = args_[0].eval(fam);
            const auto i = std::upper_bound(breaks_.begin(), breaks_.end(), x) - breaks_.begin();
            return step_values_[static_cast<std::size_t>(i)];
        }
        }
        return 0.0;
    }

    /// Every sigma referenced anywhere in the tree.
    void collect_subsets(std::set<std::vector<std::size_t>>& out) const {
        if (op_ == Op::Latent) out.insert(sigma_);
        for (const auto& a : args_) a.collect_subsets(out);
    }

    friend bool operator==(const Expr&, const Expr&) = default;

private:
    explicit Expr(Op op) : op_(op) {}

    Op op_;
    double value_ = 0.0;
    std::vector<std::size_t> sigma_;
    std::vector<Expr> args_;
    std::vector<double> breaks_;
    std::vector<double> step_values_;
};

/// Edge {i,j} present iff xi[ij] < p.
struct ConstantGraphon {
    double p;
    friend bool operator==(const ConstantGraphon&, const ConstantGraphon&) = default;
};

/// W(x, y) = x y.
struct ProductGraphon {
    friend bool operator==(const ProductGraphon&, const ProductGraphon&) = default;
};

/// Vertex block floor(B xi[i]); edge present iff xi[ij] < P[block_i][block_j].
struct StepGraphon {
    std::vector<std::vector<double>> matrix;
    friend bool operator==(const StepGraphon&, const StepGraphon&) = default;
};

/// n = 1 mixture: xi[empty] picks component j with probability weights[j],
/// then X_i = 1 iff xi[i] < probs[j].
struct CoinMixture {
    std::vector<double> probs;
    std::vector<double> weights;
    friend bool operator==(const CoinMixture&, const CoinMixture&) = default;
};

/// Y_e = xi[e], the top latent.
struct IdentityLatent {
    friend bool operator==(const IdentityLatent&, const IdentityLatent&) = default;
};

using RhoBody =
    std::variant<ConstantGraphon, ProductGraphon, StepGraphon, CoinMixture, IdentityLatent, Expr>;

class RhoSpec {
public:
    RhoSpec(std::size_t arity, bool dissociated, ValueSpace output, RhoBody body)
        : arity_(arity), dissociated_(dissociated), output_(output), body_(std::move(body)) {
        if (arity_ == 0 || arity_ > kMaxArity) {
            throw ArityError("rho arity must be in 1.." + std::to_string(kMaxArity));
        }
        uses_global_ = compute_uses_global();
    }

    static RhoSpec constant_graphon(double p) {
        return RhoSpec(2, true, ValueSpace::discrete(2), ConstantGraphon{p});
    }
    static RhoSpec product_graphon() {
        return RhoSpec(2, true, ValueSpace::discrete(2), ProductGraphon{});
    }
    static RhoSpec step_graphon(std::vector<std::vector<double>> matrix) {
        return RhoSpec(2, true, ValueSpace::discrete(2), StepGraphon{std::move(matrix)});
    }
    static RhoSpec coin_mixture(std::vector<double> probs, std::vector<double> weights) {
        return RhoSpec(1, false, ValueSpace::discrete(2),
                       CoinMixture{std::move(probs), std::move(weights)});
    }
    static RhoSpec identity_latent(std::size_t arity) {
        return RhoSpec(arity, true, ValueSpace::unit_interval(), IdentityLatent{});
    }
    static RhoSpec expression(std::size_t arity, bool dissociated, ValueSpace output, Expr body) {
        return RhoSpec(arity, dissociated, output, std::move(body));
    }

    std::size_t arity() const noexcept { return arity_; }
    bool dissociated() const noexcept { return dissociated_; }
    const ValueSpace& output() const noexcept { return output_; }
    const RhoBody& body() const noexcept { return body_; }
    /// Whether the body reads xi[empty].
    bool uses_global() const noexcept { return uses_global_; }

    std::string family_name() const {
        return std::visit(
            [](const auto& b) -> std::string {
                using T = std::decay_t<decltype(b)>;
                if constexpr (std::is_same_v<T, ConstantGraphon>) return "constant_graphon";
                else if constexpr (std::is_same_v<T, ProductGraphon>) return "product_graphon";
                else if constexpr (std::is_same_v<T, StepGraphon>) return "step_graphon";
                else if constexpr (std::is_same_v<T, CoinMixture>) return "coin_mixture";
                else if constexpr (std::is_same_v<T, IdentityLatent>) return "identity_latent";
                else return "expr";
            },
            body_);
    }

    friend bool operator==(const RhoSpec&, const RhoSpec&) = default;

private:
    bool compute_uses_global() const {
        if (std::holds_alternative<CoinMixture>(body_)) return true;
        if (const auto* e = std::get_if<Expr>(&body_)) {
            std::set<std::vector<std::size_t>> subsets;
            e->collect_subsets(subsets);
            return subsets.count({}) > 0;
        }
        return false;
    }

    std::size_t arity_;
    bool dissociated_;
    ValueSpace output_;
    RhoBody body_;
    bool uses_global_ = false;
};

namespace detail {

inline std::size_t step_block(double x, std::size_t blocks) noexcept {
    const auto b = static_cast<std::size_t>(std::floor(x * static_cast<double>(blocks)));
    return std::min(b, blocks - 1);
}

inline double eval_body(const RhoSpec& rho, const LatentFamily& fam) {
    return std::visit(
        [&](const auto& b) -> double {
            using T = std::decay_t<decltype(b)>;
            if constexpr (std::is_same_v<T, ConstantGraphon>) {
                return fam.at(0b11) < b.p ? 1.0 : 0.0;
            } else if constexpr (std::is_same_v<T, ProductGraphon>) {
                return fam.at(0b11) < fam.at(0b01) * fam.at(0b10) ? 1.0 : 0.0;
            } else if constexpr (std::is_same_v<T, StepGraphon>) {
                const std::size_t blocks = b.matrix.size();
                const auto i = step_block(fam.at(0b01), blocks);
                const auto j = step_block(fam.at(0b10), blocks);
                return fam.at(0b11) < b.matrix[i][j] ? 1.0 : 0.0;
            } else if constexpr (std::is_same_v<T, CoinMixture>) {
                const double u = fam.at(0b0);
                double acc = 0.0;
                std::size_t j = 0;
                for (; j + 1 < b.weights.size(); ++j) {
                    acc += b.weights[j];
                    if (u < acc) break;
                }
                return fam.at(0b1) < b.probs[j] ? 1.0 : 0.0;
            } else if constexpr (std::is_same_v<T, IdentityLatent>) {
                return fam.at(static_cast<std::uint32_t>(fam.mask_count() - 1));
            } else {
                return b.eval(fam);
            }
        },
        rho.body());
}

} // namespace detail

/// rho applied to the latent family of one edge.
inline double eval_rho(const RhoSpec& rho, const LatentFamily& fam) {
    if (fam.arity() != rho.arity()) {
        throw ArityError("latent family has arity " + std::to_string(fam.arity()) +
                         ", rho expects " + std::to_string(rho.arity()));
    }
    if (rho.dissociated() && rho.uses_global()) {
        throw SpecValidationError("dissociated rho references xi[empty]");
    }
    return detail::eval_body(rho, fam);
}

// ---------------------------------------------------------------------------
// Validation

struct ValidationReport {
    bool valid = true;
    bool dissociated = false;
    std::vector<std::string> findings;

    void fail(std::string msg) {
        valid = false;
        findings.push_back(std::move(msg));
    }
};

namespace detail {

/// Family with position relabeling perm applied: result[mask] = fam[perm(mask)].
inline LatentFamily relabel_family(const LatentFamily& fam, std::span<const std::size_t> perm) {
    LatentFamily out(fam.edge());
    for (std::uint32_t mask = 0; mask < fam.mask_count(); ++mask) {
        std::uint32_t image = 0;
        for (std::size_t j = 0; j < fam.arity(); ++j) {
            if ((mask >> j) & 1U) image |= std::uint32_t{1} << perm[j];
        }
        if (fam.has(image)) out.set(mask, fam.at(image));
    }
    return out;
}

} // namespace detail

/// Symbol scope, xi[empty] usage against the dissociated flag, family
/// parameters, output typing, and symmetry under all n! relabelings of [n]
/// on 100 pseudo-random latent assignments.
inline ValidationReport validate_spec(const RhoSpec& rho) {
    ValidationReport rep;
    rep.dissociated = rho.dissociated();
    const std::size_t n = rho.arity();

    if (rho.dissociated() && rho.uses_global()) {
        rep.fail("rho is flagged dissociated but uses xi[empty]");
    }

    std::visit(
        [&](const auto& b) {
            using T = std::decay_t<decltype(b)>;
            const bool graphon = std::is_same_v<T, ConstantGraphon> ||
                                 std::is_same_v<T, ProductGraphon> || std::is_same_v<T, StepGraphon>;
            if (graphon) {
                if (n != 2) rep.fail("graphon families have arity 2");
                if (rho.output() != ValueSpace::discrete(2)) {
                    rep.fail("graphon families output Discrete(2)");
                }
            }
            if constexpr (std::is_same_v<T, ConstantGraphon>) {
                if (!(b.p >= 0.0 && b.p <= 1.0)) rep.fail("constant graphon p must lie in [0,1]");
            } else if constexpr (std::is_same_v<T, StepGraphon>) {
                const auto blocks = b.matrix.size();
                if (blocks == 0) rep.fail("step graphon needs a nonempty block matrix");
                for (std::size_t i = 0; i < blocks; ++i) {
                    if (b.matrix[i].size() != blocks) {
                        rep.fail("step graphon matrix must be square");
                        return;
                    }
                }
                for (std::size_t i = 0; i < blocks; ++i) {
                    for (std::size_t j = 0; j < blocks; ++j) {
                        if (!(b.matrix[i][j] >= 0.0 && b.matrix[i][j] <= 1.0)) {
                            rep.fail("step graphon entries must lie in [0,1]");
                            return;
                        }
                        if (b.matrix[i][j] != b.matrix[j][i]) {
                            rep.fail("step graphon matrix must be symmetric");
                            return;
                        }
                    }
                }
            } else if constexpr (std::is_same_v<T, CoinMixture>) {
                if (n != 1) rep.fail("coin mixture has arity 1");
                if (rho.output() != ValueSpace::discrete(2)) rep.fail("coin mixture outputs Discrete(2)");
                if (b.probs.empty() || b.probs.size() != b.weights.size()) {
                    rep.fail("coin mixture needs matching, nonempty probs and weights");
                    return;
                }
                double total = 0.0;
                for (std::size_t j = 0; j < b.probs.size(); ++j) {
                    if (!(b.probs[j] >= 0.0 && b.probs[j] <= 1.0)) {
                        rep.fail("coin probabilities must lie in [0,1]");
                    }
                    if (!(b.weights[j] >= 0.0)) rep.fail("coin weights must be nonnegative");
                    total += b.weights[j];
                }
                if (std::abs(total - 1.0) > 1e-12) rep.fail("coin weights must sum to 1");
            } else if constexpr (std::is_same_v<T, IdentityLatent>) {
                if (rho.output() != ValueSpace::unit_interval()) {
                    rep.fail("identity latent outputs UnitInterval");
                }
            } else if constexpr (std::is_same_v<T, Expr>) {
                std::set<std::vector<std::size_t>> subsets;
                b.collect_subsets(subsets);
                for (const auto& s : subsets) {
                    if (!s.empty() && s.back() > n) {
                        std::string d = "{";
                        for (std::size_t i = 0; i < s.size(); ++i) {
                            d += (i ? "," : "") + std::to_string(s[i]);
                        }
                        rep.fail("xi" + d + "} is not a subset of [" + std::to_string(n) + "]");
                    }
                }
            }
        },
        rho.body());

    if (!rep.valid) return rep;

    // Empirical symmetry and output typing. The global latent is kept so the
    // check also runs for non-dissociated bodies.
    std::vector<std::uint64_t> edge(n);
    std::iota(edge.begin(), edge.end(), std::uint64_t{1});
    std::vector<std::size_t> perm(n);
    const bool exact = rho.output().is_discrete();
    bool typed = true;
    bool symmetric = true;
    for (std::uint64_t trial = 0; trial < 100 && symmetric && typed; ++trial) {
        const LatentFamily fam =
            LatentField{derive_seed(0x73796d6d65747279ULL, trial, 0)}.family(edge);
        const double base = detail::eval_body(rho, fam);
        if (!rho.output().admits(base)) {
            typed = false;
            break;
        }
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        while (std::next_permutation(perm.begin(), perm.end())) {
            const double v = detail::eval_body(rho, detail::relabel_family(fam, perm));
            const bool same = exact ? v == base
                                    : std::abs(v - base) <= 1e-12 * std::max(1.0, std::abs(base));
            if (!same) {
                symmetric = false;
                break;
            }
        }
    }
    if (!typed) rep.fail("rho produces values outside " + rho.output().describe());
    if (!symmetric) rep.fail("rho is not invariant under relabelings of [" + std::to_string(n) + "]");
    return rep;
}

// ---------------------------------------------------------------------------
// Arrays

/// Anything that can be read as an array over n-subsets of {1..index_bound}.
/// `at` receives a strictly increasing edge.
template <class A>
concept ArrayLike = requires(const A& a, std::span<const std::uint64_t> edge) {
    { a.arity() } -> std::convertible_to<std::size_t>;
    { a.index_bound() } -> std::convertible_to<std::uint64_t>;
    { a.at(edge) } -> std::convertible_to<double>;
};

namespace detail {

inline std::uint64_t binomial(std::uint64_t n, std::uint64_t k) noexcept {
    if (k > n) return 0;
    std::uint64_t r = 1;
    for (std::uint64_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

/// Colex rank of a strictly increasing edge of 1-based indices.
inline std::uint64_t colex_rank(std::span<const std::uint64_t> edge) noexcept {
    std::uint64_t r = 0;
    for (std::size_t j = 0; j < edge.size(); ++j) r += binomial(edge[j] - 1, j + 1);
    return r;
}

inline std::vector<std::uint64_t> canonical_edge(std::span<const std::uint64_t> indices) {
    std::vector<std::uint64_t> e(indices.begin(), indices.end());
    std::sort(e.begin(), e.end());
    if (std::adjacent_find(e.begin(), e.end()) != e.end()) {
        throw CanonicalizationError("edge has repeated indices");
    }
    return e;
}

/// Calls fn(edge) for every n-subset of {1..k} in colex order.
template <class Fn>
void for_each_edge(std::size_t n, std::uint64_t k, Fn&& fn) {
    if (n > k) return;
    std::vector<std::uint64_t> e(n);
    std::iota(e.begin(), e.end(), std::uint64_t{1});
    while (true) {
        fn(std::span<const std::uint64_t>(e));
        std::size_t j = 0;
        for (; j < n; ++j) {
            const std::uint64_t limit = j + 1 < n ? e[j + 1] : k + 1;
            if (e[j] + 1 < limit) break;
        }
        if (j == n) return;
        ++e[j];
        for (std::size_t i = 0; i < j; ++i) e[i] = i + 1;
    }
}

} // namespace detail

/// One realized sample: a value for every n-subset of {1..k}.
class RealizedArray {
public:
    /// Values in colex order of the edges.
    RealizedArray(std::size_t arity, std::uint64_t k, std::vector<double> values,
                  std::uint64_t seed = 0)
        : arity_(arity), k_(k), values_(std::move(values)), seed_(seed) {
        if (arity_ == 0 || arity_ > kMaxArity) throw ArityError("array arity out of range");
        if (values_.size() != detail::binomial(k_, arity_)) {
            throw DomainError("value count does not match C(k, n)");
        }
    }

    /// Build from fn(edge) evaluated over every edge.
    template <class Fn>
    static RealizedArray tabulate(std::size_t arity, std::uint64_t k, Fn&& fn,
                                  std::uint64_t seed = 0) {
        std::vector<double> values;
        values.reserve(detail::binomial(k, arity));
        detail::for_each_edge(arity, k, [&](std::span<const std::uint64_t> e) {
            values.push_back(static_cast<double>(fn(e)));
        });
        return RealizedArray(arity, k, std::move(values), seed);
    }

    std::size_t arity() const noexcept { return arity_; }
    std::uint64_t index_bound() const noexcept { return k_; }
    std::uint64_t seed() const noexcept { return seed_; }
    std::size_t size() const noexcept { return values_.size(); }
    const std::vector<double>& values() const noexcept { return values_; }

    /// Indices in any order; they name a set.
    double at(std::span<const std::uint64_t> indices) const {
        if (indices.size() != arity_) throw ArityError("edge size does not match array arity");
        const bool sorted = std::adjacent_find(indices.begin(), indices.end(),
                                               std::greater_equal<>()) == indices.end();
        if (!sorted) {
            const auto e = detail::canonical_edge(indices);
            return at(std::span<const std::uint64_t>(e));
        }
        if (indices.front() == 0 || indices.back() > k_) {
            throw RangeError("edge index outside 1.." + std::to_string(k_));
        }
        return values_[detail::colex_rank(indices)];
    }
    double at(std::initializer_list<std::uint64_t> indices) const {
        return at(std::span<const std::uint64_t>(indices.begin(), indices.size()));
    }

    template <class Fn>
    void for_each(Fn&& fn) const {
        std::size_t i = 0;
        detail::for_each_edge(arity_, k_, [&](std::span<const std::uint64_t> e) {
            fn(e, values_[i++]);
        });
    }

private:
    std::size_t arity_;
    std::uint64_t k_;
    std::vector<double> values_;
    std::uint64_t seed_;
};

/// On-demand view of the array generated by (rho, field). Reads are
/// bit-identical to the corresponding entries of realize_array.
class LazyArray {
public:
    LazyArray(const RhoSpec& rho, LatentField field, std::uint64_t index_bound)
        : rho_(&rho), field_(field), k_(index_bound) {}

    std::size_t arity() const noexcept { return rho_->arity(); }
    std::uint64_t index_bound() const noexcept { return k_; }
    const LatentField& field() const noexcept { return field_; }

    double at(std::span<const std::uint64_t> sorted_edge) const {
        return eval_rho(*rho_, field_.family(sorted_edge));
    }

private:
    const RhoSpec* rho_;
    LatentField field_;
    std::uint64_t k_;
};

inline constexpr std::uint64_t kMaxRealizedEntries = 100'000'000;

inline RealizedArray realize_array(const RhoSpec& rho, const LatentField& field, std::uint64_t k) {
    if (k < rho.arity()) {
        throw DomainError("index bound " + std::to_string(k) + " is below the arity " +
                          std::to_string(rho.arity()));
    }
    if (detail::binomial(k, rho.arity()) > kMaxRealizedEntries) {
        throw DomainError("array too large to materialize");
    }
    const LazyArray view(rho, field, k);
    return RealizedArray::tabulate(
        rho.arity(), k, [&](std::span<const std::uint64_t> e) { return view.at(e); }, field.seed);
}

inline RealizedArray realize_array(const RhoSpec& rho, std::uint64_t seed, std::uint64_t k) {
    return realize_array(rho, LatentField{seed}, k);
}

} // namespace exarray
