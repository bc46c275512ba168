#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "exarray/events.hpp"
#include "exarray/montecarlo.hpp"
#include "exarray/representation.hpp"

using namespace exarray;

namespace {

LatentFamily family2(double x1, double x2, double x12, double g = 0.0) {
    const std::vector<std::uint64_t> e{1, 2};
    LatentFamily f(e);
    f.set(0b00, g);
    f.set(0b01, x1);
    f.set(0b10, x2);
    f.set(0b11, x12);
    return f;
}

LatentFamily family1(double g, double x) {
    const std::vector<std::uint64_t> e{1};
    LatentFamily f(e);
    f.set(0b0, g);
    f.set(0b1, x);
    return f;
}

double edge_frequency(const RealizedArray& a) {
    double ones = 0;
    for (double v : a.values()) ones += v;
    return ones / static_cast<double>(a.size());
}

Expr sum_of_singletons() {
    return Expr::apply(Expr::Op::Add, {Expr::xi({1}), Expr::xi({2})});
}

} // namespace

// ---------------------------------------------------------------------------
// eval_rho

TEST(EvalRho, ConstantGraphonAtOneAlwaysFires) {
    const auto rho = RhoSpec::constant_graphon(1.0);
    for (std::uint64_t s = 0; s < 200; ++s) {
        const std::vector<std::uint64_t> e{s + 1, s + 2};
        ASSERT_EQ(eval_rho(rho, LatentField{s}.family(e)), 1.0);
    }
}

TEST(EvalRho, ProductGraphonComparesAgainstTheProduct) {
    const auto rho = RhoSpec::product_graphon();
    EXPECT_EQ(eval_rho(rho, family2(0.5, 0.5, 0.3)), 0.0);
    EXPECT_EQ(eval_rho(rho, family2(0.5, 0.5, 0.2)), 1.0);
}

TEST(EvalRho, CoinMixtureSelectsBySecondWeight) {
    const auto rho = RhoSpec::coin_mixture({0.9, 0.1}, {0.5, 0.5});
    EXPECT_EQ(eval_rho(rho, family1(0.7, 0.05)), 1.0);
    EXPECT_EQ(eval_rho(rho, family1(0.7, 0.2)), 0.0);
    EXPECT_EQ(eval_rho(rho, family1(0.3, 0.2)), 1.0);
}

TEST(EvalRho, StepGraphonUsesBlocks) {
    const auto rho = RhoSpec::step_graphon({{0.9, 0.1}, {0.1, 0.5}});
    EXPECT_EQ(eval_rho(rho, family2(0.2, 0.3, 0.85)), 1.0);
    EXPECT_EQ(eval_rho(rho, family2(0.2, 0.7, 0.15)), 0.0);
    EXPECT_EQ(eval_rho(rho, family2(0.6, 0.99, 0.45)), 1.0);
}

TEST(EvalRho, IdentityLatentPassesTheTopLatent) {
    const auto rho = RhoSpec::identity_latent(2);
    EXPECT_EQ(eval_rho(rho, family2(0.1, 0.2, 0.625)), 0.625);
}

TEST(EvalRho, MissingLatentIsAnIncompleteAssignment) {
    auto fam = family2(0.5, 0.5, 0.3);
    fam.erase(0b01);
    EXPECT_THROW(eval_rho(RhoSpec::product_graphon(), fam), IncompleteAssignmentError);
    // ConstantGraphon does not read xi[1].
    EXPECT_NO_THROW(eval_rho(RhoSpec::constant_graphon(0.5), fam));
}

TEST(EvalRho, DissociatedSpecUsingGlobalIsRejected) {
    const RhoSpec bad(2, true, ValueSpace::discrete(2),
                      Expr::apply(Expr::Op::Lt, {Expr::xi({1, 2}), Expr::xi({})}));
    EXPECT_THROW(eval_rho(bad, family2(0.1, 0.2, 0.3, 0.5)), SpecValidationError);
}

TEST(EvalRho, ArityMismatch) {
    EXPECT_THROW(eval_rho(RhoSpec::product_graphon(), family1(0.1, 0.2)), ArityError);
}

TEST(Expr, ArithmeticAndComparisons) {
    const auto fam = family2(0.25, 0.5, 0.125);
    using Op = Expr::Op;
    EXPECT_DOUBLE_EQ(sum_of_singletons().eval(fam), 0.75);
    EXPECT_DOUBLE_EQ(Expr::apply(Op::Mul, {Expr::xi({1}), Expr::xi({2})}).eval(fam), 0.125);
    EXPECT_DOUBLE_EQ(Expr::apply(Op::Sub, {Expr::xi({2}), Expr::xi({1})}).eval(fam), 0.25);
    EXPECT_DOUBLE_EQ(Expr::apply(Op::Min, {Expr::xi({1}), Expr::xi({2})}).eval(fam), 0.25);
    EXPECT_DOUBLE_EQ(Expr::apply(Op::Max, {Expr::xi({1}), Expr::xi({2})}).eval(fam), 0.5);
    EXPECT_EQ(Expr::apply(Op::Lt, {Expr::xi({1, 2}), Expr::constant(0.125)}).eval(fam), 0.0);
    EXPECT_EQ(Expr::apply(Op::Le, {Expr::xi({1, 2}), Expr::constant(0.125)}).eval(fam), 1.0);
    EXPECT_EQ(Expr::apply(Op::Gt, {Expr::xi({2}), Expr::xi({1})}).eval(fam), 1.0);
    EXPECT_EQ(Expr::apply(Op::Ge, {Expr::xi({1}), Expr::xi({2})}).eval(fam), 0.0);
    const auto st = Expr::step(Expr::xi({1}), {0.2, 0.6}, {10, 20, 30});
    EXPECT_EQ(st.eval(fam), 20.0);
    EXPECT_EQ(Expr::step(Expr::constant(0.6), {0.2, 0.6}, {10, 20, 30}).eval(fam), 30.0);
}

TEST(Expr, ConstructionErrors) {
    EXPECT_THROW(Expr::xi({1, 1}), CanonicalizationError);
    EXPECT_THROW(Expr::xi({0}), DomainError);
    EXPECT_THROW(Expr::apply(Expr::Op::Sub, {Expr::constant(1)}), DomainError);
    EXPECT_THROW(Expr::step(Expr::constant(0), {0.5}, {1}), DomainError);
    EXPECT_THROW(Expr::step(Expr::constant(0), {0.5, 0.2}, {1, 2, 3}), DomainError);
}

// ---------------------------------------------------------------------------
// validate_spec

TEST(ValidateSpec, ConstantGraphonIsValidAndDissociated) {
    const auto rep = validate_spec(RhoSpec::constant_graphon(0.5));
    EXPECT_TRUE(rep.valid);
    EXPECT_TRUE(rep.dissociated);
    EXPECT_TRUE(rep.findings.empty());
}

TEST(ValidateSpec, BuiltInsAreValid) {
    for (const auto& rho : {RhoSpec::product_graphon(), RhoSpec::step_graphon({{0.9, 0.1}, {0.1, 0.5}}),
                            RhoSpec::coin_mixture({0.9, 0.1}, {0.5, 0.5}), RhoSpec::identity_latent(3)}) {
        const auto rep = validate_spec(rho);
        EXPECT_TRUE(rep.valid) << rho.family_name() << ": "
                               << (rep.findings.empty() ? "" : rep.findings.front());
    }
}

TEST(ValidateSpec, DissociatedCoinMixtureIsInvalid) {
    const auto base = RhoSpec::coin_mixture({0.9, 0.1}, {0.5, 0.5});
    const RhoSpec flagged(1, true, base.output(), base.body());
    const auto rep = validate_spec(flagged);
    EXPECT_FALSE(rep.valid);
    ASSERT_FALSE(rep.findings.empty());
    EXPECT_NE(rep.findings.front().find("xi[empty]"), std::string::npos);
}

TEST(ValidateSpec, OutOfScopeSubsetIsInvalid) {
    const RhoSpec rho(2, true, ValueSpace::real_line(),
                      Expr::apply(Expr::Op::Add, {Expr::xi({1, 3}), Expr::xi({1, 2})}));
    const auto rep = validate_spec(rho);
    EXPECT_FALSE(rep.valid);
    EXPECT_NE(rep.findings.front().find("{1,3}"), std::string::npos);
}

TEST(ValidateSpec, AsymmetricBodyIsInvalid) {
    const RhoSpec rho(2, true, ValueSpace::discrete(2),
                      Expr::apply(Expr::Op::Lt, {Expr::xi({1}), Expr::xi({2})}));
    EXPECT_FALSE(validate_spec(rho).valid);
}

TEST(ValidateSpec, SymmetricExpressionIsValid) {
    const RhoSpec rho(2, true, ValueSpace::real_line(), sum_of_singletons());
    EXPECT_TRUE(validate_spec(rho).valid);
}

TEST(ValidateSpec, OutputTypingIsChecked) {
    const RhoSpec rho(2, true, ValueSpace::discrete(2), sum_of_singletons());
    EXPECT_FALSE(validate_spec(rho).valid);
}

TEST(ValidateSpec, AsymmetricStepMatrixIsInvalid) {
    EXPECT_FALSE(validate_spec(RhoSpec::step_graphon({{0.9, 0.2}, {0.1, 0.5}})).valid);
    EXPECT_FALSE(validate_spec(RhoSpec::step_graphon({{0.9, 0.2}})).valid);
    EXPECT_FALSE(validate_spec(RhoSpec::constant_graphon(1.5)).valid);
    EXPECT_FALSE(validate_spec(RhoSpec::coin_mixture({0.9, 0.1}, {0.5, 0.6})).valid);
}

// ---------------------------------------------------------------------------
// realize_array

TEST(RealizeArray, ConstantGraphonAtOneIsComplete) {
    const auto a = realize_array(RhoSpec::constant_graphon(1.0), 3, 5);
    EXPECT_EQ(a.size(), 10u);
    for (double v : a.values()) EXPECT_EQ(v, 1.0);
}

TEST(RealizeArray, IndexBoundBelowArityIsADomainError) {
    EXPECT_THROW(realize_array(RhoSpec::product_graphon(), 3, 1), DomainError);
}

TEST(RealizeArray, ValueDependsOnlyOnTheSet) {
    const auto a = realize_array(RhoSpec::identity_latent(2), 11, 10);
    EXPECT_EQ(a.at({7, 3}), a.at({3, 7}));
    const auto b = realize_array(RhoSpec::identity_latent(3), 11, 8);
    EXPECT_EQ(b.at({5, 2, 8}), b.at({2, 8, 5}));
    EXPECT_EQ(b.at({5, 2, 8}), b.at({2, 5, 8}));
}

TEST(RealizeArray, EntriesAreRhoOfTheEdgeFamily) {
    const auto rho = RhoSpec::product_graphon();
    const auto a = realize_array(rho, 21, 30);
    a.for_each([&](std::span<const std::uint64_t> e, double v) {
        ASSERT_EQ(v, eval_rho(rho, latent_family(21, SubsetKey({e[0], e[1]}, 2))));
    });
}

TEST(RealizeArray, LazyViewMatchesMaterializedArray) {
    const auto rho = RhoSpec::step_graphon({{0.9, 0.1}, {0.1, 0.5}});
    const auto a = realize_array(rho, 5, 40);
    const LazyArray lazy(rho, LatentField{5}, 40);
    a.for_each([&](std::span<const std::uint64_t> e, double v) { ASSERT_EQ(lazy.at(e), v); });
}

TEST(RealizeArray, OutOfRangeEdge) {
    const auto a = realize_array(RhoSpec::product_graphon(), 1, 5);
    EXPECT_THROW(a.at({1, 6}), RangeError);
    EXPECT_THROW(a.at({0, 1}), RangeError);
    EXPECT_THROW(a.at({1, 2, 3}), ArityError);
}

TEST(RealizeArray, ColexOrderCoversEveryEdgeOnce) {
    std::vector<std::vector<std::uint64_t>> seen;
    detail::for_each_edge(3, 6, [&](std::span<const std::uint64_t> e) {
        seen.emplace_back(e.begin(), e.end());
    });
    ASSERT_EQ(seen.size(), 20u);
    for (std::size_t i = 0; i < seen.size(); ++i) EXPECT_EQ(detail::colex_rank(seen[i]), i);
}

TEST(RealizeArray, ProductGraphonEdgeDensity) {
    // Edge frequency within one k = 1000 array. Shared vertex latents make
    // the edges dependent: the frequency is close to mean(xi_i)^2, whose sd is
    // sqrt(1 / (12 k)) ~ 0.0091, far above the independent-edge value. The
    // sd is estimated from 20 independent realizations and checked against
    // that oracle before applying the 4 sigma band around 1/4.
    std::vector<double> freqs;
    for (std::uint64_t s = 0; s < 20; ++s) {
        freqs.push_back(edge_frequency(realize_array(RhoSpec::product_graphon(), 1000 + s, 1000)));
    }
    const double mean = std::accumulate(freqs.begin(), freqs.end(), 0.0) / 20.0;
    double ss = 0;
    for (double f : freqs) ss += (f - mean) * (f - mean);
    const double sd = std::sqrt(ss / 19.0);
    const double oracle_sd = std::sqrt(1.0 / 12000.0);
    EXPECT_GT(sd, 0.5 * oracle_sd);
    EXPECT_LT(sd, 2.0 * oracle_sd);
    for (double f : freqs) EXPECT_NEAR(f, 0.25, 4 * sd);
    EXPECT_NEAR(mean, 0.25, 4 * sd / std::sqrt(20.0));
}

TEST(RealizeArray, OneBlockStepMatchesConstantGraphon) {
    const auto step = RhoSpec::step_graphon({{0.35}});
    const auto flat = RhoSpec::constant_graphon(0.35);
    const auto h = events::single_edge(2, ValueSpace::discrete(2), SetExpr::points({1}));
    const auto a = estimate_direct(step, h, 100000, 1);
    const auto b = estimate_direct(flat, h, 100000, 2);
    const double se = std::sqrt(a.standard_error * a.standard_error + b.standard_error * b.standard_error);
    EXPECT_LE(std::abs(a.estimate - b.estimate), 4 * se);
    // Both read the same edge latent, so on a shared seed they agree exactly.
    EXPECT_EQ(realize_array(step, 9, 50).values(), realize_array(flat, 9, 50).values());
}
