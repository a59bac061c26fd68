#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qfdr/protocol.hpp"
#include "qfdr/rng.hpp"

namespace qfdr {
namespace {

const ThermalSpec kReference = ThermalSpec::from_beta(3.413);

TEST(Rng, SubstreamsAreReproducibleAndDistinct) {
    auto a = Xoshiro256::substream(42, 7);
    auto b = Xoshiro256::substream(42, 7);
    auto c = Xoshiro256::substream(42, 8);
    auto d = Xoshiro256::substream(43, 7);
    bool differs_c = false, differs_d = false;
    for (int i = 0; i < 16; ++i) {
        const auto x = a(), y = b(), z = c(), w = d();
        EXPECT_EQ(x, y);
        differs_c |= x != z;
        differs_d |= x != w;
    }
    EXPECT_TRUE(differs_c);
    EXPECT_TRUE(differs_d);
}

TEST(Rng, UniformMeanAndRange) {
    auto rng = Xoshiro256::substream(1, 0);
    double sum = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        sum += u;
    }
    EXPECT_NEAR(sum / n, 0.5, 5.0 * std::sqrt(1.0 / 12.0 / n));
}

TEST(ProtocolSpec, CoherentGeometry) {
    const auto spec = ProtocolSpec::coherent(5, kReference);
    EXPECT_NEAR(spec.step_angle(), std::numbers::pi / 10, 1e-15);
    EXPECT_NEAR(spec.norm_delta_h(), 1.0 / std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(spec.inverse_speed(), 5.0 * std::sqrt(2.0), 1e-14);
    EXPECT_NEAR(spec.speed() * spec.inverse_speed(), 1.0, 1e-15);
    EXPECT_THROW(ProtocolSpec::coherent(0, kReference), std::domain_error);
}

TEST(ProtocolSpec, IncoherentGapRamp) {
    const auto spec = ProtocolSpec::incoherent(4, kReference, 1.0, 2.0);
    EXPECT_DOUBLE_EQ(spec.gap_at(0), 1.0);
    EXPECT_DOUBLE_EQ(spec.gap_at(2), 1.5);
    EXPECT_DOUBLE_EQ(spec.gap_at(4), 2.0);
    EXPECT_DOUBLE_EQ(spec.norm_delta_h(), 0.5);
    EXPECT_THROW(spec.step_angle(), std::logic_error);
    EXPECT_THROW(ProtocolSpec::incoherent(4, kReference, 0.0, 2.0), std::domain_error);
    EXPECT_THROW(ProtocolSpec::incoherent(4, kReference, 1.0, -1.0), std::domain_error);
}

TEST(SpamModel, RateRange) {
    EXPECT_NO_THROW(SpamModel(0.004, 0.004));
    EXPECT_THROW(SpamModel(-0.1, 0.0), std::domain_error);
    EXPECT_THROW(SpamModel(0.0, 0.5), std::domain_error);
    EXPECT_TRUE(SpamModel::ideal().is_ideal());
}

TEST(StepWorkDistribution, RejectsUnnormalised) {
    using S = StepWorkDistribution::Support;
    EXPECT_THROW(StepWorkDistribution(S::coherent, {{1.0, 0.5}, {0.0, 0.4}}), std::domain_error);
    EXPECT_THROW(StepWorkDistribution(S::coherent, {{1.0, -0.1}, {0.0, 1.1}}),
                 std::domain_error);
}

TEST(CoherentStep, ReferenceTableAtTwoSteps) {
    const auto dist = coherent_step_distribution(ProtocolSpec::coherent(2, kReference));
    EXPECT_NEAR(dist.probability_of(1.0), 0.141776186332736, 1e-14);
    EXPECT_NEAR(dist.probability_of(-1.0), 0.00467042307399052, 1e-14);
    EXPECT_NEAR(dist.probability_of(0.0), 1.0 - 0.141776186332736 - 0.00467042307399052, 1e-14);
}

TEST(CoherentStep, MatchesDensityMatrixOracle) {
    std::mt19937_64 gen(2024);
    std::uniform_real_distribution<double> beta(0.0, 8.0);
    for (int trial = 0; trial < 20; ++trial) {
        const double b = beta(gen);
        for (int n = 1; n <= 32; ++n) {
            const auto spec = ProtocolSpec::coherent(n, ThermalSpec::from_beta(b));
            const auto dist = coherent_step_distribution(spec);
            const auto oracle = oracle::density_matrix_step(b, spec.step_angle());
            for (int w = -1; w <= 1; ++w) {
                EXPECT_NEAR(dist.probability_of(w), oracle.at(w), 1e-12)
                    << "beta=" << b << " N=" << n << " w=" << w;
            }
        }
    }
}

TEST(CoherentStep, SupportIsThreeOutcomes) {
    for (int n : {1, 3, 17}) {
        const auto dist = coherent_step_distribution(ProtocolSpec::coherent(n, kReference));
        double total = 0.0;
        for (const auto& o : dist.outcomes()) {
            EXPECT_TRUE(o.work == -1.0 || o.work == 0.0 || o.work == 1.0);
            EXPECT_GE(o.probability, 0.0);
            total += o.probability;
        }
        EXPECT_NEAR(total, 1.0, 1e-15);
    }
}

TEST(IncoherentStep, MatchesBruteForceQuench) {
    std::mt19937_64 gen(99);
    std::uniform_real_distribution<double> beta(0.0, 6.0);
    std::uniform_real_distribution<double> gap(0.05, 20.0);
    for (int trial = 0; trial < 50; ++trial) {
        const double b = beta(gen), w0 = gap(gen), wf = gap(gen);
        const int n = 1 + trial % 9;
        const auto spec = ProtocolSpec::incoherent(n, ThermalSpec::from_beta(b), w0, wf);
        for (int j = 0; j < n; ++j) {
            const auto dist = incoherent_step_distribution(spec, j);
            const auto oracle = oracle::incoherent_tpm(b, spec.gap_at(j), spec.gap_at(j + 1));
            double mean = 0.0, m2 = 0.0;
            for (const auto& [w, p] : oracle) {
                mean += p * w;
                m2 += p * w * w;
            }
            EXPECT_NEAR(dist.mean(), mean, 1e-12);
            EXPECT_NEAR(dist.variance(), m2 - mean * mean, 1e-12);
        }
    }
}

TEST(IncoherentStep, IndexRangeAndFlatRamp) {
    const auto spec = ProtocolSpec::incoherent(3, kReference, 1.0, 2.0);
    EXPECT_THROW(incoherent_step_distribution(spec, -1), std::out_of_range);
    EXPECT_THROW(incoherent_step_distribution(spec, 3), std::out_of_range);
    const auto flat = ProtocolSpec::incoherent(3, kReference, 1.5, 1.5);
    const auto dist = incoherent_step_distribution(flat, 1);
    EXPECT_EQ(dist.probability_of(0.0), 1.0);
}

TEST(Spam, MarginalTableAtTwoSteps) {
    const auto thermal = ThermalSpec::from_population(0.032);
    const auto spec = ProtocolSpec::coherent(2, thermal);
    const auto dist = apply_spam(coherent_step_distribution(spec), SpamModel(0.004, 0.004));
    EXPECT_NEAR(dist.probability_of(1.0), 0.144607490, 5e-10);
    EXPECT_NEAR(dist.probability_of(-1.0), 0.0080817599, 5e-11);
}

TEST(Spam, IdealModelIsIdentity) {
    std::mt19937_64 gen(4);
    std::uniform_real_distribution<double> unit(0.0, 0.5);
    for (int i = 0; i < 100; ++i) {
        const double p = unit(gen), pf = 2.0 * unit(gen);
        const auto base = tpm_step_distribution(p, pf);
        const auto marginal = apply_spam(base, SpamModel::ideal());
        const auto conditioned = apply_spam_conditioned(p, pf, SpamModel::ideal());
        for (int w = -1; w <= 1; ++w) {
            EXPECT_NEAR(marginal.probability_of(w), base.probability_of(w), 1e-15);
            EXPECT_NEAR(conditioned.probability_of(w), base.probability_of(w), 1e-15);
        }
    }
}

TEST(Spam, RejectsIncoherentSupport) {
    const auto spec = ProtocolSpec::incoherent(2, kReference, 1.0, 2.0);
    EXPECT_THROW(apply_spam(incoherent_step_distribution(spec, 0), SpamModel(0.01, 0.01)),
                 std::invalid_argument);
    EXPECT_THROW(sample_work(spec, SpamModel(0.01, 0.01), 10, 1), std::invalid_argument);
}

TEST(Spam, ConditionedReadoutOnlyMoments) {
    // With no rotation a step reads +1 only via a 0 -> bright misread and -1
    // only via a 1 -> dark misread.
    const double p = 0.032, pb = 0.004, pd = 0.006;
    const auto dist = apply_spam_conditioned(p, 0.0, SpamModel(pb, pd));
    EXPECT_NEAR(dist.probability_of(1.0), (1 - p) * pb, 1e-16);
    EXPECT_NEAR(dist.probability_of(-1.0), p * pd, 1e-16);
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / v.size();
}

double var_of(const std::vector<double>& v) {
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / (v.size() - 1);
}

TEST(Sampling, DeterministicAcrossWorkerCounts) {
    const auto spec = ProtocolSpec::coherent(4, kReference);
    const auto one = sample_work(spec, std::nullopt, 5000, 77, {.workers = 1});
    for (unsigned w : {2u, 3u, 8u}) {
        const auto many = sample_work(spec, std::nullopt, 5000, 77, {.workers = w});
        EXPECT_EQ(one.totals, many.totals) << "workers=" << w;
        EXPECT_EQ(one.counts, many.counts);
    }
    const auto other_seed = sample_work(spec, std::nullopt, 5000, 78);
    EXPECT_NE(one.totals, other_seed.totals);
}

TEST(Sampling, TalliesAreConsistent) {
    const auto spec = ProtocolSpec::coherent(3, kReference);
    const auto s = sample_work(spec, std::nullopt, 2000, 5);
    EXPECT_EQ(s.counts.steps, 6000u);
    double total = 0.0;
    for (double w : s.totals) {
        EXPECT_EQ(w, std::round(w));
        EXPECT_LE(std::abs(w), 3.0);
        total += w;
    }
    EXPECT_EQ(total, static_cast<double>(s.counts.positive) - static_cast<double>(s.counts.negative));
}

TEST(Sampling, ConvergesToExactCumulants) {
    const int n = 3;
    const auto spec = ProtocolSpec::coherent(n, kReference);
    const std::size_t runs = 1000000;
    const auto s = sample_work(spec, std::nullopt, runs, 2025, {.workers = 4});
    const auto step = coherent_step_distribution(spec);
    const double mean = n * step.mean();
    const double var = n * step.variance();
    EXPECT_NEAR(mean_of(s.totals), mean, 5.0 * std::sqrt(var / runs));
    // Var of the sample variance ~ (mu4 - sigma^4) / M; bound mu4 by a loose 3 sigma^4 + var.
    EXPECT_NEAR(var_of(s.totals), var, 5.0 * std::sqrt((3 * var * var + var) / runs));
    const double p_hat = static_cast<double>(s.counts.excited_first) / s.counts.steps;
    const double p = kReference.excited_population();
    EXPECT_NEAR(p_hat, p, 5.0 * std::sqrt(p * (1 - p) / s.counts.steps));
}

TEST(Sampling, IncoherentMeanMatchesExact) {
    const auto spec = ProtocolSpec::incoherent(6, ThermalSpec::from_beta(1.2), 1.0, 3.0);
    const std::size_t runs = 200000;
    const auto s = sample_work(spec, std::nullopt, runs, 3);
    double mean = 0.0, var = 0.0;
    for (int j = 0; j < 6; ++j) {
        const auto d = incoherent_step_distribution(spec, j);
        mean += d.mean();
        var += d.variance();
    }
    EXPECT_NEAR(mean_of(s.totals), mean, 5.0 * std::sqrt(var / runs));
    EXPECT_NEAR(var_of(s.totals), var, 5.0 * std::sqrt((3 * var * var + var) / runs));
}

TEST(Sampling, ConditionedReadoutOnlyMatchesClosedForm) {
    const int n = 7;
    const double p = kReference.excited_population();
    const SpamModel spam(0.004, 0.004);
    const auto spec = ProtocolSpec::coherent(n, kReference);
    const std::size_t runs = 400000;
    const auto s = sample_tpm_work(spec, 0.0, spam, runs, 8,
                                   {.workers = 2, .convention = SpamConvention::conditioned});
    const double up = (1 - p) * spam.p_bright_given_0();
    const double down = p * spam.p_dark_given_1();
    const double mean = n * (up - down);
    const double var = n * (up + down - (up - down) * (up - down));
    EXPECT_NEAR(mean_of(s.totals), mean, 5.0 * std::sqrt(var / runs));
    EXPECT_NEAR(var_of(s.totals), var, 5.0 * std::sqrt((3 * var * var + var) / runs));
}

TEST(Sampling, MarginalSpamMatchesMixedTable) {
    const int n = 2;
    const auto spec = ProtocolSpec::coherent(n, kReference);
    const SpamModel spam(0.02, 0.03);
    const auto table = apply_spam(coherent_step_distribution(spec), spam);
    const std::size_t runs = 400000;
    const auto s = sample_work(spec, spam, runs, 13, {.workers = 3});
    const double steps = static_cast<double>(s.counts.steps);
    const double p_plus = table.probability_of(1.0);
    const double p_minus = table.probability_of(-1.0);
    EXPECT_NEAR(s.counts.positive / steps, p_plus, 5.0 * std::sqrt(p_plus / steps));
    EXPECT_NEAR(s.counts.negative / steps, p_minus, 5.0 * std::sqrt(p_minus / steps));
}

}  // namespace
}  // namespace qfdr
