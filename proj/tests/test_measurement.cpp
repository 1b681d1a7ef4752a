#include "reversim/measurement.hpp"

#include <gtest/gtest.h>

#include <numbers>

#include "test_helpers.hpp"

using namespace reversim;
using namespace reversim::testing;

namespace {

ObservableDecomposition mz_observable(int n_spins) {
    return decompose_observable(build_magnetization(n_spins));
}

ObservableDecomposition sz_observable() {
    return decompose_observable(HermitianOperator(sigma_z()));
}

/// Repeated-measurement setup: sigma_z at quarter periods of the two-level
/// rotation, maximally mixed start.
MeasurementSchedule spin_bernoulli_schedule(int steps, double omega = 1.0) {
    const double quarter = 0.5 * std::numbers::pi / omega;
    return MeasurementSchedule::equally_spaced(quarter, quarter, steps, sz_observable(),
                                               rabi_hamiltonian(omega));
}

MeasurementSchedule random_real_schedule(int n_spins, int steps, std::uint64_t seed) {
    return MeasurementSchedule::equally_spaced(0.0, 1.0, steps, mz_observable(n_spins),
                                               random_real_hermitian(1 << n_spins, seed));
}

}  // namespace

TEST(MeasurementSchedule, ValidatesInputs) {
    auto obs = sz_observable();
    auto h = HermitianOperator::zero(2);
    auto rho = DensityMatrix::maximally_mixed(2);
    EXPECT_THROW(MeasurementSchedule({1.0, 1.0}, {obs, obs}, h, rho), std::invalid_argument);
    EXPECT_THROW(MeasurementSchedule({0.0, 1.0}, {obs}, h, rho), std::invalid_argument);
    EXPECT_THROW(MeasurementSchedule({0.0}, {obs}, HermitianOperator::zero(3),
                                     DensityMatrix::maximally_mixed(3)),
                 std::invalid_argument);
    EXPECT_THROW(MeasurementSchedule({0.0}, {mz_observable(2)}, h, rho), std::invalid_argument);
}

TEST(TrajectoryProbability, SpinBernoulliSequencesAreUniform) {
    // every n-step outcome sequence of the quarter-period measurement has
    // probability 2^-n, and single-step marginals are 1/2
    const int steps = 3;
    auto s = spin_bernoulli_schedule(steps);
    auto dist = enumerate_distribution(s);
    ASSERT_EQ(dist.size(), 8u);
    for (const auto& [w, p] : dist) {
        EXPECT_NEAR(p, 0.125, 1e-14) << to_string(w);
    }
    double up_marginal = 0.0;
    for (const auto& [w, p] : dist) {
        if (w.labels[0] == "1") up_marginal += p;
    }
    EXPECT_NEAR(up_marginal, 0.5, 1e-13);
}

TEST(TrajectoryProbability, RepeatedMeasurementWithTrivialDynamics) {
    // H = 0, same observable twice: Prob[(a, a)] = d_a/d, cross terms vanish
    auto obs = mz_observable(2);
    auto s = MeasurementSchedule::equally_spaced(0.0, 1.0, 2, obs, HermitianOperator::zero(4));
    for (const auto& a : obs.conditions()) {
        for (const auto& b : obs.conditions()) {
            const double p = trajectory_probability(s, Trajectory{{a.label, b.label}});
            if (a.label == b.label) {
                EXPECT_NEAR(p, a.dim / 4.0, 1e-14);
            } else {
                EXPECT_EQ(p, 0.0);
            }
        }
    }
}

TEST(TrajectoryProbability, MatchesEnumerationEntrywise) {
    auto s = random_real_schedule(2, 3, 17);
    for (const auto& [w, p] : enumerate_distribution(s)) {
        EXPECT_NEAR(trajectory_probability(s, w), p, 1e-14);
    }
}

TEST(TrajectoryProbability, UnknownLabelThrows) {
    auto s = spin_bernoulli_schedule(2);
    EXPECT_THROW(trajectory_probability(s, Trajectory{{"1", "bogus"}}), std::invalid_argument);
    EXPECT_THROW(trajectory_probability(s, Trajectory{{"1"}}), std::invalid_argument);
}

TEST(EnumerateDistribution, NormalizesForRandomSchedules) {
    // exhaustive sum over all sequences is exactly one
    auto s = random_real_schedule(3, 4, 12345);
    auto dist = enumerate_distribution(s);
    EXPECT_EQ(dist.size(), 256u);
    double total = 0.0;
    for (const auto& [w, p] : dist) total += p;
    EXPECT_NEAR(total, 1.0, 1e-10);
}

TEST(EnumerateDistribution, SingleStepMagnetizationMarginals) {
    auto s = MeasurementSchedule::equally_spaced(0.0, 1.0, 1, mz_observable(2),
                                                 HermitianOperator::zero(4));
    auto dist = enumerate_distribution(s);
    EXPECT_NEAR(dist.at(Trajectory{{"1"}}), 0.25, 1e-14);
    EXPECT_NEAR(dist.at(Trajectory{{"0"}}), 0.5, 1e-14);
    EXPECT_NEAR(dist.at(Trajectory{{"-1"}}), 0.25, 1e-14);
}

TEST(EnumerateDistribution, CapExceededThrows) {
    auto s = random_real_schedule(2, 3, 5);
    EXPECT_THROW(enumerate_distribution(s, 10), EnumerationCapExceeded);
}

TEST(MarginalStationarity, UniformInitialStateStaysUniform) {
    // with rho_0 = 1/d the marginal of condition a is d_a/d at every step,
    // for any Hamiltonian (complex allowed)
    const int n_spins = 2;
    auto obs = mz_observable(n_spins);
    auto s = MeasurementSchedule::equally_spaced(0.0, 0.8, 4, obs,
                                                 random_hermitian(1 << n_spins, 321));
    auto dist = enumerate_distribution(s);
    for (std::size_t step = 0; step < s.step_count(); ++step) {
        for (const auto& cond : obs.conditions()) {
            double marginal = 0.0;
            for (const auto& [w, p] : dist) {
                if (w.labels[step] == cond.label) marginal += p;
            }
            EXPECT_NEAR(marginal, cond.dim / 4.0, 1e-10) << "step " << step << " " << cond.label;
        }
    }
}

TEST(ReverseTrajectory, IdentityMapsReverseOrder) {
    ConditionReversalMap id({{"a", "a"}, {"b", "b"}, {"c", "c"}});
    std::vector<ConditionReversalMap> maps{id, id, id};
    Trajectory w{{"a", "b", "c"}};
    EXPECT_EQ(reverse_trajectory(w, maps).labels, (std::vector<std::string>{"c", "b", "a"}));
}

TEST(ReverseTrajectory, SwapMapFlipsLabels) {
    ConditionReversalMap swap({{"1", "-1"}, {"-1", "1"}});
    std::vector<ConditionReversalMap> maps{swap, swap};
    EXPECT_EQ(reverse_trajectory(Trajectory{{"1", "1"}}, maps).labels,
              (std::vector<std::string>{"-1", "-1"}));
    EXPECT_EQ(reverse_trajectory(Trajectory{{"1", "-1"}}, maps).labels,
              (std::vector<std::string>{"1", "-1"}));
}

TEST(ReverseTrajectory, InvolutionOnRandomTrajectories) {
    ConditionReversalMap swap({{"1", "-1"}, {"-1", "1"}});
    Rng rng(7);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t len = 1 + static_cast<std::size_t>(rng.uniform() * 6);
        Trajectory w;
        for (std::size_t i = 0; i < len; ++i) {
            w.labels.push_back(rng.uniform() < 0.5 ? "1" : "-1");
        }
        std::vector<ConditionReversalMap> maps(len, swap);
        EXPECT_EQ(reverse_trajectory(reverse_trajectory(w, maps), maps), w);
    }
}

TEST(ReverseTrajectory, MissingLabelThrows) {
    ConditionReversalMap id(std::map<std::string, std::string>{{"a", "a"}});
    std::vector<ConditionReversalMap> maps{id};
    EXPECT_THROW(reverse_trajectory(Trajectory{{"b"}}, maps), std::invalid_argument);
}

TEST(VerifyTimeReversal, RandomRealHamiltonianMagnetization) {
    auto s = random_real_schedule(3, 4, 20240);
    auto report = verify_time_reversal(s, AntiunitaryInvolution::conjugation(8));
    EXPECT_EQ(report.entries.size(), 256u);
    EXPECT_LE(report.max_deviation, 1e-10);
}

TEST(VerifyTimeReversal, TrivialDynamics) {
    auto s = MeasurementSchedule::equally_spaced(0.0, 1.0, 3, mz_observable(2),
                                                 HermitianOperator::zero(4));
    auto report = verify_time_reversal(s, AntiunitaryInvolution::conjugation(4));
    EXPECT_LE(report.max_deviation, 1e-12);
}

TEST(VerifyTimeReversal, SpinBernoulliExample) {
    auto report =
        verify_time_reversal(spin_bernoulli_schedule(4), AntiunitaryInvolution::conjugation(2));
    EXPECT_LE(report.max_deviation, 1e-12);
}

TEST(VerifyTimeReversal, NonUniformInitialStateRejected) {
    auto s = MeasurementSchedule::equally_spaced(0.0, 1.0, 2, sz_observable(),
                                                 HermitianOperator::zero(2),
                                                 DensityMatrix::pure(StateVector::basis_state(2, 0)));
    try {
        verify_time_reversal(s, AntiunitaryInvolution::conjugation(2));
        FAIL() << "expected PreconditionViolation";
    } catch (const PreconditionViolation& e) {
        EXPECT_NE(std::string(e.what()).find("maximally mixed"), std::string::npos) << e.what();
    }
}

TEST(VerifyTimeReversal, AsymmetricHamiltonianRejected) {
    auto s = MeasurementSchedule::equally_spaced(0.0, 1.0, 2, sz_observable(),
                                                 HermitianOperator(sigma_y()));
    try {
        verify_time_reversal(s, AntiunitaryInvolution::conjugation(2));
        FAIL() << "expected PreconditionViolation";
    } catch (const PreconditionViolation& e) {
        EXPECT_NE(std::string(e.what()).find("pi H pi"), std::string::npos) << e.what();
    }
}

TEST(VerifyTimeReversal, NonCovariantObservableRejected) {
    // projectors of sigma_z + 0.3 sigma_y conjugate onto those of
    // sigma_z - 0.3 sigma_y, which match no projector of the family
    HermitianOperator tilted(sigma_z() + 0.3 * sigma_y());
    auto s = MeasurementSchedule::equally_spaced(0.0, 1.0, 2, decompose_observable(tilted),
                                                 HermitianOperator::zero(2));
    try {
        verify_time_reversal(s, AntiunitaryInvolution::conjugation(2));
        FAIL() << "expected PreconditionViolation";
    } catch (const PreconditionViolation& e) {
        EXPECT_NE(std::string(e.what()).find("closed under pi"), std::string::npos) << e.what();
    }
}

TEST(VerifyTimeReversal, AsymmetricSpacingRejected) {
    auto obs = std::make_shared<const ObservableDecomposition>(sz_observable());
    MeasurementSchedule s({0.0, 1.0, 3.0}, {obs, obs, obs}, HermitianOperator::zero(2),
                          DensityMatrix::maximally_mixed(2));
    try {
        verify_time_reversal(s, AntiunitaryInvolution::conjugation(2));
        FAIL() << "expected PreconditionViolation";
    } catch (const PreconditionViolation& e) {
        EXPECT_NE(std::string(e.what()).find("spacing"), std::string::npos) << e.what();
    }
}

TEST(VerifyTimeReversal, UnequalButSymmetricSpacing) {
    // gaps (1, 2, 1) are palindromic; the theorem does not need equal spacing
    auto obs = std::make_shared<const ObservableDecomposition>(mz_observable(2));
    MeasurementSchedule s({0.0, 1.0, 3.0, 4.0}, {obs, obs, obs, obs},
                          random_real_hermitian(4, 61), DensityMatrix::maximally_mixed(4));
    auto report = verify_time_reversal(s, AntiunitaryInvolution::conjugation(4));
    EXPECT_LE(report.max_deviation, 1e-10);
}

TEST(VerifyTimeReversal, PalindromicMixedObservables) {
    // different observables per step are allowed when the schedule reads the
    // same backwards: here sigma_z, sigma_x, sigma_z with trivial dynamics
    auto sz = std::make_shared<const ObservableDecomposition>(sz_observable());
    auto sx = std::make_shared<const ObservableDecomposition>(
        decompose_observable(HermitianOperator(sigma_x())));
    MeasurementSchedule s({0.0, 1.0, 2.0}, {sz, sx, sz}, HermitianOperator::zero(2),
                          DensityMatrix::maximally_mixed(2));
    auto report = verify_time_reversal(s, AntiunitaryInvolution::conjugation(2));
    EXPECT_LE(report.max_deviation, 1e-12);
}

TEST(VerifyTimeReversal, SigmaXFlipCovariantSigmaZ) {
    // V = sigma_x makes sigma_z covariant with swapped outcomes; the real
    // rabi Hamiltonian commutes with it
    auto s = spin_bernoulli_schedule(3);
    auto report = verify_time_reversal(s, AntiunitaryInvolution{sigma_x()});
    EXPECT_LE(report.max_deviation, 1e-12);
}

TEST(DetailedBalance, TwoSpinRatioFromExtremeToMiddle) {
    // ratio from (m = +1, dim 1) to (m = 0, dim 2) is exactly the dimension
    // ratio 2
    auto s = random_real_schedule(2, 2, 99);
    auto result =
        detailed_balance_ratio(s, Trajectory{{"1", "0"}}, AntiunitaryInvolution::conjugation(4));
    ASSERT_TRUE(result.defined);
    EXPECT_DOUBLE_EQ(result.predicted, 2.0);
    EXPECT_NEAR(result.ratio, 2.0, 1e-10);
}

TEST(DetailedBalance, EqualEndpointsGiveUnitRatio) {
    auto s = random_real_schedule(2, 3, 100);
    auto result = detailed_balance_ratio(s, Trajectory{{"0", "1", "0"}},
                                         AntiunitaryInvolution::conjugation(4));
    ASSERT_TRUE(result.defined);
    EXPECT_DOUBLE_EQ(result.predicted, 1.0);
    EXPECT_NEAR(result.ratio, 1.0, 1e-10);
}

TEST(DetailedBalance, AllDefinedTrajectoriesMatchPrediction) {
    auto s = random_real_schedule(3, 3, 2718);
    auto report = detailed_balance_report(s, AntiunitaryInvolution::conjugation(8));
    EXPECT_GT(report.defined_count, 0u);
    EXPECT_LE(report.max_error, 1e-8);
}

TEST(DetailedBalance, ZeroDenominatorFlaggedUndefined) {
    // H = 0 makes cross-condition transitions impossible
    auto s = MeasurementSchedule::equally_spaced(0.0, 1.0, 2, mz_observable(2),
                                                 HermitianOperator::zero(4));
    auto result =
        detailed_balance_ratio(s, Trajectory{{"1", "0"}}, AntiunitaryInvolution::conjugation(4));
    EXPECT_FALSE(result.defined);
}

TEST(AblConditional, TrivialDynamicsPinsIntermediateSpin) {
    // endpoints up/up with H = 0: the intermediate measurement is certainly up
    auto s = MeasurementSchedule::equally_spaced(0.0, 1.0, 3, sz_observable(),
                                                 HermitianOperator::zero(2));
    const std::vector<std::string> up{"1"};
    const std::vector<std::string> down{"-1"};
    EXPECT_EQ(abl_conditional(s, "1", "1", up), 1.0);
    EXPECT_EQ(abl_conditional(s, "1", "1", down), 0.0);
}

TEST(AblConditional, SingleIntermediateWithOneLabel) {
    // middle observable is the identity: only one possible outcome
    auto sz = std::make_shared<const ObservableDecomposition>(sz_observable());
    auto trivial = std::make_shared<const ObservableDecomposition>(
        decompose_observable(HermitianOperator(CMatrix::Identity(2, 2))));
    MeasurementSchedule s({0.0, 1.0, 2.0}, {sz, trivial, sz}, rabi_hamiltonian(0.7),
                          DensityMatrix::maximally_mixed(2));
    const std::vector<std::string> only{"1"};
    EXPECT_DOUBLE_EQ(abl_conditional(s, "1", "-1", only), 1.0);
}

TEST(AblConditional, SumsToOneAndMatchesProbabilityRatios) {
    // independent route: with rho_0 = 1/d the conditional equals
    // Prob[w] / sum over intermediates of Prob[w]
    auto s = random_real_schedule(2, 4, 55);
    auto dist = enumerate_distribution(s);
    auto obs = mz_observable(2);
    for (const auto& first : obs.conditions()) {
        for (const auto& last : obs.conditions()) {
            double denom = 0.0;
            for (const auto& [w, p] : dist) {
                if (w.labels.front() == first.label && w.labels.back() == last.label) denom += p;
            }
            if (denom <= 0.0) continue;
            auto conditional = abl_distribution(s, first.label, last.label);
            double total = 0.0;
            for (const auto& [mids, q] : conditional) {
                Trajectory w;
                w.labels.push_back(first.label);
                for (const auto& lbl : mids.labels) w.labels.push_back(lbl);
                w.labels.push_back(last.label);
                EXPECT_NEAR(q, dist.at(w) / denom, 1e-12);
                total += q;
            }
            EXPECT_NEAR(total, 1.0, 1e-10);
        }
    }
}

TEST(AblConditional, HypothesesConditionalTimeSymmetry) {
    // under the reversal hypotheses (real H, conjugation, m_z) the
    // conditional is symmetric under exchanging past and future
    auto s = random_real_schedule(2, 4, 77);
    auto obs = mz_observable(2);
    for (const auto& first : obs.conditions()) {
        for (const auto& last : obs.conditions()) {
            std::map<Trajectory, double> forward;
            try {
                forward = abl_distribution(s, first.label, last.label);
            } catch (const EndpointsUnreachable&) {
                continue;
            }
            auto backward = abl_distribution(s, last.label, first.label);
            for (const auto& [mids, q] : forward) {
                Trajectory reversed_mids;
                reversed_mids.labels.assign(mids.labels.rbegin(), mids.labels.rend());
                EXPECT_NEAR(q, backward.at(reversed_mids), 1e-10);
            }
        }
    }
}

TEST(AblConditional, UnreachableEndpointsThrow) {
    auto s = MeasurementSchedule::equally_spaced(0.0, 1.0, 3, sz_observable(),
                                                 HermitianOperator::zero(2));
    const std::vector<std::string> up{"1"};
    EXPECT_THROW(abl_conditional(s, "1", "-1", up), EndpointsUnreachable);
}

TEST(AblConditional, WrongIntermediateCountThrows) {
    auto s = MeasurementSchedule::equally_spaced(0.0, 1.0, 3, sz_observable(),
                                                 HermitianOperator::zero(2));
    const std::vector<std::string> none{};
    EXPECT_THROW(abl_conditional(s, "1", "1", none), std::invalid_argument);
}

TEST(SampleTrajectory, FirstOutcomeFrequencyIsHalf) {
    // 1e5 draws of the first quarter-period outcome; 0.01 is about six
    // binomial standard deviations
    auto s = spin_bernoulli_schedule(1);
    Rng rng = Rng::stream(424242, 0);
    int ups = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        if (sample_trajectory(s, rng).labels[0] == "1") ++ups;
    }
    EXPECT_NEAR(static_cast<double>(ups) / n, 0.5, 0.01);
}

TEST(SampleTrajectory, PureEigenstateStaysConstant) {
    auto s = MeasurementSchedule::equally_spaced(0.0, 1.0, 4, sz_observable(),
                                                 HermitianOperator::zero(2),
                                                 DensityMatrix::pure(StateVector::basis_state(2, 1)));
    Rng rng(5);
    for (int i = 0; i < 50; ++i) {
        const Trajectory w = sample_trajectory(s, rng);
        for (const auto& label : w.labels) EXPECT_EQ(label, "-1");
    }
}

TEST(SampleCounts, AgreesWithEnumerationInTotalVariation) {
    auto s = random_real_schedule(2, 3, 808);
    const std::uint64_t n = 100000;
    auto exact = enumerate_distribution(s);
    auto counts = sample_counts(s, n, 2024);
    EXPECT_LE(total_variation_distance(exact, counts, n), 0.02);
}

TEST(SampleCounts, ReproducibleForFixedSeedAndWorkers) {
    auto s = random_real_schedule(2, 2, 9);
    auto a = sample_counts(s, 20000, 31, 4);
    auto b = sample_counts(s, 20000, 31, 4);
    EXPECT_EQ(a, b);
    std::uint64_t total = 0;
    for (const auto& [w, c] : a) total += c;
    EXPECT_EQ(total, 20000u);
}

TEST(SampleCounts, WorkerSplitKeepsTheDistribution) {
    auto s = random_real_schedule(2, 2, 9);
    const std::uint64_t n = 100000;
    auto exact = enumerate_distribution(s);
    EXPECT_LE(total_variation_distance(exact, sample_counts(s, n, 7, 1), n), 0.02);
    EXPECT_LE(total_variation_distance(exact, sample_counts(s, n, 7, 3), n), 0.02);
}

TEST(Entropy, ConditionEntropiesAndTrace) {
    auto obs3 = mz_observable(3);
    EXPECT_EQ(entropy_of_condition(obs3, "1"), 0.0);  // dim 1
    EXPECT_NEAR(entropy_of_condition(obs3, "0.3333333333"), std::log(3.0), 1e-15);

    auto s = MeasurementSchedule::equally_spaced(0.0, 1.0, 3, mz_observable(2),
                                                 random_real_hermitian(4, 3));
    auto trace = entropy_trace(s, Trajectory{{"1", "0", "-1"}});
    ASSERT_EQ(trace.size(), 3u);
    EXPECT_EQ(trace[0], 0.0);
    EXPECT_NEAR(trace[1], std::log(2.0), 1e-15);
    EXPECT_EQ(trace[2], 0.0);
}

TEST(Entropy, UnknownLabelThrows) {
    EXPECT_THROW(entropy_of_condition(mz_observable(2), "7"), std::invalid_argument);
}

TEST(EntropyFlow, StepZeroIncrementIsExactlyZero) {
    auto result = entropy_flow_demo(3, 10, 2, 5);
    EXPECT_EQ(result.per_step[0].median, 0.0);
    EXPECT_EQ(result.per_step[0].lower_quartile, 0.0);
    EXPECT_EQ(result.per_step[0].upper_quartile, 0.0);
    for (const auto& increments : result.increments) EXPECT_EQ(increments[0], 0.0);
}

TEST(EntropyFlow, MedianFirstStepIncrementPositive) {
    auto result = entropy_flow_demo(6, 50, 3, 2024);
    ASSERT_GE(result.per_step.size(), 2u);
    EXPECT_GT(result.per_step[1].median, 0.0);
}

TEST(EntropyFlow, ReportsOneIncrementRowPerSeed) {
    // statistics only; single trajectories are allowed to decrease later on
    auto result = entropy_flow_demo(4, 20, 3, 77);
    EXPECT_EQ(result.increments.size(), 20u);
    for (const auto& increments : result.increments) EXPECT_EQ(increments.size(), 4u);
}

TEST(TwoSpinRetrodiction, EqualCoefficients) {
    const Complex c{0.5, 0.0};
    auto result = two_spin_retrodiction({c, c, c, c});
    EXPECT_NEAR(result.forward, 0.5, 1e-12);
    EXPECT_EQ(result.reversed, 1.0);
}

TEST(TwoSpinRetrodiction, SingleChannelIsCertain) {
    // c_du = 0 forces the difference measurement to 2
    auto result = two_spin_retrodiction(
        {Complex{0.3, 0.1}, Complex{0.7, 0.0}, Complex{0.0, 0.0}, Complex{0.2, -0.4}});
    EXPECT_EQ(result.forward, 1.0);
}

TEST(TwoSpinRetrodiction, MatchesClosedFormOnRandomCoefficients) {
    // oracle: |c_ud|^2 / (|c_ud|^2 + |c_du|^2)
    Rng rng(31337);
    for (int trial = 0; trial < 25; ++trial) {
        std::array<Complex, 4> c;
        for (auto& v : c) v = Complex{rng.normal(), rng.normal()};
        const double expected = std::norm(c[1]) / (std::norm(c[1]) + std::norm(c[2]));
        EXPECT_NEAR(two_spin_retrodiction(c).forward, expected, 1e-12);
    }
}

TEST(TwoSpinRetrodiction, PhaseInvariance) {
    const Complex base{0.5, 0.0};
    const double reference = two_spin_retrodiction({base, base, base, base}).forward;
    for (double theta : {0.3, 1.2, 2.9}) {
        const Complex phase = std::exp(Complex{0.0, theta});
        auto result = two_spin_retrodiction({base, base * phase, base * phase, base});
        EXPECT_NEAR(result.forward, reference, 1e-12);
    }
}

TEST(TwoSpinRetrodiction, ZeroConditioningProbabilityThrows) {
    EXPECT_THROW(
        two_spin_retrodiction({Complex{1.0, 0.0}, Complex{0, 0}, Complex{0, 0}, Complex{0, 0}}),
        EndpointsUnreachable);
}
