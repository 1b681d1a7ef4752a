// Acceptance suite: one test per claim, each printing a pass/fail line.
// Every tolerance is pinned in code; the bundled scenarios double as the
// end-to-end harness through the CLI binary.

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <numbers>

#include "reversim/scenario.hpp"
#include "test_helpers.hpp"

using namespace reversim;
using namespace reversim::testing;

namespace {

class Criterion {
public:
    Criterion(int number, std::string description)
        : number_(number), description_(std::move(description)) {
        start_ = std::chrono::steady_clock::now();
    }

    ~Criterion() {
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        const bool ok = !::testing::Test::HasFailure();
        std::printf("criterion %d [%s]: %s (%.2f s)\n", number_, description_.c_str(),
                    ok ? "PASS" : "FAIL", seconds);
    }

    double elapsed_seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    int number_;
    std::string description_;
    std::chrono::steady_clock::time_point start_;
};

ObservableDecomposition mz_observable(int n_spins) {
    return decompose_observable(build_magnetization(n_spins));
}

MeasurementSchedule magnetization_schedule(int n_spins, int steps, std::uint64_t seed) {
    return MeasurementSchedule::equally_spaced(0.0, 1.0, steps, mz_observable(n_spins),
                                               random_real_hermitian(1 << n_spins, seed));
}

int run_cli(const std::string& args) {
    const std::string command =
        std::string(REVERSIM_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(command.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Acceptance, SpinBernoulliSequencesUniformAndReversible) {
    Criterion criterion(1, "spin Bernoulli: n-step sequences at 2^-n, reversal exact");
    const int steps = 10;
    const double quarter = 0.5 * std::numbers::pi;
    auto schedule = MeasurementSchedule::equally_spaced(
        quarter, quarter, steps, decompose_observable(HermitianOperator(sigma_z())),
        rabi_hamiltonian(1.0));
    auto report = verify_time_reversal(schedule, AntiunitaryInvolution::conjugation(2));
    ASSERT_EQ(report.entries.size(), 1u << steps);
    const double expected = std::ldexp(1.0, -steps);
    for (const auto& entry : report.entries) {
        ASSERT_NEAR(entry.probability, expected, 1e-12) << to_string(entry.trajectory);
    }
    EXPECT_LE(report.max_deviation, 1e-12);
    EXPECT_LT(criterion.elapsed_seconds(), 1.0);
}

TEST(Acceptance, QuantumReversalTheoremThreeSpins) {
    Criterion criterion(2, "reversal theorem: N=3 magnetization, 4 times, seeded real H");
    auto schedule = magnetization_schedule(3, 4, 20240);
    auto report = verify_time_reversal(schedule, AntiunitaryInvolution::conjugation(8));
    ASSERT_EQ(report.entries.size(), 256u);  // 4^4 trajectories
    EXPECT_LE(report.max_deviation, 1e-10);
    EXPECT_LT(criterion.elapsed_seconds(), 5.0);
}

TEST(Acceptance, DimensionDetailedBalance) {
    Criterion criterion(3, "detailed balance: conditioned ratios equal dimension ratios");
    const AntiunitaryInvolution pi8 = AntiunitaryInvolution::conjugation(8);
    auto schedule = magnetization_schedule(3, 4, 20240);
    auto report = detailed_balance_report(schedule, pi8);
    EXPECT_GT(report.defined_count, 0u);
    EXPECT_LE(report.max_error, 1e-8);

    // two spins, extreme (dim 1) to middle (dim 2): ratio exactly 2
    auto two_spins = magnetization_schedule(2, 2, 99);
    auto ratio = detailed_balance_ratio(two_spins, Trajectory{{"1", "0"}},
                                        AntiunitaryInvolution::conjugation(4));
    ASSERT_TRUE(ratio.defined);
    EXPECT_DOUBLE_EQ(ratio.predicted, 2.0);
    EXPECT_NEAR(ratio.ratio, 2.0, 1e-10);
}

TEST(Acceptance, AblTwoTimeConditioning) {
    Criterion criterion(4, "ABL: trivial dynamics certain, conditionals normalized and symmetric");
    auto sz = decompose_observable(HermitianOperator(sigma_z()));
    auto trivial = MeasurementSchedule::equally_spaced(0.0, 1.0, 3, sz, HermitianOperator::zero(2));
    const std::vector<std::string> up{"1"};
    EXPECT_EQ(abl_conditional(trivial, "1", "1", up), 1.0);

    for (std::uint64_t seed : {55u, 56u, 57u}) {
        auto schedule = magnetization_schedule(2, 4, seed);
        auto obs = mz_observable(2);
        for (const auto& first : obs.conditions()) {
            for (const auto& last : obs.conditions()) {
                std::map<Trajectory, double> forward;
                try {
                    forward = abl_distribution(schedule, first.label, last.label);
                } catch (const EndpointsUnreachable&) {
                    continue;
                }
                double total = 0.0;
                for (const auto& [mids, p] : forward) total += p;
                EXPECT_NEAR(total, 1.0, 1e-10);

                auto backward = abl_distribution(schedule, last.label, first.label);
                for (const auto& [mids, p] : forward) {
                    Trajectory reversed;
                    reversed.labels.assign(mids.labels.rbegin(), mids.labels.rend());
                    EXPECT_NEAR(p, backward.at(reversed), 1e-10);
                }
            }
        }
    }
}

TEST(Acceptance, TwoSpinRetrodiction) {
    Criterion criterion(5, "retrodiction: forward 1/2 vs certain reversal, dimension ratio");
    const Complex c{0.5, 0.0};
    auto result = two_spin_retrodiction({c, c, c, c});
    EXPECT_NEAR(result.forward, 0.5, 1e-12);
    EXPECT_EQ(result.reversed, 1.0);
    const double ratio = result.forward / result.reversed;
    // d(diff = 2) / d(sum = 0) from the decompositions themselves
    const HermitianOperator sz1 = build_site_operator(2, 1, Pauli::Z);
    const HermitianOperator sz2 = build_site_operator(2, 2, Pauli::Z);
    const int d_fwd = decompose_observable(sz1 - sz2).condition("2").dim;
    const int d_bwd = decompose_observable(sz1 + sz2).condition("0").dim;
    EXPECT_NEAR(ratio, static_cast<double>(d_fwd) / d_bwd, 1e-12);
}

TEST(Acceptance, SamplerMatchesExhaustiveEnumeration) {
    Criterion criterion(6, "collapse sampler: 1e5 samples within 0.02 total variation");
    auto schedule = magnetization_schedule(3, 3, 808);  // d = 8, 3 steps
    const std::uint64_t n = 100000;
    auto exact = enumerate_distribution(schedule);
    auto counts = sample_counts(schedule, n, 2024);
    EXPECT_LE(total_variation_distance(exact, counts, n), 0.02);
    EXPECT_LT(criterion.elapsed_seconds(), 30.0);
}

TEST(Acceptance, MarkovReversalAndGibbsChains) {
    Criterion criterion(7, "Markov: Bayes reversal, detailed balance, Gibbs construction");
    Eigen::MatrixXd p(2, 2);
    p << 0.9, 0.1, 0.2, 0.8;
    MarkovChain chain = with_stationary(MarkovChain({"a", "b"}, p));
    const Eigen::VectorXd& rho = *chain.stationary();
    EXPECT_NEAR(rho(0), 2.0 / 3.0, 1e-12);
    EXPECT_NEAR(rho(1), 1.0 / 3.0, 1e-12);
    EXPECT_TRUE(is_detailed_balance(chain, 1e-12).holds);
    MarkovChain reversed = reverse_chain(chain);
    EXPECT_LE((reversed.transition() - chain.transition()).cwiseAbs().maxCoeff(), 1e-12);

    Eigen::MatrixXd cycle = Eigen::MatrixXd::Zero(3, 3);
    cycle(0, 1) = cycle(1, 2) = cycle(2, 0) = 1.0;
    auto cert = is_detailed_balance(with_stationary(MarkovChain({"0", "1", "2"}, cycle)), 1e-12);
    EXPECT_FALSE(cert.holds);
    EXPECT_GE(cert.witness_from, 0);

    Rng rng(2025);
    for (int trial = 0; trial < 5; ++trial) {
        const int n = 2 + static_cast<int>(rng.uniform() * 5);
        Eigen::MatrixXd phi(n, n);
        Eigen::VectorXd v(n);
        for (int i = 0; i < n; ++i) {
            v(i) = rng.uniform();
            for (int j = 0; j <= i; ++j) phi(i, j) = phi(j, i) = rng.uniform() / (4.0 * n);
        }
        EXPECT_TRUE(is_detailed_balance(gibbs_chain(PotentialForm(phi, v)), 1e-12).holds);
    }
}

TEST(Acceptance, DiscreteMechanicalReversibility) {
    Criterion criterion(8, "discrete mechanics: free motion exactly reversible, counting balance");
    auto sys = free_motion_system(8);
    for (int t = 1; t <= 16; ++t) {
        EXPECT_TRUE(check_mechanical_reversibility(sys, t).holds) << "t = " << t;
    }
    Rng rng(2027);
    auto random_macrostate = [&] {
        std::vector<int> members;
        do {
            members.clear();
            for (int x = 0; x < sys.size(); ++x) {
                if (rng.uniform() < 0.5) members.push_back(x);
            }
        } while (members.empty());
        return Macrostate(sys.size(), members);
    };
    int checked = 0;
    while (checked < 20) {
        Macrostate a = random_macrostate();
        Macrostate b = random_macrostate();
        const int t = 1 + static_cast<int>(rng.uniform() * 16);
        auto report = check_detailed_balance_identity(sys, a, b, t);
        if (!report.defined) continue;
        EXPECT_TRUE(report.equal) << "lhs " << to_string(report.lhs) << " vs rhs "
                                  << to_string(report.rhs);
        ++checked;
    }
}

TEST(Acceptance, TypicalEntropyIncrease) {
    Criterion criterion(9, "thermodynamic irreversibility: median entropy increment positive");
    auto result = entropy_flow_demo(6, 50, 3, 2024);
    ASSERT_GE(result.per_step.size(), 2u);
    EXPECT_EQ(result.per_step[0].median, 0.0);
    EXPECT_GT(result.per_step[1].median, 0.0);
}

TEST(Acceptance, BundledScenariosExitCleanly) {
    Criterion criterion(10, "every bundled scenario exits 0 through the CLI");
    namespace fs = std::filesystem;
    for (const auto& entry : scenario_catalog()) {
        const fs::path path = fs::path(REVERSIM_SCENARIO_DIR) / std::string(entry.file);
        EXPECT_EQ(run_cli("run " + path.string()), 0) << entry.name;
    }
}
