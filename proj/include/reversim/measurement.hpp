#pragma once

#include "reversim/observables.hpp"
#include "reversim/rng.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <exception>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace reversim {

inline constexpr std::uint64_t kDefaultEnumerationCap = 10'000'000;

/// A reversal-theorem hypothesis does not hold for the given schedule; the
/// message names the failed hypothesis.
struct PreconditionViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// The conditioning endpoints of an ABL query are not connected by any
/// intermediate outcome sequence.
struct EndpointsUnreachable : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EnumerationCapExceeded : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Measurement times t_0 < t_1 < ... with one observable per time, the
/// Hamiltonian generating the evolution between them, and the initial
/// density matrix at t_0. Step unitaries U(t_k - t_{k-1}) are computed once
/// at construction; the schedule is immutable afterwards and safe to share
/// across threads.
class MeasurementSchedule {
public:
    MeasurementSchedule(std::vector<double> times,
                        std::vector<ObservableDecomposition> observables,
                        HermitianOperator hamiltonian, DensityMatrix initial_state)
        : MeasurementSchedule(std::move(times), to_shared(std::move(observables)),
                              std::move(hamiltonian), std::move(initial_state)) {}

    MeasurementSchedule(std::vector<double> times,
                        std::vector<std::shared_ptr<const ObservableDecomposition>> observables,
                        HermitianOperator hamiltonian, DensityMatrix initial_state)
        : times_(std::move(times)),
          observables_(std::move(observables)),
          hamiltonian_(std::move(hamiltonian)),
          initial_state_(std::move(initial_state)) {
        if (times_.empty()) throw std::invalid_argument("MeasurementSchedule: no measurement times");
        if (observables_.size() != times_.size()) {
            throw std::invalid_argument("MeasurementSchedule: need one observable per time");
        }
        for (std::size_t k = 1; k < times_.size(); ++k) {
            if (!(times_[k] > times_[k - 1])) {
                throw std::invalid_argument("MeasurementSchedule: times must be strictly increasing");
            }
        }
        const int d = hamiltonian_.dim();
        if (initial_state_.dim() != d) {
            throw std::invalid_argument("MeasurementSchedule: initial state dimension mismatch");
        }
        for (const auto& obs : observables_) {
            if (!obs) throw std::invalid_argument("MeasurementSchedule: null observable");
            if (obs->dim() != d) {
                throw std::invalid_argument("MeasurementSchedule: observable dimension mismatch");
            }
        }
        step_unitaries_.reserve(times_.size() - 1);
        for (std::size_t k = 1; k < times_.size(); ++k) {
            step_unitaries_.push_back(evolve(hamiltonian_, times_[k] - times_[k - 1]).matrix());
        }
    }

    /// count measurements at t0, t0+dt, ..., all of the same observable;
    /// defaults to the maximally mixed initial state.
    static MeasurementSchedule equally_spaced(double t0, double dt, int count,
                                              const ObservableDecomposition& obs,
                                              const HermitianOperator& hamiltonian,
                                              std::optional<DensityMatrix> initial_state = {}) {
        if (count < 1) throw std::invalid_argument("MeasurementSchedule: need at least one time");
        std::vector<double> times(count);
        for (int k = 0; k < count; ++k) times[k] = t0 + k * dt;
        auto shared = std::make_shared<const ObservableDecomposition>(obs);
        std::vector<std::shared_ptr<const ObservableDecomposition>> observables(count, shared);
        DensityMatrix rho0 = initial_state ? std::move(*initial_state)
                                           : DensityMatrix::maximally_mixed(hamiltonian.dim());
        return MeasurementSchedule(std::move(times), std::move(observables), hamiltonian,
                                   std::move(rho0));
    }

    std::size_t step_count() const { return times_.size(); }
    int dim() const { return hamiltonian_.dim(); }
    const std::vector<double>& times() const { return times_; }
    const ObservableDecomposition& observable(std::size_t step) const { return *observables_.at(step); }
    const HermitianOperator& hamiltonian() const { return hamiltonian_; }
    const DensityMatrix& initial_state() const { return initial_state_; }

    /// U(t_k - t_{k-1}) carrying the state into measurement k, for k >= 1.
    const CMatrix& step_unitary(std::size_t k) const { return step_unitaries_.at(k - 1); }

private:
    static std::vector<std::shared_ptr<const ObservableDecomposition>> to_shared(
        std::vector<ObservableDecomposition> observables) {
        std::vector<std::shared_ptr<const ObservableDecomposition>> out;
        out.reserve(observables.size());
        for (auto& obs : observables) {
            out.push_back(std::make_shared<const ObservableDecomposition>(std::move(obs)));
        }
        return out;
    }

    std::vector<double> times_;
    std::vector<std::shared_ptr<const ObservableDecomposition>> observables_;
    HermitianOperator hamiltonian_;
    DensityMatrix initial_state_;
    std::vector<CMatrix> step_unitaries_;
};

/// Ordered sequence of condition labels, one per scheduled measurement.
struct Trajectory {
    std::vector<std::string> labels;

    auto operator<=>(const Trajectory&) const = default;
};

inline std::string to_string(const Trajectory& w) {
    std::string out;
    for (std::size_t i = 0; i < w.labels.size(); ++i) {
        if (i > 0) out += '>';
        out += w.labels[i];
    }
    return out;
}

using TrajectoryDistribution = std::map<Trajectory, double>;
using TrajectoryCounts = std::map<Trajectory, std::uint64_t>;

namespace detail {

inline double clamp_probability(double p) {
    if (p < 0.0) {
        if (p < -kAlgebraTol) {
            throw std::runtime_error("probability " + format_double(p, 6) + " outside [0,1]");
        }
        return 0.0;
    }
    if (p > 1.0) {
        if (p > 1.0 + kAlgebraTol) {
            throw std::runtime_error("probability " + format_double(p, 6) + " outside [0,1]");
        }
        return 1.0;
    }
    return p;
}

/// Tr[P_{w_m} K M K^dagger] for the projector/evolution chain K of the
/// schedule and an arbitrary initial matrix M (unnormalized if M is not a
/// density matrix). Negative round-off is clamped to zero.
inline double chain_trace(const MeasurementSchedule& s, const Trajectory& w, const CMatrix& initial) {
    const std::size_t m = s.step_count();
    if (w.labels.size() != m) {
        throw std::invalid_argument("trajectory has " + std::to_string(w.labels.size()) +
                                    " labels for " + std::to_string(m) + " measurement times");
    }
    const CMatrix& p0 = s.observable(0).condition(w.labels[0]).projector;
    CMatrix rho = p0 * initial * p0;
    for (std::size_t k = 1; k < m; ++k) {
        const CMatrix& u = s.step_unitary(k);
        rho = u * rho * u.adjoint();
        const CMatrix& p = s.observable(k).condition(w.labels[k]).projector;
        rho = p * rho * p;
    }
    const double value = rho.trace().real();
    return value < 0.0 ? 0.0 : value;
}

inline std::uint64_t trajectory_count_or_throw(const MeasurementSchedule& s, std::uint64_t cap) {
    double count = 1.0;
    for (std::size_t k = 0; k < s.step_count(); ++k) {
        count *= static_cast<double>(s.observable(k).size());
        if (count > static_cast<double>(cap)) {
            throw EnumerationCapExceeded("trajectory count exceeds the enumeration cap of " +
                                         std::to_string(cap));
        }
    }
    return static_cast<std::uint64_t>(count);
}

}  // namespace detail

/// Prob[w] = Tr[P_{w_m} K rho_0 K^dagger] with
/// K = U_m P_{w_{m-1}} U_{m-1} ... P_{w_0}; reduces to the standard
/// (1/d) Tr[U P ... P U^dagger ... P] form for rho_0 = 1/d. Results within
/// 1e-12 of [0,1] are clamped to the boundary.
inline double trajectory_probability(const MeasurementSchedule& s, const Trajectory& w) {
    return detail::clamp_probability(detail::chain_trace(s, w, s.initial_state().entries()));
}

/// Exact probability of every outcome sequence. Throws once the trajectory
/// count exceeds cap; the result sums to one within 1e-10.
inline TrajectoryDistribution enumerate_distribution(const MeasurementSchedule& s,
                                                     std::uint64_t cap = kDefaultEnumerationCap) {
    detail::trajectory_count_or_throw(s, cap);
    const std::size_t m = s.step_count();
    TrajectoryDistribution dist;
    std::vector<std::string> labels(m);
    auto recurse = [&](auto&& self, std::size_t step, const CMatrix& rho) -> void {
        for (const auto& cond : s.observable(step).conditions()) {
            labels[step] = cond.label;
            CMatrix next = cond.projector * rho * cond.projector;
            if (step + 1 == m) {
                dist.emplace(Trajectory{labels}, detail::clamp_probability(next.trace().real()));
            } else {
                const CMatrix& u = s.step_unitary(step + 1);
                next = u * next * u.adjoint();
                self(self, step + 1, next);
            }
        }
    };
    recurse(recurse, 0, s.initial_state().entries());

    double total = 0.0;
    for (const auto& [w, p] : dist) total += p;
    if (std::abs(total - 1.0) > 1e-10) {
        throw std::runtime_error("enumerated distribution sums to " + format_double(total, 17));
    }
    return dist;
}

namespace detail {

using LabelMap = std::map<std::string, std::string>;

inline Trajectory reverse_trajectory_raw(const Trajectory& w, std::span<const LabelMap> maps) {
    const std::size_t m = w.labels.size();
    if (maps.size() != m) {
        throw std::invalid_argument("reverse_trajectory: need one reversal map per step");
    }
    Trajectory out;
    out.labels.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        const auto& map = maps[m - 1 - i];
        auto it = map.find(w.labels[m - 1 - i]);
        if (it == map.end()) {
            throw std::invalid_argument("reverse_trajectory: label '" + w.labels[m - 1 - i] +
                                        "' missing from its step's reversal map");
        }
        out.labels[i] = it->second;
    }
    return out;
}

}  // namespace detail

/// Theta w = (w_m', ..., w_0'): order reversed, each label replaced by its
/// counterpart under the map of the step it was measured at.
inline Trajectory reverse_trajectory(const Trajectory& w, std::span<const ConditionReversalMap> maps) {
    std::vector<detail::LabelMap> raw;
    raw.reserve(maps.size());
    for (const auto& map : maps) raw.push_back(map.pairs());
    return detail::reverse_trajectory_raw(w, raw);
}

/// Checks the hypotheses of the reversal theorem for (s, pi) and returns the
/// per-step label maps needed to build Theta w: rho_0 = 1/d, pi H pi = H,
/// mirror-symmetric time spacing, and every step-k observable carried onto
/// the step-(m-1-k) observable by pi. Throws PreconditionViolation naming
/// the first failed hypothesis.
inline std::vector<detail::LabelMap> check_reversal_hypotheses(const MeasurementSchedule& s,
                                                               const AntiunitaryInvolution& pi,
                                                               double tol = kConstructionTol) {
    const int d = s.dim();
    if (pi.dim() != d) throw std::invalid_argument("check_reversal_hypotheses: dimension mismatch");

    const double rho_dev =
        max_abs(CMatrix(s.initial_state().entries() - CMatrix::Identity(d, d) / static_cast<double>(d)));
    if (rho_dev > tol) {
        throw PreconditionViolation(
            "reversal hypotheses: initial state is not the maximally mixed density matrix "
            "(deviation " + format_double(rho_dev, 6) + ")");
    }
    const double h_dev =
        max_abs(CMatrix(conjugate_operator(pi, s.hamiltonian().matrix()) - s.hamiltonian().matrix()));
    if (h_dev > tol) {
        throw PreconditionViolation("reversal hypotheses: pi H pi != H (deviation " +
                                    format_double(h_dev, 6) + ")");
    }
    const auto& times = s.times();
    const std::size_t m = times.size();
    for (std::size_t k = 1; k < m; ++k) {
        const double gap = times[k] - times[k - 1];
        const double mirror = times[m - k] - times[m - k - 1];
        if (std::abs(gap - mirror) > kAlgebraTol) {
            throw PreconditionViolation("reversal hypotheses: time spacing is not symmetric under reversal");
        }
    }

    std::vector<detail::LabelMap> maps(m);
    for (std::size_t k = 0; k < m; ++k) {
        const auto& from = s.observable(k);
        const auto& to = s.observable(m - 1 - k);
        for (const auto& cond : from.conditions()) {
            const CMatrix conjugated = conjugate_operator(pi, cond.projector);
            const Condition* best = nullptr;
            double best_dev = std::numeric_limits<double>::infinity();
            for (const auto& candidate : to.conditions()) {
                const double dev = max_abs(CMatrix(conjugated - candidate.projector));
                if (dev < best_dev) {
                    best_dev = dev;
                    best = &candidate;
                }
            }
            if (best == nullptr || best_dev > tol) {
                throw PreconditionViolation(
                    "reversal hypotheses: observables are not closed under pi at step " +
                    std::to_string(k) + " (condition '" + cond.label +
                    "', closest projector deviates by " + format_double(best_dev, 6) + ")");
            }
            maps[k][cond.label] = best->label;
        }
    }
    for (std::size_t k = 0; k < m; ++k) {
        for (const auto& [from_label, to_label] : maps[k]) {
            const auto& back = maps[m - 1 - k];
            auto it = back.find(to_label);
            if (it == back.end() || it->second != from_label) {
                throw PreconditionViolation(
                    "reversal hypotheses: pi pairing between mirrored steps is not involutive");
            }
        }
    }
    return maps;
}

struct ReversalReportEntry {
    Trajectory trajectory;
    double probability;
    double reversed_probability;
    double deviation;
};

struct TimeReversalReport {
    double max_deviation = 0.0;
    std::vector<ReversalReportEntry> entries;
};

/// max over all w of |Prob[w] - Prob[Theta w]|, with Prob[Theta w] computed
/// by the same engine on the reversed trajectory. The theorem's hypotheses
/// are enforced up front, not silently assumed.
inline TimeReversalReport verify_time_reversal(const MeasurementSchedule& s,
                                               const AntiunitaryInvolution& pi,
                                               double hypothesis_tol = kConstructionTol,
                                               std::uint64_t cap = kDefaultEnumerationCap) {
    const auto maps = check_reversal_hypotheses(s, pi, hypothesis_tol);
    const auto dist = enumerate_distribution(s, cap);
    TimeReversalReport report;
    report.entries.reserve(dist.size());
    for (const auto& [w, p] : dist) {
        const Trajectory reversed = detail::reverse_trajectory_raw(w, maps);
        const double q = trajectory_probability(s, reversed);
        const double deviation = std::abs(p - q);
        report.entries.push_back(ReversalReportEntry{w, p, q, deviation});
        report.max_deviation = std::max(report.max_deviation, deviation);
    }
    return report;
}

struct DetailedBalanceResult {
    bool defined;       // false when Prob[Theta w | first'] = 0
    double ratio;       // Prob[w|w_0] / Prob[Theta w|w_m']
    double predicted;   // d_{w_m} / d_{w_0} = exp(S(w_m) - S(w_0))
    Trajectory reversed;
};

namespace detail {

inline DetailedBalanceResult detailed_balance_with_maps(const MeasurementSchedule& s,
                                                        const Trajectory& w,
                                                        std::span<const LabelMap> maps) {
    const std::size_t m = s.step_count();
    Trajectory reversed = reverse_trajectory_raw(w, maps);
    const double p_fwd = trajectory_probability(s, w);
    const double p_rev = trajectory_probability(s, reversed);
    const int d_first = s.observable(0).condition(w.labels.front()).dim;
    const int d_last = s.observable(m - 1).condition(w.labels.back()).dim;
    const int d_rev_first = s.observable(0).condition(reversed.labels.front()).dim;
    const double predicted = static_cast<double>(d_last) / d_first;
    if (!(p_rev > 0.0)) {
        return DetailedBalanceResult{false, 0.0, predicted, std::move(reversed)};
    }
    const double ratio = (p_fwd * d_rev_first) / (p_rev * d_first);
    return DetailedBalanceResult{true, ratio, predicted, std::move(reversed)};
}

}  // namespace detail

/// Conditioned detailed-balance ratio Prob[w|w_0] / Prob[Theta w|w_m'] with
/// Prob[alpha] = d_alpha/d under rho_0 = 1/d, against the predicted
/// dimension ratio d_{w_m}/d_{w_0}. Zero denominators are flagged as
/// undefined rather than thrown.
inline DetailedBalanceResult detailed_balance_ratio(const MeasurementSchedule& s, const Trajectory& w,
                                                    const AntiunitaryInvolution& pi,
                                                    double hypothesis_tol = kConstructionTol) {
    const auto maps = check_reversal_hypotheses(s, pi, hypothesis_tol);
    return detail::detailed_balance_with_maps(s, w, maps);
}

struct DetailedBalanceReportEntry {
    Trajectory trajectory;
    bool defined;
    double ratio;
    double predicted;
};

struct DetailedBalanceReport {
    double max_error = 0.0;  // max |ratio - predicted| over defined trajectories
    std::size_t defined_count = 0;
    std::vector<DetailedBalanceReportEntry> entries;
};

inline DetailedBalanceReport detailed_balance_report(const MeasurementSchedule& s,
                                                     const AntiunitaryInvolution& pi,
                                                     double hypothesis_tol = kConstructionTol,
                                                     std::uint64_t cap = kDefaultEnumerationCap) {
    const auto maps = check_reversal_hypotheses(s, pi, hypothesis_tol);
    const auto dist = enumerate_distribution(s, cap);
    DetailedBalanceReport report;
    report.entries.reserve(dist.size());
    for (const auto& [w, p] : dist) {
        auto result = detail::detailed_balance_with_maps(s, w, maps);
        if (result.defined) {
            report.defined_count += 1;
            report.max_error = std::max(report.max_error, std::abs(result.ratio - result.predicted));
        }
        report.entries.push_back(
            DetailedBalanceReportEntry{w, result.defined, result.ratio, result.predicted});
    }
    return report;
}

/// Conditional distribution of the intermediate outcomes given the first and
/// last ones, computed from unnormalized chain traces (the initial-state
/// normalization cancels). Keys are the intermediate label sequences.
inline std::map<Trajectory, double> abl_distribution(const MeasurementSchedule& s,
                                                     const std::string& first,
                                                     const std::string& last,
                                                     std::uint64_t cap = kDefaultEnumerationCap) {
    const std::size_t m = s.step_count();
    if (m < 2) throw std::invalid_argument("abl: need at least two measurement times");
    s.observable(0).condition(first);
    s.observable(m - 1).condition(last);

    double count = 1.0;
    for (std::size_t k = 1; k + 1 < m; ++k) {
        count *= static_cast<double>(s.observable(k).size());
        if (count > static_cast<double>(cap)) {
            throw EnumerationCapExceeded("intermediate sequence count exceeds the enumeration cap");
        }
    }

    const int d = s.dim();
    const CMatrix identity = CMatrix::Identity(d, d);
    std::map<Trajectory, double> traces;
    std::vector<std::string> mids(m >= 2 ? m - 2 : 0);
    double total = 0.0;

    const CMatrix& p_first = s.observable(0).condition(first).projector;
    const CMatrix& p_last = s.observable(m - 1).condition(last).projector;

    auto record = [&](const CMatrix& rho) {
        const CMatrix final_state = p_last * rho * p_last;
        const double value = std::max(0.0, final_state.trace().real());
        traces.emplace(Trajectory{mids}, value);
        total += value;
    };
    auto recurse = [&](auto&& self, std::size_t step, const CMatrix& rho) -> void {
        const CMatrix& u = s.step_unitary(step);
        CMatrix evolved = u * rho * u.adjoint();
        if (step + 1 == m) {
            record(evolved);
            return;
        }
        for (const auto& cond : s.observable(step).conditions()) {
            mids[step - 1] = cond.label;
            CMatrix next = cond.projector * evolved * cond.projector;
            self(self, step + 1, next);
        }
    };
    recurse(recurse, 1, CMatrix(p_first * identity * p_first));

    if (!(total > 0.0)) {
        throw EndpointsUnreachable("no intermediate sequence connects '" + first + "' to '" + last +
                                   "'");
    }
    for (auto& [mid, value] : traces) value = detail::clamp_probability(value / total);
    return traces;
}

/// Prob[intermediates | first, last] as the ratio of unnormalized chain
/// traces; throws EndpointsUnreachable when the denominator vanishes.
inline double abl_conditional(const MeasurementSchedule& s, const std::string& first,
                              const std::string& last, std::span<const std::string> intermediate) {
    const std::size_t m = s.step_count();
    if (m < 2) throw std::invalid_argument("abl: need at least two measurement times");
    if (intermediate.size() != m - 2) {
        throw std::invalid_argument("abl: expected " + std::to_string(m - 2) +
                                    " intermediate labels, got " + std::to_string(intermediate.size()));
    }
    for (std::size_t k = 0; k < intermediate.size(); ++k) {
        s.observable(k + 1).condition(intermediate[k]);  // label validation
    }
    const auto dist = abl_distribution(s, first, last);
    Trajectory key;
    key.labels.assign(intermediate.begin(), intermediate.end());
    return dist.at(key);
}

/// Collapse sampling: at each step the outcome alpha is drawn with
/// probability Tr[P_alpha rho], the state is projected and renormalized,
/// then evolved to the next time.
inline Trajectory sample_trajectory(const MeasurementSchedule& s, Rng& rng) {
    const std::size_t m = s.step_count();
    CMatrix rho = s.initial_state().entries();
    Trajectory w;
    w.labels.reserve(m);
    std::vector<double> weights;
    for (std::size_t k = 0; k < m; ++k) {
        if (k > 0) {
            const CMatrix& u = s.step_unitary(k);
            rho = u * rho * u.adjoint();
        }
        const auto& conditions = s.observable(k).conditions();
        weights.clear();
        weights.reserve(conditions.size());
        for (const auto& cond : conditions) {
            weights.push_back(std::max(0.0, trace_product(cond.projector, rho).real()));
        }
        const std::size_t pick = rng.categorical(weights);  // throws if all weights vanish
        const auto& cond = conditions[pick];
        rho = (cond.projector * rho * cond.projector) / weights[pick];
        w.labels.push_back(cond.label);
    }
    return w;
}

/// n_samples collapse samples aggregated into per-trajectory counts. With
/// several workers each worker w draws its share from the independent stream
/// Rng::stream(seed, w); the merge is a commutative sum, so the result is a
/// pure function of (schedule, n_samples, seed, workers).
inline TrajectoryCounts sample_counts(const MeasurementSchedule& s, std::uint64_t n_samples,
                                      std::uint64_t seed, unsigned workers = 1) {
    workers = std::max(1u, workers);
    auto run_worker = [&s](std::uint64_t count, Rng rng, TrajectoryCounts& out) {
        for (std::uint64_t i = 0; i < count; ++i) {
            out[sample_trajectory(s, rng)] += 1;
        }
    };
    if (workers == 1) {
        TrajectoryCounts counts;
        run_worker(n_samples, Rng::stream(seed, 0), counts);
        return counts;
    }
    std::vector<TrajectoryCounts> parts(workers);
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        const std::uint64_t share = n_samples / workers + (w < n_samples % workers ? 1 : 0);
        pool.emplace_back([&, w, share] {
            try {
                run_worker(share, Rng::stream(seed, w), parts[w]);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (const auto& err : errors) {
        if (err) std::rethrow_exception(err);
    }
    TrajectoryCounts counts;
    for (const auto& part : parts) {
        for (const auto& [w, c] : part) counts[w] += c;
    }
    return counts;
}

inline double total_variation_distance(const TrajectoryDistribution& exact,
                                       const TrajectoryCounts& counts, std::uint64_t n_samples) {
    if (n_samples == 0) throw std::invalid_argument("total_variation_distance: no samples");
    double sum = 0.0;
    for (const auto& [w, p] : exact) {
        auto it = counts.find(w);
        const double freq = it == counts.end() ? 0.0 : static_cast<double>(it->second) / n_samples;
        sum += std::abs(p - freq);
    }
    for (const auto& [w, c] : counts) {
        if (exact.find(w) == exact.end()) sum += static_cast<double>(c) / n_samples;
    }
    return 0.5 * sum;
}

/// S(alpha) = log d_alpha, the Boltzmann entropy of a condition.
inline double entropy_of_condition(const ObservableDecomposition& obs, const std::string& label) {
    return std::log(static_cast<double>(obs.condition(label).dim));
}

inline std::vector<double> entropy_trace(const MeasurementSchedule& s, const Trajectory& w) {
    if (w.labels.size() != s.step_count()) {
        throw std::invalid_argument("entropy_trace: trajectory length mismatch");
    }
    std::vector<double> out(w.labels.size());
    for (std::size_t k = 0; k < w.labels.size(); ++k) {
        out[k] = entropy_of_condition(s.observable(k), w.labels[k]);
    }
    return out;
}

struct QuartileSummary {
    double lower_quartile;
    double median;
    double upper_quartile;
};

/// Linear-interpolation quantile of a sorted sample.
inline double quantile_sorted(std::span<const double> sorted, double q) {
    if (sorted.empty()) throw std::invalid_argument("quantile of an empty sample");
    if (sorted.size() == 1) return sorted[0];
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= sorted.size()) return sorted[sorted.size() - 1];
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac;
}

struct EntropyFlowResult {
    std::vector<QuartileSummary> per_step;      // steps 0..n_steps
    std::vector<std::vector<double>> increments;  // [seed][step]
};

/// Statistical entropy-increase demonstration: per seed, a real symmetric
/// Hamiltonian is drawn, the system starts in the one-dimensional extreme
/// magnetization condition (all spins up), the magnetization is measured at
/// integer times, and a single trajectory is sampled. Reported are quartiles
/// over seeds of S(alpha_k) - S(alpha_0) per step. Typicality, not
/// monotonicity: single trajectories may decrease.
inline EntropyFlowResult entropy_flow_demo(int n_spins, int n_seeds, int n_steps,
                                           std::uint64_t master_seed = 0) {
    if (n_spins < 1 || n_spins > kMaxSpins) {
        throw std::invalid_argument("entropy_flow_demo: spin count out of range");
    }
    if (n_seeds < 1) throw std::invalid_argument("entropy_flow_demo: need at least one seed");
    if (n_steps < 0) throw std::invalid_argument("entropy_flow_demo: negative step count");

    const int d = 1 << n_spins;
    auto observable =
        std::make_shared<const ObservableDecomposition>(decompose_observable(build_magnetization(n_spins)));
    const DensityMatrix rho0 = DensityMatrix::pure(StateVector::basis_state(d, 0));  // all up
    std::vector<double> times(n_steps + 1);
    for (int k = 0; k <= n_steps; ++k) times[k] = k;

    EntropyFlowResult result;
    result.increments.resize(n_seeds);
    for (int seed = 0; seed < n_seeds; ++seed) {
        Rng rng = Rng::stream(master_seed, static_cast<std::uint64_t>(seed));
        HermitianOperator h(random_real_symmetric(d, rng).cast<Complex>());
        std::vector<std::shared_ptr<const ObservableDecomposition>> observables(times.size(),
                                                                                observable);
        MeasurementSchedule schedule(times, observables, h, rho0);
        const Trajectory w = sample_trajectory(schedule, rng);
        const std::vector<double> entropies = entropy_trace(schedule, w);
        auto& increments = result.increments[seed];
        increments.resize(entropies.size());
        for (std::size_t k = 0; k < entropies.size(); ++k) {
            increments[k] = entropies[k] - entropies[0];
        }
    }

    result.per_step.resize(n_steps + 1);
    std::vector<double> column(n_seeds);
    for (int k = 0; k <= n_steps; ++k) {
        for (int seed = 0; seed < n_seeds; ++seed) column[seed] = result.increments[seed][k];
        std::sort(column.begin(), column.end());
        result.per_step[k] = QuartileSummary{quantile_sorted(column, 0.25),
                                             quantile_sorted(column, 0.5),
                                             quantile_sorted(column, 0.75)};
    }
    return result;
}

struct RetrodictionResult {
    double forward;   // Prob[diff = 2 at t2 | sum = 0 at t1] from psi_0
    double reversed;  // Prob[sum = 0] starting from |up down> under the reversed trivial dynamics
};

/// Two distinguishable spins with trivial dynamics, prepared in
/// psi_0 = c_uu|uu> + c_ud|ud> + c_du|du> + c_dd|dd>. Forward: measure
/// sigma^z_1 + sigma^z_2 = 0 at t1, then the probability that
/// sigma^z_1 - sigma^z_2 = 2 at t2. Reversed: starting from |up down>, the
/// probability that the magnetization vanishes, which equals one.
inline RetrodictionResult two_spin_retrodiction(const std::array<Complex, 4>& coefficients) {
    CVector amplitudes(4);
    for (int i = 0; i < 4; ++i) amplitudes(i) = coefficients[i];
    const StateVector psi0(amplitudes);  // normalizes, rejects zero

    const HermitianOperator h = HermitianOperator::zero(4);
    const HermitianOperator sz1 = build_site_operator(2, 1, Pauli::Z);
    const HermitianOperator sz2 = build_site_operator(2, 2, Pauli::Z);
    const ObservableDecomposition sum_obs = decompose_observable(sz1 + sz2);
    const ObservableDecomposition diff_obs = decompose_observable(sz1 - sz2);

    MeasurementSchedule forward_schedule({0.0, 1.0}, {sum_obs, diff_obs}, h,
                                         DensityMatrix::pure(psi0));
    const double joint = trajectory_probability(forward_schedule, Trajectory{{"0", "2"}});
    double conditioning = 0.0;
    for (const auto& cond : diff_obs.conditions()) {
        conditioning += trajectory_probability(forward_schedule, Trajectory{{"0", cond.label}});
    }
    if (!(conditioning > 0.0)) {
        throw EndpointsUnreachable("conditioning event (sigma^z_1 + sigma^z_2 = 0) has probability zero");
    }

    MeasurementSchedule reversed_schedule({0.0}, {sum_obs}, h,
                                          DensityMatrix::pure(StateVector::basis_state(4, 1)));
    const double reversed = trajectory_probability(reversed_schedule, Trajectory{{"0"}});

    return RetrodictionResult{detail::clamp_probability(joint / conditioning), reversed};
}

}  // namespace reversim
