#pragma once

#include "reversim/dynsys.hpp"
#include "reversim/markov.hpp"
#include "reversim/measurement.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace reversim {

using Json = nlohmann::json;

/// A scenario file failed to parse or validate (CLI exit code 2).
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunOptions {
    std::optional<std::uint64_t> seed;     // overrides the scenario's "seed"
    std::optional<std::uint64_t> samples;  // overrides the scenario's "samples"
    std::optional<double> tol;             // fallback for checks without an explicit tolerance
    std::string out_dir;                   // empty: no report files
    enum class Format { Csv, Json, Both } format = Format::Csv;
    std::uint64_t enumeration_cap = kDefaultEnumerationCap;
    unsigned workers = 1;
};

struct ReportTable {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
};

struct CheckResult {
    std::string description;
    bool passed;
    std::string witness;  // filled for failures
};

struct ScenarioOutcome {
    std::string name;
    std::string kind;
    bool passed = true;
    std::vector<CheckResult> checks;
    Json summary = Json::object();
    std::vector<ReportTable> tables;
};

struct CatalogEntry {
    std::string_view name;
    std::string_view kind;
    std::string_view topic;
    std::string_view file;
};

/// Bundled reproductions shipped under scenarios/.
inline std::span<const CatalogEntry> scenario_catalog() {
    static constexpr CatalogEntry entries[] = {
        {"spin-bernoulli", "reversal",
         "statistical reversibility: repeated spin measurement is a reversible Bernoulli process",
         "spin-bernoulli.json"},
        {"mz-reversal-n3", "reversal",
         "statistical reversibility: multi-time magnetization statistics equal their time reversal",
         "mz-reversal-n3.json"},
        {"abl-trivial", "abl",
         "retrodiction: conditioning on initial and final outcomes fixes the intermediate spin",
         "abl-trivial.json"},
        {"two-spin-retro", "retrodict",
         "retrodiction: forward/backward probability ratio equals the eigenspace dimension ratio",
         "two-spin-retro.json"},
        {"markov-2state", "markov",
         "detailed balance: Bayes reversal of a two-state chain reproduces the forward law",
         "markov-2state.json"},
        {"freemotion-db", "dynsys",
         "mechanical reversibility: discrete free motion obeys the exact counting form of detailed balance",
         "freemotion-db.json"},
        {"entropy-flow-n6", "entropy-flow",
         "thermodynamic irreversibility: Boltzmann entropy typically increases from a minimal-entropy start",
         "entropy-flow-n6.json"},
    };
    return entries;
}

namespace detail {

inline const Json& require_field(const Json& j, const char* key, const std::string& ctx) {
    auto it = j.find(key);
    if (it == j.end()) {
        throw ValidationError("scenario: missing field '" + ctx + key + "'");
    }
    return *it;
}

inline double require_number(const Json& j, const char* key, const std::string& ctx) {
    const Json& v = require_field(j, key, ctx);
    if (!v.is_number()) throw ValidationError("scenario: field '" + ctx + key + "' must be a number");
    return v.get<double>();
}

inline std::int64_t require_integer(const Json& j, const char* key, const std::string& ctx) {
    const Json& v = require_field(j, key, ctx);
    if (!v.is_number_integer()) {
        throw ValidationError("scenario: field '" + ctx + key + "' must be an integer");
    }
    return v.get<std::int64_t>();
}

inline std::string require_string(const Json& j, const char* key, const std::string& ctx) {
    const Json& v = require_field(j, key, ctx);
    if (!v.is_string()) throw ValidationError("scenario: field '" + ctx + key + "' must be a string");
    return v.get<std::string>();
}

inline Complex parse_complex(const Json& j, const std::string& ctx) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
        throw ValidationError("scenario: '" + ctx + "' must be a [re, im] pair");
    }
    return Complex{j[0].get<double>(), j[1].get<double>()};
}

/// Matrices serialize as nested arrays of [re, im] pairs.
inline CMatrix parse_complex_matrix(const Json& j, const std::string& ctx) {
    if (!j.is_array() || j.empty()) {
        throw ValidationError("scenario: '" + ctx + "' must be a non-empty array of rows");
    }
    const std::size_t rows = j.size();
    const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
    if (cols == 0) throw ValidationError("scenario: '" + ctx + "' rows must be non-empty arrays");
    CMatrix m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        if (!j[r].is_array() || j[r].size() != cols) {
            throw ValidationError("scenario: '" + ctx + "' rows have inconsistent lengths");
        }
        for (std::size_t c = 0; c < cols; ++c) {
            m(r, c) = parse_complex(j[r][c], ctx + "[" + std::to_string(r) + "][" + std::to_string(c) + "]");
        }
    }
    return m;
}

inline Eigen::MatrixXd parse_real_matrix(const Json& j, const std::string& ctx) {
    if (!j.is_array() || j.empty()) {
        throw ValidationError("scenario: '" + ctx + "' must be a non-empty array of rows");
    }
    const std::size_t rows = j.size();
    const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
    if (cols == 0) throw ValidationError("scenario: '" + ctx + "' rows must be non-empty arrays");
    Eigen::MatrixXd m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        if (!j[r].is_array() || j[r].size() != cols) {
            throw ValidationError("scenario: '" + ctx + "' rows have inconsistent lengths");
        }
        for (std::size_t c = 0; c < cols; ++c) {
            if (!j[r][c].is_number()) {
                throw ValidationError("scenario: '" + ctx + "' entries must be numbers");
            }
            m(r, c) = j[r][c].get<double>();
        }
    }
    return m;
}

inline std::vector<double> parse_real_vector(const Json& j, const std::string& ctx) {
    if (!j.is_array()) throw ValidationError("scenario: '" + ctx + "' must be an array of numbers");
    std::vector<double> out;
    out.reserve(j.size());
    for (const auto& v : j) {
        if (!v.is_number()) throw ValidationError("scenario: '" + ctx + "' entries must be numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

struct SystemSpec {
    int dim;
    int spins;  // 0 when the system is not made of spins
};

inline SystemSpec parse_system(const Json& scenario) {
    const Json& sys = require_field(scenario, "system", "");
    if (sys.contains("spins")) {
        const auto n = require_integer(sys, "spins", "system.");
        if (n < 1 || n > kMaxSpins) {
            throw ValidationError("scenario: system.spins out of range 1.." + std::to_string(kMaxSpins));
        }
        return SystemSpec{1 << n, static_cast<int>(n)};
    }
    if (sys.contains("dim")) {
        const auto d = require_integer(sys, "dim", "system.");
        if (d < 1 || d > (1 << kMaxSpins)) {
            throw ValidationError("scenario: system.dim out of range");
        }
        return SystemSpec{static_cast<int>(d), 0};
    }
    throw ValidationError("scenario: system needs either 'spins' or 'dim'");
}

inline HermitianOperator parse_hamiltonian(const Json& scenario, const SystemSpec& sys) {
    const Json& h = require_field(scenario, "hamiltonian", "");
    const std::string type = require_string(h, "type", "hamiltonian.");
    if (type == "zero") {
        return HermitianOperator::zero(sys.dim);
    }
    if (type == "rabi") {
        if (sys.dim != 2) throw ValidationError("scenario: rabi Hamiltonian needs a single spin");
        const double omega = require_number(h, "omega", "hamiltonian.");
        CMatrix m(2, 2);
        m << 0.5 * omega, -0.5 * omega, -0.5 * omega, 0.5 * omega;  // omega (1 - sigma_x) / 2
        return HermitianOperator(std::move(m));
    }
    if (type == "random-real") {
        const auto seed = require_integer(h, "seed", "hamiltonian.");
        const double scale = h.contains("scale") ? require_number(h, "scale", "hamiltonian.") : 1.0;
        Rng rng(static_cast<std::uint64_t>(seed));
        return HermitianOperator(random_real_symmetric(sys.dim, rng, scale).cast<Complex>());
    }
    if (type == "matrix") {
        CMatrix m = parse_complex_matrix(require_field(h, "entries", "hamiltonian."), "hamiltonian.entries");
        if (m.rows() != sys.dim || m.cols() != sys.dim) {
            throw ValidationError("scenario: hamiltonian.entries dimension mismatch");
        }
        return HermitianOperator(std::move(m));
    }
    throw ValidationError("scenario: unknown hamiltonian.type '" + type + "'");
}

inline HermitianOperator named_observable(const std::string& name, const SystemSpec& sys) {
    auto need_spins = [&](const char* what) {
        if (sys.spins < 1) {
            throw ValidationError(std::string("scenario: observable '") + what +
                                  "' needs a spin system");
        }
    };
    if (name == "mz") {
        need_spins("mz");
        return build_magnetization(sys.spins);
    }
    if (name == "sum" || name == "diff") {
        need_spins(name.c_str());
        if (sys.spins != 2) {
            throw ValidationError("scenario: observable '" + name + "' is defined for two spins");
        }
        const HermitianOperator sz1 = build_site_operator(2, 1, Pauli::Z);
        const HermitianOperator sz2 = build_site_operator(2, 2, Pauli::Z);
        return name == "sum" ? sz1 + sz2 : sz1 - sz2;
    }
    const auto colon = name.find(':');
    if (colon != std::string::npos) {
        const std::string prefix = name.substr(0, colon);
        Pauli which;
        if (prefix == "sz") {
            which = Pauli::Z;
        } else if (prefix == "sx") {
            which = Pauli::X;
        } else {
            throw ValidationError("scenario: unknown observable '" + name + "'");
        }
        need_spins(prefix.c_str());
        int site = 0;
        try {
            site = std::stoi(name.substr(colon + 1));
        } catch (const std::exception&) {
            throw ValidationError("scenario: bad site index in observable '" + name + "'");
        }
        return build_site_operator(sys.spins, site, which);
    }
    throw ValidationError("scenario: unknown observable '" + name + "'");
}

inline ObservableDecomposition parse_observable(const Json& spec, const SystemSpec& sys,
                                                double cluster_tol) {
    if (spec.is_string()) {
        return decompose_observable(named_observable(spec.get<std::string>(), sys), cluster_tol);
    }
    if (spec.is_object() && spec.contains("matrix")) {
        CMatrix m = parse_complex_matrix(spec["matrix"], "observable.matrix");
        if (m.rows() != sys.dim || m.cols() != sys.dim) {
            throw ValidationError("scenario: observable matrix dimension mismatch");
        }
        return decompose_observable(HermitianOperator(std::move(m)), cluster_tol);
    }
    throw ValidationError("scenario: observable must be a name or {\"matrix\": ...}");
}

inline std::vector<double> parse_times(const Json& scenario) {
    const Json& t = require_field(scenario, "times", "");
    if (t.is_object() && t.contains("list")) {
        auto list = parse_real_vector(t["list"], "times.list");
        if (list.empty()) throw ValidationError("scenario: times.list is empty");
        return list;
    }
    if (t.is_object()) {
        const double first = require_number(t, "first", "times.");
        const double step = require_number(t, "step", "times.");
        const auto count = require_integer(t, "count", "times.");
        if (count < 1) throw ValidationError("scenario: times.count must be positive");
        std::vector<double> times(count);
        for (std::int64_t k = 0; k < count; ++k) times[k] = first + k * step;
        return times;
    }
    throw ValidationError("scenario: times must be {first, step, count} or {list: [...]}");
}

inline AntiunitaryInvolution parse_pi(const Json& scenario, const SystemSpec& sys) {
    if (!scenario.contains("pi")) return AntiunitaryInvolution::conjugation(sys.dim);
    const Json& p = scenario["pi"];
    const std::string type = require_string(p, "type", "pi.");
    if (type == "conjugation") return AntiunitaryInvolution::conjugation(sys.dim);
    if (type == "spin-flip") {
        if (sys.spins < 1) throw ValidationError("scenario: pi spin-flip needs a spin system");
        return AntiunitaryInvolution::spin_flip(sys.spins);
    }
    if (type == "unitary") {
        CMatrix v = parse_complex_matrix(require_field(p, "matrix", "pi."), "pi.matrix");
        if (v.rows() != sys.dim) throw ValidationError("scenario: pi.matrix dimension mismatch");
        return AntiunitaryInvolution(std::move(v));
    }
    throw ValidationError("scenario: unknown pi.type '" + type + "'");
}

inline DensityMatrix parse_initial_state(const Json& scenario, const SystemSpec& sys) {
    if (!scenario.contains("initial_state")) return DensityMatrix::maximally_mixed(sys.dim);
    const Json& st = scenario["initial_state"];
    const std::string type = require_string(st, "type", "initial_state.");
    if (type == "uniform") return DensityMatrix::maximally_mixed(sys.dim);
    if (type == "basis") {
        const auto index = require_integer(st, "index", "initial_state.");
        if (index < 0 || index >= sys.dim) {
            throw ValidationError("scenario: initial_state.index out of range");
        }
        return DensityMatrix::pure(StateVector::basis_state(sys.dim, static_cast<int>(index)));
    }
    if (type == "amplitudes") {
        const Json& values = require_field(st, "values", "initial_state.");
        if (!values.is_array() || static_cast<int>(values.size()) != sys.dim) {
            throw ValidationError("scenario: initial_state.values must have length d");
        }
        CVector amps(sys.dim);
        for (int i = 0; i < sys.dim; ++i) {
            amps(i) = parse_complex(values[i], "initial_state.values[" + std::to_string(i) + "]");
        }
        return DensityMatrix::pure(StateVector(std::move(amps)));
    }
    throw ValidationError("scenario: unknown initial_state.type '" + type + "'");
}

inline MeasurementSchedule parse_schedule(const Json& scenario, const SystemSpec& sys) {
    const double cluster_tol = scenario.contains("cluster_tol")
                                   ? require_number(scenario, "cluster_tol", "")
                                   : kDefaultClusterTol;
    HermitianOperator h = parse_hamiltonian(scenario, sys);
    std::vector<double> times = parse_times(scenario);
    std::vector<std::shared_ptr<const ObservableDecomposition>> observables;
    if (scenario.contains("observables")) {
        const Json& list = scenario["observables"];
        if (!list.is_array() || list.size() != times.size()) {
            throw ValidationError("scenario: observables must list one observable per time");
        }
        for (const auto& spec : list) {
            observables.push_back(std::make_shared<const ObservableDecomposition>(
                parse_observable(spec, sys, cluster_tol)));
        }
    } else {
        auto shared = std::make_shared<const ObservableDecomposition>(
            parse_observable(require_field(scenario, "observable", ""), sys, cluster_tol));
        observables.assign(times.size(), shared);
    }
    DensityMatrix rho0 = parse_initial_state(scenario, sys);
    return MeasurementSchedule(std::move(times), std::move(observables), std::move(h), std::move(rho0));
}

inline void add_check(ScenarioOutcome& out, std::string description, bool ok,
                      std::string witness = "") {
    out.passed = out.passed && ok;
    out.checks.push_back(CheckResult{std::move(description), ok, std::move(witness)});
}

inline std::string fmt(double v) { return format_double(v, 17); }

}  // namespace detail

namespace detail {

inline ScenarioOutcome run_reversal(const Json& scenario, const RunOptions& opts,
                                    ScenarioOutcome out) {
    const SystemSpec sys = parse_system(scenario);
    const MeasurementSchedule schedule = parse_schedule(scenario, sys);
    const AntiunitaryInvolution pi = parse_pi(scenario, sys);

    const TimeReversalReport reversal =
        verify_time_reversal(schedule, pi, kConstructionTol, opts.enumeration_cap);
    const DetailedBalanceReport balance =
        detailed_balance_report(schedule, pi, kConstructionTol, opts.enumeration_cap);

    ReportTable table{"trajectories",
                      {"trajectory", "probability", "reversed_probability", "deviation"},
                      {}};
    for (const auto& entry : reversal.entries) {
        table.rows.push_back({to_string(entry.trajectory), fmt(entry.probability),
                              fmt(entry.reversed_probability), fmt(entry.deviation)});
    }
    out.tables.push_back(std::move(table));

    // predicted = d_last/d_first, so log(predicted) is the Boltzmann entropy
    // change along the trajectory
    ReportTable db_table{"detailed-balance",
                         {"trajectory", "ratio", "predicted", "entropy_change", "defined"},
                         {}};
    for (const auto& entry : balance.entries) {
        db_table.rows.push_back({to_string(entry.trajectory),
                                 entry.defined ? fmt(entry.ratio) : std::string(""),
                                 fmt(entry.predicted), fmt(std::log(entry.predicted)),
                                 entry.defined ? "1" : "0"});
    }
    out.tables.push_back(std::move(db_table));

    out.summary["dim"] = schedule.dim();
    out.summary["steps"] = schedule.step_count();
    out.summary["trajectories"] = reversal.entries.size();
    out.summary["max_reversal_deviation"] = reversal.max_deviation;
    out.summary["max_detailed_balance_error"] = balance.max_error;
    out.summary["detailed_balance_defined"] = balance.defined_count;

    const Json checks = scenario.contains("checks") ? scenario["checks"] : Json::object();
    const double reversal_tol = checks.contains("max_reversal_deviation")
                                    ? checks["max_reversal_deviation"].get<double>()
                                    : opts.tol.value_or(1e-10);
    {
        const ReversalReportEntry* worst = nullptr;
        for (const auto& entry : reversal.entries) {
            if (worst == nullptr || entry.deviation > worst->deviation) worst = &entry;
        }
        std::string witness = worst == nullptr ? ""
                                               : "trajectory " + to_string(worst->trajectory) +
                                                     " deviates by " + fmt(worst->deviation);
        add_check(out, "max |Prob[w] - Prob[Theta w]| <= " + format_double(reversal_tol, 6),
                  reversal.max_deviation <= reversal_tol, std::move(witness));
    }
    if (checks.contains("max_detailed_balance_error")) {
        const double tol = checks["max_detailed_balance_error"].get<double>();
        add_check(out, "max |ratio - dim ratio| <= " + format_double(tol, 6),
                  balance.max_error <= tol,
                  "worst detailed-balance error " + fmt(balance.max_error));
    }
    if (checks.contains("uniform_probability")) {
        const Json& uniform = checks["uniform_probability"];
        const double value = require_number(uniform, "value", "checks.uniform_probability.");
        const double tol = require_number(uniform, "tol", "checks.uniform_probability.");
        double worst = 0.0;
        const Trajectory* worst_w = nullptr;
        for (const auto& entry : reversal.entries) {
            const double err = std::abs(entry.probability - value);
            if (err >= worst) {
                worst = err;
                worst_w = &entry.trajectory;
            }
        }
        add_check(out,
                  "every trajectory probability within " + format_double(tol, 6) + " of " +
                      format_double(value, 17),
                  worst <= tol,
                  worst_w == nullptr ? "" : "trajectory " + to_string(*worst_w) + " off by " + fmt(worst));
    }
    return out;
}

inline ScenarioOutcome run_distribution(const Json& scenario, const RunOptions& opts,
                                        ScenarioOutcome out) {
    const SystemSpec sys = parse_system(scenario);
    const MeasurementSchedule schedule = parse_schedule(scenario, sys);
    const TrajectoryDistribution dist = enumerate_distribution(schedule, opts.enumeration_cap);

    ReportTable table{"distribution", {"trajectory", "probability"}, {}};
    double total = 0.0;
    for (const auto& [w, p] : dist) {
        table.rows.push_back({to_string(w), fmt(p)});
        total += p;
    }
    out.tables.push_back(std::move(table));
    out.summary["dim"] = schedule.dim();
    out.summary["trajectories"] = dist.size();
    out.summary["total_probability"] = total;

    add_check(out, "distribution sums to 1 within 1e-10", std::abs(total - 1.0) <= 1e-10,
              "total " + fmt(total));
    const Json checks = scenario.contains("checks") ? scenario["checks"] : Json::object();
    if (checks.contains("expected")) {
        const double tol = checks.contains("tol") ? checks["tol"].get<double>()
                                                  : opts.tol.value_or(1e-10);
        for (const auto& [key, value] : checks["expected"].items()) {
            Trajectory w;
            std::stringstream stream(key);
            std::string part;
            while (std::getline(stream, part, '>')) w.labels.push_back(part);
            auto it = dist.find(w);
            const double p = it == dist.end() ? 0.0 : it->second;
            add_check(out, "Prob[" + key + "] = " + format_double(value.get<double>(), 17),
                      std::abs(p - value.get<double>()) <= tol, "got " + fmt(p));
        }
    }
    return out;
}

inline ScenarioOutcome run_sample(const Json& scenario, const RunOptions& opts, ScenarioOutcome out) {
    const SystemSpec sys = parse_system(scenario);
    const MeasurementSchedule schedule = parse_schedule(scenario, sys);
    const std::uint64_t seed =
        opts.seed.value_or(scenario.contains("seed") ? scenario["seed"].get<std::uint64_t>() : 0);
    const std::uint64_t samples = opts.samples.value_or(
        scenario.contains("samples") ? scenario["samples"].get<std::uint64_t>() : 100000);

    const TrajectoryDistribution exact = enumerate_distribution(schedule, opts.enumeration_cap);
    const TrajectoryCounts counts = sample_counts(schedule, samples, seed, opts.workers);
    const double tv = total_variation_distance(exact, counts, samples);

    ReportTable table{"samples", {"trajectory", "probability", "empirical_frequency"}, {}};
    for (const auto& [w, p] : exact) {
        auto it = counts.find(w);
        const double freq = it == counts.end() ? 0.0 : static_cast<double>(it->second) / samples;
        table.rows.push_back({to_string(w), fmt(p), fmt(freq)});
    }
    out.tables.push_back(std::move(table));

    out.summary["seed"] = seed;
    out.summary["samples"] = samples;
    out.summary["workers"] = opts.workers;
    out.summary["total_variation_distance"] = tv;

    const Json checks = scenario.contains("checks") ? scenario["checks"] : Json::object();
    const double tv_tol = checks.contains("tv_distance") ? checks["tv_distance"].get<double>()
                                                         : opts.tol.value_or(0.02);
    add_check(out, "total variation distance to the exact distribution <= " + format_double(tv_tol, 6),
              tv <= tv_tol, "distance " + fmt(tv));
    return out;
}

inline ScenarioOutcome run_abl(const Json& scenario, const RunOptions& opts, ScenarioOutcome out) {
    const SystemSpec sys = parse_system(scenario);
    const MeasurementSchedule schedule = parse_schedule(scenario, sys);
    const std::string first = require_string(scenario, "first", "");
    const std::string last = require_string(scenario, "last", "");

    const auto conditional = abl_distribution(schedule, first, last, opts.enumeration_cap);

    ReportTable table{"conditional", {"intermediates", "conditional_probability"}, {}};
    double total = 0.0;
    for (const auto& [mids, p] : conditional) {
        table.rows.push_back({to_string(mids), fmt(p)});
        total += p;
    }
    out.tables.push_back(std::move(table));
    out.summary["first"] = first;
    out.summary["last"] = last;
    out.summary["sequences"] = conditional.size();
    out.summary["total_conditional_probability"] = total;

    const Json checks = scenario.contains("checks") ? scenario["checks"] : Json::object();
    const double sum_tol = checks.contains("sum_tol") ? checks["sum_tol"].get<double>() : 1e-10;
    add_check(out, "conditional distribution sums to 1 within " + format_double(sum_tol, 6),
              std::abs(total - 1.0) <= sum_tol, "total " + fmt(total));
    if (checks.contains("expected")) {
        for (const auto& [key, spec] : checks["expected"].items()) {
            const double value = require_number(spec, "value", "checks.expected.");
            const double tol = require_number(spec, "tol", "checks.expected.");
            Trajectory mids;
            if (!key.empty()) {
                std::stringstream stream(key);
                std::string part;
                while (std::getline(stream, part, '>')) mids.labels.push_back(part);
            }
            auto it = conditional.find(mids);
            const double p = it == conditional.end() ? 0.0 : it->second;
            add_check(out,
                      "Prob[" + (key.empty() ? std::string("()") : key) + " | " + first + ", " + last +
                          "] = " + format_double(value, 17) +
                          (tol == 0.0 ? " exactly" : " within " + format_double(tol, 6)),
                      std::abs(p - value) <= tol, "got " + fmt(p));
        }
    }
    return out;
}

inline ScenarioOutcome run_retrodict(const Json& scenario, const RunOptions&, ScenarioOutcome out) {
    const Json& coeffs = require_field(scenario, "coefficients", "");
    if (!coeffs.is_array() || coeffs.size() != 4) {
        throw ValidationError("scenario: coefficients must list four [re, im] pairs (uu, ud, du, dd)");
    }
    std::array<Complex, 4> c;
    for (int i = 0; i < 4; ++i) {
        c[i] = parse_complex(coeffs[i], "coefficients[" + std::to_string(i) + "]");
    }
    const RetrodictionResult result = two_spin_retrodiction(c);
    const double ratio = result.forward / result.reversed;

    out.tables.push_back(ReportTable{"result",
                                     {"forward", "reversed", "ratio"},
                                     {{fmt(result.forward), fmt(result.reversed), fmt(ratio)}}});
    out.summary["forward"] = result.forward;
    out.summary["reversed"] = result.reversed;
    out.summary["ratio"] = ratio;

    const Json checks = scenario.contains("checks") ? scenario["checks"] : Json::object();
    auto check_value = [&](const char* key, double actual) {
        if (!checks.contains(key)) return;
        const double value = require_number(checks[key], "value", std::string("checks.") + key + ".");
        const double tol = require_number(checks[key], "tol", std::string("checks.") + key + ".");
        add_check(out,
                  std::string(key) + " = " + format_double(value, 17) +
                      (tol == 0.0 ? " exactly" : " within " + format_double(tol, 6)),
                  std::abs(actual - value) <= tol, std::string("got ") + fmt(actual));
    };
    check_value("forward", result.forward);
    check_value("reversed", result.reversed);
    check_value("ratio", ratio);
    return out;
}

inline ScenarioOutcome run_entropy_flow(const Json& scenario, const RunOptions& opts,
                                        ScenarioOutcome out) {
    const auto spins = require_integer(scenario, "spins", "");
    const auto seeds = require_integer(scenario, "seeds", "");
    const auto steps = require_integer(scenario, "steps", "");
    const std::uint64_t master_seed =
        opts.seed.value_or(scenario.contains("seed") ? scenario["seed"].get<std::uint64_t>() : 0);
    if (spins < 1 || spins > kMaxSpins) throw ValidationError("scenario: spins out of range");
    if (seeds < 1 || seeds > 100000) throw ValidationError("scenario: seeds out of range");
    if (steps < 1 || steps > 1000) throw ValidationError("scenario: steps out of range");

    const EntropyFlowResult result = entropy_flow_demo(static_cast<int>(spins),
                                                       static_cast<int>(seeds),
                                                       static_cast<int>(steps), master_seed);

    ReportTable summary_table{"summary", {"step", "lower_quartile", "median", "upper_quartile"}, {}};
    for (std::size_t k = 0; k < result.per_step.size(); ++k) {
        summary_table.rows.push_back({std::to_string(k), fmt(result.per_step[k].lower_quartile),
                                      fmt(result.per_step[k].median),
                                      fmt(result.per_step[k].upper_quartile)});
    }
    out.tables.push_back(std::move(summary_table));

    ReportTable increments{"increments", {"seed", "step", "entropy_increment"}, {}};
    for (std::size_t seed = 0; seed < result.increments.size(); ++seed) {
        for (std::size_t k = 0; k < result.increments[seed].size(); ++k) {
            increments.rows.push_back(
                {std::to_string(seed), std::to_string(k), fmt(result.increments[seed][k])});
        }
    }
    out.tables.push_back(std::move(increments));

    out.summary["spins"] = spins;
    out.summary["seeds"] = seeds;
    out.summary["steps"] = steps;
    out.summary["seed"] = master_seed;
    out.summary["median_first_step_increment"] = result.per_step.size() > 1
                                                     ? result.per_step[1].median
                                                     : 0.0;

    add_check(out, "step-0 increment is exactly zero",
              result.per_step[0].median == 0.0 && result.per_step[0].lower_quartile == 0.0 &&
                  result.per_step[0].upper_quartile == 0.0);
    const Json checks = scenario.contains("checks") ? scenario["checks"] : Json::object();
    if (checks.value("median_first_step_increment_positive", false)) {
        add_check(out, "median entropy increment after one step > 0",
                  result.per_step.size() > 1 && result.per_step[1].median > 0.0,
                  result.per_step.size() > 1 ? "median " + fmt(result.per_step[1].median) : "");
    }
    return out;
}

inline ScenarioOutcome run_markov(const Json& scenario, const RunOptions&, ScenarioOutcome out) {
    std::optional<MarkovChain> chain;
    if (scenario.contains("chain")) {
        const Json& spec = scenario["chain"];
        Eigen::MatrixXd p = parse_real_matrix(require_field(spec, "matrix", "chain."), "chain.matrix");
        if (p.rows() != p.cols()) throw ValidationError("scenario: chain.matrix must be square");
        std::vector<std::string> states;
        if (spec.contains("states")) {
            for (const auto& s : spec["states"]) states.push_back(s.get<std::string>());
        } else {
            for (Eigen::Index i = 0; i < p.rows(); ++i) states.push_back(std::to_string(i));
        }
        try {
            chain.emplace(std::move(states), std::move(p));
        } catch (const std::invalid_argument& e) {
            throw ValidationError(std::string("scenario: ") + e.what());
        }
    } else if (scenario.contains("potential")) {
        const Json& spec = scenario["potential"];
        Eigen::MatrixXd phi =
            parse_real_matrix(require_field(spec, "interaction", "potential."), "potential.interaction");
        const auto v = parse_real_vector(require_field(spec, "potential", "potential."),
                                         "potential.potential");
        Eigen::VectorXd pot(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) pot(i) = v[i];
        try {
            chain.emplace(gibbs_chain(PotentialForm(std::move(phi), std::move(pot))));
        } catch (const std::invalid_argument& e) {
            throw ValidationError(std::string("scenario: ") + e.what());
        }
    } else {
        throw ValidationError("scenario: markov kind needs 'chain' or 'potential'");
    }

    MarkovChain resolved = [&] {
        try {
            return with_stationary(*chain);
        } catch (const std::invalid_argument& e) {
            throw ValidationError(std::string("scenario: ") + e.what());
        }
    }();
    const Eigen::VectorXd& rho = *resolved.stationary();
    const MarkovChain reversed = reverse_chain(resolved);
    const MarkovChain doubled = reverse_chain(reversed);
    const auto n = static_cast<Eigen::Index>(resolved.size());

    double reverse_gap = 0.0;
    double double_gap = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            reverse_gap = std::max(reverse_gap,
                                   std::abs(reversed.transition()(i, j) - resolved.transition()(i, j)));
            double_gap = std::max(double_gap,
                                  std::abs(doubled.transition()(i, j) - resolved.transition()(i, j)));
        }
    }

    const Json checks = scenario.contains("checks") ? scenario["checks"] : Json::object();
    const double db_tol = checks.contains("detailed_balance") &&
                                  checks["detailed_balance"].contains("tol")
                              ? checks["detailed_balance"]["tol"].get<double>()
                              : kRowStochasticTol;
    const DetailedBalanceCertificate cert = is_detailed_balance(resolved, db_tol);

    ReportTable stat_table{"stationary", {"state", "probability"}, {}};
    for (Eigen::Index i = 0; i < n; ++i) {
        stat_table.rows.push_back({resolved.states()[i], fmt(rho(i))});
    }
    out.tables.push_back(std::move(stat_table));

    ReportTable trans{"transitions", {"from", "to", "p", "p_reversed", "flow_asymmetry"}, {}};
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            trans.rows.push_back({resolved.states()[i], resolved.states()[j],
                                  fmt(resolved.transition()(i, j)), fmt(reversed.transition()(i, j)),
                                  fmt(rho(i) * resolved.transition()(i, j) -
                                      rho(j) * resolved.transition()(j, i))});
        }
    }
    out.tables.push_back(std::move(trans));

    out.summary["states"] = resolved.states();
    out.summary["stationary"] = std::vector<double>(rho.data(), rho.data() + n);
    Json reversed_rows = Json::array();
    for (Eigen::Index i = 0; i < n; ++i) {
        Json row = Json::array();
        for (Eigen::Index j = 0; j < n; ++j) row.push_back(reversed.transition()(i, j));
        reversed_rows.push_back(std::move(row));
    }
    out.summary["reversed_chain"] = {{"states", resolved.states()}, {"matrix", reversed_rows}};
    out.summary["detailed_balance_holds"] = cert.holds;
    out.summary["max_detailed_balance_violation"] = cert.max_violation;
    if (!cert.holds && cert.witness_from >= 0) {
        out.summary["witness"] = Json::array({resolved.states()[cert.witness_from],
                                              resolved.states()[cert.witness_to]});
    }
    out.summary["reverse_equals_original_gap"] = reverse_gap;
    out.summary["double_reversal_gap"] = double_gap;

    if (checks.contains("stationary")) {
        const auto expected = parse_real_vector(
            require_field(checks["stationary"], "value", "checks.stationary."), "checks.stationary.value");
        const double tol = require_number(checks["stationary"], "tol", "checks.stationary.");
        bool ok = expected.size() == static_cast<std::size_t>(n);
        double worst = 0.0;
        if (ok) {
            for (Eigen::Index i = 0; i < n; ++i) worst = std::max(worst, std::abs(rho(i) - expected[i]));
            ok = worst <= tol;
        }
        add_check(out, "stationary distribution matches within " + format_double(tol, 6), ok,
                  "max deviation " + fmt(worst));
    }
    if (checks.contains("detailed_balance")) {
        const bool expected = checks["detailed_balance"].contains("holds")
                                  ? checks["detailed_balance"]["holds"].get<bool>()
                                  : true;
        std::string witness = "max flow violation " + fmt(cert.max_violation);
        if (cert.witness_from >= 0) {
            witness += " at (" + resolved.states()[cert.witness_from] + ", " +
                       resolved.states()[cert.witness_to] + ")";
        }
        add_check(out,
                  std::string("detailed balance ") + (expected ? "holds" : "fails with a witness"),
                  cert.holds == expected && (expected || cert.witness_from >= 0), witness);
    }
    if (checks.contains("reverse_matches_original_tol")) {
        const double tol = checks["reverse_matches_original_tol"].get<double>();
        add_check(out, "Bayes-reversed chain equals the original within " + format_double(tol, 6),
                  reverse_gap <= tol, "max entry gap " + fmt(reverse_gap));
    }
    if (checks.contains("double_reversal_tol")) {
        const double tol = checks["double_reversal_tol"].get<double>();
        add_check(out, "double reversal returns the original within " + format_double(tol, 6),
                  double_gap <= tol, "max entry gap " + fmt(double_gap));
    }
    return out;
}

inline ScenarioOutcome run_dynsys(const Json& scenario, const RunOptions& opts, ScenarioOutcome out) {
    std::optional<FiniteDynamicalSystem> sys;
    const Json& system = require_field(scenario, "system", "");
    if (system.is_string()) {
        const std::string name = system.get<std::string>();
        const std::string prefix = "free-motion:";
        if (name.rfind(prefix, 0) == 0) {
            int n = 0;
            try {
                n = std::stoi(name.substr(prefix.size()));
            } catch (const std::exception&) {
                throw ValidationError("scenario: bad free-motion size in '" + name + "'");
            }
            try {
                sys.emplace(free_motion_system(n));
            } catch (const std::invalid_argument& e) {
                throw ValidationError(std::string("scenario: ") + e.what());
            }
        } else {
            throw ValidationError("scenario: unknown dynamical system '" + name + "'");
        }
    } else if (system.is_object()) {
        auto to_int_vector = [](const Json& j, const std::string& ctx) {
            if (!j.is_array()) throw ValidationError("scenario: '" + ctx + "' must be an array");
            std::vector<int> out_v;
            out_v.reserve(j.size());
            for (const auto& v : j) {
                if (!v.is_number_integer()) {
                    throw ValidationError("scenario: '" + ctx + "' entries must be integers");
                }
                out_v.push_back(v.get<int>());
            }
            return out_v;
        };
        try {
            sys.emplace(to_int_vector(require_field(system, "map", "system."), "system.map"),
                        to_int_vector(require_field(system, "involution", "system."),
                                      "system.involution"));
        } catch (const std::invalid_argument& e) {
            throw ValidationError(std::string("scenario: ") + e.what());
        }
    } else {
        throw ValidationError("scenario: system must be a name or {map, involution}");
    }

    const int t_max = scenario.contains("t_max")
                          ? static_cast<int>(require_integer(scenario, "t_max", ""))
                          : 1;
    if (t_max < 1 || t_max > 10000) throw ValidationError("scenario: t_max out of range");

    ReportTable rev_table{"reversibility", {"t", "holds", "witness"}, {}};
    bool all_reversible = true;
    int first_witness = -1;
    for (int t = 1; t <= t_max; ++t) {
        const auto report = check_mechanical_reversibility(*sys, t);
        all_reversible = all_reversible && report.holds;
        if (!report.holds && first_witness < 0) first_witness = report.witness;
        rev_table.rows.push_back({std::to_string(t), report.holds ? "1" : "0",
                                  report.holds ? "" : std::to_string(report.witness)});
    }
    out.tables.push_back(std::move(rev_table));

    // macrostate pairs: explicit list or seeded random nonempty subsets with
    // a defined backward conditional, each tested at a seeded t in 1..t_max
    struct Pair {
        Macrostate a;
        Macrostate b;
        int t;
    };
    std::vector<Pair> pairs;
    if (scenario.contains("macrostate_pairs")) {
        const Json& spec = scenario["macrostate_pairs"];
        if (spec.is_array()) {
            for (const auto& item : spec) {
                auto members = [&](const char* key) {
                    std::vector<int> m;
                    for (const auto& v : require_field(item, key, "macrostate_pairs.")) {
                        m.push_back(v.get<int>());
                    }
                    return m;
                };
                const int t = item.contains("t") ? item["t"].get<int>() : 1;
                try {
                    pairs.push_back(Pair{Macrostate(sys->size(), members("a")),
                                         Macrostate(sys->size(), members("b")), t});
                } catch (const std::invalid_argument& e) {
                    throw ValidationError(std::string("scenario: ") + e.what());
                }
            }
        } else {
            const auto count = require_integer(spec, "count", "macrostate_pairs.");
            const std::uint64_t seed = opts.seed.value_or(
                spec.contains("seed") ? spec["seed"].get<std::uint64_t>() : 0);
            if (count < 1 || count > 100000) {
                throw ValidationError("scenario: macrostate_pairs.count out of range");
            }
            Rng rng(splitmix64(seed));
            auto random_macrostate = [&] {
                std::vector<int> members;
                do {
                    members.clear();
                    for (int x = 0; x < sys->size(); ++x) {
                        if (rng.uniform() < 0.5) members.push_back(x);
                    }
                } while (members.empty());
                return Macrostate(sys->size(), members);
            };
            int attempts = 0;
            while (static_cast<std::int64_t>(pairs.size()) < count && attempts < 100 * count) {
                ++attempts;
                Macrostate a = random_macrostate();
                Macrostate b = random_macrostate();
                const int t = 1 + static_cast<int>(rng.uniform() * t_max);
                if (check_detailed_balance_identity(*sys, a, b, t).defined) {
                    pairs.push_back(Pair{std::move(a), std::move(b), t});
                }
            }
            if (static_cast<std::int64_t>(pairs.size()) < count) {
                throw ValidationError("scenario: could not find enough macrostate pairs with a "
                                      "defined backward conditional");
            }
        }
    }

    ReportTable balance{"balance", {"pair", "t", "size_a", "size_b", "lhs", "rhs", "equal"}, {}};
    bool all_equal = true;
    std::string balance_witness;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto report = check_detailed_balance_identity(*sys, pairs[i].a, pairs[i].b, pairs[i].t);
        const bool ok = report.defined && report.equal;
        if (!ok && balance_witness.empty()) {
            balance_witness = "pair " + std::to_string(i) + ": lhs " + to_string(report.lhs) +
                              " vs rhs " + to_string(report.rhs);
        }
        all_equal = all_equal && ok;
        balance.rows.push_back({std::to_string(i), std::to_string(pairs[i].t),
                                std::to_string(pairs[i].a.size()), std::to_string(pairs[i].b.size()),
                                report.defined ? to_string(report.lhs) : "",
                                to_string(report.rhs), ok ? "1" : "0"});
    }
    out.tables.push_back(std::move(balance));

    out.summary["states"] = sys->size();
    out.summary["t_max"] = t_max;
    out.summary["mechanically_reversible"] = all_reversible;
    out.summary["macrostate_pairs"] = pairs.size();

    const Json checks = scenario.contains("checks") ? scenario["checks"] : Json::object();
    if (checks.value("mechanical_reversibility", false)) {
        add_check(out, "pi f^t pi = f^-t for every t up to " + std::to_string(t_max), all_reversible,
                  first_witness >= 0 ? "fails at state " + std::to_string(first_witness) : "");
    }
    if (checks.value("balance_identity", false)) {
        add_check(out, "counting detailed balance holds exactly for all macrostate pairs",
                  all_equal && !pairs.empty(), balance_witness);
    }
    return out;
}

}  // namespace detail

/// Validates the scenario against its kind's schema and runs it. Throws
/// ValidationError (or a domain precondition error) for invalid inputs;
/// check failures are reported in the outcome, not thrown.
inline ScenarioOutcome run_scenario(const Json& scenario, const RunOptions& opts) {
    if (!scenario.is_object()) throw ValidationError("scenario: top level must be an object");
    ScenarioOutcome out;
    out.name = scenario.contains("name") ? scenario["name"].get<std::string>() : "unnamed";
    out.kind = detail::require_string(scenario, "kind", "");
    out.summary["name"] = out.name;
    out.summary["kind"] = out.kind;

    if (out.kind == "reversal") {
        out = detail::run_reversal(scenario, opts, std::move(out));
    } else if (out.kind == "distribution") {
        out = detail::run_distribution(scenario, opts, std::move(out));
    } else if (out.kind == "sample") {
        out = detail::run_sample(scenario, opts, std::move(out));
    } else if (out.kind == "abl") {
        out = detail::run_abl(scenario, opts, std::move(out));
    } else if (out.kind == "retrodict") {
        out = detail::run_retrodict(scenario, opts, std::move(out));
    } else if (out.kind == "entropy-flow") {
        out = detail::run_entropy_flow(scenario, opts, std::move(out));
    } else if (out.kind == "markov") {
        out = detail::run_markov(scenario, opts, std::move(out));
    } else if (out.kind == "dynsys") {
        out = detail::run_dynsys(scenario, opts, std::move(out));
    } else {
        throw ValidationError("scenario: unknown kind '" + out.kind + "'");
    }

    Json checks = Json::array();
    for (const auto& check : out.checks) {
        Json entry = Json::object();
        entry["description"] = check.description;
        entry["passed"] = check.passed;
        if (!check.witness.empty()) entry["witness"] = check.witness;
        checks.push_back(std::move(entry));
    }
    out.summary["checks"] = std::move(checks);
    out.summary["passed"] = out.passed;
    return out;
}

inline ScenarioOutcome run_scenario_file(const std::string& path, const RunOptions& opts) {
    std::ifstream stream(path);
    if (!stream) throw ValidationError("cannot open scenario file '" + path + "'");
    Json scenario;
    try {
        scenario = Json::parse(stream);
    } catch (const Json::parse_error& e) {
        throw ValidationError(std::string("scenario parse error: ") + e.what());
    }
    return run_scenario(scenario, opts);
}

inline void write_csv(std::ostream& os, const ReportTable& table) {
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        if (c > 0) os << ',';
        os << table.columns[c];
    }
    os << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c > 0) os << ',';
            os << row[c];
        }
        os << '\n';
    }
}

/// Writes <name>-<table>.csv and/or <name>.json under opts.out_dir.
/// Output bytes depend only on (scenario, seed, worker-count).
inline std::vector<std::string> write_reports(const ScenarioOutcome& outcome, const RunOptions& opts) {
    std::vector<std::string> written;
    if (opts.out_dir.empty()) return written;
    namespace fs = std::filesystem;
    fs::create_directories(opts.out_dir);
    const bool csv = opts.format != RunOptions::Format::Json;
    const bool json = opts.format != RunOptions::Format::Csv;
    if (csv) {
        for (const auto& table : outcome.tables) {
            fs::path path = fs::path(opts.out_dir) / (outcome.name + "-" + table.name + ".csv");
            std::ofstream os(path);
            if (!os) throw std::runtime_error("cannot write " + path.string());
            write_csv(os, table);
            written.push_back(path.string());
        }
    }
    if (json) {
        fs::path path = fs::path(opts.out_dir) / (outcome.name + ".json");
        std::ofstream os(path);
        if (!os) throw std::runtime_error("cannot write " + path.string());
        os << outcome.summary.dump(2) << '\n';
        written.push_back(path.string());
    }
    return written;
}

}  // namespace reversim
