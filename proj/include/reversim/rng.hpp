#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>

namespace reversim {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Deterministic random stream. Worker streams derive from one master seed
/// via stream(master, worker) = mt19937_64(splitmix64(master + GOLDEN * (worker + 1))),
/// so a fixed (seed, worker-count) pair reproduces every draw bit for bit.
/// uniform()/normal() are built from raw engine words, not from
/// std::*_distribution, to stay identical across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    static Rng stream(std::uint64_t master_seed, std::uint64_t worker) {
        return Rng(splitmix64(master_seed + 0x9E3779B97F4A7C15ULL * (worker + 1)));
    }

    std::uint64_t bits() { return engine_(); }

    /// Uniform on the open interval (0, 1).
    double uniform() {
        return (static_cast<double>(bits() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller.
    double normal() {
        const double u = uniform();
        const double v = uniform();
        return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * std::numbers::pi * v);
    }

    /// Index i drawn with probability weights[i] / sum(weights); negative
    /// weights are treated as zero.
    std::size_t categorical(std::span<const double> weights) {
        double total = 0.0;
        for (double w : weights) total += w > 0.0 ? w : 0.0;
        if (!(total > 0.0)) {
            throw std::runtime_error("categorical draw: no outcome has positive weight");
        }
        double target = uniform() * total;
        std::size_t last_positive = weights.size();
        for (std::size_t i = 0; i < weights.size(); ++i) {
            const double w = weights[i] > 0.0 ? weights[i] : 0.0;
            if (w > 0.0) last_positive = i;
            target -= w;
            if (target <= 0.0 && w > 0.0) return i;
        }
        return last_positive;  // rounding pushed target past the end
    }

private:
    std::mt19937_64 engine_;
};

/// Symmetric matrix of gaussian entries. Real entries make it invariant
/// under plain complex conjugation.
inline Eigen::MatrixXd random_real_symmetric(int dim, Rng& rng, double scale = 1.0) {
    Eigen::MatrixXd g(dim, dim);
    for (int i = 0; i < dim; ++i) {
        for (int j = 0; j < dim; ++j) g(i, j) = scale * rng.normal();
    }
    return 0.5 * (g + g.transpose());
}

}  // namespace reversim
