#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace edboard {

/// Seeded pseudo-random source with platform-independent output.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the standard.
/// The std:: distribution classes are not (their algorithms are implementation
/// defined), so every variate here is derived from raw engine output with a
/// documented algorithm:
///   uniform   : top 53 bits of one engine draw, scaled to [0, 1)
///   normal    : Box-Muller, two uniforms per variate, no caching
///   poisson   : sequential inversion for mean <= 500, rounded normal above
///   lognormal : exp(normal), parametrised by the arithmetic mean
class Rng {
public:
    static constexpr const char* kAlgorithm = "mt19937_64";

    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Independent stream for a named purpose; seed + stream * golden-ratio constant.
    static Rng stream(std::uint64_t seed, std::uint64_t stream_id) {
        return Rng(seed + stream_id * 0x9E3779B97F4A7C15ULL);
    }

    std::uint64_t next_u64() { return engine_(); }
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Integer in [0, n).
    std::uint64_t below(std::uint64_t n);
    double normal(double mean = 0.0, double sd = 1.0);
    std::uint64_t poisson(double mean);
    /// Log-normal variate with arithmetic mean `mean` and log-scale sd `log_sd`.
    double lognormal_with_mean(double mean, double log_sd);
    bool bernoulli(double p) { return uniform() < p; }
    /// Index drawn from a discrete distribution given by (unnormalised) weights.
    std::size_t categorical(std::span<const double> weights);

    template <typename T>
    void shuffle(std::span<T> items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace edboard
