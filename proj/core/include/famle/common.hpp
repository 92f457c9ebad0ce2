#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace famle {

// Error taxonomy shared by all modules. The CLI maps these onto distinct
// exit codes.

// Wrong dimensions, incompatible architecture, bad config values.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Non-finite or otherwise malformed numeric input.
struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// API misuse: empty batch, empty window, reward on a reward-free family.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A gradient update produced a non-finite loss. Carries the index of the
// SGD step that diverged.
struct DivergedError : std::runtime_error {
    int step_index;
    explicit DivergedError(int step, const std::string& what)
        : std::runtime_error(what), step_index(step) {}
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// splitmix64 finalizer; used to derive independent seeds from (seed, stream).
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream)
{
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::mt19937_64 rng_stream(std::uint64_t seed, std::uint64_t stream)
{
    return std::mt19937_64(mix_seed(seed, stream));
}

template <typename Derived>
bool all_finite(const Eigen::DenseBase<Derived>& x)
{
    return x.allFinite();
}

} // namespace famle
