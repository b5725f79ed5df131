#pragma once

#include <cstdint>
#include <random>

namespace sdv {

/// Every piece of randomness in the project (weight init, data synthesis, batch
/// shuffling) draws from an explicitly passed Rng so that reruns with the same
/// seed are bit-identical.
using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) {
    std::uniform_real_distribution<double> dist(lo, hi);
    return dist(rng);
}

inline double normal(Rng& rng, double mean, double stddev) {
    std::normal_distribution<double> dist(mean, stddev);
    return dist(rng);
}

} // namespace sdv
