// rng.hpp
//
// Reproducible standard normals: boost::random::mt19937_64 feeding the
// ziggurat sampler of boost::random::normal_distribution. Both are header
// implementations, so a seed maps to the same stream on every standard
// library (std::normal_distribution gives no such guarantee).
#pragma once

#include "fgf/core.hpp"

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>

#include <cstdint>

namespace fgf {

/// SplitMix64 finalizer, used to derive independent stream seeds.
constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream)
{
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

class NormalRng {
public:
    explicit NormalRng(std::uint64_t seed) : engine_(seed) {}

    double normal() { return normal_(engine_); }

    /// rows x cols independent standard normals, filled in storage order.
    Batchd normal_matrix(Eigen::Index rows, Eigen::Index cols)
    {
        Batchd out(rows, cols);
        double* data = out.data();
        for (Eigen::Index i = 0; i < out.size(); ++i) {
            data[i] = normal_(engine_);
        }
        return out;
    }

    Vectord normal_vector(Eigen::Index n) { return normal_matrix(n, 1); }

private:
    boost::random::mt19937_64 engine_;
    boost::random::normal_distribution<double> normal_;
};

}  // namespace fgf
