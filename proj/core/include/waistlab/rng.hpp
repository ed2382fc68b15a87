#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Core>

namespace waistlab {

// Every estimator derives its randomness from (seed, substream index) through
// this mix, so a single 64-bit seed reproduces a whole run regardless of how
// work is split into blocks.
constexpr std::uint64_t kSubstreamBlock = 65536;

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index) {
    return splitmix64(seed ^ splitmix64(index + 0x51ed2701a9e3cc21ULL));
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    static Rng substream(std::uint64_t seed, std::uint64_t index) {
        return Rng(substream_seed(seed, index));
    }

    double uniform() { return unif_(gen_); }
    double uniform(double a, double b) { return a + (b - a) * unif_(gen_); }
    double normal() { return normal_(gen_); }
    std::uint64_t bits() { return gen_(); }

    Eigen::VectorXd normal_vec(int n) {
        Eigen::VectorXd v(n);
        for (int i = 0; i < n; ++i) v[i] = normal_(gen_);
        return v;
    }

    /// Uniform direction on the unit sphere S^{n-1}.
    Eigen::VectorXd unit_vec(int n) {
        Eigen::VectorXd v = normal_vec(n);
        double norm = v.norm();
        while (norm < 1e-300) {
            v = normal_vec(n);
            norm = v.norm();
        }
        return v / norm;
    }

    /// Uniform point in the ball of given radius.
    Eigen::VectorXd ball_point(int n, double radius) {
        Eigen::VectorXd u = unit_vec(n);
        double r = radius * std::pow(uniform(), 1.0 / n);
        return r * u;
    }

    std::mt19937_64& engine() { return gen_; }

private:
    std::mt19937_64 gen_;
    std::uniform_real_distribution<double> unif_{0.0, 1.0};
    std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace waistlab
