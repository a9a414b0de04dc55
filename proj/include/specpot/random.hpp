#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Core>

namespace specpot {

// Deterministic random source. mt19937_64 output is fixed by the standard and
// the mapping to doubles below avoids std::uniform_real_distribution, whose
// results vary across standard libraries. Identical seeds give identical
// streams on every platform.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // uniform in [0, 1)
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    Eigen::Index index(Eigen::Index n) {
        return static_cast<Eigen::Index>(engine_() % static_cast<std::uint64_t>(n));
    }

    // vector with entries uniform in [-radius, radius]
    template <typename Scalar = double>
    Eigen::Vector<Scalar, Eigen::Dynamic> potential(Eigen::Index n, double radius) {
        Eigen::Vector<Scalar, Eigen::Dynamic> v(n);
        for (Eigen::Index i = 0; i < n; ++i)
            v[i] = static_cast<Scalar>(uniform(-radius, radius));
        return v;
    }

    // point of the probability simplex with strictly positive coordinates
    template <typename Scalar = double>
    Eigen::Vector<Scalar, Eigen::Dynamic> simplex(Eigen::Index n) {
        Eigen::Vector<Scalar, Eigen::Dynamic> v(n);
        for (Eigen::Index i = 0; i < n; ++i)
            v[i] = static_cast<Scalar>(-std::log(1.0 - uniform01()));
        v /= v.sum();
        return v;
    }

    std::uint64_t raw() { return engine_(); }

  private:
    std::mt19937_64 engine_;
};

}  // namespace specpot
