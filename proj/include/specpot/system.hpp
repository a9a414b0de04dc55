#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "specpot/errors.hpp"
#include "specpot/random.hpp"

namespace specpot {

template <typename Scalar>
using Potential = Eigen::Vector<Scalar, Eigen::Dynamic>;

template <typename Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using PotentialXd = Potential<double>;

// The pair (X, alpha): X is {0, ..., n-1}, alpha a total single-valued map on it.
class FiniteSystem {
  public:
    explicit FiniteSystem(std::vector<Eigen::Index> alpha) : alpha_(std::move(alpha)) {
        if (alpha_.empty())
            throw ArgumentError("FiniteSystem: need at least one point");
        const auto n = static_cast<Eigen::Index>(alpha_.size());
        for (Eigen::Index x = 0; x < n; ++x)
            if (alpha_[x] < 0 || alpha_[x] >= n)
                throw ArgumentError("FiniteSystem: alpha[" + std::to_string(x) +
                                    "] out of range");
    }

    Eigen::Index points() const { return static_cast<Eigen::Index>(alpha_.size()); }
    Eigen::Index map(Eigen::Index x) const { return alpha_[x]; }
    const std::vector<Eigen::Index>& alpha() const { return alpha_; }

    bool operator==(const FiniteSystem& other) const { return alpha_ == other.alpha_; }

  private:
    std::vector<Eigen::Index> alpha_;
};

namespace detail {

inline void require_length(const FiniteSystem& sys, Eigen::Index len, const char* who) {
    if (len != sys.points())
        throw DimensionError(std::string(who) + ": length " + std::to_string(len) +
                             " does not match system size " + std::to_string(sys.points()));
}

}  // namespace detail

// Composition endomorphism: (delta f)(x) = f(alpha(x)).
template <typename Derived>
Potential<typename Derived::Scalar> delta_map(const FiniteSystem& sys,
                                              const Eigen::MatrixBase<Derived>& f) {
    detail::require_length(sys, f.size(), "delta_map");
    Potential<typename Derived::Scalar> out(sys.points());
    for (Eigen::Index x = 0; x < sys.points(); ++x)
        out[x] = f[sys.map(x)];
    return out;
}

// Trajectory sum phi + delta phi + ... + delta^{n-1} phi.
template <typename Derived>
Potential<typename Derived::Scalar> birkhoff_sum(const FiniteSystem& sys,
                                                 const Eigen::MatrixBase<Derived>& phi,
                                                 int n) {
    using Scalar = typename Derived::Scalar;
    detail::require_length(sys, phi.size(), "birkhoff_sum");
    if (n < 1)
        throw ArgumentError("birkhoff_sum: n must be positive");
    Potential<Scalar> sum = phi;
    for (int i = 1; i < n; ++i)
        sum = phi + delta_map(sys, sum);
    return sum;
}

// Probability vector on X. Construction rejects bad data instead of repairing it.
template <typename Scalar>
class Measure {
  public:
    static constexpr double kMassTolerance = 1e-12;

    explicit Measure(Potential<Scalar> weights) : weights_(std::move(weights)) {
        if (weights_.size() == 0)
            throw NormalizationError("Measure: empty weight vector");
        for (Eigen::Index i = 0; i < weights_.size(); ++i) {
            if (!std::isfinite(static_cast<double>(weights_[i])))
                throw NormalizationError("Measure: non-finite weight at " + std::to_string(i));
            if (weights_[i] < Scalar(0))
                throw NormalizationError("Measure: negative weight at " + std::to_string(i));
        }
        const double mass = static_cast<double>(weights_.sum());
        if (std::abs(mass - 1.0) > kMassTolerance)
            throw NormalizationError("Measure: total mass " + std::to_string(mass) +
                                     " differs from 1 beyond 1e-12");
    }

    static Measure point_mass(Eigen::Index n, Eigen::Index x) {
        Potential<Scalar> w = Potential<Scalar>::Zero(n);
        w[x] = Scalar(1);
        return Measure(std::move(w));
    }

    static Measure uniform(Eigen::Index n) {
        return Measure(Potential<Scalar>::Constant(n, Scalar(1) / Scalar(n)));
    }

    const Potential<Scalar>& weights() const { return weights_; }
    Eigen::Index size() const { return weights_.size(); }
    Scalar operator[](Eigen::Index i) const { return weights_[i]; }

    // pairing mu[f]
    template <typename Derived>
    Scalar operator()(const Eigen::MatrixBase<Derived>& f) const {
        if (f.size() != weights_.size())
            throw DimensionError("Measure pairing: dimension mismatch");
        return weights_.dot(f);
    }

  private:
    Potential<Scalar> weights_;
};

using MeasureXd = Measure<double>;

// Adjoint of delta: mass of each point flows to its image.
template <typename Scalar>
Measure<Scalar> pushforward(const FiniteSystem& sys, const Measure<Scalar>& mu) {
    detail::require_length(sys, mu.size(), "pushforward");
    Potential<Scalar> out = Potential<Scalar>::Zero(sys.points());
    for (Eigen::Index y = 0; y < sys.points(); ++y)
        out[sys.map(y)] += mu[y];
    return Measure<Scalar>(std::move(out));
}

template <typename Scalar>
bool is_invariant(const FiniteSystem& sys, const Measure<Scalar>& mu, double tol) {
    if (tol <= 0)
        throw ArgumentError("is_invariant: tol must be positive");
    const Measure<Scalar> pushed = pushforward(sys, mu);
    return static_cast<double>((pushed.weights() - mu.weights())
                                   .template lpNorm<Eigen::Infinity>()) <= tol;
}

// Uniform mass on the length-n trajectory of x.
template <typename Scalar = double>
Measure<Scalar> empirical_measure(const FiniteSystem& sys, Eigen::Index x, int n) {
    if (x < 0 || x >= sys.points())
        throw ArgumentError("empirical_measure: point index out of range");
    if (n < 1)
        throw ArgumentError("empirical_measure: n must be positive");
    Potential<Scalar> w = Potential<Scalar>::Zero(sys.points());
    Eigen::Index p = x;
    for (int i = 0; i < n; ++i) {
        w[p] += Scalar(1) / Scalar(n);
        p = sys.map(p);
    }
    return Measure<Scalar>(std::move(w));
}

namespace detail {

// Cycles of the functional graph y -> alpha(y), listed by smallest member.
inline std::vector<std::vector<Eigen::Index>> map_cycles(const FiniteSystem& sys) {
    const Eigen::Index n = sys.points();
    std::vector<int> state(static_cast<std::size_t>(n), 0);  // 0 new, 1 on path, 2 done
    std::vector<std::vector<Eigen::Index>> cycles;
    std::vector<Eigen::Index> path;
    for (Eigen::Index start = 0; start < n; ++start) {
        if (state[start] != 0)
            continue;
        path.clear();
        Eigen::Index x = start;
        while (state[x] == 0) {
            state[x] = 1;
            path.push_back(x);
            x = sys.map(x);
        }
        if (state[x] == 1) {  // closed a new cycle inside the current path
            auto it = std::find(path.begin(), path.end(), x);
            cycles.emplace_back(it, path.end());
        }
        for (Eigen::Index y : path)
            state[y] = 2;
    }
    for (auto& c : cycles)
        std::rotate(c.begin(), std::min_element(c.begin(), c.end()), c.end());
    std::sort(cycles.begin(), cycles.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });
    return cycles;
}

}  // namespace detail

// Extreme points of {mu : pushforward(mu) = mu}: the uniform measures on the
// cycles of alpha. Disjoint supports make them the vertex set of the polytope.
template <typename Scalar = double>
std::vector<Measure<Scalar>> invariant_measures(const FiniteSystem& sys) {
    std::vector<Measure<Scalar>> out;
    for (const auto& cycle : detail::map_cycles(sys)) {
        Potential<Scalar> w = Potential<Scalar>::Zero(sys.points());
        for (Eigen::Index y : cycle)
            w[y] = Scalar(1) / Scalar(cycle.size());
        out.push_back(Measure<Scalar>(std::move(w)));
    }
    return out;
}

// Finite family of nonnegative functions summing pointwise to one.
// Members are the rows of an k x n matrix.
template <typename Scalar>
class PartitionOfUnity {
  public:
    static constexpr double kSumTolerance = 1e-12;

    explicit PartitionOfUnity(DenseMatrix<Scalar> members) : members_(std::move(members)) {
        if (members_.rows() < 1 || members_.cols() < 1)
            throw ArgumentError("PartitionOfUnity: need at least one member");
        if ((members_.array() < Scalar(0)).any())
            throw ArgumentError("PartitionOfUnity: negative member entry");
        for (Eigen::Index x = 0; x < members_.cols(); ++x)
            if (std::abs(static_cast<double>(members_.col(x).sum()) - 1.0) > kSumTolerance)
                throw ArgumentError("PartitionOfUnity: column " + std::to_string(x) +
                                    " does not sum to 1");
    }

    Eigen::Index size() const { return members_.rows(); }
    Eigen::Index points() const { return members_.cols(); }
    Potential<Scalar> member(Eigen::Index i) const { return members_.row(i).transpose(); }
    const DenseMatrix<Scalar>& members() const { return members_; }

  private:
    DenseMatrix<Scalar> members_;
};

using PartitionOfUnityXd = PartitionOfUnity<double>;

// The finest partition: one indicator per point.
template <typename Scalar = double>
PartitionOfUnity<Scalar> point_partition(const FiniteSystem& sys) {
    return PartitionOfUnity<Scalar>(DenseMatrix<Scalar>::Identity(sys.points(), sys.points()));
}

// k seeded nonnegative rows, columns renormalized to unit sum.
template <typename Scalar = double>
PartitionOfUnity<Scalar> random_partition(const FiniteSystem& sys, int k, std::uint64_t seed) {
    if (k < 1)
        throw ArgumentError("random_partition: k must be positive");
    Rng rng(seed);
    DenseMatrix<Scalar> rows(k, sys.points());
    for (Eigen::Index i = 0; i < rows.rows(); ++i)
        for (Eigen::Index x = 0; x < rows.cols(); ++x)
            rows(i, x) = static_cast<Scalar>(1.0 - rng.uniform01());  // entries in (0, 1]
    for (Eigen::Index x = 0; x < rows.cols(); ++x)
        rows.col(x) /= rows.col(x).sum();
    return PartitionOfUnity<Scalar>(std::move(rows));
}

}  // namespace specpot
