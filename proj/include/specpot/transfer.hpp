#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "specpot/errors.hpp"
#include "specpot/random.hpp"
#include "specpot/system.hpp"

namespace specpot {

template <typename Scalar>
struct Triplet {
    Eigen::Index x;  // row: the point receiving mass
    Eigen::Index y;  // column: the point supplying it
    Scalar value;
};

// Positive operator whose matrix support lies on the graph of alpha:
// entries(x, y) > 0 only when alpha(y) = x. On a finite X this support
// constraint is equivalent to the homological identity A((delta f) g) = f Ag.
template <typename Scalar>
class TransferOperator {
  public:
    TransferOperator(FiniteSystem sys, const std::vector<Triplet<Scalar>>& triplets)
        : sys_(std::move(sys)),
          entries_(DenseMatrix<Scalar>::Zero(sys_.points(), sys_.points())) {
        for (const auto& t : triplets) {
            if (t.x < 0 || t.x >= sys_.points() || t.y < 0 || t.y >= sys_.points())
                throw ArgumentError("TransferOperator: triplet index out of range");
            if (t.value < Scalar(0))
                throw PositivityError("TransferOperator: negative entry at (" +
                                      std::to_string(t.x) + ", " + std::to_string(t.y) + ")");
            if (t.value > Scalar(0) && sys_.map(t.y) != t.x)
                throw SupportError("TransferOperator: entry (" + std::to_string(t.x) + ", " +
                                   std::to_string(t.y) + ") is off the graph of alpha");
            entries_(t.x, t.y) += t.value;
        }
    }

    // Bypasses the support invariant. For diagnostics and counterexamples;
    // negative entries are still rejected.
    static TransferOperator unchecked(FiniteSystem sys, DenseMatrix<Scalar> entries) {
        if (entries.rows() != sys.points() || entries.cols() != sys.points())
            throw DimensionError("TransferOperator::unchecked: matrix shape mismatch");
        if ((entries.array() < Scalar(0)).any())
            throw PositivityError("TransferOperator::unchecked: negative entry");
        return TransferOperator(std::move(sys), std::move(entries), 0);
    }

    const DenseMatrix<Scalar>& matrix() const { return entries_; }
    const FiniteSystem& system() const { return sys_; }
    Eigen::Index points() const { return sys_.points(); }

  private:
    TransferOperator(FiniteSystem sys, DenseMatrix<Scalar> entries, int)
        : sys_(std::move(sys)), entries_(std::move(entries)) {}

    FiniteSystem sys_;
    DenseMatrix<Scalar> entries_;
};

using TransferOperatorXd = TransferOperator<double>;

template <typename Scalar>
TransferOperator<Scalar> make_operator(const FiniteSystem& sys,
                                       const std::vector<Triplet<Scalar>>& triplets) {
    return TransferOperator<Scalar>(sys, triplets);
}

template <typename Scalar, typename Derived>
Potential<Scalar> apply(const TransferOperator<Scalar>& op,
                        const Eigen::MatrixBase<Derived>& f) {
    detail::require_length(op.system(), f.size(), "apply");
    return op.matrix() * f;
}

// A_phi f := A(e^phi f): scales column y by e^{phi(y)}, support unchanged.
template <typename Scalar, typename Derived>
TransferOperator<Scalar> twist(const TransferOperator<Scalar>& op,
                               const Eigen::MatrixBase<Derived>& phi) {
    detail::require_length(op.system(), phi.size(), "twist");
    DenseMatrix<Scalar> m = op.matrix();
    for (Eigen::Index y = 0; y < m.cols(); ++y)
        m.col(y) *= std::exp(phi[y]);
    return TransferOperator<Scalar>::unchecked(op.system(), std::move(m));
}

template <typename Scalar, typename Derived>
Potential<Scalar> iterate_apply(const TransferOperator<Scalar>& op,
                                const Eigen::MatrixBase<Derived>& f, int n) {
    detail::require_length(op.system(), f.size(), "iterate_apply");
    if (n < 0)
        throw ArgumentError("iterate_apply: n must be nonnegative");
    Potential<Scalar> v = f;
    for (int i = 0; i < n; ++i)
        v = op.matrix() * v;
    return v;
}

// Induced sup-norm of a positive operator: the max row sum, equal to ||A 1||.
template <typename Scalar>
Scalar operator_norm(const TransferOperator<Scalar>& op) {
    return op.matrix().rowwise().sum().maxCoeff();
}

// Samples seeded pairs (f, g) with sup-norm at most one and tests
// A((delta f) g) = f (A g). Validated operators satisfy this exactly;
// the check exists so unchecked matrices can be probed.
template <typename Scalar>
bool check_homological(const TransferOperator<Scalar>& op, int trials, std::uint64_t seed,
                       double tol) {
    if (trials < 1)
        throw ArgumentError("check_homological: trials must be positive");
    Rng rng(seed);
    const auto& sys = op.system();
    for (int t = 0; t < trials; ++t) {
        const Potential<Scalar> f = rng.potential<Scalar>(sys.points(), 1.0);
        const Potential<Scalar> g = rng.potential<Scalar>(sys.points(), 1.0);
        const Potential<Scalar> lhs =
            apply(op, (delta_map(sys, f).array() * g.array()).matrix());
        const Potential<Scalar> rhs = (f.array() * apply(op, g).array()).matrix();
        if (static_cast<double>((lhs - rhs).template lpNorm<Eigen::Infinity>()) > tol)
            return false;
    }
    return true;
}

// The n-fold homological identity: A_phi^n f = A^n(e^{S_n phi} f).
template <typename Scalar, typename D1, typename D2>
bool check_twist_iterate(const TransferOperator<Scalar>& op, const Eigen::MatrixBase<D1>& phi_expr,
                         const Eigen::MatrixBase<D2>& f_expr, int n, double tol) {
    if (n < 1)
        throw ArgumentError("check_twist_iterate: n must be positive");
    const Potential<Scalar> phi = phi_expr;
    const Potential<Scalar> f = f_expr;
    const Potential<Scalar> lhs = iterate_apply(twist(op, phi), f, n);
    const Potential<Scalar> weighted =
        (birkhoff_sum(op.system(), phi, n).array().exp() * f.array()).matrix();
    const Potential<Scalar> rhs = iterate_apply(op, weighted, n);
    const double scale = 1.0 + static_cast<double>(f.template lpNorm<Eigen::Infinity>()) +
                         static_cast<double>(lhs.template lpNorm<Eigen::Infinity>());
    return static_cast<double>((lhs - rhs).template lpNorm<Eigen::Infinity>()) <= tol * scale;
}

}  // namespace specpot
