#pragma once

#include <limits>
#include <string>
#include <vector>

#include "specpot/errors.hpp"
#include "specpot/spectral.hpp"
#include "specpot/system.hpp"
#include "specpot/tentropy.hpp"
#include "specpot/transfer.hpp"

namespace specpot {

template <typename Scalar>
struct DualityReport {
    Scalar lambda;
    Measure<Scalar> maximizer;
    Scalar tau_at_maximizer;
    Scalar gap;  // lambda - (tau + mu[phi]); positive means duality shortfall
    Potential<Scalar> phi;
    bool success;
};

// Round trip through the duality: the Gibbs subgradient at phi should close
// lambda(phi) = tau(mu*) + mu*[phi].
template <typename Scalar, typename Derived>
DualityReport<Scalar> duality_check(const TransferOperator<Scalar>& op,
                                    const Eigen::MatrixBase<Derived>& phi_expr,
                                    double tol = 1e-5) {
    if (tol <= 0)
        throw ArgumentError("duality_check: tol must be positive");
    const Potential<Scalar> phi = phi_expr;
    const Scalar lambda = spectral_potential(op, phi, std::min(tol * 1e-3, 1e-10)).lambda;
    Measure<Scalar> maximizer = gibbs_gradient(op, phi);
    const Scalar tau = tau_legendre(op, maximizer).tau;
    const Scalar gap = lambda - (tau + maximizer(phi));
    return DualityReport<Scalar>{lambda, std::move(maximizer), tau, gap, phi,
                                 std::abs(static_cast<double>(gap)) <= tol};
}

// max over the candidate invariant measures of tau(mu) + mu[phi]; never above
// lambda(phi), with equality once the Gibbs maximizer is among the candidates.
template <typename Scalar, typename Derived>
Scalar lambda_from_tau(const TransferOperator<Scalar>& op,
                       const Eigen::MatrixBase<Derived>& phi_expr,
                       const std::vector<Measure<Scalar>>& candidates) {
    if (candidates.empty())
        throw ArgumentError("lambda_from_tau: empty candidate list");
    const Potential<Scalar> phi = phi_expr;
    Scalar best = -std::numeric_limits<Scalar>::infinity();
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (!is_invariant(op.system(), candidates[i], 1e-8))
            throw DomainError("lambda_from_tau: candidate " + std::to_string(i) +
                              " is not invariant");
        const Scalar tau = tau_legendre(op, candidates[i]).tau;
        const Scalar value = tau == -std::numeric_limits<Scalar>::infinity()
                                 ? tau
                                 : tau + candidates[i](phi);
        best = std::max(best, value);
    }
    return best;
}

}  // namespace specpot
