#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "specpot/errors.hpp"
#include "specpot/spectral.hpp"
#include "specpot/system.hpp"
#include "specpot/transfer.hpp"

namespace specpot {

template <typename Scalar>
struct InnerSupResult {
    Scalar value;                  // tau_n(mu, D); -inf when the convention triggers
    Measure<Scalar> optimizer;     // the maximizing probe measure m*
    std::vector<Scalar> c_table;   // per member: m*[A^n g]
    Scalar certificate;            // sup over the simplex of the first-order form; 1 at optimum
    int iterations;
};

enum class TauRoute { direct, legendre };

template <typename Scalar>
struct DirectTableRow {
    int n;
    int partition;
    Scalar value;
    Scalar value_over_n;
};

template <typename Scalar>
struct TauDiagnostics {
    int iterations = 0;
    double final_gradient_norm = 0.0;
    std::vector<DirectTableRow<Scalar>> table;  // filled by the direct route
};

template <typename Scalar>
struct TauResult {
    Scalar tau;
    TauRoute route;
    std::optional<Potential<Scalar>> witness_phi;
    TauDiagnostics<Scalar> diagnostics;
};

struct TauOptions {
    double tol = 1e-8;
    int max_iters = 10000;
    double divergence_bound = 1e6;
};

namespace detail {

// the single admissible weight of column y
template <typename Scalar>
Scalar point_weight(const TransferOperator<Scalar>& op, Eigen::Index y) {
    return op.matrix()(op.system().map(y), y);
}

// Cycles of alpha restricted to points of positive weight. These are the
// atoms lambda is built from: lambda(phi) is the best cycle average of
// log weight + phi, so the uniform measure on a dominant cycle is a
// subgradient of lambda at phi.
template <typename Scalar>
std::vector<std::vector<Eigen::Index>> positive_cycles(const TransferOperator<Scalar>& op) {
    const auto& sys = op.system();
    const Eigen::Index n = sys.points();
    std::vector<int> state(n, 0);
    std::vector<std::vector<Eigen::Index>> cycles;
    for (Eigen::Index start = 0; start < n; ++start) {
        if (state[start] != 0)
            continue;
        std::vector<Eigen::Index> path;
        Eigen::Index x = start;
        while (state[x] == 0 && point_weight(op, x) > Scalar(0)) {
            state[x] = 1;
            path.push_back(x);
            x = sys.map(x);
        }
        if (!path.empty() && state[x] == 1) {
            auto it = std::find(path.begin(), path.end(), x);
            cycles.emplace_back(it, path.end());
        }
        for (Eigen::Index y : path)
            state[y] = 2;
    }
    std::sort(cycles.begin(), cycles.end());
    return cycles;
}

template <typename Scalar>
Scalar cycle_mean(const TransferOperator<Scalar>& op, const std::vector<Eigen::Index>& cycle,
                  const Potential<Scalar>& phi) {
    Scalar sum = Scalar(0);
    for (Eigen::Index y : cycle)
        sum += std::log(point_weight(op, y)) + phi[y];
    return sum / Scalar(cycle.size());
}

template <typename Scalar>
Potential<Scalar> descent_subgradient(const TransferOperator<Scalar>& op,
                                      const Potential<Scalar>& phi,
                                      const std::vector<std::vector<Eigen::Index>>& cycles,
                                      bool irreducible) {
    if (irreducible)
        return gibbs_gradient(op, phi).weights();
    std::size_t best = 0;
    Scalar best_mean = -std::numeric_limits<Scalar>::infinity();
    for (std::size_t i = 0; i < cycles.size(); ++i) {
        const Scalar mean = cycle_mean(op, cycles[i], phi);
        if (mean > best_mean) {
            best_mean = mean;
            best = i;
        }
    }
    Potential<Scalar> g = Potential<Scalar>::Zero(op.points());
    for (Eigen::Index y : cycles[best])
        g[y] = Scalar(1) / Scalar(cycles[best].size());
    return g;
}

}  // namespace detail

// sup over probe measures m of sum_g mu[g] log(m[A^n g] / mu[g]), solved by
// multiplicative updates. Convergence is declared by the first-order
// certificate: the supremum over the simplex of
// sum_{mu[g]>0} mu[g] m[A^n g] / C_n(g) equals 1 exactly at the optimum and
// is attained at a vertex, so it is the max over points of the score vector.
template <typename Scalar>
InnerSupResult<Scalar> inner_sup(const TransferOperator<Scalar>& op, const Measure<Scalar>& mu,
                                 const PartitionOfUnity<Scalar>& part, int n, double tol = 1e-9,
                                 int max_iters = 200000) {
    const Eigen::Index points = op.points();
    detail::require_length(op.system(), mu.size(), "inner_sup");
    detail::require_length(op.system(), part.points(), "inner_sup");
    if (n < 1)
        throw ArgumentError("inner_sup: n must be positive");
    if (tol <= 0)
        throw ArgumentError("inner_sup: tol must be positive");

    const Eigen::Index k = part.size();
    Potential<Scalar> mu_g(k);
    DenseMatrix<Scalar> images(k, points);  // row i holds A^n g_i
    for (Eigen::Index i = 0; i < k; ++i) {
        mu_g[i] = mu(part.member(i));
        images.row(i) = iterate_apply(op, part.member(i), n).transpose();
    }

    InnerSupResult<Scalar> result{Scalar(0), Measure<Scalar>::uniform(points), {}, Scalar(0), 0};
    result.c_table.assign(static_cast<std::size_t>(k), Scalar(0));

    for (Eigen::Index i = 0; i < k; ++i) {
        if (mu_g[i] > Scalar(0) && images.row(i).maxCoeff() <= Scalar(0)) {
            // mu charges a member annihilated by A^n
            result.value = -std::numeric_limits<Scalar>::infinity();
            result.certificate = std::numeric_limits<Scalar>::quiet_NaN();
            return result;
        }
    }

    Potential<Scalar> m = Potential<Scalar>::Constant(points, Scalar(1) / Scalar(points));
    Potential<Scalar> paired(k);
    int it = 0;
    bool converged = false;
    for (; it < max_iters; ++it) {
        Potential<Scalar> score = Potential<Scalar>::Zero(points);
        for (Eigen::Index i = 0; i < k; ++i) {
            if (mu_g[i] <= Scalar(0))
                continue;
            paired[i] = images.row(i).dot(m);
            score += (mu_g[i] / paired[i]) * images.row(i).transpose();
        }
        result.certificate = score.maxCoeff();
        if (std::abs(static_cast<double>(result.certificate - Scalar(1))) <= tol) {
            converged = true;
            break;
        }
        m = (m.array() * score.array()).matrix();
        m /= m.sum();
    }

    Scalar value = Scalar(0);
    for (Eigen::Index i = 0; i < k; ++i) {
        result.c_table[static_cast<std::size_t>(i)] = images.row(i).dot(m);
        if (mu_g[i] > Scalar(0))
            value += mu_g[i] * std::log(result.c_table[static_cast<std::size_t>(i)] / mu_g[i]);
    }
    result.value = value;
    result.optimizer = Measure<Scalar>((m / m.sum()).eval());
    result.iterations = it;
    if (!converged)
        throw ConvergenceError("inner_sup: certificate did not reach 1 within budget",
                               static_cast<double>(value));
    return result;
}

// t-entropy by the defining formula: min over n <= n_max and the searched
// partitions of inner_sup / n. A certified upper bound of the full infimum.
template <typename Scalar>
TauResult<Scalar> tau_direct(const TransferOperator<Scalar>& op, const Measure<Scalar>& mu,
                             int n_max = 8,
                             const std::vector<PartitionOfUnity<Scalar>>& extra_partitions = {}) {
    if (n_max < 1)
        throw ArgumentError("tau_direct: n_max must be positive");
    if (!is_invariant(op.system(), mu, 1e-10))
        throw DomainError("tau_direct: measure is not invariant; tau_legendre handles that case");

    std::vector<PartitionOfUnity<Scalar>> partitions;
    partitions.push_back(point_partition<Scalar>(op.system()));
    partitions.insert(partitions.end(), extra_partitions.begin(), extra_partitions.end());

    TauResult<Scalar> result;
    result.route = TauRoute::direct;
    result.tau = std::numeric_limits<Scalar>::infinity();
    for (int n = 1; n <= n_max; ++n) {
        for (std::size_t p = 0; p < partitions.size(); ++p) {
            const auto inner = inner_sup(op, mu, partitions[p], n);
            const Scalar per_n = inner.value / Scalar(n);
            result.diagnostics.table.push_back({n, static_cast<int>(p), inner.value, per_n});
            result.diagnostics.iterations += inner.iterations;
            if (per_n < result.tau)
                result.tau = per_n;
        }
    }
    return result;
}

// Coboundary direction with positive pairing against a non-invariant measure:
// d = s (delta e_j - e_j) where j maximizes the invariance defect.
template <typename Scalar>
Potential<Scalar> divergence_direction(const FiniteSystem& sys, const Measure<Scalar>& mu) {
    const Potential<Scalar> defect = pushforward(sys, mu).weights() - mu.weights();
    Eigen::Index j = 0;
    for (Eigen::Index i = 1; i < defect.size(); ++i)
        if (std::abs(defect[i]) > std::abs(defect[j]))
            j = i;
    if (std::abs(static_cast<double>(defect[j])) <= 1e-10)
        throw NoDirectionError("divergence_direction: measure is invariant");
    Potential<Scalar> d = Potential<Scalar>::Zero(sys.points());
    for (Eigen::Index x = 0; x < sys.points(); ++x)
        if (sys.map(x) == j)
            d[x] += Scalar(1);  // delta e_j
    d[j] -= Scalar(1);
    if (defect[j] < Scalar(0))
        d = -d;
    return d;
}

namespace detail {

// Certify the -inf branch: walk out along a direction of strictly positive
// pairing until the objective drops below -bound. lambda is constant along
// the direction, so the walk terminates.
template <typename Scalar>
TauResult<Scalar> certify_divergence(const TransferOperator<Scalar>& op,
                                     const Measure<Scalar>& mu, const Potential<Scalar>& d,
                                     const TauOptions& opts) {
    TauResult<Scalar> result;
    result.route = TauRoute::legendre;
    result.tau = -std::numeric_limits<Scalar>::infinity();
    const Scalar pairing = mu(d);
    Scalar t = (Scalar(std::abs(opts.divergence_bound)) + Scalar(1)) / pairing;
    for (int attempt = 0; attempt < 80; ++attempt) {
        const Potential<Scalar> phi = t * d;
        const Scalar lambda = spectral_potential(op, phi).lambda;
        const Scalar objective = lambda - mu(phi);
        ++result.diagnostics.iterations;
        if (objective < Scalar(-opts.divergence_bound)) {
            result.witness_phi = phi;
            return result;
        }
        t *= Scalar(2);
    }
    throw ConvergenceError("tau_legendre: objective failed to certify divergence",
                           -opts.divergence_bound);
}

}  // namespace detail

// t-entropy as inf over phi of lambda(phi) - mu[phi]. Invariant measures get
// a projected subgradient descent on the mean-zero gauge with Polyak steps
// against the certified dual value; measures that are not invariant, or that
// charge a zero-weight point, get a certified walk to -inf. Any iterate is a
// valid upper bound, and the reported tau is the best objective evaluation.
template <typename Scalar>
TauResult<Scalar> tau_legendre(const TransferOperator<Scalar>& op, const Measure<Scalar>& mu,
                               const TauOptions& opts = {}) {
    const auto& sys = op.system();
    detail::require_length(sys, mu.size(), "tau_legendre");

    if (!is_invariant(sys, mu, 1e-10))
        return detail::certify_divergence(op, mu, divergence_direction(sys, mu), opts);

    const Scalar lambda0 =
        spectral_potential(op, Potential<Scalar>::Zero(sys.points())).lambda;
    if (lambda0 == -std::numeric_limits<Scalar>::infinity()) {
        // nilpotent operator: the objective is identically -inf
        TauResult<Scalar> result;
        result.route = TauRoute::legendre;
        result.tau = -std::numeric_limits<Scalar>::infinity();
        result.witness_phi = Potential<Scalar>::Zero(sys.points());
        return result;
    }

    // invariant mass on a zero-weight point: lambda ignores that coordinate,
    // so the objective falls without bound along its indicator
    for (Eigen::Index y = 0; y < sys.points(); ++y) {
        if (mu[y] > Scalar(1e-12) && detail::point_weight(op, y) <= Scalar(0)) {
            Potential<Scalar> d = Potential<Scalar>::Zero(sys.points());
            d[y] = Scalar(1);
            return detail::certify_divergence(op, mu, d, opts);
        }
    }

    // dual value: the pairing of mu with the log weights; exact because
    // distinct cycles are disjoint
    Scalar target = Scalar(0);
    for (Eigen::Index y = 0; y < sys.points(); ++y)
        if (mu[y] > Scalar(1e-15))
            target += mu[y] * std::log(detail::point_weight(op, y));

    const auto cycles = detail::positive_cycles(op);
    const bool irreducible =
        detail::strongly_connected(detail::adjacency_of_log(detail::log_of_matrix(op.matrix())));
    const double lambda_tol = std::min(opts.tol * 1e-2, 1e-10);

    TauResult<Scalar> result;
    result.route = TauRoute::legendre;
    Potential<Scalar> phi = Potential<Scalar>::Zero(sys.points());
    Scalar best = std::numeric_limits<Scalar>::infinity();
    Potential<Scalar> best_phi = phi;

    for (int it = 0; it < opts.max_iters; ++it) {
        const Scalar objective = spectral_potential(op, phi, lambda_tol).lambda - mu(phi);
        if (objective < best) {
            best = objective;
            best_phi = phi;
        }
        Potential<Scalar> grad =
            detail::descent_subgradient(op, phi, cycles, irreducible) - mu.weights();
        grad.array() -= grad.mean();  // mean-zero gauge
        const double gnorm = static_cast<double>(grad.norm());
        result.diagnostics.iterations = it + 1;
        result.diagnostics.final_gradient_norm = gnorm;
        if (static_cast<double>(best - target) <= opts.tol || gnorm <= opts.tol) {
            result.tau = best;
            result.witness_phi = best_phi;
            return result;
        }
        const Scalar step = (objective - target) / Scalar(gnorm * gnorm);
        phi -= step * grad;
        phi.array() -= phi.mean();
    }
    throw ConvergenceError("tau_legendre: descent did not close the dual gap",
                           static_cast<double>(best));
}

// The witness family of the finiteness argument:
// phi_eps = (1/n) log( sum_{mu[g]>0} (mu[g]/C_n(g)) g + sum_{mu[g]=0} eps g ).
// Asserts the two bounds it exists for: n lambda(phi_eps) <= eps ||A^n|| and
// mu[n phi_eps] >= -tau_n(mu, D).
template <typename Scalar>
Potential<Scalar> phi_eps_witness(const TransferOperator<Scalar>& op, const Measure<Scalar>& mu,
                                  const PartitionOfUnity<Scalar>& part, int n,
                                  const std::vector<Scalar>& c_table, double eps) {
    const auto& sys = op.system();
    detail::require_length(sys, mu.size(), "phi_eps_witness");
    detail::require_length(sys, part.points(), "phi_eps_witness");
    if (n < 1)
        throw ArgumentError("phi_eps_witness: n must be positive");
    if (eps <= 0)
        throw ArgumentError("phi_eps_witness: eps must be positive");
    if (c_table.size() != static_cast<std::size_t>(part.size()))
        throw DimensionError("phi_eps_witness: c_table length does not match the partition");

    Potential<Scalar> arg = Potential<Scalar>::Zero(sys.points());
    Scalar tau_n = Scalar(0);
    for (Eigen::Index i = 0; i < part.size(); ++i) {
        const Potential<Scalar> g = part.member(i);
        const Scalar mass = mu(g);
        if (mass > Scalar(0)) {
            const Scalar c = c_table[static_cast<std::size_t>(i)];
            if (!(c > Scalar(0)))
                throw ArgumentError(
                    "phi_eps_witness: c_table entry for a charged member must be positive");
            arg += (mass / c) * g;
            tau_n += mass * std::log(c / mass);
        } else {
            arg += Scalar(eps) * g;
        }
    }
    if ((arg.array() <= Scalar(0)).any())
        throw DegenerateSupportError("phi_eps_witness: logarithm argument vanishes at some point");
    const Potential<Scalar> phi_eps = (arg.array().log() / Scalar(n)).matrix();

    const Scalar norm_an =
        iterate_apply(op, Potential<Scalar>::Ones(sys.points()), n).maxCoeff();
    const Scalar lam = spectral_potential(op, phi_eps, 1e-11).lambda;
    const double slack = 1e-8 * (1.0 + std::abs(static_cast<double>(tau_n)) +
                                 static_cast<double>(Scalar(eps) * norm_an));
    if (!(static_cast<double>(Scalar(n) * lam) <=
          static_cast<double>(Scalar(eps) * norm_an) + slack))
        throw PostconditionError("phi_eps_witness: spectral bound violated");
    if (!(static_cast<double>(mu((Scalar(n) * phi_eps).eval())) >=
          static_cast<double>(-tau_n) - slack))
        throw PostconditionError("phi_eps_witness: pairing bound violated");
    return phi_eps;
}

}  // namespace specpot
