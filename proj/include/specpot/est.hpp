#pragma once

#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "specpot/errors.hpp"
#include "specpot/format.hpp"
#include "specpot/spectral.hpp"
#include "specpot/system.hpp"
#include "specpot/tentropy.hpp"
#include "specpot/transfer.hpp"

namespace specpot {

// Configuration of an entropy-statistic experiment. The neighborhood of mu is
// the half-space {nu : nu[phi_star] > threshold} selected by a near-optimal
// witness phi_star, so membership of an empirical measure reduces to a
// Birkhoff average test.
template <typename Scalar>
struct EstConfig {
    Measure<Scalar> mu;
    double eps;
    std::vector<int> n_range;
    Potential<Scalar> phi_star;
    Scalar tau;          // tau(mu); may be -inf
    Scalar rate_base;    // tau when finite, else -1/eps
    Scalar lambda_hat;   // lambda(phi_star), or its finite surrogate when -inf
    Scalar threshold;    // lambda_hat - rate_base - eps/3; always finite
};

template <typename Scalar>
struct EstRow {
    int n;
    int set_size;
    Scalar log_norm;  // log ||A^n chi_n||; -inf when the iterate vanishes
    Scalar rate;      // log_norm / n
    Scalar bound;     // rate_base + eps + log(c_estimate)/n
};

template <typename Scalar>
struct EstReport {
    std::vector<EstRow<Scalar>> rows;
    Scalar c_estimate;
    Scalar log_c_estimate;
    bool pass;
};

namespace detail {

inline std::vector<int> default_n_range(int n_max = 40) {
    std::vector<int> out(static_cast<std::size_t>(n_max));
    std::iota(out.begin(), out.end(), 1);
    return out;
}

// log ||M^k z||_inf for k = 1..n_max, computed by log-domain matvecs so that
// arbitrary magnitudes are safe; logz holds the entrywise log of the start.
template <typename Scalar>
std::vector<Scalar> log_iterate_norms(const DenseMatrix<Scalar>& logm,
                                      Potential<Scalar> logz, int n_max) {
    std::vector<Scalar> out;
    out.reserve(static_cast<std::size_t>(n_max));
    const Eigen::Index n = logm.rows();
    Potential<Scalar> next(n);
    for (int step = 0; step < n_max; ++step) {
        for (Eigen::Index x = 0; x < n; ++x) {
            Scalar m = -std::numeric_limits<Scalar>::infinity();
            for (Eigen::Index y = 0; y < n; ++y)
                m = std::max(m, logm(x, y) + logz[y]);
            if (m == -std::numeric_limits<Scalar>::infinity()) {
                next[x] = m;
                continue;
            }
            Scalar s = Scalar(0);
            for (Eigen::Index y = 0; y < n; ++y) {
                const Scalar t = logm(x, y) + logz[y];
                if (std::isfinite(static_cast<double>(t)))
                    s += std::exp(t - m);
            }
            next[x] = m + std::log(s);
        }
        logz = next;
        out.push_back(logz.maxCoeff());
    }
    return out;
}

}  // namespace detail

// Picks the witness and threshold for the half-space neighborhood. When tau
// is -inf the rate target becomes -1/eps; a nilpotent lambda(phi_star) is
// replaced by a finite surrogate chosen so that every empirical average
// clears the threshold and the norm-bound chain stays valid.
template <typename Scalar>
EstConfig<Scalar> build_neighborhood(const TransferOperator<Scalar>& op,
                                     const Measure<Scalar>& mu, double eps,
                                     std::vector<int> n_range = detail::default_n_range()) {
    const auto& sys = op.system();
    if (eps <= 0)
        throw ArgumentError("build_neighborhood: eps must be positive");
    if (!is_invariant(sys, mu, 1e-10))
        throw DomainError("build_neighborhood: measure is not invariant");
    if (n_range.empty())
        throw ArgumentError("build_neighborhood: empty n range");

    const auto legendre = tau_legendre(op, mu);
    const Scalar tau = legendre.tau;
    const bool finite = tau != -std::numeric_limits<Scalar>::infinity();
    const Scalar rate_base = finite ? tau : Scalar(-1.0 / eps);
    Potential<Scalar> phi_star =
        legendre.witness_phi.value_or(Potential<Scalar>::Zero(sys.points()));
    const Scalar lam_star = spectral_potential(op, phi_star).lambda;
    if (!(static_cast<double>(lam_star - mu(phi_star)) <
          static_cast<double>(rate_base) + eps / 3))
        throw PostconditionError("build_neighborhood: witness misses the eps/3 margin");

    EstConfig<Scalar> cfg{mu,  eps, std::move(n_range), std::move(phi_star),
                          tau, rate_base, Scalar(0), Scalar(0)};
    if (lam_star != -std::numeric_limits<Scalar>::infinity()) {
        cfg.lambda_hat = lam_star;
        cfg.threshold = lam_star - rate_base - Scalar(eps / 3);
    } else {
        // every point belongs to X_n(O(mu)); sit the threshold strictly below
        // all Birkhoff averages in range
        Scalar lowest = std::numeric_limits<Scalar>::infinity();
        for (int n : cfg.n_range)
            lowest = std::min(lowest,
                              birkhoff_sum(sys, cfg.phi_star, n).minCoeff() / Scalar(n));
        cfg.threshold = lowest - Scalar(1);
        cfg.lambda_hat = cfg.threshold + rate_base + Scalar(eps / 3);
    }
    return cfg;
}

// Exact indicator of X_n(O(mu)) for the half-space neighborhood:
// chi_n(x) = 1 iff S_n phi_star(x) > n * threshold.
template <typename Scalar, typename Derived>
Potential<Scalar> indicator_set(const FiniteSystem& sys,
                                const Eigen::MatrixBase<Derived>& phi_star, Scalar threshold,
                                int n) {
    if (n < 1)
        throw ArgumentError("indicator_set: n must be positive");
    const Potential<Scalar> sums = birkhoff_sum(sys, phi_star, n);
    Potential<Scalar> chi(sys.points());
    for (Eigen::Index x = 0; x < sys.points(); ++x)
        chi[x] = sums[x] > Scalar(n) * threshold ? Scalar(1) : Scalar(0);
    return chi;
}

// Runs the experiment: per n the filtered norm ||A^n chi_n|| and its rate,
// the exhibited constant c = max_n ||A_{phi*}^n|| e^{-n(lambda_hat + eps/2)},
// and the per-row bound rate <= rate_base + eps + log(c)/n.
template <typename Scalar>
EstReport<Scalar> est_rate_table(const TransferOperator<Scalar>& op,
                                 const EstConfig<Scalar>& cfg) {
    const auto& sys = op.system();
    detail::require_length(sys, cfg.mu.size(), "est_rate_table");
    if (cfg.n_range.empty())
        throw ArgumentError("est_rate_table: empty n range");
    const int n_max = *std::max_element(cfg.n_range.begin(), cfg.n_range.end());

    const DenseMatrix<Scalar> log_plain = detail::log_of_matrix(op.matrix());
    const DenseMatrix<Scalar> log_twisted = detail::log_twisted(op, cfg.phi_star);
    const auto twisted_norms = detail::log_iterate_norms(
        log_twisted, Potential<Scalar>(Potential<Scalar>::Zero(sys.points())), n_max);

    Scalar log_c = -std::numeric_limits<Scalar>::infinity();
    for (int n : cfg.n_range)
        log_c = std::max(log_c, twisted_norms[static_cast<std::size_t>(n - 1)] -
                                    Scalar(n) * (cfg.lambda_hat + Scalar(cfg.eps / 2)));

    EstReport<Scalar> report;
    report.log_c_estimate = log_c;
    report.c_estimate = std::exp(log_c);
    report.pass = true;
    for (int n : cfg.n_range) {
        const Potential<Scalar> chi = indicator_set(sys, cfg.phi_star, cfg.threshold, n);
        const int set_size = static_cast<int>((chi.array() > Scalar(0)).count());
        Scalar log_norm = -std::numeric_limits<Scalar>::infinity();
        if (set_size > 0) {
            const Potential<Scalar> log_chi =
                (chi.array() > Scalar(0))
                    .select(Potential<Scalar>::Zero(sys.points()),
                            Potential<Scalar>::Constant(
                                sys.points(), -std::numeric_limits<Scalar>::infinity()));
            log_norm = detail::log_iterate_norms(log_plain, log_chi, n).back();
        }
        const Scalar rate = log_norm == -std::numeric_limits<Scalar>::infinity()
                                ? log_norm
                                : log_norm / Scalar(n);
        const Scalar bound = cfg.rate_base + Scalar(cfg.eps) + log_c / Scalar(n);
        report.rows.push_back({n, set_size, log_norm, rate, bound});
        if (!(rate <= bound))
            report.pass = false;
    }
    return report;
}

// CSV serialization: columns n, set_size, log_norm, rate, bound.
template <typename Scalar>
std::string to_csv(const EstReport<Scalar>& report) {
    std::string out = "n,set_size,log_norm,rate,bound\n";
    for (const auto& row : report.rows) {
        out += std::to_string(row.n) + "," + std::to_string(row.set_size) + "," +
               detail::format_real(static_cast<double>(row.log_norm)) + "," +
               detail::format_real(static_cast<double>(row.rate)) + "," +
               detail::format_real(static_cast<double>(row.bound)) + "\n";
    }
    return out;
}

}  // namespace specpot
