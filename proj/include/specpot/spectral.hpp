#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "specpot/errors.hpp"
#include "specpot/system.hpp"
#include "specpot/transfer.hpp"

namespace specpot {

template <typename Scalar>
struct SpectralResult {
    Scalar lambda;   // log of the spectral radius; -inf for nilpotent matrices
    int iterations;
    double residual;
};

using SpectralResultXd = SpectralResult<double>;

namespace detail {

template <typename Scalar>
constexpr Scalar neg_inf() {
    return -std::numeric_limits<Scalar>::infinity();
}

// Adjacency of the nonzero pattern. For log matrices "nonzero" means finite.
template <typename Scalar>
std::vector<std::vector<Eigen::Index>> adjacency_of_log(const DenseMatrix<Scalar>& logm) {
    std::vector<std::vector<Eigen::Index>> adj(logm.rows());
    for (Eigen::Index x = 0; x < logm.rows(); ++x)
        for (Eigen::Index y = 0; y < logm.cols(); ++y)
            if (std::isfinite(static_cast<double>(logm(x, y))))
                adj[x].push_back(y);
    return adj;
}

inline bool has_cycle(const std::vector<std::vector<Eigen::Index>>& adj) {
    const auto n = static_cast<Eigen::Index>(adj.size());
    std::vector<Eigen::Index> indegree(n, 0);
    for (const auto& row : adj)
        for (Eigen::Index y : row)
            ++indegree[y];
    std::vector<Eigen::Index> queue;
    for (Eigen::Index x = 0; x < n; ++x)
        if (indegree[x] == 0)
            queue.push_back(x);
    Eigen::Index removed = 0;
    while (!queue.empty()) {
        const Eigen::Index x = queue.back();
        queue.pop_back();
        ++removed;
        for (Eigen::Index y : adj[x])
            if (--indegree[y] == 0)
                queue.push_back(y);
    }
    return removed < n;
}

inline bool strongly_connected(const std::vector<std::vector<Eigen::Index>>& adj) {
    const auto n = static_cast<Eigen::Index>(adj.size());
    if (n == 1)
        return !adj[0].empty();
    std::vector<std::vector<Eigen::Index>> radj(n);
    for (Eigen::Index x = 0; x < n; ++x)
        for (Eigen::Index y : adj[x])
            radj[y].push_back(x);
    auto reaches_all = [n](const std::vector<std::vector<Eigen::Index>>& graph) {
        std::vector<char> seen(n, 0);
        std::vector<Eigen::Index> stack = {0};
        seen[0] = 1;
        Eigen::Index count = 1;
        while (!stack.empty()) {
            const Eigen::Index x = stack.back();
            stack.pop_back();
            for (Eigen::Index y : graph[x])
                if (!seen[y]) {
                    seen[y] = 1;
                    ++count;
                    stack.push_back(y);
                }
        }
        return count == n;
    };
    return reaches_all(adj) && reaches_all(radj);
}

template <typename Scalar>
DenseMatrix<Scalar> log_of_matrix(const DenseMatrix<Scalar>& m) {
    // log(0) = -inf marks structural zeros
    return m.array().log().matrix();
}

// Collatz-Wielandt bracketed power iteration on the shifted matrix M/s + I.
// Valid for irreducible nonnegative matrices; the unit shift removes
// periodicity. Returns log of the spectral radius of M.
template <typename Scalar>
std::optional<SpectralResult<Scalar>> power_cw(const DenseMatrix<Scalar>& m, Scalar log_scale,
                                               double tol, int max_iters) {
    const Eigen::Index n = m.rows();
    const Scalar norm = m.rowwise().sum().maxCoeff();
    if (!(norm > Scalar(0)))
        return std::nullopt;
    DenseMatrix<Scalar> b = m / norm;
    b.diagonal().array() += Scalar(1);
    Potential<Scalar> v = Potential<Scalar>::Constant(n, Scalar(1) / Scalar(n));
    Scalar lo = Scalar(0), hi = Scalar(0);
    for (int it = 1; it <= max_iters; ++it) {
        const Potential<Scalar> w = b * v;
        lo = (w.array() / v.array()).minCoeff();
        hi = (w.array() / v.array()).maxCoeff();
        v = w / w.sum();
        const Scalar rho = (lo + hi) / Scalar(2) - Scalar(1);  // spectral radius of m/norm
        if (rho > Scalar(0) && static_cast<double>(hi - lo) <= 0.5 * tol * static_cast<double>(rho)) {
            SpectralResult<Scalar> out;
            out.lambda = std::log(rho) + std::log(norm) + log_scale;
            out.iterations = it;
            out.residual = static_cast<double>((hi - lo) / rho);
            return out;
        }
    }
    return std::nullopt;
}

// Gelfand iteration ||M^k||^{1/k} with k doubling via repeated squaring and
// norm extraction. Unconditionally valid for nonnegative matrices.
template <typename Scalar>
std::optional<SpectralResult<Scalar>> gelfand_linear(const DenseMatrix<Scalar>& m,
                                                     Scalar log_scale, double tol) {
    const Scalar norm0 = m.rowwise().sum().maxCoeff();
    if (!(norm0 > Scalar(0)))
        return std::nullopt;
    DenseMatrix<Scalar> c = m / norm0;
    Scalar acc = std::log(norm0);  // log ||M^{2^j}|| accumulator
    Scalar lam = acc;
    double diff = std::numeric_limits<double>::infinity();
    double prev_diff = diff;
    for (int j = 1; j <= 60; ++j) {
        c = (c * c).eval();
        const Scalar norm = c.rowwise().sum().maxCoeff();
        if (!(norm > Scalar(0)))
            return std::nullopt;  // underflowed; retry in log domain
        c /= norm;
        acc = Scalar(2) * acc + std::log(norm);
        const Scalar lam_next = acc / Scalar(std::exp2(j));
        prev_diff = diff;
        diff = std::abs(static_cast<double>(lam_next - lam));
        lam = lam_next;
        if (j >= 6 && diff <= 0.25 * tol && prev_diff <= 0.25 * tol)
            return SpectralResult<Scalar>{lam + log_scale, j, diff};
    }
    if (diff <= tol)
        return SpectralResult<Scalar>{lam + log_scale, 60, diff};
    return std::nullopt;
}

template <typename Scalar>
Scalar log_sum_exp_row(const DenseMatrix<Scalar>& logm, Eigen::Index x) {
    Scalar m = neg_inf<Scalar>();
    for (Eigen::Index y = 0; y < logm.cols(); ++y)
        m = std::max(m, logm(x, y));
    if (m == neg_inf<Scalar>())
        return m;
    Scalar s = Scalar(0);
    for (Eigen::Index y = 0; y < logm.cols(); ++y)
        if (std::isfinite(static_cast<double>(logm(x, y))))
            s += std::exp(logm(x, y) - m);
    return m + std::log(s);
}

template <typename Scalar>
Scalar log_norm_inf(const DenseMatrix<Scalar>& logm) {
    Scalar out = neg_inf<Scalar>();
    for (Eigen::Index x = 0; x < logm.rows(); ++x)
        out = std::max(out, log_sum_exp_row(logm, x));
    return out;
}

// log of exp(A)*exp(B) computed entrywise via log-sum-exp; immune to the
// overflow a plain product would hit for extreme entry magnitudes.
template <typename Scalar>
DenseMatrix<Scalar> log_matmul(const DenseMatrix<Scalar>& a, const DenseMatrix<Scalar>& b) {
    const Eigen::Index n = a.rows();
    DenseMatrix<Scalar> out = DenseMatrix<Scalar>::Constant(n, n, neg_inf<Scalar>());
    std::vector<Scalar> terms;
    terms.reserve(static_cast<std::size_t>(n));
    for (Eigen::Index x = 0; x < n; ++x) {
        for (Eigen::Index z = 0; z < n; ++z) {
            terms.clear();
            Scalar m = neg_inf<Scalar>();
            for (Eigen::Index y = 0; y < n; ++y) {
                const Scalar t = a(x, y) + b(y, z);
                if (std::isfinite(static_cast<double>(t))) {
                    terms.push_back(t);
                    m = std::max(m, t);
                }
            }
            if (terms.empty())
                continue;
            Scalar s = Scalar(0);
            for (Scalar t : terms)
                s += std::exp(t - m);
            out(x, z) = m + std::log(s);
        }
    }
    return out;
}

template <typename Scalar>
SpectralResult<Scalar> gelfand_log(const DenseMatrix<Scalar>& logm, double tol) {
    DenseMatrix<Scalar> c = logm;
    Scalar acc = log_norm_inf(c);
    c.array() -= acc;
    Scalar lam = acc;
    double diff = std::numeric_limits<double>::infinity();
    double prev_diff = diff;
    for (int j = 1; j <= 60; ++j) {
        c = log_matmul(c, c);
        const Scalar norm = log_norm_inf(c);
        c.array() -= norm;
        acc = Scalar(2) * acc + norm;
        const Scalar lam_next = acc / Scalar(std::exp2(j));
        prev_diff = diff;
        diff = std::abs(static_cast<double>(lam_next - lam));
        lam = lam_next;
        if (j >= 6 && diff <= 0.25 * tol && prev_diff <= 0.25 * tol)
            return SpectralResult<Scalar>{lam, j, diff};
    }
    if (diff <= tol)
        return SpectralResult<Scalar>{lam, 60, diff};
    throw ConvergenceError("gelfand_log: spectral radius did not settle", static_cast<double>(lam));
}

// Dispatch on structure: exact graph test for nilpotency, bracketed power
// iteration when the pattern is irreducible and well scaled, Gelfand otherwise.
template <typename Scalar>
SpectralResult<Scalar> log_spectral_radius(const DenseMatrix<Scalar>& logm, double tol) {
    const auto adj = adjacency_of_log(logm);
    if (!has_cycle(adj))
        return SpectralResult<Scalar>{neg_inf<Scalar>(), 0, 0.0};
    Scalar max_entry = neg_inf<Scalar>();
    Scalar min_entry = std::numeric_limits<Scalar>::infinity();
    for (Eigen::Index x = 0; x < logm.rows(); ++x)
        for (Eigen::Index y = 0; y < logm.cols(); ++y)
            if (std::isfinite(static_cast<double>(logm(x, y)))) {
                max_entry = std::max(max_entry, logm(x, y));
                min_entry = std::min(min_entry, logm(x, y));
            }
    const bool moderate = static_cast<double>(max_entry - min_entry) < 300.0;
    if (moderate) {
        const DenseMatrix<Scalar> m = (logm.array() - max_entry).exp().matrix();
        if (logm.rows() <= 64 && strongly_connected(adj)) {
            if (auto r = power_cw(m, max_entry, tol, 20000))
                return *r;
        }
        if (auto r = gelfand_linear(m, max_entry, tol))
            return *r;
    }
    return gelfand_log(logm, tol);
}

template <typename Scalar, typename Derived>
DenseMatrix<Scalar> log_twisted(const TransferOperator<Scalar>& op,
                                const Eigen::MatrixBase<Derived>& phi) {
    detail::require_length(op.system(), phi.size(), "spectral twist");
    DenseMatrix<Scalar> logm = log_of_matrix(op.matrix());
    for (Eigen::Index y = 0; y < logm.cols(); ++y)
        logm.col(y).array() += phi[y];
    return logm;
}

}  // namespace detail

// Log spectral radius by bracketed power iteration alone. Requires an
// irreducible nonzero pattern; kept public so it can be cross-checked
// against the Gelfand route.
template <typename Scalar>
SpectralResult<Scalar> log_spectral_radius_power(const DenseMatrix<Scalar>& m, double tol) {
    if ((m.array() < Scalar(0)).any())
        throw PositivityError("log_spectral_radius_power: negative entry");
    const DenseMatrix<Scalar> logm = detail::log_of_matrix(m);
    if (!detail::strongly_connected(detail::adjacency_of_log(logm)))
        throw ReducibleOperatorError("log_spectral_radius_power: support graph not strongly connected");
    if (auto r = detail::power_cw(m, Scalar(0), tol, 200000))
        return *r;
    throw ConvergenceError("log_spectral_radius_power: bracket did not close",
                           std::numeric_limits<double>::quiet_NaN());
}

// Log spectral radius by Gelfand iteration alone.
template <typename Scalar>
SpectralResult<Scalar> log_spectral_radius_gelfand(const DenseMatrix<Scalar>& m, double tol) {
    if ((m.array() < Scalar(0)).any())
        throw PositivityError("log_spectral_radius_gelfand: negative entry");
    const DenseMatrix<Scalar> logm = detail::log_of_matrix(m);
    if (!detail::has_cycle(detail::adjacency_of_log(logm)))
        return SpectralResult<Scalar>{detail::neg_inf<Scalar>(), 0, 0.0};
    if (auto r = detail::gelfand_linear(m, Scalar(0), tol))
        return *r;
    return detail::gelfand_log(logm, tol);
}

// The spectral potential lambda(phi) = log rho(A_phi). The twisted matrix is
// assembled in log space, so potentials of any magnitude are safe.
template <typename Scalar, typename Derived>
SpectralResult<Scalar> spectral_potential(const TransferOperator<Scalar>& op,
                                          const Eigen::MatrixBase<Derived>& phi,
                                          double tol = 1e-10) {
    if (tol <= 0)
        throw ArgumentError("spectral_potential: tol must be positive");
    return detail::log_spectral_radius(detail::log_twisted(op, phi), tol);
}

namespace detail {

// Right Perron vector of exp(logm) by inverse iteration around the known
// spectral radius. Requires irreducibility (simple Perron root).
template <typename Scalar>
Potential<Scalar> perron_vector(const DenseMatrix<Scalar>& logm, Scalar lambda, double tol) {
    const Eigen::Index n = logm.rows();
    const Scalar scale = log_norm_inf(logm);
    const DenseMatrix<Scalar> m = (logm.array() - scale).exp().matrix();
    const Scalar rho = std::exp(lambda - scale);
    DenseMatrix<Scalar> shifted = m;
    shifted.diagonal().array() -= rho * Scalar(1 + 1e-8);
    const Eigen::PartialPivLU<DenseMatrix<Scalar>> lu(shifted);
    Potential<Scalar> v = Potential<Scalar>::Constant(n, Scalar(1) / Scalar(n));
    for (int it = 0; it < 60; ++it) {
        Potential<Scalar> x = lu.solve(v);
        const Scalar total = x.sum();
        if (total == Scalar(0) || !std::isfinite(static_cast<double>(total)))
            throw ConvergenceError("perron_vector: inverse iteration broke down",
                                   static_cast<double>(lambda));
        x /= total;
        v = x;
        const double res = static_cast<double>((m * v - rho * v).template lpNorm<Eigen::Infinity>());
        if (res <= std::max(1e-14, 0.01 * tol) * static_cast<double>(rho))
            return v.cwiseMax(Scalar(0));
    }
    throw ConvergenceError("perron_vector: residual did not reach tolerance",
                           static_cast<double>(lambda));
}

}  // namespace detail

// Subgradient of lambda at phi from the left and right Perron vectors of the
// twisted matrix: mu_y proportional to u_y v_y. An invariant probability
// measure; unique when the support graph is strongly connected.
template <typename Scalar, typename Derived>
Measure<Scalar> gibbs_gradient(const TransferOperator<Scalar>& op,
                               const Eigen::MatrixBase<Derived>& phi, double tol = 1e-8) {
    const DenseMatrix<Scalar> logm = detail::log_twisted(op, phi);
    const auto adj = detail::adjacency_of_log(logm);
    if (!detail::has_cycle(adj))
        throw ReducibleOperatorError("gibbs_gradient: twisted operator is nilpotent");
    if (!detail::strongly_connected(adj))
        throw ReducibleOperatorError(
            "gibbs_gradient: support graph not strongly connected; the subgradient may be non-unique");
    const Scalar lambda = detail::log_spectral_radius(logm, std::min(tol * 1e-2, 1e-10)).lambda;
    const Potential<Scalar> v = detail::perron_vector(logm, lambda, tol);
    const Potential<Scalar> u = detail::perron_vector<Scalar>(logm.transpose(), lambda, tol);
    Potential<Scalar> w = (u.array() * v.array()).matrix();
    w /= w.sum();
    return Measure<Scalar>(std::move(w));
}

struct LambdaPropertiesReport {
    bool monotone = false;
    bool additively_homogeneous = false;
    bool lipschitz = false;
    bool convex = false;
    bool delta_invariant = false;
    bool all() const {
        return monotone && additively_homogeneous && lipschitz && convex && delta_invariant;
    }
};

namespace detail {

template <typename Scalar>
bool ext_close(Scalar a, Scalar b, double tol) {
    const bool a_inf = a == neg_inf<Scalar>();
    const bool b_inf = b == neg_inf<Scalar>();
    if (a_inf || b_inf)
        return a_inf == b_inf;
    return std::abs(static_cast<double>(a - b)) <= tol;
}

template <typename Scalar>
bool ext_le(Scalar a, Scalar b, double tol) {
    if (a == neg_inf<Scalar>())
        return true;
    if (b == neg_inf<Scalar>())
        return false;
    return static_cast<double>(a - b) <= tol;
}

}  // namespace detail

// Evaluates the five structural properties of lambda at one probe
// (phi, psi, t): monotonicity, additive homogeneity, the Lipschitz bound,
// convexity, and strong delta-invariance.
template <typename Scalar, typename D1, typename D2>
LambdaPropertiesReport check_lambda_properties(const TransferOperator<Scalar>& op,
                                               const Eigen::MatrixBase<D1>& phi_expr,
                                               const Eigen::MatrixBase<D2>& psi_expr, double t,
                                               double tol) {
    if (tol <= 0)
        throw ArgumentError("check_lambda_properties: tol must be positive");
    if (t < 0 || t > 1)
        throw ArgumentError("check_lambda_properties: t must lie in [0, 1]");
    const Potential<Scalar> phi = phi_expr;
    const Potential<Scalar> psi = psi_expr;
    const double lam_tol = tol / 10;
    auto lam = [&](const Potential<Scalar>& p) {
        return spectral_potential(op, p, lam_tol).lambda;
    };
    const Scalar lam_phi = lam(phi);
    const Scalar lam_psi = lam(psi);

    LambdaPropertiesReport report;

    const bool ordered = (phi.array() >= psi.array()).all();
    report.monotone = !ordered || detail::ext_le(lam_psi, lam_phi, tol);

    report.additively_homogeneous = true;
    for (const double c : {1.0, -2.5}) {
        const Scalar shifted = lam((phi.array() + Scalar(c)).matrix());
        const Scalar expected =
            lam_phi == detail::neg_inf<Scalar>() ? detail::neg_inf<Scalar>() : lam_phi + Scalar(c);
        report.additively_homogeneous =
            report.additively_homogeneous && detail::ext_close(shifted, expected, tol);
    }

    const double gap = static_cast<double>((phi - psi).template lpNorm<Eigen::Infinity>());
    if (lam_phi == detail::neg_inf<Scalar>() || lam_psi == detail::neg_inf<Scalar>())
        report.lipschitz = lam_phi == lam_psi;
    else
        report.lipschitz = std::abs(static_cast<double>(lam_phi - lam_psi)) <= gap + tol;

    const Potential<Scalar> blend = (Scalar(1) - Scalar(t)) * phi + Scalar(t) * psi;
    Scalar combo;
    if (t == 0.0)
        combo = lam_phi;
    else if (t == 1.0)
        combo = lam_psi;
    else if (lam_phi == detail::neg_inf<Scalar>() || lam_psi == detail::neg_inf<Scalar>())
        combo = detail::neg_inf<Scalar>();
    else
        combo = (Scalar(1) - Scalar(t)) * lam_phi + Scalar(t) * lam_psi;
    report.convex = detail::ext_le(lam(blend), combo, tol);

    const Scalar lhs = lam(phi + delta_map(op.system(), psi));
    const Scalar rhs = lam(phi + psi);
    report.delta_invariant = detail::ext_close(lhs, rhs, tol);

    return report;
}

// n lambda(phi, A) <= lambda(n phi, A^n): the left side twists A, the right
// side twists the n-th matrix power.
template <typename Scalar, typename Derived>
bool check_power_inequality(const TransferOperator<Scalar>& op,
                            const Eigen::MatrixBase<Derived>& phi_expr, int n, double tol) {
    if (n < 1)
        throw ArgumentError("check_power_inequality: n must be positive");
    const Potential<Scalar> phi = phi_expr;
    const double lam_tol = tol / 10;
    const Scalar lhs = Scalar(n) * spectral_potential(op, phi, lam_tol).lambda;
    DenseMatrix<Scalar> mn = op.matrix();
    for (int i = 1; i < n; ++i)
        mn = (mn * op.matrix()).eval();
    DenseMatrix<Scalar> logm = detail::log_of_matrix(mn);
    for (Eigen::Index y = 0; y < logm.cols(); ++y)
        logm.col(y).array() += Scalar(n) * phi[y];
    const Scalar rhs = detail::log_spectral_radius(logm, lam_tol).lambda;
    return detail::ext_le(lhs, rhs, tol);
}

}  // namespace specpot
