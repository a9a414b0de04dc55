#include <doctest.h>

#include <cmath>
#include <limits>

#include "specpot/tentropy.hpp"
#include "support/fixtures.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace specpot;
using fixtures::nilp2_op;
using fixtures::sys2;
using fixtures::sys2_op;
using fixtures::sysd4;
using fixtures::sysd4_op;
using fixtures::sysi3_op;

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

PotentialXd vec(std::initializer_list<double> xs) {
    PotentialXd v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs)
        v[i++] = x;
    return v;
}

// inputs of the grid oracle for a point partition
void point_partition_inputs(const TransferOperatorXd& op, const MeasureXd& mu, int n,
                            std::vector<double>& mu_g, std::vector<PotentialXd>& b_g) {
    const auto part = point_partition<double>(op.system());
    mu_g.clear();
    b_g.clear();
    for (Eigen::Index i = 0; i < part.size(); ++i) {
        mu_g.push_back(mu(part.member(i)));
        b_g.push_back(iterate_apply(op, part.member(i), n));
    }
}

}  // namespace

TEST_CASE("inner_sup closed form on the two-cycle") {
    Rng rng(51);
    for (int trial = 0; trial < 5; ++trial) {
        const double a = rng.uniform(0.4, 3.0), b = rng.uniform(0.4, 3.0);
        const auto op = sys2_op(a, b);
        const MeasureXd mu(vec({0.5, 0.5}));
        const auto inner = inner_sup(op, mu, point_partition<double>(sys2()), 1);
        CHECK(inner.value == doctest::Approx(0.5 * std::log(a * b)).epsilon(1e-10));
        CHECK((inner.optimizer.weights() - vec({0.5, 0.5})).lpNorm<Eigen::Infinity>() <= 1e-9);
        CHECK(inner.c_table[0] == doctest::Approx(b / 2).epsilon(1e-9));
        CHECK(inner.c_table[1] == doctest::Approx(a / 2).epsilon(1e-9));
        CHECK(std::abs(inner.certificate - 1.0) <= 1e-9);

        std::vector<double> mu_g;
        std::vector<PotentialXd> b_g;
        point_partition_inputs(op, mu, 1, mu_g, b_g);
        CHECK(inner.value ==
              doctest::Approx(oracles::inner_sup_grid_oracle(mu_g, b_g, 2)).epsilon(1e-6));
    }
}

TEST_CASE("inner_sup honors the -inf convention") {
    const auto inner = inner_sup(nilp2_op(), MeasureXd(vec({1, 0})),
                                 point_partition<double>(fixtures::nilp2()), 1);
    CHECK(inner.value == kNegInf);
}

TEST_CASE("inner_sup attains boundary optima") {
    const double b = 2.5;
    const auto op = sys2_op(1.0, b);
    const auto inner =
        inner_sup(op, MeasureXd(vec({1, 0})), point_partition<double>(sys2()), 1);
    CHECK(inner.value == doctest::Approx(std::log(b)).epsilon(1e-9));
    CHECK(inner.optimizer[1] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("inner_sup certificate stays below one for probe measures") {
    Rng rng(52);
    for (int trial = 0; trial < 15; ++trial) {
        const bool cycle = trial % 2 == 0;
        const auto sys = cycle ? generators::random_cycle_system(rng, 2 + rng.index(4))
                               : generators::random_system(rng, 2 + rng.index(4));
        const auto op = generators::random_full_operator(rng, sys, 0.3, 2.5);
        const auto mu = generators::random_invariant_measure(rng, sys);
        const auto part = trial % 3 == 0 ? random_partition<double>(sys, 3, rng.raw())
                                         : point_partition<double>(sys);
        const int n = 1 + static_cast<int>(rng.index(3));
        const auto inner = inner_sup(op, mu, part, n);
        if (inner.value == kNegInf)
            continue;
        CHECK(std::abs(inner.certificate - 1.0) <= 1e-8);
        for (int probe = 0; probe < 50; ++probe) {
            const MeasureXd m(rng.simplex(sys.points()));
            double form = 0;
            for (Eigen::Index i = 0; i < part.size(); ++i) {
                const double mass = mu(part.member(i));
                if (mass <= 0)
                    continue;
                form += mass * m(iterate_apply(op, part.member(i), n)) /
                        inner.c_table[static_cast<std::size_t>(i)];
            }
            CHECK(form <= 1.0 + 1e-8);
        }
    }
}

TEST_CASE("tau_direct on the fixtures") {
    Rng rng(53);
    const double a = rng.uniform(0.5, 3.0), b = rng.uniform(0.5, 3.0);
    const auto direct = tau_direct(sys2_op(a, b), MeasureXd(vec({0.5, 0.5})), 4);
    CHECK(direct.tau == doctest::Approx(0.5 * std::log(a * b)).epsilon(1e-9));
    CHECK(direct.route == TauRoute::direct);
    REQUIRE(direct.diagnostics.table.size() == 4);
    for (const auto& row : direct.diagnostics.table)
        CHECK(row.value_over_n == doctest::Approx(0.5 * std::log(a * b)).epsilon(1e-9));

    CHECK(tau_direct(sysd4_op(), MeasureXd(vec({1, 0, 0, 0})), 4).tau ==
          doctest::Approx(0.0).epsilon(1e-10));
    CHECK(tau_direct(nilp2_op(), MeasureXd(vec({1, 0})), 4).tau == kNegInf);
    CHECK_THROWS_AS(tau_direct(sys2_op(1, 1), MeasureXd(vec({1, 0})), 4), DomainError);
}

TEST_CASE("tau_direct matches the per-n grid oracle on the two-cycle") {
    const auto op = sys2_op(2.0, 0.7);
    const MeasureXd mu(vec({0.5, 0.5}));
    for (int n = 1; n <= 4; ++n) {
        std::vector<double> mu_g;
        std::vector<PotentialXd> b_g;
        point_partition_inputs(op, mu, n, mu_g, b_g);
        const double grid = oracles::inner_sup_grid_oracle(mu_g, b_g, 2);
        const auto inner = inner_sup(op, mu, point_partition<double>(sys2()), n);
        CHECK(inner.value == doctest::Approx(grid).epsilon(1e-6));
    }
}

TEST_CASE("tau_legendre on invariant fixtures") {
    Rng rng(54);
    const double a = rng.uniform(0.5, 3.0), b = rng.uniform(0.5, 3.0);
    const auto constant = tau_legendre(sys2_op(a, b), MeasureXd(vec({0.5, 0.5})));
    CHECK(constant.tau == doctest::Approx(0.5 * std::log(a * b)).epsilon(1e-8));
    CHECK(constant.route == TauRoute::legendre);
    CHECK(constant.witness_phi.has_value());

    // three fixed points with weights (1, 2, 3)
    const auto diag = sysi3_op(1, 2, 3);
    for (int trial = 0; trial < 8; ++trial) {
        const MeasureXd mu(rng.simplex(3));
        const double expected = oracles::tau_closed_form(diag, mu);
        const auto legendre = tau_legendre(diag, mu);
        CHECK(legendre.tau == doctest::Approx(expected).epsilon(1e-7));
        // any iterate upper-bounds the infimum
        const PotentialXd w = *legendre.witness_phi;
        CHECK(spectral_potential(diag, w).lambda - mu(w) >= legendre.tau - 1e-9);
    }
}

TEST_CASE("tau_legendre grid consistency on the diagonal fixture") {
    const auto diag = sysi3_op(1, 2, 3);
    const MeasureXd mu(vec({0.5, 0.3, 0.2}));
    const double tau = tau_legendre(diag, mu).tau;
    // no grid potential beats the reported infimum ...
    double best = std::numeric_limits<double>::infinity();
    for (double p0 = -2; p0 <= 2; p0 += 0.25)
        for (double p1 = -2; p1 <= 2; p1 += 0.25)
            for (double p2 = -2; p2 <= 2; p2 += 0.25) {
                const PotentialXd phi = vec({p0, p1, p2});
                best = std::min(best, spectral_potential(diag, phi).lambda - mu(phi));
            }
    CHECK(best >= tau - 1e-8);
    // ... and the grid comes close to it
    CHECK(best <= tau + 0.25);
}

TEST_CASE("tau_legendre certifies divergence for non-invariant measures") {
    const auto result = tau_legendre(sys2_op(1, 1), MeasureXd(vec({1, 0})));
    CHECK(result.tau == kNegInf);
    REQUIRE(result.witness_phi.has_value());
    const PotentialXd w = *result.witness_phi;
    CHECK(w[0] > 0);  // multiple of the coboundary direction (1, -1)
    CHECK(w[0] == doctest::Approx(-w[1]));
    const MeasureXd mu(vec({1, 0}));
    CHECK(spectral_potential(sys2_op(1, 1), w).lambda - mu(w) < -1e6);
}

TEST_CASE("tau_legendre handles invariant mass on zero-weight points") {
    // fixed point 0 carries weight zero: objective runs to -inf along e0
    const auto op = make_operator<double>(fixtures::sysi3(), {{1, 1, 2.0}, {2, 2, 3.0}});
    const auto result = tau_legendre(op, MeasureXd(vec({1, 0, 0})));
    CHECK(result.tau == kNegInf);
    CHECK(tau_direct(op, MeasureXd(vec({1, 0, 0})), 3).tau == kNegInf);
}

TEST_CASE("tau_legendre of nilpotent operators is -inf for every measure") {
    CHECK(tau_legendre(nilp2_op(), MeasureXd(vec({1, 0}))).tau == kNegInf);
    CHECK(tau_legendre(nilp2_op(), MeasureXd(vec({0.5, 0.5}))).tau == kNegInf);
}

TEST_CASE("route sandwich and agreement") {
    Rng rng(55);
    for (int trial = 0; trial < 25; ++trial) {
        const bool cycle = trial % 2 == 0;
        const auto sys = cycle ? generators::random_cycle_system(rng, 2 + rng.index(5))
                               : generators::random_system(rng, 2 + rng.index(5));
        const auto op = generators::random_full_operator(rng, sys, 0.3, 2.5);
        const auto mu = generators::random_invariant_measure(rng, sys);
        const double direct = tau_direct(op, mu, 8).tau;
        const double legendre = tau_legendre(op, mu).tau;
        CHECK(direct >= legendre - 1e-6);
        CHECK(std::abs(direct - legendre) <= 1e-3);
        CHECK(legendre == doctest::Approx(oracles::tau_closed_form(op, mu)).epsilon(1e-7));
    }
}

TEST_CASE("lambda dominates mu[phi] + tau for invariant measures") {
    Rng rng(56);
    for (int trial = 0; trial < 20; ++trial) {
        const auto sys = generators::random_system(rng, 2 + rng.index(5));
        const auto op = generators::random_full_operator(rng, sys, 0.3, 2.5);
        const auto mu = generators::random_invariant_measure(rng, sys);
        const double tau = tau_legendre(op, mu).tau;
        for (int probe = 0; probe < 10; ++probe) {
            const PotentialXd phi = rng.potential(sys.points(), 2.0);
            CHECK(spectral_potential(op, phi).lambda >= mu(phi) + tau - 1e-7);
        }
    }
}

TEST_CASE("divergence_direction picks a signed coboundary") {
    const PotentialXd d2 = divergence_direction(sys2(), MeasureXd(vec({1, 0})));
    CHECK(d2 == vec({1, -1}));
    const PotentialXd d4 = divergence_direction(sysd4(), MeasureXd(vec({0, 1, 0, 0})));
    CHECK(d4 == vec({0, 1, 0, 0}));
    CHECK_THROWS_AS(divergence_direction(sys2(), MeasureXd(vec({0.5, 0.5}))),
                    NoDirectionError);
}

TEST_CASE("lambda is constant along divergence directions") {
    Rng rng(57);
    for (int trial = 0; trial < 10; ++trial) {
        const bool cycle = trial % 2 == 0;
        const auto sys = cycle ? generators::random_cycle_system(rng, 2 + rng.index(5))
                               : generators::random_moving_system(rng, 2 + rng.index(5));
        const auto op = generators::random_full_operator(rng, sys, 0.3, 2.5);
        const auto mu = generators::random_noninvariant_measure(rng, sys);
        const PotentialXd d = divergence_direction(sys, mu);
        CHECK(mu(d) > 0);
        const double base = spectral_potential(op, PotentialXd::Zero(sys.points())).lambda;
        for (const double t : {1.0, -1.0, 10.0, -10.0, 100.0, -100.0})
            CHECK(std::abs(spectral_potential(op, (t * d).eval()).lambda - base) <= 1e-9);
    }
}

TEST_CASE("phi_eps_witness on the two-cycle closed form") {
    const double a = 1.7, b = 0.6;
    const auto op = sys2_op(a, b);
    const MeasureXd mu(vec({0.5, 0.5}));
    const auto part = point_partition<double>(sys2());
    const auto inner = inner_sup(op, mu, part, 1, 1e-12);
    const PotentialXd phi_eps = phi_eps_witness(op, mu, part, 1, inner.c_table, 0.1);
    CHECK(phi_eps[0] == doctest::Approx(-std::log(b)).epsilon(1e-9));
    CHECK(phi_eps[1] == doctest::Approx(-std::log(a)).epsilon(1e-9));
    CHECK(spectral_potential(op, phi_eps).lambda == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(mu(phi_eps) == doctest::Approx(-inner.value).epsilon(1e-9));

    // all members charged: the witness does not depend on eps
    const PotentialXd other = phi_eps_witness(op, mu, part, 1, inner.c_table, 2.0);
    CHECK((phi_eps - other).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("phi_eps_witness puts eps exactly on uncharged members") {
    const auto op = sysd4_op();
    const MeasureXd mu(vec({1, 0, 0, 0}));
    const auto part = point_partition<double>(sysd4());
    const auto inner = inner_sup(op, mu, part, 1, 1e-12);
    const double eps = 0.1;
    const PotentialXd phi_eps = phi_eps_witness(op, mu, part, 1, inner.c_table, eps);
    CHECK(phi_eps[0] == doctest::Approx(0.0).epsilon(1e-12));
    for (Eigen::Index x : {1, 2, 3})
        CHECK(phi_eps[x] == doctest::Approx(std::log(eps)).epsilon(1e-12));
}

TEST_CASE("phi_eps_witness bounds tighten as eps decreases") {
    const auto op = sysd4_op();
    const MeasureXd mu(vec({1, 0, 0, 0}));
    const auto part = point_partition<double>(sysd4());
    for (int n = 1; n <= 4; ++n) {
        const auto inner = inner_sup(op, mu, part, n, 1e-12);
        const double norm_an =
            iterate_apply(op, PotentialXd::Ones(4), n).lpNorm<Eigen::Infinity>();
        double previous = std::numeric_limits<double>::infinity();
        for (const double eps : {1.0, 0.1, 0.01}) {
            const PotentialXd w = phi_eps_witness(op, mu, part, n, inner.c_table, eps);
            const double lam = spectral_potential(op, w).lambda;
            const double cap = eps * norm_an / n;
            CHECK(lam <= cap + 1e-9);
            CHECK(cap <= previous);
            previous = cap;
        }
    }
}
