#include <doctest.h>

#include <cmath>

#include "specpot/duality.hpp"
#include "support/fixtures.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace specpot;
using fixtures::sys2_op;
using fixtures::sysd4_op;
using fixtures::sysi3_op;

namespace {

PotentialXd vec(std::initializer_list<double> xs) {
    PotentialXd v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs)
        v[i++] = x;
    return v;
}

}  // namespace

TEST_CASE("duality closes on the two-cycle") {
    Rng rng(61);
    for (int trial = 0; trial < 10; ++trial) {
        const double a = rng.uniform(0.4, 3.0), b = rng.uniform(0.4, 3.0);
        const auto op = sys2_op(a, b);
        const PotentialXd phi = rng.potential(2, 2.0);
        const auto report = duality_check(op, phi);
        CHECK(report.lambda ==
              doctest::Approx(0.5 * (std::log(a * b) + phi[0] + phi[1])).epsilon(1e-9));
        CHECK((report.maximizer.weights() - vec({0.5, 0.5})).lpNorm<Eigen::Infinity>() <=
              1e-8);
        CHECK(report.tau_at_maximizer == doctest::Approx(0.5 * std::log(a * b)).epsilon(1e-8));
        CHECK(std::abs(report.gap) <= 1e-7);
        CHECK(report.success);
        CHECK(is_invariant(op.system(), report.maximizer, 1e-8));
    }

    const auto expectation = duality_check(sys2_op(1, 1), PotentialXd::Zero(2));
    CHECK(expectation.lambda == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(expectation.tau_at_maximizer == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(std::abs(expectation.gap) <= 1e-9);
}

TEST_CASE("duality round trip across a seeded sweep") {
    Rng rng(62);
    for (int trial = 0; trial < 50; ++trial) {
        const auto op = generators::random_irreducible_operator(rng, 2 + rng.index(5));
        const PotentialXd phi = rng.potential(op.points(), 2.0);
        const auto report = duality_check(op, phi);
        CHECK(std::abs(report.gap) < 1e-5);
        CHECK(report.gap >= -1e-7);  // never above lambda
        CHECK(is_invariant(op.system(), report.maximizer, 1e-8));
    }
    CHECK_THROWS_AS(duality_check(sysi3_op(1, 2, 3), PotentialXd::Zero(3)),
                    ReducibleOperatorError);
}

TEST_CASE("lambda recovered from candidate measures") {
    Rng rng(63);
    const double a = rng.uniform(0.5, 2.0), b = rng.uniform(0.5, 2.0);
    const auto two = sys2_op(a, b);
    const PotentialXd phi2 = rng.potential(2, 2.0);
    CHECK(lambda_from_tau(two, phi2, invariant_measures(two.system())) ==
          doctest::Approx(spectral_potential(two, phi2).lambda).epsilon(1e-8));

    const auto diag = sysi3_op(1, 2, 3);
    const auto value = lambda_from_tau(diag, PotentialXd::Zero(3),
                                       invariant_measures(diag.system()));
    CHECK(value == doctest::Approx(std::log(3.0)).epsilon(1e-9));

    const auto drain = sysd4_op();
    const PotentialXd phi4 = rng.potential(4, 2.0);
    CHECK(lambda_from_tau(drain, phi4, invariant_measures(drain.system())) ==
          doctest::Approx(phi4[0]).epsilon(1e-9));

    CHECK_THROWS_AS(lambda_from_tau(two, phi2, std::vector<MeasureXd>{}), ArgumentError);
    CHECK_THROWS_AS(lambda_from_tau(two, phi2, {MeasureXd(vec({1, 0}))}), DomainError);
}

TEST_CASE("candidate values never exceed lambda") {
    Rng rng(64);
    for (int trial = 0; trial < 20; ++trial) {
        const bool cycle = trial % 2 == 0;
        const auto sys = cycle ? generators::random_cycle_system(rng, 2 + rng.index(5))
                               : generators::random_system(rng, 2 + rng.index(5));
        const auto op = generators::random_full_operator(rng, sys, 0.3, 2.5);
        const PotentialXd phi = rng.potential(sys.points(), 2.0);
        const double lambda = spectral_potential(op, phi).lambda;
        for (const auto& mu : invariant_measures(sys)) {
            const double tau = tau_legendre(op, mu).tau;
            CHECK(tau + mu(phi) <= lambda + 1e-7);
        }
        CHECK(lambda_from_tau(op, phi, invariant_measures(sys)) <= lambda + 1e-7);
    }
}

TEST_CASE("maximizer is stable under additive constants") {
    Rng rng(65);
    for (int trial = 0; trial < 10; ++trial) {
        const auto op = generators::random_irreducible_operator(rng, 2 + rng.index(5));
        const PotentialXd phi = rng.potential(op.points(), 2.0);
        const double c = rng.uniform(-3.0, 3.0);
        const auto base = duality_check(op, phi);
        const auto shifted = duality_check(op, (phi.array() + c).matrix());
        CHECK((base.maximizer.weights() - shifted.maximizer.weights())
                  .lpNorm<Eigen::Infinity>() <= 1e-8);
    }
}
