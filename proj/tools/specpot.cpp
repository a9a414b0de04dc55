// Command-line surface: loads a scenario file and dispatches one of the
// subcommands {lambda, gibbs, tau, duality, est, props}. Identical inputs
// produce byte-identical output; all randomness flows from scenario.seed.
// Exit codes: 0 pass, 1 check failure, 2 input error.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "specpot/specpot.hpp"

namespace {

using namespace specpot;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ParseError("scenario", "cannot read file " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

std::string json_real(double x) {
    if (std::isfinite(x))
        return detail::format_real(x);
    if (std::isnan(x))
        return "null";
    return x < 0 ? "\"-inf\"" : "\"inf\"";
}

std::string json_vector(const PotentialXd& v) {
    std::string out = "[";
    for (Eigen::Index i = 0; i < v.size(); ++i)
        out += (i ? ", " : "") + json_real(v[i]);
    return out + "]";
}

struct Options {
    std::string scenario_path;
    std::string output = "json";
    bool output_set = false;
    double tol = 0;
    double eps = 0;
    int n_max = 0;
    std::uint64_t seed = 0;
    bool tol_set = false, eps_set = false, n_max_set = false, seed_set = false;
};

int cmd_lambda(const Scenario& sc, const Options& opt) {
    const auto op = scenario_operator(sc);
    const auto result =
        spectral_potential(op, scenario_potential(sc), opt.tol_set ? opt.tol : 1e-10);
    std::string out;
    if (opt.output == "json") {
        out = "{\n  \"lambda\": " + json_real(result.lambda) +
              ",\n  \"iterations\": " + std::to_string(result.iterations) +
              ",\n  \"residual\": " + json_real(result.residual) + "\n}\n";
    } else {
        out = "lambda,iterations,residual\n" + detail::format_real(result.lambda) + "," +
              std::to_string(result.iterations) + "," + detail::format_real(result.residual) +
              "\n";
    }
    std::cout << out;
    return 0;
}

int cmd_gibbs(const Scenario& sc, const Options& opt) {
    const auto op = scenario_operator(sc);
    const auto mu = gibbs_gradient(op, scenario_potential(sc), opt.tol_set ? opt.tol : 1e-8);
    std::string out;
    if (opt.output == "json") {
        out = "{\n  \"measure\": " + json_vector(mu.weights()) + "\n}\n";
    } else {
        out = "x,weight\n";
        for (Eigen::Index x = 0; x < mu.size(); ++x)
            out += std::to_string(x) + "," + detail::format_real(mu[x]) + "\n";
    }
    std::cout << out;
    return 0;
}

int cmd_tau(const Scenario& sc, const Options& opt) {
    const auto op = scenario_operator(sc);
    const auto measure = scenario_measure(sc);
    if (!measure)
        throw ParseError("measure", "the tau subcommand needs a measure");
    TauOptions tau_opts;
    if (opt.tol_set)
        tau_opts.tol = opt.tol;
    const auto legendre = tau_legendre(op, *measure, tau_opts);
    const bool invariant = is_invariant(op.system(), *measure, 1e-10);
    std::optional<TauResult<double>> direct;
    if (invariant)
        direct = tau_direct(op, *measure, sc.n_max);
    const bool sandwich_ok = !direct || direct->tau >= legendre.tau - 1e-6;

    std::string out;
    if (opt.output == "json") {
        out = "{\n";
        if (direct) {
            out += "  \"direct\": {\n    \"tau\": " + json_real(direct->tau) +
                   ",\n    \"n_max\": " + std::to_string(sc.n_max) + ",\n    \"table\": [";
            for (std::size_t i = 0; i < direct->diagnostics.table.size(); ++i) {
                const auto& row = direct->diagnostics.table[i];
                out += std::string(i ? ", " : "") + "{\"n\": " + std::to_string(row.n) +
                       ", \"partition\": " + std::to_string(row.partition) +
                       ", \"value\": " + json_real(row.value) +
                       ", \"value_over_n\": " + json_real(row.value_over_n) + "}";
            }
            out += "]\n  },\n";
        } else {
            out += "  \"direct\": null,\n";
        }
        out += "  \"legendre\": {\n    \"tau\": " + json_real(legendre.tau) +
               ",\n    \"iterations\": " + std::to_string(legendre.diagnostics.iterations) +
               ",\n    \"final_gradient_norm\": " +
               json_real(legendre.diagnostics.final_gradient_norm) + ",\n    \"witness_phi\": " +
               (legendre.witness_phi ? json_vector(*legendre.witness_phi) : "null") +
               "\n  },\n";
        out += std::string("  \"sandwich_ok\": ") + (sandwich_ok ? "true" : "false") + "\n}\n";
    } else {
        out = "key,n,partition,value\n";
        out += "tau_direct,,," + (direct ? detail::format_real(direct->tau) : "") + "\n";
        out += "tau_legendre,,," + detail::format_real(legendre.tau) + "\n";
        out += std::string("sandwich_ok,,,") + (sandwich_ok ? "1" : "0") + "\n";
        if (direct)
            for (const auto& row : direct->diagnostics.table)
                out += "direct_row," + std::to_string(row.n) + "," +
                       std::to_string(row.partition) + "," +
                       detail::format_real(row.value_over_n) + "\n";
    }
    std::cout << out;
    return sandwich_ok ? 0 : 1;
}

int cmd_duality(const Scenario& sc, const Options& opt) {
    const auto op = scenario_operator(sc);
    const auto report =
        duality_check(op, scenario_potential(sc), opt.tol_set ? opt.tol : 1e-5);
    std::string out;
    if (opt.output == "json") {
        out = "{\n  \"lambda\": " + json_real(report.lambda) +
              ",\n  \"maximizer\": " + json_vector(report.maximizer.weights()) +
              ",\n  \"tau_at_maximizer\": " + json_real(report.tau_at_maximizer) +
              ",\n  \"gap\": " + json_real(report.gap) + ",\n  \"success\": " +
              (report.success ? "true" : "false") + "\n}\n";
    } else {
        out = "key,value\nlambda," + detail::format_real(report.lambda) + "\n";
        out += "tau_at_maximizer," + detail::format_real(report.tau_at_maximizer) + "\n";
        out += "gap," + detail::format_real(report.gap) + "\n";
        out += std::string("success,") + (report.success ? "1" : "0") + "\n";
        for (Eigen::Index x = 0; x < report.maximizer.size(); ++x)
            out += "maximizer_" + std::to_string(x) + "," +
                   detail::format_real(report.maximizer[x]) + "\n";
    }
    std::cout << out;
    return report.success ? 0 : 1;
}

int cmd_est(const Scenario& sc, const Options& opt) {
    const auto op = scenario_operator(sc);
    const auto measure = scenario_measure(sc);
    if (!measure)
        throw ParseError("measure", "the est subcommand needs a measure");
    const std::string format = opt.output_set ? opt.output : "csv";  // tables default to CSV
    const double eps = opt.eps_set ? opt.eps : sc.eps;
    std::vector<int> n_range = detail::default_n_range(opt.n_max_set ? opt.n_max : 40);
    const auto cfg = build_neighborhood(op, *measure, eps, std::move(n_range));
    const auto report = est_rate_table(op, cfg);
    if (format == "json") {
        std::string out = "{\n  \"rows\": [";
        for (std::size_t i = 0; i < report.rows.size(); ++i) {
            const auto& row = report.rows[i];
            out += std::string(i ? ", " : "") + "{\"n\": " + std::to_string(row.n) +
                   ", \"set_size\": " + std::to_string(row.set_size) +
                   ", \"log_norm\": " + json_real(row.log_norm) +
                   ", \"rate\": " + json_real(row.rate) +
                   ", \"bound\": " + json_real(row.bound) + "}";
        }
        out += "],\n  \"c_estimate\": " + json_real(report.c_estimate) +
               ",\n  \"pass\": " + (report.pass ? "true" : "false") + "\n}\n";
        std::cout << out;
    } else {
        std::cout << to_csv(report);
    }
    return report.pass ? 0 : 1;
}

struct PropRow {
    std::string name;
    bool pass;
};

int cmd_props(const Scenario& sc, const Options& opt) {
    const auto op = scenario_operator(sc, /*validate_support=*/false);
    const auto& sys = op.system();
    const std::uint64_t seed = opt.seed_set ? opt.seed : sc.seed;
    Rng rng(seed);
    std::vector<PropRow> rows;

    rows.push_back({"homological_identity", check_homological(op, 40, seed, 1e-12)});

    bool monotone = true, homogeneous = true, lipschitz = true, convex = true,
         delta_invariant = true;
    for (int trial = 0; trial < 20; ++trial) {
        const PotentialXd phi = rng.potential(sys.points(), 2.0);
        const PotentialXd psi = trial % 2 == 0
                                    ? (phi - rng.potential(sys.points(), 1.0).cwiseAbs()).eval()
                                    : rng.potential(sys.points(), 2.0);
        const auto report = check_lambda_properties(op, phi, psi, rng.uniform01(), 1e-7);
        monotone &= report.monotone;
        homogeneous &= report.additively_homogeneous;
        lipschitz &= report.lipschitz;
        convex &= report.convex;
        delta_invariant &= report.delta_invariant;
    }
    rows.push_back({"lambda_monotone", monotone});
    rows.push_back({"lambda_additively_homogeneous", homogeneous});
    rows.push_back({"lambda_lipschitz", lipschitz});
    rows.push_back({"lambda_convex", convex});
    rows.push_back({"lambda_delta_invariant", delta_invariant});

    bool twist_iterate = true;
    for (int n = 1; n <= 4; ++n)
        twist_iterate &= check_twist_iterate(op, rng.potential(sys.points(), 1.5),
                                             rng.potential(sys.points(), 1.5), n, 1e-12);
    rows.push_back({"twist_iterate_identity", twist_iterate});

    bool power = true;
    for (int n = 1; n <= 4; ++n)
        power &= check_power_inequality(op, rng.potential(sys.points(), 1.5), n, 1e-9);
    rows.push_back({"power_inequality", power});

    // certificate checks on an invariant measure (the scenario's, if usable)
    const auto measure = scenario_measure(sc);
    const MeasureXd mu = (measure && is_invariant(sys, *measure, 1e-10))
                             ? *measure
                             : invariant_measures<double>(sys).front();
    bool certificate = true, probes = true;
    const auto part = point_partition<double>(sys);
    for (int n = 1; n <= 3; ++n) {
        const auto inner = inner_sup(op, mu, part, n);
        if (inner.value == -std::numeric_limits<double>::infinity())
            continue;
        certificate &= std::abs(inner.certificate - 1.0) <= 1e-8;
        for (int probe = 0; probe < 50; ++probe) {
            const MeasureXd m(rng.simplex(sys.points()));
            double form = 0;
            for (Eigen::Index i = 0; i < part.size(); ++i) {
                const double mass = mu(part.member(i));
                if (mass > 0)
                    form += mass * m(iterate_apply(op, part.member(i), n)) /
                            inner.c_table[static_cast<std::size_t>(i)];
            }
            probes &= form <= 1.0 + 1e-8;
        }
    }
    rows.push_back({"inner_sup_certificate", certificate});
    rows.push_back({"inner_sup_probe_bound", probes});

    bool all_pass = true;
    std::string out;
    if (opt.output == "json") {
        out = "[\n";
        for (std::size_t i = 0; i < rows.size(); ++i) {
            out += std::string(i ? ",\n" : "") + "  {\"check\": \"" + rows[i].name +
                   "\", \"pass\": " + (rows[i].pass ? "true" : "false") + "}";
            all_pass &= rows[i].pass;
        }
        out += "\n]\n";
    } else {
        out = "check,pass\n";
        for (const auto& row : rows) {
            out += row.name + "," + (row.pass ? "1" : "0") + "\n";
            all_pass &= row.pass;
        }
    }
    std::cout << out;
    return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spectral potential / t-entropy workbench for finite transfer operators"};
    app.require_subcommand(1);

    Options opt;
    const std::vector<std::string> names = {"lambda", "gibbs", "tau", "duality", "est", "props"};
    const std::vector<std::string> descriptions = {
        "log spectral radius of the twisted operator",
        "Gibbs subgradient of the spectral potential",
        "t-entropy by the direct and Legendre routes, with the sandwich check",
        "variational round trip lambda = tau + mu[phi]",
        "entropy statistic rate table",
        "property suite: homological identity, lambda laws, certificates"};
    for (std::size_t i = 0; i < names.size(); ++i) {
        auto* cmd = app.add_subcommand(names[i], descriptions[i]);
        cmd->add_option("--scenario", opt.scenario_path, "scenario JSON file")->required();
        cmd->add_option("--tol", opt.tol, "tolerance override");
        cmd->add_option("--eps", opt.eps, "epsilon override");
        cmd->add_option("--n-max", opt.n_max, "horizon override");
        cmd->add_option("--seed", opt.seed, "seed override");
        cmd->add_option("--output", opt.output, "output format")
            ->check(CLI::IsMember({"json", "csv"}));
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    CLI::App* active = app.get_subcommands().front();
    const std::string name = active->get_name();
    opt.tol_set = active->count("--tol") > 0;
    opt.eps_set = active->count("--eps") > 0;
    opt.n_max_set = active->count("--n-max") > 0;
    opt.seed_set = active->count("--seed") > 0;
    opt.output_set = active->count("--output") > 0;

    try {
        Scenario sc = parse_scenario(read_file(opt.scenario_path), name != "props");
        if (opt.eps_set)
            sc.eps = opt.eps;
        if (opt.n_max_set)
            sc.n_max = opt.n_max;
        if (opt.seed_set)
            sc.seed = opt.seed;
        if (name == "lambda")
            return cmd_lambda(sc, opt);
        if (name == "gibbs")
            return cmd_gibbs(sc, opt);
        if (name == "tau")
            return cmd_tau(sc, opt);
        if (name == "duality")
            return cmd_duality(sc, opt);
        if (name == "est")
            return cmd_est(sc, opt);
        return cmd_props(sc, opt);
    } catch (const ConvergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const PostconditionError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
