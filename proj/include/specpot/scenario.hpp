#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "specpot/errors.hpp"
#include "specpot/format.hpp"
#include "specpot/system.hpp"
#include "specpot/transfer.hpp"

namespace specpot {

// A self-contained problem instance: the system, the operator in triplet
// form, and optional data the subcommands consume.
struct Scenario {
    int n = 0;
    std::vector<Eigen::Index> alpha;
    std::vector<Triplet<double>> operator_entries;
    std::optional<std::vector<double>> potential;
    std::optional<std::vector<double>> measure;
    double eps = 0.1;
    int n_max = 8;
    std::uint64_t seed = 0;
};

namespace detail {

inline const nlohmann::json* find_field(const nlohmann::json& doc, const char* name) {
    const auto it = doc.find(name);
    return it == doc.end() ? nullptr : &*it;
}

inline std::vector<double> parse_real_array(const nlohmann::json& node, const char* field,
                                            int expected) {
    if (!node.is_array() || static_cast<int>(node.size()) != expected)
        throw ParseError(field, "expected an array of " + std::to_string(expected) + " numbers");
    std::vector<double> out;
    out.reserve(node.size());
    for (const auto& v : node) {
        if (!v.is_number())
            throw ParseError(field, "entries must be numbers");
        const double x = v.get<double>();
        if (!std::isfinite(x))
            throw ParseError(field, "entries must be finite");
        out.push_back(x);
    }
    return out;
}

}  // namespace detail

// Parses and validates a scenario document. validate_support controls whether
// operator triplets are checked against the graph of alpha here; the props
// subcommand defers that check so it can report the violation as a failed
// property instead of a parse error.
inline Scenario parse_scenario(const std::string& text, bool validate_support = true) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("document", e.what());
    }
    if (!doc.is_object())
        throw ParseError("document", "top level must be an object");

    Scenario sc;

    const auto* n_node = detail::find_field(doc, "n");
    if (!n_node || !n_node->is_number_integer() || n_node->get<int>() < 1)
        throw ParseError("n", "required positive integer");
    sc.n = n_node->get<int>();

    const auto* alpha_node = detail::find_field(doc, "alpha");
    if (!alpha_node || !alpha_node->is_array() || static_cast<int>(alpha_node->size()) != sc.n)
        throw ParseError("alpha", "expected an array of n point indices");
    for (const auto& v : *alpha_node) {
        if (!v.is_number_integer())
            throw ParseError("alpha", "entries must be integers");
        const auto idx = v.get<Eigen::Index>();
        if (idx < 0 || idx >= sc.n)
            throw ParseError("alpha", "entry " + std::to_string(idx) + " out of range");
        sc.alpha.push_back(idx);
    }

    const auto* op_node = detail::find_field(doc, "operator");
    if (!op_node || !op_node->is_array())
        throw ParseError("operator", "required array of [x, y, value] triplets");
    for (const auto& t : *op_node) {
        if (!t.is_array() || t.size() != 3 || !t[0].is_number_integer() ||
            !t[1].is_number_integer() || !t[2].is_number())
            throw ParseError("operator", "each entry must be an [x, y, value] triplet");
        Triplet<double> trip{t[0].get<Eigen::Index>(), t[1].get<Eigen::Index>(),
                             t[2].get<double>()};
        if (trip.x < 0 || trip.x >= sc.n || trip.y < 0 || trip.y >= sc.n)
            throw ParseError("operator", "triplet index out of range");
        if (!std::isfinite(trip.value) || trip.value < 0)
            throw ParseError("operator", "triplet value must be finite and nonnegative");
        if (validate_support && trip.value > 0 && sc.alpha[trip.y] != trip.x)
            throw ParseError("operator", "entry (" + std::to_string(trip.x) + ", " +
                                             std::to_string(trip.y) +
                                             ") violates the alpha support constraint");
        sc.operator_entries.push_back(trip);
    }

    if (const auto* node = detail::find_field(doc, "potential"))
        sc.potential = detail::parse_real_array(*node, "potential", sc.n);

    if (const auto* node = detail::find_field(doc, "measure")) {
        auto w = detail::parse_real_array(*node, "measure", sc.n);
        double mass = 0;
        for (double x : w) {
            if (x < 0)
                throw ParseError("measure", "weights must be nonnegative");
            mass += x;
        }
        if (std::abs(mass - 1.0) > 1e-12)
            throw ParseError("measure", "weights sum to " + detail::format_real(mass) +
                                            ", expected 1 within 1e-12");
        sc.measure = std::move(w);
    }

    if (const auto* node = detail::find_field(doc, "eps")) {
        if (!node->is_number() || node->get<double>() <= 0)
            throw ParseError("eps", "must be a positive number");
        sc.eps = node->get<double>();
    }
    if (const auto* node = detail::find_field(doc, "n_max")) {
        if (!node->is_number_integer() || node->get<int>() < 1)
            throw ParseError("n_max", "must be a positive integer");
        sc.n_max = node->get<int>();
    }
    if (const auto* node = detail::find_field(doc, "seed")) {
        if (!node->is_number_unsigned() && !node->is_number_integer())
            throw ParseError("seed", "must be an integer");
        sc.seed = node->get<std::uint64_t>();
    }
    return sc;
}

// Canonical serialization: fixed key order, reals at 17 significant digits.
// parse -> serialize -> parse is the identity on Scenario.
inline std::string serialize_scenario(const Scenario& sc) {
    std::string out = "{\n  \"n\": " + std::to_string(sc.n) + ",\n  \"alpha\": [";
    for (std::size_t i = 0; i < sc.alpha.size(); ++i)
        out += (i ? ", " : "") + std::to_string(sc.alpha[i]);
    out += "],\n  \"operator\": [";
    for (std::size_t i = 0; i < sc.operator_entries.size(); ++i) {
        const auto& t = sc.operator_entries[i];
        out += (i ? ", " : "") + std::string("[") + std::to_string(t.x) + ", " +
               std::to_string(t.y) + ", " + detail::format_real(t.value) + "]";
    }
    out += "]";
    const auto emit_array = [&out](const char* name, const std::vector<double>& xs) {
        out += ",\n  \"" + std::string(name) + "\": [";
        for (std::size_t i = 0; i < xs.size(); ++i)
            out += (i ? ", " : "") + detail::format_real(xs[i]);
        out += "]";
    };
    if (sc.potential)
        emit_array("potential", *sc.potential);
    if (sc.measure)
        emit_array("measure", *sc.measure);
    out += ",\n  \"eps\": " + detail::format_real(sc.eps);
    out += ",\n  \"n_max\": " + std::to_string(sc.n_max);
    out += ",\n  \"seed\": " + std::to_string(sc.seed);
    out += "\n}\n";
    return out;
}

inline FiniteSystem scenario_system(const Scenario& sc) { return FiniteSystem(sc.alpha); }

inline TransferOperator<double> scenario_operator(const Scenario& sc,
                                                  bool validate_support = true) {
    const FiniteSystem sys = scenario_system(sc);
    if (validate_support)
        return TransferOperator<double>(sys, sc.operator_entries);
    DenseMatrix<double> m = DenseMatrix<double>::Zero(sc.n, sc.n);
    for (const auto& t : sc.operator_entries)
        m(t.x, t.y) += t.value;
    return TransferOperator<double>::unchecked(sys, std::move(m));
}

inline PotentialXd scenario_potential(const Scenario& sc) {
    PotentialXd phi = PotentialXd::Zero(sc.n);
    if (sc.potential)
        for (int i = 0; i < sc.n; ++i)
            phi[i] = (*sc.potential)[static_cast<std::size_t>(i)];
    return phi;
}

inline std::optional<MeasureXd> scenario_measure(const Scenario& sc) {
    if (!sc.measure)
        return std::nullopt;
    PotentialXd w(sc.n);
    for (int i = 0; i < sc.n; ++i)
        w[i] = (*sc.measure)[static_cast<std::size_t>(i)];
    return MeasureXd(std::move(w));
}

}  // namespace specpot
