#pragma once

#include "netsemi/edge_function.hpp"
#include "netsemi/errors.hpp"
#include "netsemi/network.hpp"
#include "netsemi/state.hpp"

#include "json.hpp"

#include <cstddef>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace netsemi {

/// Parsed network spec file (schema documented in docs/spec_format.md).
struct NetworkFile {
    int version = 1;
    BoundaryMatrix boundary;
    std::optional<GraphSpec> graph;
    std::optional<StateVector> initial;
    std::optional<StateVector> rhs;

    const NetworkSignature& signature() const { return boundary.signature(); }

    const StateVector& initial_data() const
    {
        if (!initial) {
            throw SpecError("spec file has no 'initial' section");
        }
        return *initial;
    }
    /// Resolvent input: 'rhs' when given, else 'initial'.
    const StateVector& resolvent_data() const
    {
        if (rhs) {
            return *rhs;
        }
        if (!initial) {
            throw SpecError("spec file has neither 'rhs' nor 'initial' section");
        }
        return *initial;
    }
};

namespace detail {

using nlohmann::json;

inline void only_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where)
{
    if (!j.is_object()) {
        throw SpecError(where + " must be an object");
    }
    for (const auto& [key, value] : j.items()) {
        bool known = false;
        for (const char* a : allowed) {
            if (key == a) {
                known = true;
                break;
            }
        }
        if (!known) {
            throw SpecError("unknown field '" + key + "' in " + where);
        }
    }
}

inline const json& required(const json& j, const char* key, const std::string& where)
{
    if (!j.contains(key)) {
        throw SpecError("missing field '" + std::string(key) + "' in " + where);
    }
    return j.at(key);
}

inline double number(const json& j, const char* key, const std::string& where)
{
    const json& v = required(j, key, where);
    if (!v.is_number()) {
        throw SpecError("field '" + std::string(key) + "' in " + where + " must be a number");
    }
    return v.get<double>();
}

inline std::vector<double> numbers(const json& j, const char* key, const std::string& where)
{
    const json& v = required(j, key, where);
    if (!v.is_array()) {
        throw SpecError("field '" + std::string(key) + "' in " + where + " must be an array of numbers");
    }
    std::vector<double> out;
    for (const auto& e : v) {
        if (!e.is_number()) {
            throw SpecError("field '" + std::string(key) + "' in " + where + " must be an array of numbers");
        }
        out.push_back(e.get<double>());
    }
    return out;
}

inline std::string text(const json& j, const char* key, const std::string& where)
{
    const json& v = required(j, key, where);
    if (!v.is_string()) {
        throw SpecError("field '" + std::string(key) + "' in " + where + " must be a string");
    }
    return v.get<std::string>();
}

inline std::size_t count(const json& j, const char* key, const std::string& where)
{
    const json& v = required(j, key, where);
    if (!v.is_number_integer() || v.get<long long>() < 0) {
        throw SpecError("field '" + std::string(key) + "' in " + where + " must be a nonnegative integer");
    }
    return v.get<std::size_t>();
}

inline EdgeFunction parse_function(const json& j, Domain d, const std::string& where)
{
    if (!j.is_object()) {
        throw SpecError(where + " must be an object");
    }
    const std::string kind = text(j, "kind", where);
    try {
        if (kind == "const") {
            only_keys(j, {"kind", "value"}, where);
            return EdgeFunction::constant(d, number(j, "value", where));
        }
        if (kind == "poly") {
            only_keys(j, {"kind", "coefficients"}, where);
            return EdgeFunction::polynomial(d, numbers(j, "coefficients", where));
        }
        if (kind == "exp") {
            only_keys(j, {"kind", "a", "b"}, where);
            return EdgeFunction::exponential(d, number(j, "a", where), number(j, "b", where));
        }
        if (kind == "gauss") {
            only_keys(j, {"kind", "a", "mu", "sigma"}, where);
            return EdgeFunction::gaussian(d, number(j, "a", where), number(j, "mu", where), number(j, "sigma", where));
        }
        if (kind == "indicator") {
            only_keys(j, {"kind", "a", "b"}, where);
            return EdgeFunction::indicator(d, number(j, "a", where), number(j, "b", where));
        }
        if (kind == "grid") {
            only_keys(j, {"kind", "x", "y"}, where);
            return EdgeFunction::grid(d, numbers(j, "x", where), numbers(j, "y", where));
        }
        if (kind == "sum") {
            only_keys(j, {"kind", "terms"}, where);
            const json& terms = required(j, "terms", where);
            if (!terms.is_array()) {
                throw SpecError("'terms' in " + where + " must be an array");
            }
            std::vector<double> coefs;
            std::vector<EdgeFunction> parts;
            for (std::size_t i = 0; i < terms.size(); ++i) {
                const std::string w = where + ".terms[" + std::to_string(i) + "]";
                only_keys(terms[i], {"coef", "f"}, w);
                coefs.push_back(terms[i].contains("coef") ? number(terms[i], "coef", w) : 1.0);
                parts.push_back(parse_function(required(terms[i], "f", w), d, w + ".f"));
            }
            return EdgeFunction::sum(d, std::move(coefs), std::move(parts));
        }
    } catch (const DomainError& e) {
        throw SpecError(where + ": " + e.what());
    }
    throw SpecError("unknown function kind '" + kind + "' in " + where);
}

inline StateVector parse_state(const json& j, const NetworkSignature& sig, const std::string& where)
{
    only_keys(j, {"u", "v", "w"}, where);
    StateVector s;
    const char* names[] = {"u", "v", "w"};
    const std::size_t expected[] = {sig.m, sig.q, sig.r};
    for (std::size_t i = 0; i < 3; ++i) {
        const EdgeKind k = kAllKinds[i];
        if (!j.contains(names[i])) {
            if (expected[i] != 0) {
                throw SpecError("missing field '" + std::string(names[i]) + "' in " + where);
            }
            continue;
        }
        const json& arr = j.at(names[i]);
        if (!arr.is_array() || arr.size() != expected[i]) {
            throw SpecError(where + "." + names[i] + " must be an array of " + std::to_string(expected[i]) + " functions");
        }
        for (std::size_t e = 0; e < arr.size(); ++e) {
            s.of(k).push_back(
                parse_function(arr[e], domain_of(k), where + "." + names[i] + "[" + std::to_string(e) + "]"));
        }
    }
    return s;
}

inline GraphSpec parse_graph(const json& j)
{
    const std::string where = "graph";
    only_keys(j, {"vertices", "bounded_edges", "outgoing_edges", "incoming_edges", "weights", "column_sum"}, where);
    GraphSpec g;
    for (const auto& v : required(j, "vertices", where)) {
        if (!v.is_string()) throw SpecError("graph.vertices must be strings");
        g.vertices.push_back(v.get<std::string>());
    }
    auto list = [&](const char* key) -> const json& {
        static const json empty = json::array();
        if (!j.contains(key)) return empty;
        if (!j.at(key).is_array()) throw SpecError("graph." + std::string(key) + " must be an array");
        return j.at(key);
    };
    for (const auto& e : list("bounded_edges")) {
        only_keys(e, {"id", "tail", "head"}, "graph.bounded_edges");
        g.bounded_edges.push_back({text(e, "id", "bounded edge"), text(e, "tail", "bounded edge"), text(e, "head", "bounded edge")});
    }
    for (const auto& e : list("outgoing_edges")) {
        only_keys(e, {"id", "vertex"}, "graph.outgoing_edges");
        g.outgoing_edges.push_back({text(e, "id", "outgoing edge"), text(e, "vertex", "outgoing edge")});
    }
    for (const auto& e : list("incoming_edges")) {
        only_keys(e, {"id", "vertex"}, "graph.incoming_edges");
        g.incoming_edges.push_back({text(e, "id", "incoming edge"), text(e, "vertex", "incoming edge")});
    }
    for (const auto& w : list("weights")) {
        only_keys(w, {"vertex", "to", "from", "value"}, "graph.weights");
        g.weights.push_back({text(w, "vertex", "weight"), text(w, "to", "weight"), text(w, "from", "weight"),
                             number(w, "value", "weight")});
    }
    if (j.contains("column_sum")) {
        g.column_sum = number(j, "column_sum", where);
    }
    return g;
}

inline BoundaryMatrix parse_matrix(const json& j, const NetworkSignature& sig)
{
    if (!j.is_array()) {
        throw SpecError("matrix must be an array of rows");
    }
    if (j.size() != sig.boundary_rows()) {
        throw SpecError("matrix has " + std::to_string(j.size()) + " rows, signature requires "
                        + std::to_string(sig.boundary_rows()));
    }
    Matrix a(static_cast<Eigen::Index>(sig.boundary_rows()), static_cast<Eigen::Index>(sig.boundary_cols()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        const json& row = j[i];
        if (!row.is_array() || row.size() != sig.boundary_cols()) {
            throw SpecError("matrix row " + std::to_string(i) + " must hold " + std::to_string(sig.boundary_cols())
                            + " numbers");
        }
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (!row[c].is_number()) throw SpecError("matrix entries must be numbers");
            a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = row[c].get<double>();
        }
    }
    return BoundaryMatrix(sig, std::move(a));
}

} // namespace detail

inline NetworkFile parse_network_spec(const nlohmann::json& j)
{
    using namespace detail;
    only_keys(j, {"version", "signature", "matrix", "graph", "initial", "rhs"}, "spec");
    const json& ver = required(j, "version", "spec");
    if (!ver.is_number_integer() || ver.get<int>() != 1) {
        throw SpecError("unsupported spec version (expected 1)");
    }
    const json& sj = required(j, "signature", "spec");
    only_keys(sj, {"m", "q", "r"}, "signature");
    const NetworkSignature sig(count(sj, "m", "signature"), count(sj, "q", "signature"), count(sj, "r", "signature"));

    const bool has_matrix = j.contains("matrix");
    const bool has_graph = j.contains("graph");
    if (has_matrix == has_graph) {
        throw SpecError("spec must contain exactly one of 'matrix' or 'graph'");
    }
    std::optional<GraphSpec> graph;
    std::optional<BoundaryMatrix> boundary;
    if (has_graph) {
        graph = parse_graph(j.at("graph"));
        if (!(graph->signature() == sig)) {
            throw SpecError("graph edge counts do not match the declared signature");
        }
        boundary = assemble_from_graph(*graph);
    } else {
        boundary = parse_matrix(j.at("matrix"), sig);
    }
    NetworkFile file{1, *boundary, graph, std::nullopt, std::nullopt};
    if (j.contains("initial")) file.initial = parse_state(j.at("initial"), sig, "initial");
    if (j.contains("rhs")) file.rhs = parse_state(j.at("rhs"), sig, "rhs");
    return file;
}

inline NetworkFile parse_network_spec(const std::string& text)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw SpecError(std::string("spec is not valid JSON: ") + e.what());
    }
    return parse_network_spec(j);
}

inline NetworkFile load_network_spec(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw SpecError("cannot read spec file '" + path + "'");
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_network_spec(buf.str());
}

} // namespace netsemi
