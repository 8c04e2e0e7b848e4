#pragma once

#include <iosfwd>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "hiernet/graph.hpp"
#include "hiernet/p1.hpp"
#include "hiernet/params.hpp"

namespace hiernet {

// Network file: first line "n <N>", then one "<i> <j>" line per present edge
// (1-based, i < j). Blank lines and '#' comments are ignored.
Network read_network(std::istream& in, const std::string& source = "<stream>");
Network read_network_file(const std::string& path);
void write_network(const Network& x, std::ostream& out);

// Dependency-graph file: first line "n <N>", then one "<i>-<j> <k>-<l>" line
// per edge between the dyad nodes ij and kl.
DependencyGraph read_dep_graph(std::istream& in, const std::string& source = "<stream>");
DependencyGraph read_dep_graph_file(const std::string& path);
void write_dep_graph(const DependencyGraph& dep, std::ostream& out);

// Directed network file: first line "n <N> directed", then "<i> <j> <state>"
// lines with state in {00, 10, 01, 11}; 10 is an arrow from i to j. Dyads not
// listed are 00.
DirectedNetwork read_directed_network(std::istream& in,
                                      const std::string& source = "<stream>");
DirectedNetwork read_directed_network_file(const std::string& path);
void write_directed_network(const DirectedNetwork& x, std::ostream& out);

// Parameter files are JSON: {"q": [...], "t": ...} for the hierarchical
// Erdos-Renyi model, {"beta": [[...], ...], "tau": [...]} for the beta model,
// {"alpha": [[...]], "beta": [[...]], "alpha_t": [...], "beta_t": [...],
//  "tau": [...]} for p1. Omitted entries are zero.
HERParams her_params_from_json(const nlohmann::json& j);
HBetaParams hbeta_params_from_json(const nlohmann::json& j, int n);
P1Params p1_params_from_json(const nlohmann::json& j, int n);

nlohmann::json her_params_to_json(const HERParams& p);
nlohmann::json hbeta_params_to_json(const HBetaParams& p);

nlohmann::json load_json_file(const std::string& path);

// Writes through a temporary file in the same directory plus rename, so a
// crash never leaves a half-written output.
void atomic_write_file(const std::string& path, const std::string& contents);

// Fixed-width decimal formatting used by CSV/TSV output (%.17g round-trips).
std::string format_double(double value);

}  // namespace hiernet
