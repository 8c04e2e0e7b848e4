#include "hiernet/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include <nlohmann/json.hpp>

namespace hiernet {

namespace {

// Yields the meaningful lines of a text input: comments stripped, blanks
// skipped, with 1-based line numbers for error messages.
class LineReader {
 public:
  LineReader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

  bool next(std::string& out) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      std::size_t begin = line.find_first_not_of(" \t\r\n");
      if (begin == std::string::npos) continue;
      std::size_t end = line.find_last_not_of(" \t\r\n");
      out = line.substr(begin, end - begin + 1);
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw ValidationError(source_ + ":" + std::to_string(line_no_) + ": " + what);
  }

 private:
  std::istream& in_;
  std::string source_;
  int line_no_ = 0;
};

int parse_header(LineReader& reader, bool expect_directed) {
  std::string line;
  if (!reader.next(line)) reader.fail("missing header line 'n <N>'");
  std::istringstream ss(line);
  std::string tag, extra;
  int n = 0;
  ss >> tag >> n;
  if (tag != "n" || ss.fail() || n < 1) reader.fail("expected header 'n <N>'");
  const bool directed = bool(ss >> extra) && extra == "directed";
  if (expect_directed && !directed) reader.fail("expected header 'n <N> directed'");
  if (!expect_directed && directed) reader.fail("file is a directed network");
  return n;
}

std::pair<int, int> parse_dyad_token(LineReader& reader, const std::string& token, int n) {
  const auto dash = token.find('-');
  if (dash == std::string::npos || dash == 0 || dash + 1 >= token.size()) {
    reader.fail("expected a dyad token '<i>-<j>', got '" + token + "'");
  }
  int i = 0, j = 0;
  try {
    i = std::stoi(token.substr(0, dash));
    j = std::stoi(token.substr(dash + 1));
  } catch (const std::exception&) {
    reader.fail("expected a dyad token '<i>-<j>', got '" + token + "'");
  }
  if (i < 1 || j <= i || j > n) {
    reader.fail("dyad " + token + " out of range for n=" + std::to_string(n));
  }
  return {i, j};
}

std::ifstream open_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  return in;
}

}  // namespace

Network read_network(std::istream& in, const std::string& source) {
  LineReader reader(in, source);
  const int n = parse_header(reader, false);
  Network net(n);
  std::string line;
  while (reader.next(line)) {
    std::istringstream ss(line);
    int i = 0, j = 0;
    ss >> i >> j;
    if (ss.fail()) reader.fail("expected an edge line '<i> <j>'");
    if (i < 1 || j <= i || j > n) {
      reader.fail("edge " + std::to_string(i) + " " + std::to_string(j) +
                  " out of range for n=" + std::to_string(n) + " (need i < j)");
    }
    net.set_edge(i, j, true);
  }
  return net;
}

Network read_network_file(const std::string& path) {
  auto in = open_file(path);
  return read_network(in, path);
}

void write_network(const Network& x, std::ostream& out) {
  out << "n " << x.n() << "\n";
  for (int idx = 0; idx < x.dyads(); ++idx) {
    if (!x.test(idx)) continue;
    const auto [i, j] = dyad_from_index(idx, x.n());
    out << i << " " << j << "\n";
  }
}

DependencyGraph read_dep_graph(std::istream& in, const std::string& source) {
  LineReader reader(in, source);
  const int n = parse_header(reader, false);
  std::vector<std::pair<int, int>> edges;
  std::string line;
  while (reader.next(line)) {
    std::istringstream ss(line);
    std::string ta, tb;
    ss >> ta >> tb;
    if (ss.fail() || ta.empty() || tb.empty()) {
      reader.fail("expected an edge line '<i>-<j> <k>-<l>'");
    }
    const auto [i, j] = parse_dyad_token(reader, ta, n);
    const auto [k, l] = parse_dyad_token(reader, tb, n);
    const int a = dyad_index(i, j, n);
    const int b = dyad_index(k, l, n);
    if (a == b) reader.fail("dependency edge joins the dyad node " + ta + " to itself");
    edges.emplace_back(a, b);
  }
  return DependencyGraph(n, edges);
}

DependencyGraph read_dep_graph_file(const std::string& path) {
  auto in = open_file(path);
  return read_dep_graph(in, path);
}

void write_dep_graph(const DependencyGraph& dep, std::ostream& out) {
  out << "n " << dep.n() << "\n";
  for (const auto& [a, b] : dep.edges()) {
    const auto da = dyad_from_index(a, dep.n());
    const auto db = dyad_from_index(b, dep.n());
    out << da.first << "-" << da.second << " " << db.first << "-" << db.second << "\n";
  }
}

DirectedNetwork read_directed_network(std::istream& in, const std::string& source) {
  LineReader reader(in, source);
  const int n = parse_header(reader, true);
  DirectedNetwork net(n);
  std::string line;
  while (reader.next(line)) {
    std::istringstream ss(line);
    int i = 0, j = 0;
    std::string state;
    ss >> i >> j >> state;
    if (ss.fail()) reader.fail("expected a dyad line '<i> <j> <state>'");
    if (i < 1 || j <= i || j > n) {
      reader.fail("dyad " + std::to_string(i) + " " + std::to_string(j) +
                  " out of range for n=" + std::to_string(n) + " (need i < j)");
    }
    std::uint8_t code = 0;
    if (state == "00") code = 0;
    else if (state == "01") code = 1;
    else if (state == "10") code = 2;
    else if (state == "11") code = 3;
    else reader.fail("state must be one of 00, 10, 01, 11; got '" + state + "'");
    net.states[std::size_t(dyad_index(i, j, n))] = code;
  }
  return net;
}

DirectedNetwork read_directed_network_file(const std::string& path) {
  auto in = open_file(path);
  return read_directed_network(in, path);
}

void write_directed_network(const DirectedNetwork& x, std::ostream& out) {
  static const char* kCodes[4] = {"00", "01", "10", "11"};
  out << "n " << x.n << " directed\n";
  for (int idx = 0; idx < dyad_count(x.n); ++idx) {
    if (x.states[std::size_t(idx)] == 0) continue;
    const auto [i, j] = dyad_from_index(idx, x.n);
    out << i << " " << j << " " << kCodes[x.states[std::size_t(idx)]] << "\n";
  }
}

namespace {

std::vector<double> json_vector(const nlohmann::json& j, const std::string& key) {
  if (!j.contains(key)) return {};
  if (!j.at(key).is_array()) throw ValidationError("'" + key + "' must be an array");
  return j.at(key).get<std::vector<double>>();
}

// n x d matrix given as an array of n rows of equal length.
std::vector<double> json_matrix(const nlohmann::json& j, const std::string& key, int n,
                                int& d_out) {
  d_out = 0;
  if (!j.contains(key)) return {};
  const auto& rows = j.at(key);
  if (!rows.is_array() || int(rows.size()) != n) {
    throw ValidationError("'" + key + "' must be an array of " + std::to_string(n) +
                          " rows");
  }
  std::vector<double> flat;
  for (const auto& row : rows) {
    if (!row.is_array()) throw ValidationError("'" + key + "' rows must be arrays");
    if (d_out == 0) d_out = int(row.size());
    if (int(row.size()) != d_out) {
      throw ValidationError("'" + key + "' rows must all have the same length");
    }
    for (const auto& v : row) flat.push_back(v.get<double>());
  }
  return flat;
}

}  // namespace

HERParams her_params_from_json(const nlohmann::json& j) {
  HERParams p;
  p.q = json_vector(j, "q");
  if (j.contains("t")) p.t = j.at("t").get<double>();
  return p;
}

HBetaParams hbeta_params_from_json(const nlohmann::json& j, int n) {
  HBetaParams p;
  p.n = n;
  p.beta = json_matrix(j, "beta", n, p.d);
  if (p.beta.empty()) {
    p.d = 1;
    p.beta.assign(std::size_t(n), 0.0);
  }
  p.tau = json_vector(j, "tau");
  if (p.tau.empty()) p.tau.assign(std::size_t(n), 0.0);
  if (int(p.tau.size()) != n) throw ValidationError("'tau' must have n entries");
  return p;
}

P1Params p1_params_from_json(const nlohmann::json& j, int n) {
  P1Params p;
  p.n = n;
  int d_alpha = 0, d_beta = 0;
  p.alpha = json_matrix(j, "alpha", n, d_alpha);
  p.beta = json_matrix(j, "beta", n, d_beta);
  if (!p.alpha.empty() && !p.beta.empty() && d_alpha != d_beta) {
    throw ValidationError("'alpha' and 'beta' must have the same row length");
  }
  p.d = std::max(d_alpha, d_beta);
  if (p.d == 0) p.d = 1;
  if (p.alpha.empty()) p.alpha.assign(std::size_t(n) * p.d, 0.0);
  if (p.beta.empty()) p.beta.assign(std::size_t(n) * p.d, 0.0);
  p.alpha_t = json_vector(j, "alpha_t");
  p.beta_t = json_vector(j, "beta_t");
  p.tau = json_vector(j, "tau");
  for (const auto* v : {&p.alpha_t, &p.beta_t, &p.tau}) {
    if (!v->empty() && int(v->size()) != n) {
      throw ValidationError("p1 node vectors must have n entries");
    }
  }
  return p;
}

nlohmann::json her_params_to_json(const HERParams& p) {
  return nlohmann::json{{"q", p.q}, {"t", p.t}};
}

nlohmann::json hbeta_params_to_json(const HBetaParams& p) {
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 0; i < p.n; ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int r = 1; r <= p.d; ++r) row.push_back(p.beta_at(i, r));
    rows.push_back(std::move(row));
  }
  return nlohmann::json{{"beta", rows}, {"tau", p.tau}};
}

nlohmann::json load_json_file(const std::string& path) {
  auto in = open_file(path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& err) {
    throw ValidationError(path + ": " + err.what());
  }
  return j;
}

void atomic_write_file(const std::string& path, const std::string& contents) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write " + tmp);
    out << contents;
    out.flush();
    if (!out) throw ValidationError("short write to " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    throw ValidationError("cannot rename " + tmp + " to " + path);
  }
}

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

}  // namespace hiernet
