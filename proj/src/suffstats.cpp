#include "hiernet/suffstats.hpp"

#include "hiernet/errors.hpp"
#include "hiernet/params.hpp"

namespace hiernet {

namespace {

bool all_present(const Network& x, const Clique& c) {
  for (int dy : c.dyads)
    if (!x.test(dy)) return false;
  return true;
}

void check_dims(const Network& x, const CliqueCatalog& catalog) {
  if (x.n() != catalog.n) {
    throw ValidationError("network has n=" + std::to_string(x.n()) +
                          " but catalog has n=" + std::to_string(catalog.n));
  }
}

}  // namespace

HERStats her_stats(const Network& x, const CliqueCatalog& catalog) {
  check_dims(x, catalog);
  HERStats stats;
  stats.s.assign(std::size_t(catalog.d), 0);
  for (const Clique& c : catalog.cliques) {
    if (!all_present(x, c)) continue;
    if (c.kind == CliqueKind::Triangle)
      ++stats.s_t;
    else
      ++stats.s[std::size_t(c.size() - 1)];
  }
  return stats;
}

HBetaStats hbeta_stats(const Network& x, const CliqueCatalog& catalog) {
  check_dims(x, catalog);
  HBetaStats stats;
  stats.n = catalog.n;
  stats.d = catalog.d;
  stats.d_stats.assign(std::size_t(catalog.n) * catalog.d, 0);
  stats.d_t.assign(std::size_t(catalog.n), 0);
  for (const Clique& c : catalog.cliques) {
    if (!all_present(x, c)) continue;
    if (c.kind == CliqueKind::Triangle) {
      for (int node : c.tri_nodes) ++stats.d_t[std::size_t(node)];
    } else if (c.size() == 1) {
      // A present dyad counts toward the degree of both endpoints.
      const auto e = dyad_from_index(c.dyads[0], catalog.n);
      ++stats.d_stats[std::size_t(e.first - 1) * catalog.d];
      ++stats.d_stats[std::size_t(e.second - 1) * catalog.d];
    } else {
      ++stats.d_stats[std::size_t(c.hub) * catalog.d + (c.size() - 1)];
    }
  }
  return stats;
}

std::int64_t er_stats(const Network& x) { return x.edge_count(); }

std::vector<double> stat_vec(const HERStats& s) {
  std::vector<double> v;
  v.reserve(s.s.size() + 1);
  for (std::int64_t val : s.s) v.push_back(double(val));
  v.push_back(double(s.s_t));
  return v;
}

std::vector<double> stat_vec(const HBetaStats& s) {
  std::vector<double> v;
  v.reserve(s.d_stats.size() + s.d_t.size());
  for (std::int64_t val : s.d_stats) v.push_back(double(val));
  for (std::int64_t val : s.d_t) v.push_back(double(val));
  return v;
}

}  // namespace hiernet
