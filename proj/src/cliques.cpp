#include "hiernet/cliques.hpp"

#include <algorithm>
#include <string>

#include "hiernet/errors.hpp"

namespace hiernet {

namespace {

// Classify a set of pairwise-adjacent dyads as a star (shared network node)
// or a hubless triangle.
Clique classify(std::vector<int> dyads, int n) {
  Clique c;
  c.dyads = std::move(dyads);
  const auto ends0 = dyad_from_index(c.dyads[0], n);
  int common[2] = {ends0.first, ends0.second};
  int ncommon = 2;
  for (std::size_t k = 1; k < c.dyads.size(); ++k) {
    const auto e = dyad_from_index(c.dyads[k], n);
    int kept = 0;
    for (int s = 0; s < ncommon; ++s) {
      if (common[s] == e.first || common[s] == e.second) common[kept++] = common[s];
    }
    ncommon = kept;
    if (ncommon == 0) break;
  }
  if (ncommon > 0) {
    c.kind = CliqueKind::Star;
    c.hub = c.size() >= 2 ? common[0] - 1 : -1;
    return c;
  }
  if (c.size() == 3) {
    // Must be {ij, ik, jk}: three distinct dyads on exactly three nodes.
    std::vector<int> nodes;
    for (int dy : c.dyads) {
      const auto e = dyad_from_index(dy, n);
      nodes.push_back(e.first);
      nodes.push_back(e.second);
    }
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    if (nodes.size() == 3) {
      c.kind = CliqueKind::Triangle;
      c.tri_nodes = {nodes[0] - 1, nodes[1] - 1, nodes[2] - 1};
      return c;
    }
  }
  std::string members;
  for (int dy : c.dyads) {
    const auto e = dyad_from_index(dy, n);
    if (!members.empty()) members += " ";
    members += std::to_string(e.first) + "-" + std::to_string(e.second);
  }
  throw ComputeError("clique {" + members +
                     "} is neither a star nor a triangle; dependency graph "
                     "violates the Markov dependence property");
}

void extend(const DependencyGraph& dep, std::vector<int>& current,
            const std::vector<int>& candidates, std::vector<std::vector<int>>& out) {
  out.push_back(current);
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    const int w = candidates[k];
    std::vector<int> next;
    const auto& nb = dep.neighbors(w);
    for (std::size_t l = k + 1; l < candidates.size(); ++l) {
      if (std::binary_search(nb.begin(), nb.end(), candidates[l]))
        next.push_back(candidates[l]);
    }
    current.push_back(w);
    extend(dep, current, next, out);
    current.pop_back();
  }
}

}  // namespace

CliqueCatalog enumerate_cliques(const DependencyGraph& dep) {
  CliqueCatalog cat;
  cat.n = dep.n();
  cat.m = dep.m();

  // Ordered recursive extension: each clique is grown only by higher-indexed
  // common neighbors, so every clique is emitted exactly once.
  std::vector<std::vector<int>> member_sets;
  for (int v = 0; v < dep.m(); ++v) {
    std::vector<int> current{v};
    std::vector<int> candidates;
    for (int w : dep.neighbors(v))
      if (w > v) candidates.push_back(w);
    extend(dep, current, candidates, member_sets);
  }
  std::stable_sort(member_sets.begin(), member_sets.end(),
                   [](const std::vector<int>& a, const std::vector<int>& b) {
                     if (a.size() != b.size()) return a.size() < b.size();
                     return a < b;
                   });

  cat.cliques.reserve(member_sets.size());
  for (auto& members : member_sets) {
    cat.cliques.push_back(classify(std::move(members), dep.n()));
  }

  for (std::size_t idx = 0; idx < cat.cliques.size(); ++idx) {
    const Clique& c = cat.cliques[idx];
    if (c.kind == CliqueKind::Triangle) {
      cat.has_triangles = true;
      cat.triangles.push_back(int(idx));
    } else {
      cat.d = std::max(cat.d, c.size());
      if (int(cat.star_by_size.size()) < c.size()) cat.star_by_size.resize(std::size_t(c.size()));
      cat.star_by_size[std::size_t(c.size() - 1)].push_back(int(idx));
    }
  }
  if (cat.star_by_size.empty()) cat.star_by_size.resize(1);
  return cat;
}

CoreDecomposition core_decompose(const DependencyGraph& dep) {
  CoreDecomposition dec;
  dec.n = dep.n();
  dec.m = dep.m();
  dec.core_pos.assign(std::size_t(dep.m()), -1);
  for (int v = 0; v < dep.m(); ++v) {
    if (dep.degree(v) > 0) {
      dec.core_pos[std::size_t(v)] = int(dec.core_dyads.size());
      dec.core_dyads.push_back(v);
    } else {
      dec.isolated_dyads.push_back(v);
    }
  }
  dec.core_size = int(dec.core_dyads.size());
  return dec;
}

}  // namespace hiernet
