#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dchlab/game.hpp"

namespace testsupport {

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// deterministic payoff in [-1, 1] with enough spread to avoid ties
inline double hash_payoff(uint64_t seed, uint64_t term, uint64_t tp, uint64_t player) {
  uint64_t h = splitmix64(seed ^ (term * 1000003ULL + tp * 101ULL + player));
  return (static_cast<double>(h % 200001ULL) - 100000.0) / 100000.0;
}

// Full-tree multi-stage game: `arity` actions per player at every history,
// no absorbing nodes, pseudo-random terminal payoffs.
inline dchlab::MultiStageGame make_toy_game(int n, const std::vector<int>& type_counts,
                                            const std::vector<double>& joint_prior, int T,
                                            int arity, uint64_t payoff_seed) {
  dchlab::MultiStageGame g;
  g.num_players = n;
  g.horizon = T;
  g.type_labels.resize(n);
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < type_counts[i]; ++c)
      g.type_labels[i].push_back(std::string(1, static_cast<char>('a' + c)));
  g.prior = joint_prior;

  std::vector<std::string> acts;
  for (int a = 0; a < arity; ++a) acts.push_back(std::string(1, static_cast<char>('A' + a)));
  int profiles = 1;
  for (int i = 0; i < n; ++i) profiles *= arity;

  // breadth-first expansion of the full tree
  g.nodes.push_back({});
  g.nodes[0].num_actions.assign(n, arity);
  g.nodes[0].action_labels.assign(n, acts);
  g.nodes[0].child.assign(profiles, -1);
  for (size_t v = 0; v < g.nodes.size(); ++v) {
    const int depth = g.nodes[v].depth;
    for (int ap = 0; ap < profiles; ++ap) {
      std::string prof;
      for (int i = 0; i < n; ++i) prof += acts[g.action_in_profile(static_cast<int>(v), ap, i)];
      const std::string nm =
          g.nodes[v].name.empty() ? prof : g.nodes[v].name + "." + prof;
      if (depth + 1 < T) {
        dchlab::MultiStageGame::Node nd;
        nd.depth = depth + 1;
        nd.parent = static_cast<int>(v);
        nd.profile_from_parent = ap;
        nd.num_actions.assign(n, arity);
        nd.action_labels.assign(n, acts);
        nd.child.assign(profiles, -1);
        nd.name = nm;
        g.nodes[v].child[ap] = static_cast<int>(g.nodes.size());
        g.nodes.push_back(std::move(nd));
      } else {
        dchlab::MultiStageGame::Terminal t;
        t.parent = static_cast<int>(v);
        t.profile_from_parent = ap;
        t.depth = depth + 1;
        t.name = nm;
        g.nodes[v].child[ap] = ~static_cast<int>(g.terminals.size());
        g.terminals.push_back(std::move(t));
      }
    }
  }
  const int P = g.num_type_profiles();
  g.payoffs.resize(g.terminals.size() * static_cast<size_t>(P) * n);
  for (size_t term = 0; term < g.terminals.size(); ++term)
    for (int tp = 0; tp < P; ++tp)
      for (int i = 0; i < n; ++i)
        g.payoffs[(term * P + tp) * n + i] = hash_payoff(payoff_seed, term, tp, i);
  g.validate();
  return g;
}

inline std::vector<double> independent_prior(const std::vector<std::vector<double>>& marginals) {
  int P = 1;
  for (const auto& m : marginals) P *= static_cast<int>(m.size());
  std::vector<double> prior(P, 1.0);
  for (int tp = 0; tp < P; ++tp) {
    int rest = tp;
    for (const auto& m : marginals) {
      prior[tp] *= m[rest % m.size()];
      rest /= static_cast<int>(m.size());
    }
  }
  return prior;
}

}  // namespace testsupport
