#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace dchlab {

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Finite multi-stage game with observed actions: all players move
// simultaneously each period, every past action profile is public, and types
// are private information fixed at the start. Immutable once built; safe to
// share read-only across threads.
//
// Histories form a tree. Nonterminal histories live in `nodes` (node 0 is the
// empty history); terminal histories live in `terminals`. A child entry c of
// a node is an internal node when c >= 0 and terminal number ~c when c < 0.
class MultiStageGame {
 public:
  struct Node {
    int depth = 0;                   // completed periods before this decision
    int parent = -1;                 // -1 for the root
    int profile_from_parent = -1;
    std::vector<int> num_actions;    // per player, >= 1
    std::vector<std::vector<std::string>> action_labels;  // [player][action]
    std::vector<int> child;          // per action profile index
    std::string name;                // root: "", else "CW" or "CW.WW" etc.
  };
  struct Terminal {
    int parent = -1;
    int profile_from_parent = -1;
    int depth = 0;                   // completed periods
    std::string name;
  };

  int num_players = 0;
  std::vector<std::vector<std::string>> type_labels;  // [player][type]
  std::vector<double> prior;                          // joint, over flat type profiles
  int horizon = 0;
  std::vector<Node> nodes;
  std::vector<Terminal> terminals;
  // payoffs[(terminal * P + type_profile) * n + player]
  std::vector<double> payoffs;

  int num_types(int player) const { return static_cast<int>(type_labels[player].size()); }

  int num_type_profiles() const {
    int p = 1;
    for (int i = 0; i < num_players; ++i) p *= num_types(i);
    return p;
  }

  // Flat type-profile index; player 0 is the fastest-varying digit.
  int type_profile_index(const std::vector<int>& types) const {
    int idx = 0, stride = 1;
    for (int i = 0; i < num_players; ++i) {
      idx += types[i] * stride;
      stride *= num_types(i);
    }
    return idx;
  }

  int type_in_profile(int profile, int player) const {
    for (int i = 0; i < player; ++i) profile /= num_types(i);
    return profile % num_types(player);
  }

  int num_action_profiles(int node) const {
    int p = 1;
    for (int c : nodes[node].num_actions) p *= c;
    return p;
  }

  int action_in_profile(int node, int profile, int player) const {
    for (int i = 0; i < player; ++i) profile /= nodes[node].num_actions[i];
    return profile % nodes[node].num_actions[player];
  }

  double payoff(int terminal, int type_profile, int player) const {
    return payoffs[(static_cast<size_t>(terminal) * num_type_profiles() + type_profile) *
                       num_players + player];
  }

  // Marginal prior mass of one player's type.
  double type_marginal(int player, int type) const {
    double s = 0.0;
    for (int tp = 0; tp < num_type_profiles(); ++tp)
      if (type_in_profile(tp, player) == type) s += prior[tp];
    return s;
  }

  // F(theta_{-i} | theta_i) for the full profile `type_profile`.
  double conditional_prior(int player, int type_profile) const {
    double m = type_marginal(player, type_in_profile(type_profile, player));
    if (m <= 0.0) return 0.0;
    return prior[type_profile] / m;
  }

  // Action-profile path from the root to `node`.
  std::vector<int> path_to(int node) const {
    std::vector<int> path;
    for (int v = node; v != 0; v = nodes[v].parent) path.push_back(nodes[v].profile_from_parent);
    std::reverse(path.begin(), path.end());
    return path;
  }

  // Structural checks. A strictly positive prior on every type profile is
  // required only when `require_full_support`; games built conditional on a
  // public event (the dirty-faces announcement) carry zero-mass profiles.
  void validate(bool require_full_support = true) const {
    if (num_players < 1) throw ValidationError("need at least one player");
    if (horizon < 1) throw ValidationError("horizon must be >= 1");
    if (static_cast<int>(type_labels.size()) != num_players)
      throw ValidationError("type_labels size mismatch");
    double sum = 0.0;
    for (double f : prior) {
      if (f < 0.0) throw ValidationError("prior mass must be nonnegative");
      if (require_full_support && !(f > 0.0))
        throw ValidationError("prior must be strictly positive on all type profiles");
      sum += f;
    }
    if (std::fabs(sum - 1.0) > 1e-9) throw ValidationError("prior must sum to 1");
    if (nodes.empty() || nodes[0].parent != -1 || nodes[0].depth != 0)
      throw ValidationError("node 0 must be the empty history");
    for (size_t v = 0; v < nodes.size(); ++v) {
      const Node& nd = nodes[v];
      if (static_cast<int>(nd.num_actions.size()) != num_players)
        throw ValidationError("action set must cover every player");
      for (int c : nd.num_actions)
        if (c < 1) throw ValidationError("every player needs a nonempty action set");
      if (static_cast<int>(nd.child.size()) != num_action_profiles(static_cast<int>(v)))
        throw ValidationError("child table size mismatch");
      if (nd.depth >= horizon) throw ValidationError("nonterminal history beyond horizon");
      for (int c : nd.child) {
        if (c >= 0) {
          if (c >= static_cast<int>(nodes.size()) || nodes[c].parent != static_cast<int>(v))
            throw ValidationError("child/parent links inconsistent");
        } else if (~c >= static_cast<int>(terminals.size())) {
          throw ValidationError("terminal id out of range");
        }
      }
    }
    for (const Terminal& t : terminals)
      if (t.depth > horizon) throw ValidationError("terminal beyond horizon");
    if (payoffs.size() !=
        terminals.size() * static_cast<size_t>(num_type_profiles()) * num_players)
      throw ValidationError("payoff table size mismatch");
  }
};

// Correlated-type transformation: uniform independent prior, payoffs
// reweighted by F(theta_{-i} | theta_i). The level-dependent strategy profile
// is invariant under this transformation.
inline MultiStageGame transform_correlated_game(const MultiStageGame& g) {
  MultiStageGame out = g;
  const int P = g.num_type_profiles();
  for (int tp = 0; tp < P; ++tp) out.prior[tp] = 1.0 / P;
  for (size_t term = 0; term < g.terminals.size(); ++term)
    for (int tp = 0; tp < P; ++tp)
      for (int i = 0; i < g.num_players; ++i)
        out.payoffs[(term * P + tp) * g.num_players + i] =
            g.conditional_prior(i, tp) * g.payoff(static_cast<int>(term), tp, i);
  return out;
}

}  // namespace dchlab
