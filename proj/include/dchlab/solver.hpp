#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "dchlab/game.hpp"
#include "dchlab/level_prior.hpp"
#include "dchlab/math_util.hpp"

namespace dchlab {

struct SolveOptions {
  // Expected-value comparisons within tie_tol are ties; ties get uniform mass.
  double tie_tol = 1e-12;
  // lambda < 0: exact best responses. lambda >= 0: logit quantal responses.
  double lambda = -1.0;
  // Grouped posterior tables can be dropped when only strategies are needed
  // (likelihood evaluation); expanded beliefs then remain unavailable.
  bool store_beliefs = true;
};

// One level's behavioral strategy: [type][node] -> distribution over actions.
using StrategySlice = std::vector<std::vector<std::vector<double>>>;

// Joint posterior over opponents' types and levels, with levels grouped into
// classes of identical lower-level strategy slices. Within a class the
// history is equally likely for every member level, so the exact per-level
// belief is the grouped mass split in prior proportions (see expand_belief).
struct GroupedBelief {
  std::vector<int> slots;                        // opponents, increasing player id
  std::vector<std::vector<int>> slot_classes;    // active class ids per slot
  // mass[type][node][ot * num_combos + combo]; ot runs over opponent-type
  // profiles (slot 0 fastest), combo over class combinations (slot 0 fastest)
  std::vector<std::vector<std::vector<double>>> mass;
};

struct Assessment {
  // strategy[k][player][type][node][action]
  std::vector<std::vector<StrategySlice>> strategy;
  // level -> class of identical slices, per player
  std::vector<std::vector<int>> level_class;          // [player][level]
  std::vector<std::vector<std::vector<int>>> class_members;  // [player][class]
  // belief[k][player], k >= 1 (index 0 unused)
  std::vector<std::vector<GroupedBelief>> belief;
  bool has_beliefs = false;
  double lambda = -1.0;  // quantal precision used, < 0 for best response

  int k_max() const { return static_cast<int>(strategy.size()) - 1; }
};

namespace detail {

inline std::vector<int> nodes_by_depth(const MultiStageGame& g) {
  std::vector<int> order(g.nodes.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return g.nodes[a].depth < g.nodes[b].depth; });
  return order;
}

// Flat index helpers over opponent type profiles (slot 0 fastest).
struct SlotSpace {
  std::vector<int> slots;
  std::vector<int> dims;
  int total = 1;

  int at(int flat, size_t slot) const {
    for (size_t s = 0; s < slot; ++s) flat /= dims[s];
    return flat % dims[slot];
  }
};

inline SlotSpace opponent_types(const MultiStageGame& g, int player) {
  SlotSpace sp;
  for (int j = 0; j < g.num_players; ++j)
    if (j != player) {
      sp.slots.push_back(j);
      sp.dims.push_back(g.num_types(j));
      sp.total *= g.num_types(j);
    }
  return sp;
}

inline int full_type_profile(const MultiStageGame& g, const SlotSpace& ot_space, int ot,
                             int player, int own_type) {
  std::vector<int> types(g.num_players);
  types[player] = own_type;
  for (size_t s = 0; s < ot_space.slots.size(); ++s)
    types[ot_space.slots[s]] = ot_space.at(ot, s);
  return g.type_profile_index(types);
}

}  // namespace detail

// Level-0 behavior: uniform randomization at every information set.
inline StrategySlice level0_strategy(const MultiStageGame& g, int player) {
  StrategySlice slice(g.num_types(player));
  for (auto& per_node : slice) {
    per_node.resize(g.nodes.size());
    for (size_t v = 0; v < g.nodes.size(); ++v) {
      int m = g.nodes[v].num_actions[player];
      per_node[v].assign(m, 1.0 / m);
    }
  }
  return slice;
}

// Recursive solve: level k best responds (or logit-responds) to the
// truncated distribution over levels 0..k-1, with joint Bayesian updating
// about opponents' types and levels at every history.
inline Assessment solve_dch(const MultiStageGame& g, const LevelPrior& prior,
                            const SolveOptions& opt = {}) {
  const int n = g.num_players;
  const int K = prior.k_max();
  const auto depth_order = detail::nodes_by_depth(g);

  Assessment A;
  A.lambda = opt.lambda;
  A.has_beliefs = opt.store_beliefs;
  A.strategy.assign(K + 1, std::vector<StrategySlice>(n));
  A.level_class.assign(n, std::vector<int>(K + 1, -1));
  A.class_members.assign(n, {});
  if (opt.store_beliefs) A.belief.assign(K + 1, std::vector<GroupedBelief>(n));

  for (int j = 0; j < n; ++j) {
    A.strategy[0][j] = level0_strategy(g, j);
    A.level_class[j][0] = 0;
    A.class_members[j] = {{0}};
  }

  for (int k = 1; k <= K; ++k) {
    for (int i = 0; i < n; ++i) {
      const auto ot_space = detail::opponent_types(g, i);
      // active strategy classes among opponents' levels < k, with prior mass
      std::vector<std::vector<int>> slot_classes(ot_space.slots.size());
      std::vector<std::vector<double>> slot_mass(ot_space.slots.size());
      int num_combos = 1;
      for (size_t s = 0; s < ot_space.slots.size(); ++s) {
        int j = ot_space.slots[s];
        for (size_t c = 0; c < A.class_members[j].size(); ++c) {
          double m = 0.0;
          for (int l : A.class_members[j][c])
            if (l < k) m += prior.masses[l];
          if (m > 0.0) {
            slot_classes[s].push_back(static_cast<int>(c));
            slot_mass[s].push_back(m);
          }
        }
        num_combos *= static_cast<int>(slot_classes[s].size());
      }
      auto combo_at = [&](int combo, size_t s) {
        for (size_t q = 0; q < s; ++q) combo /= static_cast<int>(slot_classes[q].size());
        return combo % static_cast<int>(slot_classes[s].size());
      };
      // representative level of a class = its first member (identical slices)
      auto class_rep = [&](int j, int c) { return A.class_members[j][c][0]; };

      const int E = ot_space.total * num_combos;
      StrategySlice slice(g.num_types(i));
      GroupedBelief gb;
      gb.slots = ot_space.slots;
      gb.slot_classes = slot_classes;
      gb.mass.resize(g.num_types(i));

      for (int th = 0; th < g.num_types(i); ++th) {
        // ---- forward pass: grouped posterior weights at every node ----
        std::vector<std::vector<double>> W(g.nodes.size(), std::vector<double>(E, 0.0));
        double root_sum = 0.0;
        for (int ot = 0; ot < ot_space.total; ++ot) {
          double f = g.prior[detail::full_type_profile(g, ot_space, ot, i, th)];
          if (f <= 0.0) continue;
          for (int combo = 0; combo < num_combos; ++combo) {
            double w = f;
            for (size_t s = 0; s < ot_space.slots.size(); ++s) w *= slot_mass[s][combo_at(combo, s)];
            W[0][ot * num_combos + combo] = w;
            root_sum += w;
          }
        }
        const bool degenerate = !(root_sum > 0.0);
        if (!degenerate)
          for (double& w : W[0]) w /= root_sum;

        for (int v : depth_order) {
          if (v == 0) continue;
          const int parent = g.nodes[v].parent;
          const int ap = g.nodes[v].profile_from_parent;
          double sum = 0.0;
          for (int ot = 0; ot < ot_space.total; ++ot) {
            for (int combo = 0; combo < num_combos; ++combo) {
              const int e = ot * num_combos + combo;
              double w = W[parent][e];
              if (w <= 0.0) continue;
              for (size_t s = 0; s < ot_space.slots.size(); ++s) {
                const int j = ot_space.slots[s];
                const int lev = class_rep(j, slot_classes[s][combo_at(combo, s)]);
                w *= A.strategy[lev][j][ot_space.at(ot, s)][parent]
                                [g.action_in_profile(parent, ap, j)];
              }
              W[v][e] = w;
              sum += w;
            }
          }
          // renormalize each period; the posterior form is scale invariant
          if (sum > 0.0)
            for (double& w : W[v]) w /= sum;
        }

        // ---- backward pass: values, choice rule ----
        slice[th].resize(g.nodes.size());
        std::vector<std::vector<double>> V(g.nodes.size());
        for (auto it = depth_order.rbegin(); it != depth_order.rend(); ++it) {
          const int v = *it;
          const int m = g.nodes[v].num_actions[i];
          std::vector<std::vector<double>> Q(m, std::vector<double>(E, 0.0));
          const int profiles = g.num_action_profiles(v);
          for (int ap = 0; ap < profiles; ++ap) {
            const int ai = g.action_in_profile(v, ap, i);
            const int child = g.nodes[v].child[ap];
            for (int ot = 0; ot < ot_space.total; ++ot) {
              const int tp = detail::full_type_profile(g, ot_space, ot, i, th);
              for (int combo = 0; combo < num_combos; ++combo) {
                const int e = ot * num_combos + combo;
                double w = 1.0;
                for (size_t s = 0; s < ot_space.slots.size(); ++s) {
                  const int j = ot_space.slots[s];
                  const int lev = class_rep(j, slot_classes[s][combo_at(combo, s)]);
                  w *= A.strategy[lev][j][ot_space.at(ot, s)][v]
                                  [g.action_in_profile(v, ap, j)];
                }
                if (w == 0.0) continue;
                const double cont = child >= 0 ? V[child][e] : g.payoff(~child, tp, i);
                Q[ai][e] += w * cont;
              }
            }
          }
          std::vector<double> eu(m, 0.0);
          for (int a = 0; a < m; ++a)
            for (int e = 0; e < E; ++e) eu[a] += W[v][e] * Q[a][e];
          std::vector<double> sigma =
              degenerate ? std::vector<double>(m, 1.0 / m)
                         : (opt.lambda < 0.0 ? argmax_uniform(eu, opt.tie_tol)
                                             : softmax(eu, opt.lambda));
          slice[th][v] = sigma;
          V[v].assign(E, 0.0);
          for (int a = 0; a < m; ++a)
            for (int e = 0; e < E; ++e) V[v][e] += sigma[a] * Q[a][e];
        }
        if (opt.store_beliefs) {
          gb.mass[th].resize(g.nodes.size());
          for (size_t v = 0; v < g.nodes.size(); ++v) gb.mass[th][v] = std::move(W[v]);
        }
      }
      A.strategy[k][i] = std::move(slice);
      if (opt.store_beliefs) A.belief[k][i] = std::move(gb);
    }
    // fold the new level into the strategy-equivalence classes
    for (int j = 0; j < n; ++j) {
      int assigned = -1;
      for (size_t c = 0; c < A.class_members[j].size(); ++c)
        if (A.strategy[A.class_members[j][c][0]][j] == A.strategy[k][j]) {
          assigned = static_cast<int>(c);
          break;
        }
      if (assigned < 0) {
        assigned = static_cast<int>(A.class_members[j].size());
        A.class_members[j].push_back({});
      }
      A.class_members[j][assigned].push_back(k);
      A.level_class[j][k] = assigned;
    }
  }
  return A;
}

inline Assessment solve_qdch(const MultiStageGame& g, const LevelPrior& prior, double lambda,
                             SolveOptions opt = {}) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw ValidationError("quantal precision must be finite and >= 0");
  opt.lambda = lambda;
  return solve_dch(g, prior, opt);
}

// ---- queries on a solved assessment ----

// Probability that a player observed at (type, node) has level k: prior mass
// times the player's own strategy's probability of the actions on the path.
// Opponents' reach probabilities are level-independent and cancel.
inline std::vector<double> posterior_level_distribution(const Assessment& A,
                                                        const MultiStageGame& g,
                                                        const LevelPrior& prior, int player,
                                                        int type, int node) {
  const auto path = g.path_to(node);
  std::vector<double> f(prior.masses);
  int v = 0;
  for (int ap : path) {
    for (int k = 0; k <= prior.k_max(); ++k)
      f[k] *= A.strategy[k][player][type][v][g.action_in_profile(v, ap, player)];
    v = g.nodes[v].child[ap];
  }
  double sum = 0.0;
  for (double x : f) sum += x;
  for (double& x : f) x /= sum;
  return f;
}

// Aggregate choice frequency: level-k choice probabilities weighted by the
// posterior level distribution at the information set.
inline double aggregate_choice_prob(const Assessment& A, const MultiStageGame& g,
                                    const LevelPrior& prior, int player, int type, int node,
                                    int action) {
  const auto f = posterior_level_distribution(A, g, prior, player, type, node);
  double p = 0.0;
  for (int k = 0; k <= prior.k_max(); ++k)
    p += f[k] * A.strategy[k][player][type][node][action];
  return p;
}

// Exact joint posterior over opponents' (type, level) vectors at a node,
// computed from the closed-form product of the prior, the truncated level
// prior, and the opponents' strategy probabilities along the history.
struct ExpandedBelief {
  std::vector<int> slots;       // opponents, increasing player id
  std::vector<int> type_dims;   // per slot
  int levels = 0;               // opponent levels run 0..levels-1
  // mass[ot * levels^slots + lc], slot 0 fastest in both indices
  std::vector<double> mass;

  double total() const {
    double s = 0.0;
    for (double x : mass) s += x;
    return s;
  }
};

inline ExpandedBelief update_belief(const Assessment& A, const MultiStageGame& g,
                                    const LevelPrior& prior, int player, int k, int type,
                                    int node) {
  if (k < 1 || k > A.k_max()) throw ValidationError("belief level out of range");
  const auto ot_space = detail::opponent_types(g, player);
  const auto path = g.path_to(node);
  ExpandedBelief eb;
  eb.slots = ot_space.slots;
  eb.type_dims = ot_space.dims;
  eb.levels = k;
  int LC = 1;
  for (size_t s = 0; s < eb.slots.size(); ++s) LC *= k;
  eb.mass.assign(static_cast<size_t>(ot_space.total) * LC, 0.0);
  const auto trunc = prior.truncated(k);
  double sum = 0.0;
  for (int ot = 0; ot < ot_space.total; ++ot) {
    const double f = g.prior[detail::full_type_profile(g, ot_space, ot, player, type)];
    if (f <= 0.0) continue;
    for (int lc = 0; lc < LC; ++lc) {
      double w = f;
      int rest = lc;
      for (size_t s = 0; s < eb.slots.size() && w > 0.0; ++s) {
        const int lev = rest % k;
        rest /= k;
        const int j = eb.slots[s];
        const int tj = ot_space.at(ot, s);
        w *= lev < static_cast<int>(trunc.size()) ? trunc[lev] : 0.0;
        int v = 0;
        for (int ap : path) {
          if (w == 0.0) break;
          w *= A.strategy[lev][j][tj][v][g.action_in_profile(v, ap, j)];
          v = g.nodes[v].child[ap];
        }
      }
      eb.mass[static_cast<size_t>(ot) * LC + lc] = w;
      sum += w;
    }
  }
  if (sum > 0.0)
    for (double& w : eb.mass) w /= sum;
  return eb;
}

// History given as action-profile label strings, one per period ("CW", or
// "2,4" for plan profiles). Rejects actions outside the feasible sets.
inline int resolve_history(const MultiStageGame& g, const std::vector<std::string>& labels) {
  int v = 0;
  for (const auto& lab : labels) {
    bool use_comma = false;
    for (int j = 0; j < g.num_players; ++j)
      for (const auto& al : g.nodes[v].action_labels[j])
        if (al.size() > 1) use_comma = true;
    int found = -1;
    for (int ap = 0; ap < g.num_action_profiles(v); ++ap) {
      std::string nm;
      for (int j = 0; j < g.num_players; ++j) {
        if (use_comma && j) nm.push_back(',');
        nm += g.nodes[v].action_labels[j][g.action_in_profile(v, ap, j)];
      }
      if (nm == lab) {
        found = ap;
        break;
      }
    }
    if (found < 0) throw ValidationError("history action not in the feasible set: " + lab);
    const int child = g.nodes[v].child[found];
    if (child < 0) throw ValidationError("history passes through a terminal node");
    v = child;
  }
  return v;
}

// Grouped-to-exact expansion: split each class mass over member levels in
// prior proportion (reach probabilities are identical within a class).
inline ExpandedBelief expand_belief(const Assessment& A, const MultiStageGame& g,
                                    const LevelPrior& prior, int player, int k, int type,
                                    int node) {
  if (!A.has_beliefs) throw ValidationError("assessment was solved without belief tables");
  const GroupedBelief& gb = A.belief[k][player];
  const int S = static_cast<int>(gb.slots.size());
  ExpandedBelief eb;
  eb.slots = gb.slots;
  for (int j : gb.slots) eb.type_dims.push_back(g.num_types(j));
  eb.levels = k;
  int OT = 1, LC = 1;
  for (int d : eb.type_dims) OT *= d;
  for (int s = 0; s < S; ++s) LC *= k;
  eb.mass.assign(static_cast<size_t>(OT) * LC, 0.0);

  int num_combos = 1;
  for (const auto& sc : gb.slot_classes) num_combos *= static_cast<int>(sc.size());
  // per slot: class id -> (member level, share of class prior mass)
  std::vector<std::vector<std::vector<std::pair<int, double>>>> shares(S);
  for (int s = 0; s < S; ++s) {
    const int j = gb.slots[s];
    shares[s].resize(gb.slot_classes[s].size());
    for (size_t ci = 0; ci < gb.slot_classes[s].size(); ++ci) {
      double tot = 0.0;
      for (int l : A.class_members[j][gb.slot_classes[s][ci]])
        if (l < k) tot += prior.masses[l];
      for (int l : A.class_members[j][gb.slot_classes[s][ci]])
        if (l < k) shares[s][ci].push_back({l, prior.masses[l] / tot});
    }
  }
  const auto& grouped = gb.mass[type][node];
  for (int ot = 0; ot < OT; ++ot) {
    for (int combo = 0; combo < num_combos; ++combo) {
      const double base = grouped[static_cast<size_t>(ot) * num_combos + combo];
      if (base <= 0.0) continue;
      // distribute over member-level combinations
      std::vector<int> ci(S);
      int rest = combo;
      for (int s = 0; s < S; ++s) {
        ci[s] = rest % static_cast<int>(gb.slot_classes[s].size());
        rest /= static_cast<int>(gb.slot_classes[s].size());
      }
      std::vector<size_t> pick(S, 0);
      while (true) {
        double w = base;
        int lc = 0, stride = 1;
        for (int s = 0; s < S; ++s) {
          w *= shares[s][ci[s]][pick[s]].second;
          lc += shares[s][ci[s]][pick[s]].first * stride;
          stride *= k;
        }
        eb.mass[static_cast<size_t>(ot) * LC + lc] += w;
        int s = 0;
        while (s < S && ++pick[s] == shares[s][ci[s]].size()) pick[s++] = 0;
        if (s == S) break;
      }
    }
  }
  return eb;
}

}  // namespace dchlab
