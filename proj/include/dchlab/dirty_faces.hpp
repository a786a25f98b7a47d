#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "dchlab/game.hpp"

namespace dchlab {

enum class Representation { Sequential, Simultaneous };

inline std::string to_string(Representation r) {
  return r == Representation::Sequential ? "seq" : "sim";
}

// A dirty-faces game: n players, i.i.d. dirty-face probability p, reward
// alpha for a correct claim, penalty -1 for a false one, common discount
// delta, and at most T periods. Built conditional on the public announcement
// that at least one face is dirty.
struct DirtyFacesSpec {
  int n_players = 2;
  int horizon = 2;
  double p = 0.5;
  double alpha = 0.5;
  double delta = 0.9;
  Representation representation = Representation::Sequential;

  double alpha_bar() const { return p * alpha / (1.0 - p); }

  void validate() const {
    if (n_players != 2 && n_players != 3)
      throw ValidationError("dirty-faces games support 2 or 3 players");
    if (n_players == 3 && horizon != 3)
      throw ValidationError("three-person dirty-faces games are three-period");
    if (horizon < 2) throw ValidationError("horizon must be >= 2");
    if (!(p > 0.0 && p < 1.0)) throw ValidationError("p must lie in (0,1)");
    if (!(delta > 0.0 && delta < 1.0)) throw ValidationError("delta must lie in (0,1)");
    if (!(alpha > 0.0)) throw ValidationError("alpha must be positive");
    double ab = alpha_bar();
    if (!(ab > 0.0 && ab < 1.0))
      throw ValidationError("normalized reward p*alpha/(1-p) must lie strictly in (0,1)");
  }
};

// One decision point: a player, what they observe, and the period.
struct InfoSetId {
  int player = 0;
  std::string observation;  // "O"/"X" or "OO"/"OX"/"XX"
  int period = 1;           // 1..T (simultaneous games: 1)
  int node = 0;             // history node hosting the decision
};

namespace detail {

// Observation label of player `i` under face profile `faces` (bit i = dirty).
inline std::string observation_of(int n, int faces, int i) {
  std::string s;
  for (int j = 0; j < n; ++j)
    if (j != i) s.push_back((faces >> j) & 1 ? 'X' : 'O');
  std::sort(s.begin(), s.end());
  return s;
}

inline int observation_index(const std::string& obs) {
  // index = number of dirty faces observed
  return static_cast<int>(std::count(obs.begin(), obs.end(), 'X'));
}

// Joint prior over type profiles induced by a distribution over face
// profiles. Types are the observation labels, so distinct face profiles map
// to distinct type profiles.
inline std::vector<double> type_prior_from_faces(int n,
                                                 const std::vector<double>& face_dist,
                                                 const std::vector<std::vector<std::string>>& labels,
                                                 const MultiStageGame& g) {
  std::vector<double> prior(g.num_type_profiles(), 0.0);
  for (int faces = 0; faces < (1 << n); ++faces) {
    if (face_dist[faces] <= 0.0) continue;
    std::vector<int> types(n);
    for (int i = 0; i < n; ++i) {
      const std::string obs = observation_of(n, faces, i);
      types[i] = static_cast<int>(std::find(labels[i].begin(), labels[i].end(), obs) -
                                  labels[i].begin());
    }
    prior[g.type_profile_index(types)] += face_dist[faces];
  }
  return prior;
}

// Recover player i's own face from a type profile; -1 when the profile is not
// induced by any face profile (such profiles carry zero prior mass).
inline int own_face_from_types(const MultiStageGame& g, int type_profile, int player) {
  const int n = g.num_players;
  int total2 = 0;  // (n-1) * number of dirty faces
  std::vector<int> seen(n);
  for (int i = 0; i < n; ++i) {
    const std::string& obs = g.type_labels[i][g.type_in_profile(type_profile, i)];
    seen[i] = static_cast<int>(std::count(obs.begin(), obs.end(), 'X'));
    total2 += seen[i];
  }
  if (total2 % (n - 1) != 0) return -1;
  const int dirty = total2 / (n - 1);
  const int own = dirty - seen[player];
  if (own < 0 || own > 1) return -1;
  for (int i = 0; i < n; ++i) {
    int xi = dirty - seen[i];
    if (xi < 0 || xi > 1) return -1;
  }
  return own;
}

inline std::vector<double> iid_face_distribution(int n, double p) {
  std::vector<double> dist(1 << n, 0.0);
  double announce = 1.0 - std::pow(1.0 - p, n);
  for (int faces = 1; faces < (1 << n); ++faces) {
    double m = 1.0;
    for (int i = 0; i < n; ++i) m *= ((faces >> i) & 1) ? p : (1.0 - p);
    dist[faces] = m / announce;
  }
  return dist;
}

inline std::vector<std::vector<std::string>> observation_labels(int n) {
  if (n == 2) return std::vector<std::vector<std::string>>(2, {"O", "X"});
  return std::vector<std::vector<std::string>>(3, {"OO", "OX", "XX"});
}

}  // namespace detail

// Sequential representation: in each period all players simultaneously choose
// Claim or Wait; the game absorbs after any Claim or after period T. A claim
// in terminal period t pays delta^{t-1} * alpha on a dirty face and
// -delta^{t-1} on a clean one; waiting pays 0.
//
// `face_dist`, indexed by face bitmask (bit i set = player i dirty), replaces
// the announcement-conditioned i.i.d. Bernoulli(p) draw; its all-clean entry
// must be zero.
inline MultiStageGame build_sequential_dirty_faces(const DirtyFacesSpec& spec,
                                                   const std::vector<double>& face_dist) {
  spec.validate();
  if (spec.representation != Representation::Sequential)
    throw ValidationError("spec is not sequential");
  const int n = spec.n_players, T = spec.horizon;
  if (static_cast<int>(face_dist.size()) != (1 << n) || face_dist[0] != 0.0)
    throw ValidationError("face distribution must cover all profiles and exclude all-clean");

  MultiStageGame g;
  g.num_players = n;
  g.horizon = T;
  g.type_labels = detail::observation_labels(n);

  const std::vector<std::string> acts = {"C", "W"};
  const int all_wait = (1 << n) - 1;  // C=0, W=1 per player; profile bit i = W
  // all-wait chain of nonterminal nodes
  for (int d = 0; d < T; ++d) {
    MultiStageGame::Node nd;
    nd.depth = d;
    nd.parent = d == 0 ? -1 : d - 1;
    nd.profile_from_parent = d == 0 ? -1 : all_wait;
    nd.num_actions.assign(n, 2);
    nd.action_labels.assign(n, acts);
    nd.child.assign(1 << n, 0);
    nd.name = d == 0 ? "" : (g.nodes[d - 1].name.empty()
                                 ? std::string(n, 'W')
                                 : g.nodes[d - 1].name + "." + std::string(n, 'W'));
    g.nodes.push_back(std::move(nd));
  }
  for (int d = 0; d < T; ++d) {
    for (int ap = 0; ap < (1 << n); ++ap) {
      if (ap == all_wait && d + 1 < T) {
        g.nodes[d].child[ap] = d + 1;
        continue;
      }
      MultiStageGame::Terminal t;
      t.parent = d;
      t.profile_from_parent = ap;
      t.depth = d + 1;
      std::string prof;
      for (int i = 0; i < n; ++i) prof.push_back((ap >> i) & 1 ? 'W' : 'C');
      t.name = g.nodes[d].name.empty() ? prof : g.nodes[d].name + "." + prof;
      g.nodes[d].child[ap] = ~static_cast<int>(g.terminals.size());
      g.terminals.push_back(std::move(t));
    }
  }

  g.prior = detail::type_prior_from_faces(n, face_dist, g.type_labels, g);

  const int P = g.num_type_profiles();
  g.payoffs.assign(g.terminals.size() * P * n, 0.0);
  for (size_t term = 0; term < g.terminals.size(); ++term) {
    const auto& tt = g.terminals[term];
    const double disc = std::pow(spec.delta, tt.depth - 1);
    for (int tp = 0; tp < P; ++tp) {
      for (int i = 0; i < n; ++i) {
        if ((tt.profile_from_parent >> i) & 1) continue;  // waited
        int face = detail::own_face_from_types(g, tp, i);
        if (face < 0) continue;  // inconsistent profile, zero prior mass
        g.payoffs[(term * P + tp) * n + i] = disc * (face ? spec.alpha : -1.0);
      }
    }
  }
  g.validate(/*require_full_support=*/false);
  return g;
}

inline MultiStageGame build_sequential_dirty_faces(const DirtyFacesSpec& spec) {
  spec.validate();
  return build_sequential_dirty_faces(spec, detail::iid_face_distribution(spec.n_players, spec.p));
}

// Simultaneous representation: a one-stage game where each player picks a
// plan from {1..T+1}; plan t <= T means wait through period t-1 and claim at
// t, plan T+1 means always wait. Payoffs follow the sequential playout: the
// earliest claimants are paid by their own face, everyone else gets 0.
inline MultiStageGame build_simultaneous_dirty_faces(const DirtyFacesSpec& spec,
                                                     const std::vector<double>& face_dist) {
  spec.validate();
  if (spec.representation != Representation::Simultaneous)
    throw ValidationError("spec is not simultaneous");
  const int n = spec.n_players, T = spec.horizon, S = T + 1;

  MultiStageGame g;
  g.num_players = n;
  g.horizon = 1;
  g.type_labels = detail::observation_labels(n);

  MultiStageGame::Node root;
  root.depth = 0;
  root.num_actions.assign(n, S);
  std::vector<std::string> plans;
  for (int s = 1; s <= S; ++s) plans.push_back(std::to_string(s));
  root.action_labels.assign(n, plans);
  root.child.resize(1);
  g.nodes.push_back(root);

  int profiles = 1;
  for (int i = 0; i < n; ++i) profiles *= S;
  g.nodes[0].child.assign(profiles, 0);
  for (int ap = 0; ap < profiles; ++ap) {
    MultiStageGame::Terminal t;
    t.parent = 0;
    t.profile_from_parent = ap;
    t.depth = 1;
    std::string nm;
    for (int i = 0; i < n; ++i) {
      if (i) nm.push_back(',');
      nm += std::to_string(g.action_in_profile(0, ap, i) + 1);
    }
    t.name = nm;
    g.nodes[0].child[ap] = ~static_cast<int>(g.terminals.size());
    g.terminals.push_back(std::move(t));
  }

  g.prior = detail::type_prior_from_faces(n, face_dist, g.type_labels, g);

  const int P = g.num_type_profiles();
  g.payoffs.assign(g.terminals.size() * P * n, 0.0);
  for (size_t term = 0; term < g.terminals.size(); ++term) {
    const int ap = g.terminals[term].profile_from_parent;
    int smin = S + 1;
    for (int i = 0; i < n; ++i) smin = std::min(smin, g.action_in_profile(0, ap, i) + 1);
    if (smin > T) continue;  // nobody claims
    const double disc = std::pow(spec.delta, smin - 1);
    for (int tp = 0; tp < P; ++tp) {
      for (int i = 0; i < n; ++i) {
        if (g.action_in_profile(0, ap, i) + 1 != smin) continue;
        int face = detail::own_face_from_types(g, tp, i);
        if (face < 0) continue;
        g.payoffs[(term * P + tp) * n + i] = disc * (face ? spec.alpha : -1.0);
      }
    }
  }
  g.validate(false);
  return g;
}

inline MultiStageGame build_simultaneous_dirty_faces(const DirtyFacesSpec& spec) {
  spec.validate();
  return build_simultaneous_dirty_faces(spec,
                                        detail::iid_face_distribution(spec.n_players, spec.p));
}

inline MultiStageGame build_dirty_faces(const DirtyFacesSpec& spec) {
  return spec.representation == Representation::Sequential
             ? build_sequential_dirty_faces(spec)
             : build_simultaneous_dirty_faces(spec);
}

// Complete, duplicate-free enumeration of decision points in (player,
// observation, period) order.
inline std::vector<InfoSetId> enumerate_info_sets(const MultiStageGame& g) {
  std::vector<InfoSetId> out;
  for (int i = 0; i < g.num_players; ++i)
    for (int th = 0; th < g.num_types(i); ++th)
      for (size_t v = 0; v < g.nodes.size(); ++v)
        out.push_back({i, g.type_labels[i][th], g.nodes[v].depth + 1, static_cast<int>(v)});
  std::stable_sort(out.begin(), out.end(), [](const InfoSetId& a, const InfoSetId& b) {
    if (a.player != b.player) return a.player < b.player;
    if (a.observation != b.observation) return a.observation < b.observation;
    return a.period < b.period;
  });
  return out;
}

}  // namespace dchlab
