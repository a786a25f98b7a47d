#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "dchlab/game.hpp"
#include "dchlab/solver.hpp"

namespace dchlab {

using ordered_json = nlohmann::ordered_json;

// Information-set descriptor used in serialized assessments: the player's
// type label and the history node name, joined by '|' (root name is empty).
inline std::string info_set_descriptor(const MultiStageGame& g, int player, int type,
                                       int node) {
  return g.type_labels[player][type] + "|" + g.nodes[node].name;
}

// Assessment JSON shape:
//   {
//     "k_max": K, "players": n, "quantal_lambda": l or null,
//     "strategy": { level: { player: { descriptor: { action: prob } } } },
//     "classes":  { player: [ [member levels...], ... ] },
//     "belief":   { level: { player: { descriptor: {
//         "slots": [players...], "slot_classes": [[ids...]...],
//         "mass": [...] } } } }
//   }
// Beliefs are stored in grouped form over (opponent-type profile, class
// combination), exactly as the solver computes them; expand_belief recovers
// the per-level joint.
inline ordered_json assessment_to_json(const Assessment& a, const MultiStageGame& g) {
  ordered_json out;
  out["k_max"] = a.k_max();
  out["players"] = g.num_players;
  if (a.lambda >= 0.0)
    out["quantal_lambda"] = a.lambda;
  else
    out["quantal_lambda"] = nullptr;
  ordered_json strat;
  for (int k = 0; k <= a.k_max(); ++k) {
    ordered_json per_player;
    for (int i = 0; i < g.num_players; ++i) {
      ordered_json per_is;
      for (int th = 0; th < g.num_types(i); ++th) {
        for (size_t v = 0; v < g.nodes.size(); ++v) {
          ordered_json dist;
          for (int act = 0; act < g.nodes[v].num_actions[i]; ++act)
            dist[g.nodes[v].action_labels[i][act]] = a.strategy[k][i][th][v][act];
          per_is[info_set_descriptor(g, i, th, static_cast<int>(v))] = dist;
        }
      }
      per_player[std::to_string(i)] = per_is;
    }
    strat[std::to_string(k)] = per_player;
  }
  out["strategy"] = strat;
  ordered_json classes;
  for (int i = 0; i < g.num_players; ++i) classes[std::to_string(i)] = a.class_members[i];
  out["classes"] = classes;
  if (a.has_beliefs) {
    ordered_json bel;
    for (int k = 1; k <= a.k_max(); ++k) {
      ordered_json per_player;
      for (int i = 0; i < g.num_players; ++i) {
        const GroupedBelief& gb = a.belief[k][i];
        ordered_json per_is;
        for (int th = 0; th < g.num_types(i); ++th) {
          for (size_t v = 0; v < g.nodes.size(); ++v) {
            ordered_json entry;
            entry["slots"] = gb.slots;
            entry["slot_classes"] = gb.slot_classes;
            entry["mass"] = gb.mass[th][v];
            per_is[info_set_descriptor(g, i, th, static_cast<int>(v))] = entry;
          }
        }
        per_player[std::to_string(i)] = per_is;
      }
      bel[std::to_string(k)] = per_player;
    }
    out["belief"] = bel;
  }
  return out;
}

inline Assessment assessment_from_json(const ordered_json& j, const MultiStageGame& g) {
  Assessment a;
  const int K = j.at("k_max").get<int>();
  a.lambda = j.at("quantal_lambda").is_null() ? -1.0 : j.at("quantal_lambda").get<double>();
  a.strategy.assign(K + 1, std::vector<StrategySlice>(g.num_players));
  for (int k = 0; k <= K; ++k) {
    for (int i = 0; i < g.num_players; ++i) {
      StrategySlice slice(g.num_types(i));
      const auto& per_is = j.at("strategy").at(std::to_string(k)).at(std::to_string(i));
      for (int th = 0; th < g.num_types(i); ++th) {
        slice[th].resize(g.nodes.size());
        for (size_t v = 0; v < g.nodes.size(); ++v) {
          const auto& dist = per_is.at(info_set_descriptor(g, i, th, static_cast<int>(v)));
          slice[th][v].resize(g.nodes[v].num_actions[i]);
          for (int act = 0; act < g.nodes[v].num_actions[i]; ++act)
            slice[th][v][act] = dist.at(g.nodes[v].action_labels[i][act]).get<double>();
        }
      }
      a.strategy[k][i] = std::move(slice);
    }
  }
  a.class_members.resize(g.num_players);
  a.level_class.assign(g.num_players, std::vector<int>(K + 1, -1));
  for (int i = 0; i < g.num_players; ++i) {
    a.class_members[i] =
        j.at("classes").at(std::to_string(i)).get<std::vector<std::vector<int>>>();
    for (size_t c = 0; c < a.class_members[i].size(); ++c)
      for (int l : a.class_members[i][c]) a.level_class[i][l] = static_cast<int>(c);
  }
  a.has_beliefs = j.contains("belief");
  if (a.has_beliefs) {
    a.belief.assign(K + 1, std::vector<GroupedBelief>(g.num_players));
    for (int k = 1; k <= K; ++k) {
      for (int i = 0; i < g.num_players; ++i) {
        GroupedBelief gb;
        const auto& per_is = j.at("belief").at(std::to_string(k)).at(std::to_string(i));
        gb.mass.resize(g.num_types(i));
        for (int th = 0; th < g.num_types(i); ++th) {
          gb.mass[th].resize(g.nodes.size());
          for (size_t v = 0; v < g.nodes.size(); ++v) {
            const auto& entry = per_is.at(info_set_descriptor(g, i, th, static_cast<int>(v)));
            gb.slots = entry.at("slots").get<std::vector<int>>();
            gb.slot_classes = entry.at("slot_classes").get<std::vector<std::vector<int>>>();
            gb.mass[th][v] = entry.at("mass").get<std::vector<double>>();
          }
        }
        a.belief[k][i] = std::move(gb);
      }
    }
  }
  return a;
}

}  // namespace dchlab
