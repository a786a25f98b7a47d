#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <set>

#include "dchlab/dirty_faces.hpp"
#include "dchlab/solver.hpp"

using namespace dchlab;

namespace {

DirtyFacesSpec bc2p(Representation rep = Representation::Sequential) {
  return {2, 2, 2.0 / 3.0, 0.25, 0.8, rep};
}

// Sequential playout of a stopping profile: everyone waits until their plan
// period; the earliest claimants are paid by their own face.
double playout_payoff(const DirtyFacesSpec& spec, const std::vector<int>& plans, int faces,
                      int player) {
  int smin = spec.horizon + 2;
  for (int s : plans) smin = std::min(smin, s);
  if (smin > spec.horizon) return 0.0;
  if (plans[player] != smin) return 0.0;
  const bool dirty = (faces >> player) & 1;
  return std::pow(spec.delta, smin - 1) * (dirty ? spec.alpha : -1.0);
}

}  // namespace

TEST_CASE("spec validation") {
  REQUIRE_NOTHROW(bc2p().validate());
  DirtyFacesSpec s = bc2p();
  s.alpha = (1 - s.p) / s.p;  // alpha_bar = 1 exactly
  REQUIRE_THROWS_AS(s.validate(), ValidationError);
  s = bc2p();
  s.n_players = 3;  // T must be 3
  REQUIRE_THROWS_AS(s.validate(), ValidationError);
  s.horizon = 3;
  REQUIRE_NOTHROW(s.validate());
  s.delta = 1.0;
  REQUIRE_THROWS_AS(s.validate(), ValidationError);
}

TEST_CASE("sequential builder: two-person shape") {
  const MultiStageGame g = build_sequential_dirty_faces(bc2p());
  REQUIRE(g.num_players == 2);
  REQUIRE(g.nodes.size() == 2);              // periods 1 and 2 on the all-wait path
  REQUIRE(g.terminals.size() == 3 + 4);      // three claims in period 1, all of period 2
  const auto infosets = enumerate_info_sets(g);
  REQUIRE(infosets.size() == 8);             // 4 per player
  std::set<std::pair<std::string, int>> seen;
  for (const auto& is : infosets)
    if (is.player == 0) seen.insert({is.observation, is.period});
  REQUIRE(seen == std::set<std::pair<std::string, int>>{
                      {"O", 1}, {"O", 2}, {"X", 1}, {"X", 2}});
}

TEST_CASE("three-person info sets") {
  DirtyFacesSpec s{3, 3, 0.5, 0.3, 0.8, Representation::Sequential};
  const MultiStageGame g = build_sequential_dirty_faces(s);
  const auto infosets = enumerate_info_sets(g);
  REQUIRE(infosets.size() == 27);  // 9 descriptors per player
}

TEST_CASE("simultaneous builder: plans and payoffs") {
  DirtyFacesSpec s{2, 5, 2.0 / 3.0, 0.25, 0.8, Representation::Simultaneous};
  const MultiStageGame g = build_simultaneous_dirty_faces(s);
  REQUIRE(g.nodes.size() == 1);
  REQUIRE(g.nodes[0].num_actions[0] == 6);  // plans 1..T+1
  // profile (2, 4), player 1 dirty: claimant paid delta * alpha; waiter 0
  int profile = 0, stride = 1;
  for (int i = 0; i < 2; ++i) {
    profile += (i == 0 ? 1 : 3) * stride;  // action indices are plan-1
    stride *= 6;
  }
  const int term = ~g.nodes[0].child[profile];
  // player 0 dirty <=> player 1 observes X; profile where both dirty
  const int tp_both_dirty = g.type_profile_index({1, 1});
  REQUIRE(g.payoff(term, tp_both_dirty, 0) == Catch::Approx(0.8 * 0.25));
  REQUIRE(g.payoff(term, tp_both_dirty, 1) == 0.0);
  // profile (T+1, T+1): nobody claims
  int prof_wait = 5 + 5 * 6;
  const int term2 = ~g.nodes[0].child[prof_wait];
  for (int tp = 0; tp < g.num_type_profiles(); ++tp)
    for (int i = 0; i < 2; ++i) REQUIRE(g.payoff(term2, tp, i) == 0.0);
}

TEST_CASE("simultaneous info sets: one decision point per observation") {
  DirtyFacesSpec s{2, 5, 2.0 / 3.0, 0.25, 0.8, Representation::Simultaneous};
  const MultiStageGame g = build_simultaneous_dirty_faces(s);
  const auto infosets = enumerate_info_sets(g);
  REQUIRE(infosets.size() == 4);  // 2 per player
  for (const auto& is : infosets) {
    REQUIRE(is.period == 1);
    // each decision point expands to T+1 plan-conditional descriptors
    REQUIRE(g.nodes[is.node].num_actions[is.player] == 6);
  }
}

TEST_CASE("announcement-conditioned prior matches Bernoulli product") {
  for (double p : {0.3, 2.0 / 3.0}) {
    DirtyFacesSpec s{2, 2, p, 0.2, 0.8, Representation::Sequential};
    s.validate();
    const MultiStageGame g = build_sequential_dirty_faces(s);
    const double announce = 1.0 - (1 - p) * (1 - p);
    // type profile (theta_1, theta_2) = (x_2, x_1)
    REQUIRE(g.prior[g.type_profile_index({0, 0})] == 0.0);  // both clean: excluded
    REQUIRE(g.prior[g.type_profile_index({1, 1})] ==
            Catch::Approx(p * p / announce).margin(1e-15));
    REQUIRE(g.prior[g.type_profile_index({0, 1})] ==
            Catch::Approx(p * (1 - p) / announce).margin(1e-15));
    // conditional beliefs: seeing clean implies own face dirty
    const int tp = g.type_profile_index({0, 1});  // player 0 sees O, player 1 sees X
    REQUIRE(g.conditional_prior(0, tp) == Catch::Approx(1.0).margin(1e-15));
  }
}

TEST_CASE("three-person conditional face beliefs") {
  DirtyFacesSpec s{3, 3, 0.4, 0.6, 0.8, Representation::Sequential};
  s.validate();
  const MultiStageGame g = build_sequential_dirty_faces(s);
  for (int i = 0; i < 3; ++i) {
    for (int th = 0; th < 3; ++th) {
      // P(own face dirty | observation, announcement)
      double dirty = 0.0, tot = 0.0;
      for (int tp = 0; tp < g.num_type_profiles(); ++tp) {
        if (g.type_in_profile(tp, i) != th || g.prior[tp] <= 0.0) continue;
        tot += g.prior[tp];
        if (detail::own_face_from_types(g, tp, i) == 1) dirty += g.prior[tp];
      }
      const std::string& obs = g.type_labels[i][th];
      // a clean pair reveals the own face; any observed dirty face makes the
      // announcement uninformative
      const double expect = obs == "OO" ? 1.0 : s.p;
      REQUIRE(dirty / tot == Catch::Approx(expect).margin(1e-14));
    }
  }
}

TEST_CASE("normalized face-distribution variant") {
  DirtyFacesSpec s = bc2p();
  // lab draw: 60% one dirty face (split evenly), 40% two dirty
  std::vector<double> faces = {0.0, 0.3, 0.3, 0.4};
  const MultiStageGame g = build_sequential_dirty_faces(s, faces);
  REQUIRE(g.prior[g.type_profile_index({1, 1})] == Catch::Approx(0.4));
  REQUIRE(g.prior[g.type_profile_index({1, 0})] == Catch::Approx(0.3));
}

TEST_CASE("payoff closed form on every terminal history") {
  for (int n : {2, 3}) {
    for (int T = 2; T <= 3; ++T) {
      if (n == 3 && T != 3) continue;
      DirtyFacesSpec s{n, T, 0.5, 0.4, 0.7, Representation::Sequential};
      s.validate();
      const MultiStageGame g = build_sequential_dirty_faces(s);
      for (size_t term = 0; term < g.terminals.size(); ++term) {
        const auto& tt = g.terminals[term];
        const int t = tt.depth;
        for (int faces = 1; faces < (1 << n); ++faces) {
          std::vector<int> types(n);
          for (int i = 0; i < n; ++i) {
            const std::string obs = detail::observation_of(n, faces, i);
            types[i] = detail::observation_index(obs);
          }
          const int tp = g.type_profile_index(types);
          for (int i = 0; i < n; ++i) {
            const bool claimed = !((tt.profile_from_parent >> i) & 1);
            const bool dirty = (faces >> i) & 1;
            const double expect =
                claimed ? std::pow(s.delta, t - 1) * (dirty ? s.alpha : -1.0) : 0.0;
            REQUIRE(g.payoff(static_cast<int>(term), tp, i) == Catch::Approx(expect).margin(1e-15));
          }
        }
      }
    }
  }
}

TEST_CASE("sequential and simultaneous representations are outcome equivalent") {
  for (int n : {2, 3}) {
    const int T = n == 2 ? 3 : 3;
    DirtyFacesSpec seq{n, T, 0.5, 0.4, 0.7, Representation::Sequential};
    DirtyFacesSpec sim = seq;
    sim.representation = Representation::Simultaneous;
    const MultiStageGame gs = build_sequential_dirty_faces(seq);
    const MultiStageGame gm = build_simultaneous_dirty_faces(sim);
    const int S = T + 1;
    int profiles = 1;
    for (int i = 0; i < n; ++i) profiles *= S;
    for (int faces = 1; faces < (1 << n); ++faces) {
      std::vector<int> types(n);
      for (int i = 0; i < n; ++i)
        types[i] = detail::observation_index(detail::observation_of(n, faces, i));
      const int tp = gs.type_profile_index(types);
      for (int prof = 0; prof < profiles; ++prof) {
        std::vector<int> plans(n);
        int rest = prof;
        for (int i = 0; i < n; ++i) {
          plans[i] = rest % S + 1;
          rest /= S;
        }
        // simultaneous payoff from the one-shot game
        const int term_sim = ~gm.nodes[0].child[prof];
        // sequential playout of the same reduced strategies
        int v = 0;
        int term_seq = -1;
        for (int t = 1; t <= T && term_seq < 0; ++t) {
          int ap = 0, stride = 1;
          for (int i = 0; i < n; ++i) {
            const bool wait = plans[i] != t;
            ap += (wait ? 1 : 0) * stride;
            stride *= 2;
          }
          const int child = gs.nodes[v].child[ap];
          if (child >= 0)
            v = child;
          else
            term_seq = ~child;
        }
        for (int i = 0; i < n; ++i) {
          const double from_sim = gm.payoff(term_sim, tp, i);
          const double from_seq = term_seq >= 0 ? gs.payoff(term_seq, tp, i) : 0.0;
          REQUIRE(from_sim == Catch::Approx(from_seq).margin(1e-14));
          REQUIRE(from_sim ==
                  Catch::Approx(playout_payoff(seq, plans, faces, i)).margin(1e-14));
        }
      }
    }
  }
}

TEST_CASE("history resolution rejects malformed actions") {
  const MultiStageGame g = build_sequential_dirty_faces(bc2p());
  // valid: both wait in period 1
  REQUIRE(resolve_history(g, {"WW"}) == 1);
  REQUIRE_THROWS_AS(resolve_history(g, {"ZZ"}), ValidationError);
  REQUIRE_THROWS_AS(resolve_history(g, {"CW"}), ValidationError);  // terminal
}
