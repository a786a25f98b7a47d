#pragma once

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "dchlab/dirty_faces.hpp"
#include "dchlab/level_prior.hpp"
#include "dchlab/solver.hpp"

namespace dchlab::analytic {

// ---------- two-person cutoffs ----------

// Normalized-reward cutoff above which level k claims at period t of a
// sequential two-person game when seeing a dirty face. Interior periods trade
// the claim value against waiting one more period; the last period only needs
// a nonnegative claim value.
inline double threshold_alpha_sequential(int T, int t, int k, double delta,
                                         const HierarchyMass& hm) {
  if (T < 2) throw ValidationError("horizon must be >= 2");
  if (t < 2 || t > T) throw ValidationError("cutoffs exist for periods 2..T");
  if (k < 2) throw ValidationError("cutoffs exist for levels >= 2");
  const double p0 = hm.p0();
  const double S = hm.strategic_sum(k - 1);
  if (t < T) {
    const double num = (std::pow(0.5, t - 1) - std::pow(0.5, t) * delta) * p0;
    return num / (num + (1.0 - delta) * S);
  }
  const double num = std::pow(0.5, T - 1) * p0;
  return num / (num + S);
}

// Simultaneous counterpart: cutoff above which level k's plan claims no later
// than period t.
inline double threshold_alpha_simultaneous(int T, int t, int k, double delta,
                                           const HierarchyMass& hm) {
  if (T < 2) throw ValidationError("horizon must be >= 2");
  if (t < 2 || t > T) throw ValidationError("cutoffs exist for periods 2..T");
  if (k < 2) throw ValidationError("cutoffs exist for levels >= 2");
  const double p0 = hm.p0();
  const double S = hm.strategic_sum(k - 1);
  if (t < T) {
    const double num =
        ((T + 2.0 - t) / (T + 1.0) - (T + 1.0 - t) / (T + 1.0) * delta) * p0;
    return num / (num + (1.0 - delta) * S);
  }
  const double num = 2.0 / (T + 1.0) * p0;
  return num / (num + S);
}

// ---------- three-person (three-period) cutoffs ----------

inline double threshold3_sequential_period2(int k, double delta, const HierarchyMass& hm) {
  if (k < 2) throw ValidationError("cutoffs exist for levels >= 2");
  const double g = hm.gamma(k);
  const double S = hm.strategic_sum(k - 1);
  const double num = (0.5 - 0.25 * g * delta) * hm.p0();
  return num / (num + (1.0 - g * delta) * S);
}

inline double threshold3_sequential_period3(int k, const HierarchyMass& hm) {
  if (k < 2) throw ValidationError("cutoffs exist for levels >= 2");
  const double num = 0.25 * hm.p0();
  return num / (num + hm.strategic_sum(k - 1));
}

inline double threshold3_simultaneous_plan2(int k, double delta, const HierarchyMass& hm) {
  if (k < 2) throw ValidationError("cutoffs exist for levels >= 2");
  const double p0 = hm.p0();
  const double S = hm.strategic_sum(k - 1);
  const double a = 0.75 * p0 + S, b = 0.5 * p0 + S;
  return (0.75 * p0 * a - delta * 0.5 * p0 * b) / (a * a - delta * b * b);
}

inline double threshold3_simultaneous_plan3(int k, const HierarchyMass& hm) {
  if (k < 2) throw ValidationError("cutoffs exist for levels >= 2");
  const double num = 0.5 * hm.p0();
  return num / (num + hm.strategic_sum(k - 1));
}

// ---------- stopping profiles ----------

// Earliest claim period per level and observation; horizon+1 means never.
struct StoppingProfile {
  int horizon = 0;
  Representation representation = Representation::Sequential;
  std::vector<std::string> observations;
  // period[obs][k] for k = 0..K; level 0 has no stopping period (-1)
  std::map<std::string, std::vector<int>> period;
};

inline StoppingProfile stopping_profile(const DirtyFacesSpec& spec, const LevelPrior& prior,
                                        int max_level) {
  spec.validate();
  const HierarchyMass hm(prior);
  const double abar = spec.alpha_bar();
  const int T = spec.horizon;
  const bool sim = spec.representation == Representation::Simultaneous;
  StoppingProfile sp;
  sp.horizon = T;
  sp.representation = spec.representation;
  const int K = std::min(max_level, prior.k_max());

  if (spec.n_players == 2) {
    sp.observations = {"O", "X"};
    auto& po = sp.period["O"];
    auto& px = sp.period["X"];
    po.assign(K + 1, -1);
    px.assign(K + 1, -1);
    for (int k = 1; k <= K; ++k) {
      po[k] = 1;
      px[k] = T + 1;
      if (k >= 2) {
        for (int t = 2; t <= T; ++t) {
          double cut = sim ? threshold_alpha_simultaneous(T, t, k, spec.delta, hm)
                           : threshold_alpha_sequential(T, t, k, spec.delta, hm);
          if (abar >= cut) {
            px[k] = t;
            break;
          }
        }
      }
    }
    return sp;
  }

  // three-person, T = 3
  sp.observations = {"OO", "OX", "XX"};
  auto& poo = sp.period["OO"];
  auto& pox = sp.period["OX"];
  auto& pxx = sp.period["XX"];
  poo.assign(K + 1, -1);
  pox.assign(K + 1, -1);
  pxx.assign(K + 1, -1);
  for (int k = 1; k <= K; ++k) {
    poo[k] = 1;
    pox[k] = 4;
    if (k >= 2) {
      if (abar >= (sim ? threshold3_simultaneous_plan2(k, spec.delta, hm)
                       : threshold3_sequential_period2(k, spec.delta, hm)))
        pox[k] = 2;
      else if (abar >= (sim ? threshold3_simultaneous_plan3(k, hm)
                            : threshold3_sequential_period3(k, hm)))
        pox[k] = 3;
    }
    pxx[k] = 4;
    if (k >= 3) {
      // claiming at 3 after seeing two dirty faces needs some lower level to
      // separate at period 2 when seeing one dirty face
      int lstar = 0;
      for (int l = 2; l < k; ++l) {
        if (abar >= (sim ? threshold3_simultaneous_plan2(l, spec.delta, hm)
                         : threshold3_sequential_period2(l, spec.delta, hm))) {
          lstar = l;
          break;
        }
      }
      if (lstar > 0) {
        const double p0 = hm.p0();
        const double SL = hm.strategic_sum(lstar - 1);
        const double Sk = hm.strategic_sum(k - 1);
        // both opponents must independently stay in, so the stay-in masses
        // enter the belief bound squared in either representation
        double second;
        double first;
        if (sim) {
          first = threshold3_simultaneous_plan2(lstar, spec.delta, hm);
          second = (0.5 * p0 + SL) / (0.5 * p0 + Sk);
        } else {
          first = threshold3_sequential_period2(lstar, spec.delta, hm);
          second = (0.25 * p0 + SL) / (0.25 * p0 + Sk);
        }
        second *= second;
        if (abar >= std::max(first, second)) pxx[k] = 3;
      }
    }
  }
  return sp;
}

// ---------- representation-effect cutoffs ----------

// Discount cutoff at which the sequential and simultaneous period-t
// boundaries cross; below it the sequential stopping period is the earlier
// one. Level independent.
inline double delta_bar(int T, int t) {
  if (T < 2 || t < 2) throw ValidationError("delta_bar needs T >= 2, t >= 2");
  const double two_t = std::pow(2.0, t);
  return ((two_t - 2.0) * (T + 1.0) - (t - 1.0) * two_t) /
         ((two_t - 1.0) * (T + 1.0) - t * two_t);
}

// Long-horizon limit of delta_bar.
inline double delta_bar_limit(int t) {
  if (t < 2) throw ValidationError("delta_bar_limit needs t >= 2");
  const double two_t = std::pow(2.0, t);
  return (two_t - 2.0) / (two_t - 1.0);
}

// ---------- region partition ----------

struct BoundaryCurve {
  int claim_by = 0;  // stopping period the curve delimits
  // alpha_bar cutoff as (num_const + num_delta * d) / (den_const + den_delta * d)
  double num_const = 0, num_delta = 0, den_const = 0, den_delta = 0;

  double eval(double d) const {
    return (num_const + num_delta * d) / (den_const + den_delta * d);
  }
};

struct RegionPartition {
  Representation representation = Representation::Sequential;
  int T = 0, level = 0;
  std::vector<double> delta_grid, alpha_grid;
  std::vector<int> stopping;  // row-major [delta][alpha]
  std::vector<BoundaryCurve> boundaries;

  int at(size_t di, size_t ai) const { return stopping[di * alpha_grid.size() + ai]; }
};

inline std::vector<double> unit_open_grid(int resolution, double inset = 1e-3) {
  std::vector<double> g(resolution);
  for (int i = 0; i < resolution; ++i)
    g[i] = inset + (1.0 - 2.0 * inset) * i / (resolution - 1.0);
  return g;
}

inline RegionPartition region_partition(int T, const LevelPrior& prior, int level,
                                        Representation rep, int resolution = 401,
                                        int num_threads = 1) {
  if (level < 2) throw ValidationError("region partition is for levels >= 2");
  if (resolution < 2) throw ValidationError("grid resolution must be >= 2");
  const HierarchyMass hm(prior);
  RegionPartition rp;
  rp.representation = rep;
  rp.T = T;
  rp.level = level;
  rp.delta_grid = unit_open_grid(resolution);
  rp.alpha_grid = unit_open_grid(resolution);
  rp.stopping.resize(static_cast<size_t>(resolution) * resolution);
  const bool sim = rep == Representation::Simultaneous;
  auto eval_rows = [&](int lo, int hi) {
    for (int di = lo; di < hi; ++di) {
      const double d = rp.delta_grid[di];
      std::vector<double> cuts(T + 1, 2.0);
      for (int t = 2; t <= T; ++t)
        cuts[t] = sim ? threshold_alpha_simultaneous(T, t, level, d, hm)
                      : threshold_alpha_sequential(T, t, level, d, hm);
      for (int ai = 0; ai < resolution; ++ai) {
        const double a = rp.alpha_grid[ai];
        int stop = T + 1;
        for (int t = 2; t <= T; ++t)
          if (a >= cuts[t]) {
            stop = t;
            break;
          }
        rp.stopping[static_cast<size_t>(di) * resolution + ai] = stop;
      }
    }
  };
  const int workers = std::max(1, std::min(num_threads, resolution));
  if (workers == 1) {
    eval_rows(0, resolution);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      const int lo = resolution * w / workers, hi = resolution * (w + 1) / workers;
      pool.emplace_back(eval_rows, lo, hi);
    }
    for (auto& th : pool) th.join();
  }
  // cutoff curves, scaled by 1/p0 so the coefficients are mass ratios
  const double p0 = hm.p0();
  const double S = hm.strategic_sum(level - 1) / p0;
  for (int t = 2; t <= T; ++t) {
    BoundaryCurve c;
    c.claim_by = t;
    if (t < T) {
      const double a0 = sim ? (T + 2.0 - t) / (T + 1.0) : std::pow(0.5, t - 1);
      const double a1 = sim ? -(T + 1.0 - t) / (T + 1.0) : -std::pow(0.5, t);
      c.num_const = a0;
      c.num_delta = a1;
      c.den_const = a0 + S;
      c.den_delta = a1 - S;
    } else {
      const double a0 = sim ? 2.0 / (T + 1.0) : std::pow(0.5, T - 1);
      c.num_const = a0;
      c.den_const = a0 + S;
    }
    rp.boundaries.push_back(c);
  }
  return rp;
}

// ---------- convergence toward the equilibrium prediction ----------

// Max-norm gap between the degenerate equilibrium distribution of terminal
// periods and the aggregate distribution implied by a Poisson hierarchy, over
// the announcement states of a sequential two-person game.
inline double equilibrium_distance(const DirtyFacesSpec& spec, double tau) {
  if (spec.n_players != 2 || spec.representation != Representation::Sequential)
    throw ValidationError("defined for sequential two-person games");
  spec.validate();
  const LevelPrior prior = LevelPrior::poisson(tau);
  const auto sp = stopping_profile(spec, prior, prior.k_max());
  const int T = spec.horizon;
  // probability a player with the given observation waits through period t
  auto wait_through = [&](const std::string& obs, int t) {
    double tot = prior.masses[0] * std::pow(0.5, t);
    for (int k = 1; k <= prior.k_max(); ++k)
      if (sp.period.at(obs)[k] > t) tot += prior.masses[k];
    return tot;
  };
  double worst = 0.0;
  for (int t = 1; t <= T; ++t) {
    const double f_ox = 1.0 - wait_through("O", t) * wait_through("X", t);
    const double f_xx = 1.0 - wait_through("X", t) * wait_through("X", t);
    const double eq_ox = 1.0;                    // one dirty face: over in period 1
    const double eq_xx = t >= 2 ? 1.0 : 0.0;     // two dirty faces: over in period 2
    worst = std::max(worst, std::fabs(f_ox - eq_ox));
    worst = std::max(worst, std::fabs(f_xx - eq_xx));
  }
  return worst;
}

// ---------- predicted representation effect ----------

// Model-predicted difference in the conditional claim probability at the
// second period after seeing a dirty face, sequential minus simultaneous,
// holding (delta, alpha_bar) fixed. Probabilities come from the generic
// solver's aggregate choice frequencies.
inline double predicted_rep_effect(double delta, double alpha_bar, double tau, int T = 5) {
  if (!(tau > 0.0)) throw ValidationError("tau must be positive");
  // recover (p, alpha) from alpha_bar with p = 1/2
  DirtyFacesSpec seq{2, T, 0.5, alpha_bar, delta, Representation::Sequential};
  DirtyFacesSpec sim_spec = seq;
  sim_spec.representation = Representation::Simultaneous;
  seq.validate();
  const LevelPrior prior = LevelPrior::poisson(tau);
  SolveOptions opt;
  opt.store_beliefs = false;

  const MultiStageGame gs = build_sequential_dirty_faces(seq);
  const Assessment as = solve_dch(gs, prior, opt);
  const int obs_x = 1;
  const int node2 = gs.nodes[0].child[(1 << 2) - 1];  // the all-wait continuation
  const double seq_claim = aggregate_choice_prob(as, gs, prior, 0, obs_x, node2, 0);

  const MultiStageGame gm = build_simultaneous_dirty_faces(sim_spec);
  const Assessment am = solve_dch(gm, prior, opt);
  // conditional claim at period 2 from the aggregate plan distribution
  double plan2 = 0.0, tail = 0.0;
  for (int splan = 2; splan <= T + 1; ++splan) {
    double mass = aggregate_choice_prob(am, gm, prior, 0, obs_x, 0, splan - 1);
    tail += mass;
    if (splan == 2) plan2 = mass;
  }
  return seq_claim - plan2 / tail;
}

}  // namespace dchlab::analytic
