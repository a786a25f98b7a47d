#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "dchlab/dirty_faces.hpp"
#include "dchlab/level_prior.hpp"
#include "dchlab/math_util.hpp"
#include "dchlab/solver.hpp"

namespace dchlab::eqm {

struct SolverError : std::runtime_error {
  double residual;
  SolverError(const std::string& what, double res) : std::runtime_error(what), residual(res) {}
};

struct FixedPointOptions {
  double residual_tol = 1e-12;
  int max_iters = 100000;
  double omega = 0.5;          // damping x <- (1-w) x + w Phi(x)
  double homotopy_step = 0.5;  // continuation in lambda from 0
};

namespace detail {

// Damped fixed-point iteration with adaptive damping; returns the residual
// ||x - Phi(x)||_inf of the final iterate.
template <typename Map>
double damped_fixed_point(std::vector<double>& x, const Map& phi,
                          const FixedPointOptions& opt) {
  double omega = opt.omega;
  double res = 0.0, prev = 1e300;
  std::vector<double> fx(x.size());
  int stall = 0;
  for (int it = 0; it < opt.max_iters; ++it) {
    phi(x, fx);
    res = 0.0;
    for (size_t i = 0; i < x.size(); ++i) res = std::max(res, std::fabs(fx[i] - x[i]));
    if (res <= opt.residual_tol) return res;
    if (res > prev) {
      if (++stall > 4 && omega > 0.01) {
        omega *= 0.5;
        stall = 0;
      }
    } else {
      stall = 0;
    }
    prev = res;
    for (size_t i = 0; i < x.size(); ++i) x[i] = (1.0 - omega) * x[i] + omega * fx[i];
  }
  return res;
}

template <typename Solve>
void homotopy(std::vector<double>& x, double lambda, const FixedPointOptions& opt,
              const Solve& one) {
  double cur = 0.0;
  one(x, 0.0);  // uniform start
  while (cur < lambda) {
    cur = std::min(lambda, cur + opt.homotopy_step);
    one(x, cur);
  }
}

inline double logistic_gap(double lambda, double gap) {
  // choice probability of the first of two options whose value leads by `gap`
  double z = lambda * gap;
  if (z > 700.0) return 1.0;
  if (z < -700.0) return 0.0;
  return 1.0 / (1.0 + std::exp(-z));
}

}  // namespace detail

// ---------- two-person sequential logit equilibrium ----------

// Claim probabilities q_t at (t, O) and r_t at (t, X), t = 1..T, with the
// belief path mu_t = P(own face dirty | t, X). Fixed point of mutually
// consistent logit responses at every information set.
struct Aqre2Solution {
  int T = 0;
  double lambda = 0.0;
  std::vector<double> q, r, mu;    // 1-indexed; index 0 unused
  std::vector<double> qw, rw;      // wait-side probabilities, computed stably
  double residual = 0.0;
};

namespace detail {

inline void aqre2_map(int T, double p, double alpha, double delta, double lambda,
                      const std::vector<double>& x, std::vector<double>& out,
                      std::vector<double>* out_wait = nullptr) {
  // x = [q_1..q_T, r_1..r_T]
  auto q = [&](int t) { return x[t - 1]; };
  auto r = [&](int t) { return x[T + t - 1]; };
  std::vector<double> mu(T + 2, 0.0);
  mu[1] = p;
  for (int t = 1; t < T; ++t) {
    double den = mu[t] * (1.0 - r(t)) + (1.0 - mu[t]) * (1.0 - q(t));
    mu[t + 1] = den > 0.0 ? mu[t] * (1.0 - r(t)) / den : mu[t];
  }
  double VO = 0.0, VX = 0.0;  // own continuation values at t+1
  for (int t = T; t >= 1; --t) {
    const double disc = std::pow(delta, t - 1);
    const double cO = disc * alpha;
    const double wO = (1.0 - r(t)) * VO;
    out[t - 1] = logistic_gap(lambda, cO - wO);
    if (out_wait) (*out_wait)[t - 1] = logistic_gap(lambda, wO - cO);
    VO = q(t) * cO + (1.0 - q(t)) * wO;
    const double cX = disc * ((1.0 + alpha) * mu[t] - 1.0);
    const double pw = mu[t] * (1.0 - r(t)) + (1.0 - mu[t]) * (1.0 - q(t));
    const double wX = pw * VX;
    out[T + t - 1] = logistic_gap(lambda, cX - wX);
    if (out_wait) (*out_wait)[T + t - 1] = logistic_gap(lambda, wX - cX);
    VX = r(t) * cX + (1.0 - r(t)) * wX;
  }
}

}  // namespace detail

inline Aqre2Solution solve_aqre_2p(const DirtyFacesSpec& spec, double lambda,
                                   const FixedPointOptions& opt = {}) {
  spec.validate();
  if (spec.n_players != 2) throw ValidationError("two-person solver");
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw ValidationError("lambda must be finite and >= 0");
  const int T = spec.horizon;
  std::vector<double> x(2 * T, 0.5);
  double res = 0.0;
  detail::homotopy(x, lambda, opt, [&](std::vector<double>& y, double lam) {
    res = detail::damped_fixed_point(
        y,
        [&](const std::vector<double>& v, std::vector<double>& out) {
          detail::aqre2_map(T, spec.p, spec.alpha, spec.delta, lam, v, out);
        },
        opt);
    if (res > opt.residual_tol)
      throw SolverError("logit fixed point did not converge at lambda=" + std::to_string(lam),
                        res);
  });
  Aqre2Solution sol;
  sol.T = T;
  sol.lambda = lambda;
  sol.residual = res;
  sol.q.assign(T + 1, 0.0);
  sol.r.assign(T + 1, 0.0);
  sol.mu.assign(T + 1, 0.0);
  sol.qw.assign(T + 1, 0.0);
  sol.rw.assign(T + 1, 0.0);
  std::vector<double> fx(2 * T), fw(2 * T);
  detail::aqre2_map(T, spec.p, spec.alpha, spec.delta, lambda, x, fx, &fw);
  for (int t = 1; t <= T; ++t) {
    sol.q[t] = x[t - 1];
    sol.r[t] = x[T + t - 1];
    sol.qw[t] = fw[t - 1];
    sol.rw[t] = fw[T + t - 1];
  }
  sol.mu[1] = spec.p;
  for (int t = 1; t < T; ++t) {
    double den = sol.mu[t] * (1.0 - sol.r[t]) + (1.0 - sol.mu[t]) * (1.0 - sol.q[t]);
    sol.mu[t + 1] = sol.mu[t] * (1.0 - sol.r[t]) / den;
  }
  return sol;
}

// ---------- three-person three-period logit equilibrium ----------

// Nine claim probabilities (q_t, r_t, s_t) for observations OO/OX/XX and the
// posterior beliefs pi_t (one dirty face) and nu_t (two dirty faces).
struct Aqre3Solution {
  double lambda = 0.0;
  std::array<double, 4> q{}, r{}, s{};     // 1-indexed
  std::array<double, 4> qw{}, rw{}, sw{};  // wait-side probabilities
  std::array<double, 4> pi{}, nu{};        // beliefs at t = 1..3
  double residual = 0.0;
};

namespace detail {

inline void aqre3_map(double p, double alpha, double delta, double lambda,
                      const std::vector<double>& x, std::vector<double>& out,
                      std::vector<double>* out_wait = nullptr) {
  const int T = 3;
  auto q = [&](int t) { return x[t - 1]; };
  auto r = [&](int t) { return x[3 + t - 1]; };
  auto s = [&](int t) { return x[6 + t - 1]; };
  std::array<double, 5> pi{}, nu{};
  pi[1] = p;
  nu[1] = p;
  for (int t = 1; t < T; ++t) {
    double dp = pi[t] * (1.0 - s(t)) + (1.0 - pi[t]) * (1.0 - q(t));
    pi[t + 1] = dp > 0.0 ? pi[t] * (1.0 - s(t)) / dp : pi[t];
    double a = (1.0 - s(t)) * (1.0 - s(t)), b = (1.0 - r(t)) * (1.0 - r(t));
    double dn = nu[t] * a + (1.0 - nu[t]) * b;
    nu[t + 1] = dn > 0.0 ? nu[t] * a / dn : nu[t];
  }
  double VOO = 0.0, VOX = 0.0, VXX = 0.0;
  for (int t = T; t >= 1; --t) {
    const double disc = std::pow(delta, t - 1);
    const double cOO = disc * alpha;
    const double wOO = (1.0 - r(t)) * (1.0 - r(t)) * VOO;
    out[t - 1] = logistic_gap(lambda, cOO - wOO);
    if (out_wait) (*out_wait)[t - 1] = logistic_gap(lambda, wOO - cOO);
    VOO = q(t) * cOO + (1.0 - q(t)) * wOO;

    const double cOX = disc * ((1.0 + alpha) * pi[t] - 1.0);
    const double pwOX = pi[t] * (1.0 - r(t)) * (1.0 - s(t)) +
                        (1.0 - pi[t]) * (1.0 - r(t)) * (1.0 - q(t));
    const double wOX = pwOX * VOX;
    out[3 + t - 1] = logistic_gap(lambda, cOX - wOX);
    if (out_wait) (*out_wait)[3 + t - 1] = logistic_gap(lambda, wOX - cOX);
    VOX = r(t) * cOX + (1.0 - r(t)) * wOX;

    const double cXX = disc * ((1.0 + alpha) * nu[t] - 1.0);
    const double pwXX = nu[t] * (1.0 - s(t)) * (1.0 - s(t)) +
                        (1.0 - nu[t]) * (1.0 - r(t)) * (1.0 - r(t));
    const double wXX = pwXX * VXX;
    out[6 + t - 1] = logistic_gap(lambda, cXX - wXX);
    if (out_wait) (*out_wait)[6 + t - 1] = logistic_gap(lambda, wXX - cXX);
    VXX = s(t) * cXX + (1.0 - s(t)) * wXX;
  }
}

}  // namespace detail

inline Aqre3Solution solve_aqre_3p(const DirtyFacesSpec& spec, double lambda,
                                   const FixedPointOptions& opt = {}) {
  spec.validate();
  if (spec.n_players != 3) throw ValidationError("three-person solver");
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw ValidationError("lambda must be finite and >= 0");
  std::vector<double> x(9, 0.5);
  double res = 0.0;
  detail::homotopy(x, lambda, opt, [&](std::vector<double>& y, double lam) {
    res = detail::damped_fixed_point(
        y,
        [&](const std::vector<double>& v, std::vector<double>& out) {
          detail::aqre3_map(spec.p, spec.alpha, spec.delta, lam, v, out);
        },
        opt);
    if (res > opt.residual_tol)
      throw SolverError("logit fixed point did not converge at lambda=" + std::to_string(lam),
                        res);
  });
  Aqre3Solution sol;
  sol.lambda = lambda;
  sol.residual = res;
  std::vector<double> fx(9), fw(9);
  detail::aqre3_map(spec.p, spec.alpha, spec.delta, lambda, x, fx, &fw);
  for (int t = 1; t <= 3; ++t) {
    sol.q[t] = x[t - 1];
    sol.r[t] = x[3 + t - 1];
    sol.s[t] = x[6 + t - 1];
    sol.qw[t] = fw[t - 1];
    sol.rw[t] = fw[3 + t - 1];
    sol.sw[t] = fw[6 + t - 1];
  }
  sol.pi[1] = spec.p;
  sol.nu[1] = spec.p;
  for (int t = 1; t < 3; ++t) {
    double dp = sol.pi[t] * (1 - sol.s[t]) + (1 - sol.pi[t]) * (1 - sol.q[t]);
    sol.pi[t + 1] = sol.pi[t] * (1 - sol.s[t]) / dp;
    double a = (1 - sol.s[t]) * (1 - sol.s[t]), b = (1 - sol.r[t]) * (1 - sol.r[t]);
    sol.nu[t + 1] = sol.nu[t] * a / (sol.nu[t] * a + (1 - sol.nu[t]) * b);
  }
  return sol;
}

// ---------- quantal cursed sequential equilibrium ----------

struct CursedParams {
  double chi = 0.0;     // in [0,1]
  double lambda = 0.0;  // logit precision

  void validate() const {
    if (!(chi >= 0.0 && chi <= 1.0)) throw ValidationError("chi must lie in [0,1]");
    if (!(lambda >= 0.0) || !std::isfinite(lambda))
      throw ValidationError("lambda must be finite and >= 0");
  }
};

// Two-person solution under chi-weighted misperception of the opponent's
// type-dependent strategy, with chi-cursed Bayes updating and logit choice.
struct QcseSolution {
  Representation representation = Representation::Sequential;
  int T = 0;
  double lambda = 0.0, chi = 0.0;
  // sequential: claim probabilities and cursed beliefs
  std::vector<double> q, r, mu;  // 1-indexed
  std::vector<double> qw, rw;    // wait-side probabilities
  // simultaneous: plan distributions per observation
  std::vector<double> plan_o, plan_x;
  double residual = 0.0;
};

namespace detail {

inline void qcse_seq_map(int T, double p, double alpha, double delta, double lambda,
                         double chi, const std::vector<double>& x, std::vector<double>& out,
                         std::vector<double>* out_wait = nullptr) {
  auto q = [&](int t) { return x[t - 1]; };
  auto r = [&](int t) { return x[T + t - 1]; };
  // cursed belief path: previous belief (chi weight) + Bayes posterior (1-chi)
  std::vector<double> mu(T + 2, 0.0);
  mu[1] = p;
  for (int t = 1; t < T; ++t) {
    double den = mu[t] * (1.0 - r(t)) + (1.0 - mu[t]) * (1.0 - q(t));
    double bayes = den > 0.0 ? mu[t] * (1.0 - r(t)) / den : mu[t];
    mu[t + 1] = chi * mu[t] + (1.0 - chi) * bayes;
  }
  // perceived wait probability of the opponent by own-face state
  auto wait_perceived = [&](int t, bool dirty) {
    double avg = mu[t] * r(t) + (1.0 - mu[t]) * q(t);
    double truth = dirty ? r(t) : q(t);
    return 1.0 - (chi * avg + (1.0 - chi) * truth);
  };
  // (t, O): own face known dirty; opponent sees X
  double VO = 0.0;
  std::vector<double> qn(T + 1), rn(T + 1);
  for (int t = T; t >= 1; --t) {
    const double disc = std::pow(delta, t - 1);
    const double cO = disc * alpha;
    const double wO = (1.0 - r(t)) * VO;
    qn[t] = logistic_gap(lambda, cO - wO);
    if (out_wait) (*out_wait)[t - 1] = logistic_gap(lambda, wO - cO);
    VO = q(t) * cO + (1.0 - q(t)) * wO;
  }
  // (t, X): carry the continuation value per own-face state
  double Vd = 0.0, Vc = 0.0;  // dirty / clean
  for (int t = T; t >= 1; --t) {
    const double disc = std::pow(delta, t - 1);
    const double cX = disc * ((1.0 + alpha) * mu[t] - 1.0);
    const double wX = mu[t] * wait_perceived(t, true) * Vd +
                      (1.0 - mu[t]) * wait_perceived(t, false) * Vc;
    rn[t] = logistic_gap(lambda, cX - wX);
    if (out_wait) (*out_wait)[T + t - 1] = logistic_gap(lambda, wX - cX);
    Vd = r(t) * disc * alpha + (1.0 - r(t)) * wait_perceived(t, true) * Vd;
    Vc = r(t) * disc * (-1.0) + (1.0 - r(t)) * wait_perceived(t, false) * Vc;
  }
  for (int t = 1; t <= T; ++t) {
    out[t - 1] = qn[t];
    out[T + t - 1] = rn[t];
  }
}

inline void qcse_sim_map(int T, double p, double alpha, double delta, double lambda,
                         double chi, const std::vector<double>& x, std::vector<double>& out) {
  const int S = T + 1;
  // x = [plan dist | obs O (opponent dirty for sure), plan dist | obs X]
  auto po = [&](int splan) { return x[splan - 1]; };
  auto px = [&](int splan) { return x[S + splan - 1]; };
  // payoff of own plan a against opponent plan b, by own face
  auto payoff = [&](int a, int b, bool dirty) {
    if (a > T || a > b) return 0.0;
    return std::pow(delta, a - 1) * (dirty ? alpha : -1.0);
  };
  // observation O: opponent observes own dirty face, i.e. plays the X slice
  {
    std::vector<double> eu(S, 0.0);
    for (int a = 1; a <= S; ++a)
      for (int b = 1; b <= S; ++b) eu[a - 1] += px(b) * payoff(a, b, true);
    auto sm = softmax(eu, lambda);
    for (int a = 0; a < S; ++a) out[a] = sm[a];
  }
  // observation X: own face dirty w.p. p; the opponent's slice depends on it
  {
    std::vector<double> eu(S, 0.0);
    for (int a = 1; a <= S; ++a) {
      for (int b = 1; b <= S; ++b) {
        double avg = p * px(b) + (1.0 - p) * po(b);
        double perceived_d = chi * avg + (1.0 - chi) * px(b);
        double perceived_c = chi * avg + (1.0 - chi) * po(b);
        eu[a - 1] += p * perceived_d * payoff(a, b, true) +
                     (1.0 - p) * perceived_c * payoff(a, b, false);
      }
    }
    auto sm = softmax(eu, lambda);
    for (int a = 0; a < S; ++a) out[S + a] = sm[a];
  }
}

}  // namespace detail

inline QcseSolution solve_qcse(const DirtyFacesSpec& spec, const CursedParams& params,
                               FixedPointOptions opt = {}) {
  spec.validate();
  params.validate();
  if (spec.n_players != 2)
    throw ValidationError("cursed solver covers two-person dirty-faces games");
  if (opt.residual_tol < 1e-10) opt.residual_tol = 1e-10;
  const int T = spec.horizon;
  QcseSolution sol;
  sol.representation = spec.representation;
  sol.T = T;
  sol.lambda = params.lambda;
  sol.chi = params.chi;

  if (spec.representation == Representation::Sequential) {
    std::vector<double> x(2 * T, 0.5);
    double res = 0.0;
    detail::homotopy(x, params.lambda, opt, [&](std::vector<double>& y, double lam) {
      res = detail::damped_fixed_point(
          y,
          [&](const std::vector<double>& v, std::vector<double>& out) {
            detail::qcse_seq_map(T, spec.p, spec.alpha, spec.delta, lam, params.chi, v, out);
          },
          opt);
      if (res > opt.residual_tol)
        throw SolverError("cursed fixed point did not converge", res);
    });
    sol.residual = res;
    sol.q.assign(T + 1, 0.0);
    sol.r.assign(T + 1, 0.0);
    sol.mu.assign(T + 1, 0.0);
    sol.qw.assign(T + 1, 0.0);
    sol.rw.assign(T + 1, 0.0);
    std::vector<double> fx(2 * T), fw(2 * T);
    detail::qcse_seq_map(T, spec.p, spec.alpha, spec.delta, params.lambda, params.chi, x, fx,
                         &fw);
    for (int t = 1; t <= T; ++t) {
      sol.q[t] = x[t - 1];
      sol.r[t] = x[T + t - 1];
      sol.qw[t] = fw[t - 1];
      sol.rw[t] = fw[T + t - 1];
    }
    sol.mu[1] = spec.p;
    for (int t = 1; t < T; ++t) {
      double den = sol.mu[t] * (1 - sol.r[t]) + (1 - sol.mu[t]) * (1 - sol.q[t]);
      double bayes = sol.mu[t] * (1 - sol.r[t]) / den;
      sol.mu[t + 1] = params.chi * sol.mu[t] + (1 - params.chi) * bayes;
    }
  } else {
    const int S = T + 1;
    std::vector<double> x(2 * S, 1.0 / S);
    double res = 0.0;
    detail::homotopy(x, params.lambda, opt, [&](std::vector<double>& y, double lam) {
      res = detail::damped_fixed_point(
          y,
          [&](const std::vector<double>& v, std::vector<double>& out) {
            detail::qcse_sim_map(T, spec.p, spec.alpha, spec.delta, lam, params.chi, v, out);
          },
          opt);
      if (res > opt.residual_tol)
        throw SolverError("cursed fixed point did not converge", res);
    });
    sol.residual = res;
    sol.plan_o.assign(x.begin(), x.begin() + S);
    sol.plan_x.assign(x.begin() + S, x.end());
  }
  return sol;
}

// ---------- one-shot hierarchy hazard ----------

// Conditional claim probability at (t, obs) implied by the aggregate plan
// distribution of the simultaneous hierarchy solution (plan mass at t divided
// by the mass of plans still alive at t).
struct StaticChModel {
  DirtyFacesSpec spec;       // simultaneous representation
  LevelPrior prior;
  MultiStageGame game;
  Assessment assessment;

  StaticChModel(DirtyFacesSpec s, LevelPrior pr) : spec(s), prior(std::move(pr)) {
    spec.representation = Representation::Simultaneous;
    spec.validate();
    game = build_simultaneous_dirty_faces(spec);
    SolveOptions opt;
    opt.store_beliefs = false;
    assessment = solve_dch(game, prior, opt);
  }

  int obs_index(const std::string& obs) const {
    for (int th = 0; th < game.num_types(0); ++th)
      if (game.type_labels[0][th] == obs) return th;
    throw ValidationError("unknown observation: " + obs);
  }

  std::vector<double> plan_distribution(const std::string& obs) const {
    const int th = obs_index(obs);
    std::vector<double> dist(spec.horizon + 1, 0.0);
    for (size_t a = 0; a < dist.size(); ++a)
      dist[a] = aggregate_choice_prob(assessment, game, prior, 0, th, 0, static_cast<int>(a));
    return dist;
  }

  double conditional_claim(int t, const std::string& obs) const {
    if (t < 1 || t > spec.horizon) throw ValidationError("period out of range");
    const auto dist = plan_distribution(obs);
    double tail = 0.0;
    for (size_t a = t - 1; a < dist.size(); ++a) tail += dist[a];
    return dist[t - 1] / tail;
  }
};

inline double static_ch_conditional(const DirtyFacesSpec& spec, const LevelPrior& prior,
                                    int t, const std::string& obs, char action) {
  StaticChModel m(spec, prior);
  double c = m.conditional_claim(t, obs);
  return action == 'C' ? c : 1.0 - c;
}

}  // namespace dchlab::eqm
