#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <vector>

#include "dchlab/equilibrium.hpp"

using namespace dchlab;
using namespace dchlab::eqm;

namespace {

DirtyFacesSpec bc2p(Representation rep = Representation::Sequential) {
  return {2, 2, 2.0 / 3.0, 0.25, 0.8, rep};
}

DirtyFacesSpec bc3p() { return {3, 3, 2.0 / 3.0, 0.25, 0.8, Representation::Sequential}; }

}  // namespace

TEST_CASE("logit equilibrium at zero precision is uniform") {
  const auto s2 = solve_aqre_2p(bc2p(), 0.0);
  for (int t = 1; t <= 2; ++t) {
    REQUIRE(s2.q[t] == 0.5);
    REQUIRE(s2.r[t] == 0.5);
  }
  const auto s3 = solve_aqre_3p(bc3p(), 0.0);
  for (int t = 1; t <= 3; ++t) {
    REQUIRE(s3.q[t] == 0.5);
    REQUIRE(s3.r[t] == 0.5);
    REQUIRE(s3.s[t] == 0.5);
  }
}

TEST_CASE("two-person logit equilibrium satisfies its defining equations") {
  const DirtyFacesSpec spec = bc2p();
  for (double lam : {1.0, 7.663, 40.0}) {
    const auto sol = solve_aqre_2p(spec, lam);
    REQUIRE(sol.residual <= 1e-12);
    // closed form for the final clean-face response
    REQUIRE(sol.q[2] ==
            Catch::Approx(1.0 / (1.0 + std::exp(-spec.delta * spec.alpha * lam))).margin(1e-11));
    // belief identity at the fixed point
    const double mu = 1.0 / (1.0 + ((1 - spec.p) / spec.p) * ((1 - sol.q[1]) / (1 - sol.r[1])));
    REQUIRE(sol.mu[2] == Catch::Approx(mu).margin(1e-12));
    // the specialized system at (p, alpha, delta) = (2/3, 1/4, 4/5)
    const double q1 = sol.q[1], q2 = sol.q[2], r1 = sol.r[1], r2 = sol.r[2];
    REQUIRE(r1 == Catch::Approx(1.0 / (1.0 + std::exp(lam * ((2.0 / 15) * (1 - r1) * r2 -
                                                             (4.0 / 15) * (1 - q1) * r2 +
                                                             1.0 / 6))))
                      .margin(1e-10));
    REQUIRE(r2 == Catch::Approx(1.0 / (1.0 + std::exp(lam * (4.0 / 5 -
                                                             (2 - 2 * r1) / (3 - 2 * r1 - q1)))))
                      .margin(1e-10));
    REQUIRE(q1 ==
            Catch::Approx(1.0 / (1.0 + std::exp(lam * ((1.0 / 5) * (1 - r1) * q2 - 0.25))))
                .margin(1e-10));
    // plugging the solution back into the map moves nothing beyond tolerance
    std::vector<double> x = {sol.q[1], sol.q[2], sol.r[1], sol.r[2]};
    std::vector<double> fx(4);
    eqm::detail::aqre2_map(2, spec.p, spec.alpha, spec.delta, lam, x, fx);
    for (int i = 0; i < 4; ++i) REQUIRE(std::fabs(fx[i] - x[i]) <= 1e-12);
  }
}

TEST_CASE("three-person logit equilibrium satisfies its defining equations") {
  const DirtyFacesSpec spec = bc3p();
  for (double lam : {1.0, 5.278}) {
    const auto sol = solve_aqre_3p(spec, lam);
    REQUIRE(sol.residual <= 1e-12);
    // clean-face last-period closed form: logit of delta^2 alpha = 4/25
    REQUIRE(sol.q[3] ==
            Catch::Approx(1.0 / (1.0 + std::exp(-(4.0 / 25) * lam))).margin(1e-11));
    // two-dirty-face belief identity
    const double ratio = ((1 - sol.r[1]) * (1 - sol.r[2])) / ((1 - sol.s[1]) * (1 - sol.s[2]));
    const double nu3 = 1.0 / (1.0 + ((1 - spec.p) / spec.p) * ratio * ratio);
    REQUIRE(sol.nu[3] == Catch::Approx(nu3).margin(1e-12));
    std::vector<double> x(9), fx(9);
    for (int t = 1; t <= 3; ++t) {
      x[t - 1] = sol.q[t];
      x[3 + t - 1] = sol.r[t];
      x[6 + t - 1] = sol.s[t];
    }
    eqm::detail::aqre3_map(spec.p, spec.alpha, spec.delta, lam, x, fx);
    for (int i = 0; i < 9; ++i) REQUIRE(std::fabs(fx[i] - x[i]) <= 1e-12);
  }
}

TEST_CASE("solutions vary continuously along the precision path") {
  const DirtyFacesSpec spec2 = bc2p();
  const DirtyFacesSpec spec3 = bc3p();
  std::vector<double> prev2, prev3;
  for (int i = 0; i <= 200; ++i) {
    const double lam = 0.1 * i;
    const auto s2 = solve_aqre_2p(spec2, lam);
    const auto s3 = solve_aqre_3p(spec3, lam);
    std::vector<double> cur2 = {s2.q[1], s2.q[2], s2.r[1], s2.r[2]};
    std::vector<double> cur3;
    for (int t = 1; t <= 3; ++t) {
      cur3.push_back(s3.q[t]);
      cur3.push_back(s3.r[t]);
      cur3.push_back(s3.s[t]);
    }
    if (!prev2.empty()) {
      for (size_t j = 0; j < cur2.size(); ++j) REQUIRE(std::fabs(cur2[j] - prev2[j]) <= 0.05);
      for (size_t j = 0; j < cur3.size(); ++j) REQUIRE(std::fabs(cur3[j] - prev3[j]) <= 0.05);
    }
    prev2 = cur2;
    prev3 = cur3;
  }
}

TEST_CASE("uncursed quantal solution coincides with the logit equilibrium") {
  for (int T : {2, 5}) {
    DirtyFacesSpec spec = bc2p();
    spec.horizon = T;
    for (double lam : {0.7, 5.672}) {
      const auto aqre = solve_aqre_2p(spec, lam);
      const auto qcse = solve_qcse(spec, {0.0, lam});
      REQUIRE(qcse.residual <= 1e-10);
      for (int t = 1; t <= T; ++t) {
        REQUIRE(std::fabs(qcse.q[t] - aqre.q[t]) <= 1e-8);
        REQUIRE(std::fabs(qcse.r[t] - aqre.r[t]) <= 1e-8);
      }
    }
  }
}

TEST_CASE("fully cursed beliefs never move") {
  DirtyFacesSpec spec = bc2p();
  spec.horizon = 5;
  const auto sol = solve_qcse(spec, {1.0, 4.0});
  for (int t = 1; t <= 5; ++t) REQUIRE(sol.mu[t] == Catch::Approx(spec.p).margin(1e-14));
}

TEST_CASE("cursed beliefs interpolate between yesterday's belief and Bayes") {
  DirtyFacesSpec spec = bc2p();
  spec.horizon = 5;
  for (double chi : {0.0, 0.3, 0.7}) {
    const auto sol = solve_qcse(spec, {chi, 3.0});
    for (int t = 1; t < 5; ++t) {
      const double den =
          sol.mu[t] * (1 - sol.r[t]) + (1 - sol.mu[t]) * (1 - sol.q[t]);
      const double bayes = sol.mu[t] * (1 - sol.r[t]) / den;
      REQUIRE(sol.mu[t + 1] ==
              Catch::Approx(chi * sol.mu[t] + (1 - chi) * bayes).margin(1e-12));
    }
  }
}

TEST_CASE("zero precision is uniform for any cursedness") {
  for (Representation rep : {Representation::Sequential, Representation::Simultaneous}) {
    DirtyFacesSpec spec = bc2p(rep);
    spec.horizon = 3;
    const auto sol = solve_qcse(spec, {0.42, 0.0});
    if (rep == Representation::Sequential) {
      for (int t = 1; t <= 3; ++t) {
        REQUIRE(sol.q[t] == 0.5);
        REQUIRE(sol.r[t] == 0.5);
      }
    } else {
      for (double m : sol.plan_o) REQUIRE(m == Catch::Approx(0.25));
      for (double m : sol.plan_x) REQUIRE(m == Catch::Approx(0.25));
    }
  }
}

TEST_CASE("one-shot cursed solution against a hand-rolled logit fixed point") {
  DirtyFacesSpec spec = bc2p(Representation::Simultaneous);
  spec.horizon = 3;
  const double lam = 2.5;
  const auto sol = solve_qcse(spec, {0.0, lam});
  const int S = 4;
  auto pay = [&](int a, int b, bool dirty) {
    if (a > spec.horizon || a > b) return 0.0;
    return std::pow(spec.delta, a - 1) * (dirty ? spec.alpha : -1.0);
  };
  std::vector<double> po(S, 1.0 / S), px(S, 1.0 / S);
  for (int it = 0; it < 60000; ++it) {
    std::vector<double> eo(S, 0.0), ex(S, 0.0);
    for (int a = 1; a <= S; ++a)
      for (int b = 1; b <= S; ++b) {
        eo[a - 1] += px[b - 1] * pay(a, b, true);
        ex[a - 1] += spec.p * px[b - 1] * pay(a, b, true) +
                     (1 - spec.p) * po[b - 1] * pay(a, b, false);
      }
    auto no = softmax(eo, lam);
    auto nx = softmax(ex, lam);
    for (int a = 0; a < S; ++a) {
      po[a] = 0.5 * po[a] + 0.5 * no[a];
      px[a] = 0.5 * px[a] + 0.5 * nx[a];
    }
  }
  for (int a = 0; a < S; ++a) {
    REQUIRE(sol.plan_o[a] == Catch::Approx(po[a]).margin(1e-8));
    REQUIRE(sol.plan_x[a] == Catch::Approx(px[a]).margin(1e-8));
  }
}

TEST_CASE("two-period cursed solution against a hand-rolled system") {
  // independent route: the four-equation cursed system for T = 2, written out
  // directly from the belief interpolation and perceived wait probabilities
  const DirtyFacesSpec spec = bc2p();
  const double p = spec.p, al = spec.alpha, de = spec.delta;
  for (double chi : {0.25, 0.8}) {
    for (double lam : {1.5, 6.0}) {
      double q1 = 0.5, q2 = 0.5, r1 = 0.5, r2 = 0.5;
      for (int it = 0; it < 200000; ++it) {
        const double bayes = p * (1 - r1) / (p * (1 - r1) + (1 - p) * (1 - q1));
        const double mu2 = chi * p + (1 - chi) * bayes;
        const double avg1 = p * r1 + (1 - p) * q1;
        const double wait_d = 1 - (chi * avg1 + (1 - chi) * r1);
        const double wait_c = 1 - (chi * avg1 + (1 - chi) * q1);
        const double nq2 = 1 / (1 + std::exp(-lam * de * al));
        const double nq1 = 1 / (1 + std::exp(lam * (de * al * (1 - r1) * q2 - al)));
        const double nr2 = 1 / (1 + std::exp(-lam * de * ((1 + al) * mu2 - 1)));
        const double wait_val = p * wait_d * r2 * de * al - (1 - p) * wait_c * r2 * de;
        const double nr1 =
            1 / (1 + std::exp(lam * (wait_val - (p * al - (1 - p)))));
        const double res = std::max(std::max(std::fabs(nq1 - q1), std::fabs(nq2 - q2)),
                                    std::max(std::fabs(nr1 - r1), std::fabs(nr2 - r2)));
        q1 = 0.5 * q1 + 0.5 * nq1;
        q2 = 0.5 * q2 + 0.5 * nq2;
        r1 = 0.5 * r1 + 0.5 * nr1;
        r2 = 0.5 * r2 + 0.5 * nr2;
        if (res < 1e-14) break;
      }
      const auto sol = solve_qcse(spec, {chi, lam});
      REQUIRE(sol.q[1] == Catch::Approx(q1).margin(1e-9));
      REQUIRE(sol.q[2] == Catch::Approx(q2).margin(1e-9));
      REQUIRE(sol.r[1] == Catch::Approx(r1).margin(1e-9));
      REQUIRE(sol.r[2] == Catch::Approx(r2).margin(1e-9));
    }
  }
}

TEST_CASE("cursedness changes the one-shot solution through perceived strategies") {
  DirtyFacesSpec spec = bc2p(Representation::Simultaneous);
  spec.horizon = 3;
  const auto straight = solve_qcse(spec, {0.0, 6.0});
  const auto cursed = solve_qcse(spec, {1.0, 6.0});
  // the dirty-face observer discounts the plan/type correlation; the clean-face
  // observer holds a degenerate belief, so chi cannot move it
  double gap_x = 0.0, gap_o = 0.0;
  for (int a = 0; a < 4; ++a) {
    gap_x = std::max(gap_x, std::fabs(straight.plan_x[a] - cursed.plan_x[a]));
    gap_o = std::max(gap_o, std::fabs(straight.plan_o[a] - cursed.plan_o[a]));
  }
  REQUIRE(gap_x > 1e-3);
  REQUIRE(gap_o < 0.05);  // only via the other observer's shifted play
}

TEST_CASE("non-convergence surfaces as a diagnostic error") {
  FixedPointOptions opt;
  opt.max_iters = 1;
  opt.homotopy_step = 50.0;
  bool threw = false;
  try {
    solve_aqre_2p(bc2p(), 40.0, opt);
  } catch (const SolverError& e) {
    threw = true;
    REQUIRE(e.residual > 0.0);
  }
  REQUIRE(threw);
}

TEST_CASE("one-shot hierarchy hazard") {
  DirtyFacesSpec spec = bc2p(Representation::Simultaneous);
  // published static-hierarchy fit: claim probability 0.791 at (1, O)
  REQUIRE(static_ch_conditional(spec, LevelPrior::poisson(1.161), 1, "O", 'C') ==
          Catch::Approx(0.791).margin(5e-4));
  // (2, O) stays at 1/2 for any tau: strategic players are gone by period 2
  for (double tau : {0.4, 1.161, 3.0})
    REQUIRE(static_ch_conditional(spec, LevelPrior::poisson(tau), 2, "O", 'C') ==
            Catch::Approx(0.5).margin(1e-12));
  // level 0 alone: uniform plans give hazards 1/3 then 1/2
  for (const std::string obs : {"O", "X"}) {
    REQUIRE(static_ch_conditional(spec, LevelPrior::poisson(0.0), 1, obs, 'C') ==
            Catch::Approx(1.0 / 3.0).margin(1e-12));
    REQUIRE(static_ch_conditional(spec, LevelPrior::poisson(0.0), 2, obs, 'C') ==
            Catch::Approx(0.5).margin(1e-12));
  }
}
