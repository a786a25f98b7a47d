#pragma once

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "dchlab/analytic.hpp"
#include "dchlab/dirty_faces.hpp"
#include "dchlab/equilibrium.hpp"
#include "dchlab/math_util.hpp"
#include "dchlab/solver.hpp"

namespace dchlab::est {

using eqm::SolverError;

// ---------- dataset ----------

struct SpecRegistry {
  // representation on the stored spec is a default; each record carries its own
  std::map<std::string, DirtyFacesSpec> specs;

  static SpecRegistry builtin() {
    SpecRegistry r;
    r.specs["bc2p"] = DirtyFacesSpec{2, 2, 2.0 / 3.0, 0.25, 0.8, Representation::Sequential};
    r.specs["bc3p"] = DirtyFacesSpec{3, 3, 2.0 / 3.0, 0.25, 0.8, Representation::Sequential};
    return r;
  }

  const DirtyFacesSpec& at(const std::string& id) const {
    auto it = specs.find(id);
    if (it == specs.end()) throw ValidationError("unknown spec_id: " + id);
    return it->second;
  }
};

// One info-set-level cell: a choice (or plan) with a nonnegative count.
struct Observation {
  std::string spec_id;
  Representation rep = Representation::Sequential;
  int period = 0;            // 1..T for seq rows; 0 for sim plan rows
  std::string observed;      // "O"/"X" or "OO"/"OX"/"XX"
  std::string action;        // "C"/"W", or a plan "1".."T+1" for sim rows
  long count = 0;
};

struct ObservationDataset {
  std::vector<Observation> records;

  long total() const {
    long t = 0;
    for (const auto& r : records) t += r.count;
    return t;
  }

  void validate(const SpecRegistry& reg) const {
    for (const auto& r : records) {
      const DirtyFacesSpec& spec = reg.at(r.spec_id);
      if (r.count < 0) throw ValidationError("negative count");
      const bool obs_ok = spec.n_players == 2
                              ? (r.observed == "O" || r.observed == "X")
                              : (r.observed == "OO" || r.observed == "OX" || r.observed == "XX");
      if (!obs_ok)
        throw ValidationError("illegal observation '" + r.observed + "' for " + r.spec_id);
      if (r.rep == Representation::Sequential) {
        if (r.period < 1 || r.period > spec.horizon)
          throw ValidationError("period out of range for " + r.spec_id);
        if (r.action != "C" && r.action != "W")
          throw ValidationError("sequential action must be C or W");
      } else {
        if (r.period != 0)
          throw ValidationError("simultaneous plan rows use period 0");
        char* end = nullptr;
        long plan = std::strtol(r.action.c_str(), &end, 10);
        if (*end != '\0' || plan < 1 || plan > spec.horizon + 1)
          throw ValidationError("plan out of range for " + r.spec_id);
      }
    }
  }
};

// CSV schema (header required):
//   spec_id,representation,period,observed_faces,action,count
inline ObservationDataset ingest_csv(std::istream& in, const SpecRegistry& reg) {
  ObservationDataset ds;
  std::string line;
  int line_no = 0;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (!saw_header) {
      if (line != "spec_id,representation,period,observed_faces,action,count")
        throw ValidationError("line 1: bad or missing CSV header");
      saw_header = true;
      continue;
    }
    if (f.size() != 6)
      throw ValidationError("line " + std::to_string(line_no) + ": expected 6 fields");
    Observation o;
    o.spec_id = f[0];
    if (f[1] == "seq")
      o.rep = Representation::Sequential;
    else if (f[1] == "sim")
      o.rep = Representation::Simultaneous;
    else
      throw ValidationError("line " + std::to_string(line_no) + ": representation must be seq|sim");
    try {
      o.period = std::stoi(f[2]);
      o.count = std::stol(f[5]);
    } catch (const std::exception&) {
      throw ValidationError("line " + std::to_string(line_no) + ": bad integer field");
    }
    o.observed = f[3];
    o.action = f[4];
    ds.records.push_back(std::move(o));
    try {
      ObservationDataset probe;
      probe.records = {ds.records.back()};
      probe.validate(reg);
    } catch (const ValidationError& e) {
      throw ValidationError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return ds;
}

inline ObservationDataset ingest_csv_file(const std::string& path, const SpecRegistry& reg) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  return ingest_csv(in, reg);
}

enum class Treatment { TwoPerson, ThreePerson, Pooled };

// Info-set-level counts reconstructed from the published per-cell observation
// totals and choice frequencies of the two dirty-faces lab treatments.
// Frequencies are printed rounded; within that rounding slack the counts
// below are the (unique) reconstruction that reproduces all published
// likelihood and estimate values.
inline ObservationDataset embedded_dataset(Treatment t) {
  auto seq_cell = [](const char* id, int period, const char* obs, long claims,
                     long waits) -> std::vector<Observation> {
    return {{id, Representation::Sequential, period, obs, "C", claims},
            {id, Representation::Sequential, period, obs, "W", waits}};
  };
  ObservationDataset ds;
  auto add = [&ds](std::vector<Observation> v) {
    for (auto& o : v) ds.records.push_back(std::move(o));
  };
  if (t == Treatment::TwoPerson || t == Treatment::Pooled) {
    add(seq_cell("bc2p", 1, "O", 116, 7));
    add(seq_cell("bc2p", 2, "O", 3, 3));
    add(seq_cell("bc2p", 1, "X", 82, 309));
    add(seq_cell("bc2p", 2, "X", 105, 65));
  }
  if (t == Treatment::ThreePerson || t == Treatment::Pooled) {
    add(seq_cell("bc3p", 1, "OO", 44, 4));
    add(seq_cell("bc3p", 2, "OO", 1, 1));
    add(seq_cell("bc3p", 1, "OX", 110, 170));
    add(seq_cell("bc3p", 2, "OX", 35, 25));
    add(seq_cell("bc3p", 3, "OX", 2, 8));
    add(seq_cell("bc3p", 1, "XX", 77, 243));
    add(seq_cell("bc3p", 2, "XX", 31, 114));
    add(seq_cell("bc3p", 3, "XX", 20, 36));
  }
  return ds;
}

// ---------- likelihoods ----------

enum class Model { DCH, StaticCH, AQRE, QDCH, QCSE };

inline std::string to_string(Model m) {
  switch (m) {
    case Model::DCH: return "dch";
    case Model::StaticCH: return "staticch";
    case Model::AQRE: return "aqre";
    case Model::QDCH: return "qdch";
    case Model::QCSE: return "qcse";
  }
  return "?";
}

inline Model model_from_string(const std::string& s) {
  if (s == "dch") return Model::DCH;
  if (s == "staticch" || s == "static-ch" || s == "ch") return Model::StaticCH;
  if (s == "aqre") return Model::AQRE;
  if (s == "qdch") return Model::QDCH;
  if (s == "qcse") return Model::QCSE;
  throw ValidationError("unknown model: " + s);
}

inline std::vector<std::string> model_param_names(Model m) {
  switch (m) {
    case Model::DCH:
    case Model::StaticCH: return {"tau"};
    case Model::AQRE: return {"lambda"};
    case Model::QDCH: return {"tau", "lambda"};
    case Model::QCSE: return {"lambda", "chi"};
  }
  return {};
}

namespace detail {

// Per-(spec, representation) predicted probabilities. For sequential data a
// map (period, obs) -> (P(C), P(W)), each accumulated from positive terms so
// that tiny probabilities never round to zero; for plan data a map
// obs -> plan distribution.
struct GroupProbs {
  std::map<std::pair<int, std::string>, std::pair<double, double>> claim_wait;
  std::map<std::string, std::vector<double>> plans;
};

inline int obs_type_index(const MultiStageGame& g, const std::string& obs) {
  for (int th = 0; th < g.num_types(0); ++th)
    if (g.type_labels[0][th] == obs) return th;
  throw ValidationError("unknown observation: " + obs);
}

inline GroupProbs predict(Model m, const std::map<std::string, double>& params,
                          DirtyFacesSpec spec, Representation rep) {
  GroupProbs out;
  auto param = [&](const char* name) {
    auto it = params.find(name);
    if (it == params.end()) throw ValidationError(std::string("missing parameter ") + name);
    return it->second;
  };
  spec.representation = rep;

  if (rep == Representation::Sequential) {
    switch (m) {
      case Model::DCH:
      case Model::QDCH: {
        const LevelPrior prior = LevelPrior::poisson(param("tau"));
        const MultiStageGame g = build_sequential_dirty_faces(spec);
        SolveOptions opt;
        opt.store_beliefs = false;
        if (m == Model::QDCH) opt.lambda = param("lambda");
        const Assessment a = solve_dch(g, prior, opt);
        for (int th = 0; th < g.num_types(0); ++th) {
          int node = 0;
          for (int t = 1; t <= spec.horizon; ++t) {
            out.claim_wait[{t, g.type_labels[0][th]}] = {
                aggregate_choice_prob(a, g, prior, 0, th, node, 0),
                aggregate_choice_prob(a, g, prior, 0, th, node, 1)};
            if (t < spec.horizon) node = g.nodes[node].child[(1 << spec.n_players) - 1];
          }
        }
        break;
      }
      case Model::StaticCH: {
        eqm::StaticChModel sm(spec, LevelPrior::poisson(param("tau")));
        for (const auto& obs : sm.game.type_labels[0]) {
          const auto dist = sm.plan_distribution(obs);
          for (int t = 1; t <= spec.horizon; ++t) {
            double tail_after = 0.0, tail = dist[t - 1];
            for (size_t pl = t; pl < dist.size(); ++pl) {
              tail_after += dist[pl];
              tail += dist[pl];
            }
            out.claim_wait[{t, obs}] = {dist[t - 1] / tail, tail_after / tail};
          }
        }
        break;
      }
      case Model::AQRE: {
        if (spec.n_players == 2) {
          const auto sol = eqm::solve_aqre_2p(spec, param("lambda"));
          for (int t = 1; t <= spec.horizon; ++t) {
            out.claim_wait[{t, "O"}] = {sol.q[t], sol.qw[t]};
            out.claim_wait[{t, "X"}] = {sol.r[t], sol.rw[t]};
          }
        } else {
          const auto sol = eqm::solve_aqre_3p(spec, param("lambda"));
          for (int t = 1; t <= 3; ++t) {
            out.claim_wait[{t, "OO"}] = {sol.q[t], sol.qw[t]};
            out.claim_wait[{t, "OX"}] = {sol.r[t], sol.rw[t]};
            out.claim_wait[{t, "XX"}] = {sol.s[t], sol.sw[t]};
          }
        }
        break;
      }
      case Model::QCSE: {
        if (spec.n_players != 2)
          throw ValidationError("the cursed model covers two-person games only");
        const auto sol =
            eqm::solve_qcse(spec, eqm::CursedParams{param("chi"), param("lambda")});
        for (int t = 1; t <= spec.horizon; ++t) {
          out.claim_wait[{t, "O"}] = {sol.q[t], sol.qw[t]};
          out.claim_wait[{t, "X"}] = {sol.r[t], sol.rw[t]};
        }
        break;
      }
    }
    return out;
  }

  // plan-format data
  switch (m) {
    case Model::DCH:
    case Model::StaticCH:
    case Model::QDCH: {
      const LevelPrior prior = LevelPrior::poisson(param("tau"));
      const MultiStageGame g = build_simultaneous_dirty_faces(spec);
      SolveOptions opt;
      opt.store_beliefs = false;
      if (m == Model::QDCH) opt.lambda = param("lambda");
      const Assessment a = solve_dch(g, prior, opt);
      for (int th = 0; th < g.num_types(0); ++th) {
        std::vector<double> dist(spec.horizon + 1);
        for (size_t pl = 0; pl < dist.size(); ++pl)
          dist[pl] = aggregate_choice_prob(a, g, prior, 0, th, 0, static_cast<int>(pl));
        out.plans[g.type_labels[0][th]] = std::move(dist);
      }
      break;
    }
    case Model::AQRE:
    case Model::QCSE: {
      if (spec.n_players != 2)
        throw ValidationError("plan-format logit models cover two-person games only");
      const double chi = m == Model::AQRE ? 0.0 : param("chi");
      const auto sol = eqm::solve_qcse(spec, eqm::CursedParams{chi, param("lambda")});
      out.plans["O"] = sol.plan_o;
      out.plans["X"] = sol.plan_x;
      break;
    }
  }
  return out;
}

}  // namespace detail

struct LogLik {
  double ll = 0.0;
  std::vector<double> contributions;  // one per counted observation
};

inline LogLik loglik(Model m, const std::map<std::string, double>& params,
                     const ObservationDataset& ds, const SpecRegistry& reg) {
  ds.validate(reg);
  std::map<std::pair<std::string, Representation>, detail::GroupProbs> groups;
  for (const auto& r : ds.records) {
    auto key = std::make_pair(r.spec_id, r.rep);
    if (!groups.count(key)) groups[key] = detail::predict(m, params, reg.at(r.spec_id), r.rep);
  }
  LogLik out;
  out.contributions.reserve(static_cast<size_t>(ds.total()));
  for (const auto& r : ds.records) {
    if (r.count == 0) continue;
    const auto& gp = groups[{r.spec_id, r.rep}];
    double prob;
    if (r.rep == Representation::Sequential) {
      const auto& cw = gp.claim_wait.at({r.period, r.observed});
      prob = r.action == "C" ? cw.first : cw.second;
    } else {
      prob = gp.plans.at(r.observed)[std::stoi(r.action) - 1];
    }
    if (!(prob > 0.0))
      throw SolverError("model assigns zero probability to an observed choice", 0.0);
    const double lp = std::log(prob);
    out.ll += r.count * lp;
    out.contributions.insert(out.contributions.end(), r.count, lp);
  }
  return out;
}

// ---------- fitting ----------

struct FitOptions {
  double param_tol = 1e-5;
  int coarse = 121;       // 1-d seeding grid
  int coarse2 = 21;       // per-axis 2-d seeding grid
  std::map<std::string, std::pair<double, double>> bounds = {
      {"tau", {1e-4, 30.0}}, {"lambda", {1e-4, 200.0}}, {"chi", {0.0, 1.0}}};
};

struct FitResult {
  Model model = Model::DCH;
  std::map<std::string, double> params;
  std::map<std::string, double> ses;  // NaN when unavailable
  bool se_available = false;
  double hessian_condition = kNaN;
  double ll = kNaN;
  double aic = kNaN, bic = kNaN;
  long n_obs = 0;
  bool boundary = false;
  std::vector<double> contributions;
};

namespace detail {

// Golden-section maximization on [lo, hi]; assumes a bracketed maximum.
inline double golden_max(const std::function<double(double)>& f, double lo, double hi,
                         double tol) {
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - gr * (b - a), d = a + gr * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = f(d);
    }
  }
  return fc > fd ? c : d;
}

inline double maximize_1d(const std::function<double(double)>& f, double lo, double hi,
                          int coarse, double tol) {
  double best_x = lo, best = -1e308;
  for (int i = 0; i < coarse; ++i) {
    double x = lo + (hi - lo) * i / (coarse - 1.0);
    double v = f(x);
    if (v > best) {
      best = v;
      best_x = x;
    }
  }
  const double step = (hi - lo) / (coarse - 1.0);
  return golden_max(f, std::max(lo, best_x - step), std::min(hi, best_x + step), tol);
}

}  // namespace detail

inline FitResult fit(Model m, const ObservationDataset& ds, const SpecRegistry& reg,
                     const FitOptions& opt = {}) {
  if (ds.total() <= 0) throw ValidationError("cannot fit an empty dataset");
  const auto names = model_param_names(m);
  auto ll_of = [&](const std::map<std::string, double>& p) { return loglik(m, p, ds, reg).ll; };

  FitResult res;
  res.model = m;
  res.n_obs = ds.total();

  if (names.size() == 1) {
    const auto [lo, hi] = opt.bounds.at(names[0]);
    auto f = [&](double x) { return ll_of({{names[0], x}}); };
    double xhat = detail::maximize_1d(f, lo, hi, opt.coarse, opt.param_tol);
    res.params[names[0]] = xhat;
    res.boundary = xhat - lo < 10 * opt.param_tol || hi - xhat < 10 * opt.param_tol;
  } else {
    const auto [lo0, hi0] = opt.bounds.at(names[0]);
    const auto [lo1, hi1] = opt.bounds.at(names[1]);
    double x0 = lo0, x1 = lo1, best = -1e308;
    for (int i = 0; i < opt.coarse2; ++i) {
      for (int j = 0; j < opt.coarse2; ++j) {
        double a = lo0 + (hi0 - lo0) * i / (opt.coarse2 - 1.0);
        double b = lo1 + (hi1 - lo1) * j / (opt.coarse2 - 1.0);
        double v = ll_of({{names[0], a}, {names[1], b}});
        if (v > best) {
          best = v;
          x0 = a;
          x1 = b;
        }
      }
    }
    for (int sweep = 0; sweep < 40; ++sweep) {
      double prev0 = x0, prev1 = x1;
      x0 = detail::golden_max([&](double a) { return ll_of({{names[0], a}, {names[1], x1}}); },
                              lo0, hi0, opt.param_tol);
      x1 = detail::golden_max([&](double b) { return ll_of({{names[0], x0}, {names[1], b}}); },
                              lo1, hi1, opt.param_tol);
      if (std::fabs(x0 - prev0) < opt.param_tol && std::fabs(x1 - prev1) < opt.param_tol) break;
    }
    res.params[names[0]] = x0;
    res.params[names[1]] = x1;
    res.boundary = x0 - lo0 < 10 * opt.param_tol || hi0 - x0 < 10 * opt.param_tol ||
                   x1 - lo1 < 10 * opt.param_tol || hi1 - x1 < 10 * opt.param_tol;
  }

  const LogLik atmax = loglik(m, res.params, ds, reg);
  res.ll = atmax.ll;
  res.contributions = atmax.contributions;
  const int k = static_cast<int>(names.size());
  res.aic = 2.0 * k - 2.0 * res.ll;
  res.bic = k * std::log(static_cast<double>(res.n_obs)) - 2.0 * res.ll;

  // observed information via centered second differences
  if (names.size() == 1) {
    const double x = res.params[names[0]];
    const double h = 1e-4 * std::max(1.0, std::fabs(x));
    auto f = [&](double v) { return ll_of({{names[0], v}}); };
    const double d2 = (f(x + h) - 2.0 * res.ll + f(x - h)) / (h * h);
    if (std::isfinite(d2) && d2 < 0.0) {
      res.ses[names[0]] = 1.0 / std::sqrt(-d2);
      res.se_available = true;
      res.hessian_condition = 1.0;
    } else {
      res.ses[names[0]] = kNaN;
    }
  } else {
    const double x = res.params[names[0]], y = res.params[names[1]];
    const double hx = 1e-4 * std::max(1.0, std::fabs(x));
    const double hy = 1e-4 * std::max(1.0, std::fabs(y));
    auto f = [&](double a, double b) { return ll_of({{names[0], a}, {names[1], b}}); };
    const double dxx = (f(x + hx, y) - 2.0 * res.ll + f(x - hx, y)) / (hx * hx);
    const double dyy = (f(x, y + hy) - 2.0 * res.ll + f(x, y - hy)) / (hy * hy);
    const double dxy = (f(x + hx, y + hy) - f(x + hx, y - hy) - f(x - hx, y + hy) +
                        f(x - hx, y - hy)) /
                       (4.0 * hx * hy);
    // inverse of the negative Hessian
    const double det = dxx * dyy - dxy * dxy;
    const double tr = -dxx - dyy;
    if (std::isfinite(det) && det > 0.0 && tr > 0.0) {
      res.ses[names[0]] = std::sqrt(-dyy / det);
      res.ses[names[1]] = std::sqrt(-dxx / det);
      res.se_available = true;
      const double disc = std::sqrt(std::max(0.0, tr * tr - 4.0 * det));
      const double l1 = (tr + disc) / 2.0, l2 = (tr - disc) / 2.0;
      res.hessian_condition = l2 > 0.0 ? l1 / l2 : kNaN;
    } else {
      res.ses[names[0]] = kNaN;
      res.ses[names[1]] = kNaN;
      res.hessian_condition = kNaN;
    }
  }
  return res;
}

// ---------- model comparison ----------

struct VuongResult {
  double statistic = kNaN;
  double p_value = kNaN;
  bool defined = false;
};

// Normal statistic on per-observation log-likelihood differences, scaled by
// the root mean square of the differences.
inline VuongResult vuong_test(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size())
    throw ValidationError("contribution vectors must be aligned by observation");
  const size_t N = a.size();
  if (N == 0) throw ValidationError("empty contribution vectors");
  double mean = 0.0, msq = 0.0;
  for (size_t i = 0; i < N; ++i) {
    const double d = a[i] - b[i];
    mean += d;
    msq += d * d;
  }
  mean /= N;
  msq /= N;
  VuongResult out;
  const double var_centered = msq - mean * mean;
  if (!(var_centered > 1e-20)) return out;  // undefined: no variation in differences
  out.defined = true;
  out.statistic = mean / (std::sqrt(msq) / std::sqrt(static_cast<double>(N)));
  out.p_value = normal_two_sided_p(out.statistic);
  return out;
}

struct LrResult {
  double statistic = 0.0;
  double p_value = 1.0;
  bool clipped = false;
};

inline LrResult lr_test(double ll_restricted, double ll_unrestricted, int df) {
  LrResult out;
  out.statistic = 2.0 * (ll_unrestricted - ll_restricted);
  if (out.statistic < 0.0) {
    out.statistic = 0.0;
    out.clipped = true;
  }
  out.p_value = chi_square_upper_p(out.statistic, df);
  return out;
}

}  // namespace dchlab::est
