// dchlab: batch front end for the dirty-faces hierarchy toolkit.
//
// Subcommands:
//   solve      solve one model on one game and emit its solution as JSON
//   regions    stopping-period partition of the (delta, alpha_bar) square
//   estimate   maximum-likelihood fit of one model on a dataset
//   reproduce  rerun the benchmark estimation tables and diff the results
//
// Exit codes: 0 success, 2 input validation, 3 solver failure,
// 4 reproduction mismatch.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <functional>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "dchlab/analytic.hpp"
#include "dchlab/equilibrium.hpp"
#include "dchlab/estimation.hpp"
#include "dchlab/reproduce.hpp"
#include "dchlab/serialization.hpp"

using namespace dchlab;
using ojson = nlohmann::ordered_json;

namespace {

void write_text(const std::string& out, const std::string& text) {
  if (out.empty() || out == "-") {
    std::cout << text;
    if (text.empty() || text.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream f(out);
  if (!f) throw ValidationError("cannot write " + out);
  f << text;
  if (text.empty() || text.back() != '\n') f << '\n';
}

std::string fmt6(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

int grid_workers() {
  const char* env = std::getenv("DCHLAB_THREADS");
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw < 1) hw = 1;
  if (!env) return hw;
  int cap = std::atoi(env);
  return cap >= 1 ? std::min(cap, hw) : 1;
}

// equilibrium solutions in the assessment strategy shape:
// player -> "type|history" -> {action: probability}
ojson strategy_shape_json(const MultiStageGame& g,
                          const std::function<double(int type, int node, int action)>& prob) {
  ojson out;
  for (int i = 0; i < g.num_players; ++i) {
    ojson per_is;
    for (int th = 0; th < g.num_types(i); ++th)
      for (size_t v = 0; v < g.nodes.size(); ++v) {
        ojson dist;
        for (int act = 0; act < g.nodes[v].num_actions[i]; ++act)
          dist[g.nodes[v].action_labels[i][act]] = prob(th, static_cast<int>(v), act);
        per_is[info_set_descriptor(g, i, th, static_cast<int>(v))] = dist;
      }
    out[std::to_string(i)] = per_is;
  }
  return out;
}

ojson spec_json(const DirtyFacesSpec& s) {
  ojson j;
  j["n"] = s.n_players;
  j["T"] = s.horizon;
  j["p"] = s.p;
  j["alpha"] = s.alpha;
  j["delta"] = s.delta;
  j["alpha_bar"] = s.alpha_bar();
  j["representation"] = to_string(s.representation);
  return j;
}

// ---- solve ----

struct SolveArgs {
  std::string model;
  int n = 2, T = 2;
  double p = 0.5, alpha = 0.5, delta = 0.9;
  std::string representation = "seq";
  double tau = kNaN, lambda = kNaN, chi = kNaN;
  std::string out = "-";
  std::string format = "json";
  bool include_assessment = false;
};

int run_solve(const SolveArgs& a) {
  if (a.format != "json") throw ValidationError("solve emits json");
  DirtyFacesSpec spec{a.n, a.T, a.p, a.alpha, a.delta,
                      a.representation == "sim" ? Representation::Simultaneous
                                                : Representation::Sequential};
  if (a.representation != "seq" && a.representation != "sim")
    throw ValidationError("representation must be seq or sim");
  spec.validate();
  const est::Model model = est::model_from_string(a.model);
  auto need = [&](double v, const char* name) {
    if (!std::isfinite(v)) throw ValidationError(std::string("missing --") + name);
    return v;
  };
  if (model != est::Model::QCSE && std::isfinite(a.chi))
    throw ValidationError("--chi applies to the qcse model only");

  ojson out;
  out["spec"] = spec_json(spec);
  out["model"] = est::to_string(model);
  ojson params;

  const bool seq = spec.representation == Representation::Sequential;
  switch (model) {
    case est::Model::DCH:
    case est::Model::QDCH: {
      const double tau = need(a.tau, "tau");
      params["tau"] = tau;
      const LevelPrior prior = LevelPrior::poisson(tau);
      SolveOptions opt;
      if (model == est::Model::QDCH) opt.lambda = need(a.lambda, "lambda");
      if (model == est::Model::QDCH) params["lambda"] = opt.lambda;
      const MultiStageGame g = build_dirty_faces(spec);
      const Assessment sol = solve_dch(g, prior, opt);
      ojson agg;
      if (seq) {
        for (int th = 0; th < g.num_types(0); ++th) {
          int node = 0;
          for (int t = 1; t <= spec.horizon; ++t) {
            ojson cell;
            cell["C"] = aggregate_choice_prob(sol, g, prior, 0, th, node, 0);
            cell["W"] = aggregate_choice_prob(sol, g, prior, 0, th, node, 1);
            agg["(" + std::to_string(t) + "," + g.type_labels[0][th] + ")"] = cell;
            if (t < spec.horizon) node = g.nodes[node].child[(1 << spec.n_players) - 1];
          }
        }
        out["aggregate"] = agg;
      } else {
        ojson plans, cond;
        for (int th = 0; th < g.num_types(0); ++th) {
          std::vector<double> dist(spec.horizon + 1);
          for (size_t pl = 0; pl < dist.size(); ++pl)
            dist[pl] = aggregate_choice_prob(sol, g, prior, 0, th, 0, static_cast<int>(pl));
          plans[g.type_labels[0][th]] = dist;
          for (int t = 1; t <= spec.horizon; ++t) {
            double tail = 0.0;
            for (size_t pl = t - 1; pl < dist.size(); ++pl) tail += dist[pl];
            ojson cell;
            cell["C"] = dist[t - 1] / tail;
            cell["W"] = 1.0 - dist[t - 1] / tail;
            cond["(" + std::to_string(t) + "," + g.type_labels[0][th] + ")"] = cell;
          }
        }
        out["plan_distribution"] = plans;
        out["conditional"] = cond;
      }
      if (a.include_assessment) out["assessment"] = assessment_to_json(sol, g);
      break;
    }
    case est::Model::StaticCH: {
      const double tau = need(a.tau, "tau");
      params["tau"] = tau;
      eqm::StaticChModel m(spec, LevelPrior::poisson(tau));
      ojson plans, cond;
      for (const auto& obs : m.game.type_labels[0]) {
        const auto dist = m.plan_distribution(obs);
        plans[obs] = dist;
        for (int t = 1; t <= spec.horizon; ++t) {
          ojson cell;
          const double c = m.conditional_claim(t, obs);
          cell["C"] = c;
          cell["W"] = 1.0 - c;
          cond["(" + std::to_string(t) + "," + obs + ")"] = cell;
        }
      }
      out["plan_distribution"] = plans;
      out["conditional"] = cond;
      out["strategy"] = strategy_shape_json(m.game, [&](int th, int node, int act) {
        return aggregate_choice_prob(m.assessment, m.game, m.prior, 0, th, node, act);
      });
      break;
    }
    case est::Model::AQRE: {
      const double lam = need(a.lambda, "lambda");
      params["lambda"] = lam;
      if (!seq) {
        const auto sol = eqm::solve_qcse(spec, {0.0, lam});
        out["plan_o"] = sol.plan_o;
        out["plan_x"] = sol.plan_x;
        out["residual"] = sol.residual;
      } else if (spec.n_players == 2) {
        const auto sol = eqm::solve_aqre_2p(spec, lam);
        out["q"] = std::vector<double>(sol.q.begin() + 1, sol.q.end());
        out["r"] = std::vector<double>(sol.r.begin() + 1, sol.r.end());
        out["mu"] = std::vector<double>(sol.mu.begin() + 1, sol.mu.end());
        out["residual"] = sol.residual;
      } else {
        const auto sol = eqm::solve_aqre_3p(spec, lam);
        out["q"] = std::vector<double>(sol.q.begin() + 1, sol.q.end());
        out["r"] = std::vector<double>(sol.r.begin() + 1, sol.r.end());
        out["s"] = std::vector<double>(sol.s.begin() + 1, sol.s.end());
        out["pi"] = std::vector<double>(sol.pi.begin() + 1, sol.pi.end());
        out["nu"] = std::vector<double>(sol.nu.begin() + 1, sol.nu.end());
        out["residual"] = sol.residual;
      }
      {
        const MultiStageGame g = build_dirty_faces(spec);
        if (seq) {
          // claim probability by (observation, period), identical across players
          std::vector<std::vector<double>> claim(g.num_types(0),
                                                 std::vector<double>(spec.horizon + 1, 0.5));
          if (spec.n_players == 2) {
            const auto sol = eqm::solve_aqre_2p(spec, lam);
            for (int t = 1; t <= spec.horizon; ++t) {
              claim[0][t] = sol.q[t];
              claim[1][t] = sol.r[t];
            }
          } else {
            const auto sol = eqm::solve_aqre_3p(spec, lam);
            for (int t = 1; t <= 3; ++t) {
              claim[0][t] = sol.q[t];
              claim[1][t] = sol.r[t];
              claim[2][t] = sol.s[t];
            }
          }
          out["strategy"] = strategy_shape_json(g, [&](int th, int node, int act) {
            const double c = claim[th][g.nodes[node].depth + 1];
            return act == 0 ? c : 1.0 - c;
          });
        } else {
          const auto sol = eqm::solve_qcse(spec, {0.0, lam});
          out["strategy"] = strategy_shape_json(g, [&](int th, int, int act) {
            return th == 0 ? sol.plan_o[act] : sol.plan_x[act];
          });
        }
      }
      break;
    }
    case est::Model::QCSE: {
      const double lam = need(a.lambda, "lambda");
      const double chi = need(a.chi, "chi");
      params["lambda"] = lam;
      params["chi"] = chi;
      const auto sol = eqm::solve_qcse(spec, {chi, lam});
      if (seq) {
        out["q"] = std::vector<double>(sol.q.begin() + 1, sol.q.end());
        out["r"] = std::vector<double>(sol.r.begin() + 1, sol.r.end());
        out["mu"] = std::vector<double>(sol.mu.begin() + 1, sol.mu.end());
      } else {
        out["plan_o"] = sol.plan_o;
        out["plan_x"] = sol.plan_x;
      }
      out["residual"] = sol.residual;
      {
        const MultiStageGame g = build_dirty_faces(spec);
        out["strategy"] = strategy_shape_json(g, [&](int th, int node, int act) {
          if (seq) {
            const int t = g.nodes[node].depth + 1;
            const double c = th == 0 ? sol.q[t] : sol.r[t];
            return act == 0 ? c : 1.0 - c;
          }
          return th == 0 ? sol.plan_o[act] : sol.plan_x[act];
        });
      }
      break;
    }
  }
  out["params"] = params;
  write_text(a.out, out.dump(2));
  return 0;
}

// ---- regions ----

struct RegionArgs {
  int T = 5;
  double tau = 1.5;
  int level = 2;
  std::string representation = "both";
  int grid = 401;
  std::string format;
  std::string out = "-";
  std::vector<int> delta_bar;
  int delta_bar_limit = -1;
};

int run_regions(const RegionArgs& a) {
  if (!a.delta_bar.empty()) {
    if (a.delta_bar.size() != 2) throw ValidationError("--delta-bar takes T t");
    ojson j = analytic::delta_bar(a.delta_bar[0], a.delta_bar[1]);
    write_text(a.out, j.dump());
    return 0;
  }
  if (a.delta_bar_limit >= 0) {
    ojson j = analytic::delta_bar_limit(a.delta_bar_limit);
    write_text(a.out, j.dump());
    return 0;
  }
  std::vector<Representation> reps;
  if (a.representation == "both")
    reps = {Representation::Sequential, Representation::Simultaneous};
  else if (a.representation == "seq")
    reps = {Representation::Sequential};
  else if (a.representation == "sim")
    reps = {Representation::Simultaneous};
  else
    throw ValidationError("representation must be seq, sim or both");
  std::string format = a.format;
  if (format.empty()) {
    format = "csv";
    if (a.out.size() > 5 && a.out.substr(a.out.size() - 5) == ".json") format = "json";
  }
  const LevelPrior prior = LevelPrior::poisson(a.tau);
  const int workers = grid_workers();

  if (format == "csv") {
    std::string text = "delta,alpha_bar,level,representation,stopping_period\n";
    for (Representation rep : reps) {
      const auto rp = analytic::region_partition(a.T, prior, a.level, rep, a.grid, workers);
      for (size_t di = 0; di < rp.delta_grid.size(); ++di)
        for (size_t ai = 0; ai < rp.alpha_grid.size(); ++ai)
          text += fmt6(rp.delta_grid[di]) + "," + fmt6(rp.alpha_grid[ai]) + "," +
                  std::to_string(a.level) + "," + to_string(rep) + "," +
                  std::to_string(rp.at(di, ai)) + "\n";
    }
    write_text(a.out, text);
    return 0;
  }
  if (format != "json") throw ValidationError("format must be csv or json");
  ojson j;
  j["T"] = a.T;
  j["tau"] = a.tau;
  j["level"] = a.level;
  j["grid"] = {{"resolution", a.grid}, {"inset", 1e-3}};
  ojson curves = ojson::array();
  for (Representation rep : reps) {
    const auto rp = analytic::region_partition(a.T, prior, a.level, rep, 2, 1);
    for (const auto& c : rp.boundaries) {
      ojson cj;
      cj["representation"] = to_string(rep);
      cj["level"] = a.level;
      cj["claim_by"] = c.claim_by;
      cj["num_const"] = c.num_const;
      cj["num_delta"] = c.num_delta;
      cj["den_const"] = c.den_const;
      cj["den_delta"] = c.den_delta;
      curves.push_back(cj);
    }
  }
  j["boundaries"] = curves;
  write_text(a.out, j.dump(2));
  return 0;
}

// ---- estimate ----

struct EstimateArgs {
  std::string model;
  std::string embedded;
  std::string data, registry;
  std::string out = "-";
  double tol = 1e-5;
  bool contributions = false;
};

est::SpecRegistry load_registry(const std::string& path) {
  if (path.empty()) return est::SpecRegistry::builtin();
  std::ifstream f(path);
  if (!f) throw ValidationError("cannot open " + path);
  nlohmann::json j;
  try {
    f >> j;
  } catch (const std::exception& e) {
    throw ValidationError(std::string("bad registry json: ") + e.what());
  }
  est::SpecRegistry reg = est::SpecRegistry::builtin();
  for (auto it = j.begin(); it != j.end(); ++it) {
    const auto& v = it.value();
    DirtyFacesSpec s{v.at("n").get<int>(), v.at("T").get<int>(), v.at("p").get<double>(),
                     v.at("alpha").get<double>(), v.at("delta").get<double>(),
                     Representation::Sequential};
    s.validate();
    reg.specs[it.key()] = s;
  }
  return reg;
}

ojson fit_json(const est::FitResult& r, bool with_contributions) {
  ojson j;
  j["model"] = est::to_string(r.model);
  ojson params, ses;
  for (const auto& [k, v] : r.params) params[k] = v;
  for (const auto& [k, v] : r.ses) {
    if (std::isfinite(v))
      ses[k] = v;
    else
      ses[k] = nullptr;
  }
  j["params"] = params;
  j["se"] = ses;
  j["se_available"] = r.se_available;
  if (std::isfinite(r.hessian_condition)) j["hessian_condition"] = r.hessian_condition;
  j["ll"] = r.ll;
  j["aic"] = r.aic;
  j["bic"] = r.bic;
  j["n_obs"] = r.n_obs;
  j["boundary"] = r.boundary;
  if (with_contributions) j["contributions"] = r.contributions;
  return j;
}

int run_estimate(const EstimateArgs& a) {
  const est::Model model = est::model_from_string(a.model);
  if (a.embedded.empty() == a.data.empty())
    throw ValidationError("give exactly one of --embedded or --data");
  const est::SpecRegistry reg = load_registry(a.registry);
  est::ObservationDataset ds;
  if (!a.embedded.empty()) {
    if (a.embedded == "two")
      ds = est::embedded_dataset(est::Treatment::TwoPerson);
    else if (a.embedded == "three")
      ds = est::embedded_dataset(est::Treatment::ThreePerson);
    else if (a.embedded == "pooled")
      ds = est::embedded_dataset(est::Treatment::Pooled);
    else
      throw ValidationError("--embedded must be two, three or pooled");
  } else {
    ds = est::ingest_csv_file(a.data, reg);
  }
  est::FitOptions opt;
  opt.param_tol = a.tol;
  const est::FitResult r = est::fit(model, ds, reg, opt);
  write_text(a.out, fit_json(r, a.contributions).dump(2));
  return 0;
}

// ---- reproduce ----

int run_reproduce(const std::string& table, const std::string& out) {
  std::vector<repro::TableResult> results;
  if (table == "two-person" || table == "all") results.push_back(repro::reproduce_two_person());
  if (table == "three-person" || table == "all")
    results.push_back(repro::reproduce_three_person());
  if (table == "pooled" || table == "all") results.push_back(repro::reproduce_pooled());
  if (results.empty())
    throw ValidationError("--table must be two-person, three-person, pooled or all");
  bool all_pass = true;
  ojson j = ojson::array();
  for (const auto& r : results) {
    std::printf("== %s table (%.1fs) ==\n", r.table.c_str(), r.seconds);
    ojson tj;
    tj["table"] = r.table;
    tj["seconds"] = r.seconds;
    ojson checks = ojson::array();
    for (const auto& c : r.checks) {
      std::printf("  [%s] %-28s %12.4f  expected %10.4f +/- %g\n",
                  c.pass() ? "PASS" : "FAIL", c.name.c_str(), c.actual, c.expected, c.tol);
      ojson cj;
      cj["name"] = c.name;
      cj["actual"] = c.actual;
      cj["expected"] = c.expected;
      cj["tol"] = c.tol;
      cj["pass"] = c.pass();
      checks.push_back(cj);
      all_pass &= c.pass();
    }
    tj["checks"] = checks;
    j.push_back(tj);
  }
  if (!out.empty() && out != "-") write_text(out, j.dump(2));
  std::printf("%s\n", all_pass ? "reproduction OK" : "reproduction MISMATCH");
  return all_pass ? 0 : 4;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"solvers, region exports and structural estimation for dirty-faces games"};
  app.require_subcommand(1);

  SolveArgs sa;
  CLI::App* solve = app.add_subcommand("solve", "solve one model on one game");
  solve->add_option("--model", sa.model, "dch|staticch|aqre|qdch|qcse")->required();
  solve->add_option("--n", sa.n, "players (2 or 3)");
  solve->add_option("--T", sa.T, "horizon");
  solve->add_option("--p", sa.p, "dirty-face probability");
  solve->add_option("--alpha", sa.alpha, "reward for a correct claim");
  solve->add_option("--delta", sa.delta, "discount factor");
  solve->add_option("--representation", sa.representation, "seq|sim");
  solve->add_option("--tau", sa.tau, "Poisson level-prior rate");
  solve->add_option("--lambda", sa.lambda, "logit precision");
  solve->add_option("--chi", sa.chi, "cursedness in [0,1]");
  solve->add_option("--out", sa.out, "output path or - for stdout");
  solve->add_option("--format", sa.format, "json");
  solve->add_flag("--include-assessment", sa.include_assessment,
                  "embed the full level-dependent assessment");

  RegionArgs ra;
  CLI::App* regions = app.add_subcommand("regions", "stopping-period region export");
  regions->add_option("--T", ra.T, "horizon");
  regions->add_option("--tau", ra.tau, "Poisson level-prior rate");
  regions->add_option("--level", ra.level, "hierarchy level (>= 2)");
  regions->add_option("--representation", ra.representation, "seq|sim|both");
  regions->add_option("--grid", ra.grid, "grid resolution per axis");
  regions->add_option("--format", ra.format, "csv|json (default by extension, else csv)");
  regions->add_option("--out", ra.out, "output path or - for stdout");
  regions->add_option("--delta-bar", ra.delta_bar,
                      "print the sequential/simultaneous crossing discount for T t")
      ->expected(2);
  regions->add_option("--delta-bar-limit", ra.delta_bar_limit,
                      "print the long-horizon crossing discount for period t");

  EstimateArgs ea;
  CLI::App* estimate = app.add_subcommand("estimate", "maximum-likelihood fit");
  estimate->add_option("--model", ea.model, "dch|staticch|aqre|qdch|qcse")->required();
  estimate->add_option("--embedded", ea.embedded, "two|three|pooled");
  estimate->add_option("--data", ea.data, "observation CSV path");
  estimate->add_option("--registry", ea.registry, "spec registry JSON path");
  estimate->add_option("--out", ea.out, "output path or - for stdout");
  estimate->add_option("--tol", ea.tol, "parameter tolerance");
  estimate->add_flag("--contributions", ea.contributions,
                     "include per-observation log-likelihood contributions");

  std::string table = "all", rout = "-";
  CLI::App* reproduce = app.add_subcommand("reproduce", "rerun the benchmark tables");
  reproduce->add_option("--table", table, "two-person|three-person|pooled|all");
  reproduce->add_option("--out", rout, "also write the checks as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*solve) return run_solve(sa);
    if (*regions) return run_regions(ra);
    if (*estimate) return run_estimate(ea);
    if (*reproduce) return run_reproduce(table, rout);
  } catch (const eqm::SolverError& e) {
    std::cerr << "solver error: " << e.what() << " (residual " << e.residual << ")\n";
    return 3;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
