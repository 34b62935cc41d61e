#include "qwalk/cli/run.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <json.hpp>
#include <limits>
#include <map>
#include <string>

#include "qwalk/cli/scenario.hpp"
#include "qwalk/continuum.hpp"
#include "qwalk/dqw.hpp"
#include "qwalk/harness.hpp"
#include "qwalk/symmetry.hpp"

namespace qwalk::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

struct CheckRecord {
  std::string check;
  bool passed = false;
  double max_violation = 0.0;
  std::size_t n = 0;
  double h = 0.0;
  json details = json::object();
};

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json array_of(const std::vector<double>& v) {
  json a = json::array();
  for (double d : v) a.push_back(finite_or_null(d));
  return a;
}

class Session {
 public:
  Session(const Scenario& s, fs::path out_dir, std::ostream& out, bool quiet)
      : s_(s), dir_(std::move(out_dir)), out_(out), quiet_(quiet) {
    fs::create_directories(dir_);
  }

  std::ofstream open(const std::string& name) {
    const fs::path p = dir_ / name;
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + p.string());
    if (!quiet_) out_ << "wrote " << p.string() << '\n';
    return f;
  }

  void record(CheckRecord r) {
    out_ << (r.passed ? "PASS " : "FAIL ") << r.check
         << " max_violation=" << format_double(r.max_violation) << '\n';
    records_.push_back(std::move(r));
  }

  void flush_records() {
    std::ofstream f = open("checks.ndjson");
    for (const auto& r : records_) {
      json j;
      j["check"] = r.check;
      j["passed"] = r.passed;
      j["max_violation"] = finite_or_null(r.max_violation);
      j["grid"] = {{"n", r.n}, {"h", finite_or_null(r.h)}};
      j["details"] = r.details;
      f << j.dump() << '\n';
    }
    f.flush();
  }

  bool all_passed() const {
    return std::all_of(records_.begin(), records_.end(),
                       [](const CheckRecord& r) { return r.passed; });
  }

  const Scenario& scenario() const { return s_; }

 private:
  const Scenario& s_;
  fs::path dir_;
  std::ostream& out_;
  bool quiet_;
  std::vector<CheckRecord> records_;
};

// Errors this small mean the two sides agree exactly; their ratios carry no
// order information.
constexpr double kRoundoffFloor = 1e-10;

std::string csv_order(const std::vector<double>& orders, std::size_t row) {
  if (row == 0 || row - 1 >= orders.size()) return "";
  return format_double(orders[row - 1]);
}

// Density-amplitude Gaussian of the scenario profile (not normalized).
PointField profile_field(const InitialProfile& p) {
  return [p](double x) { return p.value(x); };
}

SpinorField normalized_density(const InitialProfile& p, const ContinuumGrid& g) {
  SpinorField f = sample_point_field(profile_field(p), g, g.t0);
  const double prob = weighted_probability(f, g.dx);
  return scaled(f, 1.0 / std::sqrt(prob));
}

ContinuumGrid finest(const Scenario& s) {
  return domain_grid(s.continuum.domain, s.continuum.n_sites.back(),
                     s.jet.speed(), s.continuum.cfl);
}

// ---------------------------------------------------------------- checks

void walk_probability(Session& ss, bool write_snapshots) {
  const Scenario& s = ss.scenario();
  const std::size_t j = s.grid.steps(s.jet.tau);
  auto [walk, grid] = instantiate_walk(s.jet, s.grid.epsilon, s.grid.n_sites,
                                       0.0, s.grid.x0, j);
  const SpinorField init = sample_initial(s.initial, grid);
  const WalkRun run = run_walk(init, walk, grid, j, s.snapshot_every);
  if (write_snapshots) {
    std::ofstream f = ss.open("walk.csv");
    write_csv_header(f);
    for (const auto& snap : run.snapshots) {
      write_snapshot_csv(f, snap, grid.x0, grid.dx, false);
    }
  }
  CheckRecord r;
  r.check = "probability";
  r.max_violation = run.max_step_drift;
  r.passed = run.max_step_drift <= s.tol.probability;
  r.n = grid.n_sites;
  r.h = grid.dx;
  r.details = {{"steps", j},
               {"epsilon", s.grid.epsilon},
               {"final_probability", total_probability(run.snapshots.back())},
               {"tolerance", s.tol.probability}};
  ss.record(std::move(r));
}

void simulate_continuum(Session& ss) {
  const Scenario& s = ss.scenario();
  const double dx = s.jet.lambda * std::pow(s.grid.epsilon, s.jet.delta);
  const ContinuumGrid g = make_continuum_grid(s.grid.n_sites, dx, s.grid.x0, 0.0,
                                              s.jet.speed(), s.continuum.cfl);
  const double t_final = s.grid.t_final
                             ? *s.grid.t_final
                             : static_cast<double>(*s.grid.j_steps) * s.jet.tau *
                                   s.grid.epsilon;
  IntegrationOptions opt;
  opt.snapshot_every = s.snapshot_every;
  const ContinuumRun run = integrate_dirac(normalized_density(s.initial, g), s.jet,
                                           g, t_final, opt);
  std::ofstream f = ss.open("continuum.csv");
  write_csv_header(f);
  for (const auto& snap : run.snapshots) write_snapshot_csv(f, snap, g.x0, g.dx, false);
  CheckRecord r;
  r.check = "continuum_probability";
  r.max_violation = run.max_drift;
  r.passed = run.max_drift <= s.tol.conservation_drift;
  r.n = g.n_sites;
  r.h = g.dx;
  r.details = {{"t_final", t_final}, {"dt", run.dt_used}, {"steps", run.steps},
               {"tolerance", s.tol.conservation_drift}};
  ss.record(std::move(r));
}

void converge(Session& ss) {
  const Scenario& s = ss.scenario();
  const ConvergenceReport rep = convergence_study(s.jet, s.ladder, s.initial, s.domain);
  {
    std::ofstream f = ss.open("converge.csv");
    f << "epsilon,error,observed_order\n";
    for (std::size_t i = 0; i < rep.h.size(); ++i) {
      f << format_double(rep.h[i]) << ',' << format_double(rep.errors[i]) << ','
        << csv_order(rep.orders, i) << '\n';
    }
  }
  const auto tail = rep.tail_orders(3);
  double worst = 0.0;
  for (double q : tail) {
    worst = std::max(worst, std::max(s.tol.order_lo - q, q - s.tol.order_hi));
  }
  const double drift = *std::max_element(rep.walk_drift.begin(), rep.walk_drift.end());
  CheckRecord r;
  r.check = "converge";
  const bool exact = rep.errors.back() <= kRoundoffFloor;
  r.passed = (exact || rep.tail_in_band(s.tol.order_lo, s.tol.order_hi)) &&
             drift <= s.tol.probability;
  r.max_violation = exact ? 0.0 : std::max(0.0, worst);
  r.n = s.domain.sites(s.jet.lambda * s.ladder.eps.back());
  r.h = s.ladder.eps.back();
  r.details = {{"reference", rep.reference},
               {"epsilon", array_of(rep.h)},
               {"errors", array_of(rep.errors)},
               {"even_errors", array_of(rep.even_errors)},
               {"odd_errors", array_of(rep.odd_errors)},
               {"orders", array_of(rep.orders)},
               {"tail_orders", array_of(tail)},
               {"median_order", finite_or_null(rep.median_order)},
               {"max_walk_drift", drift},
               {"exact_agreement", exact},
               {"band", {s.tol.order_lo, s.tol.order_hi}}};
  ss.record(std::move(r));
}

void hadamard(Session& ss) {
  const Scenario& s = ss.scenario();
  EpsilonLadder ladder;
  ladder.t_physical = s.ladder.t_physical;
  for (std::size_t j : s.hadamard_steps) {
    ladder.eps.push_back(ladder.t_physical / static_cast<double>(j));
  }
  const HadamardReport rep =
      hadamard_nolimit_demo(ladder, s.initial, s.domain, s.tol.hadamard_factor);
  {
    std::ofstream f = ss.open("hadamard.csv");
    f << "eps_coarse,eps_fine,d_fixed,d_control\n";
    for (std::size_t i = 0; i < rep.fixed_distances.size(); ++i) {
      f << format_double(rep.eps[i]) << ',' << format_double(rep.eps[i + 1]) << ','
        << format_double(rep.fixed_distances[i]) << ','
        << format_double(rep.control_distances[i]) << '\n';
    }
  }
  CheckRecord r;
  r.check = "hadamard";
  r.passed = rep.passed();
  r.max_violation = rep.insufficient_rungs
                        ? std::numeric_limits<double>::infinity()
                        : rep.factor * rep.control_last / rep.min_fixed;
  r.n = rep.eps.empty() ? 0 : s.domain.sites(rep.eps.back());
  r.h = rep.eps.empty() ? 0.0 : rep.eps.back();
  r.details = {{"insufficient_rungs", rep.insufficient_rungs},
               {"steps", s.hadamard_steps},
               {"fixed_distances", array_of(rep.fixed_distances)},
               {"control_distances", array_of(rep.control_distances)},
               {"min_fixed", rep.min_fixed},
               {"control_last", rep.control_last},
               {"factor", rep.factor}};
  ss.record(std::move(r));
}

void kg(Session& ss) {
  const Scenario& s = ss.scenario();
  const ConvergenceReport rep =
      kg_order_study(s.jet, profile_field(s.initial), s.continuum, s.tol.theta_min);
  {
    std::ofstream f = ss.open("kg_order.csv");
    f << "h,max_residual,observed_order\n";
    for (std::size_t i = 0; i < rep.h.size(); ++i) {
      f << format_double(rep.h[i]) << ',' << format_double(rep.errors[i]) << ','
        << csv_order(rep.orders, i) << '\n';
    }
  }
  const ContinuumGrid g = finest(s);
  IntegrationOptions opt;
  opt.keep_tail = 3;
  const ContinuumRun run = integrate_dirac(
      sample_point_field(profile_field(s.initial), g, 0.0), s.jet, g,
      s.continuum.t_final, opt);
  const KgResidual res =
      kg_residual({run.tail[0], run.tail[1], run.tail[2]}, s.jet, g, s.tol.theta_min);
  {
    std::ofstream f = ss.open("kg_residual.csv");
    write_residual_csv(f, res, g);
  }
  CheckRecord r;
  r.check = "kg";
  r.passed = rep.tail_at_least(s.tol.kg_order, rep.h.size());
  r.max_violation = rep.errors.back();
  r.n = g.n_sites;
  r.h = g.dx;
  r.details = {{"h", array_of(rep.h)},
               {"residuals", array_of(rep.errors)},
               {"orders", array_of(rep.orders)},
               {"masked_points", res.masked_count},
               {"min_order", s.tol.kg_order}};
  ss.record(std::move(r));
}

void gauge(Session& ss) {
  const Scenario& s = ss.scenario();
  const GaugeConnection b = connection_from_jet(s.jet);
  const NullCoords c = NullCoords::of(s.jet);
  const Expr alpha_expr = s.gauge_alpha;
  const GaugeConnection::Field alpha = [alpha_expr](double t, double x) {
    return alpha_expr.eval(t, x);
  };
  ConvergenceReport via, direct;
  for (std::size_t n : s.continuum.n_sites) {
    const ContinuumGrid g = domain_grid(s.continuum.domain, n, s.jet.speed(),
                                        s.continuum.cfl);
    IntegrationOptions opt;
    opt.keep_tail = 3;
    const ContinuumRun run = integrate_dirac(
        sample_point_field(profile_field(s.initial), g, 0.0), s.jet, g,
        s.continuum.t_final, opt);
    const GaugeIdentityReport rep = gauge_identity_check(
        b, s.gauge_generator, alpha, window_from_tail(run.tail), c, g);
    via.h.push_back(g.dx);
    via.errors.push_back(rep.max_error);
    direct.h.push_back(g.dx);
    direct.errors.push_back(rep.direct_form_error);
  }
  via.finalize();
  direct.finalize();
  {
    std::ofstream f = ss.open("gauge.csv");
    f << "h,error,direct_form_error,observed_order\n";
    for (std::size_t i = 0; i < via.h.size(); ++i) {
      f << format_double(via.h[i]) << ',' << format_double(via.errors[i]) << ','
        << format_double(direct.errors[i]) << ',' << csv_order(via.orders, i) << '\n';
    }
  }
  CheckRecord r;
  r.check = "gauge";
  r.max_violation = via.errors.back();
  r.passed = via.tail_at_least(s.tol.gauge_order, via.h.size()) &&
             via.errors.back() <= s.tol.gauge_final;
  r.n = s.continuum.n_sites.back();
  r.h = via.h.back();
  r.details = {{"generator", s.gauge_generator},
               {"alpha", s.gauge_alpha.to_string()},
               {"errors", array_of(via.errors)},
               {"orders", array_of(via.orders)},
               {"direct_form_errors", array_of(direct.errors)},
               {"direct_form_orders", array_of(direct.orders)},
               {"min_order", s.tol.gauge_order},
               {"final_tolerance", s.tol.gauge_final}};
  ss.record(std::move(r));
}

void conservation(Session& ss) {
  const Scenario& s = ss.scenario();
  const GaugeConnection b = connection_from_jet(s.jet);
  const NullCoords c = NullCoords::of(s.jet);
  const ContinuumGrid g = finest(s);
  const std::vector<double> times{0.0, 0.5 * s.continuum.t_final, s.continuum.t_final};
  const ProbabilityFormReport form = probability_form_check(b, g, times);
  const double drift = dynamic_probability_drift(b, normalized_density(s.initial, g),
                                                 c, g, s.continuum.t_final);
  const bool agree = form.conserving == (drift <= s.tol.conservation_drift);

  // compatibility with the transformation along the configured generator
  const int j = s.gauge_generator;
  const GaugeConnection bt = gauge_transform(b, j, s.gauge_alpha, c, g.dx);
  const ProbabilityFormReport after = probability_form_check(bt, g, times);
  const bool preserved =
      after.conserving && (j != 3 || after.sigma3_split <= kProbabilityFormTol);
  double dx_alpha = 0.0;
  for (double t : times) {
    for (std::size_t i = 0; i < g.n_sites; ++i) {
      dx_alpha = std::max(dx_alpha,
                          std::abs(differentiate(s.gauge_alpha, t, g.x(i), g.dx).d_x));
    }
  }
  const bool x_independent = dx_alpha <= kProbabilityFormTol;

  CheckRecord r;
  r.check = "conservation_form";
  r.passed = form.conserving && agree && preserved == x_independent;
  r.max_violation = form.max_violation;
  r.n = g.n_sites;
  r.h = g.dx;
  r.details = {{"conserving", form.conserving},
               {"dynamic_drift", drift},
               {"drift_tolerance", s.tol.conservation_drift},
               {"form_agrees_with_dynamics", agree},
               {"generator", j},
               {"alpha", s.gauge_alpha.to_string()},
               {"max_abs_dx_alpha", dx_alpha},
               {"transformed_violation", after.max_violation},
               {"transformed_sigma3_split", after.sigma3_split},
               {"form_preserved", preserved}};
  ss.record(std::move(r));
}

void variational(Session& ss, Null side) {
  const Scenario& s = ss.scenario();
  const auto [rep, last] = variational_order_study(s.jet, side, s.continuum);
  {
    std::ofstream f = ss.open("variational_" + to_string(side) + ".csv");
    f << "h,curvature,observed_order\n";
    for (std::size_t i = 0; i < rep.h.size(); ++i) {
      f << format_double(rep.h[i]) << ',' << format_double(rep.errors[i]) << ','
        << csv_order(rep.orders, i) << '\n';
    }
  }
  const double fin = rep.errors.back();
  const bool order_ok = fin <= kRoundoffFloor ||
                        rep.tail_at_least(s.tol.variational_order, rep.h.size());
  const bool admits = last.dissipative_violation <= s.tol.variational &&
                      last.constraint_violation <= s.tol.variational;
  CheckRecord r;
  r.check = "variational_" + to_string(side);
  r.passed = admits && fin <= s.tol.variational && order_ok;
  r.max_violation = std::max({fin, last.dissipative_violation, last.constraint_violation});
  r.n = s.continuum.n_sites.back();
  r.h = rep.h.back();
  r.details = {{"admits_variational", admits},
               {"dissipative_violation", last.dissipative_violation},
               {"constraint_violation", last.constraint_violation},
               {"constraint_as_stated_violation", last.constraint_as_stated_violation},
               {"curvature", array_of(rep.errors)},
               {"orders", array_of(rep.orders)},
               {"mass_min", last.mass_min},
               {"tolerance", s.tol.variational}};
  ss.record(std::move(r));
}

void lagrangian(Session& ss) {
  const Scenario& s = ss.scenario();
  const InitialProfile p = s.initial;
  const double c = s.jet.speed();
  // off-shell test field: the packet drifting at a third of the signal speed
  const SpaceTimeField test = [p, c](double t, double x) {
    const auto [lo, hi] = p.value(x - c * t / 3.0);
    const cplx ph = std::polar(1.0, t);
    return std::pair<cplx, cplx>{lo * ph, (hi + 0.5 * lo) * std::conj(ph)};
  };
  const LagrangianStudy st = lagrangian_study(s.jet, profile_field(p), test, s.continuum);
  {
    std::ofstream f = ss.open("lagrangian.csv");
    f << "h,on_shell_density,dirac_form_gap,adjoint_form_gap,covariant_form_gap\n";
    for (std::size_t i = 0; i < st.h.size(); ++i) {
      f << format_double(st.h[i]) << ',' << format_double(st.on_shell.errors[i]) << ','
        << format_double(st.off_shell[i].dirac_form_gap) << ','
        << format_double(st.off_shell[i].adjoint_form_gap) << ','
        << format_double(st.off_shell[i].covariant_form_gap) << '\n';
    }
  }
  const LagrangianReport& last = st.off_shell.back();
  const bool on_shell_ok =
      st.on_shell.tail_at_least(s.tol.lagrangian_order, st.on_shell.h.size());
  CheckRecord r;
  r.check = "lagrangian";
  r.passed = last.dirac_form_gap <= s.tol.lagrangian_gap && on_shell_ok;
  r.max_violation = last.dirac_form_gap;
  r.n = s.continuum.n_sites.back();
  r.h = st.h.back();
  r.details = {{"dirac_form_gap", last.dirac_form_gap},
               {"adjoint_form_gap", last.adjoint_form_gap},
               {"covariant_form_gap", last.covariant_form_gap},
               {"on_shell_density", array_of(st.on_shell.errors)},
               {"on_shell_orders", array_of(st.on_shell.orders)},
               {"gap_tolerance", s.tol.lagrangian_gap}};
  ss.record(std::move(r));
}

void run_named_check(Session& ss, const std::string& name) {
  if (name == "probability") walk_probability(ss, false);
  else if (name == "converge") converge(ss);
  else if (name == "hadamard") hadamard(ss);
  else if (name == "kg") kg(ss);
  else if (name == "gauge") gauge(ss);
  else if (name == "conservation_form") conservation(ss);
  else if (name == "variational_minus") variational(ss, Null::minus);
  else if (name == "variational_plus") variational(ss, Null::plus);
  else if (name == "lagrangian") lagrangian(ss);
  else throw ConfigError("unknown check '" + name + "'");
}

using Command = std::function<void(Session&)>;

const std::vector<std::pair<std::string, std::pair<std::string, Command>>>& commands() {
  static const std::vector<std::pair<std::string, std::pair<std::string, Command>>> c{
      {"simulate-walk",
       {"Run the walk and write snapshots", [](Session& s) { walk_probability(s, true); }}},
      {"simulate-continuum",
       {"Integrate the continuum limit and write snapshots", simulate_continuum}},
      {"converge", {"Walk-to-continuum convergence study", converge}},
      {"hadamard-demo", {"Fixed-angle walk against a jet-scaled control", hadamard}},
      {"kg-check", {"Klein-Gordon residual order study", kg}},
      {"gauge-check", {"Local transformation law of D(B)", gauge}},
      {"conservation-check", {"Probability conservation characterization", conservation}},
      {"variational-check",
       {"Variational and curvature conditions (both components)",
        [](Session& s) {
          variational(s, Null::minus);
          variational(s, Null::plus);
        }}},
      {"lagrangian-check", {"Lagrangian form comparison", lagrangian}},
      {"all-checks",
       {"Every check listed in the scenario",
        [](Session& s) {
          for (const auto& name : s.scenario().checks) run_named_check(s, name);
        }}},
  };
  return c;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Discrete-time quantum walk laboratory", "qwalk"};
  app.require_subcommand(1, 1);
  std::string config;
  std::string out_dir;
  bool quiet = false;
  std::map<const CLI::App*, const Command*> dispatch;
  for (const auto& [name, entry] : commands()) {
    CLI::App* sub = app.add_subcommand(name, entry.first);
    sub->add_option("--config", config, "Scenario file")->required();
    sub->add_option("--out", out_dir, "Output directory (overrides output.dir)");
    sub->add_flag("--quiet", quiet, "Only print PASS/FAIL lines");
    dispatch[sub] = &entry.second;
  }

  std::vector<std::string> rev(args.size() > 1 ? args.begin() + 1 : args.end(),
                               args.end());
  std::reverse(rev.begin(), rev.end());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    if (code == 0) return kExitPass;
    if (dynamic_cast<const CLI::ExtrasError*>(&e) || dynamic_cast<const CLI::RequiredError*>(&e)) {
      err << app.help();
    }
    return kExitConfigError;
  }

  const Command* cmd = nullptr;
  for (const auto& [sub, c] : dispatch) {
    if (sub->parsed()) cmd = c;
  }
  if (cmd == nullptr) {
    err << app.help();
    return kExitConfigError;
  }

  try {
    const Scenario s = load_scenario(config);
    const fs::path dir = out_dir.empty() ? s.output_dir : fs::path(out_dir);
    Session session(s, dir, out, quiet);
    try {
      (*cmd)(session);
    } catch (...) {
      session.flush_records();
      throw;
    }
    session.flush_records();
    return session.all_passed() ? kExitPass : kExitCheckFailed;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const ExprDomainError& e) {
    err << "domain error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const NumericalBlowup& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitCheckFailed;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitCheckFailed;
  }
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace qwalk::cli
