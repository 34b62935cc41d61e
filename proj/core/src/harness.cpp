#include "qwalk/harness.hpp"

#include <algorithm>
#include <array>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <tuple>

#include "qwalk/dqw.hpp"

namespace qwalk {

std::string to_string(Reference r) {
  return r == Reference::analytic ? "analytic" : "fine_continuum";
}

EpsilonLadder EpsilonLadder::standard() {
  EpsilonLadder l;
  l.eps = {0.02, 0.01, 0.005, 0.0025, 0.00125};
  return l;
}

EpsilonLadder EpsilonLadder::fixed_coin_default() {
  EpsilonLadder l;
  for (double j : {50.0, 101.0, 203.0, 405.0, 811.0}) l.eps.push_back(1.0 / j);
  return l;
}

std::vector<std::size_t> EpsilonLadder::steps(double tau) const {
  if (eps.empty()) throw std::invalid_argument("ladder: no rungs");
  if (!(t_physical > 0.0)) throw std::invalid_argument("ladder: t_physical must be > 0");
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (!(eps[i] > 0.0)) throw std::invalid_argument("ladder: eps must be > 0");
    if (i > 0 && !(eps[i] < eps[i - 1])) {
      throw std::invalid_argument("ladder: eps must be strictly decreasing");
    }
    const double j = t_physical / (tau * eps[i]);
    const double r = std::round(j);
    if (r < 1.0 || std::abs(j - r) > 1e-9 * std::max(1.0, r)) {
      throw std::invalid_argument("ladder: t_physical is not a whole number of "
                                  "steps at eps = " + format_double(eps[i]));
    }
    out.push_back(static_cast<std::size_t>(r));
  }
  return out;
}

std::size_t StudyDomain::sites(double dx) const {
  const double n = length / dx;
  const double r = std::round(n);
  if (r < 2.0 || std::abs(n - r) > 1e-8 * r) {
    throw std::invalid_argument("domain: length " + format_double(length) +
                                " is not a whole number of steps dx = " +
                                format_double(dx));
  }
  return static_cast<std::size_t>(r);
}

double StudyDomain::wrap(double x) const {
  double y = std::fmod(x - x0, length);
  if (y < 0.0) y += length;
  return x0 + y;
}

double observed_order(double e1, double e2, double h1, double h2) {
  return std::log(e1 / e2) / std::log(h1 / h2);
}

std::vector<double> pairwise_orders(const std::vector<double>& h,
                                    const std::vector<double>& e) {
  std::vector<double> q;
  for (std::size_t i = 0; i + 1 < std::min(h.size(), e.size()); ++i) {
    q.push_back(observed_order(e[i], e[i + 1], h[i], h[i + 1]));
  }
  return q;
}

double median(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

void ConvergenceReport::finalize() {
  orders = pairwise_orders(h, errors);
  median_order = median(orders);
}

std::vector<double> ConvergenceReport::tail_orders(std::size_t rungs) const {
  if (rungs < 2 || orders.empty()) return {};
  const std::size_t k = std::min(rungs - 1, orders.size());
  return {orders.end() - static_cast<std::ptrdiff_t>(k), orders.end()};
}

bool ConvergenceReport::tail_in_band(double lo, double hi, std::size_t rungs) const {
  const auto q = tail_orders(rungs);
  if (q.empty()) return false;
  return std::all_of(q.begin(), q.end(),
                     [&](double v) { return v >= lo && v <= hi; });
}

bool ConvergenceReport::tail_at_least(double lo, std::size_t rungs) const {
  const auto q = tail_orders(rungs);
  if (q.empty()) return false;
  return std::all_of(q.begin(), q.end(), [&](double v) { return v >= lo; });
}

bool has_transport_reference(const WalkJet& jet) {
  return jet.theta_bar.is_constant() && jet.theta_bar.eval(0.0, 0.0) == 0.0;
}

SpinorField transport_reference(
    const WalkJet& jet,
    const std::function<std::pair<cplx, cplx>(double)>& psi0, double t,
    const StudyDomain& domain, double dx) {
  using boost::math::quadrature::gauss;
  const std::size_t n = domain.sites(dx);
  const double c = jet.speed();
  const double tau = jet.tau;
  const Expr xi = jet.xi_bar;
  SpinorField out(n, t);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = domain.x0 + static_cast<double>(i) * dx;
    double ph_minus = 0.0;
    double ph_plus = 0.0;
    if (t > 0.0) {
      ph_minus = gauss<double, 30>::integrate(
          [&](double s) { return xi.eval(s, x + c * (t - s)); }, 0.0, t);
      ph_plus = gauss<double, 30>::integrate(
          [&](double s) { return xi.eval(s, x - c * (t - s)); }, 0.0, t);
    }
    const cplx lo = psi0(domain.wrap(x + c * t)).first;
    const cplx hi = psi0(domain.wrap(x - c * t)).second;
    out.minus[i] = lo * std::polar(1.0, ph_minus / tau);
    out.plus[i] = hi * std::polar(1.0, -ph_plus / tau);
  }
  return out;
}

namespace {

// sqrt(w * sum over sites of the given parity)
double sublattice_distance(const SpinorField& a, const SpinorField& b,
                           double weight, std::size_t parity) {
  double sum = 0.0;
  for (std::size_t m = parity; m < a.size(); m += 2) {
    sum += std::norm(a.minus[m] - b.minus[m]) + std::norm(a.plus[m] - b.plus[m]);
  }
  return std::sqrt(weight * sum);
}

SpinorField restrict_every(const SpinorField& f, std::size_t stride,
                           std::size_t n) {
  SpinorField out(n, f.time);
  for (std::size_t m = 0; m < n; ++m) {
    out.minus[m] = f.minus[m * stride];
    out.plus[m] = f.plus[m * stride];
  }
  return out;
}

std::size_t integer_ratio(double a, double b) {
  const double r = a / b;
  const double k = std::round(r);
  if (k < 1.0 || std::abs(r - k) > 1e-8 * k) {
    throw std::invalid_argument(
        "ladder: reference grid is not commensurate with every rung");
  }
  return static_cast<std::size_t>(k);
}

// Walk amplitudes divided by sqrt(dx): comparable with a continuum density.
SpinorField density_amplitude(const SpinorField& f, double dx) {
  return scaled(f, 1.0 / std::sqrt(dx));
}

}  // namespace

ContinuumGrid domain_grid(const StudyDomain& d, std::size_t n, double speed,
                          double cfl) {
  return make_continuum_grid(n, d.length / static_cast<double>(n), d.x0, 0.0,
                             speed, cfl);
}

SpinorField sample_point_field(const PointField& f, const ContinuumGrid& grid,
                               double t) {
  SpinorField out(grid.n_sites, t);
  for (std::size_t i = 0; i < grid.n_sites; ++i) {
    std::tie(out.minus[i], out.plus[i]) = f(grid.x(i));
  }
  return out;
}

ConvergenceReport convergence_study(const WalkJet& jet,
                                    const EpsilonLadder& ladder,
                                    const InitialProfile& profile,
                                    const StudyDomain& domain) {
  jet.validate();
  if (!jet.unit_scaling()) {
    throw std::invalid_argument(
        "convergence_study: continuum comparison needs alpha = beta = delta = 1");
  }
  profile.validate();
  const std::vector<std::size_t> steps = ladder.steps(jet.tau);
  const double t = ladder.t_physical;
  const bool analytic = ladder.reference == Reference::analytic;
  if (analytic && !has_transport_reference(jet)) {
    throw std::invalid_argument(
        "convergence_study: analytic reference needs theta_bar = 0");
  }

  ConvergenceReport rep;
  rep.label = "walk_vs_continuum";
  rep.reference = to_string(ladder.reference);

  SpinorField fine;
  double dx_fine = 0.0;
  if (!analytic) {
    dx_fine = jet.lambda * ladder.eps.back() / 4.0;
    const std::size_t n = domain.sites(dx_fine);
    const ContinuumGrid g =
        make_continuum_grid(n, dx_fine, domain.x0, 0.0, jet.speed(), 0.5);
    SpinorField init(n, 0.0);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      std::tie(init.minus[i], init.plus[i]) = profile.value(g.x(i));
      sum += std::norm(init.minus[i]) + std::norm(init.plus[i]);
    }
    init = scaled(init, 1.0 / std::sqrt(dx_fine * sum));
    fine = integrate_dirac(init, jet, g, t).snapshots.back();
  }

  for (std::size_t r = 0; r < ladder.eps.size(); ++r) {
    const double eps = ladder.eps[r];
    const double dx = jet.lambda * eps;
    const std::size_t n = domain.sites(dx);
    auto [walk, grid] = instantiate_walk(jet, eps, n, 0.0, domain.x0, steps[r]);
    const SpinorField init = sample_initial(profile, grid);
    const WalkRun run = run_walk(init, walk, grid, steps[r], 0);
    const SpinorField got = density_amplitude(run.snapshots.back(), dx);

    SpinorField ref;
    if (analytic) {
      const double s = normalization_scale(profile, grid) / std::sqrt(dx);
      ref = transport_reference(
          jet,
          [&](double x) {
            const auto [lo, hi] = profile.value(x);
            return std::pair<cplx, cplx>{s * lo, s * hi};
          },
          t, domain, dx);
    } else {
      ref = restrict_every(fine, integer_ratio(dx, dx_fine), n);
    }
    rep.h.push_back(eps);
    rep.errors.push_back(l2_distance(got, ref, dx));
    rep.even_errors.push_back(sublattice_distance(got, ref, 2.0 * dx, 0));
    rep.odd_errors.push_back(sublattice_distance(got, ref, 2.0 * dx, 1));
    rep.walk_drift.push_back(run.max_step_drift);
  }
  rep.finalize();
  return rep;
}

bool HadamardReport::passed() const {
  return !insufficient_rungs && min_fixed > factor * control_last;
}

namespace {

// Coarse field sampled at the nearest coarse site of every fine site.
SpinorField nearest_site(const SpinorField& coarse, double dx_coarse,
                         std::size_t n_fine, double dx_fine) {
  SpinorField out(n_fine, coarse.time);
  const std::size_t nc = coarse.size();
  for (std::size_t i = 0; i < n_fine; ++i) {
    const double pos = static_cast<double>(i) * dx_fine / dx_coarse;
    const std::size_t k = static_cast<std::size_t>(std::llround(pos)) % nc;
    out.minus[i] = coarse.minus[k];
    out.plus[i] = coarse.plus[k];
  }
  return out;
}

std::vector<double> cauchy_distances(const std::vector<SpinorField>& fields,
                                     const std::vector<double>& dx) {
  std::vector<double> d;
  for (std::size_t i = 0; i + 1 < fields.size(); ++i) {
    const SpinorField c =
        nearest_site(fields[i], dx[i], fields[i + 1].size(), dx[i + 1]);
    d.push_back(l2_distance(c, fields[i + 1], dx[i + 1]));
  }
  return d;
}

}  // namespace

HadamardReport hadamard_nolimit_demo(const EpsilonLadder& ladder,
                                     const InitialProfile& profile,
                                     const StudyDomain& domain, double factor) {
  profile.validate();
  const std::vector<std::size_t> steps = ladder.steps(1.0);
  HadamardReport rep;
  rep.eps = ladder.eps;
  rep.factor = factor;

  WalkJet control;
  control.theta_bar = Expr::constant(std::numbers::pi / 4.0);

  std::vector<SpinorField> fixed_fields;
  std::vector<SpinorField> control_fields;
  std::vector<double> dxs;
  for (std::size_t r = 0; r < ladder.eps.size(); ++r) {
    const double eps = ladder.eps[r];
    const std::size_t n = domain.sites(eps);
    auto [cw, grid] = instantiate_walk(control, eps, n, 0.0, domain.x0, steps[r]);
    const SpinorField init = sample_initial(profile, grid);
    control_fields.push_back(density_amplitude(
        run_walk(init, cw, grid, steps[r], 0).snapshots.back(), eps));

    const ConcreteWalk hw = ConcreteWalk::fixed_angles(
        Expr::constant(std::numbers::pi / 4.0), Expr::constant(0.0),
        Expr::constant(0.0), eps, eps);
    fixed_fields.push_back(density_amplitude(
        run_walk(init, hw, grid, steps[r], 0).snapshots.back(), eps));
    dxs.push_back(eps);
  }
  if (ladder.eps.size() < 2) {
    rep.insufficient_rungs = true;
    return rep;
  }
  rep.fixed_distances = cauchy_distances(fixed_fields, dxs);
  rep.control_distances = cauchy_distances(control_fields, dxs);
  rep.min_fixed = *std::min_element(rep.fixed_distances.begin(),
                                    rep.fixed_distances.end());
  rep.control_last = rep.control_distances.back();
  return rep;
}

ConvergenceReport kg_order_study(const WalkJet& jet, const PointField& init,
                                 const GridLadder& grids, double theta_min) {
  ConvergenceReport rep;
  rep.label = "kg_residual";
  for (std::size_t n : grids.n_sites) {
    const ContinuumGrid g = domain_grid(grids.domain, n, jet.speed(), grids.cfl);
    IntegrationOptions opt;
    opt.keep_tail = 3;
    const ContinuumRun run =
        integrate_dirac(sample_point_field(init, g, 0.0), jet, g, grids.t_final, opt);
    if (run.tail.size() < 3) {
      throw std::invalid_argument("kg_order_study: fewer than two time steps");
    }
    const std::array<SpinorField, 3> w{run.tail[0], run.tail[1], run.tail[2]};
    rep.h.push_back(g.dx);
    rep.errors.push_back(kg_residual(w, jet, g, theta_min).max_abs());
  }
  rep.finalize();
  return rep;
}

std::pair<ConvergenceReport, ConvergenceReport> gauge_order_study(
    const GaugeConnection& b, int j, const GaugeConnection::Field& alpha,
    const SpaceTimeField& psi, const NullCoords& coords,
    const GridLadder& grids) {
  ConvergenceReport via;
  ConvergenceReport direct;
  via.label = "gauge_identity";
  direct.label = "gauge_identity_direct";
  for (std::size_t n : grids.n_sites) {
    const ContinuumGrid g = domain_grid(grids.domain, n, coords.speed(), grids.cfl);
    const Window w = sample_window(psi, 0.5 * grids.t_final, g.dx, g);
    const GaugeIdentityReport r = gauge_identity_check(b, j, alpha, w, coords, g);
    via.h.push_back(g.dx);
    via.errors.push_back(r.max_error);
    direct.h.push_back(g.dx);
    direct.errors.push_back(r.direct_form_error);
  }
  via.finalize();
  direct.finalize();
  return {via, direct};
}

std::pair<ConvergenceReport, VariationalReport> variational_order_study(
    const WalkJet& jet, Null side, const GridLadder& grids) {
  ConvergenceReport rep;
  rep.label = "curvature_" + to_string(side);
  VariationalReport last;
  const std::vector<double> times{0.0, 0.5 * grids.t_final, grids.t_final};
  for (std::size_t n : grids.n_sites) {
    const ContinuumGrid g = domain_grid(grids.domain, n, jet.speed(), grids.cfl);
    last = variational_check(jet, g, times, side, g.dx);
    rep.h.push_back(g.dx);
    rep.errors.push_back(last.curvature_max);
  }
  rep.finalize();
  return {rep, last};
}

LagrangianStudy lagrangian_study(const WalkJet& jet, const PointField& init,
                                 const SpaceTimeField& test_field,
                                 const GridLadder& grids) {
  LagrangianStudy out;
  out.on_shell.label = "lagrangian_on_shell";
  const GaugeConnection b = connection_from_jet(jet);
  const NullCoords c = NullCoords::of(jet);
  for (std::size_t n : grids.n_sites) {
    const ContinuumGrid g = domain_grid(grids.domain, n, jet.speed(), grids.cfl);
    IntegrationOptions opt;
    opt.keep_tail = 3;
    const ContinuumRun run =
        integrate_dirac(sample_point_field(init, g, 0.0), jet, g, grids.t_final, opt);
    const LagrangianReport on =
        lagrangian_density(window_from_tail(run.tail), b, jet, c, g);
    out.on_shell.h.push_back(g.dx);
    out.on_shell.errors.push_back(on.max_density);
    const Window w = sample_window(test_field, 0.5 * grids.t_final, g.dx, g);
    out.off_shell.push_back(lagrangian_density(w, b, jet, c, g));
    out.h.push_back(g.dx);
  }
  out.on_shell.finalize();
  return out;
}

}  // namespace qwalk
