#include "qwalk/continuum.hpp"

#include <cmath>
#include <deque>
#include <ostream>
#include <string>

namespace qwalk {

namespace {

constexpr cplx kI{0.0, 1.0};

}  // namespace

void ContinuumGrid::validate(double speed) const {
  if (n_sites < 5) {
    throw std::invalid_argument("continuum grid: need at least 5 sites");
  }
  if (!(dx > 0.0) || !(dt > 0.0)) {
    throw std::invalid_argument("continuum grid: dx and dt must be positive");
  }
  if (speed * dt > dx * (1.0 + 1e-12)) {
    throw CflViolation("continuum grid: CFL violated, (lambda/tau)*dt = " +
                       std::to_string(speed * dt) + " > dx = " +
                       std::to_string(dx));
  }
}

ContinuumGrid make_continuum_grid(std::size_t n_sites, double dx, double x0,
                                  double t0, double speed, double cfl) {
  ContinuumGrid g;
  g.n_sites = n_sites;
  g.dx = dx;
  g.dt = cfl * dx / speed;
  g.t0 = t0;
  g.x0 = x0;
  g.validate(speed);
  return g;
}

NumericalBlowup::NumericalBlowup(double time, std::size_t step)
    : std::runtime_error("continuum integration produced a non-finite value at "
                         "t = " + std::to_string(time) + " (step " +
                         std::to_string(step) + ")"),
      time_(time) {}

Generator jet_generator(const WalkJet& jet) {
  jet.validate();
  Generator g;
  g.time_dependent = jet.theta_bar.depends_on_t() ||
                     jet.xi_bar.depends_on_t() || jet.zeta.depends_on_t();
  const double s = jet.coupling_sign();
  g.at = [jet, s](double t, double x) -> Mat2 {
    const double th = jet.theta_bar.eval(t, x);
    const double xi = jet.xi_bar.eval(t, x);
    const cplx ez = std::polar(1.0, jet.zeta.eval(t, x));
    return {cplx{-xi, 0.0}, -kI * s * th * ez, kI * s * th * std::conj(ez),
            cplx{xi, 0.0}};
  };
  return g;
}

namespace detail {

void central_diff4(const std::vector<cplx>& f, double dx,
                   std::vector<cplx>& out) {
  const std::size_t n = f.size();
  out.resize(n);
  const double inv = 1.0 / (12.0 * dx);
  auto stencil = [&](std::size_t i, std::size_t m2, std::size_t m1,
                     std::size_t p1, std::size_t p2) {
    out[i] = (f[m2] - f[p2] + 8.0 * (f[p1] - f[m1])) * inv;
  };
  if (n < 4) {
    for (std::size_t i = 0; i < n; ++i) {
      stencil(i, (i + 2 * n - 2) % n, (i + n - 1) % n, (i + 1) % n, (i + 2) % n);
    }
    return;
  }
  stencil(0, n - 2, n - 1, 1, 2);
  stencil(1, n - 1, 0, 2, 3);
  for (std::size_t i = 2; i + 2 < n; ++i) stencil(i, i - 2, i - 1, i + 1, i + 2);
  stencil(n - 2, n - 4, n - 3, n - 1, 0);
  stencil(n - 1, n - 3, n - 2, 0, 1);
}

}  // namespace detail

namespace {

void sample_generator(const Generator& gen, double t, const ContinuumGrid& grid,
                      std::vector<Mat2>& out) {
  out.resize(grid.n_sites);
  for (std::size_t i = 0; i < grid.n_sites; ++i) out[i] = gen.at(t, grid.x(i));
}

struct RhsWorkspace {
  std::vector<cplx> d_minus;
  std::vector<cplx> d_plus;
};

// out = (lambda sigma_3 d/dx f - i K f) / tau
void evaluate_rhs(const SpinorField& f, const std::vector<Mat2>& k,
                  const NullCoords& c, double dx, RhsWorkspace& ws,
                  SpinorField& out) {
  detail::central_diff4(f.minus, dx, ws.d_minus);
  detail::central_diff4(f.plus, dx, ws.d_plus);
  const std::size_t n = f.size();
  out.minus.resize(n);
  out.plus.resize(n);
  const double inv_tau = 1.0 / c.tau;
  for (std::size_t i = 0; i < n; ++i) {
    const Mat2& m = k[i];
    const cplx lo = f.minus[i];
    const cplx hi = f.plus[i];
    out.minus[i] = (c.lambda * ws.d_minus[i] - kI * (m[0] * lo + m[1] * hi)) * inv_tau;
    out.plus[i] = (-c.lambda * ws.d_plus[i] - kI * (m[2] * lo + m[3] * hi)) * inv_tau;
  }
}

void axpy_into(const SpinorField& base, double a, const SpinorField& k,
               SpinorField& out) {
  const std::size_t n = base.size();
  out.minus.resize(n);
  out.plus.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.minus[i] = base.minus[i] + a * k.minus[i];
    out.plus[i] = base.plus[i] + a * k.plus[i];
  }
}

}  // namespace

SpinorField dirac_rhs(const SpinorField& f, const WalkJet& jet, double t,
                      const ContinuumGrid& grid) {
  if (f.size() != grid.n_sites) {
    throw std::invalid_argument("dirac_rhs: field size does not match grid");
  }
  std::vector<Mat2> k;
  sample_generator(jet_generator(jet), t, grid, k);
  RhsWorkspace ws;
  SpinorField out(grid.n_sites, t);
  evaluate_rhs(f, k, NullCoords::of(jet), grid.dx, ws, out);
  return out;
}

double weighted_probability(const SpinorField& f, double dx) {
  return dx * total_probability(f);
}

ContinuumRun integrate_system(const SpinorField& init, const Generator& gen,
                              const NullCoords& coords,
                              const ContinuumGrid& grid, double t_final,
                              const IntegrationOptions& options) {
  grid.validate(coords.speed());
  if (init.size() != grid.n_sites || init.plus.size() != grid.n_sites) {
    throw std::invalid_argument("integrate: field size does not match grid");
  }
  const double span = t_final - grid.t0;
  if (span < -1e-12 * std::max(1.0, std::abs(grid.t0))) {
    throw std::invalid_argument("integrate: t_final precedes t0");
  }
  const std::size_t steps =
      span <= 0.0 ? 0
                  : static_cast<std::size_t>(std::ceil(span / grid.dt - 1e-9));
  const double h = steps == 0 ? 0.0 : span / static_cast<double>(steps);

  ContinuumRun run;
  run.dt_used = h;
  run.steps = steps;
  const double p0 = weighted_probability(init, grid.dx);

  SpinorField y = init;
  y.time = grid.t0;
  run.snapshots.push_back(y);
  run.drift.push_back(0.0);
  std::deque<SpinorField> tail;
  if (options.keep_tail > 0) tail.push_back(y);

  std::vector<Mat2> k_start;
  std::vector<Mat2> k_mid;
  std::vector<Mat2> k_end;
  sample_generator(gen, grid.t0, grid, k_start);
  if (!gen.time_dependent) {
    k_mid = k_start;
    k_end = k_start;
  }

  RhsWorkspace ws;
  const std::size_t n = grid.n_sites;
  SpinorField k1(n, 0.0), k2(n, 0.0), k3(n, 0.0), k4(n, 0.0), tmp(n, 0.0);

  for (std::size_t s = 1; s <= steps; ++s) {
    const double t = grid.t0 + static_cast<double>(s - 1) * h;
    if (gen.time_dependent) {
      sample_generator(gen, t + 0.5 * h, grid, k_mid);
      sample_generator(gen, t + h, grid, k_end);
    }
    evaluate_rhs(y, k_start, coords, grid.dx, ws, k1);
    axpy_into(y, 0.5 * h, k1, tmp);
    evaluate_rhs(tmp, k_mid, coords, grid.dx, ws, k2);
    axpy_into(y, 0.5 * h, k2, tmp);
    evaluate_rhs(tmp, k_mid, coords, grid.dx, ws, k3);
    axpy_into(y, h, k3, tmp);
    evaluate_rhs(tmp, k_end, coords, grid.dx, ws, k4);
    const double w = h / 6.0;
    for (std::size_t i = 0; i < n; ++i) {
      y.minus[i] += w * (k1.minus[i] + 2.0 * k2.minus[i] + 2.0 * k3.minus[i] +
                         k4.minus[i]);
      y.plus[i] += w * (k1.plus[i] + 2.0 * k2.plus[i] + 2.0 * k3.plus[i] +
                        k4.plus[i]);
    }
    y.time = grid.t0 + static_cast<double>(s) * h;
    if (gen.time_dependent) std::swap(k_start, k_end);

    const double p = weighted_probability(y, grid.dx);
    if (!std::isfinite(p)) throw NumericalBlowup(y.time, s);
    const double d = std::abs(p - p0);
    run.max_drift = std::max(run.max_drift, d);

    if ((options.snapshot_every > 0 && s % options.snapshot_every == 0) ||
        s == steps) {
      run.snapshots.push_back(y);
      run.drift.push_back(d);
    }
    if (options.keep_tail > 0) {
      tail.push_back(y);
      if (tail.size() > options.keep_tail) tail.pop_front();
    }
  }
  run.tail.assign(tail.begin(), tail.end());
  return run;
}

ContinuumRun integrate_dirac(const SpinorField& init, const WalkJet& jet,
                             const ContinuumGrid& grid, double t_final,
                             const IntegrationOptions& options) {
  return integrate_system(init, jet_generator(jet), NullCoords::of(jet), grid,
                          t_final, options);
}

LocalDerivatives differentiate(const std::function<double(double, double)>& f,
                               double t, double x, double h) {
  LocalDerivatives d;
  d.value = f(t, x);
  const double tp = f(t + h, x);
  const double tm = f(t - h, x);
  const double xp = f(t, x + h);
  const double xm = f(t, x - h);
  d.d_t = (tp - tm) / (2.0 * h);
  d.d_x = (xp - xm) / (2.0 * h);
  d.d_tt = (tp - 2.0 * d.value + tm) / (h * h);
  d.d_xx = (xp - 2.0 * d.value + xm) / (h * h);
  return d;
}

LocalDerivatives differentiate(const Expr& field, double t, double x, double h) {
  return differentiate(
      [&field](double tt, double xx) { return field.eval(tt, xx); }, t, x, h);
}

KgResidual kg_residual(const std::array<SpinorField, 3>& window,
                       const WalkJet& jet, const ContinuumGrid& grid,
                       double theta_min) {
  const std::size_t n = grid.n_sites;
  for (const auto& s : window) {
    if (s.size() != n) {
      throw std::invalid_argument("kg_residual: snapshot size does not match grid");
    }
  }
  const double dt = window[1].time - window[0].time;
  const double dt2 = window[2].time - window[1].time;
  if (!(dt > 0.0) || std::abs(dt2 - dt) > 1e-9 * dt) {
    throw std::invalid_argument("kg_residual: snapshots are not equally spaced");
  }
  const NullCoords c = NullCoords::of(jet);
  const double h = grid.dx;
  const double t = window[1].time;

  KgResidual r;
  r.time = t;
  r.minus.assign(n, cplx{});
  r.plus.assign(n, cplx{});
  r.masked.assign(n, 0);

  const auto& prev = window[0];
  const auto& mid = window[1];
  const auto& next = window[2];
  const double tau2 = c.tau * c.tau;
  const double lam2 = c.lambda * c.lambda;

  for (std::size_t i = 0; i < n; ++i) {
    const double x = grid.x(i);
    const LocalDerivatives th = differentiate(jet.theta_bar, t, x, h);
    if (std::abs(th.value) < theta_min) {
      r.masked[i] = 1;
      ++r.masked_count;
      continue;
    }
    const LocalDerivatives xi = differentiate(jet.xi_bar, t, x, h);
    const LocalDerivatives ze = differentiate(jet.zeta, t, x, h);
    const std::size_t ip = i + 1 == n ? 0 : i + 1;
    const std::size_t im = i == 0 ? n - 1 : i - 1;

    // d(ln theta_bar) = d theta_bar / theta_bar
    const double dm_ln = th.d_minus(c) / th.value;
    const double dp_ln = th.d_plus(c) / th.value;
    const double xb = xi.value;
    const double th2 = th.value * th.value;

    auto operators = [&](const std::vector<cplx> SpinorField::*comp) {
      const cplx f0 = (mid.*comp)[i];
      const cplx ft = ((next.*comp)[i] - (prev.*comp)[i]) / (2.0 * dt);
      const cplx ftt = ((next.*comp)[i] - 2.0 * f0 + (prev.*comp)[i]) / (dt * dt);
      const cplx fx = ((mid.*comp)[ip] - (mid.*comp)[im]) / (2.0 * grid.dx);
      const cplx fxx =
          ((mid.*comp)[ip] - 2.0 * f0 + (mid.*comp)[im]) / (grid.dx * grid.dx);
      struct Ops {
        cplx value, d_minus, d_plus, box;
      };
      return Ops{f0, c.tau * ft - c.lambda * fx, c.tau * ft + c.lambda * fx,
                 tau2 * ftt - lam2 * fxx};
    };

    {
      const auto o = operators(&SpinorField::minus);
      const cplx dp_log = dp_ln + kI * ze.d_plus(c);  // d+(ln theta + i zeta)
      const cplx rhs = (dp_log - kI * xb) * o.d_minus + kI * xb * o.d_plus -
                       (th2 + xb * xb + kI * xb * dp_log - kI * xi.d_plus(c)) *
                           o.value;
      r.minus[i] = o.box - rhs;
    }
    {
      const auto o = operators(&SpinorField::plus);
      const cplx dm_log = dm_ln - kI * ze.d_minus(c);       // d-(ln theta - i zeta)
      const cplx dm_neg = -dm_ln + kI * ze.d_minus(c);      // d-(-ln theta + i zeta)
      const cplx rhs = -kI * xb * o.d_minus + (dm_log + kI * xb) * o.d_plus -
                       (th2 + xb * xb + kI * xb * dm_neg + kI * xi.d_minus(c)) *
                           o.value;
      r.plus[i] = o.box - rhs;
    }
    r.max_minus = std::max(r.max_minus, std::abs(r.minus[i]));
    r.max_plus = std::max(r.max_plus, std::abs(r.plus[i]));
  }
  return r;
}

void write_residual_csv(std::ostream& os, const KgResidual& r,
                        const ContinuumGrid& grid) {
  os << "t,x,abs_residual_minus,abs_residual_plus,masked\n";
  const std::string t = format_double(r.time);
  for (std::size_t i = 0; i < r.minus.size(); ++i) {
    os << t << ',' << format_double(grid.x(i)) << ','
       << format_double(std::abs(r.minus[i])) << ','
       << format_double(std::abs(r.plus[i])) << ',' << int(r.masked[i]) << '\n';
  }
}

}  // namespace qwalk
