#include "qwalk/symmetry.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <tuple>

namespace qwalk {

namespace {
constexpr cplx kI{0.0, 1.0};

void check_generator_index(int j) {
  if (j < 1 || j > 3) throw std::invalid_argument("generator index must be 1, 2 or 3");
}
}  // namespace

namespace pauli {

const Mat2& sigma(int j) {
  check_generator_index(j);
  static const std::array<const Mat2*, 3> all{&sigma1, &sigma2, &sigma3};
  return *all[j - 1];
}

Mat2 mul(const Mat2& a, const Mat2& b) {
  return {a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3],
          a[2] * b[0] + a[3] * b[2], a[2] * b[1] + a[3] * b[3]};
}

Mat2 add(const Mat2& a, const Mat2& b) {
  return {a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]};
}

Mat2 scale(cplx s, const Mat2& a) { return {s * a[0], s * a[1], s * a[2], s * a[3]}; }

Mat2 exp_i_sigma(int j, double a) {
  return add(scale(std::cos(a), identity), scale(kI * std::sin(a), sigma(j)));
}

double max_abs_diff(const Mat2& a, const Mat2& b) {
  double m = 0.0;
  for (int k = 0; k < 4; ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

std::pair<cplx, cplx> apply(const Mat2& m, cplx lo, cplx hi) {
  return {m[0] * lo + m[1] * hi, m[2] * lo + m[3] * hi};
}

}  // namespace pauli

GaugeConnection::GaugeConnection() {
  for (auto& row : b) {
    for (auto& f : row) f = [](double, double) { return 0.0; };
  }
}

Mat2 GaugeConnection::matrix(double t, double x) const {
  const double b1m = b[0][0](t, x), b1p = b[0][1](t, x);
  const double b2m = b[1][0](t, x), b2p = b[1][1](t, x);
  const double b3m = b[2][0](t, x), b3p = b[2][1](t, x);
  // row 0 from the minus fields, row 1 from the plus fields
  return {cplx{b3m, 0.0}, cplx{b1m, -b2m}, cplx{b1p, b2p}, cplx{-b3p, 0.0}};
}

Generator GaugeConnection::generator(bool time_dependent) const {
  Generator g;
  g.time_dependent = time_dependent;
  GaugeConnection copy = *this;
  g.at = [copy](double t, double x) { return copy.matrix(t, x); };
  return g;
}

ConnectionSlice ConnectionSlice::sample(const GaugeConnection& c, double t,
                                        const ContinuumGrid& grid) {
  ConnectionSlice s;
  s.time = t;
  for (int j = 0; j < 3; ++j) {
    for (int mu = 0; mu < 2; ++mu) {
      auto& v = s.b[j][mu];
      v.resize(grid.n_sites);
      for (std::size_t i = 0; i < grid.n_sites; ++i) v[i] = c.b[j][mu](t, grid.x(i));
    }
  }
  return s;
}

bool ConnectionSlice::all_finite() const {
  for (const auto& row : b) {
    for (const auto& v : row) {
      for (double d : v) {
        if (!std::isfinite(d)) return false;
      }
    }
  }
  return true;
}

GaugeConnection connection_from_jet(const WalkJet& jet) {
  jet.validate();
  const double s = jet.coupling_sign();
  const Expr th = jet.theta_bar;
  const Expr xi = jet.xi_bar;
  const Expr ze = jet.zeta;
  GaugeConnection c;
  GaugeConnection::Field b1 = [=](double t, double x) {
    return s * th.eval(t, x) * std::sin(ze.eval(t, x));
  };
  GaugeConnection::Field b2 = [=](double t, double x) {
    return s * th.eval(t, x) * std::cos(ze.eval(t, x));
  };
  GaugeConnection::Field b3 = [=](double t, double x) { return -xi.eval(t, x); };
  c.b[0] = {b1, b1};
  c.b[1] = {b2, b2};
  c.b[2] = {b3, b3};
  return c;
}

void Window::validate(std::size_t n_sites) const {
  for (const auto& s : slices) {
    if (s.size() != n_sites || s.plus.size() != n_sites) {
      throw std::invalid_argument("window: slice size does not match grid");
    }
  }
  const double a = slices[1].time - slices[0].time;
  const double b = slices[2].time - slices[1].time;
  if (!(a > 0.0) || std::abs(a - b) > 1e-9 * a) {
    throw std::invalid_argument("window: slices are not equally spaced");
  }
}

Window sample_window(
    const std::function<std::pair<cplx, cplx>(double, double)>& psi, double t,
    double dt, const ContinuumGrid& grid) {
  Window w;
  for (int k = 0; k < 3; ++k) {
    const double tk = t + (k - 1) * dt;
    SpinorField f(grid.n_sites, tk);
    for (std::size_t i = 0; i < grid.n_sites; ++i) {
      const auto [lo, hi] = psi(tk, grid.x(i));
      f.minus[i] = lo;
      f.plus[i] = hi;
    }
    w.slices[k] = std::move(f);
  }
  return w;
}

Window window_from_tail(const std::vector<SpinorField>& tail) {
  if (tail.size() < 3) throw std::invalid_argument("window: need three states");
  Window w;
  const std::size_t n = tail.size();
  w.slices = {tail[n - 3], tail[n - 2], tail[n - 1]};
  return w;
}

namespace {

// Window with every slice multiplied pointwise by f(t, x) (real) or by a
// constant matrix.
Window modulate(const Window& w, const std::function<double(double, double)>& f,
                const ContinuumGrid& grid) {
  Window out = w;
  for (auto& s : out.slices) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double v = f(s.time, grid.x(i));
      s.minus[i] *= v;
      s.plus[i] *= v;
    }
  }
  return out;
}

Window left_multiply(const Window& w, const Mat2& m) {
  Window out = w;
  for (auto& s : out.slices) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      std::tie(s.minus[i], s.plus[i]) = pauli::apply(m, s.minus[i], s.plus[i]);
    }
  }
  return out;
}

SpinorField left_multiply(const SpinorField& f, const Mat2& m) {
  SpinorField out = f;
  for (std::size_t i = 0; i < f.size(); ++i) {
    std::tie(out.minus[i], out.plus[i]) = pauli::apply(m, f.minus[i], f.plus[i]);
  }
  return out;
}

double max_norm_diff(const SpinorField& a, const SpinorField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m = std::max({m, std::abs(a.minus[i] - b.minus[i]),
                  std::abs(a.plus[i] - b.plus[i])});
  }
  return m;
}

struct NullDerivs {
  std::vector<cplx> dm_minus, dp_plus;  // d- psi-, d+ psi+
  std::vector<cplx> dp_minus, dm_plus;  // d+ psi-, d- psi+
};

NullDerivs null_derivatives(const Window& w, const NullCoords& c,
                            const ContinuumGrid& grid) {
  const std::size_t n = grid.n_sites;
  const double dt = w.spacing();
  const auto& prev = w.slices[0];
  const auto& mid = w.slices[1];
  const auto& next = w.slices[2];
  NullDerivs d;
  d.dm_minus.resize(n);
  d.dp_plus.resize(n);
  d.dp_minus.resize(n);
  d.dm_plus.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t ip = i + 1 == n ? 0 : i + 1;
    const std::size_t im = i == 0 ? n - 1 : i - 1;
    const cplx tl = c.tau * (next.minus[i] - prev.minus[i]) / (2.0 * dt);
    const cplx xl = c.lambda * (mid.minus[ip] - mid.minus[im]) / (2.0 * grid.dx);
    const cplx th = c.tau * (next.plus[i] - prev.plus[i]) / (2.0 * dt);
    const cplx xh = c.lambda * (mid.plus[ip] - mid.plus[im]) / (2.0 * grid.dx);
    d.dm_minus[i] = tl - xl;
    d.dp_minus[i] = tl + xl;
    d.dm_plus[i] = th - xh;
    d.dp_plus[i] = th + xh;
  }
  return d;
}

}  // namespace

SpinorField apply_DB(const GaugeConnection& b, const Window& w,
                     const NullCoords& coords, const ContinuumGrid& grid) {
  w.validate(grid.n_sites);
  const NullDerivs d = null_derivatives(w, coords, grid);
  const auto& mid = w.slices[1];
  SpinorField out(grid.n_sites, mid.time);
  for (std::size_t i = 0; i < grid.n_sites; ++i) {
    const Mat2 k = b.matrix(mid.time, grid.x(i));
    const auto [klo, khi] = pauli::apply(k, mid.minus[i], mid.plus[i]);
    out.minus[i] = d.dm_minus[i] + kI * klo;
    out.plus[i] = d.dp_plus[i] + kI * khi;
  }
  return out;
}

GaugeConnection gauge_transform(const GaugeConnection& b, int j,
                                const GaugeConnection::Field& alpha,
                                const NullCoords& coords, double h) {
  check_generator_index(j);
  if (!(h > 0.0)) throw std::invalid_argument("gauge_transform: h must be > 0");
  GaugeConnection out = b;
  for (int mu = 0; mu < 2; ++mu) {
    const GaugeConnection::Field old = b.b[j - 1][mu];
    const Null dir = static_cast<Null>(mu);
    out.b[j - 1][mu] = [old, alpha, coords, h, dir](double t, double x) {
      const LocalDerivatives a = differentiate(alpha, t, x, h);
      const double da = dir == Null::minus ? a.d_minus(coords) : a.d_plus(coords);
      return old(t, x) + da;
    };
  }
  return out;
}

GaugeConnection gauge_transform(const GaugeConnection& b, int j,
                                const Expr& alpha, const NullCoords& coords,
                                double h) {
  return gauge_transform(
      b, j, [alpha](double t, double x) { return alpha.eval(t, x); }, coords, h);
}

GaugeIdentityReport gauge_identity_check(const GaugeConnection& b, int j,
                                         const GaugeConnection::Field& alpha,
                                         const Window& w,
                                         const NullCoords& coords,
                                         const ContinuumGrid& grid) {
  check_generator_index(j);
  w.validate(grid.n_sites);
  const double h = w.spacing();

  const Window wc = modulate(
      w, [&](double t, double x) { return std::cos(alpha(t, x)); }, grid);
  const Window ws = modulate(
      w, [&](double t, double x) { return std::sin(alpha(t, x)); }, grid);
  const SpinorField dc = apply_DB(b, wc, coords, grid);
  const SpinorField ds = left_multiply(apply_DB(b, ws, coords, grid),
                                       pauli::scale(kI, pauli::sigma(j)));
  const double t = w.time();
  SpinorField lhs(grid.n_sites, t);
  for (std::size_t i = 0; i < grid.n_sites; ++i) {
    const Mat2 rot = pauli::exp_i_sigma(j, -alpha(t, grid.x(i)));
    std::tie(lhs.minus[i], lhs.plus[i]) =
        pauli::apply(rot, dc.minus[i] + ds.minus[i], dc.plus[i] + ds.plus[i]);
  }

  GaugeIdentityReport r;
  r.j = j;
  const GaugeConnection bt = gauge_transform(b, j, alpha, coords, h);
  r.max_error = max_norm_diff(lhs, apply_DB(bt, w, coords, grid));

  // D(B) Psi + i sigma_j (Gamma^mu d_mu alpha) Psi
  const SpinorField base = apply_DB(b, w, coords, grid);
  const auto& mid = w.slices[1];
  SpinorField direct(grid.n_sites, t);
  for (std::size_t i = 0; i < grid.n_sites; ++i) {
    const LocalDerivatives a = differentiate(alpha, t, grid.x(i), h);
    const Mat2 g = pauli::add(pauli::scale(a.d_minus(coords), pauli::gamma_minus),
                              pauli::scale(a.d_plus(coords), pauli::gamma_plus));
    const Mat2 m = pauli::scale(kI, pauli::mul(pauli::sigma(j), g));
    const auto [lo, hi] = pauli::apply(m, mid.minus[i], mid.plus[i]);
    direct.minus[i] = base.minus[i] + lo;
    direct.plus[i] = base.plus[i] + hi;
  }
  r.direct_form_error = max_norm_diff(lhs, direct);
  return r;
}

ProbabilityFormReport probability_form_check(const GaugeConnection& b,
                                             const ContinuumGrid& grid,
                                             const std::vector<double>& times,
                                             double tol) {
  ProbabilityFormReport r;
  for (double t : times) {
    for (std::size_t i = 0; i < grid.n_sites; ++i) {
      const double x = grid.x(i);
      const double v1 = std::abs(b.b[0][0](t, x) - b.b[0][1](t, x));
      const double v2 = std::abs(b.b[1][0](t, x) - b.b[1][1](t, x));
      const double v = std::max(v1, v2);
      r.sigma3_split =
          std::max(r.sigma3_split, std::abs(b.b[2][0](t, x) - b.b[2][1](t, x)));
      if (!std::isfinite(v)) {
        r.max_violation = std::numeric_limits<double>::infinity();
      } else {
        r.max_violation = std::max(r.max_violation, v);
      }
    }
  }
  r.conserving = r.max_violation <= tol;
  return r;
}

double dynamic_probability_drift(const GaugeConnection& b,
                                 const SpinorField& init,
                                 const NullCoords& coords,
                                 const ContinuumGrid& grid, double t_final) {
  const ContinuumRun run =
      integrate_system(init, b.generator(true), coords, grid, t_final);
  return run.max_drift;
}

PhaseFix phase_fix(const GaugeConnection& b, const NullCoords& coords,
                   double t0, double h) {
  using boost::math::quadrature::gauss;
  const GaugeConnection::Field b3m = b.b[2][0];
  const GaugeConnection::Field b3p = b.b[2][1];
  const double tau = coords.tau;
  GaugeConnection::Field phi = [=](double t, double x) {
    if (t == t0) return 0.0;
    const double integral = gauss<double, 30>::integrate(
        [&](double s) { return b3p(s, x) - b3m(s, x); }, t0, t);
    return integral / (2.0 * tau);
  };
  PhaseFix out;
  out.phi = phi;
  out.connection = b;
  const double lambda = coords.lambda;
  GaugeConnection::Field b3 = [=](double t, double x) {
    const double dphi_dx = (phi(t, x + h) - phi(t, x - h)) / (2.0 * h);
    return 0.5 * (b3m(t, x) + b3p(t, x)) - lambda * dphi_dx;
  };
  out.connection.b[2] = {b3, b3};
  return out;
}

double commutator_norm(const GaugeConnection& b, int j, const Window& w,
                       const NullCoords& coords, const ContinuumGrid& grid) {
  const Mat2& s = pauli::sigma(j);
  const SpinorField a = apply_DB(b, left_multiply(w, s), coords, grid);
  const SpinorField c = left_multiply(apply_DB(b, w, coords, grid), s);
  return max_norm_diff(a, c);
}

LagrangianReport lagrangian_density(const Window& w, const GaugeConnection& b,
                                    const WalkJet& jet, const NullCoords& coords,
                                    const ContinuumGrid& grid) {
  w.validate(grid.n_sites);
  const SpinorField dpsi = apply_DB(b, w, coords, grid);
  const NullDerivs d = null_derivatives(w, coords, grid);
  const auto& mid = w.slices[1];
  const double t = mid.time;
  const double s = jet.coupling_sign();

  // gamma^mu = -sigma3 Gamma^mu
  const Mat2 g_minus = pauli::scale(-1.0, pauli::mul(pauli::sigma3, pauli::gamma_minus));
  const Mat2 g_plus = pauli::scale(-1.0, pauli::mul(pauli::sigma3, pauli::gamma_plus));
  const Mat2 i_sigma3 = pauli::scale(kI, pauli::sigma3);

  LagrangianReport r;
  r.density.resize(grid.n_sites);
  for (std::size_t i = 0; i < grid.n_sites; ++i) {
    const double x = grid.x(i);
    const cplx lo = mid.minus[i];
    const cplx hi = mid.plus[i];
    auto inner = [&](cplx a, cplx c) { return std::conj(lo) * a + std::conj(hi) * c; };

    const cplx dens = inner(dpsi.minus[i], dpsi.plus[i]);
    r.density[i] = dens;
    r.max_density = std::max(r.max_density, std::abs(dens));

    const double th = jet.theta_bar.eval(t, x);
    const double xi = jet.xi_bar.eval(t, x);
    const double ze = jet.zeta.eval(t, x);
    // off-diagonal part shared by D_mu and nabla_mu
    const Mat2 off = pauli::scale(
        kI, pauli::add(pauli::scale(s * th * std::sin(ze), pauli::sigma1),
                       pauli::scale(s * th * std::cos(ze), pauli::sigma2)));
    const auto [offlo, offhi] = pauli::apply(off, lo, hi);
    // D_- Psi and D_+ Psi
    const cplx dmlo = d.dm_minus[i] + offlo, dmhi = d.dm_plus[i] + offhi;
    const cplx dplo = d.dp_minus[i] + offlo, dphi = d.dp_plus[i] + offhi;
    const auto [am_lo, am_hi] = pauli::apply(g_minus, dmlo, dmhi);
    const auto [ap_lo, ap_hi] = pauli::apply(g_plus, dplo, dphi);
    const cplx vlo = kI * (am_lo + ap_lo) - xi * lo;
    const cplx vhi = kI * (am_hi + ap_hi) - xi * hi;
    r.dirac_form_gap = std::max(r.dirac_form_gap, std::abs(dens - inner(vlo, vhi)));

    const auto [alo, ahi] = pauli::apply(i_sigma3, vlo, vhi);
    r.adjoint_form_gap = std::max(r.adjoint_form_gap, std::abs(dens - inner(alo, ahi)));

    // nabla_mu = d_mu - i sigma3 xi_bar + off, contracted with Gamma^mu
    const Mat2 conn = pauli::add(pauli::scale(-kI * xi, pauli::sigma3), off);
    const auto [clo, chi] = pauli::apply(conn, lo, hi);
    const cplx nlo = d.dm_minus[i] + clo;  // Gamma- keeps the minus row of nabla_-
    const cplx nhi = d.dp_plus[i] + chi;   // Gamma+ keeps the plus row of nabla_+
    r.covariant_form_gap =
        std::max(r.covariant_form_gap, std::abs(dens - inner(nlo, nhi)));
  }
  return r;
}

std::string to_string(Null side) { return side == Null::minus ? "minus" : "plus"; }

VariationalReport variational_check(const WalkJet& jet,
                                    const ContinuumGrid& grid,
                                    const std::vector<double>& times, Null side,
                                    double h, double tol) {
  jet.validate();
  if (!(h > 0.0)) throw std::invalid_argument("variational_check: h must be > 0");
  const NullCoords c = NullCoords::of(jet);
  const Expr th = jet.theta_bar;
  const Expr xi = jet.xi_bar;
  const Expr ze = jet.zeta;

  auto d_null = [&](const std::function<double(double, double)>& f, Null dir,
                    double t, double x) {
    const LocalDerivatives d = differentiate(f, t, x, h);
    return dir == Null::minus ? d.d_minus(c) : d.d_plus(c);
  };
  auto xi_f = [xi](double t, double x) { return xi.eval(t, x); };
  auto ze_f = [ze](double t, double x) { return ze.eval(t, x); };

  // Potentials A_- and A_+ for the chosen side.
  std::function<double(double, double)> a_minus, a_plus;
  if (side == Null::minus) {
    a_minus = xi_f;
    a_plus = [&](double t, double x) {
      return d_null(ze_f, Null::plus, t, x) - xi.eval(t, x);
    };
  } else {
    a_minus = [&](double t, double x) {
      return -(d_null(ze_f, Null::minus, t, x) - xi.eval(t, x));
    };
    a_plus = [xi](double t, double x) { return -xi.eval(t, x); };
  }

  VariationalReport r;
  r.side = side;
  r.mass_min = std::numeric_limits<double>::infinity();
  const double stated_sign = side == Null::minus ? 1.0 : -1.0;
  for (double t : times) {
    for (std::size_t i = 0; i < grid.n_sites; ++i) {
      const double x = grid.x(i);
      const LocalDerivatives dth = differentiate(th, t, x, h);
      const LocalDerivatives dxi = differentiate(xi, t, x, h);
      const LocalDerivatives dze = differentiate(ze, t, x, h);
      const double diss = side == Null::minus ? dth.d_plus(c) : dth.d_minus(c);
      r.dissipative_violation = std::max(r.dissipative_violation, std::abs(diss));
      const double box = dze.box(c);
      const double sum = dxi.d_minus(c) + dxi.d_plus(c);
      r.constraint_violation = std::max(r.constraint_violation, std::abs(box - sum));
      r.constraint_as_stated_violation =
          std::max(r.constraint_as_stated_violation,
                   std::abs(box - stated_sign * c.tau * dxi.d_t));
      r.mass_min = std::min(r.mass_min, std::abs(dth.value));
      const double f = d_null(a_plus, Null::minus, t, x) -
                       d_null(a_minus, Null::plus, t, x);
      r.curvature_max = std::max(r.curvature_max, std::abs(f));
      r.potential_minus = a_minus(t, x);
      r.potential_plus = a_plus(t, x);
    }
  }
  r.admits_variational = r.dissipative_violation <= tol && r.constraint_violation <= tol;
  return r;
}

}  // namespace qwalk
