#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "oracles.hpp"
#include "qwalk/continuum.hpp"

using namespace qwalk;

TEST_CASE("generator of the limit") {
  const WalkJet j = oracle::jet("1.5", "0.4", "0.7", 0);
  const Generator g = jet_generator(j);
  CHECK_FALSE(g.time_dependent);
  const Mat2 k = g.at(0.1, 0.2);
  const double s = -1.0;
  CHECK(std::abs(k[0] - (-0.4)) < 1e-15);
  CHECK(std::abs(k[3] - 0.4) < 1e-15);
  CHECK(std::abs(k[1] - cplx(0, -1) * s * 1.5 * std::polar(1.0, 0.7)) < 1e-15);
  CHECK(std::abs(k[2] - cplx(0, 1) * s * 1.5 * std::polar(1.0, -0.7)) < 1e-15);
  CHECK(jet_generator(oracle::jet("t", "0", "0")).time_dependent);
}

TEST_CASE("zero data stays zero") {
  const WalkJet j = oracle::jet("1 + sin(x)", "cos(t)", "x");
  const ContinuumGrid g = oracle::periodic(64);
  const SpinorField z(64, 0.0);
  const SpinorField d = dirac_rhs(z, j, 0.0, g);
  CHECK(oracle::max_diff(d, z) == 0.0);
  IntegrationOptions opt;
  opt.keep_tail = 3;
  const ContinuumRun run = integrate_dirac(z, j, g, 0.5, opt);
  CHECK(oracle::max_diff(run.snapshots.back(), z) == 0.0);
  const KgResidual r = kg_residual({run.tail[0], run.tail[1], run.tail[2]}, j, g);
  CHECK(r.max_abs() == 0.0);
}

TEST_CASE("fourth-order derivative") {
  double prev = 0.0;
  for (std::size_t n : {32, 64, 128}) {
    const double dx = 2 * std::numbers::pi / static_cast<double>(n);
    std::vector<cplx> f(n), d;
    for (std::size_t i = 0; i < n; ++i) f[i] = std::exp(std::sin(i * dx));
    detail::central_diff4(f, dx, d);
    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double x = i * dx;
      err = std::max(err, std::abs(d[i] - std::cos(x) * std::exp(std::sin(x))));
    }
    if (prev > 0) CHECK(std::log2(prev / err) > 3.8);
    prev = err;
  }
}

TEST_CASE("transport against the closed form") {
  const WalkJet j = oracle::jet("0", "1", "0", 0, 1.0, 1.0);
  const ContinuumGrid g = oracle::periodic(256);
  auto f = [](double x) { return cplx(std::exp(std::sin(x)), 0.0); };
  auto h = [](double x) { return cplx(0.0, std::cos(2 * x)); };
  auto exact = [&](double t, double x) { return oracle::transport(f, h, 1.0, 1.0, 1.0, t, x); };
  const ContinuumRun run = integrate_dirac(oracle::sample(exact, g, 0.0), j, g, 1.0);
  CHECK(oracle::max_diff(run.snapshots.back(), oracle::sample(exact, g, 1.0)) < 1e-5);
  CHECK(run.snapshots.back().time == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("CFL and blowup guards") {
  const WalkJet j = oracle::jet("1", "0", "0");
  CHECK_THROWS_AS(make_continuum_grid(64, 0.1, 0, 0, 1.0, 1.5), CflViolation);
  ContinuumGrid g = oracle::periodic(64);
  g.dt = 2 * g.dx;
  CHECK_THROWS_AS(g.validate(1.0), CflViolation);
}

TEST_CASE("KG residual of a plane wave is second order") {
  const oracle::PlaneWave pw(2.0, 1.0, -1.0);
  const WalkJet j = oracle::jet("1", "0", "0", 0);
  double prev = 0.0;
  for (std::size_t n : {64, 128, 256}) {
    const ContinuumGrid g = oracle::periodic(n);
    const double t = 0.5;
    const KgResidual r = kg_residual({oracle::sample([&](double s, double x) { return pw.at(s, x); }, g, t - g.dt),
                                      oracle::sample([&](double s, double x) { return pw.at(s, x); }, g, t),
                                      oracle::sample([&](double s, double x) { return pw.at(s, x); }, g, t + g.dt)},
                                     j, g);
    CHECK(r.masked_count == 0);
    if (prev > 0) CHECK(std::log2(prev / r.max_abs()) > 1.9);
    prev = r.max_abs();
  }

  const ContinuumGrid g = oracle::periodic(16);
  const KgResidual masked = kg_residual({SpinorField(16, 0.0), SpinorField(16, g.dt),
                                        SpinorField(16, 2 * g.dt)},
                                       oracle::jet("sin(x)", "0", "0"), g, 0.5);
  CHECK(masked.masked_count > 0);
  std::ostringstream os;
  write_residual_csv(os, masked, g);
  CHECK(os.str().rfind("t,x,abs_residual_minus,abs_residual_plus,masked\n", 0) == 0);
}

TEST_CASE("finite differences of expressions") {
  const Expr e = Expr::parse("sin(x)*cos(2*t)");
  const LocalDerivatives d = differentiate(e, 0.3, 0.7, 1e-3);
  CHECK(d.value == doctest::Approx(std::sin(0.7) * std::cos(0.6)));
  CHECK(d.d_x == doctest::Approx(std::cos(0.7) * std::cos(0.6)).epsilon(1e-6));
  CHECK(d.d_t == doctest::Approx(-2 * std::sin(0.7) * std::sin(0.6)).epsilon(1e-6));
  CHECK(d.d_xx == doctest::Approx(-std::sin(0.7) * std::cos(0.6)).epsilon(1e-5));
  CHECK(d.d_tt == doctest::Approx(-4 * std::sin(0.7) * std::cos(0.6)).epsilon(1e-5));
}
