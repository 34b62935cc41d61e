#include "qwalk/coin.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qwalk {

double SU2Coin::unitarity_defect() const {
  // columns of B must be orthonormal
  const cplx g11 = std::conj(b11) * b11 + std::conj(b21) * b21;
  const cplx g12 = std::conj(b11) * b12 + std::conj(b21) * b22;
  const cplx g22 = std::conj(b12) * b12 + std::conj(b22) * b22;
  return std::max({std::abs(g11 - 1.0), std::abs(g12), std::abs(g22 - 1.0)});
}

SU2Coin build_coin(double theta, double xi, double zeta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const cplx exi = std::polar(1.0, xi);
  const cplx ezeta = std::polar(1.0, zeta);
  return SU2Coin{exi * c, ezeta * s, -std::conj(ezeta) * s, std::conj(exi) * c};
}

void WalkJet::validate() const {
  if (p != 0 && p != 1) throw std::invalid_argument("jet: p must be 0 or 1");
  if (!(alpha > 0.0) || !(beta > 0.0) || !(delta > 0.0)) {
    throw std::invalid_argument("jet: alpha, beta and delta must be positive");
  }
  if (!(tau > 0.0) || !(lambda > 0.0)) {
    throw std::invalid_argument("jet: tau and lambda must be positive");
  }
}

ConcreteWalk ConcreteWalk::from_jet(const WalkJet& jet, double epsilon) {
  jet.validate();
  if (!(epsilon > 0.0)) throw std::invalid_argument("walk: epsilon must be > 0");
  ConcreteWalk w;
  w.jet_ = jet;
  w.theta_ = jet.theta_bar;
  w.xi_ = jet.xi_bar;
  w.zeta_ = jet.zeta;
  w.offset_ = jet.p * std::numbers::pi;
  w.theta_scale_ = std::pow(epsilon, jet.alpha);
  w.xi_scale_ = std::pow(epsilon, jet.beta);
  w.epsilon_ = epsilon;
  w.dt_ = jet.tau * epsilon;
  w.dx_ = jet.lambda * std::pow(epsilon, jet.delta);
  return w;
}

ConcreteWalk ConcreteWalk::fixed_angles(Expr theta, Expr xi, Expr zeta,
                                        double dt, double dx) {
  if (!(dt > 0.0) || !(dx > 0.0)) {
    throw std::invalid_argument("walk: dt and dx must be positive");
  }
  ConcreteWalk w;
  w.theta_ = std::move(theta);
  w.xi_ = std::move(xi);
  w.zeta_ = std::move(zeta);
  w.dt_ = dt;
  w.dx_ = dx;
  return w;
}

EulerAngles ConcreteWalk::angles(double t, double x) const {
  return {offset_ + theta_.eval(t, x) * theta_scale_,
          offset_ + xi_.eval(t, x) * xi_scale_, zeta_.eval(t, x)};
}

SU2Coin ConcreteWalk::coin_at(const GridSpec& grid, std::size_t j,
                              std::size_t m) const {
  const EulerAngles a = angles(grid.t(j), grid.x(m));
  return build_coin(a.theta, a.xi, a.zeta);
}

void ConcreteWalk::fill_row(const GridSpec& grid, std::size_t j,
                            std::span<SU2Coin> row) const {
  const double t = grid.t(j);
  for (std::size_t m = 0; m < row.size(); ++m) {
    const EulerAngles a = angles(t, grid.x(m));
    row[m] = build_coin(a.theta, a.xi, a.zeta);
  }
}

bool ConcreteWalk::time_independent() const {
  return !theta_.depends_on_t() && !xi_.depends_on_t() &&
         !zeta_.depends_on_t();
}

std::pair<ConcreteWalk, GridSpec> instantiate_walk(const WalkJet& jet,
                                                   double epsilon,
                                                   std::size_t n_sites,
                                                   double t0, double x0,
                                                   std::size_t j_steps) {
  ConcreteWalk walk = ConcreteWalk::from_jet(jet, epsilon);
  GridSpec grid;
  grid.n_sites = n_sites;
  grid.j_steps = j_steps;
  grid.dt = walk.dt();
  grid.dx = walk.dx();
  grid.t0 = t0;
  grid.x0 = x0;
  grid.validate();
  return {std::move(walk), grid};
}

}  // namespace qwalk
