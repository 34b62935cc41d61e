#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <utility>

#include "qwalk/expr.hpp"
#include "qwalk/lattice.hpp"

namespace qwalk {

/// One SU(2) coin
///
///     [  e^{i xi} cos(theta)     e^{i zeta} sin(theta) ]
///     [ -e^{-i zeta} sin(theta)  e^{-i xi} cos(theta)  ]
struct SU2Coin {
  cplx b11, b12, b21, b22;

  std::pair<cplx, cplx> apply(cplx lo, cplx hi) const {
    return {b11 * lo + b12 * hi, b21 * lo + b22 * hi};
  }

  cplx determinant() const { return b11 * b22 - b12 * b21; }

  /// Largest entrywise deviation of B^dagger B from the identity.
  double unitarity_defect() const;
};

SU2Coin build_coin(double theta, double xi, double zeta);

/// A family of walks indexed by epsilon whose angles share the expansion
///
///     theta = p*pi + theta_bar(t, x) * eps^alpha
///     xi    = p*pi + xi_bar(t, x)    * eps^beta
///     zeta  = zeta(t, x)                           (not scaled)
///
/// with dt = tau*eps and dx = lambda*eps^delta.
struct WalkJet {
  int p = 0;
  double alpha = 1.0;
  double beta = 1.0;
  double delta = 1.0;
  double tau = 1.0;
  double lambda = 1.0;
  Expr theta_bar;
  Expr xi_bar;
  Expr zeta;

  void validate() const;

  /// (-1)^(p+1), the sign carried by the theta_bar coupling in the limit.
  double coupling_sign() const { return p == 0 ? -1.0 : 1.0; }
  double speed() const { return lambda / tau; }
  bool unit_scaling() const {
    return alpha == 1.0 && beta == 1.0 && delta == 1.0;
  }
};

struct EulerAngles {
  double theta;
  double xi;
  double zeta;
};

/// A single walk: lattice steps plus the angle at every space-time point.
class ConcreteWalk {
 public:
  static ConcreteWalk from_jet(const WalkJet& jet, double epsilon);

  /// Angles taken verbatim from the expressions, independent of any scale.
  static ConcreteWalk fixed_angles(Expr theta, Expr xi, Expr zeta, double dt,
                                   double dx);

  EulerAngles angles(double t, double x) const;
  SU2Coin coin_at(const GridSpec& grid, std::size_t j, std::size_t m) const;

  /// Coins of every site at step j.
  void fill_row(const GridSpec& grid, std::size_t j,
                std::span<SU2Coin> row) const;

  bool time_independent() const;

  double dt() const { return dt_; }
  double dx() const { return dx_; }
  double epsilon() const { return epsilon_; }
  const std::optional<WalkJet>& jet() const { return jet_; }

 private:
  ConcreteWalk() = default;

  std::optional<WalkJet> jet_;
  Expr theta_;
  Expr xi_;
  Expr zeta_;
  double offset_ = 0.0;
  double theta_scale_ = 1.0;
  double xi_scale_ = 1.0;
  double epsilon_ = 0.0;
  double dt_ = 0.0;
  double dx_ = 0.0;
};

/// Walk of the jet at this epsilon on a lattice of `n_sites` sites.
std::pair<ConcreteWalk, GridSpec> instantiate_walk(const WalkJet& jet,
                                                   double epsilon,
                                                   std::size_t n_sites,
                                                   double t0, double x0,
                                                   std::size_t j_steps);

}  // namespace qwalk
