#pragma once

/// \file
/// Method-of-lines integrator for the continuous limit of the walk,
///
///     tau d/dt Psi = lambda sigma_3 d/dx Psi - i K(t, x) Psi,
///
/// (classical RK4 in time, 4th-order central differences in space) and the
/// second-order residuals of the component-wise Klein-Gordon forms.

#include <algorithm>
#include <array>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <vector>

#include "qwalk/coin.hpp"
#include "qwalk/lattice.hpp"

namespace qwalk {

/// Light-cone scales: d-/+ = tau d/dt -/+ lambda d/dx.
struct NullCoords {
  double tau = 1.0;
  double lambda = 1.0;

  double speed() const { return lambda / tau; }
  static NullCoords of(const WalkJet& jet) { return {jet.tau, jet.lambda}; }
};

struct ContinuumGrid {
  std::size_t n_sites = 0;
  double dx = 0.0;
  double dt = 0.0;
  double t0 = 0.0;
  double x0 = 0.0;

  double x(std::size_t i) const { return x0 + static_cast<double>(i) * dx; }
  double period() const { return static_cast<double>(n_sites) * dx; }

  /// Throws CflViolation when speed*dt > dx.
  void validate(double speed) const;
};

/// Grid with dt = cfl * dx / speed.
ContinuumGrid make_continuum_grid(std::size_t n_sites, double dx, double x0,
                                  double t0, double speed, double cfl = 0.5);

class CflViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NumericalBlowup : public std::runtime_error {
 public:
  NumericalBlowup(double time, std::size_t step);
  double time() const noexcept { return time_; }

 private:
  double time_;
};

/// Row-major complex 2x2 matrix.
using Mat2 = std::array<cplx, 4>;

/// Zeroth-order generator K(t, x) of the first-order system.
struct Generator {
  std::function<Mat2(double t, double x)> at;
  bool time_dependent = true;
};

/// K for the walk's limit:
///
///     K = [ -xi_bar                      -i s theta_bar e^{i zeta} ]
///         [  i s theta_bar e^{-i zeta}    xi_bar                   ]
///
/// with s = (-1)^(p+1).
Generator jet_generator(const WalkJet& jet);

/// d/dt Psi for the jet's limit equations at time t, spatial derivatives by
/// 4th-order central differences on the periodic grid.
SpinorField dirac_rhs(const SpinorField& f, const WalkJet& jet, double t,
                      const ContinuumGrid& grid);

struct IntegrationOptions {
  std::size_t snapshot_every = 0;  // 0: initial and final only
  std::size_t keep_tail = 0;       // retain the last n consecutive states
};

struct ContinuumRun {
  std::vector<SpinorField> snapshots;
  std::vector<double> drift;  // |P(t) - P(0)| at each snapshot, dx-weighted
  std::vector<SpinorField> tail;
  double max_drift = 0.0;
  double dt_used = 0.0;
  std::size_t steps = 0;
};

ContinuumRun integrate_system(const SpinorField& init, const Generator& gen,
                              const NullCoords& coords,
                              const ContinuumGrid& grid, double t_final,
                              const IntegrationOptions& options = {});

ContinuumRun integrate_dirac(const SpinorField& init, const WalkJet& jet,
                             const ContinuumGrid& grid, double t_final,
                             const IntegrationOptions& options = {});

/// dx * sum of |psi-|^2 + |psi+|^2.
double weighted_probability(const SpinorField& f, double dx);

/// Value and central-difference derivatives of a scalar field at (t, x),
/// step h in both directions.
struct LocalDerivatives {
  double value = 0.0;
  double d_t = 0.0;
  double d_x = 0.0;
  double d_tt = 0.0;
  double d_xx = 0.0;

  double d_minus(const NullCoords& c) const { return c.tau * d_t - c.lambda * d_x; }
  double d_plus(const NullCoords& c) const { return c.tau * d_t + c.lambda * d_x; }
  /// d- d+ = tau^2 d_tt - lambda^2 d_xx
  double box(const NullCoords& c) const {
    return c.tau * c.tau * d_tt - c.lambda * c.lambda * d_xx;
  }
};

LocalDerivatives differentiate(const Expr& field, double t, double x, double h);
LocalDerivatives differentiate(const std::function<double(double, double)>& field,
                               double t, double x, double h);

inline constexpr double kDefaultThetaMin = 1e-8;

struct KgResidual {
  double time = 0.0;
  std::vector<cplx> minus;
  std::vector<cplx> plus;
  std::vector<char> masked;  // 1 where |theta_bar| < theta_min
  double max_minus = 0.0;    // over unmasked points
  double max_plus = 0.0;
  std::size_t masked_count = 0;

  double max_abs() const { return std::max(max_minus, max_plus); }
};

/// Residual LHS - RHS of the two Klein-Gordon forms, evaluated on the middle
/// of three equally spaced snapshots with 2nd-order central differences.
KgResidual kg_residual(const std::array<SpinorField, 3>& window,
                       const WalkJet& jet, const ContinuumGrid& grid,
                       double theta_min = kDefaultThetaMin);

/// CSV columns: t, x, abs_residual_minus, abs_residual_plus, masked.
void write_residual_csv(std::ostream& os, const KgResidual& r,
                        const ContinuumGrid& grid);

namespace detail {
/// 4th-order central first derivative on a periodic array.
void central_diff4(const std::vector<cplx>& f, double dx, std::vector<cplx>& out);
}  // namespace detail

}  // namespace qwalk
