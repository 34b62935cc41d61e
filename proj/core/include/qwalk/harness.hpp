#pragma once

/// \file
/// Refinement studies: walk against its continuum limit, the fixed-angle
/// (Hadamard) walk against a jet-scaled control, and order estimates for the
/// continuum-side residuals.

#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "qwalk/coin.hpp"
#include "qwalk/continuum.hpp"
#include "qwalk/lattice.hpp"
#include "qwalk/symmetry.hpp"

namespace qwalk {

enum class Reference { analytic, fine_continuum };

std::string to_string(Reference r);

struct EpsilonLadder {
  std::vector<double> eps;
  double t_physical = 1.0;
  Reference reference = Reference::fine_continuum;

  /// {0.02, 0.01, 0.005, 0.0025, 0.00125}, t = 1.
  static EpsilonLadder standard();
  /// eps = 1/J for J in {50, 101, 203, 405, 811}: step counts with varying
  /// residue mod 8, t = 1.
  static EpsilonLadder fixed_coin_default();

  /// Strictly decreasing positive values, t_physical a whole number of steps
  /// tau*eps on every rung. Returns the step counts.
  std::vector<std::size_t> steps(double tau) const;
};

/// Periodic domain [x0, x0 + length).
struct StudyDomain {
  double x0 = -4.0;
  double length = 8.0;

  /// Sites of spacing dx covering the period; throws if length/dx is not an
  /// integer.
  std::size_t sites(double dx) const;
  /// Wrap x into [x0, x0 + length).
  double wrap(double x) const;
};

/// log(e1/e2) / log(h1/h2)
double observed_order(double e1, double e2, double h1, double h2);
std::vector<double> pairwise_orders(const std::vector<double>& h,
                                    const std::vector<double>& e);
double median(std::vector<double> v);

struct ConvergenceReport {
  std::string label;
  std::vector<double> h;       // epsilon or grid spacing, decreasing
  std::vector<double> errors;  // one per rung
  std::vector<double> orders;  // pairwise, size h.size() - 1
  double median_order = 0.0;

  // walk studies only
  std::vector<double> even_errors;
  std::vector<double> odd_errors;
  std::vector<double> walk_drift;  // max per-step |pi_j - pi_0| per rung
  std::string reference;

  /// Pairwise orders among the last `rungs` rungs.
  std::vector<double> tail_orders(std::size_t rungs = 3) const;
  bool tail_in_band(double lo, double hi, std::size_t rungs = 3) const;
  bool tail_at_least(double lo, std::size_t rungs = 3) const;

  void finalize();  // fill orders and median from h and errors
};

/// Closed-form solution for theta_bar = 0: each component is carried along
/// its characteristic and picks up the phase -+(1/tau) int xi_bar ds.
/// psi0 gives the density amplitude (minus, plus) at t = 0, evaluated at the
/// wrapped coordinate.
SpinorField transport_reference(
    const WalkJet& jet,
    const std::function<std::pair<cplx, cplx>(double)>& psi0, double t,
    const StudyDomain& domain, double dx);

/// True when theta_bar is identically zero (constant expression 0).
bool has_transport_reference(const WalkJet& jet);

ConvergenceReport convergence_study(const WalkJet& jet,
                                    const EpsilonLadder& ladder,
                                    const InitialProfile& profile,
                                    const StudyDomain& domain = {});

struct HadamardReport {
  std::vector<double> eps;
  std::vector<double> fixed_distances;    // d_i between rungs i and i+1
  std::vector<double> control_distances;  // same for the jet-scaled control
  bool insufficient_rungs = false;
  double min_fixed = 0.0;
  double control_last = 0.0;
  double factor = 10.0;

  bool passed() const;
};

/// Walks with theta = pi/4, xi = zeta = 0 at every rung, compared rung to
/// rung by nearest-site restriction of the coarser lattice onto the finer one.
/// Control: jet with theta_bar = pi/4, alpha = 1.
HadamardReport hadamard_nolimit_demo(const EpsilonLadder& ladder,
                                     const InitialProfile& profile,
                                     const StudyDomain& domain = {},
                                     double factor = 10.0);

using PointField = std::function<std::pair<cplx, cplx>(double x)>;
using SpaceTimeField = std::function<std::pair<cplx, cplx>(double t, double x)>;

struct GridLadder {
  std::vector<std::size_t> n_sites;  // increasing
  StudyDomain domain;
  double t_final = 1.0;
  double cfl = 0.5;
};

/// Max unmasked Klein-Gordon residual at t_final of the Dirac solution on
/// each grid.
ConvergenceReport kg_order_study(const WalkJet& jet, const PointField& init,
                                 const GridLadder& grids,
                                 double theta_min = kDefaultThetaMin);

/// Transformation-law error on each grid, window spacing equal to dx.
/// Returns {route through B(j, alpha), direct form}.
std::pair<ConvergenceReport, ConvergenceReport> gauge_order_study(
    const GaugeConnection& b, int j, const GaugeConnection::Field& alpha,
    const SpaceTimeField& psi, const NullCoords& coords, const GridLadder& grids);

/// Max |F-+| on each grid (t in {t0, t_final/2, t_final}), derivative step dx.
std::pair<ConvergenceReport, VariationalReport> variational_order_study(
    const WalkJet& jet, Null side, const GridLadder& grids);

struct LagrangianStudy {
  ConvergenceReport on_shell;        // max |Psi^dag D Psi| for the Dirac solution
  std::vector<LagrangianReport> off_shell;  // per grid, on the test field
  std::vector<double> h;
};

LagrangianStudy lagrangian_study(const WalkJet& jet, const PointField& init,
                                 const SpaceTimeField& test_field,
                                 const GridLadder& grids);

/// Grid on the domain with n sites, dt from cfl and the jet's speed.
ContinuumGrid domain_grid(const StudyDomain& d, std::size_t n, double speed,
                          double cfl);

/// Density-amplitude samples of psi0 on the grid.
SpinorField sample_point_field(const PointField& f, const ContinuumGrid& grid,
                               double t);

}  // namespace qwalk
