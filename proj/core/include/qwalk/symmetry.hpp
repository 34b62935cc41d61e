#pragma once

/// \file
/// The operator family D(B) = Gamma^mu (d_mu + i sum_j B^j_mu sigma_j) on a
/// periodic grid, its local transformation law, the probability-conservation
/// characterization, Lagrangian forms and the second-order variational
/// conditions.

#include <array>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "qwalk/coin.hpp"
#include "qwalk/continuum.hpp"
#include "qwalk/expr.hpp"
#include "qwalk/lattice.hpp"

namespace qwalk {

namespace pauli {

inline constexpr Mat2 identity{cplx{1, 0}, cplx{0, 0}, cplx{0, 0}, cplx{1, 0}};
inline constexpr Mat2 sigma1{cplx{0, 0}, cplx{1, 0}, cplx{1, 0}, cplx{0, 0}};
inline constexpr Mat2 sigma2{cplx{0, 0}, cplx{0, -1}, cplx{0, 1}, cplx{0, 0}};
inline constexpr Mat2 sigma3{cplx{1, 0}, cplx{0, 0}, cplx{0, 0}, cplx{-1, 0}};
/// Gamma- = (1 + sigma3)/2 projects on psi-, Gamma+ = (1 - sigma3)/2 on psi+.
inline constexpr Mat2 gamma_minus{cplx{1, 0}, cplx{0, 0}, cplx{0, 0}, cplx{0, 0}};
inline constexpr Mat2 gamma_plus{cplx{0, 0}, cplx{0, 0}, cplx{0, 0}, cplx{1, 0}};

/// sigma_j for j in {1, 2, 3}.
const Mat2& sigma(int j);

Mat2 mul(const Mat2& a, const Mat2& b);
Mat2 add(const Mat2& a, const Mat2& b);
Mat2 scale(cplx s, const Mat2& a);
/// exp(i a sigma_j) = cos(a) + i sin(a) sigma_j
Mat2 exp_i_sigma(int j, double a);
double max_abs_diff(const Mat2& a, const Mat2& b);
std::pair<cplx, cplx> apply(const Mat2& m, cplx lo, cplx hi);

}  // namespace pauli

enum class Null : int { minus = 0, plus = 1 };

/// Six real fields B^j_mu(t, x), j in {1, 2, 3}, mu in {-, +}.
struct GaugeConnection {
  using Field = std::function<double(double t, double x)>;

  std::array<std::array<Field, 2>, 3> b;

  GaugeConnection();  // all zero

  const Field& at(int j, Null mu) const { return b[j - 1][static_cast<int>(mu)]; }
  Field& at(int j, Null mu) { return b[j - 1][static_cast<int>(mu)]; }

  /// Zeroth-order matrix K = Gamma- sum_j B^j_- sigma_j + Gamma+ sum_j B^j_+ sigma_j.
  Mat2 matrix(double t, double x) const;

  /// Generator of tau d/dt Psi = lambda sigma3 d/dx Psi - i K Psi.
  Generator generator(bool time_dependent = true) const;
};

/// Values of the six fields at one time on every grid site.
struct ConnectionSlice {
  double time = 0.0;
  std::array<std::array<std::vector<double>, 2>, 3> b;

  static ConnectionSlice sample(const GaugeConnection& c, double t,
                                const ContinuumGrid& grid);
  bool all_finite() const;
};

/// B^3 = -xi_bar, B^2 = s theta_bar cos(zeta), B^1 = s theta_bar sin(zeta) on
/// both null directions, s = (-1)^(p+1).
GaugeConnection connection_from_jet(const WalkJet& jet);

/// Three equally spaced time slices; operators act on the middle one.
struct Window {
  std::array<SpinorField, 3> slices;

  double spacing() const { return slices[1].time - slices[0].time; }
  double time() const { return slices[1].time; }
  /// Throws std::invalid_argument on unequal spacing or size mismatch.
  void validate(std::size_t n_sites) const;
};

/// Window of an analytic field Psi(t, x) = (minus, plus) around t with spacing dt.
Window sample_window(const std::function<std::pair<cplx, cplx>(double, double)>& psi,
                     double t, double dt, const ContinuumGrid& grid);

/// Three consecutive states of a continuum run.
Window window_from_tail(const std::vector<SpinorField>& tail);

/// D(B) Psi = (tau d_t - lambda sigma3 d_x) Psi + i K Psi, 2nd-order central
/// differences, evaluated at the middle slice.
SpinorField apply_DB(const GaugeConnection& b, const Window& w,
                     const NullCoords& coords, const ContinuumGrid& grid);

/// B^k_mu + delta_jk d_mu alpha, d_mu alpha by central differences of step h.
GaugeConnection gauge_transform(const GaugeConnection& b, int j,
                                const GaugeConnection::Field& alpha,
                                const NullCoords& coords, double h);
GaugeConnection gauge_transform(const GaugeConnection& b, int j,
                                const Expr& alpha, const NullCoords& coords,
                                double h);

struct GaugeIdentityReport {
  int j = 3;
  /// max | exp(-i alpha s_j)[D(cos a Psi) + i s_j D(sin a Psi)] - D(B(j, alpha)) Psi |
  double max_error = 0.0;
  /// Same left side against D(B) Psi + i sigma_j (Gamma^mu d_mu alpha) Psi.
  double direct_form_error = 0.0;
};

GaugeIdentityReport gauge_identity_check(const GaugeConnection& b, int j,
                                         const GaugeConnection::Field& alpha,
                                         const Window& w,
                                         const NullCoords& coords,
                                         const ContinuumGrid& grid);

inline constexpr double kProbabilityFormTol = 1e-12;

struct ProbabilityFormReport {
  bool conserving = true;
  double max_violation = 0.0;  // max |B^1_- - B^1_+|, |B^2_- - B^2_+|
  /// max |B^3_- - B^3_+|: nonzero means the conserving form still needs
  /// phase_fix to match the walk's operator.
  double sigma3_split = 0.0;
};

/// Algebraic test on the grid at each of `times`: K is Hermitian iff
/// B^1_- = B^1_+ and B^2_- = B^2_+.
ProbabilityFormReport probability_form_check(const GaugeConnection& b,
                                             const ContinuumGrid& grid,
                                             const std::vector<double>& times,
                                             double tol = kProbabilityFormTol);

/// Evolve `init` under D(B) Psi = 0 and return max |P(t) - P(t0)| (dx-weighted).
double dynamic_probability_drift(const GaugeConnection& b,
                                 const SpinorField& init,
                                 const NullCoords& coords,
                                 const ContinuumGrid& grid, double t_final);

/// U(1) rephasing Psi = exp(i phi) chi with 2 tau d_t phi = B^3_+ - B^3_-,
/// phi(t0, x) = 0. The returned connection has B^3_- = B^3_+.
struct PhaseFix {
  GaugeConnection connection;
  GaugeConnection::Field phi;
};
PhaseFix phase_fix(const GaugeConnection& b, const NullCoords& coords,
                   double t0, double h);

/// max | D(B)(sigma_j Psi) - sigma_j D(B) Psi | over the grid.
double commutator_norm(const GaugeConnection& b, int j, const Window& w,
                       const NullCoords& coords, const ContinuumGrid& grid);

struct LagrangianReport {
  std::vector<cplx> density;  // Psi^dagger D Psi
  double max_density = 0.0;
  /// max | Psi^dag D Psi - Psi^dag (i gamma^mu D_mu - xi_bar) Psi |, gamma^mu = -sigma3 Gamma^mu
  double dirac_form_gap = 0.0;
  /// Same with the adjoint Psi^dag (i sigma3) in place of Psi^dag.
  double adjoint_form_gap = 0.0;
  /// max | Psi^dag D Psi - Psi^dag Gamma^mu nabla_mu Psi |, single nabla for both mu
  double covariant_form_gap = 0.0;
};

LagrangianReport lagrangian_density(const Window& w, const GaugeConnection& b,
                                    const WalkJet& jet, const NullCoords& coords,
                                    const ContinuumGrid& grid);

struct VariationalReport {
  Null side = Null::minus;
  double dissipative_violation = 0.0;  // max |d+ theta_bar| (minus side), |d- theta_bar| (plus)
  /// max |lambda^2 box zeta - (d- + d+) xi_bar|
  double constraint_violation = 0.0;
  /// The same condition with tau d_t xi_bar (minus) or -tau d_t xi_bar (plus).
  double constraint_as_stated_violation = 0.0;
  double curvature_max = 0.0;  // max |F-+|, F-+ = d- A+ - d+ A-
  double mass_min = 0.0;       // min |theta_bar|
  /// Potentials at the last evaluated point, for inspection.
  double potential_minus = 0.0;
  double potential_plus = 0.0;
  bool admits_variational = false;
};

inline constexpr double kVariationalTol = 1e-5;

/// Conditions sampled on every site at each of `times`; derivatives of the
/// jet fields by central differences with step h (nested for F-+).
VariationalReport variational_check(const WalkJet& jet,
                                    const ContinuumGrid& grid,
                                    const std::vector<double>& times, Null side,
                                    double h, double tol = kVariationalTol);

std::string to_string(Null side);

}  // namespace qwalk
