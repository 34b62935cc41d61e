#pragma once

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qwalk {

using cplx = std::complex<double>;

/// Periodic 1D space-time lattice: site m sits at x0 + m*dx, step j at
/// t0 + j*dt.
struct GridSpec {
  std::size_t n_sites = 0;
  std::size_t j_steps = 0;
  double dt = 0.0;
  double dx = 0.0;
  double t0 = 0.0;
  double x0 = 0.0;

  double x(std::size_t m) const { return x0 + static_cast<double>(m) * dx; }
  double t(std::size_t j) const { return t0 + static_cast<double>(j) * dt; }
  double period() const { return static_cast<double>(n_sites) * dx; }

  /// Throws std::invalid_argument on n_sites < 2 or non-positive steps.
  void validate() const;
};

/// Two-component amplitude (psi-minus, psi-plus) on every site at one time.
struct SpinorField {
  std::vector<cplx> minus;
  std::vector<cplx> plus;
  double time = 0.0;

  SpinorField() = default;
  SpinorField(std::size_t n, double t) : minus(n), plus(n), time(t) {}

  std::size_t size() const noexcept { return minus.size(); }
  bool all_finite() const;
};

struct InitialProfile {
  double center = 0.0;
  double width = 1.0;
  double wavenumber = 0.0;
  cplx w_minus{1.0, 0.0};
  cplx w_plus{0.0, 0.0};

  void validate() const;

  /// Unnormalized amplitude pair at coordinate x.
  std::pair<cplx, cplx> value(double x) const;
};

/// Sum over sites of |psi-|^2 + |psi+|^2 (no dx weight).
double total_probability(const SpinorField& f);

/// sqrt(dx * sum |a - b|^2) over both components.
double l2_distance(const SpinorField& a, const SpinorField& b, double dx);

/// Sample the profile on the lattice and rescale so total_probability is 1.
/// Requires width >= 2*dx.
SpinorField sample_initial(const InitialProfile& profile, const GridSpec& grid);

/// Scale that sample_initial applies to the raw profile samples on this grid.
double normalization_scale(const InitialProfile& profile, const GridSpec& grid);

/// Linear combination a*f + b*g of equally sized fields (time taken from f).
SpinorField combine(cplx a, const SpinorField& f, cplx b, const SpinorField& g);

SpinorField scaled(const SpinorField& f, double s);

/// CSV columns: t, x, re_psi_minus, im_psi_minus, re_psi_plus, im_psi_plus,
/// prob_density. Writes the header when `header` is set.
void write_snapshot_csv(std::ostream& os, const SpinorField& f, double x0,
                        double dx, bool header = true);

void write_csv_header(std::ostream& os);

/// Shortest round-trip decimal form; used for every numeric output.
std::string format_double(double v);

}  // namespace qwalk
