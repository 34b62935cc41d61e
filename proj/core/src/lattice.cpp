#include "qwalk/lattice.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <ostream>
#include <string>

namespace qwalk {

void GridSpec::validate() const {
  if (n_sites < 2) throw std::invalid_argument("grid: n_sites must be >= 2");
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw std::invalid_argument("grid: dt must be positive");
  }
  if (!(dx > 0.0) || !std::isfinite(dx)) {
    throw std::invalid_argument("grid: dx must be positive");
  }
}

bool SpinorField::all_finite() const {
  for (std::size_t i = 0; i < minus.size(); ++i) {
    if (!std::isfinite(minus[i].real()) || !std::isfinite(minus[i].imag()) ||
        !std::isfinite(plus[i].real()) || !std::isfinite(plus[i].imag())) {
      return false;
    }
  }
  return true;
}

void InitialProfile::validate() const {
  if (!(width > 0.0)) throw std::invalid_argument("profile: width must be > 0");
  if (w_minus == cplx{} && w_plus == cplx{}) {
    throw std::invalid_argument("profile: chirality weights are both zero");
  }
}

std::pair<cplx, cplx> InitialProfile::value(double x) const {
  const double d = x - center;
  const cplx env = std::exp(-d * d / (2.0 * width * width)) *
                   std::polar(1.0, wavenumber * x);
  return {w_minus * env, w_plus * env};
}

double total_probability(const SpinorField& f) {
  double sum = 0.0;
  for (std::size_t m = 0; m < f.size(); ++m) {
    sum += std::norm(f.minus[m]) + std::norm(f.plus[m]);
  }
  return sum;
}

double l2_distance(const SpinorField& a, const SpinorField& b, double dx) {
  if (a.size() != b.size() || a.plus.size() != b.plus.size()) {
    throw std::invalid_argument("l2_distance: fields have different lengths");
  }
  double sum = 0.0;
  for (std::size_t m = 0; m < a.size(); ++m) {
    sum += std::norm(a.minus[m] - b.minus[m]) + std::norm(a.plus[m] - b.plus[m]);
  }
  return std::sqrt(dx * sum);
}

namespace {

SpinorField sample_raw(const InitialProfile& profile, const GridSpec& grid) {
  SpinorField f(grid.n_sites, grid.t0);
  for (std::size_t m = 0; m < grid.n_sites; ++m) {
    const auto [lo, hi] = profile.value(grid.x(m));
    f.minus[m] = lo;
    f.plus[m] = hi;
  }
  return f;
}

void check_resolvable(const InitialProfile& profile, const GridSpec& grid) {
  profile.validate();
  if (profile.width < 2.0 * grid.dx) {
    throw std::invalid_argument("profile: width must be at least 2*dx");
  }
}

}  // namespace

double normalization_scale(const InitialProfile& profile, const GridSpec& grid) {
  check_resolvable(profile, grid);
  const double p = total_probability(sample_raw(profile, grid));
  if (!(p > 0.0)) {
    throw std::invalid_argument("profile: sampled packet vanishes on the grid");
  }
  return 1.0 / std::sqrt(p);
}

SpinorField sample_initial(const InitialProfile& profile, const GridSpec& grid) {
  const double s = normalization_scale(profile, grid);
  return scaled(sample_raw(profile, grid), s);
}

SpinorField combine(cplx a, const SpinorField& f, cplx b, const SpinorField& g) {
  if (f.size() != g.size()) {
    throw std::invalid_argument("combine: fields have different lengths");
  }
  SpinorField out(f.size(), f.time);
  for (std::size_t m = 0; m < f.size(); ++m) {
    out.minus[m] = a * f.minus[m] + b * g.minus[m];
    out.plus[m] = a * f.plus[m] + b * g.plus[m];
  }
  return out;
}

SpinorField scaled(const SpinorField& f, double s) {
  SpinorField out = f;
  for (auto& v : out.minus) v *= s;
  for (auto& v : out.plus) v *= s;
  return out;
}

std::string format_double(double v) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

void write_csv_header(std::ostream& os) {
  os << "t,x,re_psi_minus,im_psi_minus,re_psi_plus,im_psi_plus,prob_density\n";
}

void write_snapshot_csv(std::ostream& os, const SpinorField& f, double x0,
                        double dx, bool header) {
  if (header) write_csv_header(os);
  const std::string t = format_double(f.time);
  for (std::size_t m = 0; m < f.size(); ++m) {
    const double x = x0 + static_cast<double>(m) * dx;
    os << t << ',' << format_double(x) << ',' << format_double(f.minus[m].real())
       << ',' << format_double(f.minus[m].imag()) << ','
       << format_double(f.plus[m].real()) << ','
       << format_double(f.plus[m].imag()) << ','
       << format_double(std::norm(f.minus[m]) + std::norm(f.plus[m])) << '\n';
  }
}

}  // namespace qwalk
