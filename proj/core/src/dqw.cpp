#include "qwalk/dqw.hpp"

#include <cmath>
#include <stdexcept>

namespace qwalk {

WalkStepper::WalkStepper(const ConcreteWalk& walk, const GridSpec& grid,
                         SpinorField init, std::size_t start_step)
    : walk_(walk),
      grid_(grid),
      current_(std::move(init)),
      next_(grid.n_sites, 0.0),
      row_(grid.n_sites),
      j_(start_step) {
  grid_.validate();
  if (current_.size() != grid_.n_sites || current_.plus.size() != grid_.n_sites) {
    throw std::invalid_argument("walk: field size does not match the grid");
  }
}

namespace {

// a*b + c*d without the inf/nan recovery path of std::complex operator*
inline cplx fma2(cplx a, cplx b, cplx c, cplx d) {
  return {a.real() * b.real() - a.imag() * b.imag() + c.real() * d.real() - c.imag() * d.imag(),
          a.real() * b.imag() + a.imag() * b.real() + c.real() * d.imag() + c.imag() * d.real()};
}

}  // namespace

void WalkStepper::step() {
  if (!row_valid_ || !walk_.time_independent()) {
    walk_.fill_row(grid_, j_, row_);
    row_valid_ = true;
  }
  const std::size_t n = grid_.n_sites;
  const auto& lo = current_.minus;
  const auto& hi = current_.plus;
  for (std::size_t m = 0; m < n; ++m) {
    const std::size_t right = m + 1 == n ? 0 : m + 1;
    const std::size_t left = m == 0 ? n - 1 : m - 1;
    const SU2Coin& b = row_[m];
    next_.minus[m] = fma2(b.b11, lo[right], b.b12, hi[left]);
    next_.plus[m] = fma2(b.b21, lo[right], b.b22, hi[left]);
  }
  ++j_;
  next_.time = grid_.t(j_);
  std::swap(current_, next_);
}

SpinorField step_walk(const SpinorField& f, const ConcreteWalk& walk,
                      const GridSpec& grid, std::size_t j) {
  WalkStepper stepper(walk, grid, f, j);
  stepper.step();
  return stepper.state();
}

WalkRun run_walk(const SpinorField& init, const ConcreteWalk& walk,
                 const GridSpec& grid, std::size_t j_steps,
                 std::size_t snapshot_every) {
  WalkRun run;
  const double pi0 = total_probability(init);
  run.snapshots.push_back(init);
  run.steps.push_back(0);
  run.drift.push_back(0.0);
  WalkStepper stepper(walk, grid, init);
  for (std::size_t j = 1; j <= j_steps; ++j) {
    stepper.step();
    const double d = std::abs(total_probability(stepper.state()) - pi0);
    run.max_step_drift = std::max(run.max_step_drift, d);
    const bool periodic = snapshot_every > 0 && j % snapshot_every == 0;
    if (periodic || j == j_steps) {
      run.snapshots.push_back(stepper.state());
      run.steps.push_back(j);
      run.drift.push_back(d);
    }
  }
  return run;
}

}  // namespace qwalk
