#pragma once

#include <cstddef>
#include <vector>

#include "qwalk/coin.hpp"
#include "qwalk/lattice.hpp"

namespace qwalk {

/// One step of the walk:
///
///     psi-_{j+1,m} = b11 psi-_{j,m+1} + b12 psi+_{j,m-1}
///     psi+_{j+1,m} = b21 psi-_{j,m+1} + b22 psi+_{j,m-1}
///
/// with B evaluated at (t_j, x_m) and indices taken mod n_sites.
SpinorField step_walk(const SpinorField& f, const ConcreteWalk& walk,
                      const GridSpec& grid, std::size_t j);

struct WalkRun {
  std::vector<SpinorField> snapshots;
  std::vector<std::size_t> steps;   // step index of each snapshot
  std::vector<double> drift;        // |pi_j - pi_0| at each snapshot
  double max_step_drift = 0.0;      // max |pi_j - pi_0| over every step
};

/// Iterate step_walk `j_steps` times from `init` (taken at step 0 of `grid`).
/// Snapshots every `snapshot_every` steps plus the final state; 0 keeps only
/// the initial and final states.
WalkRun run_walk(const SpinorField& init, const ConcreteWalk& walk,
                 const GridSpec& grid, std::size_t j_steps,
                 std::size_t snapshot_every);

/// Stateful double-buffered stepper that keeps one coin row cached.
class WalkStepper {
 public:
  WalkStepper(const ConcreteWalk& walk, const GridSpec& grid,
              SpinorField init, std::size_t start_step = 0);

  void step();
  const SpinorField& state() const { return current_; }
  std::size_t step_index() const { return j_; }

 private:
  const ConcreteWalk& walk_;
  GridSpec grid_;
  SpinorField current_;
  SpinorField next_;
  std::vector<SU2Coin> row_;
  bool row_valid_ = false;
  std::size_t j_;
};

}  // namespace qwalk
