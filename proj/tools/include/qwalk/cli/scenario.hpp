#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qwalk/coin.hpp"
#include "qwalk/expr.hpp"
#include "qwalk/harness.hpp"
#include "qwalk/lattice.hpp"

namespace qwalk::cli {

/// Any problem with the scenario file: I/O, syntax, schema or an expression.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Tolerances {
  double probability = 1e-12;
  double order_lo = 0.8;
  double order_hi = 1.2;
  double kg_order = 1.8;
  double gauge_order = 1.8;
  double gauge_final = 1e-5;
  double conservation_drift = 1e-8;
  double lagrangian_gap = 1e-6;
  double lagrangian_order = 1.8;
  double variational = 1e-5;
  double variational_order = 1.8;
  double hadamard_factor = 10.0;
  double theta_min = kDefaultThetaMin;
};

struct WalkGrid {
  std::size_t n_sites = 0;
  std::optional<std::size_t> j_steps;
  std::optional<double> t_final;
  double x0 = 0.0;
  double epsilon = 0.01;

  std::size_t steps(double tau) const;
};

inline const std::vector<std::string> kCheckNames{
    "probability",       "converge",         "hadamard",
    "kg",                "gauge",            "conservation_form",
    "variational_minus", "variational_plus", "lagrangian"};

struct Scenario {
  std::filesystem::path source;
  WalkJet jet;
  WalkGrid grid;
  InitialProfile initial;

  EpsilonLadder ladder;
  bool reference_auto = true;  // analytic when theta_bar = 0
  StudyDomain domain;

  std::vector<std::size_t> hadamard_steps{50, 101, 203, 405, 811};

  GridLadder continuum;

  int gauge_generator = 3;
  Expr gauge_alpha;

  std::vector<std::string> checks;
  std::filesystem::path output_dir = "out";
  std::size_t snapshot_every = 0;
  Tolerances tol;
};

Scenario load_scenario(const std::filesystem::path& path);
Scenario parse_scenario(const std::string& text,
                        const std::filesystem::path& source = "<memory>");

}  // namespace qwalk::cli
