#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include "kronsensus/strategies.hpp"

namespace kronsensus {

struct ConvergenceResult {
  bool converged = false;
  std::optional<Index> steps;
  double final_error = 0;
};

struct Trajectory {
  // x(0..T); empty when N * t_max exceeds the dense storage budget.
  std::vector<VectorXd> states;
  double target = 0;
  std::vector<double> disagreement;      // ||x(t) - target 1||_2
  std::vector<double> disagreement_inf;  // ||x(t) - target 1||_inf
  double threshold = 0;
  ConvergenceResult convergence;

  Index final_time() const { return static_cast<Index>(disagreement.size()) - 1; }
};

struct SimulationOptions {
  // Absolute inf-norm threshold; defaults to 1e-9 * ||x0||_inf.
  std::optional<double> threshold;
  bool stop_early = true;
  Index max_stored_entries = 10'000'000;
};

Trajectory simulate(const MatrixXd& m, const VectorXd& x0, Index t_max,
                    const SimulationOptions& options = {});
Trajectory simulate(const Strategy& s, const VectorXd& x0, Index t_max,
                    const SimulationOptions& options = {});

VectorXd uniform_initial_state(Index dim, std::uint64_t seed, std::uint64_t stream = 0,
                               double half_width = 50.0);

struct ConvergenceStats {
  std::vector<ConvergenceResult> trials;
  Index min_steps = 0;
  double median_steps = 0;
  Index max_steps = 0;
  // Trials that did not reach the threshold within t_max.
  Index unconverged = 0;
};

/// Steps to ||Delta||_inf <= threshold from x0 uniform in [-50, 50]^N, trial i on stream i.
/// DomainError for strategies that fail validation.
ConvergenceStats convergence_steps(const Strategy& s, Index trials, double threshold,
                                   std::uint64_t seed, Index t_max = 100'000, int threads = 1);

struct FigureResult {
  std::filesystem::path kronecker_csv;
  std::filesystem::path cayley_csv;
  std::filesystem::path kronecker_disagreement_csv;
  std::filesystem::path cayley_disagreement_csv;
  // max - min over agents at t = 4.
  double kronecker_spread_t4 = 0;
  double cayley_spread_t4 = 0;
};

/// Deadbeat Kronecker (n=3, k=4) against Cayley on Z_81 with S = {-1,0,1}
/// from one shared x0.
FigureResult replicate_figure(std::uint64_t seed, const std::filesystem::path& out_dir,
                              Index steps = 30);

void write_trajectory_csv(std::ostream& os, const Trajectory& tr);
void write_disagreement_csv(std::ostream& os, const Trajectory& tr);

}  // namespace kronsensus
