#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "kronsensus/strategies.hpp"

namespace kronsensus {

struct SeriesTerm {
  std::uint64_t t = 0;
  double tr_mtm = 0;    // Tr((M^T)^t M^t)
  double tr_cross = 0;  // Tr((M^T)^t M^(t+1))
};

struct SeriesOptions {
  double rel_tol = 1e-12;
  std::uint64_t max_terms = 1'000'000;
};

struct SeriesResult {
  double value = 0;
  // Geometric bound on the neglected tail.
  double tail_bound = 0;
  std::uint64_t terms = 0;
};

// Tr((M^T)^t M^t) and Tr((M^T)^t M^(t+1)) for t < count, from explicit powers.
std::vector<SeriesTerm> trace_series(const MatrixXd& m, std::uint64_t count);
// Same traces for M built from seed a: the first from the product formula,
// the cross trace from Tr((A^T)^t A^(t+1)), which needs a normal seed.
std::vector<SeriesTerm> kron_trace_series(const MatrixXd& a, int k, std::uint64_t count);

// J1 = sum_t ||M^t - E||_F^2; J2 = sum_t ||M^(t+1) - M^t||_F^2.
// DomainError if m fails (A), DivergenceError if rho >= 1.
SeriesResult j1_exact(const MatrixXd& m, const SeriesOptions& options = {});
SeriesResult j2_exact(const MatrixXd& m, const SeriesOptions& options = {});
// Block Kronecker strategies avoid powers of M.
SeriesResult j1_exact(const Strategy& s, const SeriesOptions& options = {});
SeriesResult j2_exact(const Strategy& s, const SeriesOptions& options = {});

struct Bounds {
  double lower = 0;
  double upper = 0;
};

/// J_L = N (1 - q^k)/(1 - q) - k with q = Tr(A^T A)/n, and
/// J_U = J_L + k/(1 - rho^2) (Tr(A^T A) - 1).
Bounds j1_bounds(const MatrixXd& a, int k);
/// [2 J1 - N - sum_i 1/(1 - |rho_i|^2), 2 J1 - N] over eigenvalues rho_i of a other than 1.
Bounds j2_bounds(const MatrixXd& a, int k, double j1);

/// N((1 + 2 gamma)(1 - 1/N)/(1 - 1/n) - gamma), N = n^k.
double j_closed_form_deadbeat(Index n, int k, double gamma);
/// N(1 + sqrt(1 + 4 gamma))/2.
double j_riccati_unconstrained(Index n_agents, double gamma);

enum class InitialDistribution { Normal, Uniform };

struct MonteCarloOptions {
  int threads = 1;
  InitialDistribution distribution = InitialDistribution::Normal;
};

struct MonteCarloResult {
  double estimate = 0;
  double std_error = 0;
  double j1 = 0;
  double j2 = 0;
  // Rough size of the cost beyond the horizon.
  double tail_estimate = 0;
  bool horizon_ok = true;
};

/// Sample mean of sum_{t<horizon} ||x(t) - x(inf)||^2 + gamma ||x(t+1) - x(t)||^2
/// with x(0) of unit covariance. Trial i draws from stream (seed, i).
MonteCarloResult j_monte_carlo(const MatrixXd& m, double gamma, std::int64_t trials,
                               std::int64_t horizon, std::uint64_t seed,
                               const MonteCarloOptions& options = {});

enum class CostMethod { ExactSeries, ClosedForm, MonteCarlo };
std::string to_string(CostMethod method);
CostMethod parse_cost_method(const std::string& text);

struct CostReport {
  double gamma = 0;
  double j1 = 0;
  double j2 = 0;
  double j = 0;
  // NaN when the bound preconditions do not hold.
  double j1_lower = 0;
  double j1_upper = 0;
  double j2_lower = 0;
  double j2_upper = 0;
  CostMethod method = CostMethod::ExactSeries;
  std::uint64_t truncation_t = 0;
  double tail_bound = 0;
  // MonteCarlo only.
  double std_error = 0;
};

struct CostOptions {
  SeriesOptions series;
  std::int64_t trials = 10'000;
  std::int64_t horizon = 0;  // 0 picks one from rho
  std::uint64_t seed = 0;
  MonteCarloOptions monte_carlo;
};

CostReport cost_report(const Strategy& s, double gamma, CostMethod method,
                       const CostOptions& options = {});
std::string cost_report_json(const CostReport& r, int indent = 2);
void write_gamma_sweep_csv(std::ostream& os, const std::vector<CostReport>& reports);

}  // namespace kronsensus
