#include "kronsensus/sim.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>

#include "kronsensus/matrix_io.hpp"
#include "kronsensus/parallel.hpp"
#include "kronsensus/random.hpp"
#include "kronsensus/spectral.hpp"

namespace kronsensus {

namespace {

double spread(const VectorXd& x) { return x.size() == 0 ? 0.0 : x.maxCoeff() - x.minCoeff(); }

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  return os;
}

}  // namespace

Trajectory simulate(const MatrixXd& m, const VectorXd& x0, Index t_max,
                    const SimulationOptions& options) {
  if (m.rows() != m.cols()) throw DomainError("simulate: matrix must be square");
  if (x0.size() != m.rows()) {
    throw DomainError("simulate: initial state has length " + std::to_string(x0.size()) +
                      ", strategy dimension is " + std::to_string(m.rows()));
  }
  if (t_max < 0) throw DomainError("simulate: t_max must be >= 0");
  if (!x0.allFinite()) throw DomainError("simulate: initial state has non-finite entries");

  Trajectory tr;
  const Index dim = m.rows();
  tr.target = dim == 0 ? 0.0 : x0.mean();
  tr.threshold = options.threshold.value_or(1e-9 * (dim == 0 ? 0.0 : x0.cwiseAbs().maxCoeff()));
  const bool store = dim * (t_max + 1) <= options.max_stored_entries;

  VectorXd x = x0;
  VectorXd next(dim);
  for (Index t = 0;; ++t) {
    const VectorXd delta = x.array() - tr.target;
    const double err_inf = dim == 0 ? 0.0 : delta.cwiseAbs().maxCoeff();
    tr.disagreement.push_back(delta.norm());
    tr.disagreement_inf.push_back(err_inf);
    if (store) tr.states.push_back(x);
    if (!tr.convergence.converged && err_inf <= tr.threshold) {
      tr.convergence.converged = true;
      tr.convergence.steps = t;
    }
    tr.convergence.final_error = err_inf;
    if (t == t_max || (tr.convergence.converged && options.stop_early)) break;
    next.noalias() = m * x;
    x.swap(next);
  }
  return tr;
}

Trajectory simulate(const Strategy& s, const VectorXd& x0, Index t_max,
                    const SimulationOptions& options) {
  return simulate(s.matrix(), x0, t_max, options);
}

VectorXd uniform_initial_state(Index dim, std::uint64_t seed, std::uint64_t stream,
                               double half_width) {
  Rng rng(seed, stream);
  VectorXd x(dim);
  for (Index i = 0; i < dim; ++i) x(i) = rng.uniform(-half_width, half_width);
  return x;
}

ConvergenceStats convergence_steps(const Strategy& s, Index trials, double threshold,
                                   std::uint64_t seed, Index t_max, int threads) {
  if (!s.validation().solves_consensus()) {
    throw DomainError("convergence_steps: strategy fails " + s.validation().failure());
  }
  if (trials < 1) throw DomainError("convergence_steps: trials must be >= 1");
  if (!(threshold >= 0.0)) throw DomainError("convergence_steps: threshold must be >= 0");
  ConvergenceStats stats;
  stats.trials.resize(static_cast<std::size_t>(trials));
  SimulationOptions options;
  options.threshold = threshold;
  options.max_stored_entries = 0;
  parallel_for(stats.trials.size(), threads, [&](std::size_t i) {
    const VectorXd x0 = uniform_initial_state(s.dimension(), seed, i);
    stats.trials[i] = simulate(s, x0, t_max, options).convergence;
  });

  std::vector<Index> steps;
  for (const auto& r : stats.trials) {
    if (r.converged) {
      steps.push_back(*r.steps);
    } else {
      ++stats.unconverged;
    }
  }
  if (steps.empty()) return stats;
  std::sort(steps.begin(), steps.end());
  stats.min_steps = steps.front();
  stats.max_steps = steps.back();
  const std::size_t mid = steps.size() / 2;
  stats.median_steps = steps.size() % 2 == 1
                           ? static_cast<double>(steps[mid])
                           : 0.5 * static_cast<double>(steps[mid - 1] + steps[mid]);
  return stats;
}

FigureResult replicate_figure(std::uint64_t seed, const std::filesystem::path& out_dir, Index steps) {
  if (steps < 4) throw DomainError("replicate_figure: need at least 4 steps");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());

  const Strategy kron = block_kron_strategy(deadbeat_seed(3), 4);
  const Strategy cayley = cayley_strategy(AbelianGroup({81}), matched_cayley_generator(3));
  const VectorXd x0 = uniform_initial_state(81, seed);
  SimulationOptions options;
  options.stop_early = false;
  const Trajectory kt = simulate(kron, x0, steps, options);
  const Trajectory ct = simulate(cayley, x0, steps, options);

  FigureResult out;
  out.kronecker_csv = out_dir / "kronecker_trajectory.csv";
  out.cayley_csv = out_dir / "cayley_trajectory.csv";
  out.kronecker_disagreement_csv = out_dir / "kronecker_disagreement.csv";
  out.cayley_disagreement_csv = out_dir / "cayley_disagreement.csv";
  {
    auto os = open_out(out.kronecker_csv);
    write_trajectory_csv(os, kt);
  }
  {
    auto os = open_out(out.cayley_csv);
    write_trajectory_csv(os, ct);
  }
  {
    auto os = open_out(out.kronecker_disagreement_csv);
    write_disagreement_csv(os, kt);
  }
  {
    auto os = open_out(out.cayley_disagreement_csv);
    write_disagreement_csv(os, ct);
  }
  out.kronecker_spread_t4 = spread(kt.states[4]);
  out.cayley_spread_t4 = spread(ct.states[4]);
  return out;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& tr) {
  if (tr.states.empty()) throw IoError("trajectory has no stored states");
  os << 't';
  for (Index i = 0; i < tr.states.front().size(); ++i) os << ",agent_" << i;
  os << '\n';
  for (std::size_t t = 0; t < tr.states.size(); ++t) {
    os << t;
    for (Index i = 0; i < tr.states[t].size(); ++i) os << ',' << format_double(tr.states[t](i));
    os << '\n';
  }
  if (!os) throw IoError("trajectory write failed");
}

void write_disagreement_csv(std::ostream& os, const Trajectory& tr) {
  os << "t,norm2,norminf\n";
  for (std::size_t t = 0; t < tr.disagreement.size(); ++t) {
    os << t << ',' << format_double(tr.disagreement[t]) << ',' << format_double(tr.disagreement_inf[t])
       << '\n';
  }
  if (!os) throw IoError("disagreement write failed");
}

}  // namespace kronsensus
