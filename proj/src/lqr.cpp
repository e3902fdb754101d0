#include "kronsensus/lqr.hpp"

#include <limits>
#include <ostream>

#include "json.hpp"
#include "kronsensus/eigenvalues.hpp"
#include "kronsensus/matrix_io.hpp"
#include "kronsensus/parallel.hpp"
#include "kronsensus/random.hpp"
#include "kronsensus/spectral.hpp"

namespace kronsensus {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Spectral data a series needs before it can be summed.
struct SeriesSetup {
  double rho = 0;
  int k_hint = 1;
};

SeriesSetup series_setup(const Strategy& s) {
  const auto& v = s.validation();
  if (!v.row_sums_ok || !v.col_sums_ok) {
    throw DomainError("cost undefined: strategy fails " + v.failure());
  }
  const auto report = essential_spectral_radius(s);
  if (!v.one_simple || report.ess_radius >= 1.0) {
    throw DivergenceError("cost series diverges: essential spectral radius " +
                          format_double(report.ess_radius) + " >= 1");
  }
  SeriesSetup setup;
  setup.rho = report.ess_radius;
  if (s.family() == Family::BlockKronecker) {
    setup.k_hint = s.k();
  } else {
    setup.k_hint = std::max(1, min_steps_bound(s.dimension(), std::max<Index>(s.nu(), 2)));
  }
  return setup;
}

// Sums term(t) for t = 0, 1, ... with the truncation rule
// t >= max(4k, log(rel_tol)/log(rho^2)) and a geometric tail below rel_tol * sum.
template <typename Term>
SeriesResult sum_series(Term&& term, const SeriesSetup& setup, const SeriesOptions& options) {
  const double r2 = setup.rho * setup.rho;
  std::uint64_t t_min = 4 * static_cast<std::uint64_t>(std::max(setup.k_hint, 1));
  if (r2 > 0.0) {
    const double need = std::ceil(std::log(options.rel_tol) / std::log(r2));
    if (need > static_cast<double>(t_min)) {
      t_min = need >= static_cast<double>(options.max_terms) ? options.max_terms
                                                             : static_cast<std::uint64_t>(need);
    }
  }
  const double ratio = r2 / (1.0 - r2);
  SeriesResult out;
  double last = 0;
  for (std::uint64_t t = 0; t < options.max_terms; ++t) {
    last = term(t);
    out.value += last;
    out.terms = t + 1;
    if (out.terms >= t_min) {
      const double tail = last * ratio;
      const double budget = options.rel_tol * out.value;
      if (tail <= budget && last <= budget) break;
    }
  }
  out.tail_bound = std::abs(last) * ratio;
  return out;
}

// Powers D^t of D = M - E, starting from D^0 = I - E.
class DeviationPowers {
 public:
  explicit DeviationPowers(const MatrixXd& m)
      : d_(m - averaging_matrix(m.rows())),
        current_(MatrixXd::Identity(m.rows(), m.rows()) - averaging_matrix(m.rows())),
        next_(d_) {}

  const MatrixXd& current() const { return current_; }
  const MatrixXd& next() const { return next_; }
  void advance() {
    current_.swap(next_);
    next_.noalias() = d_ * current_;
  }

 private:
  MatrixXd d_;
  MatrixXd current_;
  MatrixXd next_;
};

// tau(i) = ||D^i||_F^2 and cross(i) = <D^i, D^(i+1)>_F for the seed, on demand.
class SeedPowers {
 public:
  explicit SeedPowers(const MatrixXd& a) : powers_(a) {}

  double tau(std::uint64_t i) {
    extend(i);
    return tau_[i];
  }
  double cross(std::uint64_t i) {
    extend(i);
    return cross_[i];
  }

 private:
  void extend(std::uint64_t i) {
    while (tau_.size() <= i) {
      tau_.push_back(powers_.current().squaredNorm());
      cross_.push_back(powers_.current().cwiseProduct(powers_.next()).sum());
      powers_.advance();
    }
  }

  DeviationPowers powers_;
  std::vector<double> tau_;
  std::vector<double> cross_;
};

// Tr((M^T)^t M^t) - 1 for M = block Kronecker of the seed.
double kron_excess(SeedPowers& seed, int k, std::uint64_t t) {
  const std::uint64_t r = t / static_cast<std::uint64_t>(k);
  const int s = static_cast<int>(t % static_cast<std::uint64_t>(k));
  double log_trace = (k - s) * std::log1p(seed.tau(r));
  if (s > 0) log_trace += s * std::log1p(seed.tau(r + 1));
  return std::expm1(log_trace);
}

bool seed_is_normal(const Strategy& s) {
  return s.family() == Family::BlockKronecker && s.seed() && is_normal(*s.seed());
}

}  // namespace

std::vector<SeriesTerm> trace_series(const MatrixXd& m, std::uint64_t count) {
  if (m.rows() != m.cols()) throw DomainError("trace_series: matrix must be square");
  std::vector<SeriesTerm> out;
  MatrixXd p = MatrixXd::Identity(m.rows(), m.cols());
  MatrixXd q = m;
  for (std::uint64_t t = 0; t < count; ++t) {
    out.push_back({t, p.squaredNorm(), p.cwiseProduct(q).sum()});
    p.swap(q);
    q.noalias() = m * p;
  }
  return out;
}

std::vector<SeriesTerm> kron_trace_series(const MatrixXd& a, int k, std::uint64_t count) {
  if (a.rows() != a.cols()) throw DomainError("kron_trace_series: seed must be square");
  if (k < 1) throw DomainError("kron_trace_series: k must be >= 1");
  std::vector<double> gram_traces;  // Tr((A^T)^r A^r)
  std::vector<double> cross;        // Tr((A^T)^t A^(t+1))
  MatrixXd p = MatrixXd::Identity(a.rows(), a.cols());
  MatrixXd q = a;
  for (std::uint64_t t = 0; t <= count; ++t) {
    gram_traces.push_back(p.squaredNorm());
    cross.push_back(p.cwiseProduct(q).sum());
    p.swap(q);
    q.noalias() = a * p;
  }
  std::vector<SeriesTerm> out;
  for (std::uint64_t t = 0; t < count; ++t) {
    const std::uint64_t r = t / static_cast<std::uint64_t>(k);
    const int s = static_cast<int>(t % static_cast<std::uint64_t>(k));
    const double tr = std::pow(gram_traces[r], k - s) * std::pow(gram_traces[r + 1], s);
    out.push_back({t, tr, cross[t]});
  }
  return out;
}

SeriesResult j1_exact(const MatrixXd& m, const SeriesOptions& options) {
  return j1_exact(custom_strategy(m), options);
}

SeriesResult j2_exact(const MatrixXd& m, const SeriesOptions& options) {
  return j2_exact(custom_strategy(m), options);
}

SeriesResult j1_exact(const Strategy& s, const SeriesOptions& options) {
  const SeriesSetup setup = series_setup(s);
  if (s.family() == Family::BlockKronecker && s.seed()) {
    SeedPowers seed(*s.seed());
    return sum_series([&](std::uint64_t t) { return kron_excess(seed, s.k(), t); }, setup, options);
  }
  DeviationPowers powers(s.matrix());
  return sum_series(
      [&](std::uint64_t t) {
        if (t > 0) powers.advance();
        return powers.current().squaredNorm();
      },
      setup, options);
}

SeriesResult j2_exact(const Strategy& s, const SeriesOptions& options) {
  const SeriesSetup setup = series_setup(s);
  if (seed_is_normal(s)) {
    SeedPowers seed(*s.seed());
    return sum_series(
        [&](std::uint64_t t) {
          const double term = kron_excess(seed, s.k(), t + 1) + kron_excess(seed, s.k(), t) -
                              2.0 * seed.cross(t);
          return std::max(term, 0.0);
        },
        setup, options);
  }
  DeviationPowers powers(s.matrix());
  return sum_series(
      [&](std::uint64_t t) {
        if (t > 0) powers.advance();
        return (powers.next() - powers.current()).squaredNorm();
      },
      setup, options);
}

Bounds j1_bounds(const MatrixXd& a, int k) {
  if (k < 1) throw DomainError("j1_bounds: k must be >= 1");
  if (a.rows() != a.cols()) throw DomainError("j1_bounds: seed must be square");
  if (!is_normal(a)) throw DomainError("j1_bounds: seed is not normal");
  const auto spec = eigenvalues(a);
  const auto report = validate_consensus(a, spec.eigenvalues);
  if (!report.solves_consensus()) throw DomainError("j1_bounds: seed fails " + report.failure());
  const double rho = spectrum_report(spec.eigenvalues, SpectrumMethod::NumericQR).ess_radius;
  const Index n = a.rows();
  const double big_n = static_cast<double>(checked_pow(n, k));
  const double tr = a.squaredNorm();
  const double q = tr / static_cast<double>(n);
  // (1 - q^k)/(1 - q) as a finite geometric sum, which stays defined at q = 1.
  double geometric = 0;
  double power = 1;
  for (int i = 0; i < k; ++i) {
    geometric += power;
    power *= q;
  }
  Bounds b;
  b.lower = big_n * geometric - k;
  b.upper = b.lower + k / (1.0 - rho * rho) * (tr - 1.0);
  return b;
}

Bounds j2_bounds(const MatrixXd& a, int k, double j1) {
  if (!is_normal(a)) throw DomainError("j2_bounds: seed is not normal");
  const auto spec = eigenvalues(a);
  const double big_n = static_cast<double>(checked_pow(a.rows(), k));
  // Drop the eigenvalue closest to 1.
  std::size_t closest = 0;
  for (std::size_t i = 1; i < spec.eigenvalues.size(); ++i) {
    if (std::abs(spec.eigenvalues[i] - 1.0) < std::abs(spec.eigenvalues[closest] - 1.0)) closest = i;
  }
  double sum = 0;
  for (std::size_t i = 0; i < spec.eigenvalues.size(); ++i) {
    if (i == closest) continue;
    sum += 1.0 / (1.0 - std::norm(spec.eigenvalues[i]));
  }
  return {2.0 * j1 - big_n - sum, 2.0 * j1 - big_n};
}

double j_closed_form_deadbeat(Index n, int k, double gamma) {
  if (n < 2) throw DomainError("j_closed_form_deadbeat: n must be >= 2");
  if (k < 1) throw DomainError("j_closed_form_deadbeat: k must be >= 1");
  const double big_n = static_cast<double>(checked_pow(n, k));
  const double coefficient = (1.0 - 1.0 / big_n) / (1.0 - 1.0 / static_cast<double>(n));
  return big_n * ((1.0 + 2.0 * gamma) * coefficient - gamma);
}

double j_riccati_unconstrained(Index n_agents, double gamma) {
  if (gamma < 0) throw DomainError("j_riccati_unconstrained: gamma must be >= 0");
  if (n_agents < 1) throw DomainError("j_riccati_unconstrained: need at least one agent");
  return static_cast<double>(n_agents) * (1.0 + std::sqrt(1.0 + 4.0 * gamma)) / 2.0;
}

MonteCarloResult j_monte_carlo(const MatrixXd& m, double gamma, std::int64_t trials,
                               std::int64_t horizon, std::uint64_t seed,
                               const MonteCarloOptions& options) {
  if (trials < 1) throw DomainError("j_monte_carlo: trials must be >= 1");
  if (horizon < 0) throw DomainError("j_monte_carlo: horizon must be >= 0");
  if (gamma < 0) throw DomainError("j_monte_carlo: gamma must be >= 0");
  const SeriesSetup setup = series_setup(custom_strategy(m));
  const Index dim = m.rows();
  const double half_width = std::sqrt(3.0);

  struct Sample {
    double j1 = 0;
    double j2 = 0;
    double residual = 0;
  };
  std::vector<Sample> samples(static_cast<std::size_t>(trials));
  parallel_for(samples.size(), options.threads, [&](std::size_t i) {
    Rng rng(seed, i);
    VectorXd x(dim);
    for (Index p = 0; p < dim; ++p) {
      x(p) = options.distribution == InitialDistribution::Normal ? rng.normal()
                                                                 : rng.uniform(-half_width, half_width);
    }
    const double alpha = x.mean();
    VectorXd next(dim);
    Sample sample;
    for (std::int64_t t = 0; t < horizon; ++t) {
      sample.j1 += (x.array() - alpha).matrix().squaredNorm();
      next.noalias() = m * x;
      sample.j2 += (next - x).squaredNorm();
      x.swap(next);
    }
    sample.residual = (x.array() - alpha).matrix().squaredNorm();
    samples[i] = sample;
  });

  MonteCarloResult out;
  double sum = 0;
  double residual = 0;
  for (const auto& s : samples) {
    sum += s.j1 + gamma * s.j2;
    out.j1 += s.j1;
    out.j2 += s.j2;
    residual += s.residual;
  }
  const double count = static_cast<double>(trials);
  out.estimate = sum / count;
  out.j1 /= count;
  out.j2 /= count;
  double sq = 0;
  for (const auto& s : samples) {
    const double d = s.j1 + gamma * s.j2 - out.estimate;
    sq += d * d;
  }
  out.std_error = trials > 1 ? std::sqrt(sq / (count - 1.0) / count) : 0.0;
  const double step_gain = (m - MatrixXd::Identity(dim, dim)).squaredNorm();
  out.tail_estimate = residual / count * (1.0 + gamma * step_gain) / (1.0 - setup.rho * setup.rho);
  out.horizon_ok = out.tail_estimate <= out.std_error;
  return out;
}

std::string to_string(CostMethod method) {
  switch (method) {
    case CostMethod::ExactSeries: return "ExactSeries";
    case CostMethod::ClosedForm: return "ClosedForm";
    case CostMethod::MonteCarlo: return "MonteCarlo";
  }
  return "ExactSeries";
}

CostMethod parse_cost_method(const std::string& text) {
  if (text == "series" || text == "ExactSeries") return CostMethod::ExactSeries;
  if (text == "closed-form" || text == "ClosedForm") return CostMethod::ClosedForm;
  if (text == "monte-carlo" || text == "MonteCarlo") return CostMethod::MonteCarlo;
  throw DomainError("unknown cost method '" + text + "' (expected series, closed-form or monte-carlo)");
}

CostReport cost_report(const Strategy& s, double gamma, CostMethod method, const CostOptions& options) {
  if (gamma < 0) throw DomainError("cost_report: gamma must be >= 0");
  CostReport r;
  r.gamma = gamma;
  r.method = method;
  r.j1_lower = r.j1_upper = r.j2_lower = r.j2_upper = kNaN;
  const bool normal_kron = seed_is_normal(s);

  switch (method) {
    case CostMethod::ExactSeries: {
      const auto j1 = j1_exact(s, options.series);
      const auto j2 = j2_exact(s, options.series);
      r.j1 = j1.value;
      r.j2 = j2.value;
      r.truncation_t = std::max(j1.terms, j2.terms);
      r.tail_bound = j1.tail_bound + gamma * j2.tail_bound;
      break;
    }
    case CostMethod::ClosedForm: {
      if (s.family() != Family::BlockKronecker || !s.seed() ||
          !approx_equal(*s.seed(), averaging_matrix(s.n()), tol::kZero)) {
        throw DomainError("closed-form cost is only available for the deadbeat block Kronecker strategy");
      }
      r.j1 = j1_bounds(*s.seed(), s.k()).lower;
      r.j2 = 2.0 * r.j1 - static_cast<double>(s.dimension() - 1);
      r.truncation_t = static_cast<std::uint64_t>(s.k());
      break;
    }
    case CostMethod::MonteCarlo: {
      std::int64_t horizon = options.horizon;
      if (horizon <= 0) {
        const SeriesSetup setup = series_setup(s);
        const double r2 = setup.rho * setup.rho;
        double need = 4.0 * setup.k_hint;
        if (r2 > 0.0) need = std::max(need, std::ceil(std::log(1e-8) / std::log(r2)));
        horizon = static_cast<std::int64_t>(std::min(need, 1e6));
      }
      const auto mc = j_monte_carlo(s.matrix(), gamma, options.trials, horizon, options.seed,
                                    options.monte_carlo);
      r.j1 = mc.j1;
      r.j2 = mc.j2;
      r.std_error = mc.std_error;
      r.truncation_t = static_cast<std::uint64_t>(horizon);
      r.tail_bound = mc.tail_estimate;
      break;
    }
  }
  r.j = r.j1 + gamma * r.j2;
  if (normal_kron) {
    const auto b1 = j1_bounds(*s.seed(), s.k());
    const auto b2 = j2_bounds(*s.seed(), s.k(), r.j1);
    r.j1_lower = b1.lower;
    r.j1_upper = b1.upper;
    r.j2_lower = b2.lower;
    r.j2_upper = b2.upper;
  }
  return r;
}

std::string cost_report_json(const CostReport& r, int indent) {
  nlohmann::ordered_json j;
  auto num = [](double v) { return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(); };
  j["schema"] = "kronsensus/1";
  j["gamma"] = r.gamma;
  j["j1"] = num(r.j1);
  j["j2"] = num(r.j2);
  j["j"] = num(r.j);
  j["j1_lower"] = num(r.j1_lower);
  j["j1_upper"] = num(r.j1_upper);
  j["j2_lower"] = num(r.j2_lower);
  j["j2_upper"] = num(r.j2_upper);
  j["method"] = to_string(r.method);
  j["truncation_t"] = r.truncation_t;
  j["tail_bound"] = num(r.tail_bound);
  if (r.method == CostMethod::MonteCarlo) j["std_error"] = r.std_error;
  return j.dump(indent);
}

void write_gamma_sweep_csv(std::ostream& os, const std::vector<CostReport>& reports) {
  os << "gamma,j1,j2,j,j1_lower,j1_upper\n";
  for (const auto& r : reports) {
    os << format_double(r.gamma) << ',' << format_double(r.j1) << ',' << format_double(r.j2) << ','
       << format_double(r.j) << ',' << format_double(r.j1_lower) << ',' << format_double(r.j1_upper)
       << '\n';
  }
}

}  // namespace kronsensus
