#include "kronsensus/spectral.hpp"

#include <ostream>

#include "kronsensus/lqr.hpp"
#include "kronsensus/matrix_io.hpp"
#include "kronsensus/parallel.hpp"

namespace kronsensus {

SpectrumReport spectrum_report(std::vector<Complex> eigenvalues, SpectrumMethod method,
                               double residual) {
  SpectrumReport r;
  r.method = method;
  r.residual = residual;
  std::size_t closest = eigenvalues.size();
  double closest_distance = std::numeric_limits<double>::infinity();
  int near_one = 0;
  for (std::size_t i = 0; i < eigenvalues.size(); ++i) {
    const double d = std::abs(eigenvalues[i] - Complex(1.0, 0.0));
    if (d <= tol::kEigenvalue) ++near_one;
    if (d < closest_distance) {
      closest_distance = d;
      closest = i;
    }
  }
  if (near_one > 1) {
    r.dim_ker_flag = true;
    r.ess_radius = 1.0;
  } else {
    for (std::size_t i = 0; i < eigenvalues.size(); ++i) {
      if (near_one == 1 && i == closest) continue;
      r.ess_radius = std::max(r.ess_radius, std::abs(eigenvalues[i]));
    }
  }
  r.eigenvalues = std::move(eigenvalues);
  return r;
}

SpectrumReport essential_spectral_radius(const MatrixXd& m, const Limits& limits) {
  auto spec = eigenvalues(m, limits);
  return spectrum_report(std::move(spec.eigenvalues), SpectrumMethod::NumericQR, spec.residual);
}

SpectrumReport essential_spectral_radius(const Strategy& s) {
  return spectrum_report(s.spectrum(), s.spectrum_method(), s.spectrum_residual());
}

double kron_ess_radius(const MatrixXd& a, int k) {
  if (k < 1) throw DomainError("kron_ess_radius: k must be >= 1");
  if (a.rows() != a.cols()) throw DomainError("kron_ess_radius: seed must be square");
  const auto spec = seed_eigenvalues(a);
  const auto report = validate_consensus(a, spec.eigenvalues);
  if (!report.solves_consensus()) throw DomainError("kron_ess_radius: seed fails " + report.failure());
  const double rho = spectrum_report(spec.eigenvalues, SpectrumMethod::NumericQR).ess_radius;
  return k == 1 ? rho : std::pow(rho, 1.0 / k);
}

Spectrum<double> cayley_spectrum_dft(const AbelianGroup& group, const Generator& pi) {
  Spectrum<double> out;
  out.eigenvalues = character_sums(group, pi);
  return out;
}

Generator matched_cayley_generator(Index n) {
  if (n < 1) throw DomainError("matched_cayley_generator: n must be >= 1");
  const Index lo = -((n - 1) / 2);
  std::vector<GroupElement> support;
  for (Index g = lo; g < lo + n; ++g) support.push_back({g});
  return uniform_generator(support);
}

std::vector<ComparisonRow> compare_families(Index n, const std::vector<int>& k_range,
                                            const ComparisonOptions& options) {
  if (n < 2) throw DomainError("compare_families: n must be >= 2");
  const std::size_t per_k = options.seed ? 3 : 2;
  std::vector<ComparisonRow> rows(k_range.size() * per_k);
  const MatrixXd deadbeat = deadbeat_seed(n);
  parallel_for(k_range.size(), options.threads, [&](std::size_t idx) {
    const int k = k_range[idx];
    if (k < 1) throw DomainError("compare_families: k must be >= 1");
    const Index N = checked_pow(n, k, Limits{}.max_strategy_dim);
    std::size_t slot = idx * per_k;

    auto kron_row = [&](const MatrixXd& a, const char* family) {
      const Strategy s = block_kron_strategy(a, k);
      ComparisonRow row{family, N, n, k, s.nu(), essential_spectral_radius(s).ess_radius,
                        SpectrumMethod::KroneckerClosedForm, std::nullopt, std::nullopt};
      if (options.gamma) {
        row.j = j1_exact(s).value + *options.gamma * j2_exact(s).value;
      }
      return row;
    };
    rows[slot++] = kron_row(deadbeat, "kronecker-deadbeat");
    if (options.seed) rows[slot++] = kron_row(*options.seed, "kronecker-seed");

    const Strategy c = cayley_strategy(AbelianGroup({N}), matched_cayley_generator(n));
    ComparisonRow row{"cayley", N, n, k, c.nu(), essential_spectral_radius(c).ess_radius,
                      SpectrumMethod::CirculantDFT, std::nullopt, std::nullopt};
    if (row.nu > 1) {
      row.witness = (1.0 - row.ess_radius) * std::pow(static_cast<double>(N), 2.0 / (row.nu - 1));
    }
    if (options.gamma) row.j = j1_exact(c).value + *options.gamma * j2_exact(c).value;
    rows[slot] = row;
  });
  return rows;
}

void write_comparison_csv(std::ostream& os, const std::vector<ComparisonRow>& rows) {
  os << "family,N,n,k,nu,ess_radius,method\n";
  for (const auto& r : rows) {
    os << r.family << ',' << r.N << ',' << r.n << ',' << r.k << ',' << r.nu << ','
       << format_double(r.ess_radius) << ',' << to_string(r.method) << '\n';
  }
}

TrendFit fit_kronecker_trend(const MatrixXd& a, const std::vector<int>& ks) {
  if (ks.size() < 2) throw DomainError("fit_kronecker_trend: need at least two exponents");
  TrendFit fit;
  fit.ks = ks;
  Eigen::MatrixXd design(static_cast<Index>(ks.size()), 2);
  Eigen::VectorXd rhs(static_cast<Index>(ks.size()));
  for (std::size_t i = 0; i < ks.size(); ++i) {
    const double rho = kron_ess_radius(a, ks[i]);
    if (!(rho > 0.0 && rho < 1.0)) throw DomainError("fit_kronecker_trend: need 0 < rho(A) < 1");
    fit.radii.push_back(rho);
    design(static_cast<Index>(i), 0) = 1.0;
    design(static_cast<Index>(i), 1) = std::log(static_cast<double>(ks[i]));
    rhs(static_cast<Index>(i)) = std::log(1.0 - rho);
  }
  const Eigen::Vector2d coef = design.colPivHouseholderQr().solve(rhs);
  fit.mu = std::exp(coef(0));
  fit.slope = coef(1);
  return fit;
}

}  // namespace kronsensus
