#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "kronsensus/eigenvalues.hpp"
#include "kronsensus/group.hpp"
#include "kronsensus/strategies.hpp"

namespace kronsensus {

struct SpectrumReport {
  std::vector<Complex> eigenvalues;
  double ess_radius = 0;
  SpectrumMethod method = SpectrumMethod::NumericQR;
  // More than one eigenvalue clusters at 1; ess_radius is then 1.
  bool dim_ker_flag = false;
  double residual = 0;
};

/// max |lambda| over the spectrum with one copy of the eigenvalue 1 removed.
SpectrumReport spectrum_report(std::vector<Complex> eigenvalues, SpectrumMethod method,
                               double residual = 0);
SpectrumReport essential_spectral_radius(const MatrixXd& m, const Limits& limits = {});
SpectrumReport essential_spectral_radius(const Strategy& s);

/// rho(A)^(1/k), without forming M. DomainError if a fails (A)-(C).
double kron_ess_radius(const MatrixXd& a, int k);
Spectrum<double> cayley_spectrum_dft(const AbelianGroup& group, const Generator& pi);

// Z_N generator uniform on {-floor((n-1)/2), ..., ceil((n-1)/2)}.
Generator matched_cayley_generator(Index n);

struct ComparisonOptions {
  std::optional<MatrixXd> seed;   // extra Kronecker row from this seed
  std::optional<double> gamma;    // adds LQR costs
  int threads = 1;
};

struct ComparisonRow {
  std::string family;
  Index N = 0;
  Index n = 0;
  int k = 0;
  Index nu = 0;
  double ess_radius = 0;
  SpectrumMethod method = SpectrumMethod::NumericQR;
  // (1 - rho) * N^(2/(nu-1)), Cayley rows only.
  std::optional<double> witness;
  std::optional<double> j;
};

std::vector<ComparisonRow> compare_families(Index n, const std::vector<int>& k_range,
                                            const ComparisonOptions& options = {});
void write_comparison_csv(std::ostream& os, const std::vector<ComparisonRow>& rows);

struct TrendFit {
  // log(1 - rho_k) against log k; 1 - mu/k behaviour means slope -1.
  double slope = 0;
  double mu = 0;
  std::vector<int> ks;
  std::vector<double> radii;
};

TrendFit fit_kronecker_trend(const MatrixXd& a, const std::vector<int>& ks);

}  // namespace kronsensus
