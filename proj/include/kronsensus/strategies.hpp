#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "kronsensus/eigenvalues.hpp"
#include "kronsensus/graphs.hpp"
#include "kronsensus/group.hpp"
#include "kronsensus/matlin.hpp"

namespace kronsensus {

enum class Family { BlockKronecker, Cayley, Custom };
enum class SpectrumMethod { KroneckerClosedForm, CirculantDFT, NumericQR };

std::string to_string(Family family);
std::string to_string(SpectrumMethod method);
Family parse_family(const std::string& text);

struct ValidationDetails {
  double max_row_sum_error = 0;
  double max_col_sum_error = 0;
  int eigenvalues_near_one = 0;
  // Largest modulus after removing the eigenvalue closest to 1.
  double max_other_modulus = 0;
  Index max_row_nonzeros = 0;
  Index max_col_nonzeros = 0;
};

struct ValidationReport {
  bool row_sums_ok = false;
  bool col_sums_ok = false;
  bool one_simple = false;
  bool spectrum_stable = false;
  // Largest number of nonzeros in a row.
  Index degree_bound = 0;
  std::optional<Index> nu_limit;
  bool degree_ok = true;
  bool nonnegative = false;
  ValidationDetails details;

  bool solves_consensus() const { return row_sums_ok && col_sums_ok && one_simple && spectrum_stable; }
  bool passes() const { return solves_consensus() && degree_ok; }
  // Empty when passes().
  std::string failure() const;
};

class ValidationError : public DomainError {
 public:
  ValidationError(const std::string& what, ValidationReport report)
      : DomainError(what), report_(std::move(report)) {}
  const ValidationReport& report() const { return report_; }

 private:
  ValidationReport report_;
};

ValidationReport validate_consensus(const MatrixXd& m, std::optional<Index> nu_limit = std::nullopt,
                                    const Limits& limits = {});
// Same checks with a precomputed spectrum of m.
ValidationReport validate_consensus(const MatrixXd& m, const std::vector<Complex>& spectrum,
                                    std::optional<Index> nu_limit = std::nullopt);

/// A consensus matrix (plays I+K) with its provenance and communication graph.
class Strategy {
 public:
  const MatrixXd& matrix() const { return matrix_; }
  Family family() const { return family_; }
  Index dimension() const { return matrix_.rows(); }
  // Seed dimension and Kronecker exponent; zero when not applicable.
  Index n() const { return n_; }
  int k() const { return k_; }
  Index nu() const { return validation_.degree_bound; }
  const DirectedGraph& comm_graph() const { return comm_graph_; }
  const ValidationReport& validation() const { return validation_; }
  const std::optional<MatrixXd>& seed() const { return seed_; }
  const std::optional<AbelianGroup>& group() const { return group_; }
  const Generator& generator() const { return generator_; }
  const std::vector<std::string>& warnings() const { return warnings_; }
  // Spectrum used for validation and how it was obtained.
  const std::vector<Complex>& spectrum() const { return spectrum_; }
  SpectrumMethod spectrum_method() const { return spectrum_method_; }
  double spectrum_residual() const { return spectrum_residual_; }

 private:
  friend Strategy block_kron_strategy(const MatrixXd&, int, const Limits&);
  friend Strategy cayley_strategy(const AbelianGroup&, const Generator&, const Limits&);
  friend Strategy custom_strategy(const MatrixXd&, std::optional<Index>, const Limits&);

  Strategy() = default;

  MatrixXd matrix_;
  Family family_ = Family::Custom;
  Index n_ = 0;
  int k_ = 0;
  DirectedGraph comm_graph_;
  ValidationReport validation_;
  std::optional<MatrixXd> seed_;
  std::optional<AbelianGroup> group_;
  Generator generator_;
  std::vector<std::string> warnings_;
  std::vector<Complex> spectrum_;
  SpectrumMethod spectrum_method_ = SpectrumMethod::NumericQR;
  double spectrum_residual_ = 0;
};

/// Row i*n^(k-1) + m of M holds a_i in columns m*n .. m*n+n-1.
MatrixXd block_kron_matrix(const MatrixXd& a, int k, const Limits& limits = {});
/// Throws ValidationError when the seed fails (A)-(C).
Strategy block_kron_strategy(const MatrixXd& a, int k, const Limits& limits = {});
/// Throws DomainError when the weights do not sum to 1.
Strategy cayley_strategy(const AbelianGroup& group, const Generator& pi, const Limits& limits = {});
Strategy custom_strategy(const MatrixXd& m, std::optional<Index> nu_limit = std::nullopt,
                         const Limits& limits = {});

/// Numeric eigenvalues of a seed with moduli below 64 eps ||a||_F set to 0;
/// the k-th roots in the block Kronecker spectrum would otherwise inflate noise.
Spectrum<double> seed_eigenvalues(const MatrixXd& a, const Limits& limits = {});

MatrixXd deadbeat_seed(Index n);
/// Smallest k with nu^k >= n_agents.
int min_steps_bound(Index n_agents, Index nu);

// JSON alongside a matrix text file. matrix_file is stored relative to the JSON.
void save_strategy(const Strategy& s, const std::filesystem::path& json_path,
                   const std::filesystem::path& matrix_path);
Strategy load_strategy(const std::filesystem::path& json_path, const Limits& limits = {});

}  // namespace kronsensus
