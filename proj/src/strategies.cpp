#include "kronsensus/strategies.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "kronsensus/eigenvalues.hpp"
#include "kronsensus/matrix_io.hpp"

namespace kronsensus {

namespace {

using nlohmann::json;

constexpr const char* kSchema = "kronsensus/1";

double scaled_tol(const MatrixXd& m) { return tol::kCompare * std::max(1.0, inf_norm(m)); }

void check_square(const MatrixXd& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw DomainError(std::string(what) + ": matrix must be square and nonempty, got " +
                      std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
  if (!m.allFinite()) throw DomainError(std::string(what) + ": matrix has non-finite entries");
}

void fill_spectral_checks(ValidationReport& r, const std::vector<Complex>& spectrum) {
  std::size_t closest = spectrum.size();
  double closest_distance = std::numeric_limits<double>::infinity();
  int near_one = 0;
  for (std::size_t i = 0; i < spectrum.size(); ++i) {
    const double d = std::abs(spectrum[i] - Complex(1.0, 0.0));
    if (d <= tol::kEigenvalue) ++near_one;
    if (d < closest_distance) {
      closest_distance = d;
      closest = i;
    }
  }
  double other = 0;
  for (std::size_t i = 0; i < spectrum.size(); ++i) {
    if (i == closest && near_one > 0) continue;
    other = std::max(other, std::abs(spectrum[i]));
  }
  r.details.eigenvalues_near_one = near_one;
  r.details.max_other_modulus = other;
  r.one_simple = near_one == 1;
  r.spectrum_stable = near_one >= 1 && other < 1.0 - tol::kStable;
}

void fill_structural_checks(ValidationReport& r, const MatrixXd& m, std::optional<Index> nu_limit) {
  const double t = scaled_tol(m);
  r.details.max_row_sum_error = (m.rowwise().sum().array() - 1.0).abs().maxCoeff();
  r.details.max_col_sum_error = (m.colwise().sum().array() - 1.0).abs().maxCoeff();
  r.row_sums_ok = r.details.max_row_sum_error <= t;
  r.col_sums_ok = r.details.max_col_sum_error <= t;
  const auto nz = (m.array().abs() > tol::kZero).cast<Index>();
  r.details.max_row_nonzeros = nz.rowwise().sum().maxCoeff();
  r.details.max_col_nonzeros = nz.colwise().sum().maxCoeff();
  r.degree_bound = r.details.max_row_nonzeros;
  r.nu_limit = nu_limit;
  r.degree_ok = !nu_limit || r.degree_bound <= *nu_limit;
  r.nonnegative = (m.array() >= 0.0).all();
}

}  // namespace

std::string to_string(Family family) {
  switch (family) {
    case Family::BlockKronecker: return "kronecker";
    case Family::Cayley: return "cayley";
    case Family::Custom: return "custom";
  }
  return "custom";
}

std::string to_string(SpectrumMethod method) {
  switch (method) {
    case SpectrumMethod::KroneckerClosedForm: return "KroneckerClosedForm";
    case SpectrumMethod::CirculantDFT: return "CirculantDFT";
    case SpectrumMethod::NumericQR: return "NumericQR";
  }
  return "NumericQR";
}

Family parse_family(const std::string& text) {
  if (text == "kronecker") return Family::BlockKronecker;
  if (text == "cayley") return Family::Cayley;
  if (text == "custom") return Family::Custom;
  throw DomainError("unknown family '" + text + "' (expected kronecker, cayley or custom)");
}

std::string ValidationReport::failure() const {
  std::ostringstream os;
  auto add = [&os](const std::string& s) {
    if (os.tellp() > 0) os << "; ";
    os << s;
  };
  if (!row_sums_ok) add("(A) row sums differ from 1 by " + std::to_string(details.max_row_sum_error));
  if (!col_sums_ok) add("(A) column sums differ from 1 by " + std::to_string(details.max_col_sum_error));
  if (!one_simple) {
    add("(B) " + std::to_string(details.eigenvalues_near_one) + " eigenvalues at 1, expected exactly 1");
  }
  if (!spectrum_stable) {
    add("(C) remaining spectrum reaches modulus " + std::to_string(details.max_other_modulus));
  }
  if (!degree_ok) {
    add("(D) a row has " + std::to_string(degree_bound) + " nonzeros, limit " +
        std::to_string(nu_limit.value_or(0)));
  }
  return os.str();
}

ValidationReport validate_consensus(const MatrixXd& m, std::optional<Index> nu_limit,
                                    const Limits& limits) {
  check_square(m, "validate_consensus");
  const auto spec = eigenvalues(m, limits);
  return validate_consensus(m, spec.eigenvalues, nu_limit);
}

ValidationReport validate_consensus(const MatrixXd& m, const std::vector<Complex>& spectrum,
                                    std::optional<Index> nu_limit) {
  check_square(m, "validate_consensus");
  if (static_cast<Index>(spectrum.size()) != m.rows()) {
    throw DomainError("validate_consensus: spectrum size does not match the matrix");
  }
  ValidationReport r;
  fill_structural_checks(r, m, nu_limit);
  fill_spectral_checks(r, spectrum);
  return r;
}

MatrixXd block_kron_matrix(const MatrixXd& a, int k, const Limits& limits) {
  check_square(a, "block_kron_matrix");
  if (k < 1) throw DomainError("block_kron_matrix: k must be >= 1");
  const Index n = a.rows();
  const Index dim = n == 1 ? 1 : checked_pow(n, k, limits.max_strategy_dim);
  const Index stride = dim / n;
  MatrixXd m = MatrixXd::Zero(dim, dim);
  for (Index i = 0; i < n; ++i) {
    for (Index r = 0; r < stride; ++r) m.block(i * stride + r, r * n, 1, n) = a.row(i);
  }
  return m;
}

Strategy block_kron_strategy(const MatrixXd& a, int k, const Limits& limits) {
  check_square(a, "block_kron_strategy");
  const auto seed_spec = seed_eigenvalues(a, limits);
  const ValidationReport seed_report = validate_consensus(a, seed_spec.eigenvalues);
  if (!seed_report.solves_consensus()) {
    throw ValidationError("block_kron_strategy: seed fails " + seed_report.failure(), seed_report);
  }
  Strategy s;
  s.matrix_ = block_kron_matrix(a, k, limits);
  s.family_ = Family::BlockKronecker;
  s.n_ = a.rows();
  s.k_ = k;
  s.seed_ = a;
  s.spectrum_ = block_kron_spectrum(seed_spec.eigenvalues, k, limits);
  s.spectrum_method_ = SpectrumMethod::KroneckerClosedForm;
  s.spectrum_residual_ = seed_spec.residual;
  s.validation_ = validate_consensus(s.matrix_, s.spectrum_, a.rows());
  s.comm_graph_ = communication_graph(s.matrix_);
  return s;
}

Strategy cayley_strategy(const AbelianGroup& group, const Generator& pi, const Limits& limits) {
  if (pi.empty()) throw DomainError("cayley_strategy: empty generator");
  double total = 0;
  for (const auto& e : pi) total += e.weight;
  if (std::abs(total - 1.0) > tol::kCompare) {
    throw DomainError("cayley_strategy: generator weights sum to " + format_double(total) +
                      ", expected 1");
  }
  Strategy s;
  s.matrix_ = cayley_matrix(group, pi, limits);
  s.family_ = Family::Cayley;
  s.group_ = group;
  s.generator_ = pi;
  const auto weights = generator_weights(group, pi);
  if (std::abs(weights[0]) <= tol::kZero) {
    s.warnings_.push_back("0 is not in the support of the generator");
  }
  s.spectrum_ = character_sums(group, pi);
  s.spectrum_method_ = SpectrumMethod::CirculantDFT;
  s.validation_ = validate_consensus(s.matrix_, s.spectrum_);
  s.comm_graph_ = communication_graph(s.matrix_);
  return s;
}

Strategy custom_strategy(const MatrixXd& m, std::optional<Index> nu_limit, const Limits& limits) {
  check_square(m, "custom_strategy");
  if (m.rows() > limits.max_strategy_dim) throw SizeError("custom_strategy: matrix exceeds cap");
  const auto spec = eigenvalues(m, limits);
  Strategy s;
  s.matrix_ = m;
  s.family_ = Family::Custom;
  s.spectrum_ = spec.eigenvalues;
  s.spectrum_residual_ = spec.residual;
  s.validation_ = validate_consensus(m, s.spectrum_, nu_limit);
  s.comm_graph_ = communication_graph(m);
  return s;
}

Spectrum<double> seed_eigenvalues(const MatrixXd& a, const Limits& limits) {
  auto spec = eigenvalues(a, limits);
  const double floor = 64.0 * std::numeric_limits<double>::epsilon() * a.norm();
  for (auto& z : spec.eigenvalues) {
    if (std::abs(z) <= floor) z = 0.0;
  }
  return spec;
}

MatrixXd deadbeat_seed(Index n) {
  if (n < 2) throw DomainError("deadbeat_seed: n must be >= 2");
  return averaging_matrix(n);
}

int min_steps_bound(Index n_agents, Index nu) {
  if (nu < 2) throw DomainError("min_steps_bound: nu must be >= 2");
  if (n_agents < 1) throw DomainError("min_steps_bound: need at least one agent");
  int k = 0;
  Index reach = 1;
  while (reach < n_agents) {
    reach = reach > n_agents / nu ? n_agents : reach * nu;
    ++k;
  }
  return k;
}

void save_strategy(const Strategy& s, const std::filesystem::path& json_path,
                   const std::filesystem::path& matrix_path) {
  write_matrix(matrix_path, s.matrix());
  json j;
  j["schema"] = kSchema;
  j["family"] = to_string(s.family());
  j["n"] = s.n();
  j["k"] = s.k();
  j["nu"] = s.nu();
  j["dimension"] = s.dimension();
  const auto base = json_path.has_parent_path() ? json_path.parent_path() : std::filesystem::path(".");
  j["matrix_file"] = std::filesystem::relative(std::filesystem::absolute(matrix_path),
                                               std::filesystem::absolute(base))
                         .generic_string();
  if (s.group()) {
    j["group"] = s.group()->to_string();
    json gen = json::array();
    for (const auto& e : s.generator()) gen.push_back({{"element", e.element}, {"weight", e.weight}});
    j["generator"] = gen;
  }
  std::ofstream os(json_path);
  if (!os) throw IoError("cannot open " + json_path.string() + " for writing");
  os << j.dump(2) << '\n';
  if (!os) throw IoError("write failed for " + json_path.string());
}

Strategy load_strategy(const std::filesystem::path& json_path, const Limits& limits) {
  std::ifstream is(json_path);
  if (!is) throw IoError("cannot open " + json_path.string());
  json j;
  try {
    j = json::parse(is);
  } catch (const json::exception& e) {
    throw IoError("bad strategy JSON " + json_path.string() + ": " + e.what());
  }
  try {
    if (j.value("schema", "") != kSchema) throw IoError("unsupported strategy schema");
    const Family family = parse_family(j.at("family").get<std::string>());
    const auto base = json_path.has_parent_path() ? json_path.parent_path() : std::filesystem::path(".");
    const MatrixXd m = read_matrix(base / j.at("matrix_file").get<std::string>());
    Strategy s = [&] {
      switch (family) {
        case Family::BlockKronecker: {
          const Index n = j.at("n").get<Index>();
          const int k = j.at("k").get<int>();
          if (n < 1 || k < 1 || m.rows() != (n == 1 ? 1 : checked_pow(n, k, limits.max_strategy_dim))) {
            throw IoError("strategy n/k do not match the matrix dimension");
          }
          const Index stride = m.rows() / n;
          MatrixXd a(n, n);
          for (Index i = 0; i < n; ++i) a.row(i) = m.block(i * stride, 0, 1, n);
          return block_kron_strategy(a, k, limits);
        }
        case Family::Cayley: {
          const auto group = AbelianGroup::parse(j.at("group").get<std::string>());
          Generator pi;
          for (const auto& e : j.at("generator")) {
            pi.push_back({e.at("element").get<GroupElement>(), e.at("weight").get<double>()});
          }
          return cayley_strategy(group, pi, limits);
        }
        case Family::Custom:
          break;
      }
      return custom_strategy(m, std::nullopt, limits);
    }();
    if (s.matrix() != m) throw IoError("matrix file does not match the strategy description");
    return s;
  } catch (const json::exception& e) {
    throw IoError("bad strategy JSON " + json_path.string() + ": " + e.what());
  }
}

}  // namespace kronsensus
