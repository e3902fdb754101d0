#include "kronsensus/cli.hpp"

#include <charconv>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "kronsensus/lqr.hpp"
#include "kronsensus/matrix_io.hpp"
#include "kronsensus/parallel.hpp"
#include "kronsensus/sim.hpp"
#include "kronsensus/spectral.hpp"
#include "kronsensus/strategies.hpp"

namespace kronsensus {

namespace {

using Json = nlohmann::ordered_json;
constexpr const char* kSchema = "kronsensus/1";

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

// Splits on commas outside parentheses.
std::vector<std::string> split_top_level(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  int depth = 0;
  for (char c : text) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (depth < 0) throw UsageError("unbalanced parentheses in '" + text + "'");
    if (c == ',' && depth == 0) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (depth != 0) throw UsageError("unbalanced parentheses in '" + text + "'");
  out.push_back(trim(cur));
  return out;
}

Index parse_index(const std::string& s) {
  Index v = 0;
  const char* b = s.data();
  const char* e = b + s.size();
  if (b != e && *b == '+') ++b;
  auto res = std::from_chars(b, e, v);
  if (s.empty() || res.ec != std::errc() || res.ptr != e) throw UsageError("bad integer '" + s + "'");
  return v;
}

double parse_double(const std::string& s) {
  double v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw UsageError("bad number '" + s + "'");
  }
  return v;
}

GroupElement parse_element(const std::string& text, const AbelianGroup& group) {
  std::string body = trim(text);
  GroupElement g;
  if (!body.empty() && body.front() == '(') {
    if (body.back() != ')') throw UsageError("bad group element '" + text + "'");
    body = body.substr(1, body.size() - 2);
    std::stringstream ss(body);
    std::string part;
    while (std::getline(ss, part, ',')) g.push_back(parse_index(trim(part)));
  } else {
    g.push_back(parse_index(body));
  }
  if (static_cast<Index>(g.size()) != group.rank()) {
    throw UsageError("element '" + text + "' has " + std::to_string(g.size()) +
                     " coordinates, group " + group.to_string() + " has " +
                     std::to_string(group.rank()));
  }
  return g;
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  for (const auto& part : split_top_level(text)) out.push_back(static_cast<int>(parse_index(part)));
  return out;
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  for (const auto& part : split_top_level(text)) out.push_back(parse_double(part));
  return out;
}

Json complex_list(const std::vector<Complex>& values) {
  Json arr = Json::array();
  for (const auto& z : values) arr.push_back({z.real(), z.imag()});
  return arr;
}

Json validation_json(const ValidationReport& r) {
  Json j;
  j["row_sums_ok"] = r.row_sums_ok;
  j["col_sums_ok"] = r.col_sums_ok;
  j["one_simple"] = r.one_simple;
  j["spectrum_stable"] = r.spectrum_stable;
  j["degree_bound"] = r.degree_bound;
  j["nu_limit"] = r.nu_limit ? Json(*r.nu_limit) : Json();
  j["degree_ok"] = r.degree_ok;
  j["nonnegative"] = r.nonnegative;
  j["solves_consensus"] = r.solves_consensus();
  j["passes"] = r.passes();
  j["details"] = {{"max_row_sum_error", r.details.max_row_sum_error},
                  {"max_col_sum_error", r.details.max_col_sum_error},
                  {"eigenvalues_near_one", r.details.eigenvalues_near_one},
                  {"max_other_modulus", r.details.max_other_modulus},
                  {"max_row_nonzeros", r.details.max_row_nonzeros},
                  {"max_col_nonzeros", r.details.max_col_nonzeros}};
  if (!r.passes()) j["failure"] = r.failure();
  return j;
}

Json strategy_header(const Strategy& s) {
  Json j;
  j["schema"] = kSchema;
  j["family"] = to_string(s.family());
  j["N"] = s.dimension();
  j["n"] = s.n();
  j["k"] = s.k();
  j["nu"] = s.nu();
  if (s.group()) j["group"] = s.group()->to_string();
  if (!s.warnings().empty()) j["warnings"] = s.warnings();
  return j;
}

struct StrategyArgs {
  std::string family;
  Index n = 0;
  int k = 0;
  std::string seed_matrix = "deadbeat";
  std::string group;
  std::string generator;
  std::string support;
  std::string matrix;
  std::string strategy;
  std::optional<Index> nu_limit;
};

void add_strategy_options(CLI::App* sub, StrategyArgs& a) {
  sub->add_option("--family", a.family, "kronecker, cayley or custom")
      ->check(CLI::IsMember({"kronecker", "cayley", "custom"}));
  sub->add_option("--n", a.n, "seed dimension");
  sub->add_option("--k", a.k, "Kronecker exponent");
  sub->add_option("--seed-matrix", a.seed_matrix, "'deadbeat' or a matrix file");
  sub->add_option("--group", a.group, "N, NxM or NxNx...");
  sub->add_option("--generator", a.generator, "e.g. 0:0.5,1:0.5 or uniform:-1,0,1");
  sub->add_option("--support", a.support, "uniform generator support, e.g. -1,0,1");
  sub->add_option("--matrix", a.matrix, "matrix file for --family custom");
  sub->add_option("--strategy", a.strategy, "strategy JSON written by build");
  sub->add_option("--nu-limit", a.nu_limit, "in-degree limit for condition (D)");
}

Strategy make_strategy(const StrategyArgs& a) {
  if (!a.strategy.empty()) return load_strategy(a.strategy);
  std::string family = a.family;
  if (family.empty() && !a.matrix.empty()) family = "custom";
  if (family.empty()) throw UsageError("one of --family or --strategy is required");

  if (family == "kronecker") {
    if (a.k < 1) throw UsageError("--k >= 1 is required for the kronecker family");
    MatrixXd seed;
    if (a.seed_matrix == "deadbeat") {
      if (a.n < 2) throw UsageError("--n >= 2 is required with the deadbeat seed");
      seed = deadbeat_seed(a.n);
    } else {
      seed = read_matrix(std::filesystem::path(a.seed_matrix));
      if (a.n != 0 && a.n != seed.rows()) throw UsageError("--n does not match the seed matrix");
    }
    return block_kron_strategy(seed, a.k);
  }
  if (family == "cayley") {
    if (a.group.empty()) throw UsageError("--group is required for the cayley family");
    const AbelianGroup group = AbelianGroup::parse(a.group);
    if (a.generator.empty() == a.support.empty()) {
      throw UsageError("exactly one of --generator or --support is required for the cayley family");
    }
    const std::string text = a.support.empty() ? a.generator : "uniform:" + a.support;
    return cayley_strategy(group, parse_generator(text, group));
  }
  if (a.matrix.empty()) throw UsageError("--matrix is required for the custom family");
  return custom_strategy(read_matrix(std::filesystem::path(a.matrix)), a.nu_limit);
}

void emit(const std::string& text, const std::string& out_path, std::ostream& out) {
  if (out_path.empty()) {
    out << text;
    return;
  }
  std::ofstream os(out_path);
  if (!os) throw IoError("cannot open " + out_path + " for writing");
  os << text;
  if (!os) throw IoError("write failed for " + out_path);
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace

Generator parse_generator(const std::string& text, const AbelianGroup& group) {
  const std::string body = trim(text);
  if (body.empty()) throw UsageError("empty generator");
  Generator pi;
  const std::string prefix = "uniform:";
  if (body.rfind(prefix, 0) == 0) {
    std::vector<GroupElement> support;
    for (const auto& part : split_top_level(body.substr(prefix.size()))) {
      support.push_back(parse_element(part, group));
    }
    pi = uniform_generator(support);
  } else {
    for (const auto& part : split_top_level(body)) {
      const auto colon = part.rfind(':');
      if (colon == std::string::npos) throw UsageError("generator entry '" + part + "' lacks ':weight'");
      pi.push_back({parse_element(part.substr(0, colon), group), parse_double(trim(part.substr(colon + 1)))});
    }
  }
  double total = 0;
  for (const auto& e : pi) total += e.weight;
  if (std::abs(total - 1.0) > tol::kCompare) {
    throw UsageError("generator weights sum to " + format_double(total) + ", expected 1");
  }
  return pi;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Average-consensus strategies: block Kronecker and Cayley constructions"};
  app.name("kronsensus");
  app.require_subcommand(1);

  StrategyArgs sa;
  std::string format = "json";
  std::string out_path;
  int threads = default_threads();
  std::uint64_t seed = 0;
  double gamma = 0;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--out", out_path, "output path");
    sub->add_option("--threads", threads, "worker threads (env KRONSENSUS_THREADS)")
        ->check(CLI::PositiveNumber);
  };

  auto* build = app.add_subcommand("build", "construct a strategy and write matrix + JSON");
  add_strategy_options(build, sa);
  common(build);

  auto* validate = app.add_subcommand("validate", "check conditions (A)-(D)");
  add_strategy_options(validate, sa);
  common(validate);

  auto* spectrum = app.add_subcommand("spectrum", "eigenvalues and essential spectral radius");
  add_strategy_options(spectrum, sa);
  common(spectrum);

  std::string method = "series";
  std::string gammas;
  std::int64_t trials = 10'000;
  std::int64_t horizon = 0;
  auto* cost = app.add_subcommand("cost", "LQR cost J = J1 + gamma J2");
  add_strategy_options(cost, sa);
  common(cost);
  cost->add_option("--gamma", gamma, "control weight")->check(CLI::NonNegativeNumber);
  cost->add_option("--gammas", gammas, "comma-separated gamma sweep");
  cost->add_option("--method", method, "series, closed-form or monte-carlo")
      ->check(CLI::IsMember({"series", "closed-form", "monte-carlo"}));
  cost->add_option("--trials", trials, "Monte Carlo trials")->check(CLI::PositiveNumber);
  cost->add_option("--horizon", horizon, "Monte Carlo horizon (0 = automatic)");
  cost->add_option("--seed", seed, "Monte Carlo seed");

  Index t_max = 100;
  std::optional<double> threshold;
  auto* simulate_cmd = app.add_subcommand("simulate", "trajectory from x0 uniform in [-50,50]");
  add_strategy_options(simulate_cmd, sa);
  common(simulate_cmd);
  simulate_cmd->add_option("--seed", seed, "initial-state seed");
  simulate_cmd->add_option("--t-max", t_max, "last time step")->check(CLI::NonNegativeNumber);
  simulate_cmd->add_option("--threshold", threshold, "absolute inf-norm convergence threshold");

  std::string k_list = "2,3,4";
  std::optional<double> compare_gamma;
  Index compare_n = 3;
  std::string compare_seed;
  auto* compare = app.add_subcommand("compare", "block Kronecker against Cayley on Z_N");
  common(compare);
  compare->add_option("--n", compare_n, "seed dimension = Cayley support size");
  compare->add_option("--k", k_list, "comma-separated exponents");
  compare->add_option("--gamma", compare_gamma, "also report J at this gamma");
  compare->add_option("--seed-matrix", compare_seed, "extra Kronecker seed matrix file");

  Index steps = 30;
  auto* figure = app.add_subcommand("replicate-figure", "N=81 trajectories for both families");
  common(figure);
  figure->add_option("--seed", seed, "initial-state seed");
  figure->add_option("--steps", steps, "number of steps")->check(CLI::Range(4, 100000));

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return 2;
  }

  try {
    if (build->parsed()) {
      const Strategy s = make_strategy(sa);
      const std::filesystem::path dir = out_path.empty() ? "." : out_path;
      std::filesystem::create_directories(dir);
      const auto json_path = dir / "strategy.json";
      const auto matrix_path = dir / "matrix.txt";
      save_strategy(s, json_path, matrix_path);
      Json j = strategy_header(s);
      j["strategy_file"] = json_path.generic_string();
      j["matrix_file"] = matrix_path.generic_string();
      j["validation"] = validation_json(s.validation());
      out << dump(j);
      return s.validation().passes() ? 0 : 1;
    }
    if (validate->parsed()) {
      Strategy s = make_strategy(sa);
      ValidationReport report = s.validation();
      if (sa.nu_limit && s.family() != Family::Custom) {
        report = validate_consensus(s.matrix(), s.spectrum(), sa.nu_limit);
      }
      Json j = strategy_header(s);
      j["validation"] = validation_json(report);
      emit(dump(j), out_path, out);
      return report.passes() ? 0 : 1;
    }
    if (spectrum->parsed()) {
      const Strategy s = make_strategy(sa);
      const SpectrumReport r = essential_spectral_radius(s);
      std::ostringstream os;
      if (format == "csv") {
        os << "index,re,im,modulus\n";
        for (std::size_t i = 0; i < r.eigenvalues.size(); ++i) {
          os << i << ',' << format_double(r.eigenvalues[i].real()) << ','
             << format_double(r.eigenvalues[i].imag()) << ',' << format_double(std::abs(r.eigenvalues[i]))
             << '\n';
        }
      } else {
        Json j = strategy_header(s);
        j["ess_radius"] = r.ess_radius;
        j["method"] = to_string(r.method);
        j["dim_ker_flag"] = r.dim_ker_flag;
        j["residual"] = r.residual;
        j["eigenvalues"] = complex_list(r.eigenvalues);
        os << dump(j);
      }
      emit(os.str(), out_path, out);
      return 0;
    }
    if (cost->parsed()) {
      const Strategy s = make_strategy(sa);
      CostOptions options;
      options.trials = trials;
      options.horizon = horizon;
      options.seed = seed;
      options.monte_carlo.threads = threads;
      const CostMethod m = parse_cost_method(method);
      std::vector<double> sweep = gammas.empty() ? std::vector<double>{gamma} : parse_double_list(gammas);
      std::vector<CostReport> reports;
      for (double g : sweep) {
        if (g < 0) throw UsageError("gamma must be >= 0");
        reports.push_back(cost_report(s, g, m, options));
      }
      std::ostringstream os;
      if (format == "csv") {
        write_gamma_sweep_csv(os, reports);
      } else if (reports.size() == 1) {
        os << cost_report_json(reports.front()) << '\n';
      } else {
        Json arr = Json::array();
        for (const auto& r : reports) arr.push_back(Json::parse(cost_report_json(r)));
        os << dump({{"schema", kSchema}, {"sweep", arr}});
      }
      emit(os.str(), out_path, out);
      return 0;
    }
    if (simulate_cmd->parsed()) {
      const Strategy s = make_strategy(sa);
      SimulationOptions options;
      options.threshold = threshold;
      options.stop_early = false;
      const VectorXd x0 = uniform_initial_state(s.dimension(), seed);
      const Trajectory tr = simulate(s, x0, t_max, options);
      std::ostringstream os;
      if (format == "csv") {
        write_trajectory_csv(os, tr);
      } else {
        Json j = strategy_header(s);
        j["seed"] = seed;
        j["t_max"] = t_max;
        j["target"] = tr.target;
        j["threshold"] = tr.threshold;
        j["converged"] = tr.convergence.converged;
        j["steps"] = tr.convergence.steps ? Json(*tr.convergence.steps) : Json();
        j["final_error"] = tr.convergence.final_error;
        j["disagreement_norm2"] = tr.disagreement;
        j["disagreement_norminf"] = tr.disagreement_inf;
        os << dump(j);
      }
      emit(os.str(), out_path, out);
      return 0;
    }
    if (compare->parsed()) {
      ComparisonOptions options;
      options.gamma = compare_gamma;
      options.threads = threads;
      if (!compare_seed.empty()) options.seed = read_matrix(std::filesystem::path(compare_seed));
      const auto rows = compare_families(compare_n, parse_int_list(k_list), options);
      std::ostringstream os;
      if (format == "csv") {
        write_comparison_csv(os, rows);
      } else {
        Json arr = Json::array();
        for (const auto& r : rows) {
          Json row;
          row["family"] = r.family;
          row["N"] = r.N;
          row["n"] = r.n;
          row["k"] = r.k;
          row["nu"] = r.nu;
          row["ess_radius"] = r.ess_radius;
          row["method"] = to_string(r.method);
          if (r.witness) row["witness"] = *r.witness;
          if (r.j) row["j"] = *r.j;
          arr.push_back(row);
        }
        Json j;
        j["schema"] = kSchema;
        if (compare_gamma) j["gamma"] = *compare_gamma;
        j["rows"] = arr;
        os << dump(j);
      }
      emit(os.str(), out_path, out);
      return 0;
    }
    if (figure->parsed()) {
      const std::filesystem::path dir = out_path.empty() ? "figure" : out_path;
      const FigureResult r = replicate_figure(seed, dir, steps);
      Json j;
      j["schema"] = kSchema;
      j["seed"] = seed;
      j["steps"] = steps;
      j["kronecker_csv"] = r.kronecker_csv.generic_string();
      j["cayley_csv"] = r.cayley_csv.generic_string();
      j["kronecker_disagreement_csv"] = r.kronecker_disagreement_csv.generic_string();
      j["cayley_disagreement_csv"] = r.cayley_disagreement_csv.generic_string();
      j["kronecker_spread_t4"] = r.kronecker_spread_t4;
      j["cayley_spread_t4"] = r.cayley_spread_t4;
      out << dump(j);
      return 0;
    }
  } catch (const ValidationError& e) {
    err << "validation failure: " << e.what() << "\n";
    return 1;
  } catch (const DivergenceError& e) {
    err << "validation failure: " << e.what() << "\n";
    return 1;
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << "\n";
    return 1;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

}  // namespace kronsensus
