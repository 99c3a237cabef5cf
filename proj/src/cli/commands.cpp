#include <CLI11.hpp>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <optional>
#include <ostream>
#include <sstream>

#include "apdscore/apd.hpp"
#include "apdscore/cli.hpp"
#include "apdscore/errors.hpp"
#include "apdscore/random.hpp"
#include "apdscore/score.hpp"
#include "apdscore/simulate.hpp"

namespace apdscore::cli {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

std::vector<double> parse_real_list(const std::string& text, const char* flag) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::istringstream is(item);
    is.imbue(std::locale::classic());
    double v = 0.0;
    if (!(is >> v) || !(is >> std::ws).eof() || !std::isfinite(v)) {
      throw UsageError(std::string(flag) + ": cannot parse '" + item + "'");
    }
    out.push_back(v);
  }
  if (out.empty()) throw UsageError(std::string(flag) + ": empty list");
  return out;
}

struct LambdaGrid {
  double start;
  double stop;
  double step;
};

LambdaGrid parse_grid(const std::string& text) {
  std::string normalized = text;
  std::replace(normalized.begin(), normalized.end(), ':', ',');
  const auto parts = parse_real_list(normalized, "--lambda-grid");
  if (parts.size() != 3) throw UsageError("--lambda-grid expects start:stop:step");
  LambdaGrid g{parts[0], parts[1], parts[2]};
  if (!(g.start >= 1.0)) throw UsageError("--lambda-grid: start must be >= 1");
  if (!(g.stop >= g.start)) throw UsageError("--lambda-grid: stop must be >= start");
  if (!(g.step > 0.0)) throw UsageError("--lambda-grid: step must be positive");
  return g;
}

void require_lambda(double lambda) {
  if (!(lambda >= 1.0) || !std::isfinite(lambda)) throw UsageError("--lambda must be >= 1");
}

void require_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw UsageError("--alpha must lie in (0, 1)");
}

void emit_json(std::ostream& out, const ordered_json& record) { out << record.dump(2) << '\n'; }

ordered_json make_record(const char* command) {
  ordered_json record;
  record["schema_version"] = kSchemaVersion;
  record["command"] = command;
  return record;
}

// ---- test -----------------------------------------------------------------

struct TestArgs {
  std::string input;
  double lambda = 2.0;
  double alpha = 0.05;
};

int cmd_test(const TestArgs& a, bool as_json, std::ostream& out) {
  require_lambda(a.lambda);
  require_alpha(a.alpha);
  const DataFile file = read_data_file(a.input);
  const NullSpec null(a.lambda);
  const TestReport report = run_test(file.values, null);
  const bool reject = rejects(report, a.alpha);

  if (as_json) {
    ordered_json record = make_record("test");
    record["inputs"] = {{"input", file.path.string()}, {"lambda", a.lambda}, {"alpha", a.alpha}};
    record["results"] = {{"n", report.n},
                         {"mu_hat", report.kappa_hat.mu},
                         {"sigma_hat", report.kappa_hat.sigma},
                         {"r_n", {report.r_n.c1, report.r_n.c2}},
                         {"t_stat", report.t_stat},
                         {"p_value", report.p_value},
                         {"reject", reject}};
    emit_json(out, record);
  } else {
    out << "modified score test against APD alternatives\n"
        << "  null       : theta = (1/2, " << format_real(a.lambda) << ")\n"
        << "  n          : " << report.n << '\n'
        << "  mu_hat     : " << format_real(report.kappa_hat.mu) << '\n'
        << "  sigma_hat  : " << format_real(report.kappa_hat.sigma) << '\n'
        << "  r_n        : (" << format_real(report.r_n.c1) << ", " << format_real(report.r_n.c2) << ")\n"
        << "  T_n        : " << format_real(report.t_stat) << '\n'
        << "  p-value    : " << format_real(report.p_value) << '\n'
        << "  decision   : " << (reject ? "reject" : "do not reject") << " H0 at alpha = "
        << format_real(a.alpha) << '\n';
  }
  return kSuccess;
}

// ---- simulate ---------------------------------------------------------------

struct SimulateArgs {
  std::string kind;
  double lambda = 2.0;
  std::size_t n = 2000;
  std::size_t reps = 1000;
  std::uint64_t seed = 42;
  std::string alpha = "0.01,0.05,0.1";
  std::string delta;
  double mu = 0.0;
  double sigma = 1.0;
  unsigned workers = 0;
};

int cmd_simulate(const SimulateArgs& a, bool as_json, std::ostream& out) {
  require_lambda(a.lambda);
  StudyConfig cfg;
  cfg.lambda = a.lambda;
  cfg.n = a.n;
  cfg.reps = a.reps;
  cfg.seed = a.seed;
  cfg.alpha_grid = parse_real_list(a.alpha, "--alpha");
  cfg.kappa = {a.mu, a.sigma};
  cfg.workers = a.workers;
  if (a.kind == "power") {
    if (a.delta.empty()) throw UsageError("simulate power requires --delta d1,d2");
    const auto d = parse_real_list(a.delta, "--delta");
    if (d.size() != 2) throw UsageError("--delta expects two comma-separated values");
    cfg.delta = Eigen::Vector2d(d[0], d[1]);
  } else if (!a.delta.empty()) {
    throw UsageError("simulate size does not take --delta");
  }

  StudyReport report;
  try {
    report = cfg.delta ? run_local_alternative_study(cfg) : run_null_study(cfg);
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }

  if (as_json) {
    ordered_json record = make_record("simulate");
    ordered_json inputs = {{"kind", a.kind},     {"lambda", cfg.lambda},     {"n", cfg.n},
                           {"reps", cfg.reps},   {"seed", cfg.seed},         {"alpha_grid", cfg.alpha_grid},
                           {"mu", cfg.kappa.mu}, {"sigma", cfg.kappa.sigma}};
    if (cfg.delta) inputs["delta"] = {(*cfg.delta)(0), (*cfg.delta)(1)};
    record["inputs"] = inputs;
    ordered_json rates = ordered_json::array();
    for (const auto& r : report.rejection_rates) {
      ordered_json row = {{"alpha", r.alpha}, {"rate", r.rate}, {"std_error", r.std_error}};
      if (r.predicted) row["predicted"] = *r.predicted;
      rates.push_back(row);
    }
    record["results"] = {{"theta_n", {report.theta1_n, report.theta2_n}},
                         {"ncp", report.ncp},
                         {"rejection_rates", rates},
                         {"ks_stat", report.ks_stat},
                         {"p_value_ks_stat", report.p_value_ks_stat},
                         {"replicate_failures", report.replicate_failures},
                         {"seed", cfg.seed}};
    emit_json(out, record);
  } else {
    out << "simulate " << a.kind << ": lambda = " << format_real(cfg.lambda) << ", n = " << cfg.n
        << ", reps = " << cfg.reps << ", seed = " << cfg.seed << '\n'
        << "  generating theta = (" << format_real(report.theta1_n) << ", " << format_real(report.theta2_n)
        << "), ncp = " << format_real(report.ncp) << '\n'
        << "  alpha       empirical   std.err     predicted\n";
    out << std::fixed << std::setprecision(6);
    for (const auto& r : report.rejection_rates) {
      out << "  " << std::setw(10) << std::left << r.alpha << "  " << std::setw(10) << r.rate << "  "
          << std::setw(10) << r.std_error << "  ";
      if (r.predicted) {
        out << *r.predicted;
      } else {
        out << "-";
      }
      out << '\n';
    }
    out << "  KS distance of T_n vs chi2_2" << (report.ncp > 0 ? "(ncp)" : "") << ": " << report.ks_stat << '\n'
        << "  replicate failures: " << report.replicate_failures << '\n';
    out.unsetf(std::ios::floatfield);
  }
  return kSuccess;
}

// ---- tables -----------------------------------------------------------------

const std::vector<std::string>& table_columns() {
  static const std::vector<std::string> cols = {
      "lambda", "J_theta1theta1", "J_theta1mu", "J_theta2theta2", "J_theta2sigma",
      "J_mumu", "J_sigmasigma",   "Sigma11",    "Sigma22"};
  return cols;
}

std::vector<double> table_row(double lambda) {
  const FisherBlocks fb = fisher_blocks(NullSpec(lambda));
  return {lambda,          fb.j_tt(0, 0), fb.j_tk(0, 0),       fb.j_tt(1, 1),      fb.j_tk(1, 1),
          fb.j_kk(0, 0),   fb.j_kk(1, 1), fb.sigma_mat(0, 0), fb.sigma_mat(1, 1)};
}

int cmd_tables(const std::string& grid_text, bool as_json, std::ostream& out) {
  const LambdaGrid g = parse_grid(grid_text);
  std::vector<double> lambdas;
  for (std::size_t i = 0;; ++i) {
    const double lambda = g.start + static_cast<double>(i) * g.step;
    if (lambda > g.stop + 1e-9 * g.step) break;
    lambdas.push_back(std::min(lambda, std::max(g.stop, g.start)));
    if (lambdas.size() > 1000000) throw UsageError("--lambda-grid: too many rows");
  }
  const auto& cols = table_columns();
  if (as_json) {
    ordered_json record = make_record("tables");
    record["inputs"] = {{"lambda_grid", {g.start, g.stop, g.step}}};
    ordered_json rows = ordered_json::array();
    for (double lambda : lambdas) {
      const auto values = table_row(lambda);
      ordered_json row;
      for (std::size_t c = 0; c < cols.size(); ++c) row[cols[c]] = values[c];
      rows.push_back(row);
    }
    record["results"] = {{"columns", cols}, {"rows", rows}};
    emit_json(out, record);
  } else {
    for (std::size_t c = 0; c < cols.size(); ++c) out << (c ? "," : "") << cols[c];
    out << '\n';
    for (double lambda : lambdas) {
      const auto values = table_row(lambda);
      for (std::size_t c = 0; c < values.size(); ++c) out << (c ? "," : "") << format_real(values[c]);
      out << '\n';
    }
  }
  return kSuccess;
}

// ---- sample -----------------------------------------------------------------

struct SampleArgs {
  double theta1 = 0.5;
  double theta2 = 2.0;
  double mu = 0.0;
  double sigma = 1.0;
  long long n = 0;
  std::uint64_t seed = 42;
  std::string output;
};

int cmd_sample(const SampleArgs& a, bool as_json, std::ostream& out) {
  if (a.n < 1) throw UsageError("--n must be >= 1");
  std::optional<ApdParams> params;
  try {
    params.emplace(a.theta1, a.theta2, a.mu, a.sigma);
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
  RandomStream rng(a.seed, 0);
  const auto draws = sample(*params, static_cast<std::size_t>(a.n), rng);

  std::ofstream file(a.output, std::ios::binary | std::ios::trunc);
  if (!file) throw InputError(a.output + ": cannot open for writing");
  for (double x : draws) file << format_real(x) << '\n';
  file.close();
  if (!file) throw InputError(a.output + ": write failed");

  if (as_json) {
    ordered_json record = make_record("sample");
    record["inputs"] = {{"theta1", a.theta1}, {"theta2", a.theta2}, {"mu", a.mu}, {"sigma", a.sigma},
                        {"n", a.n},           {"seed", a.seed},     {"output", a.output}};
    record["results"] = {{"written", draws.size()}, {"path", a.output}};
    emit_json(out, record);
  } else {
    out << "wrote " << draws.size() << " draws from APD((" << format_real(a.theta1) << ", "
        << format_real(a.theta2) << "), (" << format_real(a.mu) << ", " << format_real(a.sigma) << ")) to "
        << a.output << '\n';
  }
  return kSuccess;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Modified score goodness-of-fit test for exponential power nulls", "apdscore"};
  app.require_subcommand(1);
  bool as_json = false;
  app.add_flag("--json", as_json, "Emit a JSON record instead of text");

  TestArgs test_args;
  auto* test = app.add_subcommand("test", "Run the modified score test on a data file");
  test->add_option("--input", test_args.input, "One value per line")->required();
  test->add_option("--lambda", test_args.lambda, "Null tail exponent (>= 1)")->required();
  test->add_option("--alpha", test_args.alpha, "Significance level")->capture_default_str();
  test->add_flag("--json", as_json);

  SimulateArgs sim_args;
  auto* sim = app.add_subcommand("simulate", "Monte Carlo size or local-power study");
  sim->add_option("kind", sim_args.kind, "size | power")->required()->check(CLI::IsMember({"size", "power"}));
  sim->add_option("--lambda", sim_args.lambda)->required();
  sim->add_option("--n", sim_args.n)->capture_default_str();
  sim->add_option("--reps", sim_args.reps)->capture_default_str();
  sim->add_option("--seed", sim_args.seed)->capture_default_str();
  sim->add_option("--alpha", sim_args.alpha, "Comma-separated levels")->capture_default_str();
  sim->add_option("--delta", sim_args.delta, "Local alternative direction d1,d2");
  sim->add_option("--mu", sim_args.mu)->capture_default_str();
  sim->add_option("--sigma", sim_args.sigma)->capture_default_str();
  sim->add_option("--workers", sim_args.workers, "Worker threads (0 = all cores)")->capture_default_str();
  sim->add_flag("--json", as_json);

  std::string grid;
  auto* tables = app.add_subcommand("tables", "Closed-form J and Sigma over a lambda grid");
  tables->add_option("--lambda-grid", grid, "start:stop:step")->required();
  tables->add_flag("--json", as_json);

  SampleArgs sample_args;
  auto* samp = app.add_subcommand("sample", "Write APD draws to a file");
  samp->add_option("--theta1", sample_args.theta1)->capture_default_str();
  samp->add_option("--theta2", sample_args.theta2)->capture_default_str();
  samp->add_option("--mu", sample_args.mu)->capture_default_str();
  samp->add_option("--sigma", sample_args.sigma)->capture_default_str();
  samp->add_option("--n", sample_args.n)->required();
  samp->add_option("--seed", sample_args.seed)->capture_default_str();
  samp->add_option("--output", sample_args.output)->required();
  samp->add_flag("--json", as_json);

  std::vector<std::string> argv_storage;
  argv_storage.reserve(args.size() + 1);
  argv_storage.emplace_back("apdscore");
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& s : argv_storage) argv.push_back(s.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsageError;
  }

  try {
    if (test->parsed()) return cmd_test(test_args, as_json, out);
    if (sim->parsed()) return cmd_simulate(sim_args, as_json, out);
    if (tables->parsed()) return cmd_tables(grid, as_json, out);
    if (samp->parsed()) return cmd_sample(sample_args, as_json, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsageError;
  } catch (const InputError& e) {
    err << "input error: " << e.what() << '\n';
    return kInputError;
  } catch (const DegenerateSampleError& e) {
    err << "degenerate sample: " << e.what() << '\n';
    return kDegenerateData;
  }
  return kUsageError;
}

}  // namespace apdscore::cli
