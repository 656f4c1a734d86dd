// qmix: command-line front end for sampling states, measuring them and running surveys.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "qmix/bell.hpp"
#include "qmix/entropic.hpp"
#include "qmix/error.hpp"
#include "qmix/survey.hpp"

namespace {

using namespace qmix;

constexpr int kExitBadArgs = 2;
constexpr int kExitNumeric = 3;
constexpr const char* kWorkersEnv = "QMIX_WORKERS";

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::OptimizerFailure: return kExitNumeric;
    case ErrorKind::IoError:
    case ErrorKind::NotHermitian:
    case ErrorKind::InvalidState: return 1;
    default: return kExitBadArgs;
  }
}

int default_workers() {
  const char* env = std::getenv(kWorkersEnv);
  if (!env || !*env) return 1;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (*end != '\0' || v < 1 || v > 4096)
    throw Error(ErrorKind::BadSettings, fmt::format("{}='{}' is not a positive integer", kWorkersEnv, env));
  return static_cast<int>(v);
}

ChshMethod parse_chsh_method(const std::string& name) {
  if (name == "closed_form") return ChshMethod::ClosedForm;
  if (name == "optimize") return ChshMethod::Optimize;
  throw Error(ErrorKind::BadSettings, fmt::format("unknown CHSH method '{}'", name));
}

std::vector<Measure> default_measures(int n_qubits, bool all) {
  switch (n_qubits) {
    case 2:
      if (all) return {Measure::Entropic, Measure::Concurrence, Measure::Discord, Measure::GeometricDiscord, Measure::Chsh};
      return {Measure::Entropic, Measure::Concurrence, Measure::Chsh};
    case 3: return {Measure::Entropic, Measure::Mermin};
    default: return {Measure::Entropic, Measure::Mabk};
  }
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    const std::string item = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    if (!item.empty()) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(item, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != item.size()) throw Error(ErrorKind::ParseError, fmt::format("bad grid value '{}'", item));
      out.push_back(v);
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (out.empty()) throw Error(ErrorKind::ParseError, "empty R grid");
  return out;
}

void print_stats(const std::vector<SurveyRecord>& records) {
  for (auto pair : {CoincidencePair::EntropicEntanglement, CoincidencePair::EntropicBell, CoincidencePair::EntanglementBell}) {
    try {
      const auto s = coincidence(records, pair);
      fmt::print("{:<22} p = {:.4f}  n = {}  95% [{:.4f}, {:.4f}]\n", s.pair, s.probability, s.sample_count, s.wilson_low,
                 s.wilson_high);
    } catch (const Error&) {
      // Pair not computed for this measure set.
    }
  }
}

struct GenerateArgs {
  int qubits = 2;
  std::size_t count = 1;
  std::string family = "haar_simplex";
  double ratio = 2.0;
  std::uint64_t seed = 0;
  std::string out;
};

int run_generate(const GenerateArgs& a) {
  SurveyConfig cfg;
  cfg.n_qubits = a.qubits;
  cfg.family = parse_family(a.family);
  cfg.ratio = a.ratio;
  cfg.seed = a.seed;
  cfg.sample_count = a.count;
  cfg.measures.clear();
  cfg.validate();
  const std::filesystem::path out(a.out);
  if (a.count == 1) {
    write_state(sample_state(cfg, 0), out);
    return 0;
  }
  std::error_code ec;
  std::filesystem::create_directories(out, ec);
  if (ec) throw Error(ErrorKind::IoError, fmt::format("cannot create '{}': {}", out.string(), ec.message()));
  for (std::size_t i = 0; i < a.count; ++i) write_state(sample_state(cfg, i), out / fmt::format("state_{}.json", i));
  return 0;
}

struct MeasureArgs {
  std::string in;
  std::string measures;
  std::string chsh_method = "closed_form";
  std::uint64_t seed = 0;
  double max_disagreement = 1e-3;
  double discord_max_disagreement = 1e-6;
  int restarts = 32;
  int anneal_chains = 8;
  int escalations = 2;
};

int run_measure(const MeasureArgs& a) {
  const DensityMatrix rho = read_state(a.in);
  MeasureOptions mo;
  mo.chsh_method = parse_chsh_method(a.chsh_method);
  mo.seed = a.seed;
  if (a.max_disagreement < 0.0 || a.discord_max_disagreement < 0.0)
    throw Error(ErrorKind::BadSettings, "max disagreement must be non-negative");
  mo.bell.max_disagreement = a.max_disagreement;
  mo.discord_max_disagreement = a.discord_max_disagreement;
  mo.bell.restarts = a.restarts;
  mo.bell.anneal.chains = a.anneal_chains;
  mo.bell.escalations = a.escalations;
  const auto measures = a.measures.empty() ? default_measures(rho.n_qubits(), true) : parse_measure_list(a.measures);
  std::cout << record_to_json(measure_state(rho, measures, mo)) << "\n";
  return 0;
}

struct SurveyArgs {
  int qubits = 2;
  std::size_t samples = 1000;
  std::string family = "haar_simplex";
  double ratio = 2.0;
  std::string measures;
  std::uint64_t seed = 0;
  std::string out;
  int workers = 0;
  std::string format = "csv";
  std::size_t stride = 1;
  std::string chsh_method = "closed_form";
};

SurveyConfig survey_config(const SurveyArgs& a) {
  SurveyConfig cfg;
  cfg.n_qubits = a.qubits;
  cfg.sample_count = a.samples;
  cfg.family = parse_family(a.family);
  cfg.ratio = a.ratio;
  cfg.measures = a.measures.empty() ? default_measures(a.qubits, false) : parse_measure_list(a.measures);
  cfg.seed = a.seed;
  cfg.workers = a.workers > 0 ? a.workers : default_workers();
  cfg.expensive_stride = a.stride;
  cfg.chsh_method = parse_chsh_method(a.chsh_method);
  if (a.format == "csv") {
    cfg.format = ExportFormat::Csv;
  } else if (a.format == "json") {
    cfg.format = ExportFormat::Json;
  } else {
    throw Error(ErrorKind::BadSettings, fmt::format("unknown format '{}'", a.format));
  }
  return cfg;
}

int run_survey_cmd(const SurveyArgs& a) {
  SurveyConfig cfg = survey_config(a);
  cfg.output = a.out;
  const auto records = run_survey(cfg);
  fmt::print("{} records written to {}\n", records.size(), a.out);
  print_stats(records);
  return 0;
}

struct SweepArgs {
  int qubits = 2;
  std::string grid;
  std::size_t per_point = 1000;
  std::uint64_t seed = 0;
  std::string out;
  std::string measures;
  int workers = 0;
};

int run_sweep(const SweepArgs& a) {
  SurveyConfig cfg;
  cfg.n_qubits = a.qubits;
  cfg.family = StateFamily::FixedRatio;
  cfg.measures = a.measures.empty() ? default_measures(a.qubits, false) : parse_measure_list(a.measures);
  cfg.seed = a.seed;
  cfg.workers = a.workers > 0 ? a.workers : default_workers();
  const auto rows = ratio_sweep(cfg, parse_grid(a.grid), a.per_point);
  export_sweep(rows, a.out);
  for (const auto& row : rows)
    for (const auto& s : row.stats) fmt::print("R = {:<6g} {:<22} p = {:.4f}\n", row.ratio, s.pair, s.probability);
  return 0;
}

int run_thresholds() {
  fmt::print("Three-qubit Werner critical ratios\n");
  fmt::print("  R1 = 32/11 = {:.10f}  (x = 1/2, R computed: {:.10f})\n", 32.0 / 11.0, participation_ratio(werner3(0.5)));
  fmt::print("  R2 = 25/4  = {:.10f}  (x = 1/5, R computed: {:.10f})\n", 25.0 / 4.0, participation_ratio(werner3(0.2)));
  fmt::print("\nCHSH envelope\n");
  for (double r : {1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0}) fmt::print("  R = {:<5g} {:.10f}\n", r, chsh_envelope(r));
  fmt::print("\nMermin envelope\n");
  for (double r : {1.0, 2.0, 32.0 / 11.0, 4.0, 6.0, 8.0}) fmt::print("  R = {:<8.5g} {:.10f}\n", r, mermin_envelope(r));
  fmt::print("\nSingle-eigenvalue bound (lambda^lambda)^(2^n) = 1/2\n");
  for (int n : {2, 3, 4})
    fmt::print("  n = {}  lambda* = {:.10f}  R = {:.10f}\n", n, single_eigenvalue_bound(n), single_eigenvalue_ratio(n));
  fmt::print("\nGHZ-Werner MABK critical weight\n");
  for (int n : {4, 6, 8}) fmt::print("  n = {}  p_c = {:.10f}\n", n, werner_mabk_threshold(n));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Classicality, locality and quantum-correlation measures for few-qubit mixed states"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Sample states and write them as JSON");
  g->add_option("--qubits", gen.qubits, "Number of qubits (2-4)")->required();
  g->add_option("--count", gen.count, "Number of states")->required()->check(CLI::PositiveNumber);
  g->add_option("--family", gen.family, "haar_simplex, bell_diagonal, fixed_ratio or werner_sweep")->required();
  g->add_option("--ratio", gen.ratio, "Participation ratio for fixed_ratio");
  g->add_option("--seed", gen.seed, "Master seed")->required();
  g->add_option("--out", gen.out, "Output file (count 1) or directory")->required();

  MeasureArgs mea;
  auto* m = app.add_subcommand("measure", "Evaluate measures on one state file");
  m->add_option("--in", mea.in, "State file")->required();
  m->add_option("--measures", mea.measures, "Comma-separated measures (default: all for the size)");
  m->add_option("--chsh-method", mea.chsh_method, "closed_form or optimize");
  m->add_option("--seed", mea.seed, "Optimizer seed");
  m->add_option("--max-disagreement", mea.max_disagreement, "Allowed gap between the two Bell searches");
  m->add_option("--discord-max-disagreement", mea.discord_max_disagreement, "Allowed gap between the two discord searches");
  m->add_option("--restarts", mea.restarts, "Nelder-Mead starts for Bell searches")->check(CLI::PositiveNumber);
  m->add_option("--anneal-chains", mea.anneal_chains, "Annealing chains for Bell searches")->check(CLI::PositiveNumber);
  m->add_option("--escalations", mea.escalations, "Budget doublings tried when the Bell searches disagree")
      ->check(CLI::NonNegativeNumber);

  SurveyArgs sur;
  auto* s = app.add_subcommand("survey", "Monte Carlo survey over random states");
  s->add_option("--qubits", sur.qubits, "Number of qubits (2-4)")->required();
  s->add_option("--samples", sur.samples, "Number of states")->required()->check(CLI::PositiveNumber);
  s->add_option("--family", sur.family, "State family")->required();
  s->add_option("--ratio", sur.ratio, "Participation ratio for fixed_ratio");
  s->add_option("--measures", sur.measures, "Comma-separated measures")->required();
  s->add_option("--seed", sur.seed, "Master seed")->required();
  s->add_option("--out", sur.out, "Output path")->required();
  s->add_option("--workers", sur.workers, fmt::format("Worker threads (default: ${} or 1)", kWorkersEnv))
      ->check(CLI::PositiveNumber);
  s->add_option("--format", sur.format, "csv or json");
  s->add_option("--stride", sur.stride, "Evaluate expensive measures on every k-th state")->check(CLI::PositiveNumber);
  s->add_option("--chsh-method", sur.chsh_method, "closed_form or optimize");

  SweepArgs swp;
  auto* w = app.add_subcommand("sweep", "Coincidence statistics on a grid of participation ratios");
  w->add_option("--qubits", swp.qubits, "Number of qubits (2-4)")->required();
  w->add_option("--grid", swp.grid, "Comma-separated R values")->required();
  w->add_option("--per-point", swp.per_point, "States per grid point")->required()->check(CLI::PositiveNumber);
  w->add_option("--seed", swp.seed, "Master seed")->required();
  w->add_option("--out", swp.out, "Output CSV")->required();
  w->add_option("--measures", swp.measures, "Comma-separated measures");
  w->add_option("--workers", swp.workers, fmt::format("Worker threads (default: ${} or 1)", kWorkersEnv))
      ->check(CLI::PositiveNumber);

  app.add_subcommand("thresholds", "Print critical ratios, envelopes and bounds");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitBadArgs;
  }

  try {
    if (g->parsed()) return run_generate(gen);
    if (m->parsed()) return run_measure(mea);
    if (s->parsed()) return run_survey_cmd(sur);
    if (w->parsed()) return run_sweep(swp);
    return run_thresholds();
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  }
}
