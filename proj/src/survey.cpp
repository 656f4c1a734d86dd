#include "qmix/survey.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <json.hpp>

#include "qmix/correlations.hpp"
#include "qmix/entropic.hpp"
#include "qmix/error.hpp"

namespace qmix {

namespace {

constexpr std::string_view kCsvHeader =
    "state_id,n_qubits,R,lambda_max,min_conditional_nats,min_conditional_ln2,concurrence,discord,"
    "geometric_discord,chsh_max,mermin_max,mabk_max,entropic_violated,entangled,nonlocal";

constexpr double kEntangledThreshold = 1e-12;
// Tolerance on stored R values, which carry eigensolver round-off.
constexpr double kRatioSlack = 1e-9;

struct FamilyName {
  StateFamily family;
  std::string_view name;
};
constexpr FamilyName kFamilies[] = {{StateFamily::HaarSimplex, "haar_simplex"},
                                    {StateFamily::BellDiagonal, "bell_diagonal"},
                                    {StateFamily::FixedRatio, "fixed_ratio"},
                                    {StateFamily::WernerSweep, "werner_sweep"}};

struct MeasureName {
  Measure measure;
  std::string_view name;
};
constexpr MeasureName kMeasures[] = {{Measure::Entropic, "entropic"},
                                     {Measure::Concurrence, "concurrence"},
                                     {Measure::Discord, "discord"},
                                     {Measure::GeometricDiscord, "geometric_discord"},
                                     {Measure::Chsh, "chsh"},
                                     {Measure::Mermin, "mermin"},
                                     {Measure::Mabk, "mabk"}};

bool measure_supported(Measure m, int n) {
  switch (m) {
    case Measure::Entropic: return true;
    case Measure::Concurrence:
    case Measure::Discord:
    case Measure::GeometricDiscord:
    case Measure::Chsh: return n == 2;
    case Measure::Mermin: return n == 3;
    case Measure::Mabk: return n == 4;
  }
  return false;
}

bool has(const std::vector<Measure>& list, Measure m) { return std::find(list.begin(), list.end(), m) != list.end(); }

std::string number(double v) { return fmt::format("{:.17g}", v); }

std::string optional_number(const std::optional<double>& v) { return v ? number(*v) : std::string(); }

std::string optional_flag(const std::optional<bool>& v) {
  if (!v) return {};
  return *v ? "true" : "false";
}

double parse_double(std::string_view field, std::size_t line) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size())
    throw Error(ErrorKind::ParseError, fmt::format("line {}: bad number '{}'", line, field));
  return v;
}

std::uint64_t parse_uint(std::string_view field, std::size_t line) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size())
    throw Error(ErrorKind::ParseError, fmt::format("line {}: bad integer '{}'", line, field));
  return v;
}

std::optional<double> parse_optional_double(std::string_view field, std::size_t line) {
  if (field.empty()) return std::nullopt;
  return parse_double(field, line);
}

std::optional<bool> parse_optional_flag(std::string_view field, std::size_t line) {
  if (field.empty()) return std::nullopt;
  if (field == "true") return true;
  if (field == "false") return false;
  throw Error(ErrorKind::ParseError, fmt::format("line {}: bad flag '{}'", line, field));
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::optional<bool> first_flag(const SurveyRecord& r, CoincidencePair pair, bool second) {
  switch (pair) {
    case CoincidencePair::EntropicEntanglement: return second ? r.entangled : r.entropic_violated;
    case CoincidencePair::EntropicBell: return second ? r.nonlocal : r.entropic_violated;
    case CoincidencePair::EntanglementBell: return second ? r.nonlocal : r.entangled;
  }
  return std::nullopt;
}

nlohmann::json optional_json(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(); }
nlohmann::json optional_json(const std::optional<bool>& v) { return v ? nlohmann::json(*v) : nlohmann::json(); }

nlohmann::json record_json(const SurveyRecord& r) {
  return {{"state_id", r.state_id},
          {"n_qubits", r.n_qubits},
          {"R", r.ratio},
          {"lambda_max", r.lambda_max},
          {"min_conditional_nats", optional_json(r.min_conditional_nats)},
          {"min_conditional_ln2", optional_json(r.min_conditional_ln2)},
          {"concurrence", optional_json(r.concurrence)},
          {"discord", optional_json(r.discord)},
          {"geometric_discord", optional_json(r.geometric_discord)},
          {"chsh_max", optional_json(r.chsh_max)},
          {"mermin_max", optional_json(r.mermin_max)},
          {"mabk_max", optional_json(r.mabk_max)},
          {"entropic_violated", optional_json(r.entropic_violated)},
          {"entangled", optional_json(r.entangled)},
          {"nonlocal", optional_json(r.nonlocal)}};
}

}  // namespace

std::string_view to_string(StateFamily family) {
  for (const auto& f : kFamilies)
    if (f.family == family) return f.name;
  return "unknown";
}

std::string_view to_string(Measure measure) {
  for (const auto& m : kMeasures)
    if (m.measure == measure) return m.name;
  return "unknown";
}

StateFamily parse_family(std::string_view name) {
  for (const auto& f : kFamilies)
    if (f.name == name) return f.family;
  throw Error(ErrorKind::ParseError, fmt::format("unknown state family '{}'", name));
}

Measure parse_measure(std::string_view name) {
  for (const auto& m : kMeasures)
    if (m.name == name) return m.measure;
  throw Error(ErrorKind::UnsupportedMeasure, fmt::format("unknown measure '{}'", name));
}

std::vector<Measure> parse_measure_list(std::string_view comma_separated) {
  std::vector<Measure> out;
  for (auto part : split(comma_separated, ',')) {
    if (part.empty()) continue;
    const Measure m = parse_measure(part);
    if (!has(out, m)) out.push_back(m);
  }
  return out;
}

bool is_expensive(Measure measure, ChshMethod chsh_method) {
  switch (measure) {
    case Measure::Discord:
    case Measure::Mermin:
    case Measure::Mabk: return true;
    case Measure::Chsh: return chsh_method == ChshMethod::Optimize;
    default: return false;
  }
}

void SurveyConfig::validate() const {
  checked_dim(n_qubits);
  if (sample_count < 1) throw Error(ErrorKind::BadSettings, "sample_count must be at least 1");
  if (workers < 1) throw Error(ErrorKind::BadSettings, "worker count must be at least 1");
  if (expensive_stride < 1) throw Error(ErrorKind::BadSettings, "expensive stride must be at least 1");
  if (family == StateFamily::BellDiagonal && n_qubits != 2)
    throw Error(ErrorKind::UnsupportedSize, "bell_diagonal states are two-qubit");
  const double top = static_cast<double>(std::size_t{1} << n_qubits);
  if (family == StateFamily::FixedRatio && !(ratio >= 1.0 && ratio <= top))
    throw Error(ErrorKind::BadRatio, fmt::format("R = {} outside [1, {}]", ratio, top));
  for (Measure m : measures)
    if (!measure_supported(m, n_qubits))
      throw Error(ErrorKind::UnsupportedMeasure, fmt::format("{} is not defined for {} qubits", to_string(m), n_qubits));
}

SurveyRecord measure_state(const DensityMatrix& rho, const std::vector<Measure>& measures, const MeasureOptions& opts) {
  const int n = rho.n_qubits();
  for (Measure m : measures)
    if (!measure_supported(m, n))
      throw Error(ErrorKind::UnsupportedMeasure, fmt::format("{} is not defined for {} qubits", to_string(m), n));

  SurveyRecord r;
  r.n_qubits = n;
  const std::vector<double> spectrum = rho.eigenvalues();
  double sum2 = 0.0;
  for (double l : spectrum) sum2 += l * l;
  r.ratio = 1.0 / sum2;
  r.lambda_max = spectrum.front();

  auto wanted = [&](Measure m) { return has(measures, m) && (opts.include_expensive || !is_expensive(m, opts.chsh_method)); };
  BellOptions bell = opts.bell;
  bell.seed = derive_seed(opts.seed, 0xbe11);

  if (wanted(Measure::Entropic)) {
    const EntropicReport rep = entropic_report(rho);
    r.min_conditional_nats = rep.min_conditional;
    r.min_conditional_ln2 = rep.min_conditional_ln2();
    r.entropic_violated = rep.violated;
  }
  if (wanted(Measure::Concurrence)) {
    r.concurrence = concurrence(rho);
    r.entangled = *r.concurrence > kEntangledThreshold;
  }
  if (wanted(Measure::Discord)) {
    DiscordOptions d;
    d.seed = derive_seed(opts.seed, 0xd15c);
    d.max_disagreement = opts.discord_max_disagreement;
    r.discord = quantum_discord(rho, d).value;
  }
  if (wanted(Measure::GeometricDiscord)) r.geometric_discord = geometric_discord(rho);
  if (wanted(Measure::Chsh)) {
    const BellResult b = chsh_max(rho, opts.chsh_method, bell);
    r.chsh_max = b.value;
    r.nonlocal = b.violated;
  }
  if (wanted(Measure::Mermin)) {
    const BellResult b = mermin_max(rho, bell);
    r.mermin_max = b.value;
    r.nonlocal = b.violated;
  }
  if (wanted(Measure::Mabk)) {
    const BellResult b = mabk_max(rho, n, bell);
    r.mabk_max = b.value;
    r.nonlocal = b.violated;
  }
  return r;
}

DensityMatrix sample_state(const SurveyConfig& config, std::uint64_t index) {
  RandomStream rng = make_stream(config.seed, index);
  switch (config.family) {
    case StateFamily::HaarSimplex: return random_density(config.n_qubits, rng);
    case StateFamily::BellDiagonal: return bell_diagonal(random_bell_weights(rng));
    case StateFamily::FixedRatio: return random_fixed_ratio(config.n_qubits, config.ratio, rng);
    case StateFamily::WernerSweep: {
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      return werner_ghz(config.n_qubits, unit(rng));
    }
  }
  throw Error(ErrorKind::BadSettings, "unknown state family");
}

std::vector<SurveyRecord> run_survey(const SurveyConfig& config) {
  config.validate();
  std::vector<SurveyRecord> records(config.sample_count);

  std::atomic<std::size_t> next{0};
  std::mutex failure_mutex;
  std::size_t failed_index = config.sample_count;
  std::exception_ptr failure;

  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= config.sample_count) return;
      try {
        MeasureOptions mo;
        mo.chsh_method = config.chsh_method;
        mo.include_expensive = i % config.expensive_stride == 0;
        mo.seed = derive_seed(config.seed ^ 0x6d656173ULL, i);
        mo.bell = config.bell;
        SurveyRecord r = measure_state(sample_state(config, i), config.measures, mo);
        r.state_id = i;
        records[i] = std::move(r);
      } catch (...) {
        // Keep the lowest failing index so the reported error does not depend on scheduling.
        std::lock_guard lock(failure_mutex);
        if (i < failed_index) {
          failed_index = i;
          failure = std::current_exception();
        }
      }
    }
  };

  const int threads = std::min<std::size_t>(static_cast<std::size_t>(config.workers), config.sample_count);
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);

  if (!config.output.empty()) {
    export_records(records, config.output, config.format);
    write_text(std::filesystem::path(config.output.string() + ".meta.json"), survey_metadata(config));
  }
  return records;
}

std::string_view to_string(CoincidencePair pair) {
  switch (pair) {
    case CoincidencePair::EntropicEntanglement: return "entropic-entanglement";
    case CoincidencePair::EntropicBell: return "entropic-bell";
    case CoincidencePair::EntanglementBell: return "entanglement-bell";
  }
  return "unknown";
}

std::pair<double, double> wilson_interval(std::size_t successes, std::size_t trials) {
  if (trials == 0) return {0.0, 1.0};
  constexpr double z = 1.959963984540054;
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double denom = 1.0 + z * z / n;
  const double centre = (p + z * z / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n)) / denom;
  // Clamp so the interval always contains p despite rounding at p = 0 or 1.
  return {std::min(p, std::max(0.0, centre - half)), std::max(p, std::min(1.0, centre + half))};
}

CoincidenceStats coincidence(const std::vector<SurveyRecord>& records, CoincidencePair pair) {
  std::size_t trials = 0, agree = 0;
  for (const auto& r : records) {
    const auto a = first_flag(r, pair, false), b = first_flag(r, pair, true);
    if (!a || !b) continue;
    ++trials;
    if (*a == *b) ++agree;
  }
  if (trials == 0)
    throw Error(ErrorKind::MissingMeasure, fmt::format("no record carries both flags for {}", to_string(pair)));
  CoincidenceStats s;
  s.pair = std::string(to_string(pair));
  s.sample_count = trials;
  s.probability = static_cast<double>(agree) / static_cast<double>(trials);
  std::tie(s.wilson_low, s.wilson_high) = wilson_interval(agree, trials);
  return s;
}

std::vector<SweepRow> ratio_sweep(const SurveyConfig& config, const std::vector<double>& ratios, std::size_t per_point) {
  const double top = static_cast<double>(std::size_t{1} << config.n_qubits);
  for (double r : ratios)
    if (!(r >= 1.0 && r <= top)) throw Error(ErrorKind::BadRatio, fmt::format("R = {} outside [1, {}]", r, top));

  std::vector<SweepRow> rows;
  for (std::size_t k = 0; k < ratios.size(); ++k) {
    SurveyConfig point = config;
    point.family = StateFamily::FixedRatio;
    point.ratio = ratios[k];
    point.sample_count = per_point;
    point.seed = derive_seed(config.seed, k);
    point.output.clear();
    const auto records = run_survey(point);
    SweepRow row;
    row.ratio = ratios[k];
    for (auto pair : {CoincidencePair::EntropicEntanglement, CoincidencePair::EntropicBell,
                      CoincidencePair::EntanglementBell}) {
      try {
        row.stats.push_back(coincidence(records, pair));
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::MissingMeasure) throw;
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

EnvelopeReport envelope_check(const std::vector<SurveyRecord>& records, Envelope envelope) {
  EnvelopeReport rep;
  for (const auto& r : records) {
    std::optional<double> value;
    double bound = 0.0;
    switch (envelope) {
      case Envelope::Chsh:
        value = r.chsh_max;
        if (value) bound = chsh_envelope(std::clamp(r.ratio, 1.0, 4.0));
        break;
      case Envelope::Mermin:
        value = r.mermin_max;
        if (value) bound = mermin_envelope(std::clamp(r.ratio, 1.0, 8.0));
        break;
      case Envelope::Mabk:
        if (r.ratio < 4.0 - kRatioSlack) continue;  // R is recomputed from the spectrum
        value = r.mabk_max;
        bound = 4.0;
        break;
    }
    if (!value) continue;
    ++rep.checked;
    const double excess = *value - bound;
    if (excess > rep.max_excess) {
      rep.max_excess = excess;
      rep.worst_state = r.state_id;
    }
  }
  if (rep.checked == 0) throw Error(ErrorKind::MissingMeasure, "no record carries the measure and ratio needed");
  return rep;
}

std::string records_to_csv(const std::vector<SurveyRecord>& records) {
  std::string out(kCsvHeader);
  out += '\n';
  for (const auto& r : records) {
    out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", r.state_id, r.n_qubits, number(r.ratio),
                       number(r.lambda_max), optional_number(r.min_conditional_nats),
                       optional_number(r.min_conditional_ln2), optional_number(r.concurrence),
                       optional_number(r.discord), optional_number(r.geometric_discord), optional_number(r.chsh_max),
                       optional_number(r.mermin_max), optional_number(r.mabk_max), optional_flag(r.entropic_violated),
                       optional_flag(r.entangled), optional_flag(r.nonlocal));
  }
  return out;
}

std::vector<SurveyRecord> parse_records_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw Error(ErrorKind::ParseError, "missing or unexpected CSV header");
  std::vector<SurveyRecord> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 15) throw Error(ErrorKind::ParseError, fmt::format("line {}: expected 15 fields", line_no));
    SurveyRecord r;
    r.state_id = parse_uint(f[0], line_no);
    r.n_qubits = static_cast<int>(parse_uint(f[1], line_no));
    r.ratio = parse_double(f[2], line_no);
    r.lambda_max = parse_double(f[3], line_no);
    r.min_conditional_nats = parse_optional_double(f[4], line_no);
    r.min_conditional_ln2 = parse_optional_double(f[5], line_no);
    r.concurrence = parse_optional_double(f[6], line_no);
    r.discord = parse_optional_double(f[7], line_no);
    r.geometric_discord = parse_optional_double(f[8], line_no);
    r.chsh_max = parse_optional_double(f[9], line_no);
    r.mermin_max = parse_optional_double(f[10], line_no);
    r.mabk_max = parse_optional_double(f[11], line_no);
    r.entropic_violated = parse_optional_flag(f[12], line_no);
    r.entangled = parse_optional_flag(f[13], line_no);
    r.nonlocal = parse_optional_flag(f[14], line_no);
    out.push_back(std::move(r));
  }
  return out;
}

std::string record_to_json(const SurveyRecord& record) { return record_json(record).dump(2); }

std::string records_to_json(const std::vector<SurveyRecord>& records) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : records) arr.push_back(record_json(r));
  return arr.dump(1) + "\n";
}

std::string stats_to_csv(const std::vector<SweepRow>& rows) {
  std::string out = "R,pair,probability,sample_count,wilson_low,wilson_high\n";
  for (const auto& row : rows)
    for (const auto& s : row.stats)
      out += fmt::format("{},{},{},{},{},{}\n", number(row.ratio), s.pair, number(s.probability), s.sample_count,
                         number(s.wilson_low), number(s.wilson_high));
  return out;
}

std::string survey_metadata(const SurveyConfig& config) {
  nlohmann::json measures = nlohmann::json::array();
  nlohmann::json subsampled = nlohmann::json::array();
  for (Measure m : config.measures) {
    measures.push_back(std::string(to_string(m)));
    if (is_expensive(m, config.chsh_method) && config.expensive_stride > 1) subsampled.push_back(std::string(to_string(m)));
  }
  nlohmann::json meta = {{"n_qubits", config.n_qubits},
                         {"sample_count", config.sample_count},
                         {"family", std::string(to_string(config.family))},
                         {"measures", measures},
                         {"seed", config.seed},
                         {"chsh_method", config.chsh_method == ChshMethod::ClosedForm ? "closed_form" : "optimize"},
                         {"expensive_stride", config.expensive_stride},
                         {"subsampled_measures", subsampled}};
  if (config.family == StateFamily::FixedRatio) meta["R"] = config.ratio;
  return meta.dump(2) + "\n";
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoError, fmt::format("cannot open '{}' for writing", path.string()));
  out << text;
  if (!out) throw Error(ErrorKind::IoError, fmt::format("write to '{}' failed", path.string()));
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, fmt::format("cannot open '{}'", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void export_records(const std::vector<SurveyRecord>& records, const std::filesystem::path& path, ExportFormat format) {
  write_text(path, format == ExportFormat::Csv ? records_to_csv(records) : records_to_json(records));
}

void export_sweep(const std::vector<SweepRow>& rows, const std::filesystem::path& path) {
  write_text(path, stats_to_csv(rows));
}

}  // namespace qmix
