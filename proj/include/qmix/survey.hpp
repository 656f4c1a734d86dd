#pragma once

// Monte Carlo surveys over random states: sampling, per-state measures, coincidence
// statistics and flat-file export.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qmix/bell.hpp"
#include "qmix/states.hpp"

namespace qmix {

enum class StateFamily { HaarSimplex, BellDiagonal, FixedRatio, WernerSweep };
enum class Measure { Entropic, Concurrence, Discord, GeometricDiscord, Chsh, Mermin, Mabk };
enum class ExportFormat { Csv, Json };

std::string_view to_string(StateFamily family);
std::string_view to_string(Measure measure);
/// Throws Error(UnsupportedMeasure) / Error(ParseError) for unknown names.
StateFamily parse_family(std::string_view name);
Measure parse_measure(std::string_view name);
std::vector<Measure> parse_measure_list(std::string_view comma_separated);

/// Measures that need an optimiser (discord, Mermin, MABK, and CHSH when optimised).
bool is_expensive(Measure measure, ChshMethod chsh_method);

struct SurveyConfig {
  int n_qubits = 2;
  std::size_t sample_count = 1000;
  StateFamily family = StateFamily::HaarSimplex;
  double ratio = 2.0;  // fixed_ratio only
  std::vector<Measure> measures{Measure::Entropic};
  std::uint64_t seed = 0;
  int workers = 1;
  ChshMethod chsh_method = ChshMethod::ClosedForm;
  /// Expensive measures are evaluated on records whose id is a multiple of this.
  std::size_t expensive_stride = 1;
  BellOptions bell{};
  std::filesystem::path output;  // empty: keep in memory only
  ExportFormat format = ExportFormat::Csv;

  /// Throws Error(UnsupportedMeasure) for measures undefined at n_qubits,
  /// Error(UnsupportedSize) / Error(BadRatio) / Error(BadSettings) for other bad fields.
  void validate() const;
};

struct SurveyRecord {
  std::uint64_t state_id = 0;
  int n_qubits = 0;
  double ratio = 0.0;
  double lambda_max = 0.0;
  std::optional<double> min_conditional_nats;
  std::optional<double> min_conditional_ln2;
  std::optional<double> concurrence;
  std::optional<double> discord;
  std::optional<double> geometric_discord;
  std::optional<double> chsh_max;
  std::optional<double> mermin_max;
  std::optional<double> mabk_max;
  std::optional<bool> entropic_violated;
  std::optional<bool> entangled;  // n = 2 only
  std::optional<bool> nonlocal;   // from the Bell measure matching n

  bool operator==(const SurveyRecord&) const = default;
};

struct MeasureOptions {
  ChshMethod chsh_method = ChshMethod::ClosedForm;
  bool include_expensive = true;
  std::uint64_t seed = 0;
  BellOptions bell{};
  /// Allowed gap between the two discord searches.
  double discord_max_disagreement = 1e-6;
};

/// Evaluates the requested measures on one state.
SurveyRecord measure_state(const DensityMatrix& rho, const std::vector<Measure>& measures,
                           const MeasureOptions& opts = {});

/// Draws state `index` of a survey from its own substream.
DensityMatrix sample_state(const SurveyConfig& config, std::uint64_t index);

/// Records in id order; identical for any worker count. Writes `config.output` (plus a
/// `.meta.json` sidecar) when it is set.
std::vector<SurveyRecord> run_survey(const SurveyConfig& config);

enum class CoincidencePair { EntropicEntanglement, EntropicBell, EntanglementBell };
std::string_view to_string(CoincidencePair pair);

struct CoincidenceStats {
  std::string pair;
  double probability = 0.0;
  std::size_t sample_count = 0;
  double wilson_low = 0.0;
  double wilson_high = 0.0;
};

/// Fraction of records (among those carrying both flags) where the two classifications
/// agree. Throws Error(MissingMeasure) when no record carries both.
CoincidenceStats coincidence(const std::vector<SurveyRecord>& records, CoincidencePair pair);
/// Wilson score interval at 95 %.
std::pair<double, double> wilson_interval(std::size_t successes, std::size_t trials);

struct SweepRow {
  double ratio = 0.0;
  std::vector<CoincidenceStats> stats;  // every pair whose flags were computed
};

/// One fixed_ratio survey of `per_point` states per grid value.
std::vector<SweepRow> ratio_sweep(const SurveyConfig& config, const std::vector<double>& ratios,
                                  std::size_t per_point);

enum class Envelope { Chsh, Mermin, Mabk };

struct EnvelopeReport {
  double max_excess = -1e300;  // max of value - envelope(R)
  std::uint64_t worst_state = 0;
  std::size_t checked = 0;
};

/// CHSH against chsh_envelope, Mermin against mermin_envelope, MABK against its
/// classical bound on records with R >= 4. Throws Error(MissingMeasure) if nothing is
/// checkable.
EnvelopeReport envelope_check(const std::vector<SurveyRecord>& records, Envelope envelope);

std::string records_to_csv(const std::vector<SurveyRecord>& records);
std::vector<SurveyRecord> parse_records_csv(const std::string& text);
std::string records_to_json(const std::vector<SurveyRecord>& records);
std::string record_to_json(const SurveyRecord& record);
std::string stats_to_csv(const std::vector<SweepRow>& rows);
std::string survey_metadata(const SurveyConfig& config);

/// Throws Error(IoError).
void export_records(const std::vector<SurveyRecord>& records, const std::filesystem::path& path, ExportFormat format);
void export_sweep(const std::vector<SweepRow>& rows, const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace qmix
