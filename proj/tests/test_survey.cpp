#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>

#include <json.hpp>

#include "qmix/entropic.hpp"
#include "qmix/error.hpp"
#include "qmix/survey.hpp"

using namespace qmix;
using Catch::Matchers::WithinAbs;

namespace {

SurveyConfig two_qubit(std::size_t samples, std::uint64_t seed) {
  SurveyConfig c;
  c.n_qubits = 2;
  c.sample_count = samples;
  c.measures = {Measure::Entropic, Measure::Concurrence, Measure::Chsh, Measure::GeometricDiscord};
  c.seed = seed;
  return c;
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "qmix-test-survey";
  std::filesystem::create_directories(dir);
  return dir / name;
}

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an Error");
  return ErrorKind::ParseError;
}

}  // namespace

TEST_CASE("names parse and print") {
  for (auto f : {StateFamily::HaarSimplex, StateFamily::BellDiagonal, StateFamily::FixedRatio, StateFamily::WernerSweep})
    CHECK(parse_family(to_string(f)) == f);
  for (auto m : {Measure::Entropic, Measure::Concurrence, Measure::Discord, Measure::GeometricDiscord, Measure::Chsh,
                 Measure::Mermin, Measure::Mabk})
    CHECK(parse_measure(to_string(m)) == m);
  CHECK(parse_measure_list("entropic,chsh") == std::vector<Measure>{Measure::Entropic, Measure::Chsh});
  CHECK(kind_of([] { parse_measure("teleportation"); }) == ErrorKind::UnsupportedMeasure);
  CHECK(kind_of([] { parse_family("gibbs"); }) == ErrorKind::ParseError);
  CHECK(is_expensive(Measure::Discord, ChshMethod::ClosedForm));
  CHECK_FALSE(is_expensive(Measure::Chsh, ChshMethod::ClosedForm));
  CHECK(is_expensive(Measure::Chsh, ChshMethod::Optimize));
}

TEST_CASE("configurations are validated") {
  SurveyConfig c = two_qubit(10, 0);
  c.n_qubits = 3;
  CHECK(kind_of([&] { c.validate(); }) == ErrorKind::UnsupportedMeasure);
  c = two_qubit(10, 0);
  c.measures = {Measure::Mermin};
  CHECK(kind_of([&] { c.validate(); }) == ErrorKind::UnsupportedMeasure);
  c = two_qubit(10, 0);
  c.n_qubits = 5;
  CHECK(kind_of([&] { c.validate(); }) == ErrorKind::UnsupportedSize);
  c = two_qubit(10, 0);
  c.family = StateFamily::FixedRatio;
  c.ratio = 7.0;
  CHECK(kind_of([&] { c.validate(); }) == ErrorKind::BadRatio);
  c = two_qubit(10, 0);
  c.workers = 0;
  CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("measure_state on named states") {
  const SurveyRecord bell = measure_state(ghz(2), {Measure::Entropic, Measure::Concurrence, Measure::Chsh});
  CHECK(bell.n_qubits == 2);
  CHECK_THAT(bell.ratio, WithinAbs(1.0, 1e-12));
  CHECK_THAT(*bell.min_conditional_nats, WithinAbs(-std::log(2.0), 1e-12));
  CHECK_THAT(*bell.min_conditional_ln2, WithinAbs(-1.0, 1e-12));
  CHECK(*bell.entropic_violated);
  CHECK(*bell.entangled);
  CHECK(*bell.nonlocal);
  CHECK_FALSE(bell.mermin_max.has_value());

  const SurveyRecord mixed = measure_state(maximally_mixed(2), {Measure::Entropic, Measure::Concurrence});
  CHECK_FALSE(*mixed.entangled);
  CHECK_FALSE(mixed.nonlocal.has_value());

  const SurveyRecord skipped = measure_state(ghz(2), {Measure::Discord, Measure::Concurrence},
                                             MeasureOptions{.include_expensive = false});
  CHECK_FALSE(skipped.discord.has_value());
  CHECK(skipped.concurrence.has_value());
}

TEST_CASE("surveys are reproducible and independent of the worker count") {
  SurveyConfig c = two_qubit(60, 17);
  c.measures.push_back(Measure::Discord);
  c.expensive_stride = 5;
  const auto a = run_survey(c);
  const auto b = run_survey(c);
  c.workers = 3;
  const auto threaded = run_survey(c);
  REQUIRE(a.size() == 60);
  CHECK(a == b);
  CHECK(a == threaded);
  for (const auto& r : a) {
    CHECK(r.discord.has_value() == (r.state_id % 5 == 0));
    CHECK(r.concurrence.has_value());
  }
  c.seed = 18;
  CHECK(run_survey(c) != a);
}

TEST_CASE("sampled families have the expected shape") {
  SurveyConfig c = two_qubit(20, 3);
  c.family = StateFamily::FixedRatio;
  c.ratio = 2.5;
  for (const auto& r : run_survey(c)) CHECK_THAT(r.ratio, WithinAbs(2.5, 1e-9));

  c = two_qubit(20, 3);
  c.family = StateFamily::BellDiagonal;
  for (const auto& r : run_survey(c)) CHECK(r.concurrence.has_value());

  c.family = StateFamily::WernerSweep;
  c.n_qubits = 3;
  c.measures = {Measure::Entropic};
  for (std::uint64_t i = 0; i < 5; ++i) CHECK(sample_state(c, i).n_qubits() == 3);
  CHECK(max_abs_diff(sample_state(c, 4).matrix(), sample_state(c, 4).matrix()) == 0.0);
}

TEST_CASE("CSV export") {
  CHECK(records_to_csv({}) ==
        "state_id,n_qubits,R,lambda_max,min_conditional_nats,min_conditional_ln2,concurrence,discord,"
        "geometric_discord,chsh_max,mermin_max,mabk_max,entropic_violated,entangled,nonlocal\n");
  const auto records = run_survey(two_qubit(50, 5));
  const std::string text = records_to_csv(records);
  const auto parsed = parse_records_csv(text);
  CHECK(parsed == records);
  for (auto pair : {CoincidencePair::EntropicEntanglement, CoincidencePair::EntropicBell, CoincidencePair::EntanglementBell}) {
    const auto x = coincidence(records, pair), y = coincidence(parsed, pair);
    CHECK(x.probability == y.probability);
    CHECK(x.sample_count == y.sample_count);
  }
  CHECK(kind_of([] { parse_records_csv("state_id,bogus\n"); }) == ErrorKind::ParseError);
}

TEST_CASE("JSON export") {
  const auto records = run_survey(two_qubit(3, 1));
  const auto doc = nlohmann::json::parse(records_to_json(records));
  REQUIRE(doc.size() == 3);
  CHECK(doc[1]["state_id"] == 1);
  CHECK(doc[0]["mermin_max"].is_null());
  CHECK(doc[0]["concurrence"].get<double>() == *records[0].concurrence);
}

TEST_CASE("coincidence statistics") {
  auto [lo, hi] = wilson_interval(50, 100);
  CHECK_THAT(lo, WithinAbs(0.4038, 1e-4));
  CHECK_THAT(hi, WithinAbs(0.5962, 1e-4));
  std::tie(lo, hi) = wilson_interval(0, 10);
  CHECK(lo == 0.0);
  CHECK(hi > 0.0);
  std::tie(lo, hi) = wilson_interval(10, 10);
  CHECK(hi == 1.0);

  std::vector<SurveyRecord> rs(4);
  rs[0].entropic_violated = true, rs[0].entangled = true;
  rs[1].entropic_violated = false, rs[1].entangled = true;
  rs[2].entropic_violated = false, rs[2].entangled = false;
  rs[3].entropic_violated = true;  // missing entanglement flag, ignored
  const CoincidenceStats s = coincidence(rs, CoincidencePair::EntropicEntanglement);
  CHECK(s.pair == "entropic-entanglement");
  CHECK(s.sample_count == 3);
  CHECK_THAT(s.probability, WithinAbs(2.0 / 3.0, 1e-15));
  CHECK(s.wilson_low <= s.probability);
  CHECK(s.wilson_high >= s.probability);
  CHECK(kind_of([&] { coincidence(rs, CoincidencePair::EntropicBell); }) == ErrorKind::MissingMeasure);
}

TEST_CASE("fixed ratio 3.5 has neither violations nor nonlocality") {
  SurveyConfig c = two_qubit(300, 8);
  c.family = StateFamily::FixedRatio;
  c.ratio = 3.5;
  for (const auto& r : run_survey(c)) {
    CHECK_FALSE(*r.entropic_violated);
    CHECK_FALSE(*r.nonlocal);
  }
}

TEST_CASE("ratio sweep") {
  const auto rows = ratio_sweep(two_qubit(0, 2), {1.5, 3.0}, 40);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].ratio == 1.5);
  CHECK(rows[0].stats.size() == 3);
  for (const auto& s : rows[1].stats) CHECK(s.sample_count == 40);
  const std::string csv = stats_to_csv(rows);
  CHECK(csv.rfind("R,pair,probability,sample_count,wilson_low,wilson_high\n", 0) == 0);
}

TEST_CASE("envelope check") {
  SurveyConfig c = two_qubit(200, 4);
  c.family = StateFamily::FixedRatio;
  c.ratio = 1.8;
  const EnvelopeReport rep = envelope_check(run_survey(c), Envelope::Chsh);
  CHECK(rep.checked == 200);
  CHECK(rep.max_excess <= 1e-9);
  CHECK(kind_of([&] { envelope_check(run_survey(c), Envelope::Mermin); }) == ErrorKind::MissingMeasure);
}

TEST_CASE("output files and metadata") {
  SurveyConfig c = two_qubit(5, 6);
  c.output = scratch("out.csv");
  c.expensive_stride = 2;
  c.measures.push_back(Measure::Discord);
  const auto records = run_survey(c);
  CHECK(parse_records_csv(read_text(c.output)) == records);
  const auto meta = nlohmann::json::parse(read_text(scratch("out.csv.meta.json")));
  CHECK(meta["seed"] == 6);
  CHECK(meta["expensive_stride"] == 2);
  CHECK(meta["family"] == "haar_simplex");
  CHECK(kind_of([] { read_text(scratch("missing/none.csv")); }) == ErrorKind::IoError);
}

TEST_CASE("disagreeing Bell searches escalate before failing") {
  SurveyConfig c;
  c.n_qubits = 4;
  c.seed = 1;
  c.measures = {Measure::Mabk};
  const DensityMatrix rho = sample_state(c, 0);
  MeasureOptions mo;
  mo.bell.restarts = 1;
  mo.bell.anneal.chains = 1;
  mo.bell.escalations = 0;
  CHECK(kind_of([&] { measure_state(rho, c.measures, mo); }) == ErrorKind::OptimizerFailure);
  mo.bell.escalations = 2;
  const SurveyRecord r = measure_state(rho, c.measures, mo);
  CHECK_THAT(*r.mabk_max, WithinAbs(mabk_max(rho, 4).value, 1e-3));
}

TEST_CASE("two-qubit region bookkeeping") {
  SurveyConfig c = two_qubit(20'000, 21);
  c.measures = {Measure::Entropic, Measure::Concurrence, Measure::Chsh};
  std::size_t in_separable_ball = 0, in_local_shell = 0;
  for (const auto& r : run_survey(c)) {
    if (r.ratio >= 3.0) {
      ++in_separable_ball;
      CHECK_FALSE(*r.entangled);
    } else if (r.ratio >= 2.0) {
      ++in_local_shell;
      CHECK_FALSE(*r.nonlocal);
      CHECK_FALSE(*r.entropic_violated);
    }
  }
  CHECK(in_separable_ball > 100);
  CHECK(in_local_shell > 1000);
}

TEST_CASE("maximally mixed sweep point agrees on every pair") {
  const auto rows = ratio_sweep(two_qubit(0, 12), {4.0}, 50);
  REQUIRE(rows[0].stats.size() == 3);
  for (const auto& s : rows[0].stats) CHECK(s.probability == 1.0);
}

TEST_CASE("three-qubit states with R <= 1.2 violate an entropic inequality") {
  RandomStream rng(22);
  for (int i = 0; i < 2000; ++i) {
    const double r = 1.0 + 0.2 * (i + 0.5) / 2000.0;
    CHECK(entropic_report(random_fixed_ratio(3, r, rng)).violated);
  }
}

TEST_CASE("four-qubit entropic violations for R in [3, 16] (reported)") {
  RandomStream rng(23);
  int violations = 0;
  double largest = 0.0;
  for (int i = 0; i < 2000; ++i) {
    const double r = 3.0 + 13.0 * (i + 0.5) / 2000.0;
    if (entropic_report(random_fixed_ratio(4, r, rng)).violated) {
      ++violations;
      largest = std::max(largest, r);
    }
  }
  WARN("four-qubit fixed-R states violating for R in [3, 16]: " << violations << " of 2000, largest R " << largest);
  CHECK(violations < 2000);
}

TEST_CASE("MABK stays classical beyond R = 4") {
  SurveyConfig c;
  c.n_qubits = 4;
  c.sample_count = 20;
  c.family = StateFamily::FixedRatio;
  c.ratio = 4.0;
  c.measures = {Measure::Mabk};
  c.seed = 24;
  const EnvelopeReport rep = envelope_check(run_survey(c), Envelope::Mabk);
  CHECK(rep.checked == 20);
  CHECK(rep.max_excess <= 1e-6);
}

TEST_CASE("Mermin envelope bounds a Haar sample", "[envelope-claim]") {
  SurveyConfig c;
  c.n_qubits = 3;
  c.sample_count = 1000;
  c.measures = {Measure::Mermin};
  c.seed = 9;
  const EnvelopeReport rep = envelope_check(run_survey(c), Envelope::Mermin);
  INFO("worst state " << rep.worst_state);
  CHECK(rep.checked == 1000);
  CHECK(rep.max_excess <= 5e-3);
}
