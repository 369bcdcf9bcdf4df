#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "courtphase/io.hpp"
#include "courtphase/pipeline.hpp"

using namespace courtphase;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("courtphase_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::map<std::string, std::string> tree(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = slurp(e.path());
  }
  return out;
}

// A short synthetic match on disk plus a config pointing at it.
PipelineConfig workspace(const fs::path& dir, TimestampMs duration = 60'000, std::uint64_t seed = 3) {
  const Scenario sc = eight_formation_scenario(duration, 0.3, seed);
  const SyntheticSession syn = generate_session(sc);
  std::ostringstream session;
  write_session_csv(session, syn.session);
  write_file_atomic(dir / "session.csv", session.str());
  PipelineConfig c;
  c.input = dir / "session.csv";
  c.format.header = HeaderMode::Present;
  c.timeline = syn.timeline;
  c.settings.roster.assign(sc.players.begin(), sc.players.end());
  c.settings.grid_step = sc.grid_step;
  c.settings.k_range = std::make_pair(std::size_t{2}, std::size_t{10});
  c.settings.restarts = 4;
  c.out_dir = dir / "out";
  c.quiet = true;
  return c;
}

const char* kMinimal = R"(
input:
  path: data/session.csv
timeline:
  - {start_ms: 0, end_ms: 600000, attack: positive_x}
  - {start_ms: 600000, end_ms: 1200000, attack: negative_x}
roster: [1, 2, 4, 5, 6]
grid_ms: 20
)";

}  // namespace

TEST_CASE("parse_config reads a minimal config with defaults") {
  const PipelineConfig c = parse_config(kMinimal, "/base");
  CHECK(c.input == fs::path("/base/data/session.csv"));
  CHECK(c.timeline.periods().size() == 2);
  CHECK(c.timeline.periods()[1].attack == AttackDirection::NegativeX);
  CHECK(c.settings.roster == std::vector<PlayerId>{1, 2, 4, 5, 6});
  CHECK(c.settings.grid_step == 20);
  CHECK(c.settings.kalman_enabled);
  REQUIRE(c.settings.k_range.has_value());
  CHECK(c.settings.k_range->first == 2);
  CHECK(c.settings.k_range->second == 12);
  CHECK_FALSE(c.settings.fixed_k.has_value());
  CHECK(c.out_dir == fs::path("/base/out"));
  c.validate();
}

TEST_CASE("parse_config rejects bad configs") {
  const std::string base = kMinimal;
  CHECK_THROWS_AS(parse_config(base + "bogus: 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config(base + "clustering: {k: 4, k_range: [2, 6]}\n").validate(), ConfigError);
  CHECK_THROWS_AS(parse_config(base + "clustering: {k_range: [6, 2]}\n").validate(), ConfigError);
  CHECK_THROWS_AS(parse_config(base + "kalman: {measurement_noise: -1}\n").validate(), ConfigError);
  CHECK_THROWS_AS(parse_config(base + "clustering: {restarts: 0}\n").validate(), ConfigError);
  CHECK_THROWS_AS(parse_config(base + "court: {length: 0}\n").validate(), ConfigError);
  CHECK_THROWS_AS(parse_config("timeline:\n  - {start_ms: 0, end_ms: 10, attack: up}\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("timeline:\n  - {start_ms: 10, end_ms: 0, attack: positive_x}\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("roster: [1, 2, 3]\ntimeline: [{start_ms: 0, end_ms: 9, attack: positive_x}]\n")
                      .validate(),
                  ConfigError);
  CHECK_THROWS_AS(parse_config("grid_ms: [1\n"), ConfigError);
}

TEST_CASE("config_to_yaml round trips") {
  PipelineConfig c = parse_config(std::string(kMinimal) +
                                  "kalman: {measurement_noise: 0.04}\nclustering: {k: 5, seed: 9, tol: 1.0e-7}\n");
  const std::string once = config_to_yaml(c);
  const PipelineConfig back = parse_config(once);
  CHECK(config_to_yaml(back) == once);
  CHECK(back.settings.fixed_k == std::optional<std::size_t>{5});
  CHECK(back.settings.seed == 9);
  CHECK(back.settings.tol == 1e-7);
  CHECK(back.settings.kalman.measurement_noise == 0.04);
}

TEST_CASE("parse_scenario") {
  const Scenario preset = parse_scenario("preset: eight_formations\nduration_ms: 30000\nseed: 4\n");
  CHECK(preset.formations.size() == 8);
  TimestampMs total = 0;
  for (const auto& s : preset.schedule) total += s.duration_ms;
  CHECK(total == 30000);

  const Scenario custom = parse_scenario(R"(
jitter_std: 0
formations:
  - name: spread
    anchors: [[20, 2], [20, 13], [26, 7], [24, 4], [24, 11]]
  - name: back
    anchors: [[4, 2], [4, 13], [2, 7], [6, 4], [6, 11]]
schedule:
  - {formation: spread, duration_ms: 4000}
  - {formation: 1, duration_ms: 2000}
)");
  REQUIRE(custom.schedule.size() == 2);
  CHECK(custom.schedule[0].formation == 0);
  CHECK(custom.schedule[1].formation == 1);
  CHECK(custom.formations[1].anchors[2] == Point{2, 7});

  CHECK_THROWS_AS(parse_scenario("duration_ms: 100\n"), ConfigError);
  CHECK_THROWS_AS(parse_scenario("preset: nine\n"), ConfigError);
  CHECK_THROWS_AS(parse_scenario("formations: [{name: a, anchors: [[1, 1]]}]\n"), ConfigError);
}

TEST_CASE("staged execution reproduces the in-memory run byte for byte") {
  const fs::path dir = scratch("staged");
  PipelineConfig c = workspace(dir);
  const PipelineResult r = run_pipeline(c);
  CHECK(r.ingest.segments == 1);
  CHECK(r.selection.has_value());
  const auto whole = tree(c.out_dir);
  CHECK(whole.count(files::kReport) == 1);
  CHECK(whole.count(files::kSelection) == 1);

  c.out_dir = dir / "staged";
  fs::create_directories(c.out_dir);
  run_ingest_stage(c);
  run_filter_stage(c);
  run_features_stage(c);
  run_fit_stage(c);
  run_report_stage(c);
  const auto staged = tree(c.out_dir);
  REQUIRE(staged.size() == whole.size());
  for (const auto& [name, body] : whole) {
    INFO(name);
    CHECK(staged.at(name) == body);
  }
  fs::remove_all(dir);
}

TEST_CASE("repeated runs are identical and refitting is stable") {
  const fs::path dir = scratch("repeat");
  PipelineConfig c = workspace(dir, 40'000, 5);
  run_pipeline(c);
  const auto first = tree(c.out_dir);
  run_pipeline(c);
  CHECK(tree(c.out_dir) == first);
  run_fit_stage(c);
  CHECK(slurp(c.out_dir / files::kModel) == first.at(files::kModel));
  CHECK(slurp(c.out_dir / files::kLabels) == first.at(files::kLabels));
  fs::remove_all(dir);
}

TEST_CASE("fixed k, no filter") {
  const fs::path dir = scratch("fixed");
  PipelineConfig c = workspace(dir, 30'000, 6);
  c.settings.k_range.reset();
  c.settings.fixed_k = 1;
  c.settings.kalman_enabled = false;
  c.plots = false;
  const PipelineResult r = run_pipeline(c);
  CHECK(r.model.k == 1);
  CHECK_FALSE(r.selection.has_value());
  CHECK_FALSE(fs::exists(c.out_dir / files::kSelection));
  CHECK_FALSE(fs::exists(c.out_dir / files::kFiltered));
  CHECK(r.model.deviance.between == doctest::Approx(0.0).epsilon(1e-9));
  for (ClusterId l : r.model.labels) CHECK(l == 0);
  fs::remove_all(dir);
}

TEST_CASE("a failing stage leaves no report behind") {
  const fs::path dir = scratch("failure");
  PipelineConfig c = workspace(dir, 30'000, 7);
  run_pipeline(c);
  REQUIRE(fs::exists(c.out_dir / files::kReport));

  // Truncated labels make the report stage fail.
  std::string labels = slurp(c.out_dir / files::kLabels);
  labels.resize(labels.size() / 2);
  labels = labels.substr(0, labels.rfind('\n') + 1);
  write_file_atomic(c.out_dir / files::kLabels, labels);
  try {
    run_report_stage(c);
    FAIL("expected a StageError");
  } catch (const StageError& e) {
    CHECK(e.stage() == "report");
  }
  CHECK_FALSE(fs::exists(c.out_dir / files::kReport));

  run_pipeline(c);
  REQUIRE(fs::exists(c.out_dir / files::kReport));
  c.input = dir / "missing.csv";
  try {
    run_pipeline(c);
    FAIL("expected a StageError");
  } catch (const StageError& e) {
    CHECK(e.stage() == "ingest");
  }
  CHECK_FALSE(fs::exists(c.out_dir / files::kReport));

  c = workspace(dir, 30'000, 7);
  c.settings.roster = {1, 2, 3, 4, 5};
  CHECK_THROWS_AS(run_pipeline(c), StageError);
  fs::remove_all(dir);
}

#ifdef COURTPHASE_TOOL
namespace {

int tool(const std::string& args) {
  const std::string cmd = std::string("\"") + COURTPHASE_TOOL + "\" " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST_CASE("command line exit codes and synth round trip") {
  const fs::path dir = scratch("cli");
  CHECK(tool("--help") == 0);
  CHECK(tool("") == 2);
  CHECK(tool("run") == 2);
  CHECK(tool("run --config " + (dir / "nope.yaml").string()) == 2);
  CHECK(tool("run --config x --k 3 --k-range 2,4") == 2);
  write_file_atomic(dir / "bad.yaml", "grid_ms: -5\n");
  CHECK(tool("run --config " + (dir / "bad.yaml").string()) == 1);

  const fs::path syn = dir / "syn";
  REQUIRE(tool("synth --duration-ms 30000 --seed 4 --quiet --out " + syn.string()) == 0);
  CHECK(fs::exists(syn / "session.csv"));
  CHECK(fs::exists(syn / "truth.csv"));
  REQUIRE(tool("run --quiet --restarts 3 --config " + (syn / "config.yaml").string()) == 0);

  PipelineConfig c = load_config(syn / "config.yaml");
  c.settings.restarts = 3;
  c.out_dir = dir / "inproc";
  c.quiet = true;
  run_pipeline(c);
  CHECK(slurp(c.out_dir / files::kReport) == slurp(syn / "out" / files::kReport));
  CHECK(slurp(c.out_dir / files::kLabels) == slurp(syn / "out" / files::kLabels));
  fs::remove_all(dir);
}
#endif
