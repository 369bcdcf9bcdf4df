// courtphase: match phase segmentation from player-tracking data.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "courtphase/io.hpp"
#include "courtphase/pipeline.hpp"
#include "courtphase/synth.hpp"

namespace cp = courtphase;

namespace {

struct Overrides {
  std::string config;
  std::string input;
  std::string out;
  std::optional<long long> grid_ms;
  std::optional<std::size_t> k;
  std::vector<std::size_t> k_range;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> restarts;
  bool no_kalman = false;
  bool quiet = false;
};

void add_pipeline_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "Pipeline config (YAML)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--input", o.input, "Raw sensor file (overrides input.path)");
  cmd->add_option("--out", o.out, "Output directory (overrides output.dir)");
  cmd->add_option("--grid-ms", o.grid_ms, "Grid step in milliseconds")->check(CLI::PositiveNumber);
  auto* k = cmd->add_option("--k", o.k, "Fixed number of clusters")->check(CLI::PositiveNumber);
  auto* range = cmd->add_option("--k-range", o.k_range, "Candidate k range A,B")
                    ->delimiter(',')
                    ->expected(2);
  k->excludes(range);
  cmd->add_option("--seed", o.seed, "Clustering seed");
  cmd->add_option("--restarts", o.restarts, "k-means restarts")->check(CLI::PositiveNumber);
  cmd->add_flag("--no-kalman", o.no_kalman, "Skip Kalman filtering");
  cmd->add_flag("--quiet", o.quiet, "Only report errors");
}

cp::PipelineConfig resolve(const Overrides& o) {
  cp::PipelineConfig c = cp::load_config(o.config);
  cp::AnalysisSettings& s = c.settings;
  if (!o.input.empty()) c.input = o.input;
  if (!o.out.empty()) c.out_dir = o.out;
  if (o.grid_ms) s.grid_step = *o.grid_ms;
  if (o.k) {
    s.fixed_k = *o.k;
    s.k_range.reset();
  }
  if (!o.k_range.empty()) {
    s.k_range = std::make_pair(o.k_range[0], o.k_range[1]);
    s.fixed_k.reset();
  }
  if (o.seed) s.seed = *o.seed;
  if (o.restarts) s.restarts = *o.restarts;
  if (o.no_kalman) s.kalman_enabled = false;
  c.quiet = o.quiet;
  c.validate();
  return c;
}

void describe_ingest(const cp::IngestSummary& s) {
  std::cerr << "ingest: " << s.diagnostics.parsed << " records parsed, " << s.diagnostics.rejected
            << " rejected, " << s.retained_samples << " retained; " << s.frames << " frames in " << s.segments
            << " segment(s)\n";
  for (const std::string& m : s.diagnostics.reject_messages) std::cerr << "  rejected: " << m << "\n";
}

void describe_model(const cp::ClusterModel& m) {
  std::cerr << "fit: k=" << m.k << " BD/TD=" << cp::format_double(m.deviance.ratio())
            << " iterations=" << m.iterations << "\n";
}

std::string synth_config(const cp::SyntheticSession& syn, const cp::Scenario& sc) {
  cp::PipelineConfig c;
  c.input = "session.csv";
  c.format.header = cp::HeaderMode::Present;
  c.timeline = syn.timeline;
  c.settings.roster.assign(sc.players.begin(), sc.players.end());
  c.settings.court = sc.court;
  c.settings.grid_step = sc.grid_step;
  // Synthetic players jump between formations.
  c.settings.kalman.measurement_noise = sc.jitter_std * sc.jitter_std;
  c.settings.kalman.process_noise_accel = 1000.0;
  c.settings.k_range = std::make_pair(std::size_t{2}, std::size_t{12});
  c.out_dir = "out";
  return cp::config_to_yaml(c);
}

int run_synth(const std::string& scenario_path, const std::string& preset, long long duration_ms, double jitter,
              std::uint64_t seed, const std::string& out, bool quiet) {
  cp::Scenario sc;
  if (!scenario_path.empty()) {
    sc = cp::load_scenario(scenario_path);
  } else {
    if (preset != "eight_formations") throw cp::ConfigError("unknown preset '" + preset + "'");
    sc = cp::eight_formation_scenario(duration_ms, jitter, seed);
  }
  const cp::SyntheticSession syn = cp::generate_session(sc);
  const std::filesystem::path dir = out;
  std::filesystem::create_directories(dir);
  std::ostringstream session;
  cp::write_session_csv(session, syn.session);
  cp::write_file_atomic(dir / "session.csv", session.str());
  std::ostringstream truth;
  cp::write_truth_csv(truth, syn.truth);
  cp::write_file_atomic(dir / "truth.csv", truth.str());
  cp::write_file_atomic(dir / "config.yaml", synth_config(syn, sc));
  if (!quiet) {
    std::cerr << "synth: " << syn.session.samples.size() << " samples, " << syn.truth.size()
              << " truth instants, " << sc.formations.size() << " formations -> " << dir.string() << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"courtphase: segment a basketball match into spatial phases"};
  app.require_subcommand(1);
  app.fallthrough(false);

  Overrides o;
  auto* ingest = app.add_subcommand("ingest", "Parse, clip, select roster and regularize to frames.csv");
  auto* filter = app.add_subcommand("filter", "Kalman-filter frames.csv into filtered.csv");
  auto* features = app.add_subcommand("features", "Pairwise distances into features.csv");
  auto* fit = app.add_subcommand("fit", "Cluster features (k or k-range) into labels.csv and model.txt");
  auto* report = app.add_subcommand("report", "Phase summaries, MDS maps, transitions, plots, report.json");
  auto* run = app.add_subcommand("run", "All stages in one pass");
  for (CLI::App* cmd : {ingest, filter, features, fit, report, run}) add_pipeline_flags(cmd, o);

  auto* synth = app.add_subcommand("synth", "Generate a synthetic session with ground truth");
  std::string scenario_path, preset = "eight_formations", synth_out = "synth";
  long long duration_ms = 600000;
  double jitter = 0.3;
  std::uint64_t synth_seed = 1;
  bool synth_quiet = false;
  synth->add_option("--scenario", scenario_path, "Scenario file (YAML)")->check(CLI::ExistingFile);
  synth->add_option("--preset", preset, "Built-in scenario")->capture_default_str();
  synth->add_option("--duration-ms", duration_ms, "Preset duration")->check(CLI::PositiveNumber)->capture_default_str();
  synth->add_option("--jitter", jitter, "Preset jitter std (m)")->check(CLI::NonNegativeNumber)->capture_default_str();
  synth->add_option("--seed", synth_seed, "Preset seed")->capture_default_str();
  synth->add_option("--out", synth_out, "Output directory")->capture_default_str();
  synth->add_flag("--quiet", synth_quiet, "Only report errors");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  const char* stage = "config";
  try {
    if (synth->parsed()) {
      stage = "synth";
      return run_synth(scenario_path, preset, duration_ms, jitter, synth_seed, synth_out, synth_quiet);
    }
    const cp::PipelineConfig config = resolve(o);
    stage = "pipeline";
    if (run->parsed()) {
      const cp::PipelineResult r = cp::run_pipeline(config);
      if (!config.quiet) {
        describe_ingest(r.ingest);
        describe_model(r.model);
        std::cerr << "report: " << r.report.instants << " instants -> "
                  << (config.out_dir / cp::files::kReport).string() << "\n";
      }
    } else if (ingest->parsed()) {
      const cp::IngestSummary s = cp::run_ingest_stage(config);
      if (!config.quiet) describe_ingest(s);
    } else if (filter->parsed()) {
      cp::run_filter_stage(config);
      if (!config.quiet) {
        std::cerr << (config.settings.kalman_enabled ? "filter: wrote filtered.csv\n"
                                                     : "filter: Kalman disabled, nothing to do\n");
      }
    } else if (features->parsed()) {
      const std::size_t rows = cp::run_features_stage(config);
      if (!config.quiet) std::cerr << "features: " << rows << " rows\n";
    } else if (fit->parsed()) {
      const cp::ClusterModel m = cp::run_fit_stage(config);
      if (!config.quiet) describe_model(m);
    } else if (report->parsed()) {
      const cp::PhaseReport r = cp::run_report_stage(config);
      if (!config.quiet) std::cerr << "report: " << r.instants << " instants, " << r.summaries.size() << " phases\n";
    }
  } catch (const cp::StageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << stage << ": " << e.what() << "\n";
    return 1;
  }
  return 0;
}
