#include "courtphase/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "courtphase/io.hpp"
#include "courtphase/report.hpp"

namespace courtphase {

namespace {

// --- YAML helpers ---

void check_keys(const YAML::Node& node, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!node.IsMap()) throw ConfigError(where + " must be a mapping");
  for (const auto& kv : node) {
    const std::string key = kv.first.as<std::string>();
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      throw ConfigError("unknown key '" + key + "' in " + where);
    }
  }
}

template <typename T>
T get(const YAML::Node& node, const char* key, const std::string& where) {
  try {
    return node[key].as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(where + "." + key + " has the wrong type");
  }
}

template <typename T>
void read_opt(const YAML::Node& parent, const char* key, const std::string& where, T& out) {
  if (parent[key]) out = get<T>(parent, key, where);
}

AttackDirection parse_attack(const std::string& s) {
  if (s == "positive_x") return AttackDirection::PositiveX;
  if (s == "negative_x") return AttackDirection::NegativeX;
  throw ConfigError("attack must be positive_x or negative_x, got '" + s + "'");
}

const char* attack_name(AttackDirection a) {
  return a == AttackDirection::PositiveX ? "positive_x" : "negative_x";
}

MatchTimeline parse_timeline(const YAML::Node& node) {
  if (!node.IsSequence()) throw ConfigError("timeline must be a list of periods");
  std::vector<Period> periods;
  for (std::size_t i = 0; i < node.size(); ++i) {
    const YAML::Node p = node[i];
    const std::string where = "timeline[" + std::to_string(i) + "]";
    check_keys(p, where, {"start_ms", "end_ms", "attack"});
    if (!p["start_ms"] || !p["end_ms"] || !p["attack"]) {
      throw ConfigError(where + " needs start_ms, end_ms and attack");
    }
    Period period;
    period.start_ms = get<TimestampMs>(p, "start_ms", where);
    period.end_ms = get<TimestampMs>(p, "end_ms", where);
    period.attack = parse_attack(get<std::string>(p, "attack", where));
    periods.push_back(period);
  }
  try {
    return MatchTimeline(std::move(periods));
  } catch (const Error& e) {
    throw ConfigError(std::string("timeline: ") + e.what());
  }
}

Court parse_court(const YAML::Node& node) {
  check_keys(node, "court", {"length", "width"});
  Court c;
  read_opt(node, "length", "court", c.length);
  read_opt(node, "width", "court", c.width);
  return c;
}

YAML::Node emit_timeline(const MatchTimeline& timeline) {
  YAML::Node seq(YAML::NodeType::Sequence);
  for (const Period& p : timeline.periods()) {
    YAML::Node n;
    n["start_ms"] = p.start_ms;
    n["end_ms"] = p.end_ms;
    n["attack"] = attack_name(p.attack);
    n.SetStyle(YAML::EmitterStyle::Flow);
    seq.push_back(n);
  }
  return seq;
}

// Shortest round-trip text; yaml-cpp's default prints 17 significant digits.
YAML::Node num(double v) { return YAML::Node(format_double(v)); }

// --- staged helpers ---

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  return in;
}

template <typename Fn>
auto in_stage(const char* stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
}

RawSession load_session(const PipelineConfig& config, ParseDiagnostics& diagnostics) {
  if (config.input.empty()) throw ConfigError("no input file configured");
  std::ifstream in = open_input(config.input);
  RawSession raw = parse_records(in, config.format, diagnostics);
  raw.court = config.settings.court;
  RawSession clipped = clip_to_play(raw, config.timeline);
  return select_roster(clipped, config.settings.roster);
}

void check_players(std::span<const PlayerId> found, std::span<const PlayerId> roster, const std::string& file) {
  std::vector<PlayerId> want(roster.begin(), roster.end());
  std::sort(want.begin(), want.end());
  if (!std::equal(found.begin(), found.end(), want.begin(), want.end())) {
    throw InputError(file + " players do not match the configured roster");
  }
}

void fit_and_write(const PipelineConfig& config, const FeatureMatrix& raw_features, ClusterModel& model,
                   std::optional<KSelection>& selection) {
  const AnalysisSettings& s = config.settings;
  if (raw_features.rows() == 0) throw InputError("no feature rows to cluster");
  FeatureMatrix scaled;
  const FeatureMatrix* data = &raw_features;
  if (s.standardize) {
    scaled = raw_features;
    standardize_columns(scaled);
    data = &scaled;
  }
  if (s.k_range) {
    KSelectionOptions o;
    o.k_min = s.k_range->first;
    o.k_max = s.k_range->second;
    o.min_ratio = s.min_ratio;
    o.min_gain = s.min_gain;
    o.seed = s.seed;
    o.restarts = s.restarts;
    o.max_iter = s.max_iter;
    o.tol = s.tol;
    selection = select_k(data->view(), o);
    model = selection->model;
  } else {
    KMeansOptions o;
    o.k = *s.fixed_k;
    o.seed = s.seed;
    o.restarts = s.restarts;
    o.max_iter = s.max_iter;
    o.tol = s.tol;
    model = kmeans(data->view(), o);
    selection.reset();
  }

  const std::filesystem::path& dir = config.out_dir;
  {
    std::ostringstream out;
    write_labels_csv(out, raw_features.timestamps, model.labels);
    write_file_atomic(dir / files::kLabels, out.str());
  }
  {
    std::ostringstream out;
    write_model(out, model, raw_features.pairs);
    write_file_atomic(dir / files::kModel, out.str());
  }
  if (selection) {
    std::ostringstream out;
    write_selection_csv(out, *selection);
    write_file_atomic(dir / files::kSelection, out.str());
  } else {
    std::error_code ec;
    std::filesystem::remove(dir / files::kSelection, ec);
  }
}

SelectionTable to_table(const KSelection& s) {
  SelectionTable t;
  t.candidates = s.candidates;
  t.chosen_k = s.chosen_k;
  t.fallback = s.fallback;
  return t;
}

void remove_report(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::remove(dir / files::kReport, ec);
}

}  // namespace

// --- config ---

void PipelineConfig::validate() const {
  const AnalysisSettings& s = settings;
  if (timeline.empty()) throw ConfigError("timeline must list at least one period");
  if (s.roster.size() != kTeamSize) throw ConfigError("roster must list exactly 5 players");
  std::set<PlayerId> unique(s.roster.begin(), s.roster.end());
  if (unique.size() != kTeamSize) throw ConfigError("roster players must be distinct");
  if (!(s.court.length > 0.0) || !(s.court.width > 0.0)) throw ConfigError("court dimensions must be positive");
  if (s.grid_step < 1) throw ConfigError("grid_ms must be at least 1");
  if (s.kalman_enabled) {
    try {
      s.kalman.validate();
    } catch (const Error& e) {
      throw ConfigError(std::string("kalman: ") + e.what());
    }
  }
  if (s.fixed_k.has_value() == s.k_range.has_value()) {
    throw ConfigError("clustering needs exactly one of k or k_range");
  }
  if (s.fixed_k && *s.fixed_k < 1) throw ConfigError("k must be at least 1");
  if (s.k_range && (s.k_range->first < 1 || s.k_range->first >= s.k_range->second)) {
    throw ConfigError("k_range must be [a, b] with 1 <= a < b");
  }
  if (s.restarts < 1) throw ConfigError("restarts must be at least 1");
  if (s.max_iter < 1) throw ConfigError("max_iter must be at least 1");
  if (!(s.tol >= 0.0)) throw ConfigError("tol must be non-negative");
  if (format.scale <= 0.0) throw ConfigError("input.scale must be positive");
  if (out_dir.empty()) throw ConfigError("output.dir must not be empty");
}

PipelineConfig parse_config(const std::string& yaml, const std::filesystem::path& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("invalid YAML: ") + e.what());
  }
  if (!root || root.IsNull()) throw ConfigError("empty config");
  check_keys(root, "config", {"input", "court", "timeline", "roster", "grid_ms", "kalman", "clustering", "output"});

  PipelineConfig cfg;
  AnalysisSettings& s = cfg.settings;
  if (const YAML::Node in = root["input"]) {
    check_keys(in, "input", {"path", "delimiter", "header", "columns", "scale", "max_rejects"});
    if (in["path"]) {
      std::filesystem::path p = get<std::string>(in, "path", "input");
      cfg.input = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
    }
    if (in["delimiter"]) {
      std::string d = get<std::string>(in, "delimiter", "input");
      if (d == "\\t" || d == "tab") d = "\t";
      if (d.size() != 1) throw ConfigError("input.delimiter must be a single character");
      cfg.format.delimiter = d[0];
    }
    if (in["header"]) {
      const std::string h = get<std::string>(in, "header", "input");
      if (h == "auto") cfg.format.header = HeaderMode::Auto;
      else if (h == "yes" || h == "true") cfg.format.header = HeaderMode::Present;
      else if (h == "no" || h == "false") cfg.format.header = HeaderMode::Absent;
      else throw ConfigError("input.header must be auto, yes or no");
    }
    if (const YAML::Node cols = in["columns"]) {
      check_keys(cols, "input.columns", {"timestamp", "player", "x", "y", "z"});
      const char* names[] = {"timestamp", "player", "x", "y", "z"};
      for (std::size_t i = 0; i < 5; ++i) read_opt(cols, names[i], "input.columns", cfg.format.columns[i]);
    }
    read_opt(in, "scale", "input", cfg.format.scale);
    read_opt(in, "max_rejects", "input", cfg.format.max_rejects);
  }
  if (root["court"]) s.court = parse_court(root["court"]);
  if (root["timeline"]) cfg.timeline = parse_timeline(root["timeline"]);
  if (root["roster"]) s.roster = get<std::vector<PlayerId>>(root, "roster", "config");
  read_opt(root, "grid_ms", "config", s.grid_step);
  if (const YAML::Node k = root["kalman"]) {
    check_keys(k, "kalman", {"enabled", "process_noise_accel", "measurement_noise", "initial_velocity_variance"});
    read_opt(k, "enabled", "kalman", s.kalman_enabled);
    read_opt(k, "process_noise_accel", "kalman", s.kalman.process_noise_accel);
    read_opt(k, "measurement_noise", "kalman", s.kalman.measurement_noise);
    read_opt(k, "initial_velocity_variance", "kalman", s.kalman.initial_velocity_variance);
  }
  if (const YAML::Node c = root["clustering"]) {
    check_keys(c, "clustering",
               {"k", "k_range", "seed", "restarts", "max_iter", "tol", "min_ratio", "min_gain", "standardize"});
    if (c["k"]) s.fixed_k = get<std::size_t>(c, "k", "clustering");
    if (c["k_range"]) {
      const auto r = get<std::vector<std::size_t>>(c, "k_range", "clustering");
      if (r.size() != 2) throw ConfigError("clustering.k_range must have two entries");
      s.k_range = std::make_pair(r[0], r[1]);
    }
    read_opt(c, "seed", "clustering", s.seed);
    read_opt(c, "restarts", "clustering", s.restarts);
    read_opt(c, "max_iter", "clustering", s.max_iter);
    read_opt(c, "tol", "clustering", s.tol);
    read_opt(c, "min_ratio", "clustering", s.min_ratio);
    read_opt(c, "min_gain", "clustering", s.min_gain);
    read_opt(c, "standardize", "clustering", s.standardize);
  }
  if (!s.fixed_k && !s.k_range) s.k_range = std::make_pair(std::size_t{2}, std::size_t{12});
  if (const YAML::Node o = root["output"]) {
    check_keys(o, "output", {"dir", "plots"});
    if (o["dir"]) cfg.out_dir = get<std::string>(o, "dir", "output");
    read_opt(o, "plots", "output", cfg.plots);
  }
  if (cfg.out_dir.is_relative() && !base_dir.empty()) cfg.out_dir = base_dir / cfg.out_dir;
  return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path.parent_path());
}

std::string config_to_yaml(const PipelineConfig& config) {
  const AnalysisSettings& s = config.settings;
  YAML::Node root;
  YAML::Node in;
  in["path"] = config.input.string();
  in["delimiter"] = std::string(1, config.format.delimiter);
  in["header"] = config.format.header == HeaderMode::Auto      ? "auto"
                 : config.format.header == HeaderMode::Present ? "yes"
                                                               : "no";
  const char* names[] = {"timestamp", "player", "x", "y", "z"};
  for (std::size_t i = 0; i < 5; ++i) in["columns"][names[i]] = config.format.columns[i];
  in["scale"] = num(config.format.scale);
  in["max_rejects"] = config.format.max_rejects;
  root["input"] = in;
  root["court"]["length"] = num(s.court.length);
  root["court"]["width"] = num(s.court.width);
  root["timeline"] = emit_timeline(config.timeline);
  YAML::Node roster(YAML::NodeType::Sequence);
  for (PlayerId p : s.roster) roster.push_back(p);
  roster.SetStyle(YAML::EmitterStyle::Flow);
  root["roster"] = roster;
  root["grid_ms"] = s.grid_step;
  root["kalman"]["enabled"] = s.kalman_enabled;
  root["kalman"]["process_noise_accel"] = num(s.kalman.process_noise_accel);
  root["kalman"]["measurement_noise"] = num(s.kalman.measurement_noise);
  root["kalman"]["initial_velocity_variance"] = num(s.kalman.initial_velocity_variance);
  YAML::Node c;
  if (s.fixed_k) c["k"] = *s.fixed_k;
  if (s.k_range) {
    YAML::Node r(YAML::NodeType::Sequence);
    r.push_back(s.k_range->first);
    r.push_back(s.k_range->second);
    r.SetStyle(YAML::EmitterStyle::Flow);
    c["k_range"] = r;
  }
  c["seed"] = s.seed;
  c["restarts"] = s.restarts;
  c["max_iter"] = s.max_iter;
  c["tol"] = num(s.tol);
  c["min_ratio"] = num(s.min_ratio);
  c["min_gain"] = num(s.min_gain);
  c["standardize"] = s.standardize;
  root["clustering"] = c;
  root["output"]["dir"] = config.out_dir.string();
  root["output"]["plots"] = config.plots;
  YAML::Emitter out;
  out << root;
  return std::string(out.c_str()) + "\n";
}

// --- scenario ---

Scenario parse_scenario(const std::string& yaml) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("invalid YAML: ") + e.what());
  }
  if (!root || root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
  check_keys(root, "scenario",
             {"preset", "duration_ms", "jitter_std", "seed", "sampling_mean_ms", "transition_ms", "grid_ms",
              "players", "court", "timeline", "formations", "schedule"});

  Scenario sc;
  std::uint64_t seed = 1;
  double jitter = 0.3;
  read_opt(root, "seed", "scenario", seed);
  read_opt(root, "jitter_std", "scenario", jitter);
  if (root["preset"]) {
    const std::string preset = get<std::string>(root, "preset", "scenario");
    if (preset != "eight_formations") throw ConfigError("unknown scenario preset '" + preset + "'");
    TimestampMs duration = 600'000;
    read_opt(root, "duration_ms", "scenario", duration);
    sc = eight_formation_scenario(duration, jitter, seed);
  } else if (root["duration_ms"]) {
    throw ConfigError("duration_ms is only meaningful with a preset");
  }
  sc.seed = seed;
  sc.jitter_std = jitter;
  read_opt(root, "sampling_mean_ms", "scenario", sc.sampling_mean_ms);
  read_opt(root, "transition_ms", "scenario", sc.transition_ms);
  read_opt(root, "grid_ms", "scenario", sc.grid_step);
  if (root["players"]) {
    const auto players = get<std::vector<PlayerId>>(root, "players", "scenario");
    if (players.size() != kTeamSize) throw ConfigError("scenario.players must list 5 ids");
    std::copy(players.begin(), players.end(), sc.players.begin());
  }
  if (root["court"]) sc.court = parse_court(root["court"]);
  if (root["timeline"]) sc.timeline = parse_timeline(root["timeline"]);
  if (const YAML::Node fs = root["formations"]) {
    if (!fs.IsSequence()) throw ConfigError("scenario.formations must be a list");
    sc.formations.clear();
    for (std::size_t i = 0; i < fs.size(); ++i) {
      const std::string where = "formations[" + std::to_string(i) + "]";
      check_keys(fs[i], where, {"name", "anchors"});
      Formation f;
      f.name = fs[i]["name"] ? get<std::string>(fs[i], "name", where) : "F" + std::to_string(i + 1);
      const auto anchors = get<std::vector<std::vector<double>>>(fs[i], "anchors", where);
      if (anchors.size() != kTeamSize) throw ConfigError(where + ".anchors must list 5 points");
      for (std::size_t p = 0; p < kTeamSize; ++p) {
        if (anchors[p].size() != 2) throw ConfigError(where + ".anchors entries must be [x, y]");
        f.anchors[p] = Point{anchors[p][0], anchors[p][1]};
      }
      sc.formations.push_back(f);
    }
  }
  if (const YAML::Node sched = root["schedule"]) {
    if (!sched.IsSequence()) throw ConfigError("scenario.schedule must be a list");
    sc.schedule.clear();
    for (std::size_t i = 0; i < sched.size(); ++i) {
      const std::string where = "schedule[" + std::to_string(i) + "]";
      check_keys(sched[i], where, {"formation", "duration_ms"});
      ScheduleSegment seg;
      const YAML::Node f = sched[i]["formation"];
      if (!f) throw ConfigError(where + " needs a formation");
      std::size_t index = sc.formations.size();
      try {
        index = f.as<std::size_t>();
      } catch (const YAML::Exception&) {
        const std::string name = f.as<std::string>();
        auto it = std::find_if(sc.formations.begin(), sc.formations.end(),
                               [&](const Formation& x) { return x.name == name; });
        if (it == sc.formations.end()) throw ConfigError(where + ": unknown formation '" + name + "'");
        index = static_cast<std::size_t>(it - sc.formations.begin());
      }
      seg.formation = index;
      seg.duration_ms = get<TimestampMs>(sched[i], "duration_ms", where);
      sc.schedule.push_back(seg);
    }
  }
  try {
    sc.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  }
  return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_scenario(text.str());
}

const char* analysis_frames_file(const AnalysisSettings& settings) {
  return settings.kalman_enabled ? files::kFiltered : files::kFrames;
}

// --- stages ---

IngestSummary run_ingest_stage(const PipelineConfig& config) {
  return in_stage("ingest", [&] {
    config.validate();
    IngestSummary summary;
    RawSession session = load_session(config, summary.diagnostics);
    summary.retained_samples = session.samples.size();
    std::filesystem::create_directories(config.out_dir);
    AtomicFileWriter writer(config.out_dir / files::kFrames);
    bool header = false;
    stream_periods(
        session, config.timeline, config.settings.grid_step,
        [&](const GridLayout& layout) {
          if (!header) write_frames_header(writer.stream(), layout.players);
          header = true;
          ++summary.segments;
        },
        [&](TimestampMs t, std::span<const Point> positions, std::span<const std::uint8_t>) {
          write_frame_row(writer.stream(), t, positions);
          ++summary.frames;
        });
    if (summary.frames == 0) throw InputError("no frames produced");
    writer.commit();
    return summary;
  });
}

void run_filter_stage(const PipelineConfig& config) {
  in_stage("filter", [&] {
    config.validate();
    if (!config.settings.kalman_enabled) return;
    std::ifstream in = open_input(config.out_dir / files::kFrames);
    FrameCsvReader reader(in);
    check_players(reader.players(), config.settings.roster, files::kFrames);
    const KalmanParams params = config.settings.kalman.with_grid_step(config.settings.grid_step);
    SegmentTracker tracker(config.settings.grid_step, &config.timeline);
    AtomicFileWriter writer(config.out_dir / files::kFiltered);
    write_frames_header(writer.stream(), reader.players());
    std::optional<FrameFilter> filter;
    TimestampMs t = 0;
    std::vector<Point> positions;
    std::size_t rows = 0;
    while (reader.next(t, positions)) {
      if (tracker.starts_segment(t)) filter.emplace(positions.size(), params);
      filter->apply(positions);
      write_frame_row(writer.stream(), t, positions);
      ++rows;
    }
    if (rows == 0) throw InputError(std::string(files::kFrames) + " has no frames");
    writer.commit();
  });
}

std::size_t run_features_stage(const PipelineConfig& config) {
  return in_stage("features", [&] {
    config.validate();
    const char* source = analysis_frames_file(config.settings);
    std::ifstream in = open_input(config.out_dir / source);
    FrameCsvReader reader(in);
    check_players(reader.players(), config.settings.roster, source);
    AtomicFileWriter writer(config.out_dir / files::kFeatures);
    write_features_header(writer.stream(), pair_labels(reader.players()));
    TimestampMs t = 0;
    std::vector<Point> positions;
    std::size_t rows = 0;
    while (reader.next(t, positions)) {
      const FeatureVector v = pairwise_distances(positions);
      write_feature_row(writer.stream(), t, v);
      ++rows;
    }
    if (rows == 0) throw InputError(std::string(source) + " has no frames");
    writer.commit();
    return rows;
  });
}

ClusterModel run_fit_stage(const PipelineConfig& config) {
  return in_stage("fit", [&] {
    config.validate();
    std::ifstream in = open_input(config.out_dir / files::kFeatures);
    const FeatureMatrix features = read_features_csv(in, config.settings.grid_step, &config.timeline);
    ClusterModel model;
    std::optional<KSelection> selection;
    fit_and_write(config, features, model, selection);
    return model;
  });
}

PhaseReport run_report_stage(const PipelineConfig& config) {
  return in_stage("report", [&] {
    config.validate();
    const std::filesystem::path& dir = config.out_dir;
    remove_report(dir);
    const TimestampMs step = config.settings.grid_step;
    std::ifstream fin = open_input(dir / files::kFeatures);
    const FeatureMatrix features = read_features_csv(fin, step, &config.timeline);
    std::ifstream lin = open_input(dir / files::kLabels);
    std::vector<TimestampMs> label_times;
    const std::vector<ClusterId> labels = read_labels_csv(lin, &label_times);
    if (label_times != features.timestamps) {
      throw InputError(std::string(files::kLabels) + " does not match " + files::kFeatures);
    }
    std::ifstream min = open_input(dir / files::kModel);
    const LoadedModel loaded = read_model(min);
    if (loaded.pairs != features.pairs) {
      throw InputError(std::string(files::kModel) + " pairs do not match " + files::kFeatures);
    }
    for (ClusterId l : labels) {
      if (l >= loaded.model.k) throw InputError("label " + std::to_string(l) + " exceeds model k");
    }
    std::optional<SelectionTable> selection;
    if (config.settings.k_range) {
      std::ifstream sin = open_input(dir / files::kSelection);
      selection = read_selection_csv(sin);
    }
    std::ifstream frin = open_input(dir / analysis_frames_file(config.settings));
    const std::vector<FrameSeries> frames = read_frames_csv(frin, step, &config.timeline);
    const CentroidSeries centroids = centroid_series(frames);
    if (centroids.timestamps != features.timestamps) {
      throw InputError(std::string(analysis_frames_file(config.settings)) + " does not match " +
                       files::kFeatures);
    }
    const std::vector<Side> sides = label_offense(centroids, config.timeline, config.settings.court);
    PhaseReport report = build_phase_report(features, labels, loaded.model.k, sides);
    ModelFacts facts = ModelFacts::from(loaded.model);
    write_report_bundle(dir, report, facts, selection, config.settings, config.plots);
    return report;
  });
}

PipelineResult run_pipeline(const PipelineConfig& config) {
  try {
    config.validate();
  } catch (const Error& e) {
    throw StageError("config", e.what());
  }
  const std::filesystem::path& dir = config.out_dir;
  std::filesystem::create_directories(dir);
  remove_report(dir);

  PipelineResult result;
  const AnalysisSettings& s = config.settings;
  std::vector<FrameSeries> segments = in_stage("ingest", [&] {
    RawSession session = load_session(config, result.ingest.diagnostics);
    result.ingest.retained_samples = session.samples.size();
    std::vector<FrameSeries> segs = regularize_periods(session, config.timeline, s.grid_step);
    result.ingest.segments = segs.size();
    for (const FrameSeries& f : segs) result.ingest.frames += f.frame_count();
    if (result.ingest.frames == 0) throw InputError("no frames produced");
    std::ostringstream out;
    write_frames_csv(out, segs);
    write_file_atomic(dir / files::kFrames, out.str());
    return segs;
  });

  if (s.kalman_enabled) {
    in_stage("filter", [&] {
      const KalmanParams params = s.kalman.with_grid_step(s.grid_step);
      for (FrameSeries& f : segments) f = filter_frames(f, params);
      std::ostringstream out;
      write_frames_csv(out, segments);
      write_file_atomic(dir / files::kFiltered, out.str());
    });
  }

  in_stage("features", [&] {
    result.features = build_feature_matrix(std::span<const FrameSeries>(segments));
    std::ostringstream out;
    write_features_csv(out, result.features);
    write_file_atomic(dir / files::kFeatures, out.str());
  });

  in_stage("fit", [&] { fit_and_write(config, result.features, result.model, result.selection); });

  in_stage("report", [&] {
    const CentroidSeries centroids = centroid_series(std::span<const FrameSeries>(segments));
    result.sides = label_offense(centroids, config.timeline, s.court);
    result.report = build_phase_report(result.features, result.model.labels, result.model.k, result.sides);
    std::optional<SelectionTable> table;
    if (result.selection) table = to_table(*result.selection);
    write_report_bundle(dir, result.report, ModelFacts::from(result.model), table, s, config.plots);
  });
  return result;
}

}  // namespace courtphase
