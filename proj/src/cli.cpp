#include "gsindy/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "gsindy/analysis.hpp"
#include "gsindy/csv.hpp"
#include "gsindy/kinematics.hpp"
#include "gsindy/parallel.hpp"
#include "gsindy/pipeline.hpp"
#include "gsindy/report.hpp"
#include "gsindy/trajectory.hpp"

#ifndef GESTURE_SINDY_VERSION
#define GESTURE_SINDY_VERSION "0.0.0"
#endif

namespace gsindy::cli {

namespace fs = std::filesystem;

const char* version() noexcept { return GESTURE_SINDY_VERSION; }

int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument:
    case ErrorKind::DuplicateTerm:
      return kExitUsage;
    case ErrorKind::NonFiniteInput:
    case ErrorKind::DegenerateTrack:
    case ErrorKind::Parse:
    case ErrorKind::Io:
      return kExitData;
    case ErrorKind::InvalidState:
    case ErrorKind::IntegrationFailure:
    case ErrorKind::IllConditioned:
    case ErrorKind::EmptyModel:
    case ErrorKind::Infeasible:
      return kExitNumerical;
  }
  return kExitNumerical;
}

namespace {

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  return out;
}

void write_json(const fs::path& path, const Json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void write_run_manifest(const Config& cfg, const RunOptions& opts, std::uint64_t seed, Json outputs) {
  Json j;
  j["command"] = opts.command;
  j["version"] = version();
  j["config"] = opts.config ? Json(opts.config->string()) : Json(nullptr);
  j["config_hash"] = "fnv1a:" + hex64(cfg.hash());
  j["seed"] = seed;
  j["jobs"] = opts.jobs;
  j["outputs"] = std::move(outputs);
  write_json(opts.out / "run.json", j);
}

// Named sub-blocks exist only for simulate runs and synth groups.
void reject_unknown_sections(const Config& cfg) {
  for (const auto& name : cfg.section_names()) {
    const auto dot = name.find('.');
    const auto base = name.substr(0, dot);
    const bool known = dot == std::string::npos
                           ? (base == "simulate" || base == "synth" || base == "segment" || base == "discover" ||
                              base == "analyze")
                           : (base == "simulate" || base == "synth") && dot + 1 < name.size();
    if (!known) throw Error(ErrorKind::InvalidArgument, "unknown config section [" + name + "]");
  }
}

std::vector<Channel> parse_channels(const ConfigSection& s, std::vector<Channel> fallback) {
  if (!s.has("channels")) return fallback;
  std::vector<Channel> out;
  for (const auto& name : s.get_list("channels", {})) out.push_back(parse_channel(name));
  if (out.empty()) throw Error(ErrorKind::InvalidArgument, "[" + s.name() + "] channels is empty");
  return out;
}

bool wanted(const std::vector<Channel>& channels, Channel c) {
  return std::find(channels.begin(), channels.end(), c) != channels.end();
}

fs::path require_path(const ConfigSection& s, std::string_view key) {
  const auto v = s.raw(key);
  if (!v || v->empty())
    throw Error(ErrorKind::InvalidArgument, "[" + s.name() + "] " + std::string(key) + " is required");
  const fs::path p(*v);
  if (!fs::exists(p))
    throw Error(ErrorKind::InvalidArgument, "[" + s.name() + "] " + std::string(key) + ": " + p.string() +
                                                " does not exist");
  return p;
}

IntegratorOptions integrator_options(const ConfigSection& s) {
  IntegratorOptions o;
  o.rtol = s.get_double("rtol", o.rtol);
  o.atol = s.get_double("atol", o.atol);
  if (!(o.rtol > 0) || !(o.atol > 0))
    throw Error(ErrorKind::InvalidArgument, "[" + s.name() + "] rtol and atol must be positive");
  return o;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulationRun {
  std::string name;
  GestureModel model;
  OscillatorParams params;
  double t0 = 0, t1 = 0.25, dt = 0.001;
  IntegratorOptions integrator;
  std::string activation = "none";
};

SimulationRun simulation_run(const ConfigSection& s, std::string name) {
  s.require_known({"model", "k", "b", "damping_ratio", "d", "target", "x0", "v0", "t0", "t1", "dt",
                   "activation", "ta", "tb", "tc", "td", "rtol", "atol"});
  SimulationRun r;
  r.name = std::move(name);
  r.model.form = parse_model_form(s.get_string("model", "linear"));
  auto& p = r.params;
  p.k = s.get_double("k", 2000);
  if (!(p.k > 0)) throw Error(ErrorKind::InvalidArgument, "[" + s.name() + "] k must be positive");
  p.b = s.has("b") ? s.get_double("b", 0) : s.get_double("damping_ratio", 1.0) * critical_damping(p.k);
  p.d = s.get_double("d", 0);
  p.target = s.get_double("target", 0.2);
  p.x0 = s.get_double("x0", 1.0);
  p.v0 = s.get_double("v0", 0.0);
  p.validate();
  r.t0 = s.get_double("t0", 0.0);
  r.t1 = s.get_double("t1", 0.25);
  r.dt = s.get_double("dt", 0.001);
  if (!(r.t1 > r.t0) || !(r.dt > 0))
    throw Error(ErrorKind::InvalidArgument, "[" + s.name() + "] need t1 > t0 and dt > 0");
  r.integrator = integrator_options(s);
  r.activation = s.get_string("activation", "none");
  if (r.activation == "step") {
    r.model.activation = ActivationSchedule::step(s.get_double("ta", r.t0), s.get_double("tb", r.t1));
  } else if (r.activation == "ramped") {
    for (const char* key : {"ta", "tb", "tc", "td"})
      if (!s.has(key))
        throw Error(ErrorKind::InvalidArgument, "[" + s.name() + "] ramped activation needs ta, tb, tc, td");
    r.model.activation = ActivationSchedule::ramped(s.get_double("ta", 0), s.get_double("tb", 0),
                                                    s.get_double("tc", 0), s.get_double("td", 0));
  } else if (r.activation != "none") {
    throw Error(ErrorKind::InvalidArgument,
                "[" + s.name() + "] activation must be none, step or ramped, got '" + r.activation + "'");
  }
  return r;
}

// ---------------------------------------------------------------------------
// synth

SyntheticSpec synthetic_spec(const Config& cfg, const RunOptions& opts) {
  const auto base = cfg.section("synth");
  base.require_known({"sample_rate", "noise", "seed", "channel"});
  SyntheticSpec spec;
  spec.sample_rate = base.get_double("sample_rate", 1000);
  spec.noise = base.get_double("noise", 0);
  spec.seed = opts.seed ? *opts.seed : base.get_u64("seed", 0);
  spec.channel = parse_channel(base.get_string("channel", "LA"));
  for (const auto& g : cfg.subsections("synth")) {
    g.require_known({"form", "count", "k", "damping_ratio", "cubic_ratio", "target", "amplitude", "duration"});
    SyntheticGroup grp;
    grp.name = g.name().substr(std::string("synth.").size());
    grp.form = parse_model_form(g.get_string("form", "linear"));
    grp.count = static_cast<std::size_t>(g.get_u64("count", 100));
    grp.k = g.get_range("k", grp.k);
    grp.damping_ratio = g.get_range("damping_ratio", grp.damping_ratio);
    grp.cubic_ratio = g.get_range("cubic_ratio", grp.cubic_ratio);
    grp.target = g.get_range("target", grp.target);
    grp.amplitude = g.get_range("amplitude", grp.amplitude);
    const auto dur = g.get_string("duration", "0.25");
    if (dur == "half_cycle")
      grp.duration.reset();
    else
      grp.duration = g.get_double("duration", 0.25);
    spec.groups.push_back(std::move(grp));
  }
  if (spec.groups.empty()) {
    SyntheticGroup grp;
    grp.name = "linear";
    grp.count = 100;
    spec.groups.push_back(grp);
  }
  spec.validate();
  return spec;
}

// ---------------------------------------------------------------------------
// discover

FitConfig fit_config(const ConfigSection& s) {
  FitConfig cfg;
  cfg.order = s.get_int("order", 2);
  if (cfg.order != 1 && cfg.order != 2)
    throw Error(ErrorKind::InvalidArgument, "[" + s.name() + "] order must be 1 or 2");
  if (s.has("terms")) {
    cfg.library = FeatureLibrary::custom(s.get_list("terms", {}), cfg.order);
  } else {
    const int degree = s.get_int("degree", cfg.order == 2 ? 1 : 3);
    if (degree < 1 || degree > 4) throw Error(ErrorKind::InvalidArgument, "[" + s.name() + "] degree must be 1..4");
    cfg.library = polynomial_library(degree, cfg.order, s.get_bool("cross_terms", true));
  }
  cfg.thresholds = s.get_doubles("thresholds", cfg.thresholds);
  cfg.stlsq.alpha = s.get_double("alpha", cfg.stlsq.alpha);
  cfg.stlsq.max_iter = s.get_int("stlsq_max_iter", cfg.stlsq.max_iter);
  cfg.sr3.nu = s.get_double("nu", cfg.sr3.nu);
  cfg.sr3.max_iter = s.get_int("sr3_max_iter", cfg.sr3.max_iter);
  cfg.sr3.tolerance = s.get_double("tolerance", cfg.sr3.tolerance);
  cfg.integrator = integrator_options(s);
  cfg.validate();
  return cfg;
}

struct FitOutcome {
  std::optional<TokenFit> fit;
  std::string error;
  ErrorKind kind = ErrorKind::InvalidArgument;
};

template <typename Fn>
FitOutcome guarded_fit(Fn&& fn) {
  FitOutcome o;
  try {
    o.fit = fn();
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::InvalidArgument || e.kind() == ErrorKind::Io) throw;
    o.error = e.what();
    o.kind = e.kind();
  }
  return o;
}

void write_outcomes(const fs::path& path, std::span<const GestureToken> tokens,
                    std::span<const FitOutcome> outcomes) {
  auto out = open_out(path);
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    if (outcomes[i].fit) {
      out << to_json(*outcomes[i].fit).dump() << '\n';
    } else {
      const Json j{{"token_id", tokens[i].id},
                   {"channel", std::string(to_string(tokens[i].channel))},
                   {"error", outcomes[i].error},
                   {"kind", to_string(outcomes[i].kind)}};
      out << j.dump() << '\n';
    }
  }
}

std::vector<TokenFit> successes(std::span<const FitOutcome> outcomes) {
  std::vector<TokenFit> out;
  for (const auto& o : outcomes)
    if (o.fit) out.push_back(*o.fit);
  return out;
}

std::string describe(const SupportMask& s, const FeatureLibrary& lib) {
  std::string out;
  const Eigen::Index e = s.cols() - 1;
  for (Eigen::Index j = 0; j < s.rows(); ++j)
    if (s(j, e)) out += (out.empty() ? "" : ", ") + lib.terms()[static_cast<std::size_t>(j)].name();
  return "{" + out + "}";
}

}  // namespace

// ---------------------------------------------------------------------------
// Commands

int cmd_simulate(const Config& cfg, const RunOptions& opts, std::ostream& log) {
  const auto base = cfg.section("simulate");
  std::vector<SimulationRun> runs;
  const auto subs = cfg.subsections("simulate");
  if (subs.empty()) {
    runs.push_back(simulation_run(base, "trajectory"));
  } else {
    for (const auto& s : subs)
      runs.push_back(simulation_run(ConfigSection::merge(base, s), s.name().substr(std::string("simulate.").size())));
  }

  fs::create_directories(opts.out);
  const auto trajectories = parallel_map(runs.size(), opts.jobs, [&](std::size_t i) {
    const auto& r = runs[i];
    return integrate(r.model, r.params, r.t0, r.t1, r.dt, r.integrator);
  });

  Json entries = Json::array();
  Json outputs = Json::array();
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& r = runs[i];
    const std::string file = r.name + ".csv";
    write_trajectory_csv(opts.out / file, trajectories[i]);
    const auto& a = r.model.activation;
    entries.push_back({{"name", r.name},
                       {"file", file},
                       {"model", std::string(to_string(r.model.form))},
                       {"k", r.params.k},
                       {"b", r.params.b},
                       {"d", r.params.d},
                       {"target", r.params.target},
                       {"x0", r.params.x0},
                       {"v0", r.params.v0},
                       {"t0", r.t0},
                       {"t1", r.t1},
                       {"dt", r.dt},
                       {"rtol", r.integrator.rtol},
                       {"atol", r.integrator.atol},
                       {"activation", {{"kind", r.activation}, {"ta", a.ta()}, {"tb", a.tb()}, {"tc", a.tc()}, {"td", a.td()}}},
                       {"samples", trajectories[i].size()}});
    outputs.push_back(file);
    log << "simulate: " << r.name << " -> " << (opts.out / file).string() << " (" << trajectories[i].size()
        << " samples, final x = " << csv::format_number(trajectories[i].x(trajectories[i].size() - 1)) << ")\n";
  }
  write_json(opts.out / "simulate_manifest.json", {{"runs", entries}});
  outputs.push_back("simulate_manifest.json");
  write_run_manifest(cfg, opts, 0, outputs);
  return kExitOk;
}

int cmd_synth(const Config& cfg, const RunOptions& opts, std::ostream& log) {
  const SyntheticSpec spec = synthetic_spec(cfg, opts);
  const SyntheticCorpus corpus = generate_synthetic_corpus(spec);
  fs::create_directories(opts.out);
  Json groups = Json::array();
  for (const auto& g : spec.groups)
    groups.push_back({{"name", g.name},
                      {"form", std::string(to_string(g.form))},
                      {"count", g.count},
                      {"k", {g.k.lo, g.k.hi}},
                      {"damping_ratio", {g.damping_ratio.lo, g.damping_ratio.hi}},
                      {"cubic_ratio", {g.cubic_ratio.lo, g.cubic_ratio.hi}},
                      {"target", {g.target.lo, g.target.hi}},
                      {"amplitude", {g.amplitude.lo, g.amplitude.hi}},
                      {"duration", g.duration ? Json(*g.duration) : Json("half_cycle")}});
  write_token_set(opts.out, corpus.tokens,
                  {{"source", "synth"},
                   {"seed", spec.seed},
                   {"noise", spec.noise},
                   {"sample_rate", spec.sample_rate},
                   {"groups", groups}});
  Json truth = Json::array();
  for (const auto& t : corpus.truth) truth.push_back(to_json(t));
  write_json(opts.out / "ground_truth.json", truth);
  write_run_manifest(cfg, opts, spec.seed, {"manifest.json", "ground_truth.json", "tokens/"});
  log << "synth: " << corpus.tokens.size() << " tokens -> " << opts.out.string() << "\n";
  return kExitOk;
}

int cmd_segment(const Config& cfg, const RunOptions& opts, std::ostream& log) {
  const auto s = cfg.section("segment");
  s.require_known({"input", "pauses", "sample_rate", "channels", "max_duration", "prominence"});
  const fs::path input = require_path(s, "input");
  const double sample_rate = s.get_double("sample_rate", kDefaultSampleRate);
  if (!(sample_rate > 0)) throw Error(ErrorKind::InvalidArgument, "[segment] sample_rate must be positive");
  const bool explicit_channels = s.has("channels");
  const auto channels = parse_channels(s, {std::begin(kAllChannels), std::end(kAllChannels)});
  FilterConfig filter;
  filter.max_duration = s.get_double("max_duration", filter.max_duration);
  filter.prominence_fraction = s.get_double("prominence", filter.prominence_fraction);

  struct Input {
    fs::path csv;
    std::optional<fs::path> pauses;
  };
  std::vector<Input> inputs;
  if (fs::is_directory(input)) {
    if (s.has("pauses")) throw Error(ErrorKind::InvalidArgument, "[segment] pauses applies to a single input file");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(input)) {
      const auto name = entry.path().filename().string();
      if (entry.is_regular_file() && entry.path().extension() == ".csv" &&
          !(name.size() > 11 && name.ends_with(".pauses.csv")))
        files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      fs::path side = f.parent_path() / (f.stem().string() + ".pauses.csv");
      inputs.push_back({f, fs::exists(side) ? std::optional<fs::path>(side) : std::nullopt});
    }
  } else {
    std::optional<fs::path> pauses;
    if (s.has("pauses")) pauses = require_path(s, "pauses");
    inputs.push_back({input, pauses});
  }

  std::vector<Recording> recordings;
  for (const auto& in : inputs) recordings.push_back(read_recording(in.csv, in.pauses, sample_rate));

  struct Job {
    std::size_t recording;
    Channel channel;
  };
  std::vector<Job> jobs;
  Json notices = Json::array();
  for (std::size_t r = 0; r < recordings.size(); ++r) {
    if (recordings[r].samples() == 0) {
      notices.push_back({{"speaker", recordings[r].speaker}, {"message", "empty recording"}});
      continue;
    }
    for (Channel c : channels) {
      const bool has_pellets = c == Channel::LA
                                   ? recordings[r].tracks.count("UL") && recordings[r].tracks.count("LL")
                                   : recordings[r].tracks.count(c == Channel::TT ? "T1" : c == Channel::TD ? "T3" : "T4");
      if (!has_pellets && !explicit_channels) continue;
      jobs.push_back({r, c});
    }
  }

  struct JobResult {
    Segmentation seg;
    std::optional<std::string> skipped;
  };
  auto results = parallel_map(jobs.size(), opts.jobs, [&](std::size_t i) {
    JobResult res;
    const auto& rec = recordings[jobs[i].recording];
    try {
      const ChannelSignal sig = extract_channel(rec, jobs[i].channel);
      res.seg = segment(sig, rec.pauses);
      filter_tokens(res.seg.tokens, filter);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::DegenerateTrack) throw;
      res.skipped = e.what();
    }
    return res;
  });

  std::vector<GestureToken> tokens;
  std::uint64_t next_id = 0;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const auto& rec = recordings[jobs[i].recording];
    const std::string ch(to_string(jobs[i].channel));
    if (results[i].skipped)
      notices.push_back({{"speaker", rec.speaker}, {"channel", ch}, {"message", *results[i].skipped}});
    for (const auto& n : results[i].seg.notices)
      notices.push_back({{"speaker", rec.speaker}, {"channel", ch}, {"start", n.start}, {"end", n.end}, {"message", n.message}});
    for (auto& tok : results[i].seg.tokens) {
      tok.id = next_id++;
      tokens.push_back(std::move(tok));
    }
  }

  fs::create_directories(opts.out);
  write_token_set(opts.out, tokens,
                  {{"source", "segment"},
                   {"recordings", inputs.size()},
                   {"max_duration", filter.max_duration},
                   {"prominence", filter.prominence_fraction},
                   {"notices", notices}});
  write_run_manifest(cfg, opts, 0, {"manifest.json", "tokens/"});
  std::map<TokenStatus, std::size_t> counts;
  for (const auto& t : tokens) ++counts[t.status];
  log << "segment: " << recordings.size() << " recordings, " << tokens.size() << " tokens (kept "
      << counts[TokenStatus::Kept] << ", multipeak " << counts[TokenStatus::ExcludedMultipeak] << ", duration "
      << counts[TokenStatus::ExcludedDuration] << ", edge " << counts[TokenStatus::ExcludedEdge] << ")\n";
  return kExitOk;
}

int cmd_discover(const Config& cfg, const RunOptions& opts, std::ostream& log) {
  const auto s = cfg.section("discover");
  s.require_known({"input", "order", "degree", "terms", "cross_terms", "thresholds", "alpha", "nu",
                   "stlsq_max_iter", "sr3_max_iter", "tolerance", "train_fraction", "seed", "channels",
                   "compare", "compare_degrees", "rtol", "atol"});
  const fs::path input = require_path(s, "input");
  if (!fs::is_directory(input))
    throw Error(ErrorKind::InvalidArgument, "[discover] input must be a token directory");
  const FitConfig fit_cfg = fit_config(s);
  SplitConfig split_cfg;
  split_cfg.train_fraction = s.get_double("train_fraction", split_cfg.train_fraction);
  split_cfg.seed = opts.seed ? *opts.seed : s.get_u64("seed", 0);
  split_cfg.validate();
  const auto channels = parse_channels(s, {std::begin(kAllChannels), std::end(kAllChannels)});
  const bool compare = s.get_bool("compare", true);
  std::vector<int> compare_degrees;
  for (double d : s.get_doubles("compare_degrees", {1, 2, 3, 4})) {
    if (d != std::floor(d) || d < 1 || d > 4)
      throw Error(ErrorKind::InvalidArgument, "[discover] compare_degrees must be integers in 1..4");
    compare_degrees.push_back(static_cast<int>(d));
  }

  std::vector<GestureToken> tokens;
  for (auto& t : read_token_set(input))
    if (t.status == TokenStatus::Kept && wanted(channels, t.channel)) tokens.push_back(std::move(t));
  if (tokens.empty()) throw Error(ErrorKind::DegenerateTrack, "no kept tokens to fit in " + input.string());

  const TokenSplit parts = split(tokens, split_cfg);
  fs::create_directories(opts.out);

  const auto train_outcomes = parallel_map(parts.train.size(), opts.jobs, [&](std::size_t i) {
    return guarded_fit([&] { return fit_token(parts.train[i], fit_cfg); });
  });
  write_outcomes(opts.out / "fits_train.jsonl", parts.train, train_outcomes);
  const auto train_fits = successes(train_outcomes);

  Json ensembles = Json::array();
  std::vector<FitOutcome> test_outcomes(parts.test.size());
  std::size_t n_ensembles = 0;
  for (Channel ch : kAllChannels) {
    std::vector<TokenFit> ch_fits;
    for (const auto& f : train_fits)
      if (f.channel == ch) ch_fits.push_back(f);
    std::vector<std::size_t> test_idx;
    for (std::size_t i = 0; i < parts.test.size(); ++i)
      if (parts.test[i].channel == ch) test_idx.push_back(i);
    if (ch_fits.empty()) {
      for (std::size_t i : test_idx) {
        test_outcomes[i].error = "no training fits for this channel";
        test_outcomes[i].kind = ErrorKind::EmptyModel;
      }
      continue;
    }
    const EnsembleModel model = ensemble(ch_fits);
    ++n_ensembles;
    Json ej = to_json(model);
    ej["channel"] = std::string(to_string(ch));
    ensembles.push_back(ej);
    const auto refits = parallel_map(test_idx.size(), opts.jobs, [&](std::size_t k) {
      return guarded_fit([&] { return refit_on_support(parts.test[test_idx[k]], model.structure, fit_cfg); });
    });
    for (std::size_t k = 0; k < test_idx.size(); ++k) test_outcomes[test_idx[k]] = refits[k];

    log << "discover: " << to_string(ch) << " majority " << describe(model.structure, model.library) << " in "
        << model.majority_count() << "/" << model.n_fits << " training fits\n";
  }
  write_outcomes(opts.out / "fits_test.jsonl", parts.test, test_outcomes);
  write_json(opts.out / "ensemble.json", {{"order", fit_cfg.order}, {"channels", ensembles}});
  const auto test_fits = successes(test_outcomes);

  const auto train_summary = summarize_fits(train_fits);
  const auto test_summary = summarize_fits(test_fits);
  {
    auto out = open_out(opts.out / "fit_summary.csv");
    write_fit_summary_csv(out, "train", train_summary, true);
    write_fit_summary_csv(out, "test", test_summary, false);
  }
  {
    auto out = open_out(opts.out / "table_fit_summary_train.csv");
    write_fit_summary_table(out, train_summary);
  }
  {
    auto out = open_out(opts.out / "table_fit_summary_test.csv");
    write_fit_summary_table(out, test_summary);
  }
  Json outputs = {"fits_train.jsonl",      "fits_test.jsonl",          "ensemble.json", "fit_summary.csv",
                  "table_fit_summary_train.csv", "table_fit_summary_test.csv"};

  if (compare && !parts.train.empty()) {
    std::vector<NamedLibrary> libs;
    for (int d : compare_degrees) libs.push_back({"poly" + std::to_string(d), polynomial_library(d, fit_cfg.order, false)});
    const auto rows = library_comparison(parts.train, libs, fit_cfg, opts.jobs);
    {
      auto out = open_out(opts.out / "library_comparison.csv");
      write_comparison_csv(out, rows);
    }
    {
      auto out = open_out(opts.out / "table_library_comparison.csv");
      write_comparison_table(out, rows);
    }
    outputs.push_back("library_comparison.csv");
    outputs.push_back("table_library_comparison.csv");
  }
  write_run_manifest(cfg, opts, split_cfg.seed, outputs);

  for (const auto& r : train_summary)
    log << "discover: " << to_string(r.channel) << " train mean R2 " << format_2dp(r.summary.mean) << " (n="
        << r.summary.n << ", failed " << r.summary.n_failed << ")\n";
  const std::size_t failed = train_outcomes.size() - train_fits.size();
  if (failed > 0) log << "discover: " << failed << " training tokens could not be fitted\n";
  if (n_ensembles == 0) throw Error(ErrorKind::EmptyModel, "no channel produced a usable model");
  return kExitOk;
}

int cmd_analyze(const Config& cfg, const RunOptions& opts, std::ostream& log) {
  const auto s = cfg.section("analyze");
  s.require_known({"input", "fits", "percentiles", "channels", "portraits", "rtol", "atol"});
  const fs::path input = require_path(s, "input");
  if (!fs::is_directory(input))
    throw Error(ErrorKind::InvalidArgument, "[analyze] input must be a token directory");
  std::optional<fs::path> fits_path;
  if (s.has("fits")) fits_path = require_path(s, "fits");
  const auto channels = parse_channels(s, {std::begin(kAllChannels), std::end(kAllChannels)});
  const auto percentiles = s.get_doubles("percentiles", {1, 5, 50, 100});
  for (double p : percentiles)
    if (!(p > 0 && p <= 100)) throw Error(ErrorKind::InvalidArgument, "[analyze] percentiles must lie in (0, 100]");
  const bool portraits = s.get_bool("portraits", true);
  const IntegratorOptions integ = integrator_options(s);

  std::vector<GestureToken> tokens;
  for (auto& t : read_token_set(input))
    if (t.status == TokenStatus::Kept && wanted(channels, t.channel)) tokens.push_back(std::move(t));

  fs::create_directories(opts.out);
  Json outputs = Json::array();

  std::vector<HookeScore> scores;
  {
    auto out = open_out(opts.out / "hooke_scores.csv");
    csv::write_row(out, std::vector<std::string>{"token_id", "channel", "r2h", "slope", "intercept", "degenerate"});
    for (const auto& t : tokens) {
      if (t.size() < 3 || t.acceleration.size() != t.size()) continue;
      const auto h = hooke_linearity(t);
      scores.push_back(h);
      csv::write_row(out, std::vector<std::string>{std::to_string(h.token_id), std::string(to_string(h.channel)),
                                                   csv::format_number(h.r2h), csv::format_number(h.slope),
                                                   csv::format_number(h.intercept), h.degenerate ? "1" : "0"});
    }
  }
  outputs.push_back("hooke_scores.csv");
  if (!scores.empty()) {
    const auto census = nonlinearity_census(scores);
    write_json(opts.out / "census.json", to_json(std::span<const CensusRow>(census)));
    outputs.push_back("census.json");
    for (const auto& row : census)
      log << "analyze: " << to_string(row.channel) << " R2_H > 0.95: " << format_2dp(row.fractions[0].above)
          << ", < 0.90: " << format_2dp(row.fractions[1].below) << " (n=" << row.n << ")\n";
  }

  if (fits_path) {
    std::vector<TokenFit> fits;
    for (auto& f : read_fits_jsonl(*fits_path))
      if (wanted(channels, f.channel)) fits.push_back(std::move(f));
    std::map<std::uint64_t, const GestureToken*> by_id;
    for (const auto& t : tokens) by_id[t.id] = &t;

    Json correlations = Json::array();
    for (Channel ch : kAllChannels) {
      std::vector<TokenFit> ch_fits;
      for (const auto& f : fits)
        if (f.channel == ch) ch_fits.push_back(f);
      if (ch_fits.empty()) continue;
      try {
        const auto rows = target_correlation(ch_fits, tokens);
        for (const auto& r : to_json(std::span<const CorrelationRow>(rows))) correlations.push_back(r);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::InvalidArgument) throw;
        correlations.push_back({{"channel", std::string(to_string(ch))}, {"r", nullptr}, {"error", e.what()}});
      }
    }
    write_json(opts.out / "correlations.json", correlations);
    outputs.push_back("correlations.json");

    Json exemplars = Json::array();
    if (portraits) fs::create_directories(opts.out / "portraits");
    for (Channel ch : kAllChannels) {
      std::vector<TokenFit> ch_fits;
      for (const auto& f : fits)
        if (f.channel == ch && by_id.count(f.token_id)) ch_fits.push_back(f);
      if (ch_fits.empty()) continue;
      for (double p : percentiles) {
        const TokenFit& f = percentile_fit(ch_fits, p);
        Json e{{"channel", std::string(to_string(ch))},
               {"percentile", p},
               {"token_id", f.token_id},
               {"r2", number_or_null(f.r2)}};
        if (portraits) {
          const GestureToken& tok = *by_id.at(f.token_id);
          std::optional<Trajectory> pred;
          try {
            pred = predict(f, tok, integ);
          } catch (const Error& err) {
            if (err.kind() != ErrorKind::IntegrationFailure) throw;
            e["prediction_failed"] = true;
          }
          std::ostringstream pname;
          pname << "portraits/" << to_string(ch) << "_p" << csv::format_number(p) << "_token" << f.token_id << ".csv";
          write_portrait_csv(opts.out / pname.str(), portrait_data(tok, pred ? &*pred : nullptr));
          e["portrait"] = pname.str();
        }
        exemplars.push_back(e);
      }
    }
    write_json(opts.out / "exemplars.json", exemplars);
    outputs.push_back("exemplars.json");
  }
  write_run_manifest(cfg, opts, 0, outputs);
  log << "analyze: " << tokens.size() << " tokens, " << scores.size() << " Hooke scores\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// Entry point

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sparse model discovery for articulatory gesture kinematics", "gesture-sindy"};
  app.set_version_flag("--version", version());
  app.require_subcommand(1, 1);

  RunOptions opts;
  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> jobs;
  const std::pair<const char*, const char*> commands[] = {
      {"simulate", "Simulate oscillator trajectories"},
      {"segment", "Segment pellet recordings into gesture tokens"},
      {"discover", "Discover sparse models from gesture tokens"},
      {"analyze", "Hooke diagnostics, target correlations and exemplar portraits"},
      {"synth", "Generate a synthetic token corpus with ground truth"}};
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "INI configuration file");
    sub->add_option("--out", out_dir, "Output directory")->capture_default_str();
    sub->add_option("--seed", seed, "Random seed (overrides the config)");
    sub->add_option("--jobs", jobs, "Worker threads (default: $GESTURE_SINDY_JOBS or 1)")
        ->check(CLI::PositiveNumber);
    sub->callback([&opts, name = std::string(name)] { opts.command = name; });
  }

  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << version() << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  for (auto* sub : app.get_subcommands())
    if (sub->parsed() && opts.command.empty()) opts.command = sub->get_name();

  try {
    if (jobs) {
      opts.jobs = *jobs;
    } else if (const char* env = std::getenv("GESTURE_SINDY_JOBS"); env && *env) {
      std::size_t n = 0;
      const std::string_view sv(env);
      auto [ptr, ec] = std::from_chars(sv.data(), sv.data() + sv.size(), n);
      if (ec != std::errc() || ptr != sv.data() + sv.size() || n == 0)
        throw Error(ErrorKind::InvalidArgument, "GESTURE_SINDY_JOBS must be a positive integer");
      opts.jobs = n;
    }
    opts.out = out_dir;
    opts.seed = seed;
    Config cfg;
    if (!config_path.empty()) {
      opts.config = config_path;
      cfg = Config::load(config_path);
    }
    reject_unknown_sections(cfg);

    if (opts.command == "simulate") return cmd_simulate(cfg, opts, out);
    if (opts.command == "segment") return cmd_segment(cfg, opts, out);
    if (opts.command == "discover") return cmd_discover(cfg, opts, out);
    if (opts.command == "analyze") return cmd_analyze(cfg, opts, out);
    if (opts.command == "synth") return cmd_synth(cfg, opts, out);
    err << "error: unknown command\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const fs::filesystem_error& e) {
    err << "error (io): " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"gesture-sindy"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace gsindy::cli
