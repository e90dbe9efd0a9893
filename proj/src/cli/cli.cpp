#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "qav/calib.hpp"
#include "qav/dataio.hpp"
#include "qav/error.hpp"
#include "qav/fuse.hpp"
#include "qav/metrics.hpp"
#include "qav/synth.hpp"

#ifndef QAV_VERSION
#define QAV_VERSION "0.0.0"
#endif

namespace qav::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

constexpr double kReportFmrs[] = {1e-1, 1e-2, 1e-3, 1e-4, 1e-5};

std::string fnv1a64(const fs::path& path) {
  const std::string bytes = read_file(path);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string cell(double x) { return std::isfinite(x) ? format_double(x) : "-"; }

class Run {
 public:
  Run(std::string command, fs::path out_dir)
      : command_(std::move(command)), out_dir_(std::move(out_dir)),
        start_(std::chrono::steady_clock::now()) {
    fs::create_directories(out_dir_);
  }

  json& config() { return config_; }
  void input(const fs::path& p) { inputs_.push_back(p); }

  fs::path output(const std::string& name) {
    outputs_.push_back(name);
    return out_dir_ / name;
  }

  void finish() {
    json m;
    m["tool"] = "qav";
    m["version"] = QAV_VERSION;
    m["command"] = command_;
    m["config"] = config_;
    m["inputs"] = json::array();
    for (const auto& p : inputs_) m["inputs"].push_back({{"path", p.string()}, {"fnv1a64", fnv1a64(p)}});
    m["outputs"] = json::array();
    for (const auto& name : outputs_) {
      m["outputs"].push_back({{"path", name}, {"fnv1a64", fnv1a64(out_dir_ / name)}});
    }
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start_;
    m["duration_seconds"] = elapsed.count();
    write_file_atomic(out_dir_ / "manifest.json", m.dump(2) + "\n");
  }

 private:
  std::string command_;
  fs::path out_dir_;
  std::chrono::steady_clock::time_point start_;
  json config_ = json::object();
  std::vector<fs::path> inputs_;
  std::vector<std::string> outputs_;
};

struct CalibFlags {
  CalibConfig cfg;
  bool no_sigmoid = false;

  void add(CLI::App& app) {
    app.add_option("--fmr-min", cfg.fmr_min, "Lowest FMR target")->capture_default_str();
    app.add_option("--fmr-max", cfg.fmr_max, "Highest FMR target")->capture_default_str();
    app.add_option("--fmr-points", cfg.n_fmr_points, "Log-spaced FMR targets")->capture_default_str();
    app.add_option("--omega-lo", cfg.omega_grid.low, "Lowest candidate weight")->capture_default_str();
    app.add_option("--omega-hi", cfg.omega_grid.high, "Highest candidate weight")->capture_default_str();
    app.add_option("--omega-steps", cfg.omega_grid.steps, "Weight grid points")->capture_default_str();
    app.add_flag("--no-sigmoid", no_sigmoid, "Sweep affine scores instead of sigmoid-scaled ones");
  }

  CalibConfig resolve() {
    cfg.use_sigmoid = !no_sigmoid;
    try {
      cfg.validate();
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
    return cfg;
  }

  static json echo(const CalibConfig& c) {
    return {{"fmr_min", c.fmr_min},       {"fmr_max", c.fmr_max},
            {"fmr_points", c.n_fmr_points}, {"omega_lo", c.omega_grid.low},
            {"omega_hi", c.omega_grid.high}, {"omega_steps", c.omega_grid.steps},
            {"use_sigmoid", c.use_sigmoid}, {"threads", default_thread_count()}};
  }
};

ComparisonSet load_set(Run& run, const fs::path& embeddings, const fs::path& protocol) {
  run.input(embeddings);
  run.input(protocol);
  const auto samples = load_embeddings(embeddings);
  return build_comparison_set(samples, load_protocol(protocol));
}

std::string points_header() { return "dataset\tfmr_target\tthreshold\tomega_opt\tfnmr\n"; }

std::string points_rows(const std::string& dataset, const CalibrationResult& r) {
  std::string s;
  for (const auto& p : r.points) {
    s += dataset + '\t' + format_double(p.fmr_target) + '\t' + format_double(p.threshold) + '\t' +
         format_double(p.omega_opt) + '\t' + format_double(p.fnmr) + '\n';
  }
  return s;
}

// ---- synth

struct SynthFlags {
  std::string preset = "default";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> subjects, per_subject, dim;
  std::optional<double> q_low, q_high, slope, noise, base_angle;
  std::string format = "text";
  fs::path out;
};

void cmd_synth(SynthFlags& f, std::ostream& out) {
  SynthConfig cfg = f.preset == "planted"     ? SynthConfig::planted()
                    : f.preset == "no-signal" ? SynthConfig::no_signal()
                                              : SynthConfig{};
  if (f.seed) cfg.seed = *f.seed;
  if (f.subjects) cfg.n_subjects = *f.subjects;
  if (f.per_subject) cfg.samples_per_subject = *f.per_subject;
  if (f.dim) cfg.d = *f.dim;
  if (f.q_low) cfg.q_low = *f.q_low;
  if (f.q_high) cfg.q_high = *f.q_high;
  if (f.slope) cfg.genuine_quality_slope = *f.slope;
  if (f.noise) cfg.noise_sd = *f.noise;
  if (f.base_angle) cfg.base_angle = *f.base_angle;
  try {
    cfg.validate();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }

  Run run("synth", f.out);
  run.config() = {{"preset", f.preset},
                  {"seed", cfg.seed},
                  {"subjects", cfg.n_subjects},
                  {"per_subject", cfg.samples_per_subject},
                  {"dim", cfg.d},
                  {"q_low", cfg.q_low},
                  {"q_high", cfg.q_high},
                  {"slope", cfg.genuine_quality_slope},
                  {"noise", cfg.noise_sd},
                  {"base_angle", cfg.base_angle},
                  {"format", f.format}};
  const auto samples = generate(cfg);
  const auto protocol = all_pairs(samples);
  const bool binary = f.format == "binary";
  save_embeddings(run.output(binary ? "embeddings.qmef" : "embeddings.txt"), samples,
                  binary ? EmbeddingFormat::binary : EmbeddingFormat::text);
  save_protocol(run.output("protocol.csv"), protocol);
  run.finish();

  std::size_t genuine = 0;
  for (const auto& r : protocol) genuine += r.label == Label::genuine;
  out << samples.size() << " samples, " << genuine << " genuine and " << protocol.size() - genuine
      << " imposter pairs\n";
}

// ---- calibrate

struct CalibrateFlags {
  fs::path embeddings, protocol, out;
  CalibFlags calib;
};

void cmd_calibrate(CalibrateFlags& f, std::ostream& out) {
  const CalibConfig cfg = f.calib.resolve();
  Run run("calibrate", f.out);
  run.config() = CalibFlags::echo(cfg);
  const auto set = load_set(run, f.embeddings, f.protocol);
  const auto result = calibrate(set, cfg);

  save_calibration(run.output("calibration.txt"), result);
  write_file_atomic(run.output("points.tsv"), points_header() + points_rows("0", result));
  run.config()["alpha"] = result.params.alpha;
  run.config()["beta"] = result.params.beta;
  run.finish();

  out << "alpha " << format_double(result.params.alpha) << "\nbeta " << format_double(result.params.beta)
      << "\nfit_r2 " << format_double(result.fit_r2) << '\n';
  for (const auto& w : result.warnings) out << "warning: " << w << '\n';
}

// ---- eval

struct EvalFlags {
  fs::path embeddings, protocol, out;
  std::optional<fs::path> calibration;
};

void cmd_eval(EvalFlags& f, std::ostream& out) {
  Run run("eval", f.out);
  std::optional<WeightParams> params;
  if (f.calibration) {
    run.input(*f.calibration);
    params = load_calibration(*f.calibration).params;
    run.config()["alpha"] = params->alpha;
    run.config()["beta"] = params->beta;
  }
  run.config()["fmr_targets"] = kReportFmrs;
  const auto set = load_set(run, f.embeddings, f.protocol);

  std::vector<std::pair<std::string, ScoreSet>> kinds;
  kinds.emplace_back("raw", set.raw_scores());
  if (params) kinds.emplace_back("quality_aware", set.quality_aware_scores(*params));
  std::vector<VerificationReport> reports;
  for (const auto& [name, scores] : kinds) reports.push_back(evaluate(scores, kReportFmrs));

  std::string report = "metric\tfmr";
  for (const auto& k : kinds) report += '\t' + k.first;
  report += '\n';
  const auto row = [&](const std::string& metric, const std::string& fmr, auto value) {
    report += metric + '\t' + fmr;
    for (const auto& r : reports) report += '\t' + cell(value(r));
    report += '\n';
  };
  row("eer", "-", [](const VerificationReport& r) { return r.eer; });
  row("eer_threshold", "-", [](const VerificationReport& r) { return r.eer_threshold; });
  row("auc", "-", [](const VerificationReport& r) { return r.auc; });
  for (std::size_t k = 0; k < std::size(kReportFmrs); ++k) {
    row("fnmr", format_double(kReportFmrs[k]),
        [k](const VerificationReport& r) { return r.operating_points[k].fnmr; });
  }
  for (std::size_t k = 0; k < std::size(kReportFmrs); ++k) {
    row("threshold", format_double(kReportFmrs[k]),
        [k](const VerificationReport& r) { return r.operating_points[k].threshold; });
  }
  write_file_atomic(run.output("report.tsv"), report);

  std::string roc = "score\tthreshold\tfmr\tfnmr\n";
  for (const auto& [name, scores] : kinds) {
    for (const auto& p : roc_curve(scores)) {
      roc += name + '\t' + format_double(p.threshold) + '\t' + format_double(p.fmr) + '\t' +
             format_double(p.fnmr) + '\n';
    }
  }
  write_file_atomic(run.output("roc.tsv"), roc);
  run.finish();
  out << report;
}

// ---- fuse

struct FuseFlags {
  fs::path embeddings, templates, out;
  std::string format = "text";
};

void cmd_fuse(FuseFlags& f, std::ostream& out) {
  Run run("fuse", f.out);
  run.config() = {{"format", f.format}};
  run.input(f.embeddings);
  run.input(f.templates);
  const auto samples = load_embeddings(f.embeddings);
  const auto manifest = load_template_manifest(f.templates);
  const auto templates = build_templates(samples, manifest);

  std::map<std::string, const Embedding*, std::less<>> by_id;
  for (const auto& e : samples) by_id.emplace(e.sample_id, &e);
  // A template keeps a subject id only when all its frames agree on it.
  std::map<std::string, std::optional<std::string>, std::less<>> subject;
  std::map<std::string, bool, std::less<>> mixed;
  for (const auto& row : manifest) {
    const auto& s = by_id.at(row.sample_id)->subject_id;
    auto [it, fresh] = subject.emplace(row.template_id, s);
    if (!fresh && it->second != s) mixed[row.template_id] = true;
  }

  std::vector<Embedding> fused;
  fused.reserve(templates.size());
  for (const auto& t : templates) {
    Embedding e;
    e.vector = recompose(aggregate(t));
    e.sample_id = t.template_id;
    if (!mixed[t.template_id]) e.subject_id = subject[t.template_id];
    fused.push_back(std::move(e));
  }
  const bool binary = f.format == "binary";
  save_embeddings(run.output(binary ? "fused.qmef" : "fused.txt"), fused,
                  binary ? EmbeddingFormat::binary : EmbeddingFormat::text);
  run.finish();
  out << fused.size() << " templates from " << manifest.size() << " frames\n";
}

// ---- sweep

struct SweepFlags {
  std::vector<fs::path> embeddings, protocols;
  std::vector<std::string> names;
  fs::path out;
  CalibFlags calib;
};

void cmd_sweep(SweepFlags& f, std::ostream& out) {
  if (f.embeddings.size() != f.protocols.size()) {
    throw UsageError("--embeddings and --protocol must be given the same number of times");
  }
  if (!f.names.empty() && f.names.size() != f.embeddings.size()) {
    throw UsageError("--name must be given once per dataset or not at all");
  }
  const CalibConfig cfg = f.calib.resolve();
  Run run("sweep", f.out);
  run.config() = CalibFlags::echo(cfg);

  std::string points = points_header();
  std::string lines = "dataset\talpha\tbeta\tfit_r2\tmean_t\tmean_omega\n";
  for (std::size_t i = 0; i < f.embeddings.size(); ++i) {
    const std::string name = f.names.empty() ? std::to_string(i) : f.names[i];
    const auto set = load_set(run, f.embeddings[i], f.protocols[i]);
    const auto r = calibrate(set, cfg);
    points += points_rows(name, r);
    lines += name + '\t' + format_double(r.params.alpha) + '\t' + format_double(r.params.beta) + '\t' +
             format_double(r.fit_r2) + '\t' + format_double(r.mean_t) + '\t' + format_double(r.mean_omega) + '\n';
  }
  write_file_atomic(run.output("points.tsv"), points);
  write_file_atomic(run.output("lines.tsv"), lines);
  run.finish();
  out << lines;
}

CLI::Option* add_path(CLI::App& app, const std::string& name, fs::path& target, const std::string& help) {
  return app.add_option(name, target, help)->required();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Quality-aware verification scoring: calibration, evaluation and fusion", "qav"};
  app.set_version_flag("--version", QAV_VERSION);
  app.require_subcommand(1);

  SynthFlags synth;
  auto* s = app.add_subcommand("synth", "Generate a synthetic embedding set and its all-pairs protocol");
  s->add_option("--preset", synth.preset, "Base configuration")
      ->check(CLI::IsMember({"default", "planted", "no-signal"}))
      ->capture_default_str();
  s->add_option("--seed", synth.seed, "Random seed");
  s->add_option("--subjects", synth.subjects, "Number of subjects")->check(CLI::PositiveNumber);
  s->add_option("--per-subject", synth.per_subject, "Samples per subject")->check(CLI::PositiveNumber);
  s->add_option("--dim", synth.dim, "Embedding dimension")->check(CLI::Range(2, 1 << 20));
  s->add_option("--q-low", synth.q_low, "Lowest quality")->check(CLI::PositiveNumber);
  s->add_option("--q-high", synth.q_high, "Highest quality")->check(CLI::PositiveNumber);
  s->add_option("--slope", synth.slope, "Angle added per unit of quality below q-high (radians)")
      ->check(CLI::NonNegativeNumber);
  s->add_option("--noise", synth.noise, "Angular noise sd (radians)")->check(CLI::NonNegativeNumber);
  s->add_option("--base-angle", synth.base_angle, "Angle at q-high (radians)")->check(CLI::NonNegativeNumber);
  s->add_option("--format", synth.format, "Embedding encoding")
      ->check(CLI::IsMember({"text", "binary"}))
      ->capture_default_str();
  add_path(*s, "--out", synth.out, "Output directory");

  CalibrateFlags calibrate;
  auto* c = app.add_subcommand("calibrate", "Learn alpha and beta from labelled comparisons");
  add_path(*c, "--embeddings", calibrate.embeddings, "Embedding file");
  add_path(*c, "--protocol", calibrate.protocol, "Pair protocol CSV");
  add_path(*c, "--out", calibrate.out, "Output directory");
  calibrate.calib.add(*c);

  EvalFlags eval;
  auto* e = app.add_subcommand("eval", "Report EER, AUC and FNMR at fixed FMRs");
  add_path(*e, "--embeddings", eval.embeddings, "Embedding file");
  add_path(*e, "--protocol", eval.protocol, "Pair protocol CSV");
  add_path(*e, "--out", eval.out, "Output directory");
  e->add_option("--calibration", eval.calibration, "Calibration file; adds the quality-aware column");

  FuseFlags fuse;
  auto* fu = app.add_subcommand("fuse", "Aggregate frames into one embedding per template");
  add_path(*fu, "--embeddings", fuse.embeddings, "Embedding file");
  add_path(*fu, "--templates", fuse.templates, "Template manifest CSV (template_id,sample_id)");
  add_path(*fu, "--out", fuse.out, "Output directory");
  fu->add_option("--format", fuse.format, "Embedding encoding")
      ->check(CLI::IsMember({"text", "binary"}))
      ->capture_default_str();

  SweepFlags sweep;
  auto* sw = app.add_subcommand("sweep", "Optimal-weight series for several datasets");
  sw->add_option("--embeddings", sweep.embeddings, "Embedding files")->required();
  sw->add_option("--protocol", sweep.protocols, "Pair protocols, one per embedding file")->required();
  sw->add_option("--name", sweep.names, "Dataset labels");
  add_path(*sw, "--out", sweep.out, "Output directory");
  sweep.calib.add(*sw);

  std::vector<const char*> argv{"qav"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << QAV_VERSION << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& ex) {
    err << "qav: " << ex.what() << '\n';
    return kExitUsage;
  }

  try {
    if (s->parsed()) cmd_synth(synth, out);
    else if (c->parsed()) cmd_calibrate(calibrate, out);
    else if (e->parsed()) cmd_eval(eval, out);
    else if (fu->parsed()) cmd_fuse(fuse, out);
    else if (sw->parsed()) cmd_sweep(sweep, out);
  } catch (const UsageError& ex) {
    err << "qav: " << ex.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& ex) {
    err << "qav: " << ex.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace qav::cli
