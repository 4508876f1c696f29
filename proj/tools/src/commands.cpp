#include "sonoforge_cli/commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "sonoforge/config.hpp"
#include "sonoforge/error.hpp"
#include "sonoforge/model.hpp"
#include "sonoforge/report.hpp"
#include "sonoforge/storage.hpp"
#include "sonoforge/synth.hpp"
#include "sonoforge_cli/worker_pool.hpp"

namespace fs = std::filesystem;

namespace sonoforge::cli {
namespace {

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Schema:
    case ErrorKind::Validation:
    case ErrorKind::Range:
    case ErrorKind::Geometry:
      return kExitUsage;
    default:
      return kExitFailure;
  }
}

std::string kind_list() {
  std::string s;
  for (FeatureKind k : kAllFeatureKinds) {
    if (!s.empty()) s += ", ";
    s += to_string(k);
  }
  return s;
}

FeatureKind require_kind(const std::string& text) {
  const auto kind = parse_feature_kind(text);
  if (!kind) fail(ErrorKind::Validation, "unknown feature kind '" + text + "' (expected one of: " + kind_list() + ")");
  return *kind;
}

bool has_wav_extension(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".wav";
}

std::vector<fs::path> list_files(const fs::path& input, bool (*accept)(const fs::path&)) {
  if (!fs::exists(input)) fail(ErrorKind::MissingFile, "input not found: " + input.string());
  if (!fs::is_directory(input)) return {input};
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(input)) {
    if (e.is_regular_file() && accept(e.path())) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

bool is_feature_file(const fs::path& p) { return p.extension() == ".ftr"; }

struct Options {
  std::string feature;
  std::string config;
  std::string input;
  std::string output;
  std::string features;
  std::string runs;
  std::string checkpoint;
  std::string subset = "val";
  std::optional<std::uint64_t> seed;
  std::optional<int> max_epochs;
  std::size_t synth_classes = 10;
  std::size_t synth_clips = 40;
  int synth_rate = 44100;
};

CliConfig config_or_default(const std::string& path) {
  return path.empty() ? CliConfig{} : load_config(path);
}

int cmd_extract(const Options& o, std::ostream& out, std::ostream& err) {
  const FeatureKind kind = require_kind(o.feature);
  const CliConfig cfg = config_or_default(o.config);
  fs::path input = o.input;
  if (input.empty()) {
    if (o.config.empty()) fail(ErrorKind::Validation, "extract needs --input or --config");
    input = cfg.audio_dir;
  }
  const fs::path out_dir = o.output.empty() ? cfg.features_dir : fs::path(o.output);
  const auto files = list_files(input, has_wav_extension);
  if (files.empty()) fail(ErrorKind::MissingFile, "no .wav files in " + input.string());
  fs::create_directories(out_dir);

  std::vector<std::string> failures(files.size());
  parallel_for(files.size(), worker_count(), [&](std::size_t i) {
    try {
      const FeatureMatrix f = extract_feature(load_wav(files[i]), kind, cfg.features);
      save_feature(f, feature_path(out_dir, files[i], kind));
    } catch (const std::exception& e) {
      failures[i] = e.what();
    }
  });

  std::size_t failed = 0;
  for (std::size_t i = 0; i < files.size(); ++i) {
    if (failures[i].empty()) continue;
    ++failed;
    err << "extract: " << files[i].string() << ": " << failures[i] << "\n";
  }
  out << "extracted " << files.size() - failed << " of " << files.size() << " " << to_string(kind) << " files into "
      << out_dir.string() << "\n";
  return failed == 0 ? kExitOk : kExitFailure;
}

int cmd_render(const Options& o, std::ostream& out) {
  const fs::path input = o.input;
  const auto files = list_files(input, is_feature_file);
  if (files.empty()) fail(ErrorKind::MissingFile, "no .ftr files in " + input.string());
  const bool to_dir = fs::is_directory(input) || fs::is_directory(o.output);
  if (to_dir) fs::create_directories(o.output);
  for (const auto& f : files) {
    const fs::path target = to_dir ? fs::path(o.output) / f.filename().replace_extension(".pgm") : fs::path(o.output);
    render_pgm(load_feature(f), target);
    out << target.string() << "\n";
  }
  return kExitOk;
}

std::pair<DatasetIndex, DatasetIndex> split_from(const CliConfig& cfg, std::uint64_t seed) {
  const DatasetIndex index = load_index(cfg.dataset_csv, cfg.audio_dir);
  return split_dataset(index, cfg.training.train_frac, seed, cfg.training.stratified);
}

int cmd_split(const Options& o, std::ostream& out) {
  const CliConfig cfg = load_config(o.config);
  const auto [train_idx, val_idx] = split_from(cfg, o.seed.value_or(cfg.training.seed));
  std::ostringstream text;
  for (const auto& [name, idx] : {std::pair{"train", &train_idx}, std::pair{"val", &val_idx}}) {
    for (const auto& e : idx->entries) text << name << "\t" << e.path.filename().string() << "\t" << e.label << "\n";
  }
  if (o.output.empty()) {
    out << text.str();
  } else {
    const std::string s = text.str();
    write_file(std::vector<std::uint8_t>(s.begin(), s.end()), o.output);
    out << "train " << train_idx.entries.size() << ", val " << val_idx.entries.size() << " -> " << o.output << "\n";
  }
  return kExitOk;
}

void check_same_geometry(const FeatureDataset& a, const FeatureDataset& b) {
  if (a.height != b.height || a.width != b.width) {
    fail(ErrorKind::Geometry, "training features are " + std::to_string(a.height) + "x" + std::to_string(a.width) +
                                  " but validation features are " + std::to_string(b.height) + "x" +
                                  std::to_string(b.width));
  }
}

fs::path run_stem(const fs::path& dir, FeatureKind kind, std::uint64_t seed) {
  return dir / (std::string(to_string(kind)) + "-seed" + std::to_string(seed));
}

int cmd_train(const Options& o, std::ostream& out) {
  const FeatureKind kind = require_kind(o.feature);
  CliConfig cfg = load_config(o.config);
  cfg.training.feature_kind = kind;
  if (o.seed) cfg.training.seed = *o.seed;
  if (o.max_epochs) cfg.training.max_epochs = *o.max_epochs;
  cfg.training.validate();
  const fs::path features_dir = o.features.empty() ? cfg.features_dir : fs::path(o.features);
  const fs::path out_dir = o.output.empty() ? cfg.runs_dir : fs::path(o.output);

  const auto [train_idx, val_idx] = split_from(cfg, cfg.training.seed);
  const FeatureDataset train_set = load_feature_set(train_idx, features_dir, kind);
  const FeatureDataset val_set = load_feature_set(val_idx, features_dir, kind);
  check_same_geometry(train_set, val_set);

  ModelSpec spec;
  spec.input_height = train_set.height;
  spec.input_width = train_set.width;
  pooled_geometry(spec);
  Model model(spec);
  model.initialize(cfg.training.seed);

  out << "training " << to_string(kind) << " on " << train_set.size() << " clips, validating on " << val_set.size()
      << " (" << spec.input_height << "x" << spec.input_width << ", " << model.trainable_count() << " parameters)\n";
  const RunReport report = train(model, train_set, val_set, cfg.training, [&](int epoch, const EpochRecord& r) {
    char line[160];
    std::snprintf(line, sizeof line, "epoch %3d  lr %.2e  train loss %.4f acc %.4f  val loss %.4f acc %.4f\n", epoch,
                  r.lr, r.train_loss, r.train_acc, r.val_loss, r.val_acc);
    out << line << std::flush;
  });

  fs::create_directories(out_dir);
  const fs::path stem = run_stem(out_dir, kind, cfg.training.seed);
  write_run_report(report, fs::path(stem).concat(".report"));
  save_checkpoint(model, fs::path(stem).concat(".sfm"));
  out << "wrote " << stem.string() << ".report and .sfm\n";
  return kExitOk;
}

int cmd_evaluate(const Options& o, std::ostream& out) {
  const FeatureKind kind = require_kind(o.feature);
  const CliConfig cfg = load_config(o.config);
  if (o.subset != "val" && o.subset != "train" && o.subset != "all") {
    fail(ErrorKind::Validation, "--subset must be val, train or all");
  }
  const fs::path features_dir = o.features.empty() ? cfg.features_dir : fs::path(o.features);
  Model model = load_checkpoint(o.checkpoint);

  DatasetIndex idx;
  if (o.subset == "all") {
    idx = load_index(cfg.dataset_csv, cfg.audio_dir);
  } else {
    auto [train_idx, val_idx] = split_from(cfg, o.seed.value_or(cfg.training.seed));
    idx = o.subset == "train" ? std::move(train_idx) : std::move(val_idx);
  }
  const FeatureDataset data = load_feature_set(idx, features_dir, kind);
  if (data.height != model.spec().input_height || data.width != model.spec().input_width) {
    fail(ErrorKind::Geometry, "checkpoint expects " + std::to_string(model.spec().input_height) + "x" +
                                  std::to_string(model.spec().input_width) + " features, got " +
                                  std::to_string(data.height) + "x" + std::to_string(data.width));
  }
  const Evaluation ev = evaluate(model, data, cfg.training.batch_size);
  char line[128];
  std::snprintf(line, sizeof line, "%s clips %zu  loss %.6f  accuracy %.4f\n", o.subset.c_str(), data.size(), ev.loss,
                ev.accuracy);
  out << line;
  return kExitOk;
}

int cmd_report(const Options& o, std::ostream& out) {
  fs::path dir = o.runs;
  if (dir.empty()) {
    if (o.config.empty()) fail(ErrorKind::Validation, "report needs --runs or --config");
    dir = load_config(o.config).runs_dir;
  }
  const auto files = list_reports(dir);
  if (files.empty()) fail(ErrorKind::MissingFile, "no run reports (*.report) in " + dir.string());
  std::vector<ComparisonRow> rows;
  for (const auto& f : files) rows.push_back(comparison_row(read_run_report(f)));
  out << format_comparison_table(std::move(rows));
  return kExitOk;
}

int cmd_synth(const Options& o, std::ostream& out) {
  if (o.output.empty()) fail(ErrorKind::Validation, "synth needs --out");
  const fs::path root = o.output;
  SynthCorpusOptions opts;
  opts.n_classes = o.synth_classes;
  opts.clips_per_class = o.synth_clips;
  opts.sample_rate_hz = o.synth_rate;
  opts.seed = o.seed.value_or(0);
  const DatasetIndex index = write_synthetic_corpus(root, opts);
  const std::string ini =
      "[dataset]\ncsv = meta/esc50.csv\naudio_dir = audio\n\n[output]\nfeatures_dir = features\nruns_dir = runs\n";
  write_file(std::vector<std::uint8_t>(ini.begin(), ini.end()), root / "sonoforge.ini");
  out << "wrote " << index.entries.size() << " clips and " << (root / "sonoforge.ini").string() << "\n";
  return kExitOk;
}

}  // namespace

fs::path feature_path(const fs::path& dir, const fs::path& wav, FeatureKind kind) {
  return dir / (wav.stem().string() + "." + std::string(to_string(kind)) + ".ftr");
}

FeatureDataset load_feature_set(const DatasetIndex& index, const fs::path& dir, FeatureKind kind) {
  std::vector<fs::path> paths;
  std::vector<std::size_t> missing;
  for (std::size_t i = 0; i < index.entries.size(); ++i) {
    paths.push_back(feature_path(dir, index.entries[i].path, kind));
    if (!fs::exists(paths.back())) missing.push_back(i);
  }
  if (!missing.empty()) {
    fail(ErrorKind::MissingFile,
         std::to_string(missing.size()) + " " + std::string(to_string(kind)) + " feature file(s) missing in " +
             dir.string() + " (first: " + paths[missing.front()].filename().string() +
             "); run `sonoforge extract --feature " + std::string(to_string(kind)) + " --out " + dir.string() +
             "` first");
  }

  std::vector<FeatureMatrix> loaded(paths.size());
  std::vector<std::string> errors(paths.size());
  parallel_for(paths.size(), worker_count(), [&](std::size_t i) {
    try {
      loaded[i] = load_feature(paths[i]);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });
  for (std::size_t i = 0; i < paths.size(); ++i) {
    if (!errors[i].empty()) fail(ErrorKind::Format, paths[i].string() + ": " + errors[i]);
    if (loaded[i].kind != kind) fail(ErrorKind::Format, paths[i].string() + ": stored kind does not match file name");
  }

  FeatureDataset data;
  data.kind = kind;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    if (i > 0 && (loaded[i].rows() != loaded[0].rows() || loaded[i].cols() != loaded[0].cols())) {
      fail(ErrorKind::Geometry, paths[i].filename().string() + " is " + std::to_string(loaded[i].rows()) + "x" +
                                    std::to_string(loaded[i].cols()) + " but " + paths[0].filename().string() +
                                    " is " + std::to_string(loaded[0].rows()) + "x" +
                                    std::to_string(loaded[0].cols()));
    }
    data.add(index.entries[i].path.filename().string(), index.entries[i].label, loaded[i]);
  }
  return data;
}

std::vector<fs::path> list_reports(const fs::path& dir) {
  std::vector<fs::path> files;
  if (!fs::is_directory(dir)) return files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".report") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spectral and rhythm features for environmental sound classification", "sonoforge"};
  app.require_subcommand(1);
  Options o;

  auto* extract = app.add_subcommand("extract", "Compute one feature kind for every clip");
  extract->add_option("--feature", o.feature, "mel, mfcc, tempogram, chroma-stft, chroma-cqt or chroma-cens")
      ->required();
  extract->add_option("--input", o.input, "WAV file or directory (default: dataset.audio_dir)");
  extract->add_option("--out", o.output, "Output directory (default: output.features_dir)");
  extract->add_option("--config", o.config, "Config file");

  auto* render = app.add_subcommand("render", "Render feature files as PGM images");
  render->add_option("--input", o.input, "FTR1 file or directory")->required();
  render->add_option("--out", o.output, "PGM file, or directory for directory input")->required();

  auto* split = app.add_subcommand("split", "Print or write the seeded train/validation split");
  split->add_option("--config", o.config, "Config file")->required();
  split->add_option("--seed", o.seed, "Split seed (default: training.seed)");
  split->add_option("--out", o.output, "Output file (default: stdout)");

  auto* train_cmd = app.add_subcommand("train", "Split, train and evaluate one feature kind");
  train_cmd->add_option("--feature", o.feature, "Feature kind")->required();
  train_cmd->add_option("--config", o.config, "Config file")->required();
  train_cmd->add_option("--seed", o.seed, "Seed for split, init, shuffling and dropout");
  train_cmd->add_option("--out", o.output, "Run directory (default: output.runs_dir)");
  train_cmd->add_option("--features", o.features, "Feature directory (default: output.features_dir)");
  train_cmd->add_option("--max-epochs", o.max_epochs, "Override training.max_epochs");

  auto* eval_cmd = app.add_subcommand("evaluate", "Evaluate a checkpoint");
  eval_cmd->add_option("--checkpoint", o.checkpoint, "SFM1 checkpoint")->required();
  eval_cmd->add_option("--feature", o.feature, "Feature kind")->required();
  eval_cmd->add_option("--config", o.config, "Config file")->required();
  eval_cmd->add_option("--seed", o.seed, "Split seed (default: training.seed)");
  eval_cmd->add_option("--features", o.features, "Feature directory (default: output.features_dir)");
  eval_cmd->add_option("--subset", o.subset, "val, train or all");

  auto* report = app.add_subcommand("report", "Comparison table over run reports");
  report->add_option("--runs", o.runs, "Directory of *.report files");
  report->add_option("--config", o.config, "Config file (for output.runs_dir)");

  auto* synth = app.add_subcommand("synth", "Write a synthetic ESC-50 style corpus");
  synth->add_option("--out", o.output, "Corpus root")->required();
  synth->add_option("--classes", o.synth_classes, "Number of classes (1-10)");
  synth->add_option("--clips", o.synth_clips, "Clips per class");
  synth->add_option("--seed", o.seed, "Corpus seed");
  synth->add_option("--rate", o.synth_rate, "Sample rate in Hz");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*extract) return cmd_extract(o, out, err);
    if (*render) return cmd_render(o, out);
    if (*split) return cmd_split(o, out);
    if (*train_cmd) return cmd_train(o, out);
    if (*eval_cmd) return cmd_evaluate(o, out);
    if (*report) return cmd_report(o, out);
    if (*synth) return cmd_synth(o, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace sonoforge::cli
