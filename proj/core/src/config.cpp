#include "sonoforge/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "sonoforge/error.hpp"

namespace sonoforge {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T v{};
  const auto res = std::from_chars(value.data(), value.data() + value.size(), v);
  if (res.ec != std::errc{} || res.ptr != value.data() + value.size()) {
    fail(ErrorKind::Schema, "config key " + key + ": cannot parse '" + value + "'");
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true") return true;
  if (value == "false") return false;
  fail(ErrorKind::Schema, "config key " + key + ": expected true or false, got '" + value + "'");
}

using Setter = std::function<void(CliConfig&, const std::string& key, const std::string& value)>;

template <typename T, typename Field>
Setter num(Field field) {
  return [field](CliConfig& c, const std::string& k, const std::string& v) { field(c) = parse_number<T>(k, v); };
}

std::map<std::string, Setter> make_setters(const std::filesystem::path& base) {
  auto path = [base](auto field) -> Setter {
    return [base, field](CliConfig& c, const std::string&, const std::string& v) {
      const std::filesystem::path p(v);
      field(c) = p.is_absolute() || base.empty() ? p : base / p;
    };
  };
  return {
      {"dataset.csv", path([](CliConfig& c) -> std::filesystem::path& { return c.dataset_csv; })},
      {"dataset.audio_dir", path([](CliConfig& c) -> std::filesystem::path& { return c.audio_dir; })},
      {"dsp.rate", num<int>([](CliConfig& c) -> int& { return c.features.sample_rate_hz; })},
      {"dsp.n_fft", num<std::uint32_t>([](CliConfig& c) -> std::uint32_t& { return c.features.n_fft; })},
      {"dsp.hop", num<std::uint32_t>([](CliConfig& c) -> std::uint32_t& { return c.features.hop; })},
      {"features.n_mels", num<int>([](CliConfig& c) -> int& { return c.features.n_mels; })},
      {"features.n_mfcc", num<int>([](CliConfig& c) -> int& { return c.features.n_mfcc; })},
      {"features.tempogram_win_len", num<int>([](CliConfig& c) -> int& { return c.features.tempogram_win_len; })},
      {"features.tempogram_ref_bpm", num<double>([](CliConfig& c) -> double& { return c.features.tempogram_ref_bpm; })},
      {"features.tempogram_bins", num<int>([](CliConfig& c) -> int& { return c.features.tempogram_bins; })},
      {"features.cqt_fmin_hz", num<double>([](CliConfig& c) -> double& { return c.features.cqt_fmin_hz; })},
      {"features.cqt_bins", num<int>([](CliConfig& c) -> int& { return c.features.cqt_bins; })},
      {"features.cqt_bins_per_octave", num<int>([](CliConfig& c) -> int& { return c.features.cqt_bins_per_octave; })},
      {"features.cens_smooth_len", num<int>([](CliConfig& c) -> int& { return c.features.cens_smooth_len; })},
      {"features.cens_downsample", num<int>([](CliConfig& c) -> int& { return c.features.cens_downsample; })},
      {"training.batch_size", num<std::size_t>([](CliConfig& c) -> std::size_t& { return c.training.batch_size; })},
      {"training.initial_lr", num<double>([](CliConfig& c) -> double& { return c.training.initial_lr; })},
      {"training.lr_patience", num<int>([](CliConfig& c) -> int& { return c.training.lr_patience; })},
      {"training.lr_factor", num<double>([](CliConfig& c) -> double& { return c.training.lr_factor; })},
      {"training.min_lr", num<double>([](CliConfig& c) -> double& { return c.training.min_lr; })},
      {"training.stop_patience", num<int>([](CliConfig& c) -> int& { return c.training.stop_patience; })},
      {"training.max_epochs", num<int>([](CliConfig& c) -> int& { return c.training.max_epochs; })},
      {"training.seed", num<std::uint64_t>([](CliConfig& c) -> std::uint64_t& { return c.training.seed; })},
      {"training.train_frac", num<double>([](CliConfig& c) -> double& { return c.training.train_frac; })},
      {"training.stratified",
       [](CliConfig& c, const std::string& k, const std::string& v) { c.training.stratified = parse_bool(k, v); }},
      {"output.features_dir", path([](CliConfig& c) -> std::filesystem::path& { return c.features_dir; })},
      {"output.runs_dir", path([](CliConfig& c) -> std::filesystem::path& { return c.runs_dir; })},
  };
}

}  // namespace

CliConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  CliConfig config;
  if (!base_dir.empty()) {
    config.features_dir = base_dir / config.features_dir;
    config.runs_dir = base_dir / config.runs_dir;
  }
  const auto table = make_setters(base_dir);
  static const std::set<std::string> sections{"dataset", "dsp", "features", "training", "output"};
  std::istringstream in(text);
  std::string line, section;
  std::set<std::string> seen;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = "config line " + std::to_string(line_no);
    if (line.front() == '[') {
      if (line.back() != ']') fail(ErrorKind::Schema, where + ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (!sections.contains(section)) fail(ErrorKind::Schema, where + ": unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(ErrorKind::Schema, where + ": expected key = value");
    if (section.empty()) fail(ErrorKind::Schema, where + ": key outside a section");
    const std::string key = section + "." + trim(line.substr(0, eq));
    const auto it = table.find(key);
    if (it == table.end()) fail(ErrorKind::Schema, where + ": unknown key '" + key + "'");
    if (!seen.insert(key).second) fail(ErrorKind::Schema, where + ": duplicate key '" + key + "'");
    it->second(config, key, trim(line.substr(eq + 1)));
  }
  config.training.validate();
  return config;
}

CliConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::MissingFile, "config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path());
}

std::string format_config(const CliConfig& c) {
  std::ostringstream o;
  const auto& f = c.features;
  const auto& t = c.training;
  o << "[dataset]\ncsv = " << c.dataset_csv.string() << "\naudio_dir = " << c.audio_dir.string() << "\n\n";
  o << "[dsp]\nrate = " << f.sample_rate_hz << "\nn_fft = " << f.n_fft << "\nhop = " << f.hop << "\n\n";
  o << "[features]\nn_mels = " << f.n_mels << "\nn_mfcc = " << f.n_mfcc << "\ntempogram_win_len = " << f.tempogram_win_len
    << "\ntempogram_ref_bpm = " << f.tempogram_ref_bpm << "\ntempogram_bins = " << f.tempogram_bins
    << "\ncqt_fmin_hz = " << f.cqt_fmin_hz << "\ncqt_bins = " << f.cqt_bins
    << "\ncqt_bins_per_octave = " << f.cqt_bins_per_octave << "\ncens_smooth_len = " << f.cens_smooth_len
    << "\ncens_downsample = " << f.cens_downsample << "\n\n";
  o << "[training]\nbatch_size = " << t.batch_size << "\ninitial_lr = " << t.initial_lr << "\nlr_patience = " << t.lr_patience
    << "\nlr_factor = " << t.lr_factor << "\nmin_lr = " << t.min_lr << "\nstop_patience = " << t.stop_patience
    << "\nmax_epochs = " << t.max_epochs << "\nseed = " << t.seed << "\ntrain_frac = " << t.train_frac
    << "\nstratified = " << (t.stratified ? "true" : "false") << "\n\n";
  o << "[output]\nfeatures_dir = " << c.features_dir.string() << "\nruns_dir = " << c.runs_dir.string() << "\n";
  return o.str();
}

}  // namespace sonoforge
