#include "sonoforge/report.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "sonoforge/error.hpp"

namespace sonoforge {
namespace {

constexpr const char* kHeader = "sonoforge-run-report 1";

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double to_double(const std::string& s, const std::string& key) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) fail(ErrorKind::Format, "bad number for " + key + ": '" + s + "'");
  return v;
}

long long to_int(const std::string& s, const std::string& key) {
  long long v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) fail(ErrorKind::Format, "bad integer for " + key + ": '" + s + "'");
  return v;
}

std::uint64_t to_uint(const std::string& s, const std::string& key) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) fail(ErrorKind::Format, "bad integer for " + key + ": '" + s + "'");
  return v;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::string format_run_report(const RunReport& r) {
  const auto& c = r.config;
  std::ostringstream out;
  out << kHeader << "\n\n[config]\n";
  out << "feature = " << to_string(c.feature_kind) << "\n";
  out << "batch_size = " << c.batch_size << "\n";
  out << "initial_lr = " << num(c.initial_lr) << "\n";
  out << "lr_patience = " << c.lr_patience << "\n";
  out << "lr_factor = " << num(c.lr_factor) << "\n";
  out << "min_lr = " << num(c.min_lr) << "\n";
  out << "stop_patience = " << c.stop_patience << "\n";
  out << "max_epochs = " << c.max_epochs << "\n";
  out << "seed = " << c.seed << "\n";
  out << "train_frac = " << num(c.train_frac) << "\n";
  out << "stratified = " << (c.stratified ? "true" : "false") << "\n";
  if (c.stop_at_train_acc) out << "stop_at_train_acc = " << num(*c.stop_at_train_acc) << "\n";
  out << "train_size = " << r.train_size << "\n";
  out << "val_size = " << r.val_size << "\n";
  for (std::size_t i = 0; i < r.epochs.size(); ++i) {
    const auto& e = r.epochs[i];
    out << "\n[epoch " << (i + 1) << "]\n";
    out << "train_loss = " << num(e.train_loss) << "\n";
    out << "train_acc = " << num(e.train_acc) << "\n";
    out << "val_loss = " << num(e.val_loss) << "\n";
    out << "val_acc = " << num(e.val_acc) << "\n";
    out << "lr = " << num(e.lr) << "\n";
  }
  out << "\n[summary]\n";
  out << "epochs = " << r.epochs.size() << "\n";
  out << "stopped_early = " << (r.stopped_early ? "true" : "false") << "\n";
  if (!r.epochs.empty()) {
    const auto& f = r.epochs.back();
    out << "train_loss = " << num(f.train_loss) << "\n";
    out << "train_acc = " << num(f.train_acc) << "\n";
    out << "val_loss = " << num(f.val_loss) << "\n";
    out << "val_acc = " << num(f.val_acc) << "\n";
  }
  return out.str();
}

RunReport parse_run_report(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || trim(line) != kHeader) fail(ErrorKind::Format, "not a run report");
  RunReport r;
  std::string section;
  std::size_t declared_epochs = 0;
  bool have_summary = false;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(ErrorKind::Format, "bad section header '" + line + "'");
      section = line.substr(1, line.size() - 2);
      if (section.starts_with("epoch ")) {
        const auto n = static_cast<std::size_t>(to_int(section.substr(6), "epoch"));
        if (n != r.epochs.size() + 1) fail(ErrorKind::Format, "epochs out of order");
        r.epochs.emplace_back();
      } else if (section == "summary") {
        have_summary = true;
      } else if (section != "config") {
        fail(ErrorKind::Format, "unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(ErrorKind::Format, "expected key = value: '" + line + "'");
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    auto& c = r.config;
    if (section == "config") {
      if (key == "feature") {
        const auto k = parse_feature_kind(value);
        if (!k) fail(ErrorKind::Format, "unknown feature '" + value + "'");
        c.feature_kind = *k;
      } else if (key == "batch_size") c.batch_size = static_cast<std::size_t>(to_int(value, key));
      else if (key == "initial_lr") c.initial_lr = to_double(value, key);
      else if (key == "lr_patience") c.lr_patience = static_cast<int>(to_int(value, key));
      else if (key == "lr_factor") c.lr_factor = to_double(value, key);
      else if (key == "min_lr") c.min_lr = to_double(value, key);
      else if (key == "stop_patience") c.stop_patience = static_cast<int>(to_int(value, key));
      else if (key == "max_epochs") c.max_epochs = static_cast<int>(to_int(value, key));
      else if (key == "seed") c.seed = to_uint(value, key);
      else if (key == "train_frac") c.train_frac = to_double(value, key);
      else if (key == "stratified") c.stratified = value == "true";
      else if (key == "stop_at_train_acc") c.stop_at_train_acc = to_double(value, key);
      else if (key == "train_size") r.train_size = static_cast<std::size_t>(to_int(value, key));
      else if (key == "val_size") r.val_size = static_cast<std::size_t>(to_int(value, key));
      else fail(ErrorKind::Format, "unknown config key '" + key + "'");
    } else if (section.starts_with("epoch ")) {
      auto& e = r.epochs.back();
      if (key == "train_loss") e.train_loss = to_double(value, key);
      else if (key == "train_acc") e.train_acc = to_double(value, key);
      else if (key == "val_loss") e.val_loss = to_double(value, key);
      else if (key == "val_acc") e.val_acc = to_double(value, key);
      else if (key == "lr") e.lr = to_double(value, key);
      else fail(ErrorKind::Format, "unknown epoch key '" + key + "'");
    } else if (section == "summary") {
      if (key == "epochs") declared_epochs = static_cast<std::size_t>(to_int(value, key));
      else if (key == "stopped_early") r.stopped_early = value == "true";
      // final metrics repeat the last epoch and are not stored separately
    } else {
      fail(ErrorKind::Format, "key outside any section: '" + key + "'");
    }
  }
  if (!have_summary) fail(ErrorKind::Truncation, "run report has no [summary] block");
  if (declared_epochs != r.epochs.size()) fail(ErrorKind::Format, "summary epoch count disagrees with epoch records");
  return r;
}

void write_run_report(const RunReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
  out << format_run_report(report);
}

RunReport read_run_report(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::MissingFile, path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_report(ss.str());
}

ComparisonRow comparison_row(const RunReport& report) {
  const auto& f = report.final_epoch();
  return {std::string(display_name(report.config.feature_kind)), 100.0 * f.train_acc, 100.0 * f.val_acc, f.train_loss,
          f.val_loss, report.epoch_count()};
}

std::string format_comparison_table(std::vector<ComparisonRow> rows) {
  std::stable_sort(rows.begin(), rows.end(),
                   [](const ComparisonRow& a, const ComparisonRow& b) { return a.val_acc_pct > b.val_acc_pct; });
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-26s %14s %14s %10s %10s %8s\n", "Feature", "Train acc [%]", "Val acc [%]",
                "Train loss", "Val loss", "Epochs");
  out += buf;
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%-26s %14.2f %14.2f %10.2f %10.2f %8zu\n", r.feature.c_str(), r.train_acc_pct,
                  r.val_acc_pct, r.train_loss, r.val_loss, r.epochs);
    out += buf;
  }
  return out;
}

}  // namespace sonoforge
