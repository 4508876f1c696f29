#include <cstring>
#include <sstream>

#include "sonoforge/error.hpp"
#include "sonoforge/storage.hpp"

namespace sonoforge {
namespace {

constexpr char kMagic[4] = {'S', 'F', 'M', '1'};

std::string dims_text(const Shape& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "," : "") + std::to_string(s[i]);
  return out;
}

Shape parse_dims(const std::string& text) {
  Shape s;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) s.push_back(std::stoul(tok));
  return s;
}

struct Entry {
  std::string kind, name;
  Shape shape;
};

std::string manifest(const Model& model) {
  const auto& sp = model.spec();
  std::ostringstream m;
  m << "model input_height=" << sp.input_height << " input_width=" << sp.input_width << " n_classes=" << sp.n_classes
    << " conv=" << sp.conv_filters[0] << "," << sp.conv_filters[1] << "," << sp.conv_filters[2] << ","
    << sp.conv_filters[3] << " dense=" << sp.dense_units << " dropout=" << sp.dropout_rate << "\n";
  for (const auto* p : model.parameters()) m << "param " << p->name << " " << dims_text(p->value.shape()) << "\n";
  for (const auto& [name, t] : model.buffers()) m << "buffer " << name << " " << dims_text(t->shape()) << "\n";
  return m.str();
}

ModelSpec parse_spec_line(const std::string& line) {
  std::istringstream in(line);
  std::string word;
  in >> word;
  if (word != "model") fail(ErrorKind::Format, "checkpoint manifest must start with a model line");
  ModelSpec spec;
  while (in >> word) {
    const auto eq = word.find('=');
    if (eq == std::string::npos) fail(ErrorKind::Format, "bad manifest token '" + word + "'");
    const std::string key = word.substr(0, eq), value = word.substr(eq + 1);
    if (key == "input_height") spec.input_height = std::stoul(value);
    else if (key == "input_width") spec.input_width = std::stoul(value);
    else if (key == "n_classes") spec.n_classes = std::stoul(value);
    else if (key == "dense") spec.dense_units = std::stoul(value);
    else if (key == "dropout") spec.dropout_rate = std::stod(value);
    else if (key == "conv") {
      const Shape f = parse_dims(value);
      if (f.size() != 4) fail(ErrorKind::Format, "conv needs four filter counts");
      std::copy(f.begin(), f.end(), spec.conv_filters.begin());
    } else {
      fail(ErrorKind::Format, "unknown manifest key '" + key + "'");
    }
  }
  return spec;
}

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const Model& model) {
  const std::string text = manifest(model);
  std::vector<std::uint8_t> out(kMagic, kMagic + 4);
  const auto len = static_cast<std::uint32_t>(text.size());
  out.insert(out.end(), reinterpret_cast<const std::uint8_t*>(&len), reinterpret_cast<const std::uint8_t*>(&len) + 4);
  out.insert(out.end(), text.begin(), text.end());
  auto append = [&out](const Tensor& t) {
    const auto* p = reinterpret_cast<const std::uint8_t*>(t.data());
    out.insert(out.end(), p, p + t.size() * sizeof(float));
  };
  for (const auto* p : model.parameters()) append(p->value);
  for (const auto& [name, t] : model.buffers()) append(*t);
  return out;
}

Model decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) fail(ErrorKind::Format, "bad SFM1 magic");
  if (bytes.size() < 8) fail(ErrorKind::Truncation, "SFM1 header cut short");
  std::uint32_t len;
  std::memcpy(&len, bytes.data() + 4, 4);
  if (bytes.size() < 8 + std::size_t{len}) fail(ErrorKind::Truncation, "SFM1 manifest cut short");
  std::istringstream text(std::string(reinterpret_cast<const char*>(bytes.data() + 8), len));

  std::string line;
  std::getline(text, line);
  Model model(parse_spec_line(line));
  std::vector<Entry> entries;
  while (std::getline(text, line)) {
    if (line.empty()) continue;
    std::istringstream in(line);
    Entry e;
    std::string dims;
    in >> e.kind >> e.name >> dims;
    e.shape = parse_dims(dims);
    entries.push_back(std::move(e));
  }

  std::vector<std::pair<std::string, Tensor*>> targets;
  for (auto* p : model.parameters()) targets.emplace_back(p->name, &p->value);
  for (auto& b : model.buffers()) targets.push_back(b);
  if (entries.size() != targets.size()) fail(ErrorKind::Format, "manifest lists " + std::to_string(entries.size()) + " tensors, model has " + std::to_string(targets.size()));

  std::size_t pos = 8 + len;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    Tensor& t = *targets[i].second;
    if (entries[i].name != targets[i].first || entries[i].shape != t.shape()) {
      fail(ErrorKind::Format, "manifest entry " + entries[i].name + " does not match model tensor " + targets[i].first);
    }
    const std::size_t nbytes = t.size() * sizeof(float);
    if (bytes.size() < pos + nbytes) fail(ErrorKind::Truncation, "SFM1 payload cut short in " + entries[i].name);
    std::memcpy(t.data(), bytes.data() + pos, nbytes);
    pos += nbytes;
  }
  if (pos != bytes.size()) fail(ErrorKind::Format, "trailing bytes after SFM1 payload");
  model.zero_grad();
  return model;
}

void save_checkpoint(const Model& model, const std::filesystem::path& path) { write_file(encode_checkpoint(model), path); }
Model load_checkpoint(const std::filesystem::path& path) { return decode_checkpoint(read_file(path)); }

}  // namespace sonoforge
