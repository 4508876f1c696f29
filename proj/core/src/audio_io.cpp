#include "sonoforge/audio_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <set>
#include <sstream>

#include "sonoforge/error.hpp"

namespace sonoforge {
namespace {

static_assert(std::endian::native == std::endian::little,
              "WAV and FTR1 codecs assume a little-endian host");

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;

class ByteReader {
 public:
  ByteReader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  bool has(std::size_t n) const { return pos_ + n <= bytes_.size(); }
  std::size_t remaining() const { return bytes_.size() - pos_; }
  std::size_t pos() const { return pos_; }
  void skip(std::size_t n) { pos_ += n; }

  template <typename T>
  T read() {
    T value;
    std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }
  std::string tag() {
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), 4);
    pos_ += 4;
    return s;
  }

 private:
  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

template <typename T>
void put(std::vector<std::uint8_t>& out, T value) {
  const auto* p = reinterpret_cast<const std::uint8_t*>(&value);
  out.insert(out.end(), p, p + sizeof(T));
}

void put_tag(std::vector<std::uint8_t>& out, const char* tag) { out.insert(out.end(), tag, tag + 4); }

std::vector<std::uint8_t> encode(const AudioClip& clip, std::uint16_t format) {
  if (clip.sample_rate_hz <= 0) fail(ErrorKind::Range, "sample rate must be positive");
  const std::uint16_t bits = format == kFormatFloat ? 32 : 16;
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(clip.samples.size() * bits / 8);
  std::vector<std::uint8_t> out;
  out.reserve(44 + data_bytes);
  put_tag(out, "RIFF");
  put<std::uint32_t>(out, 36 + data_bytes);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put<std::uint32_t>(out, 16);
  put<std::uint16_t>(out, format);
  put<std::uint16_t>(out, 1);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(clip.sample_rate_hz));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(clip.sample_rate_hz) * bits / 8);
  put<std::uint16_t>(out, bits / 8);
  put<std::uint16_t>(out, bits);
  put_tag(out, "data");
  put<std::uint32_t>(out, data_bytes);
  for (double s : clip.samples) {
    if (format == kFormatFloat) {
      put<float>(out, static_cast<float>(s));
    } else {
      const double scaled = std::round(std::clamp(s, -1.0, 1.0) * 32768.0);
      put<std::int16_t>(out, static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0)));
    }
  }
  return out;
}

void write_bytes(const std::vector<std::uint8_t>& bytes, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorKind::Io, "write failed for " + path.string());
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

int parse_int(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    fail(ErrorKind::Schema, "column " + what + ": not an integer: '" + text + "'");
  }
}

}  // namespace

std::size_t DatasetIndex::num_classes() const {
  std::set<int> labels;
  for (const auto& e : entries) labels.insert(e.label);
  return labels.size();
}

AudioClip decode_wav(const std::vector<std::uint8_t>& bytes, std::string source_name) {
  ByteReader in(bytes);
  if (!in.has(12)) fail(ErrorKind::Format, "file too short for a RIFF header");
  if (in.tag() != "RIFF") fail(ErrorKind::Format, "missing RIFF tag");
  in.skip(4);
  if (in.tag() != "WAVE") fail(ErrorKind::Format, "missing WAVE tag");

  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  while (in.has(8)) {
    const std::string id = in.tag();
    const auto size = in.read<std::uint32_t>();
    if (id == "fmt ") {
      if (size < 16 || !in.has(size)) fail(ErrorKind::Format, "short fmt chunk");
      format = in.read<std::uint16_t>();
      channels = in.read<std::uint16_t>();
      rate = in.read<std::uint32_t>();
      in.skip(6);  // byte rate, block align
      bits = in.read<std::uint16_t>();
      in.skip(size - 16 + (size & 1));
      have_fmt = true;
      continue;
    }
    if (id != "data") {
      if (!in.has(size)) break;
      in.skip(size + (size & 1));
      continue;
    }
    if (!have_fmt) fail(ErrorKind::Format, "data chunk precedes fmt chunk");
    const bool pcm16 = format == kFormatPcm && bits == 16;
    const bool float32 = format == kFormatFloat && bits == 32;
    if (!pcm16 && !float32) {
      fail(ErrorKind::UnsupportedFormat, "codec " + std::to_string(format) + " with " +
                                             std::to_string(bits) + " bits per sample");
    }
    if (channels != 1 && channels != 2) {
      fail(ErrorKind::UnsupportedFormat, std::to_string(channels) + " channels");
    }
    if (rate == 0) fail(ErrorKind::Format, "zero sample rate");
    if (in.remaining() < size) {
      fail(ErrorKind::Truncation, "data chunk declares " + std::to_string(size) + " bytes, " +
                                      std::to_string(in.remaining()) + " present");
    }
    const std::size_t frame_bytes = static_cast<std::size_t>(channels) * bits / 8;
    const std::size_t frames = size / frame_bytes;
    if (frames == 0) fail(ErrorKind::Format, "empty data chunk");

    AudioClip clip;
    clip.sample_rate_hz = static_cast<int>(rate);
    clip.source_name = std::move(source_name);
    clip.samples.resize(frames);
    for (std::size_t i = 0; i < frames; ++i) {
      double acc = 0.0;
      for (int c = 0; c < channels; ++c) {
        double v = pcm16 ? in.read<std::int16_t>() / 32768.0 : static_cast<double>(in.read<float>());
        if (!std::isfinite(v)) fail(ErrorKind::NonFinite, "non-finite sample at frame " + std::to_string(i));
        acc += v;
      }
      clip.samples[i] = acc / channels;
    }
    return clip;
  }
  if (!have_fmt) fail(ErrorKind::Format, "no fmt chunk");
  fail(ErrorKind::Format, "no data chunk");
}

AudioClip load_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::MissingFile, path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_wav(bytes, path.stem().string());
}

std::vector<std::uint8_t> encode_wav_float32(const AudioClip& clip) { return encode(clip, kFormatFloat); }
std::vector<std::uint8_t> encode_wav_pcm16(const AudioClip& clip) { return encode(clip, kFormatPcm); }

void write_wav_float32(const AudioClip& clip, const std::filesystem::path& path) {
  write_bytes(encode_wav_float32(clip), path);
}
void write_wav_pcm16(const AudioClip& clip, const std::filesystem::path& path) {
  write_bytes(encode_wav_pcm16(clip), path);
}

AudioClip canonicalize(const AudioClip& clip, int rate_hz) {
  AudioClip out = resample(clip, rate_hz);
  out.samples.resize(static_cast<std::size_t>(std::llround(rate_hz * kClipSeconds)), 0.0);
  return out;
}

DatasetIndex load_index(const std::filesystem::path& csv_path, const std::filesystem::path& audio_dir) {
  std::ifstream in(csv_path);
  if (!in) fail(ErrorKind::MissingFile, csv_path.string());
  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::Schema, "missing header row in " + csv_path.string());
  if (line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);

  const auto header = split_csv_line(line);
  auto column = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) fail(ErrorKind::Schema, "missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t c_file = column("filename");
  const std::size_t c_fold = column("fold");
  const std::size_t c_target = column("target");
  const std::size_t c_category = column("category");
  const std::size_t needed = std::max({c_file, c_fold, c_target, c_category}) + 1;

  DatasetIndex index;
  index.class_names.assign(kNumClasses, {});
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv_line(line);
    if (fields.size() < needed) {
      fail(ErrorKind::Schema, "line " + std::to_string(line_no) + " has too few fields");
    }
    IndexEntry e;
    e.path = audio_dir / fields[c_file];
    e.fold = parse_int(fields[c_fold], "fold");
    e.label = parse_int(fields[c_target], "target");
    e.category = fields[c_category];
    if (e.label < 0 || e.label >= kNumClasses) {
      fail(ErrorKind::Range, "line " + std::to_string(line_no) + ": target " +
                                 std::to_string(e.label) + " outside 0..49");
    }
    auto& name = index.class_names[static_cast<std::size_t>(e.label)];
    if (name.empty()) {
      name = e.category;
    } else if (name != e.category) {
      fail(ErrorKind::Validation, "label " + std::to_string(e.label) + " maps to both '" + name +
                                      "' and '" + e.category + "'");
    }
    if (!std::filesystem::exists(e.path)) fail(ErrorKind::MissingFile, e.path.string());
    index.entries.push_back(std::move(e));
  }
  if (index.entries.empty()) fail(ErrorKind::Validation, csv_path.string() + " lists no clips");
  return index;
}

void validate_full_corpus(const DatasetIndex& index) {
  std::set<int> labels;
  for (const auto& e : index.entries) labels.insert(e.label);
  if (labels.size() != static_cast<std::size_t>(kNumClasses) || *labels.begin() != 0 ||
      *labels.rbegin() != kNumClasses - 1) {
    fail(ErrorKind::Validation, "expected labels 0..49, found " + std::to_string(labels.size()) +
                                    " distinct labels");
  }
}

}  // namespace sonoforge
