#include "sonoforge/storage.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "sonoforge/error.hpp"

namespace sonoforge {
namespace {

constexpr char kFeatureMagic[4] = {'F', 'T', 'R', '1'};

template <typename T>
void put(std::vector<std::uint8_t>& out, T v) {
  const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
  out.insert(out.end(), p, p + sizeof(T));
}

template <typename T>
T get(const std::vector<std::uint8_t>& in, std::size_t& pos) {
  T v;
  std::memcpy(&v, in.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

}  // namespace

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::MissingFile, path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::vector<std::uint8_t>& bytes, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorKind::Io, "write failed for " + path.string());
}

std::vector<std::uint8_t> encode_feature(const FeatureMatrix& f) {
  check_feature(f);
  std::vector<std::uint8_t> out;
  out.reserve(kFeatureHeaderBytes + f.values.size() * 4);
  out.insert(out.end(), kFeatureMagic, kFeatureMagic + 4);
  put<std::uint8_t>(out, static_cast<std::uint8_t>(f.kind));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(f.rows()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(f.cols()));
  put<std::uint32_t>(out, f.params.sample_rate_hz);
  put<std::uint32_t>(out, f.params.n_fft);
  put<std::uint32_t>(out, f.params.hop);
  for (double v : f.values.values()) put<float>(out, static_cast<float>(v));
  return out;
}

FeatureMatrix decode_feature(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kFeatureMagic, 4) != 0) fail(ErrorKind::Format, "bad FTR1 magic");
  if (bytes.size() < kFeatureHeaderBytes) fail(ErrorKind::Truncation, "FTR1 header cut short");
  std::size_t pos = 4;
  const auto kind = get<std::uint8_t>(bytes, pos);
  if (kind > static_cast<std::uint8_t>(FeatureKind::ChromaCens)) fail(ErrorKind::Format, "unknown feature kind code " + std::to_string(kind));
  const auto rows = get<std::uint32_t>(bytes, pos);
  const auto cols = get<std::uint32_t>(bytes, pos);
  FeatureMatrix f;
  f.kind = static_cast<FeatureKind>(kind);
  f.params.sample_rate_hz = get<std::uint32_t>(bytes, pos);
  f.params.n_fft = get<std::uint32_t>(bytes, pos);
  f.params.hop = get<std::uint32_t>(bytes, pos);
  const std::uint64_t expected = kFeatureHeaderBytes + std::uint64_t{rows} * cols * 4;
  if (bytes.size() < expected) {
    fail(ErrorKind::Truncation, "FTR1 payload has " + std::to_string(bytes.size() - kFeatureHeaderBytes) + " bytes, expected " +
                                    std::to_string(expected - kFeatureHeaderBytes));
  }
  if (bytes.size() > expected) fail(ErrorKind::Format, "trailing bytes after FTR1 payload");
  f.values = RealMatrix(rows, cols);
  for (double& v : f.values.values()) v = static_cast<double>(get<float>(bytes, pos));
  check_feature(f);
  return f;
}

void save_feature(const FeatureMatrix& f, const std::filesystem::path& path) { write_file(encode_feature(f), path); }
FeatureMatrix load_feature(const std::filesystem::path& path) { return decode_feature(read_file(path)); }

std::vector<std::uint8_t> encode_pgm(const FeatureMatrix& f) {
  check_feature(f);
  const auto [lo_it, hi_it] = std::minmax_element(f.values.values().begin(), f.values.values().end());
  const double lo = *lo_it, hi = *hi_it;
  const std::string header = "P5\n" + std::to_string(f.cols()) + " " + std::to_string(f.rows()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(header.size() + f.values.size());
  for (std::size_t r = f.rows(); r-- > 0;) {
    for (std::size_t c = 0; c < f.cols(); ++c) {
      std::uint8_t px = 128;
      if (hi > lo) px = static_cast<std::uint8_t>(std::lround(255.0 * (f.values(r, c) - lo) / (hi - lo)));
      out.push_back(px);
    }
  }
  return out;
}

void render_pgm(const FeatureMatrix& f, const std::filesystem::path& path) { write_file(encode_pgm(f), path); }

}  // namespace sonoforge
