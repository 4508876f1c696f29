#include "sonoforge/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include "sonoforge/error.hpp"

namespace sonoforge {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int integer(int lo, int hi) { return lo + static_cast<int>(uniform() * (hi - lo + 1)); }
  double normal() {
    const double u1 = std::max(uniform(), 1e-300), u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
  }

 private:
  std::mt19937_64 gen_;
};

/// RBJ biquad, direct form I.
class Biquad {
 public:
  static Biquad bandpass(double f0, double q, double sr) {
    const double w = kTwoPi * f0 / sr, alpha = std::sin(w) / (2.0 * q), a0 = 1.0 + alpha;
    return Biquad(alpha / a0, 0.0, -alpha / a0, -2.0 * std::cos(w) / a0, (1.0 - alpha) / a0);
  }
  static Biquad lowpass(double f0, double q, double sr) {
    const double w = kTwoPi * f0 / sr, alpha = std::sin(w) / (2.0 * q), c = std::cos(w), a0 = 1.0 + alpha;
    return Biquad((1.0 - c) / 2.0 / a0, (1.0 - c) / a0, (1.0 - c) / 2.0 / a0, -2.0 * c / a0, (1.0 - alpha) / a0);
  }
  static Biquad highpass(double f0, double q, double sr) {
    const double w = kTwoPi * f0 / sr, alpha = std::sin(w) / (2.0 * q), c = std::cos(w), a0 = 1.0 + alpha;
    return Biquad((1.0 + c) / 2.0 / a0, -(1.0 + c) / a0, (1.0 + c) / 2.0 / a0, -2.0 * c / a0, (1.0 - alpha) / a0);
  }

  double operator()(double x) {
    const double y = b0_ * x + b1_ * x1_ + b2_ * x2_ - a1_ * y1_ - a2_ * y2_;
    x2_ = x1_;
    x1_ = x;
    y2_ = y1_;
    y1_ = y;
    return y;
  }

 private:
  Biquad(double b0, double b1, double b2, double a1, double a2) : b0_(b0), b1_(b1), b2_(b2), a1_(a1), a2_(a2) {}
  double b0_, b1_, b2_, a1_, a2_;
  double x1_ = 0, x2_ = 0, y1_ = 0, y2_ = 0;
};

struct Context {
  Rng rng;
  double sr;
  std::vector<double> out;

  std::size_t at(double seconds) const {
    return std::min(out.size(), static_cast<std::size_t>(std::max(0.0, seconds) * sr));
  }
};

// Harmonic tone with a per-sample f0 contour and a formant-shaped spectrum.
void harmonic_event(Context& c, double start_s, double dur_s, double f0_start, double f0_end, double formant_hz,
                    double amp, double attack_s, double vibrato_hz = 0.0, double vibrato_depth = 0.0) {
  const std::size_t begin = c.at(start_s), end = c.at(start_s + dur_s);
  if (end <= begin) return;
  const int n_harm = 12;
  double phase = 0.0;
  for (std::size_t i = begin; i < end; ++i) {
    const double t = static_cast<double>(i - begin) / c.sr;
    const double frac = t / dur_s;
    double f0 = f0_start + (f0_end - f0_start) * frac;
    if (vibrato_depth > 0.0) f0 *= 1.0 + vibrato_depth * std::sin(kTwoPi * vibrato_hz * t);
    phase += kTwoPi * f0 / c.sr;
    const double env = std::min(1.0, t / attack_s) * std::min(1.0, (dur_s - t) / (0.3 * dur_s + 1e-9));
    double s = 0.0;
    for (int h = 1; h <= n_harm; ++h) {
      const double fh = h * f0;
      if (fh > c.sr / 2.2) break;
      const double d = std::log2(fh / formant_hz);
      s += std::exp(-d * d * 1.5) * std::sin(h * phase) / std::sqrt(h);
    }
    c.out[i] += amp * env * s;
  }
}

void noise_burst(Context& c, double start_s, double dur_s, Biquad filter, double amp, double attack_s, double decay_s) {
  const std::size_t begin = c.at(start_s), end = c.at(start_s + dur_s);
  for (std::size_t i = begin; i < end; ++i) {
    const double t = static_cast<double>(i - begin) / c.sr;
    const double env = std::min(1.0, t / attack_s) * std::exp(-t / decay_s);
    c.out[i] += amp * env * filter(c.rng.normal());
  }
}

void dog(Context& c) {
  const int barks = c.rng.integer(2, 5);
  const double f0 = c.rng.uniform(350, 800), formant = c.rng.uniform(900, 1800);
  double t = c.rng.uniform(0.1, 0.8);
  for (int b = 0; b < barks && t < 4.6; ++b) {
    const double dur = c.rng.uniform(0.12, 0.25);
    harmonic_event(c, t, dur, f0 * c.rng.uniform(1.0, 1.15), f0 * 0.8, formant, c.rng.uniform(0.4, 0.7), 0.01);
    noise_burst(c, t, dur, Biquad::bandpass(formant * 1.5, 1.0, c.sr), 0.08, 0.005, 0.08);
    t += dur + c.rng.uniform(0.2, 0.9);
  }
}

void rooster(Context& c) {
  const double f0 = c.rng.uniform(450, 900), formant = c.rng.uniform(1500, 2800);
  double t = c.rng.uniform(0.1, 1.5);
  const double d1 = c.rng.uniform(0.15, 0.3), d2 = c.rng.uniform(0.8, 1.6);
  harmonic_event(c, t, d1, f0, f0 * 1.3, formant, 0.5, 0.02);
  t += d1;
  harmonic_event(c, t, d2, f0 * 1.3, f0 * 0.9, formant, 0.6, 0.05, 6.0, 0.03);
}

void rain(Context& c) {
  Biquad hp = Biquad::highpass(c.rng.uniform(800, 2000), 0.7, c.sr);
  const double level = c.rng.uniform(0.1, 0.2);
  for (double& s : c.out) s += level * hp(c.rng.normal());
  const double drops_per_s = c.rng.uniform(30, 90);
  const auto n_drops = static_cast<int>(drops_per_s * static_cast<double>(c.out.size()) / c.sr);
  for (int d = 0; d < n_drops; ++d) {
    const double t0 = c.rng.uniform(0.0, static_cast<double>(c.out.size()) / c.sr);
    noise_burst(c, t0, 0.02, Biquad::bandpass(c.rng.uniform(2000, 7000), 4.0, c.sr), c.rng.uniform(0.05, 0.3), 0.0005, 0.004);
  }
}

void sea_waves(Context& c) {
  Biquad lp = Biquad::lowpass(c.rng.uniform(300, 900), 0.7, c.sr);
  const double period = c.rng.uniform(2.0, 4.5), phase = c.rng.uniform(0, kTwoPi);
  for (std::size_t i = 0; i < c.out.size(); ++i) {
    const double t = static_cast<double>(i) / c.sr;
    const double env = 0.35 + 0.65 * std::pow(0.5 + 0.5 * std::sin(kTwoPi * t / period + phase), 2.0);
    c.out[i] += 0.6 * env * lp(c.rng.normal());
  }
}

void crackling_fire(Context& c) {
  Biquad lp = Biquad::lowpass(c.rng.uniform(150, 400), 0.7, c.sr);
  for (double& s : c.out) s += 0.15 * lp(c.rng.normal());
  const double rate = c.rng.uniform(15, 50);
  const auto n = static_cast<int>(rate * static_cast<double>(c.out.size()) / c.sr);
  for (int k = 0; k < n; ++k) {
    const double t0 = c.rng.uniform(0.0, static_cast<double>(c.out.size()) / c.sr);
    noise_burst(c, t0, 0.01, Biquad::highpass(c.rng.uniform(1000, 4000), 0.7, c.sr), c.rng.uniform(0.1, 0.9), 0.0002, 0.002);
  }
}

void crying_baby(Context& c) {
  const double f0 = c.rng.uniform(330, 560), formant = c.rng.uniform(1000, 1600);
  double t = c.rng.uniform(0.0, 0.5);
  while (t < 4.5) {
    const double dur = c.rng.uniform(0.6, 1.3);
    harmonic_event(c, t, dur, f0 * c.rng.uniform(0.95, 1.1), f0 * c.rng.uniform(0.8, 1.0), formant, 0.5, 0.08,
                   c.rng.uniform(5, 8), 0.04);
    t += dur + c.rng.uniform(0.25, 0.6);
  }
}

void sneezing(Context& c) {
  const double t0 = c.rng.uniform(0.5, 3.0);
  noise_burst(c, t0, 0.5, Biquad::bandpass(c.rng.uniform(600, 1200), 1.0, c.sr), 0.15, 0.2, 0.3);
  noise_burst(c, t0 + 0.55, 0.45, Biquad::bandpass(c.rng.uniform(2500, 5000), 0.8, c.sr), 0.9, 0.005, 0.12);
}

void clock_tick(Context& c) {
  const double interval = 60.0 / c.rng.uniform(55, 130);
  const double ring = c.rng.uniform(2000, 4500);
  for (double t = c.rng.uniform(0.0, interval); t < 5.0; t += interval) {
    noise_burst(c, t, 0.04, Biquad::bandpass(ring, 8.0, c.sr), 0.8, 0.0002, 0.006);
  }
}

void helicopter(Context& c) {
  Biquad lp = Biquad::lowpass(c.rng.uniform(200, 500), 0.7, c.sr);
  const double blade_hz = c.rng.uniform(4.0, 9.0), engine = c.rng.uniform(70, 150);
  double ph = 0.0;
  for (std::size_t i = 0; i < c.out.size(); ++i) {
    const double t = static_cast<double>(i) / c.sr;
    const double chop = std::pow(0.5 + 0.5 * std::cos(kTwoPi * blade_hz * t), 6.0);
    ph += kTwoPi * engine / c.sr;
    c.out[i] += 0.9 * chop * lp(c.rng.normal()) + 0.08 * (std::sin(ph) + 0.5 * std::sin(2 * ph));
  }
}

void chainsaw(Context& c) {
  const double f0 = c.rng.uniform(80, 150);
  Biquad bp = Biquad::bandpass(c.rng.uniform(1500, 3000), 1.0, c.sr);
  double ph = 0.0;
  const double wobble = c.rng.uniform(0.3, 1.0);
  for (std::size_t i = 0; i < c.out.size(); ++i) {
    const double t = static_cast<double>(i) / c.sr;
    const double f = f0 * (1.0 + 0.08 * std::sin(kTwoPi * wobble * t));
    ph += f / c.sr;
    ph -= std::floor(ph);
    const double saw = 2.0 * ph - 1.0;
    c.out[i] += 0.3 * saw + 0.2 * bp(c.rng.normal());
  }
}

using Generator = void (*)(Context&);
constexpr Generator kGenerators[] = {dog, rooster, rain, sea_waves, crackling_fire,
                                     crying_baby, sneezing, clock_tick, helicopter, chainsaw};

}  // namespace

AudioClip sine(double freq_hz, double seconds, int sample_rate_hz, double amplitude, double phase) {
  AudioClip clip;
  clip.sample_rate_hz = sample_rate_hz;
  clip.samples.resize(static_cast<std::size_t>(std::llround(seconds * sample_rate_hz)));
  for (std::size_t i = 0; i < clip.samples.size(); ++i) {
    clip.samples[i] = amplitude * std::sin(kTwoPi * freq_hz * static_cast<double>(i) / sample_rate_hz + phase);
  }
  return clip;
}

AudioClip tones(const std::vector<double>& freqs_hz, double seconds, int sample_rate_hz, double amplitude) {
  AudioClip clip;
  clip.sample_rate_hz = sample_rate_hz;
  clip.samples.assign(static_cast<std::size_t>(std::llround(seconds * sample_rate_hz)), 0.0);
  for (double f : freqs_hz) {
    for (std::size_t i = 0; i < clip.samples.size(); ++i) {
      clip.samples[i] += amplitude * std::sin(kTwoPi * f * static_cast<double>(i) / sample_rate_hz);
    }
  }
  return clip;
}

AudioClip click_train(double bpm, double seconds, int sample_rate_hz, double offset_s) {
  AudioClip clip;
  clip.sample_rate_hz = sample_rate_hz;
  clip.samples.assign(static_cast<std::size_t>(std::llround(seconds * sample_rate_hz)), 0.0);
  const double interval = 60.0 / bpm;
  const auto decay = static_cast<std::size_t>(0.002 * sample_rate_hz);
  for (double t = offset_s; t < seconds; t += interval) {
    const auto start = static_cast<std::size_t>(std::llround(t * sample_rate_hz));
    for (std::size_t k = 0; k < decay && start + k < clip.samples.size(); ++k) {
      clip.samples[start + k] += 0.9 * std::exp(-static_cast<double>(k) / (0.25 * static_cast<double>(decay)));
    }
  }
  return clip;
}

const std::vector<SynthClass>& synth_classes() {
  static const std::vector<SynthClass> classes{
      {0, "dog"},           {1, "rooster"},     {10, "rain"},       {11, "sea_waves"},  {12, "crackling_fire"},
      {20, "crying_baby"},  {21, "sneezing"},   {38, "clock_tick"}, {40, "helicopter"}, {41, "chainsaw"},
  };
  return classes;
}

AudioClip synthesize_clip(std::size_t slot, std::uint64_t seed, int sample_rate_hz, double seconds) {
  if (slot >= synth_classes().size()) fail(ErrorKind::Range, "synthetic class slot out of range");
  Context c{Rng(seed), static_cast<double>(sample_rate_hz), {}};
  c.out.assign(static_cast<std::size_t>(std::llround(seconds * sample_rate_hz)), 0.0);
  kGenerators[slot](c);

  // room tone and random gain
  Biquad tint = Biquad::lowpass(c.rng.uniform(2000, 8000), 0.7, c.sr);
  const double floor = std::pow(10.0, c.rng.uniform(-60, -40) / 20.0);
  for (double& s : c.out) s += floor * tint(c.rng.normal());
  double peak = 0.0;
  for (double s : c.out) peak = std::max(peak, std::abs(s));
  const double gain = std::pow(10.0, c.rng.uniform(-18, -1) / 20.0) / std::max(peak, 1e-9);

  AudioClip clip;
  clip.sample_rate_hz = sample_rate_hz;
  clip.label = synth_classes()[slot].target;
  clip.samples.resize(c.out.size());
  for (std::size_t i = 0; i < c.out.size(); ++i) clip.samples[i] = c.out[i] * gain;
  return clip;
}

DatasetIndex write_synthetic_corpus(const std::filesystem::path& root, const SynthCorpusOptions& options) {
  if (options.n_classes < 1 || options.n_classes > synth_classes().size()) {
    fail(ErrorKind::Range, "n_classes must be in 1.." + std::to_string(synth_classes().size()));
  }
  const auto audio = root / "audio";
  const auto meta = root / "meta";
  std::filesystem::create_directories(audio);
  std::filesystem::create_directories(meta);
  std::ofstream csv(meta / "esc50.csv");
  if (!csv) fail(ErrorKind::Io, "cannot write " + (meta / "esc50.csv").string());
  csv << "filename,fold,target,category,esc10,src_file,take\n";
  for (std::size_t slot = 0; slot < options.n_classes; ++slot) {
    const auto& cls = synth_classes()[slot];
    for (std::size_t k = 0; k < options.clips_per_class; ++k) {
      const std::uint64_t clip_seed = options.seed * 1000003ULL + slot * 10007ULL + k;
      AudioClip clip = synthesize_clip(slot, clip_seed, options.sample_rate_hz);
      const int fold = static_cast<int>(k % 5) + 1;
      const std::string src = std::to_string(100000 + slot * 1000 + k);
      const std::string name = std::to_string(fold) + "-" + src + "-A-" + std::to_string(cls.target) + ".wav";
      write_wav_pcm16(clip, audio / name);
      csv << name << "," << fold << "," << cls.target << "," << cls.category << ",False," << src << ",A\n";
    }
  }
  csv.close();
  return load_index(meta / "esc50.csv", audio);
}

}  // namespace sonoforge
