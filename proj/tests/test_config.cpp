#include <gtest/gtest.h>

#include <fstream>

#include "sonoforge/config.hpp"
#include "sonoforge/error.hpp"
#include "test_support.hpp"

using namespace sonoforge;

namespace {

ErrorKind kind_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorKind::Io;
}

}  // namespace

TEST(Config, DefaultsMatchTheProtocol) {
  const CliConfig c = parse_config("");
  EXPECT_EQ(c.training.batch_size, 32u);
  EXPECT_EQ(c.training.initial_lr, 1e-3);
  EXPECT_EQ(c.training.lr_patience, 2);
  EXPECT_EQ(c.training.lr_factor, 0.5);
  EXPECT_EQ(c.training.min_lr, 1e-5);
  EXPECT_EQ(c.training.stop_patience, 6);
  EXPECT_EQ(c.training.max_epochs, 100);
  EXPECT_EQ(c.training.train_frac, 0.8);
  EXPECT_FALSE(c.training.stratified);
  EXPECT_EQ(c.features.sample_rate_hz, 22050);
  EXPECT_EQ(c.features.n_fft, 2048u);
  EXPECT_EQ(c.features.hop, 512u);
  EXPECT_EQ(c.features.n_mels, 128);
  EXPECT_EQ(c.features.n_mfcc, 40);
}

TEST(Config, ParsesAllSectionsAndResolvesPaths) {
  const std::string text =
      "# experiment\n"
      "[dataset]\n"
      "csv = meta/esc50.csv\n"
      "audio_dir = /data/audio\n"
      "\n[dsp]\nrate = 16000\nn_fft = 1024\nhop = 256\n"
      "[features]\nn_mels = 64   # fewer bands\ncens_downsample = 2\n"
      "[training]\nbatch_size = 16\nseed = 9\nstratified = true\nmax_epochs = 30\n"
      "[output]\nfeatures_dir = feats\n";
  const CliConfig c = parse_config(text, "/exp");
  EXPECT_EQ(c.dataset_csv, std::filesystem::path("/exp/meta/esc50.csv"));
  EXPECT_EQ(c.audio_dir, std::filesystem::path("/data/audio"));
  EXPECT_EQ(c.features.sample_rate_hz, 16000);
  EXPECT_EQ(c.features.n_fft, 1024u);
  EXPECT_EQ(c.features.hop, 256u);
  EXPECT_EQ(c.features.n_mels, 64);
  EXPECT_EQ(c.features.cens_downsample, 2);
  EXPECT_EQ(c.training.batch_size, 16u);
  EXPECT_EQ(c.training.seed, 9u);
  EXPECT_TRUE(c.training.stratified);
  EXPECT_EQ(c.training.max_epochs, 30);
  EXPECT_EQ(c.features_dir, std::filesystem::path("/exp/feats"));
  EXPECT_EQ(c.runs_dir, std::filesystem::path("/exp/runs"));
}

TEST(Config, RejectsUnknownAndMalformedInput) {
  EXPECT_EQ(kind_of("[dataset]\nbogus = 1\n"), ErrorKind::Schema);
  EXPECT_EQ(kind_of("[nonsense]\n"), ErrorKind::Schema);
  EXPECT_EQ(kind_of("csv = x\n"), ErrorKind::Schema);
  EXPECT_EQ(kind_of("[training]\nbatch_size = many\n"), ErrorKind::Schema);
  EXPECT_EQ(kind_of("[training]\nseed = 1\nseed = 2\n"), ErrorKind::Schema);
  EXPECT_EQ(kind_of("[training]\nstratified = maybe\n"), ErrorKind::Schema);
  EXPECT_EQ(kind_of("[training]\ntrain_frac = 1.5\n"), ErrorKind::Validation);
}

TEST(Config, FormatRoundTrips) {
  CliConfig c;
  c.dataset_csv = "/a/meta.csv";
  c.audio_dir = "/a/audio";
  c.features_dir = "/a/f";
  c.runs_dir = "/a/r";
  c.training.seed = 4;
  c.training.initial_lr = 3e-4;
  c.features.n_mfcc = 20;
  const CliConfig back = parse_config(format_config(c));
  EXPECT_EQ(back.dataset_csv, c.dataset_csv);
  EXPECT_EQ(back.training.seed, 4u);
  EXPECT_EQ(back.training.initial_lr, 3e-4);
  EXPECT_EQ(back.features.n_mfcc, 20);
  EXPECT_EQ(format_config(back), format_config(c));
}

TEST(Config, LoadResolvesAgainstFileDirectory) {
  testing_support::TempDir dir("cfg");
  std::ofstream(dir / "run.ini") << "[dataset]\ncsv = meta.csv\naudio_dir = audio\n";
  const CliConfig c = load_config(dir / "run.ini");
  EXPECT_EQ(c.dataset_csv, dir / "meta.csv");
  EXPECT_EQ(c.audio_dir, dir / "audio");
  EXPECT_EQ(c.features_dir, dir / "features");
  try {
    load_config(dir / "missing.ini");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::MissingFile);
  }
}
