#include <gtest/gtest.h>

#include <sstream>

#include "sonoforge/error.hpp"
#include "sonoforge/report.hpp"
#include "test_support.hpp"

using namespace sonoforge;

namespace {

RunReport sample_report(FeatureKind kind, std::size_t epochs, double final_val_acc) {
  RunReport r;
  r.config.feature_kind = kind;
  r.config.seed = 12345;
  r.train_size = 1600;
  r.val_size = 400;
  for (std::size_t i = 0; i < epochs; ++i) {
    EpochRecord e;
    e.train_loss = 3.0 / static_cast<double>(i + 1);
    e.train_acc = 0.1 + 0.01 * static_cast<double>(i);
    e.val_loss = 2.0 + 1.0 / 3.0;
    e.val_acc = final_val_acc;
    e.lr = i < 5 ? 1e-3 : 5e-4;
    r.epochs.push_back(e);
  }
  r.stopped_early = true;
  return r;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::vector<std::string> fields(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  for (std::string f; in >> f;) out.push_back(f);
  return out;
}

}  // namespace

TEST(RunReport, RoundTripIsExact) {
  auto r = sample_report(FeatureKind::Mfcc, 9, 0.4375);
  r.config.stop_at_train_acc = 0.95;
  r.config.stratified = true;
  const std::string text = format_run_report(r);
  const RunReport back = parse_run_report(text);
  EXPECT_EQ(back.epochs, r.epochs);
  EXPECT_EQ(back.config.feature_kind, FeatureKind::Mfcc);
  EXPECT_EQ(back.config.seed, 12345u);
  EXPECT_EQ(back.config.stop_at_train_acc, 0.95);
  EXPECT_TRUE(back.config.stratified);
  EXPECT_EQ(back.train_size, 1600u);
  EXPECT_TRUE(back.stopped_early);
  EXPECT_EQ(format_run_report(back), text);
}

TEST(RunReport, FullRangeSeed) {
  auto r = sample_report(FeatureKind::Mel, 1, 0.1);
  r.config.seed = 18446744073709551615ull;
  EXPECT_EQ(parse_run_report(format_run_report(r)).config.seed, r.config.seed);
}

TEST(RunReport, RejectsDamagedDocuments) {
  const std::string text = format_run_report(sample_report(FeatureKind::Mel, 3, 0.5));
  EXPECT_THROW(parse_run_report("hello\n"), Error);
  EXPECT_THROW(parse_run_report(text.substr(0, text.find("[summary]"))), Error);
  std::string wrong_count = text;
  wrong_count.replace(wrong_count.find("epochs = 3"), 10, "epochs = 4");
  EXPECT_THROW(parse_run_report(wrong_count), Error);
}

TEST(ComparisonTable, FullCorpusMelRow) {
  RunReport r;
  r.config.feature_kind = FeatureKind::Mel;
  for (int i = 0; i < 28; ++i) r.epochs.push_back({});
  r.epochs.back() = {0.22, 0.9406, 2.07, 0.5750, 1e-4};
  const std::string table = format_comparison_table({comparison_row(r)});
  const auto ls = lines(table);
  ASSERT_EQ(ls.size(), 2u);
  EXPECT_EQ(fields(ls[0]), (std::vector<std::string>{"Feature", "Train", "acc", "[%]", "Val", "acc", "[%]", "Train",
                                                      "loss", "Val", "loss", "Epochs"}));
  EXPECT_EQ(fields(ls[1]), (std::vector<std::string>{"Mel-scaled", "spectrograms", "94.06", "57.50", "0.22", "2.07", "28"}));
}

TEST(ComparisonTable, SingleRunGivesHeaderPlusOneRow) {
  const auto table = format_comparison_table({comparison_row(sample_report(FeatureKind::Tempogram, 4, 0.2))});
  const auto ls = lines(table);
  ASSERT_EQ(ls.size(), 2u);
  EXPECT_EQ(ls[1].rfind("Cyclic tempograms", 0), 0u);
}

TEST(ComparisonTable, SortedByValidationAccuracyDescending) {
  std::vector<ComparisonRow> rows{comparison_row(sample_report(FeatureKind::ChromaCens, 21, 0.115)),
                                  comparison_row(sample_report(FeatureKind::Mel, 28, 0.575)),
                                  comparison_row(sample_report(FeatureKind::ChromaStft, 25, 0.2825))};
  const auto ls = lines(format_comparison_table(rows));
  ASSERT_EQ(ls.size(), 4u);
  EXPECT_EQ(ls[1].rfind("Mel-scaled spectrograms", 0), 0u);
  EXPECT_EQ(ls[2].rfind("STFT chromagrams", 0), 0u);
  EXPECT_EQ(ls[3].rfind("CENS chromagrams", 0), 0u);
}
