// Copyright 2026 The Avatar Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "avatar/image_io.hpp"
#include "avatar/network.hpp"
#include "avatar/weights.hpp"
#include "cli.hpp"

namespace avatar {
namespace {

namespace fs = std::filesystem;

class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = fs::temp_directory_path() / "avatar_cli_test";
    fs::remove_all(dir_);
    fs::create_directories(dir_ / "frames");
    save_weights(make_random_weights({.seed = 1, .width_divisor = 16}), dir_ / "w.avtw");
    Image img(40, 48, 3);
    for (int y = 0; y < 40; ++y)
      for (int x = 0; x < 48; ++x)
        for (int c = 0; c < 3; ++c) img.at(y, x, c) = static_cast<float>((x * 5 + y * 3 + c * 70) % 256) / 255.0f;
    write_png(dir_ / "content.png", img);
    write_png(dir_ / "frames" / "f000.png", img);
    write_png(dir_ / "frames" / "f001.png", img);
    Image style(30, 30, 3);
    for (int y = 0; y < 30; ++y)
      for (int x = 0; x < 30; ++x)
        for (int c = 0; c < 3; ++c) style.at(y, x, c) = static_cast<float>(((x ^ y) * 9 + c * 40) % 256) / 255.0f;
    write_png(dir_ / "style.png", style);
  }
  static void TearDownTestSuite() { fs::remove_all(dir_); }

  int run(std::vector<std::string> args) {
    args.insert(args.begin(), "avatar");
    out_.str("");
    err_.str("");
    return cli::run(args, out_, err_);
  }
  static std::string p(const char* name) { return (dir_ / name).string(); }

  static fs::path dir_;
  std::ostringstream out_, err_;
};

fs::path CliTest::dir_;

TEST_F(CliTest, StylizeHappyPath) {
  EXPECT_EQ(run({"--threads", "2", "stylize", "--content", p("content.png"), "--style",
                 p("style.png"), "--weights", p("w.avtw"), "--out", p("out.png"),
                 "--patch-size", "3", "--transform", "adain"}),
            cli::kOk)
      << err_.str();
  const Image out = read_png(p("out.png"));
  EXPECT_EQ(out.extent(), (Extent{40, 48}));
  EXPECT_NE(err_.str().find("[avatar]"), std::string::npos);
}

TEST_F(CliTest, MultiStyleWithNormalizedWeights) {
  const std::string s = p("style.png");
  EXPECT_EQ(run({"stylize", "--content", p("content.png"), "--style", s + ":2", "--style",
                 s + ":2", "--normalize-weights", "--weights", p("w.avtw"), "--out",
                 p("multi.png"), "--patch-size", "3"}),
            cli::kOk)
      << err_.str();
}

TEST_F(CliTest, UnnormalizedWeightsAreRejected) {
  const std::string s = p("style.png");
  EXPECT_EQ(run({"stylize", "--content", p("content.png"), "--style", s + ":0.3", "--style",
                 s + ":0.3", "--weights", p("w.avtw"), "--out", p("bad.png")}),
            cli::kValidation);
  EXPECT_NE(err_.str().find("sum to 1"), std::string::npos);
}

TEST_F(CliTest, AlphaOutOfRangeNamesTheFlag) {
  EXPECT_EQ(run({"stylize", "--content", p("content.png"), "--style", p("style.png"),
                 "--weights", p("w.avtw"), "--out", p("x.png"), "--alpha", "1.5"}),
            cli::kValidation);
  EXPECT_NE(err_.str().find("--alpha"), std::string::npos) << err_.str();
}

TEST_F(CliTest, EvenPatchSizeIsRejected) {
  EXPECT_EQ(run({"stylize", "--content", p("content.png"), "--style", p("style.png"),
                 "--weights", p("w.avtw"), "--out", p("x.png"), "--patch-size", "4"}),
            cli::kValidation);
}

TEST_F(CliTest, MissingFilesMapToIoExit) {
  EXPECT_EQ(run({"stylize", "--content", p("nope.png"), "--style", p("style.png"),
                 "--weights", p("w.avtw"), "--out", p("x.png")}),
            cli::kIo);
  EXPECT_EQ(run({"inspect-weights", p("content.png")}), cli::kIo);
}

TEST_F(CliTest, Video) {
  EXPECT_EQ(run({"video", "--frames-dir", p("frames"), "--style", p("style.png"), "--weights",
                 p("w.avtw"), "--out", p("vout"), "--patch-size", "3"}),
            cli::kOk)
      << err_.str();
  EXPECT_TRUE(fs::exists(dir_ / "vout" / "f001.png"));
  EXPECT_EQ(read_png(dir_ / "vout" / "f000.png"), read_png(dir_ / "vout" / "f001.png"));
}

TEST_F(CliTest, InspectWeights) {
  EXPECT_EQ(run({"inspect-weights", p("w.avtw")}), cli::kOk);
  EXPECT_NE(out_.str().find("enc.conv1_1.weight"), std::string::npos);
  EXPECT_NE(out_.str().find("[3, 3, 3, 4]"), std::string::npos);
  EXPECT_NE(out_.str().find("tensors"), std::string::npos);
}

TEST_F(CliTest, Selftest) {
  EXPECT_EQ(run({"selftest", "--seed", "7"}), cli::kOk) << out_.str();
  EXPECT_NE(out_.str().find("selftest passed"), std::string::npos);
}

TEST_F(CliTest, NoSubcommand) { EXPECT_EQ(run({}), cli::kValidation); }

}  // namespace
}  // namespace avatar
