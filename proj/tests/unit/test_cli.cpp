#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "angkit/binary_io.hpp"
#include "angkit/checkpoint.hpp"
#include "angkit/ini_config.hpp"
#include "angkit/ntu_io.hpp"
#include "cli.hpp"

namespace angkit::cli {
namespace {

namespace fs = std::filesystem;

const fs::path kData = ANGKIT_TEST_DATA_DIR;

struct Result {
  int code = 0;
  std::string out, err;
};

Result invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("angkit_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    config_ = (dir_ / "small.ini").string();
    write_text_file(config_,
                    "[run]\nframes = 6\n[train]\nepochs = 2\nbase_lr = 0.005\ndecay_epochs = 1\nbatch_size = 3\n"
                    "[model]\nnum_scales = 1\nchannels = 6 6 6\n[synth]\nn_per_class = 3\n");
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
  std::string config_;
};

TEST_F(CliTest, ParseFixturesReportsPartialFailure) {
  const auto r = invoke({"parse", (kData / "S001C001P001R001A008.skeleton").string(),
                         (kData / "S002C002P003R002A026.skeleton").string(),
                         (kData / "S001C001P001R001A009_corrupt.skeleton").string(), "--out", path("parsed"),
                         "--frames", "8"});
  EXPECT_EQ(r.code, static_cast<int>(ExitCode::kDataError));
  EXPECT_NE(r.err.find("_corrupt.skeleton: line"), std::string::npos) << r.err;
  EXPECT_NE(r.out.find("parsed 2 of 3"), std::string::npos) << r.out;
  const auto entries = parse_manifest(read_text_file(path("parsed/manifest.tsv")));
  ASSERT_EQ(entries.size(), 2u);
  EXPECT_EQ(entries[0].label, 7);
  EXPECT_EQ(entries[1].label, 25);
  const auto t = load_tensor(path("parsed/" + entries[1].file));
  EXPECT_EQ(t.shape().channels, 3u);
  EXPECT_EQ(t.shape().frames, 8u);
  EXPECT_EQ(t.shape().persons, 2u);
}

TEST_F(CliTest, ParseOfGoodFilesSucceeds) {
  const auto r = invoke({"parse", (kData / "S001C001P001R001A008.skeleton").string(), "--out", path("ok")});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(path("ok/resolved_config.ini")));
}

TEST_F(CliTest, EncodeChannelCounts) {
  ASSERT_EQ(invoke({"synth", "--config", config_, "--out", path("clips")}).code, 0);
  const auto joint = invoke({"encode", path("clips"), "--features", "joint", "--out", path("j")});
  EXPECT_EQ(joint.code, 0) << joint.err;
  EXPECT_NE(joint.out.find("C=3"), std::string::npos);
  const auto all = invoke({"encode", path("clips"), "--features", "joint,bone,angular", "--out", path("all")});
  EXPECT_EQ(all.code, 0) << all.err;
  EXPECT_NE(all.out.find("C=15"), std::string::npos);
  const auto t = load_tensor(path("all/synth_00000.angk"));
  EXPECT_EQ(t.shape().channels, 15u);
  EXPECT_EQ(t.channel_names()[6], "ang_local");
}

TEST_F(CliTest, VelocityOfAStillClipIsZero) {
  Clip still(5, 25, 1);
  for (std::size_t t = 0; t < 5; ++t)
    for (std::size_t v = 0; v < 25; ++v) still.at(t, v, 0) = {0.1 * static_cast<double>(v), 1.0, 2.0};
  still.valid_frames = 5;
  still.label = 0;
  fs::create_directories(path("still"));
  save_tensor(clip_to_tensor(still), path("still/a.angk"));
  write_text_file(path("still/manifest.tsv"), format_manifest({{"a.angk", 0, 5}}));
  const auto r = invoke({"encode", path("still"), "--features", "joint,bone,angular", "--stream", "velocity",
                         "--out", path("vel")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto vel = load_tensor(path("vel/a.angk"));
  EXPECT_EQ(vel.shape().channels, 15u);
  for (double v : vel.data()) EXPECT_EQ(v, 0.0);
}

TEST_F(CliTest, SynthIsDeterministicInSeed) {
  ASSERT_EQ(invoke({"synth", "--config", config_, "--seed", "4", "--out", path("a")}).code, 0);
  ASSERT_EQ(invoke({"synth", "--config", config_, "--seed", "4", "--out", path("b")}).code, 0);
  ASSERT_EQ(invoke({"synth", "--config", config_, "--seed", "5", "--out", path("c")}).code, 0);
  EXPECT_EQ(read_text_file(path("a/synth_00003.angk")), read_text_file(path("b/synth_00003.angk")));
  EXPECT_NE(read_text_file(path("a/synth_00003.angk")), read_text_file(path("c/synth_00003.angk")));
  EXPECT_EQ(parse_manifest(read_text_file(path("a/manifest.tsv"))).size(), 6u);
}

TEST_F(CliTest, TrainEvalAndResume) {
  ASSERT_EQ(invoke({"synth", "--config", config_, "--out", path("clips")}).code, 0);
  const auto trained =
      invoke({"train", path("clips"), "--config", config_, "--features", "angular", "--out", path("run")});
  ASSERT_EQ(trained.code, 0) << trained.err;
  EXPECT_EQ(split_on(read_text_file(path("run/metrics.txt")), '\n').size(), 3u);  // two lines plus the trailing empty
  const auto ckpt = load_checkpoint(path("run/model.angm"));
  EXPECT_EQ(ckpt.meta.epochs_done, 2u);
  EXPECT_EQ(ckpt.meta.features, "angular");

  const auto eval = invoke({"eval", path("clips"), "--model", path("run/model.angm"), "--model",
                            path("run/model.angm"), "--out", path("eval")});
  ASSERT_EQ(eval.code, 0) << eval.err;
  EXPECT_NE(eval.out.find("models=2"), std::string::npos);
  EXPECT_TRUE(fs::exists(path("eval/confusion.txt")));

  const auto resumed = invoke({"train", path("clips"), "--config", config_, "--features", "angular", "--epochs", "3",
                               "--resume", path("run/model.angm"), "--out", path("run")});
  ASSERT_EQ(resumed.code, 0) << resumed.err;
  EXPECT_EQ(load_checkpoint(path("run/model.angm")).meta.epochs_done, 3u);
  EXPECT_EQ(split_on(read_text_file(path("run/metrics.txt")), '\n').size(), 4u);

  const auto mismatch = invoke({"train", path("clips"), "--config", config_, "--features", "joint", "--epochs", "4",
                                "--resume", path("run/model.angm"), "--out", path("run2")});
  EXPECT_EQ(mismatch.code, static_cast<int>(ExitCode::kUsage));
}

TEST_F(CliTest, EchoedConfigReproducesTheRun) {
  ASSERT_EQ(invoke({"synth", "--config", config_, "--seed", "9", "--out", path("first")}).code, 0);
  const auto echoed = path("first/resolved_config.ini");
  ASSERT_EQ(invoke({"synth", "--config", echoed, "--out", path("second")}).code, 0);
  EXPECT_EQ(read_text_file(path("first/manifest.tsv")), read_text_file(path("second/manifest.tsv")));
  EXPECT_EQ(read_text_file(path("first/synth_00005.angk")), read_text_file(path("second/synth_00005.angk")));
  EXPECT_EQ(read_text_file(echoed), read_text_file(path("second/resolved_config.ini")));
}

TEST_F(CliTest, GradcheckPasses) {
  const auto r = invoke({"gradcheck", "--seed", "1"});
  EXPECT_EQ(r.code, 0) << r.out << r.err;
  EXPECT_NE(r.out.find("checks passed"), std::string::npos);
}

TEST_F(CliTest, UsageAndConfigErrors) {
  EXPECT_EQ(invoke({"bogus"}).code, static_cast<int>(ExitCode::kUsage));
  EXPECT_EQ(invoke({}).code, static_cast<int>(ExitCode::kUsage));
  EXPECT_EQ(invoke({"parse", "--out", path("x")}).code, static_cast<int>(ExitCode::kUsage));
  EXPECT_EQ(invoke({"synth"}).code, static_cast<int>(ExitCode::kUsage));
  const auto feat = invoke({"synth", "--features", "joint,elbow", "--out", path("y")});
  EXPECT_EQ(feat.code, static_cast<int>(ExitCode::kUsage));
  EXPECT_NE(feat.err.find("elbow"), std::string::npos);
  write_text_file(path("bad.ini"), "[train]\nlearning_rate = 1\n");
  const auto bad = invoke({"synth", "--config", path("bad.ini"), "--out", path("z")});
  EXPECT_EQ(bad.code, static_cast<int>(ExitCode::kUsage));
  EXPECT_NE(bad.err.find("learning_rate"), std::string::npos);
  EXPECT_EQ(invoke({"eval", path("nowhere"), "--out", path("e")}).code, static_cast<int>(ExitCode::kUsage));
  EXPECT_EQ(invoke({"encode", path("nowhere"), "--out", path("e")}).code, static_cast<int>(ExitCode::kDataError));
  EXPECT_EQ(invoke({"--help"}).code, 0);
}

TEST(RunConfig, IniRoundTrip) {
  RunConfig c;
  c.seed = 18446744073709551615ull;
  c.features = "bone";
  c.train.decay_epochs = {5, 9};
  c.model.channels = {12, 24, 36};
  c.synth.noise_sigma = 0.125;
  RunConfig back;
  apply_ini(back, IniDocument::parse(to_ini(c).format()));
  EXPECT_EQ(back.seed, c.seed);
  EXPECT_EQ(back.features, "bone");
  EXPECT_EQ(back.train.decay_epochs, c.train.decay_epochs);
  EXPECT_EQ(back.model, c.model);
  EXPECT_EQ(back.synth.noise_sigma, 0.125);
  EXPECT_EQ(to_ini(back).format(), to_ini(c).format());
}

}  // namespace
}  // namespace angkit::cli
