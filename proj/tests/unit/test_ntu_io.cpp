#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "angkit/errors.hpp"
#include "angkit/ini_config.hpp"
#include "angkit/ntu_io.hpp"
#include "angkit/topology.hpp"
#include "test_util.hpp"

namespace angkit {
namespace {

const std::string kData = ANGKIT_TEST_DATA_DIR;

std::string origin_file(int frames, int bodies_in_first) {
  std::ostringstream s;
  s << frames << '\n';
  for (int f = 0; f < frames; ++f) {
    const int bodies = f == 0 ? bodies_in_first : 1;
    s << bodies << '\n';
    for (int b = 0; b < bodies; ++b) {
      s << "1 0 0 0 0 0 0 0 0 0\n25\n";
      for (int j = 0; j < 25; ++j) s << "0 0 0 0 0 0 0 0 0 0 0 0\n";
    }
  }
  return s.str();
}

TEST(ParseSkeleton, OneFrameAtOrigin) {
  const auto raw = parse_skeleton_file(origin_file(1, 1), kinect25());
  ASSERT_EQ(raw.frames.size(), 1u);
  ASSERT_EQ(raw.frames[0].bodies.size(), 1u);
  for (const auto& p : raw.frames[0].bodies[0].joints) EXPECT_EQ(p, (Vec3{0, 0, 0}));
}

TEST(ParseSkeleton, EmptyFirstFrameIsAllowed) {
  const auto raw = parse_skeleton_file(origin_file(2, 0), kinect25());
  ASSERT_EQ(raw.frames.size(), 2u);
  EXPECT_TRUE(raw.frames[0].bodies.empty());
  EXPECT_EQ(raw.frames[1].bodies.size(), 1u);
}

TEST(ParseSkeleton, FixtureMatchesIndependentEmitter) {
  // The fixture was written with x = base_x + shift + 0.01 f, y = base_y + 0.1 + 0.002 f (j mod 3), z = base_z + 3.1.
  const auto raw = parse_skeleton_file(read_text_file(kData + "/S001C001P001R001A008.skeleton"), kinect25());
  ASSERT_EQ(raw.frames.size(), 4u);
  const auto& body = raw.frames[2].bodies.at(0);
  EXPECT_EQ(body.tracking_id, 72057594037931101ull);
  EXPECT_DOUBLE_EQ(body.joints[0].x, 0.02);
  EXPECT_DOUBLE_EQ(body.joints[0].y, 0.1);
  EXPECT_DOUBLE_EQ(body.joints[0].z, 3.1);
  EXPECT_DOUBLE_EQ(body.joints[5].x, -0.16);  // elbow_left: -0.18 + 0.02
  EXPECT_DOUBLE_EQ(body.joints[5].y, 0.328);  // 0.22 + 0.1 + 0.002*2*2
}

TEST(ParseSkeleton, FormatParseRoundTrip) {
  std::mt19937_64 rng(3);
  auto clip = testing::random_clip(rng, 3, 25, 2);
  const auto raw = clip_to_raw(clip);
  const auto again = parse_skeleton_file(format_skeleton_file(raw), kinect25());
  ASSERT_EQ(again.frames.size(), raw.frames.size());
  for (std::size_t f = 0; f < raw.frames.size(); ++f) {
    ASSERT_EQ(again.frames[f].bodies.size(), raw.frames[f].bodies.size());
    for (std::size_t b = 0; b < raw.frames[f].bodies.size(); ++b)
      EXPECT_EQ(again.frames[f].bodies[b].joints, raw.frames[f].bodies[b].joints);
  }
}

void expect_parse_error_at(const std::string& text, std::size_t line) {
  try {
    parse_skeleton_file(text, kinect25());
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), line) << e.what();
  }
}

TEST(ParseSkeleton, ErrorsCarryLineNumbers) {
  expect_parse_error_at("", 1);
  expect_parse_error_at("x\n", 1);
  expect_parse_error_at("0\n", 1);
  expect_parse_error_at("1\n1\n1 0 0 0 0 0 0 0 0 0\n24\n", 4);  // joint count mismatch
  expect_parse_error_at("1\n1\n1 0 0 0 0\n", 3);                // short header
  auto text = origin_file(1, 1);
  text.replace(text.find("25\n0 0 0") + 3, 1, "q");
  expect_parse_error_at(text, 5);
  expect_parse_error_at(origin_file(1, 1) + "7\n", 30);  // trailing data after 4 header lines and 25 joints
  auto short_file = origin_file(2, 1);
  short_file.resize(short_file.size() / 2);
  EXPECT_THROW(parse_skeleton_file(short_file, kinect25()), ParseError);
}

TEST(ParseSkeleton, FuzzedBytesOnlyRaiseStructuredErrors) {
  std::mt19937_64 rng(11);
  const auto seed_text = read_text_file(kData + "/S002C002P003R002A026.skeleton");
  std::uniform_int_distribution<int> byte(0, 255);
  for (int i = 0; i < 2000; ++i) {
    std::string text;
    if (i % 2 == 0) {
      text.resize(rng() % 200);
      for (auto& c : text) c = static_cast<char>(byte(rng));
    } else {
      text = seed_text.substr(0, rng() % seed_text.size());
      for (int k = 0; k < 4 && !text.empty(); ++k) text[rng() % text.size()] = static_cast<char>(byte(rng));
    }
    try {
      parse_skeleton_file(text, kinect25());
    } catch (const Error&) {
    }
  }
}

RawSequence raw_with_pelvis(std::vector<Vec3> pelvis_per_frame) {
  RawSequence raw;
  for (const auto& p : pelvis_per_frame) {
    RawBody b;
    b.tracking_id = 7;
    b.joints.assign(25, p + Vec3{0.5, 0.5, 0.5});
    b.joints[0] = p;
    raw.frames.push_back({{b}});
  }
  return raw;
}

TEST(Normalize, SingleFrameIsRepeated) {
  const auto clip = normalize_clip(raw_with_pelvis({{1, 2, 3}}), kinect25(), {4, 2});
  EXPECT_EQ(clip.frames(), 4u);
  EXPECT_EQ(clip.valid_frames, 1u);
  for (std::size_t t = 1; t < 4; ++t)
    for (std::size_t v = 0; v < 25; ++v) EXPECT_EQ(clip.at(t, v, 0), clip.at(0, v, 0));
}

TEST(Normalize, TranslatesFirstPelvisToOrigin) {
  const auto clip = normalize_clip(raw_with_pelvis({{1, 2, 3}, {2, 2, 3}}), kinect25(), {2, 1});
  EXPECT_EQ(clip.at(0, 0, 0), (Vec3{0, 0, 0}));
  EXPECT_EQ(clip.at(0, 4, 0), (Vec3{0.5, 0.5, 0.5}));
  EXPECT_EQ(clip.at(1, 0, 0), (Vec3{1, 0, 0}));  // global motion kept
}

TEST(Normalize, CyclicPaddingOrder) {
  const auto clip = normalize_clip(raw_with_pelvis({{0, 0, 0}, {1, 0, 0}, {2, 0, 0}}), kinect25(), {7, 1});
  const std::vector<double> expected = {0, 1, 2, 0, 1, 2, 0};
  for (std::size_t t = 0; t < 7; ++t) EXPECT_EQ(clip.at(t, 0, 0).x, expected[t]);
  EXPECT_EQ(clip.valid_frames, 3u);
}

TEST(Normalize, KeepsLowestTrackingIdsAndZeroFillsAbsent) {
  RawSequence raw;
  RawFrame f;
  for (std::uint64_t id : {30u, 10u, 20u}) {
    RawBody b;
    b.tracking_id = id;
    b.joints.assign(25, Vec3{static_cast<double>(id), 0, 0});
    f.bodies.push_back(b);
  }
  raw.frames.push_back(f);
  RawFrame lone;
  lone.bodies.push_back(f.bodies[1]);
  raw.frames.push_back(lone);
  const auto clip = normalize_clip(raw, kinect25(), {2, 2});
  EXPECT_EQ(clip.at(0, 3, 0).x, 0.0);   // id 10, the origin
  EXPECT_EQ(clip.at(0, 3, 1).x, 10.0);  // id 20 shifted by -10
  EXPECT_EQ(clip.at(1, 3, 1), (Vec3{0, 0, 0}));
}

TEST(Normalize, IdempotentOnNormalizedClips) {
  const auto once = normalize_clip(raw_with_pelvis({{1, 2, 3}, {2, 1, 3}, {0, 0, 1}}), kinect25(), {3, 1});
  const auto twice = normalize_clip(clip_to_raw(once), kinect25(), {3, 1});
  EXPECT_EQ(twice.coords().size(), once.coords().size());
  for (std::size_t i = 0; i < once.coords().size(); ++i) EXPECT_EQ(twice.coords()[i], once.coords()[i]);
}

TEST(Normalize, ZeroFramesIsAnError) { EXPECT_THROW(normalize_clip(RawSequence{}, kinect25(), {4, 1}), Error); }

std::string write_bytes(const FeatureTensor& t) {
  std::ostringstream out;
  const auto n = write_tensor(t, out);
  EXPECT_EQ(n, out.str().size());
  return out.str();
}

TEST(TensorFormat, SingletonRoundTrip) {
  FeatureTensor t({1, 1, 1, 1}, {"x"}, {0.5});
  std::istringstream in(write_bytes(t));
  EXPECT_EQ(read_tensor(in), t);
}

TEST(TensorFormat, HeaderLayout) {
  const auto bytes = write_bytes(FeatureTensor({2, 1, 1, 1}, {"ab", "c"}, {1.0, -2.0}));
  EXPECT_EQ(bytes.substr(0, 6), std::string("ANGK1\0", 6));
  EXPECT_EQ(static_cast<unsigned char>(bytes[6]), 2);
  EXPECT_EQ(static_cast<unsigned char>(bytes[22]), 4);  // name block "ab\nc"
  EXPECT_EQ(bytes.substr(26, 4), "ab\nc");
  EXPECT_EQ(bytes.size(), 6u + 20 + 4 + 8);
}

TEST(TensorFormat, RandomTensorsAreByteStable) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::size_t> dim(1, 5);
  std::uniform_real_distribution<double> val(-10, 10);
  for (int i = 0; i < 100; ++i) {
    Shape4 s{dim(rng), dim(rng), dim(rng), dim(rng)};
    std::vector<std::string> names;
    for (std::size_t c = 0; c < s.channels; ++c) names.push_back("ch" + std::to_string(c));
    std::vector<double> data(s.size());
    for (auto& d : data) d = static_cast<float>(val(rng));
    const FeatureTensor t(s, names, data);
    const auto bytes = write_bytes(t);
    std::istringstream in(bytes);
    const auto back = read_tensor(in);
    EXPECT_EQ(back, t);
    EXPECT_EQ(write_bytes(back), bytes);
  }
}

TEST(TensorFormat, CorruptionIsDetected) {
  const auto good = write_bytes(FeatureTensor({1, 2, 1, 1}, {"x"}, {1, 2}));
  auto bad = good;
  bad[0] = 'X';
  std::istringstream a(bad);
  EXPECT_THROW(read_tensor(a), FormatError);
  std::istringstream b(good.substr(0, good.size() - 1));
  EXPECT_THROW(read_tensor(b), FormatError);
  auto zero = good;
  zero[10] = 0;  // T = 0
  std::istringstream c(zero);
  EXPECT_THROW(read_tensor(c), FormatError);
  EXPECT_THROW(write_bytes(FeatureTensor({1, 1, 1, 1}, {"a\nb"}, {0})), FormatError);
}

TEST(Manifest, RoundTripAndLabels) {
  const std::vector<ManifestEntry> entries = {{"a.angk", 3, 10}, {"b.angk", -1, 1}};
  EXPECT_EQ(parse_manifest(format_manifest(entries)).size(), 2u);
  EXPECT_EQ(parse_manifest(format_manifest(entries))[0].valid_frames, 10u);
  EXPECT_EQ(label_from_filename("S001C001P001R001A017"), 16);
  EXPECT_EQ(label_from_filename("clip"), -1);
}

}  // namespace
}  // namespace angkit
