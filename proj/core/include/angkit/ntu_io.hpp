#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "angkit/feature_tensor.hpp"
#include "angkit/topology.hpp"

namespace angkit {

struct RawBody {
  std::uint64_t tracking_id = 0;
  std::vector<Vec3> joints;
};

struct RawFrame {
  std::vector<RawBody> bodies;
};

/// Skeleton capture file contents, one entry per declared frame.
struct RawSequence {
  std::vector<RawFrame> frames;
};

/// Parses the skeleton capture text layout:
///
///   <frame count>
///   per frame: <body count>
///     per body: <10 header values, tracking id first>
///               <joint count>
///               <joint count lines, x y z first, extra columns ignored>
///
/// Throws ParseError with the offending line on any malformed input.
RawSequence parse_skeleton_file(std::string_view text, const SkeletonTopology& topo);

struct NormalizeOptions {
  std::size_t target_frames = 300;
  std::size_t max_persons = 2;
};

/// Keeps up to max_persons bodies per frame (ascending tracking id), zero-fills
/// missing bodies, translates everything so person 0's pelvis in the first
/// frame sits at the origin, and pads to target_frames by repeating the valid
/// frames cyclically. Longer sequences are truncated to target_frames.
Clip normalize_clip(const RawSequence& raw, const SkeletonTopology& topo, const NormalizeOptions& opts = {});

/// Inverse view of a clip as a raw sequence: one body per non-empty person slot,
/// tracking ids equal to the slot index. Only the valid frames are emitted.
RawSequence clip_to_raw(const Clip& clip);

/// Emits a capture text file for a raw sequence (auxiliary columns written as 0).
std::string format_skeleton_file(const RawSequence& raw);

/// ANGK1 binary tensor format. Values are stored as 32-bit floats.
std::size_t write_tensor(const FeatureTensor& t, std::ostream& sink);
FeatureTensor read_tensor(std::istream& source);
void save_tensor(const FeatureTensor& t, const std::string& path);
FeatureTensor load_tensor(const std::string& path);

/// Dataset manifest: one line per clip, tab separated `file label valid_frames`.
struct ManifestEntry {
  std::string file;
  int label = -1;
  std::size_t valid_frames = 1;
};

std::string format_manifest(const std::vector<ManifestEntry>& entries);
std::vector<ManifestEntry> parse_manifest(const std::string& text);

/// Action label from an NTU-style file name (`...A017...` -> 16), or -1.
int label_from_filename(std::string_view name);

}  // namespace angkit
