#include <algorithm>
#include <fstream>
#include <limits>
#include <sstream>

#include "angkit/binary_io.hpp"
#include "angkit/errors.hpp"
#include "angkit/ini_config.hpp"
#include "angkit/ntu_io.hpp"

namespace angkit {

namespace {

constexpr char kMagic[6] = {'A', 'N', 'G', 'K', '1', '\0'};
constexpr std::uint64_t kMaxElements = std::uint64_t{1} << 31;
constexpr std::uint32_t kMaxNameBlock = 1u << 24;

}  // namespace

std::size_t write_tensor(const FeatureTensor& t, std::ostream& sink) {
  const auto& s = t.shape();
  for (auto d : {s.channels, s.frames, s.joints, s.persons}) {
    if (d == 0 || d > std::numeric_limits<std::uint32_t>::max())
      throw FormatError("tensor dimension " + std::to_string(d) + " cannot be stored");
  }
  std::string names;
  for (std::size_t c = 0; c < t.channel_names().size(); ++c) {
    const auto& n = t.channel_names()[c];
    if (n.find('\n') != std::string::npos) throw FormatError("channel name contains a newline");
    if (c) names += '\n';
    names += n;
  }

  sink.write(kMagic, sizeof kMagic);
  binio::put_u32(sink, static_cast<std::uint32_t>(s.channels));
  binio::put_u32(sink, static_cast<std::uint32_t>(s.frames));
  binio::put_u32(sink, static_cast<std::uint32_t>(s.joints));
  binio::put_u32(sink, static_cast<std::uint32_t>(s.persons));
  binio::put_u32(sink, static_cast<std::uint32_t>(names.size()));
  sink.write(names.data(), static_cast<std::streamsize>(names.size()));
  for (double v : t.data()) binio::put_f32(sink, static_cast<float>(v));
  if (!sink) throw FormatError("failed writing tensor");
  return sizeof kMagic + 5 * 4 + names.size() + 4 * t.data().size();
}

FeatureTensor read_tensor(std::istream& source) {
  char magic[sizeof kMagic];
  binio::read_exact(source, magic, sizeof magic, "tensor magic");
  if (!std::equal(magic, magic + sizeof magic, kMagic)) throw FormatError("magic mismatch: not an ANGK1 tensor");

  Shape4 s;
  s.channels = binio::get_u32(source, "tensor header");
  s.frames = binio::get_u32(source, "tensor header");
  s.joints = binio::get_u32(source, "tensor header");
  s.persons = binio::get_u32(source, "tensor header");
  if (s.channels == 0 || s.frames == 0 || s.joints == 0 || s.persons == 0)
    throw FormatError("tensor header has a zero dimension");
  const std::uint64_t count = std::uint64_t{s.channels} * s.frames * s.joints * s.persons;
  if (count > kMaxElements) throw FormatError("tensor header declares too many elements");

  const auto name_len = binio::get_u32(source, "channel-name block length");
  if (name_len > kMaxNameBlock) throw FormatError("channel-name block too large");
  std::string names(name_len, '\0');
  binio::read_exact(source, names.data(), name_len, "channel-name block");
  auto channel_names = split_on(names, '\n');
  if (channel_names.size() != s.channels)
    throw FormatError("header declares " + std::to_string(s.channels) + " channels but names " +
                      std::to_string(channel_names.size()));

  // Chunked so a lying header cannot force a huge allocation up front.
  std::vector<double> data;
  constexpr std::uint64_t kChunk = 1 << 16;
  std::vector<char> buf;
  for (std::uint64_t done = 0; done < count;) {
    const auto n = std::min(kChunk, count - done);
    buf.resize(n * 4);
    binio::read_exact(source, buf.data(), buf.size(), "tensor payload");
    for (std::uint64_t i = 0; i < n; ++i) {
      float f;
      std::memcpy(&f, buf.data() + 4 * i, 4);
      data.push_back(f);
    }
    done += n;
  }
  return FeatureTensor(s, std::move(channel_names), std::move(data));
}

void save_tensor(const FeatureTensor& t, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write '" + path + "'");
  write_tensor(t, out);
}

FeatureTensor load_tensor(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path + "'");
  auto t = read_tensor(in);
  if (in.peek() != std::char_traits<char>::eof()) throw FormatError("'" + path + "' has trailing bytes");
  return t;
}

std::string format_manifest(const std::vector<ManifestEntry>& entries) {
  std::string out = "# file\tlabel\tvalid_frames\n";
  for (const auto& e : entries)
    out += e.file + '\t' + std::to_string(e.label) + '\t' + std::to_string(e.valid_frames) + '\n';
  return out;
}

std::vector<ManifestEntry> parse_manifest(const std::string& text) {
  std::vector<ManifestEntry> out;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto fields = split_on(line, '\t');
    if (fields.size() != 3) throw FormatError("manifest line " + std::to_string(line_no) + " needs 3 fields");
    ManifestEntry e;
    e.file = fields[0];
    try {
      e.label = parse_int(fields[1], "label");
      const auto vf = parse_int64(fields[2], "valid_frames");
      if (vf < 1) throw ConfigError("valid_frames must be positive");
      e.valid_frames = static_cast<std::size_t>(vf);
    } catch (const ConfigError& err) {
      throw FormatError("manifest line " + std::to_string(line_no) + ": " + err.what());
    }
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace angkit
