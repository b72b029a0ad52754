#include <charconv>
#include <cmath>
#include <cstdint>

#include "angkit/errors.hpp"
#include "angkit/ntu_io.hpp"

namespace angkit {

namespace {

// Walks the text one non-blank line at a time, tracking 1-based line numbers.
class LineReader {
 public:
  explicit LineReader(std::string_view text) : text_(text) {}

  // Next non-blank line split into tokens; throws if the text is exhausted.
  const std::vector<std::string_view>& next(const char* expecting) {
    while (pos_ < text_.size()) {
      auto end = text_.find('\n', pos_);
      if (end == std::string_view::npos) end = text_.size();
      const auto line = text_.substr(pos_, end - pos_);
      pos_ = end + 1;
      ++line_no_;
      tokenize(line);
      if (!tokens_.empty()) return tokens_;
    }
    throw ParseError(line_no_ + 1, std::string("unexpected end of file, expected ") + expecting);
  }

  bool at_end() {
    while (pos_ < text_.size()) {
      auto end = text_.find('\n', pos_);
      if (end == std::string_view::npos) end = text_.size();
      const auto line = text_.substr(pos_, end - pos_);
      tokenize(line);
      if (!tokens_.empty()) return false;
      pos_ = end + 1;
      ++line_no_;
    }
    return true;
  }

  std::size_t line() const noexcept { return line_no_; }

 private:
  void tokenize(std::string_view line) {
    tokens_.clear();
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && is_space(line[i])) ++i;
      const auto start = i;
      while (i < line.size() && !is_space(line[i])) ++i;
      if (i > start) tokens_.push_back(line.substr(start, i - start));
    }
  }

  static bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f'; }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_no_ = 0;
  std::vector<std::string_view> tokens_;
};

std::uint64_t to_count(std::string_view tok, std::size_t line, const char* what) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size())
    throw ParseError(line, std::string("expected ") + what + ", got '" + std::string(tok) + "'");
  return v;
}

double to_coord(std::string_view tok, std::size_t line) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size())
    throw ParseError(line, "non-numeric coordinate '" + std::string(tok) + "'");
  if (!std::isfinite(v)) throw ParseError(line, "non-finite coordinate '" + std::string(tok) + "'");
  return v;
}

std::uint64_t single_count(LineReader& r, const char* what) {
  const auto& toks = r.next(what);
  if (toks.size() != 1) throw ParseError(r.line(), std::string("malformed ") + what + " line");
  return to_count(toks[0], r.line(), what);
}

constexpr std::size_t kBodyHeaderFields = 10;

}  // namespace

RawSequence parse_skeleton_file(std::string_view text, const SkeletonTopology& topo) {
  LineReader r(text);
  const auto num_frames = single_count(r, "frame count");
  if (num_frames == 0) throw ParseError(r.line(), "file declares zero frames");

  RawSequence seq;
  for (std::uint64_t f = 0; f < num_frames; ++f) {
    RawFrame frame;
    const auto num_bodies = single_count(r, "body count");
    for (std::uint64_t b = 0; b < num_bodies; ++b) {
      const auto& header = r.next("body header");
      if (header.size() != kBodyHeaderFields)
        throw ParseError(r.line(), "body header needs " + std::to_string(kBodyHeaderFields) + " values, got " +
                                       std::to_string(header.size()));
      RawBody body;
      body.tracking_id = to_count(header[0], r.line(), "tracking id");

      const auto num_joints = single_count(r, "joint count");
      if (num_joints != static_cast<std::uint64_t>(topo.num_joints))
        throw ParseError(r.line(), "joint count " + std::to_string(num_joints) + " does not match schema '" +
                                       topo.name + "' (" + std::to_string(topo.num_joints) + ")");
      body.joints.reserve(num_joints);
      for (std::uint64_t j = 0; j < num_joints; ++j) {
        const auto& toks = r.next("joint record");
        if (toks.size() < 3) throw ParseError(r.line(), "joint record needs at least x y z");
        body.joints.push_back({to_coord(toks[0], r.line()), to_coord(toks[1], r.line()), to_coord(toks[2], r.line())});
      }
      frame.bodies.push_back(std::move(body));
    }
    seq.frames.push_back(std::move(frame));
  }
  if (!r.at_end()) throw ParseError(r.line() + 1, "trailing data after the last declared frame");
  return seq;
}

namespace {

void append_number(std::string& out, double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, ptr);
}

}  // namespace

std::string format_skeleton_file(const RawSequence& raw) {
  std::string out = std::to_string(raw.frames.size()) + "\n";
  for (const auto& frame : raw.frames) {
    out += std::to_string(frame.bodies.size()) + "\n";
    for (const auto& body : frame.bodies) {
      out += std::to_string(body.tracking_id) + " 0 0 0 0 0 0 0 0 0\n";
      out += std::to_string(body.joints.size()) + "\n";
      for (const auto& p : body.joints) {
        append_number(out, p.x);
        out += ' ';
        append_number(out, p.y);
        out += ' ';
        append_number(out, p.z);
        out += " 0 0 0 0 0 0 0 0 0\n";
      }
    }
  }
  return out;
}

int label_from_filename(std::string_view name) {
  const auto slash = name.find_last_of("/\\");
  if (slash != std::string_view::npos) name.remove_prefix(slash + 1);
  for (std::size_t i = 0; i + 3 < name.size(); ++i) {
    if (name[i] != 'A') continue;
    int v = 0;
    auto [ptr, ec] = std::from_chars(name.data() + i + 1, name.data() + i + 4, v);
    if (ec == std::errc{} && ptr == name.data() + i + 4 && v >= 1) return v - 1;
  }
  return -1;
}

}  // namespace angkit
