#include "angkit/checkpoint.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iterator>
#include <sstream>

#include "angkit/binary_io.hpp"
#include "angkit/errors.hpp"
#include "angkit/ini_config.hpp"

namespace angkit {

namespace {

constexpr char kMagic[6] = {'A', 'N', 'G', 'M', '1', '\0'};
constexpr std::uint32_t kMaxText = 1u << 24;
constexpr std::uint32_t kMaxSections = 1u << 16;
constexpr std::uint64_t kMaxElements = std::uint64_t{1} << 28;
const std::string kMomentumSuffix = "@momentum";

std::string join_sizes(const auto& values) {
  std::string out;
  for (auto v : values) {
    if (!out.empty()) out += ' ';
    out += std::to_string(v);
  }
  return out;
}

std::string header_text(const ModelCheckpoint& c) {
  IniDocument doc;
  IniSection model{"model", {}};
  model.set("in_channels", std::to_string(c.config.in_channels));
  model.set("num_classes", std::to_string(c.config.num_classes));
  model.set("num_scales", std::to_string(c.config.num_scales));
  model.set("channels", join_sizes(c.config.channels));
  model.set("dilations", join_sizes(c.config.dilations));
  model.set("seed", std::to_string(c.config.seed));
  IniSection training{"training", {}};
  training.set("epochs_done", std::to_string(c.meta.epochs_done));
  training.set("seed", std::to_string(c.meta.seed));
  training.set("features", c.meta.features);
  training.set("stream", c.meta.stream);
  training.set("history", std::to_string(c.meta.history.size()));
  IniSection history{"history", {}};
  for (const auto& m : c.meta.history) {
    history.set("epoch" + std::to_string(m.epoch),
                format_double(m.lr) + ' ' + format_double(m.loss) + ' ' + format_double(m.accuracy));
  }
  doc.sections = {model, training};
  if (!history.entries.empty()) doc.sections.push_back(history);
  return doc.format();
}

const std::string& require(const IniSection& s, const std::string& key) {
  const auto* v = s.find(key);
  if (!v) throw FormatError("checkpoint header lacks [" + s.name + "] " + key);
  return *v;
}

template <std::size_t N>
std::array<std::size_t, N> parse_sizes(const std::string& text, const std::string& what) {
  const auto words = split_words(text);
  if (words.size() != N) throw FormatError("checkpoint header: " + what + " needs " + std::to_string(N) + " values");
  std::array<std::size_t, N> out{};
  for (std::size_t i = 0; i < N; ++i) out[i] = static_cast<std::size_t>(parse_uint64(words[i], what));
  return out;
}

void parse_header(const std::string& text, ModelCheckpoint& c) {
  IniDocument doc;
  try {
    doc = IniDocument::parse(text);
  } catch (const ConfigError& e) {
    throw FormatError(std::string("checkpoint header: ") + e.what());
  }
  const auto* model = doc.find("model");
  const auto* training = doc.find("training");
  if (!model || !training) throw FormatError("checkpoint header lacks [model] or [training]");
  try {
    c.config.in_channels = static_cast<std::size_t>(parse_uint64(require(*model, "in_channels"), "in_channels"));
    c.config.num_classes = static_cast<std::size_t>(parse_uint64(require(*model, "num_classes"), "num_classes"));
    c.config.num_scales = static_cast<std::size_t>(parse_uint64(require(*model, "num_scales"), "num_scales"));
    c.config.channels = parse_sizes<3>(require(*model, "channels"), "channels");
    c.config.dilations = parse_sizes<4>(require(*model, "dilations"), "dilations");
    c.config.seed = parse_uint64(require(*model, "seed"), "seed");
    c.meta.epochs_done = static_cast<std::size_t>(parse_uint64(require(*training, "epochs_done"), "epochs_done"));
    c.meta.seed = parse_uint64(require(*training, "seed"), "seed");
    c.meta.features = require(*training, "features");
    c.meta.stream = require(*training, "stream");
    const auto n = static_cast<std::size_t>(parse_uint64(require(*training, "history"), "history"));
    const auto* history = doc.find("history");
    const std::size_t have = history ? history->entries.size() : 0;
    if (have != n) throw FormatError("checkpoint header: history count mismatch");
    for (std::size_t i = 0; i < n; ++i) {
      const auto& [key, value] = history->entries[i];
      if (key.rfind("epoch", 0) != 0) throw FormatError("checkpoint header: bad history key '" + key + "'");
      const auto words = split_words(value);
      if (words.size() != 3) throw FormatError("checkpoint header: history entry needs lr loss accuracy");
      EpochMetrics m;
      m.epoch = static_cast<std::size_t>(parse_uint64(key.substr(5), "history epoch"));
      m.lr = parse_double(words[0], "lr");
      m.loss = parse_double(words[1], "loss");
      m.accuracy = parse_double(words[2], "accuracy");
      c.meta.history.push_back(m);
    }
  } catch (const ConfigError& e) {
    throw FormatError(std::string("checkpoint header: ") + e.what());
  }
}

void put_text(std::ostream& out, const std::string& s) {
  binio::put_u32(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_text(std::istream& in, std::uint32_t limit, const char* what) {
  const auto n = binio::get_u32(in, what);
  if (n > limit) throw FormatError(std::string(what) + " too large");
  std::string s(n, '\0');
  binio::read_exact(in, s.data(), n, what);
  return s;
}

void put_tensor(std::ostream& out, const std::string& name, const nn::Tensor& t) {
  put_text(out, name);
  binio::put_u32(out, static_cast<std::uint32_t>(t.rank()));
  for (std::size_t i = 0; i < t.rank(); ++i) binio::put_u32(out, static_cast<std::uint32_t>(t.dim(i)));
  for (double v : t.data()) binio::put_f64(out, v);
}

nn::Tensor get_tensor(std::istream& in) {
  const auto rank = binio::get_u32(in, "section rank");
  if (rank < 1 || rank > 4) throw FormatError("section rank " + std::to_string(rank) + " out of range");
  nn::Shape shape;
  std::uint64_t count = 1;
  for (std::uint32_t i = 0; i < rank; ++i) {
    const auto d = binio::get_u32(in, "section shape");
    if (d == 0) throw FormatError("section has a zero dimension");
    count *= d;
    if (count > kMaxElements) throw FormatError("section declares too many elements");
    shape.push_back(d);
  }
  std::vector<double> data(count);
  for (auto& v : data) v = binio::get_f64(in, "section payload");
  return nn::Tensor(std::move(shape), std::move(data));
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

ModelCheckpoint snapshot(const AngNet& model, const TrainingMeta& meta) {
  return {model.config(), model.topology(), model.params(), meta};
}

AngNet restore_model(const ModelCheckpoint& c) {
  AngNet net(c.config, c.topology);
  auto& params = net.params();
  if (params.size() != c.params.size())
    throw FormatError("checkpoint has " + std::to_string(c.params.size()) + " parameters, config implies " +
                      std::to_string(params.size()));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& src = c.params[i];
    auto& dst = params[i];
    if (src.name != dst.name) throw FormatError("checkpoint parameter '" + src.name + "' where '" + dst.name + "' expected");
    if (src.value.shape() != dst.value.shape() || src.momentum.shape() != dst.value.shape())
      throw FormatError("checkpoint parameter '" + src.name + "' has shape " + nn::shape_str(src.value.shape()) +
                        ", expected " + nn::shape_str(dst.value.shape()));
    dst.value = src.value;
    dst.momentum = src.momentum;
  }
  return net;
}

void write_checkpoint(const ModelCheckpoint& c, std::ostream& out) {
  out.write(kMagic, sizeof kMagic);
  binio::put_u32(out, kCheckpointVersion);
  put_text(out, header_text(c));
  put_text(out, format_schema(c.topology));
  binio::put_u32(out, static_cast<std::uint32_t>(2 * c.params.size()));
  for (const auto& p : c.params) {
    put_tensor(out, p.name, p.value);
    put_tensor(out, p.name + kMomentumSuffix, p.momentum);
  }
  if (!out) throw FormatError("failed writing checkpoint");
}

ModelCheckpoint read_checkpoint(std::istream& in) {
  char magic[sizeof kMagic];
  binio::read_exact(in, magic, sizeof magic, "checkpoint magic");
  if (!std::equal(magic, magic + sizeof magic, kMagic)) throw FormatError("magic mismatch: not an ANGM1 checkpoint");
  const auto version = binio::get_u32(in, "checkpoint version");
  if (version != kCheckpointVersion)
    throw FormatError("checkpoint version " + std::to_string(version) + " is not supported (expected " +
                      std::to_string(kCheckpointVersion) + ")");

  ModelCheckpoint c;
  parse_header(get_text(in, kMaxText, "checkpoint header"), c);
  try {
    c.topology = parse_schema(get_text(in, kMaxText, "checkpoint schema"));
  } catch (const FormatError&) {
    throw;
  } catch (const Error& e) {
    throw FormatError(std::string("checkpoint schema: ") + e.what());
  }

  const auto sections = binio::get_u32(in, "section count");
  if (sections % 2 != 0 || sections > kMaxSections) throw FormatError("bad checkpoint section count");
  for (std::uint32_t i = 0; i < sections / 2; ++i) {
    const auto name = get_text(in, 4096, "section name");
    auto value = get_tensor(in);
    const auto mname = get_text(in, 4096, "section name");
    if (mname != name + kMomentumSuffix) throw FormatError("section '" + name + "' is not followed by its momentum");
    auto momentum = get_tensor(in);
    if (momentum.shape() != value.shape()) throw FormatError("momentum of '" + name + "' has a different shape");
    try {
      const auto idx = c.params.add(name, std::move(value));
      c.params[idx].momentum = std::move(momentum);
    } catch (const ConfigError& e) {
      throw FormatError(e.what());
    }
  }
  if (in.peek() != std::char_traits<char>::eof()) throw FormatError("trailing bytes after checkpoint");
  return c;
}

void save_checkpoint(const ModelCheckpoint& c, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open '" + path + "' for writing");
  write_checkpoint(c, out);
}

ModelCheckpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path + "'");
  return read_checkpoint(in);
}

}  // namespace angkit
