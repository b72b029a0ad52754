#include "cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include "angkit/checkpoint.hpp"
#include "angkit/encoders.hpp"
#include "angkit/errors.hpp"
#include "angkit/gradcheck.hpp"
#include "angkit/ntu_io.hpp"

namespace angkit::cli {

namespace fs = std::filesystem;

namespace {

struct UsageError : Error {
  using Error::Error;
};

std::string join(const auto& values, char sep = ' ') {
  std::ostringstream out;
  bool first = true;
  for (const auto& v : values) {
    if (!first) out << sep;
    first = false;
    out << v;
  }
  return out.str();
}

std::size_t to_size(const std::string& v, const std::string& key) {
  const auto n = parse_int64(v, key);
  if (n < 0) throw ConfigError(key + " must be >= 0");
  return static_cast<std::size_t>(n);
}

template <std::size_t N>
std::array<std::size_t, N> to_sizes(const std::string& v, const std::string& key) {
  const auto words = split_words(v);
  if (words.size() != N) throw ConfigError(key + " needs " + std::to_string(N) + " values");
  std::array<std::size_t, N> out{};
  for (std::size_t i = 0; i < N; ++i) out[i] = to_size(words[i], key);
  return out;
}

}  // namespace

void apply_ini(RunConfig& c, const IniDocument& doc) {
  for (const auto& section : doc.sections) {
    for (const auto& [key, v] : section.entries) {
      const auto where = "[" + section.name + "] " + key;
      if (section.name == "run") {
        if (key == "schema") c.schema = v;
        else if (key == "stream") c.stream = v;
        else if (key == "features") c.features = v;
        else if (key == "seed") c.seed = parse_uint64(v, where);
        else if (key == "frames") c.frames = to_size(v, where);
        else if (key == "max_persons") c.max_persons = to_size(v, where);
        else throw ConfigError("unknown config key " + where);
      } else if (section.name == "train") {
        if (key == "base_lr") c.train.base_lr = parse_double(v, where);
        else if (key == "momentum") c.train.momentum = parse_double(v, where);
        else if (key == "epochs") c.train.epochs = to_size(v, where);
        else if (key == "decay_epochs") {
          c.train.decay_epochs.clear();
          for (const auto& w : split_words(v)) c.train.decay_epochs.push_back(to_size(w, where));
        } else if (key == "decay_factor") c.train.decay_factor = parse_double(v, where);
        else if (key == "batch_size") c.train.batch_size = to_size(v, where);
        else if (key == "clip_norm") c.train.clip_norm = parse_double(v, where);
        else throw ConfigError("unknown config key " + where);
      } else if (section.name == "model") {
        if (key == "num_scales") c.model.num_scales = to_size(v, where);
        else if (key == "channels") c.model.channels = to_sizes<3>(v, where);
        else if (key == "dilations") c.model.dilations = to_sizes<4>(v, where);
        else throw ConfigError("unknown config key " + where);
      } else if (section.name == "synth") {
        if (key == "n_per_class") c.n_per_class = to_size(v, where);
        else if (key == "scale_min") c.synth.scale_min = parse_double(v, where);
        else if (key == "scale_max") c.synth.scale_max = parse_double(v, where);
        else if (key == "yaw_range") c.synth.yaw_range = parse_double(v, where);
        else if (key == "noise_sigma") c.synth.noise_sigma = parse_double(v, where);
        else if (key == "persons") c.synth.persons = to_size(v, where);
        else throw ConfigError("unknown config key " + where);
      } else {
        throw ConfigError("unknown config section [" + section.name + "]");
      }
    }
  }
}

IniDocument to_ini(const RunConfig& c) {
  IniSection run{"run", {}};
  run.set("schema", c.schema);
  run.set("stream", c.stream);
  run.set("features", c.features);
  run.set("seed", std::to_string(c.seed));
  run.set("frames", std::to_string(c.frames));
  run.set("max_persons", std::to_string(c.max_persons));
  IniSection train{"train", {}};
  train.set("base_lr", format_double(c.train.base_lr));
  train.set("momentum", format_double(c.train.momentum));
  train.set("epochs", std::to_string(c.train.epochs));
  train.set("decay_epochs", join(c.train.decay_epochs));
  train.set("decay_factor", format_double(c.train.decay_factor));
  train.set("batch_size", std::to_string(c.train.batch_size));
  train.set("clip_norm", format_double(c.train.clip_norm));
  IniSection model{"model", {}};
  model.set("num_scales", std::to_string(c.model.num_scales));
  model.set("channels", join(c.model.channels));
  model.set("dilations", join(c.model.dilations));
  IniSection synth{"synth", {}};
  synth.set("n_per_class", std::to_string(c.n_per_class));
  synth.set("scale_min", format_double(c.synth.scale_min));
  synth.set("scale_max", format_double(c.synth.scale_max));
  synth.set("yaw_range", format_double(c.synth.yaw_range));
  synth.set("noise_sigma", format_double(c.synth.noise_sigma));
  synth.set("persons", std::to_string(c.synth.persons));
  IniDocument doc;
  doc.sections = {run, train, model, synth};
  return doc;
}

namespace {

struct Flags {
  std::string config, schema, stream, features, out;
  std::uint64_t seed = 0;
  std::size_t epochs = 0, frames = 0;
  double lr = 0.0;
};

struct Context {
  CLI::App& app;
  Flags& flags;
  std::ostream& out;
  std::ostream& err;

  bool given(const std::string& name) const { return app.count(name) > 0; }
};

RunConfig resolve(const Context& ctx) {
  RunConfig c;
  if (!ctx.flags.config.empty()) apply_ini(c, IniDocument::parse(read_text_file(ctx.flags.config)));
  if (ctx.given("--schema")) c.schema = ctx.flags.schema;
  if (ctx.given("--stream")) c.stream = ctx.flags.stream;
  if (ctx.given("--features")) c.features = ctx.flags.features;
  if (ctx.given("--seed")) c.seed = ctx.flags.seed;
  if (ctx.given("--frames")) c.frames = ctx.flags.frames;
  if (ctx.given("--epochs")) c.train.epochs = ctx.flags.epochs;
  if (ctx.given("--lr")) c.train.base_lr = ctx.flags.lr;
  c.train.seed = c.seed;
  c.model.seed = c.seed;
  c.synth.frames = c.frames;
  // Fail early on bad values.
  parse_stream(c.stream);
  parse_feature_list(c.features);
  validate(c.train);
  validate(c.synth);
  if (c.frames < 1) throw ConfigError("frames must be at least 1");
  if (c.max_persons < 1) throw ConfigError("max_persons must be at least 1");
  return c;
}

SkeletonTopology topology_of(const RunConfig& c) { return c.schema.empty() ? kinect25() : load_schema(c.schema); }

fs::path require_out(const Context& ctx) {
  if (ctx.flags.out.empty()) throw UsageError("--out is required for this command");
  fs::path dir(ctx.flags.out);
  fs::create_directories(dir);
  return dir;
}

void echo_config(const fs::path& dir, const RunConfig& c) {
  write_text_file((dir / "resolved_config.ini").string(), to_ini(c).format());
}

// Clip directory: manifest.tsv plus one coordinate tensor per clip.
void write_clip_dir(const fs::path& dir, const std::vector<std::pair<std::string, Clip>>& clips) {
  std::vector<ManifestEntry> entries;
  for (const auto& [name, clip] : clips) {
    const auto file = name + ".angk";
    save_tensor(clip_to_tensor(clip), (dir / file).string());
    entries.push_back({file, clip.label, clip.valid_frames});
  }
  write_text_file((dir / "manifest.tsv").string(), format_manifest(entries));
}

std::vector<Clip> read_clip_dir(const fs::path& dir) {
  const auto manifest = dir / "manifest.tsv";
  if (!fs::exists(manifest)) throw FormatError("no manifest.tsv in '" + dir.string() + "'");
  std::vector<Clip> clips;
  for (const auto& e : parse_manifest(read_text_file(manifest.string()))) {
    const auto t = load_tensor((dir / e.file).string());
    if (t.shape().channels != 3)
      throw FormatError("'" + e.file + "' has " + std::to_string(t.shape().channels) + " channels; expected a clip");
    clips.push_back(clip_from_tensor(t, e.valid_frames, e.label));
  }
  if (clips.empty()) throw FormatError("'" + dir.string() + "' lists no clips");
  return clips;
}

std::vector<Sample> to_samples(std::span<const Clip> clips, const SkeletonTopology& topo,
                               std::span<const FeatureKind> kinds, Stream stream) {
  auto features = encode_many(clips, topo, kinds, stream, encoder_threads());
  std::vector<Sample> samples;
  for (std::size_t i = 0; i < clips.size(); ++i) {
    if (clips[i].label < 0) throw FormatError("clip " + std::to_string(i) + " has no label");
    samples.push_back({std::move(features[i]), static_cast<std::size_t>(clips[i].label)});
  }
  return samples;
}

int cmd_parse(const Context& ctx, const std::vector<std::string>& inputs) {
  if (inputs.empty()) throw UsageError("parse needs at least one input file");
  const auto cfg = resolve(ctx);
  const auto topo = topology_of(cfg);
  const auto dir = require_out(ctx);
  std::vector<std::pair<std::string, Clip>> clips;
  std::size_t failed = 0;
  for (const auto& path : inputs) {
    try {
      const auto raw = parse_skeleton_file(read_text_file(path), topo);
      auto clip = normalize_clip(raw, topo, {cfg.frames, cfg.max_persons});
      const auto stem = fs::path(path).stem().string();
      clip.label = label_from_filename(stem);
      clips.emplace_back(stem, std::move(clip));
    } catch (const Error& e) {
      ++failed;
      ctx.err << path << ": " << e.what() << '\n';
    }
  }
  write_clip_dir(dir, clips);
  echo_config(dir, cfg);
  ctx.out << "parsed " << clips.size() << " of " << inputs.size() << " files into " << dir.string() << '\n';
  return failed ? kDataError : kOk;
}

int cmd_synth(const Context& ctx) {
  const auto cfg = resolve(ctx);
  const auto dir = require_out(ctx);
  const auto clips = generate_synthetic(cfg.synth, cfg.n_per_class, cfg.seed);
  std::vector<std::pair<std::string, Clip>> named;
  for (std::size_t i = 0; i < clips.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "synth_%05zu", i);
    named.emplace_back(name, clips[i]);
  }
  write_clip_dir(dir, named);
  echo_config(dir, cfg);
  ctx.out << "wrote " << clips.size() << " clips (" << cfg.synth.classes.size() << " classes) to " << dir.string()
          << '\n';
  return kOk;
}

int cmd_encode(const Context& ctx, const std::string& input) {
  const auto cfg = resolve(ctx);
  const auto topo = topology_of(cfg);
  const auto dir = require_out(ctx);
  const auto clips = read_clip_dir(input);
  const auto kinds = parse_feature_list(cfg.features);
  const auto features = encode_many(clips, topo, kinds, parse_stream(cfg.stream), encoder_threads());
  const auto entries = parse_manifest(read_text_file((fs::path(input) / "manifest.tsv").string()));
  for (std::size_t i = 0; i < features.size(); ++i) save_tensor(features[i], (dir / entries[i].file).string());
  write_text_file((dir / "manifest.tsv").string(), format_manifest(entries));
  echo_config(dir, cfg);
  ctx.out << "encoded " << features.size() << " clips with C=" << features.front().shape().channels << " ("
          << cfg.features << ", " << cfg.stream << ")\n";
  return kOk;
}

int cmd_train(const Context& ctx, const std::string& input, const std::string& resume) {
  const auto cfg = resolve(ctx);
  const auto topo = topology_of(cfg);
  const auto dir = require_out(ctx);
  const auto clips = read_clip_dir(input);
  const auto kinds = parse_feature_list(cfg.features);
  const auto samples = to_samples(clips, topo, kinds, parse_stream(cfg.stream));

  std::optional<AngNet> model;
  TrainingMeta meta;
  if (!resume.empty()) {
    const auto ckpt = load_checkpoint(resume);
    if (ckpt.meta.features != format_feature_list(kinds) || ckpt.meta.stream != cfg.stream)
      throw UsageError("checkpoint was trained on features '" + ckpt.meta.features + "' (" + ckpt.meta.stream +
                       "); pass the same --features and --stream to resume");
    model.emplace(restore_model(ckpt));
    meta = ckpt.meta;
  } else {
    std::size_t classes = 0;
    for (const auto& s : samples) classes = std::max(classes, s.label + 1);
    auto mc = cfg.model;
    mc.in_channels = samples.front().features.shape().channels;
    mc.num_classes = std::max<std::size_t>(classes, 2);
    model.emplace(mc, topo);
    meta.seed = cfg.seed;
    meta.features = format_feature_list(kinds);
    meta.stream = cfg.stream;
  }

  // A resumed run extends the log of the run it continues.
  std::ofstream metrics(dir / "metrics.txt", resume.empty() ? std::ios::trunc : std::ios::app);
  train(*model, samples, cfg.train, meta, &metrics);
  save_checkpoint(snapshot(*model, meta), (dir / "model.angm").string());
  echo_config(dir, cfg);
  const auto e = evaluate(*model, samples);
  ctx.out << "trained " << meta.epochs_done << " epochs on " << samples.size() << " clips; "
          << model->num_params() << " parameters; train accuracy " << e.accuracy << '\n';
  return kOk;
}

int cmd_eval(const Context& ctx, const std::string& input, const std::vector<std::string>& models) {
  if (models.empty()) throw UsageError("eval needs at least one --model");
  const auto cfg = resolve(ctx);
  const auto dir = require_out(ctx);
  const auto clips = read_clip_dir(input);

  std::vector<AngNet> nets;
  std::vector<std::vector<Sample>> inputs;
  for (const auto& path : models) {
    const auto ckpt = load_checkpoint(path);
    nets.push_back(restore_model(ckpt));
    const auto kinds = parse_feature_list(ckpt.meta.features);
    inputs.push_back(to_samples(clips, ckpt.topology, kinds, parse_stream(ckpt.meta.stream)));
  }
  std::vector<EnsembleMember> members;
  for (std::size_t i = 0; i < nets.size(); ++i) members.push_back({&nets[i], inputs[i]});
  const auto e = evaluate_ensemble(members);

  std::ostringstream report;
  report << "models=" << models.size() << "\nsamples=" << clips.size() << "\naccuracy=" << format_double(e.accuracy)
         << '\n';
  for (std::size_t c = 0; c < e.per_class.size(); ++c)
    report << "class" << c << "_accuracy=" << format_double(e.per_class[c]) << '\n';
  write_text_file((dir / "eval.txt").string(), report.str());
  write_text_file((dir / "confusion.txt").string(), format_confusion(e));
  echo_config(dir, cfg);
  ctx.out << report.str();
  return kOk;
}

int cmd_gradcheck(const Context& ctx) {
  std::vector<std::uint64_t> seeds{0, 1, 2};
  if (ctx.given("--seed")) seeds = {ctx.flags.seed};
  const auto results = run_gradcheck_suite(seeds);
  double worst = 0.0;
  std::size_t failures = 0;
  for (const auto& r : results) {
    ctx.out << (r.passed() ? "ok   " : "FAIL ") << r.name << " max_rel_error=" << r.max_rel_error
            << " tolerance=" << r.tolerance << '\n';
    worst = std::max(worst, r.max_rel_error);
    if (!r.passed()) ++failures;
  }
  ctx.out << results.size() - failures << "/" << results.size() << " checks passed; max relative error " << worst
          << '\n';
  return failures ? kVerificationFailure : kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"angkit: angular-feature skeleton action recognition toolkit", "angkit"};
  app.require_subcommand(1);
  Flags flags;
  std::vector<std::string> inputs, models;
  std::string input, resume;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", flags.config, "INI file with [run] [train] [model] [synth] sections")
        ->check(CLI::ExistingFile);
    sub->add_option("--seed", flags.seed, "Seed for synthesis, initialization and shuffling");
    sub->add_option("--schema", flags.schema, "Skeleton schema file (default: bundled kinect25)");
    sub->add_option("--stream", flags.stream, "Feature stream: static or velocity");
    sub->add_option("--features", flags.features, "Comma list of joint, bone, angular");
    sub->add_option("--out", flags.out, "Output directory");
    sub->add_option("--epochs", flags.epochs, "Training epochs");
    sub->add_option("--lr", flags.lr, "Base learning rate");
    sub->add_option("--frames", flags.frames, "Frames per clip");
  };
  auto* parse = app.add_subcommand("parse", "Parse skeleton text files into a clip directory");
  common(parse);
  parse->add_option("inputs", inputs, "Skeleton files");
  auto* synth = app.add_subcommand("synth", "Generate a labelled synthetic clip directory");
  common(synth);
  auto* encode_cmd = app.add_subcommand("encode", "Encode a clip directory into feature tensors");
  common(encode_cmd);
  encode_cmd->add_option("clips", input, "Clip directory")->required();
  auto* train_cmd = app.add_subcommand("train", "Train a model on a clip directory");
  common(train_cmd);
  train_cmd->add_option("clips", input, "Clip directory")->required();
  train_cmd->add_option("--resume", resume, "Checkpoint to continue from")->check(CLI::ExistingFile);
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate one model or a mean-probability ensemble");
  common(eval_cmd);
  eval_cmd->add_option("clips", input, "Clip directory")->required();
  eval_cmd->add_option("--model", models, "Checkpoint; repeat to ensemble")->check(CLI::ExistingFile);
  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference check of every gradient");
  common(gradcheck);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  auto* active = app.get_subcommands().front();
  const Context ctx{*active, flags, out, err};
  try {
    if (active == parse) return cmd_parse(ctx, inputs);
    if (active == synth) return cmd_synth(ctx);
    if (active == encode_cmd) return cmd_encode(ctx, input);
    if (active == train_cmd) return cmd_train(ctx, input, resume);
    if (active == eval_cmd) return cmd_eval(ctx, input, models);
    return cmd_gradcheck(ctx);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\nrun 'angkit " << active->get_name() << " --help' for options\n";
    return kUsage;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\ncheck the --config file and flag values\n";
    return kUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  }
}

}  // namespace angkit::cli
