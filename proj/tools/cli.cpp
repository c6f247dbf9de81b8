// Copyright 2026 The Avatar Authors
// SPDX-License-Identifier: Apache-2.0

#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <iomanip>
#include <map>
#include <optional>

#include "avatar/errors.hpp"
#include "avatar/image_io.hpp"
#include "avatar/parallel.hpp"
#include "avatar/pipeline.hpp"
#include "avatar/selftest.hpp"
#include "avatar/weights.hpp"

namespace avatar::cli {
namespace {

namespace fs = std::filesystem;

struct StyleArg {
  std::string path;
  std::optional<float> weight;
};

// "path.png:0.3" -> {path.png, 0.3}; a suffix that is not a number stays
// part of the path.
StyleArg parse_style_arg(const std::string& arg) {
  const auto colon = arg.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == arg.size()) return {arg, {}};
  const std::string tail = arg.substr(colon + 1);
  float w = 0.0f;
  const auto [ptr, ec] = std::from_chars(tail.data(), tail.data() + tail.size(), w);
  if (ec != std::errc() || ptr != tail.data() + tail.size()) return {arg, {}};
  return {arg.substr(0, colon), w};
}

struct Options {
  std::string content;
  std::vector<std::string> styles;
  std::string weights;
  std::string out;
  std::string frames_dir;
  int patch_size = 5;
  int stride = 1;
  float alpha = 0.8f;
  BlendMode blend_mode = BlendMode::NormalizedSpace;
  TransformFlavor transform = TransformFlavor::ZcaCov;
  bool normalize_weights = false;
  int threads = 0;
  std::uint64_t seed = 0;
  std::string inspect_path;
};

void add_decorator_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--patch-size", o.patch_size, "Style patch size P (odd)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--stride", o.stride, "Style patch sampling stride S")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--alpha", o.alpha,
                  "Content weight of the trade-off blend: 0 = pure patch decoration, "
                  "1 = whitened content passed through (bottleneck only; shortcut "
                  "fusion is not blended)")
      ->check(CLI::Range(0.0f, 1.0f))
      ->capture_default_str();
  const std::map<std::string, BlendMode> blend{{"normalized", BlendMode::NormalizedSpace},
                                               {"feature", BlendMode::FeatureSpace}};
  cmd->add_option("--blend-mode", o.blend_mode, "Where alpha is applied")
      ->transform(CLI::CheckedTransformer(blend, CLI::ignore_case))
      ->default_str("normalized");
  const std::map<std::string, TransformFlavor> flavor{
      {"adain", TransformFlavor::AdaIN},
      {"zca", TransformFlavor::ZcaCov},
      {"zca-gram", TransformFlavor::ZcaGram}};
  cmd->add_option("--transform", o.transform, "Projection/reconstruction transform")
      ->transform(CLI::CheckedTransformer(flavor, CLI::ignore_case))
      ->default_str("zca");
}

DecoratorConfig decorator_config(const Options& o) {
  DecoratorConfig cfg;
  cfg.patch_size = o.patch_size;
  cfg.stride = o.stride;
  cfg.alpha = o.alpha;
  cfg.blend_mode = o.blend_mode;
  cfg.flavor = o.transform;
  cfg.validate();
  return cfg;
}

std::vector<StyleImage> load_styles(const Options& o, std::ostream& err) {
  std::vector<StyleArg> parsed;
  for (const auto& s : o.styles) parsed.push_back(parse_style_arg(s));
  std::vector<StyleImage> styles;
  double sum = 0.0;
  for (const auto& s : parsed) {
    const float w = s.weight.value_or(1.0f);
    err << "[avatar] style " << s.path << " weight " << w << "\n";
    styles.push_back({read_png(s.path), w});
    sum += w;
  }
  if (o.normalize_weights) {
    if (!(sum > 0.0)) throw ValidationError("--normalize-weights: style weights sum to 0");
    for (auto& s : styles) s.weight = static_cast<float>(s.weight / sum);
  }
  return styles;
}

int cmd_stylize(const Options& o, std::ostream& err) {
  const DecoratorConfig cfg = decorator_config(o);
  err << "[avatar] loading weights " << o.weights << "\n";
  const Stylizer stylizer(load_weights(o.weights));
  const Image content = read_png(o.content);
  const auto styles = load_styles(o, err);
  std::vector<float> weights;
  for (const auto& s : styles) weights.push_back(s.weight);
  validate_style_weights(weights);
  err << "[avatar] stylizing " << content.height() << "x" << content.width() << " with "
      << styles.size() << " style(s), transform " << flavor_name(cfg.flavor) << "\n";
  const Image result = stylizer.stylize(content, styles, cfg);
  write_png(o.out, result);
  err << "[avatar] wrote " << o.out << "\n";
  return kOk;
}

int cmd_video(const Options& o, std::ostream& err) {
  const DecoratorConfig cfg = decorator_config(o);
  if (o.styles.size() != 1) throw ValidationError("video takes exactly one --style");
  if (!fs::is_directory(o.frames_dir)) {
    throw IoError("--frames-dir " + o.frames_dir + " is not a directory");
  }
  std::vector<fs::path> paths;
  for (const auto& entry : fs::directory_iterator(o.frames_dir)) {
    auto ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
    if (entry.is_regular_file() && ext == ".png") paths.push_back(entry.path());
  }
  std::sort(paths.begin(), paths.end());
  if (paths.empty()) throw ValidationError("--frames-dir " + o.frames_dir + " has no PNG frames");

  err << "[avatar] loading weights " << o.weights << "\n";
  const Stylizer stylizer(load_weights(o.weights));
  std::vector<Image> frames;
  for (const auto& p : paths) frames.push_back(read_png(p));
  const Image style = read_png(parse_style_arg(o.styles.front()).path);
  err << "[avatar] stylizing " << frames.size() << " frame(s)\n";
  const auto results = stylizer.stylize_video(frames, style, cfg);

  fs::create_directories(o.out);
  for (std::size_t i = 0; i < results.size(); ++i) {
    write_png(fs::path(o.out) / paths[i].filename(), results[i]);
  }
  err << "[avatar] wrote " << results.size() << " frame(s) to " << o.out << "\n";
  return kOk;
}

int cmd_inspect(const Options& o, std::ostream& out) {
  const NetworkWeights weights = load_weights(o.inspect_path);
  std::size_t name_width = 4;
  for (const auto& t : weights) name_width = std::max(name_width, t.name.size());
  std::size_t total = 0;
  out << std::left << std::setw(static_cast<int>(name_width)) << "name" << "  shape\n";
  for (const auto& t : weights) {
    std::string shape = "[";
    for (std::size_t i = 0; i < t.shape.size(); ++i) {
      if (i) shape += ", ";
      shape += std::to_string(t.shape[i]);
    }
    shape += "]";
    out << std::left << std::setw(static_cast<int>(name_width)) << t.name << "  " << shape
        << "\n";
    total += t.element_count();
  }
  out << weights.size() << " tensors, " << total << " parameters\n";
  return kOk;
}

int cmd_selftest(const Options& o, std::ostream& out) {
  const auto report = run_selftest(o.seed, out);
  out << (report.passed() ? "selftest passed" : "selftest FAILED") << "\n";
  return report.passed() ? kOk : kNumeric;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Zero-shot style transfer with patch-based style decoration"};
  app.name(args.empty() ? "avatar" : fs::path(args.front()).filename().string());
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--threads", o.threads, "Worker threads (default: hardware count)")
      ->check(CLI::NonNegativeNumber);

  auto* stylize = app.add_subcommand("stylize", "Stylize one content image");
  stylize->add_option("--content", o.content, "Content PNG")->required();
  stylize->add_option("--style", o.styles, "Style PNG, optionally PATH:WEIGHT (repeatable)")
      ->required();
  stylize->add_option("--weights", o.weights, "AVTW1 weight file")->required();
  stylize->add_option("--out", o.out, "Output PNG")->required();
  stylize->add_flag("--normalize-weights", o.normalize_weights,
                    "Rescale style weights to sum to 1");
  add_decorator_flags(stylize, o);

  auto* video = app.add_subcommand("video", "Stylize a directory of PNG frames");
  video->add_option("--frames-dir", o.frames_dir, "Directory of input PNG frames")->required();
  video->add_option("--style", o.styles, "Style PNG")->required();
  video->add_option("--weights", o.weights, "AVTW1 weight file")->required();
  video->add_option("--out", o.out, "Output directory")->required();
  add_decorator_flags(video, o);

  auto* inspect = app.add_subcommand("inspect-weights", "Print the tensor table of a weight file");
  inspect->add_option("path", o.inspect_path, "AVTW1 weight file")->required();

  auto* selftest = app.add_subcommand("selftest", "Run randomized numeric self checks");
  selftest->add_option("--seed", o.seed, "Random seed")->capture_default_str();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  }

  set_num_threads(o.threads);
  try {
    if (stylize->parsed()) return cmd_stylize(o, err);
    if (video->parsed()) return cmd_video(o, err);
    if (inspect->parsed()) return cmd_inspect(o, out);
    if (selftest->parsed()) return cmd_selftest(o, out);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const ShapeError& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kIo;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << "\n";
    return kIo;
  } catch (const NumericError& e) {
    err << "error: " << e.what() << "\n";
    return kNumeric;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kIo;
  }
  return kValidation;
}

}  // namespace avatar::cli
