#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "shapereg/pipeline.hpp"
#include "shapereg/synthetic.hpp"

namespace fs = std::filesystem;
using namespace shapereg;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitCannotRegister = 2;

struct CommonArgs {
  std::string part, whole, config;
  std::optional<std::uint64_t> seed;
  std::optional<int> levels_step;
  std::string levels_around;
  std::optional<int> halfwidth;
  std::vector<std::string> overrides;  // key=value
};

void add_common(CLI::App* app, CommonArgs& a) {
  app->add_option("--part", a.part, "Part image (PGM or PNG)");
  app->add_option("--whole", a.whole, "Whole image (PGM or PNG)");
  app->add_option("--config", a.config, "Flat key = value config file")->required()->check(CLI::ExistingFile);
  app->add_option("--seed", a.seed, "RANSAC seed (overrides the config)");
  app->add_option("--levels-step", a.levels_step, "Level step: 16, 12, 8, 4 or 1");
  app->add_option("--levels-around", a.levels_around, "Comma-separated centre levels");
  app->add_option("--halfwidth", a.halfwidth, "Halfwidth around each centre level (5-20)");
  app->add_option("--set", a.overrides, "Override any config key: --set key=value")->take_all();
}

PipelineConfig build_config(const CommonArgs& a) {
  PipelineConfig cfg = load_config(a.config);
  if (!a.part.empty()) cfg.part_path = a.part;
  if (!a.whole.empty()) cfg.whole_path = a.whole;
  for (const auto& kv : a.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::InvalidConfig, "--set expects key=value, got '" + kv + "'");
    set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (a.seed) cfg.seed = *a.seed;
  if (a.levels_step) set_config_value(cfg, "levels_step", std::to_string(*a.levels_step));
  if (!a.levels_around.empty()) set_config_value(cfg, "levels_around", a.levels_around);
  if (a.halfwidth) cfg.halfwidth = *a.halfwidth;
  validate(cfg);
  if (cfg.part_path.empty() || cfg.whole_path.empty()) {
    throw Error(ErrorCode::InvalidConfig, "part and whole images are required (--part/--whole or config keys)");
  }
  return cfg;
}

AffineTransform load_truth(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::Io, "cannot read truth file " + path);
  const auto j = nlohmann::json::parse(is, nullptr, false);
  if (j.is_discarded() || !j.contains("transform") || j["transform"].size() != 6) {
    throw Error(ErrorCode::InvalidConfig, "truth file needs a \"transform\" array of 6 numbers (row-major 2x3)");
  }
  const auto t = j["transform"].get<std::vector<double>>();
  AffineTransform a;
  a.linear << t[0], t[1], t[3], t[4];
  a.translation = Point(t[2], t[5]);
  return a;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorCode::Io, "cannot write " + path);
  os << text;
}

int run_register(const CommonArgs& args, const std::string& out, const std::string& overlay, const std::string& truth) {
  const PipelineConfig cfg = build_config(args);
  const GrayImage part = load_image(cfg.part_path);
  const GrayImage whole = load_image(cfg.whole_path);
  StageTimings t;
  const auto pa = analyse_image(part, cfg, &t);
  const auto wa = analyse_image(whole, cfg, &t);
  auto rep = register_analyses(pa, wa, cfg);
  rep.timings.preprocess_s = t.preprocess_s;
  rep.timings.level_lines_s = t.level_lines_s;
  rep.timings.elements_s = t.elements_s;
  std::optional<AffineTransform> tr;
  if (!truth.empty()) tr = load_truth(truth);
  const std::string json = report_json(rep, true, tr, cfg.inlier_tol_px);
  if (out.empty()) std::cout << json << '\n';
  else write_text(out, json);
  if (!overlay.empty()) write_text(overlay, overlay_svg(rep, pa, wa));
  if (rep.success()) {
    const auto m = rep.transform->row_major();
    std::fprintf(stderr, "registered: %zu matches, %zu inliers, transform [%.6g %.6g %.6g; %.6g %.6g %.6g]\n",
                 rep.matches.size(), rep.inliers.size(), m[0], m[1], m[2], m[3], m[4], m[5]);
    return kExitOk;
  }
  std::fprintf(stderr, "cannot register: %s\n", rep.failure_message.c_str());
  return kExitCannotRegister;
}

std::vector<int> parse_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stoi(item));
  return out;
}

int run_sweep(const CommonArgs& args, const std::string& truth_path, const std::string& steps,
              const std::string& halfwidths, const std::string& out) {
  const PipelineConfig base = build_config(args);
  const AffineTransform truth = load_truth(truth_path);
  const GrayImage part = load_image(base.part_path);
  const GrayImage whole = load_image(base.whole_path);
  std::vector<std::pair<std::string, PipelineConfig>> settings;
  if (!halfwidths.empty()) {
    if (base.levels_around.empty()) throw Error(ErrorCode::InvalidConfig, "--halfwidths needs --levels-around");
    for (int h : parse_list(halfwidths)) {
      PipelineConfig c = base;
      c.halfwidth = h;
      settings.emplace_back("halfwidth=" + std::to_string(h), c);
    }
  } else {
    for (int s : parse_list(steps)) {
      PipelineConfig c = base;
      c.levels_around.clear();
      c.levels_step = s;
      settings.emplace_back("levels_step=" + std::to_string(s), c);
    }
  }
  std::ostringstream csv;
  csv << "setting,true_matches,false_matches,success,corner_rmse_px\n";
  for (const auto& [name, cfg] : settings) {
    validate(cfg);
    const auto rep = run_pipeline(part, whole, cfg);
    const int good = count_planted_consistent(rep, truth, cfg.inlier_tol_px);
    const double rmse = rep.transform ? corner_rmse(*rep.transform, truth, part.width(), part.height()) : -1.0;
    const bool ok = rep.transform && rmse < 2.0;
    csv << name << ',' << good << ',' << static_cast<int>(rep.matches.size()) - good << ',' << (ok ? 1 : 0) << ','
        << rmse << '\n';
    std::fprintf(stderr, "%s: %d true, %d false, %s\n", name.c_str(), good,
                 static_cast<int>(rep.matches.size()) - good, ok ? "success" : "failure");
  }
  if (out.empty()) std::cout << csv.str();
  else write_text(out, csv.str());
  return kExitOk;
}

int run_synth(std::uint64_t seed, const std::string& dir, bool ambiguous, std::optional<double> angle_deg,
              std::optional<int> flip, std::optional<double> gamma) {
  fs::create_directories(dir);
  const fs::path d(dir);
  if (ambiguous) {
    const auto pair = synth_ambiguous(seed);
    save_pgm(pair.whole, d / "whole.pgm");
    save_pgm(pair.part, d / "part.pgm");
    return kExitOk;
  }
  const GrayImage whole = synth_whole(seed);
  PartOptions opts;
  if (angle_deg) opts.angle = *angle_deg * std::numbers::pi / 180.0;
  if (flip) opts.flipped = *flip != 0;
  if (gamma) opts.gamma = *gamma;
  const auto planted = synth_part(whole, seed + 1, opts);
  save_pgm(whole, d / "whole.pgm");
  save_pgm(planted.image, d / "part.pgm");
  nlohmann::json j = {{"transform", planted.truth.row_major()},
                      {"angle_deg", planted.angle * 180.0 / std::numbers::pi},
                      {"flipped", planted.flipped},
                      {"gamma", planted.gamma},
                      {"seed", seed}};
  write_text((d / "truth.json").string(), j.dump(2) + "\n");
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Part-to-whole image registration by level-line shape elements"};
  app.require_subcommand(1);

  CommonArgs reg_args;
  std::string out, overlay, truth;
  auto* reg = app.add_subcommand("register", "Register a part image into a whole image");
  add_common(reg, reg_args);
  reg->add_option("--out", out, "Write the JSON report here instead of stdout");
  reg->add_option("--overlay", overlay, "Write an SVG overlay");
  reg->add_option("--truth", truth, "Known transform (JSON) to flag planted-consistent matches");

  CommonArgs sweep_args;
  std::string sweep_truth, steps = "16,12,8,4", halfwidths, sweep_out;
  auto* sweep = app.add_subcommand("sweep", "Re-run registration over level settings, CSV out");
  add_common(sweep, sweep_args);
  sweep->add_option("--truth", sweep_truth, "Known transform (JSON)")->required()->check(CLI::ExistingFile);
  sweep->add_option("--levels-steps", steps, "Comma-separated level steps");
  sweep->add_option("--halfwidths", halfwidths, "Comma-separated halfwidths (with --levels-around)");
  sweep->add_option("--out", sweep_out, "CSV path (default stdout)");

  std::uint64_t synth_seed = 0;
  std::string synth_dir = ".";
  bool ambiguous = false;
  std::optional<double> angle, gamma;
  std::optional<int> flip;
  auto* synth = app.add_subcommand("synth", "Write a synthetic whole/part pair and its truth");
  synth->add_option("--seed", synth_seed, "Generator seed")->required();
  synth->add_option("--out-dir", synth_dir, "Output directory");
  synth->add_flag("--ambiguous", ambiguous, "Scrambled-disc part with no global transform");
  synth->add_option("--angle", angle, "Rotation in degrees (default drawn from the seed)");
  synth->add_option("--flip", flip, "1 to mirror the part, 0 not to");
  synth->add_option("--gamma", gamma, "Contrast remap exponent");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }
  try {
    if (reg->parsed()) return run_register(reg_args, out, overlay, truth);
    if (sweep->parsed()) return run_sweep(sweep_args, sweep_truth, steps, halfwidths, sweep_out);
    if (synth->parsed()) return run_synth(synth_seed, synth_dir, ambiguous, angle, flip, gamma);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  }
  return kExitUsage;
}
