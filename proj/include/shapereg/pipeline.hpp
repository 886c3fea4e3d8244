#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "shapereg/common.hpp"
#include "shapereg/image.hpp"
#include "shapereg/level_lines.hpp"
#include "shapereg/matching.hpp"

namespace shapereg {

struct PipelineConfig {
  std::string part_path;
  std::string whole_path;

  // Either a step in {16, 12, 8, 4, 1} or explicit centres with a halfwidth.
  int levels_step = 8;
  std::vector<int> levels_around;
  int halfwidth = 10;

  double amss_scale = 2.0;
  int bias_m = 0;  // 0,0 skips bias correction
  int bias_n = 0;

  double min_line_length = 40.0;  // px, after resampling
  int min_len = 6;
  int max_len = 10;
  int band_slack = 2;
  double match_threshold = 0.15;
  int max_frames = 3;

  int ransac_iterations = 2000;
  double inlier_tol_px = 5.0;
  int min_inliers = 3;
  double distinct_radius_px = 12.0;
  std::optional<std::uint64_t> seed;

  int threads = 0;  // 0: hardware concurrency
};

// Sets one key (dashes and underscores are interchangeable). Throws
// InvalidConfig for unknown keys or unparsable values.
void set_config_value(PipelineConfig& cfg, const std::string& key, const std::string& value);
// Flat `key = value` lines; `#` starts a comment.
PipelineConfig parse_config(std::istream& is);
PipelineConfig load_config(const std::filesystem::path& path);
// Throws InvalidConfig naming the offending key. Paths are not checked.
void validate(const PipelineConfig& cfg);
std::vector<double> config_levels(const PipelineConfig& cfg);

struct ImageStats {
  int level_lines = 0;
  int lines_used = 0;  // long enough to analyse
  int candidates = 0;
  int refined = 0;
  int pruned = 0;
  int elements = 0;       // all frames built
  int band_elements = 0;  // inside the inflection band
  std::map<std::string, int> errors;  // per error code
};

struct StageTimings {
  double preprocess_s = 0.0;
  double level_lines_s = 0.0;
  double elements_s = 0.0;
  double matching_s = 0.0;
  double ransac_s = 0.0;
};

struct ImageAnalysis {
  GrayImage smoothed;
  std::vector<LevelLine> lines;        // resampled lines that were analysed
  std::vector<ShapeElement> elements;  // every frame; element.line indexes `lines`
  ImageStats stats;
};

struct RegistrationReport {
  ImageStats part;
  ImageStats whole;
  std::optional<InflectionBand> band;
  long long comparisons = 0;  // element pairs inside the band slack
  std::vector<ShapeElement> part_elements;   // band-filtered, referenced by matches
  std::vector<ShapeElement> whole_elements;  // band-filtered, referenced by matches
  std::vector<Match> matches;
  std::vector<int> inliers;  // indices into matches
  std::optional<AffineTransform> transform;
  std::optional<ErrorCode> failure;
  std::string failure_message;
  StageTimings timings;

  bool success() const { return transform.has_value(); }
};

// Smoothing, level lines and shape elements of one image. Per-line stage
// errors are tallied in stats.errors.
ImageAnalysis analyse_image(const GrayImage& img, const PipelineConfig& cfg, StageTimings* timings = nullptr);

// Band selection, cross-comparison and RANSAC on analysed images.
RegistrationReport register_analyses(const ImageAnalysis& part, const ImageAnalysis& whole,
                                     const PipelineConfig& cfg);

RegistrationReport run_pipeline(const GrayImage& part, const GrayImage& whole, const PipelineConfig& cfg);
// Loads cfg.part_path and cfg.whole_path. Throws Io or InvalidConfig.
RegistrationReport run_pipeline(const PipelineConfig& cfg);

// Evaluation against a known part -> whole transform. A match is planted
// consistent when all three of its correspondences land within tol_px.
bool planted_consistent(const RegistrationReport& report, int match, const AffineTransform& truth, double tol_px);
int count_planted_consistent(const RegistrationReport& report, const AffineTransform& truth, double tol_px);
// RMS distance between the images of the four corners of a width x height
// part under the two transforms.
double corner_rmse(const AffineTransform& a, const AffineTransform& b, int width, int height);

// JSON report. Timings are omitted when `with_timings` is false, which makes
// the output a pure function of inputs and config.
// With a truth transform, each match carries a planted_consistent flag.
std::string report_json(const RegistrationReport& report, bool with_timings = true,
                        const std::optional<AffineTransform>& truth = std::nullopt, double truth_tol_px = 5.0);

// SVG in whole-image pixels: whole lines, part lines (transformed when the run
// succeeded, untransformed otherwise), matched frames and, on failure, a
// banner element with id "failure".
std::string overlay_svg(const RegistrationReport& report, const ImageAnalysis& part, const ImageAnalysis& whole);

}  // namespace shapereg
