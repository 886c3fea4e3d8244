#include "shapereg/pipeline.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <charconv>
#include <chrono>
#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "shapereg/bitangent.hpp"
#include "shapereg/ellipse.hpp"
#include "shapereg/frames.hpp"
#include "shapereg/preproc.hpp"

namespace shapereg {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const std::string& expected) {
  throw Error(ErrorCode::InvalidConfig, "key '" + key + "': cannot use '" + value + "', expected " + expected);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  T out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size()) {
    bad_value(key, value, std::is_integral_v<T> ? "an integer" : "a number");
  }
  return out;
}

std::vector<int> parse_int_list(const std::string& key, const std::string& value) {
  std::vector<int> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number<int>(key, item));
  if (out.empty()) bad_value(key, value, "a comma-separated list of integers");
  return out;
}

[[noreturn]] void out_of_range(const std::string& key, const std::string& range) {
  throw Error(ErrorCode::InvalidConfig, "key '" + key + "' must be " + range);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Runs body(i) for i in [0, n) on a small pool. Each index writes only its
// own slot, so the merged result does not depend on scheduling.
void parallel_for(int n, int threads, const std::function<void(int)>& body) {
  if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

struct LineResult {
  int candidates = 0;
  int refined = 0;
  int pruned = 0;
  std::vector<ShapeElement> elements;
  std::map<std::string, int> errors;
};

LineResult analyse_line(const LevelLine& line, int line_index, const PipelineConfig& cfg) {
  LineResult out;
  auto tally = [&](const Error& e) { ++out.errors[to_string(e.code())]; };
  CurveAnnotation ann;
  std::vector<Bitangent> candidates;
  try {
    ann = annotate(line);
    candidates = candidate_bitangents(line, ann);
  } catch (const Error& e) {
    tally(e);
    return out;
  }
  out.candidates = static_cast<int>(candidates.size());
  std::vector<Bitangent> refined;
  for (const auto& c : candidates) {
    // Two-inflection bitangents never reach the band, fallback included.
    if (c.inflection_length < 3 || c.inflection_length > cfg.max_len) continue;
    try {
      refined.push_back(refine_bitangent(line, ann, c));
    } catch (const Error& e) {
      tally(e);
    }
  }
  out.refined = static_cast<int>(refined.size());
  const auto pruned = prune_bitangents(refined);
  out.pruned = static_cast<int>(pruned.size());
  FrameOptions fopts;
  fopts.max_frames = cfg.max_frames;
  for (int bi = 0; bi < static_cast<int>(pruned.size()); ++bi) {
    try {
      const Bitangent bt = snap_contacts(line, pruned[bi]);
      const Polyline portion = frame_portion(line, bt);
      const auto frames = build_frames(portion.front(), portion.back(), cast_points(portion), fopts);
      for (int fi = 0; fi < static_cast<int>(frames.size()); ++fi) {
        try {
          ShapeElement el;
          el.canonical = canonical_curve(portion, frames[fi]);
          el.canonical.level = line.level;
          el.canonical.bitangent = bi;
          el.canonical.frame = fi;
          el.frame = frames[fi];
          el.inflection_length = bt.inflection_length;
          el.line = line_index;
          out.elements.push_back(std::move(el));
        } catch (const Error& e) {
          tally(e);
        }
      }
    } catch (const Error& e) {
      tally(e);
    }
  }
  return out;
}

nlohmann::json point_json(const Point& p) { return nlohmann::json::array({p.x(), p.y()}); }

nlohmann::json stats_json(const ImageStats& s) {
  return {{"level_lines", s.level_lines}, {"lines_used", s.lines_used}, {"candidates", s.candidates},
          {"refined", s.refined},         {"pruned", s.pruned},         {"elements", s.elements},
          {"band_elements", s.band_elements}, {"errors", s.errors}};
}

nlohmann::json element_json(const ShapeElement& e) {
  return {{"line", e.line},
          {"level", e.canonical.level},
          {"inflections", e.inflection_length},
          {"frame", {point_json(e.frame.b1), point_json(e.frame.c1), point_json(e.frame.c2), point_json(e.frame.b2)}}};
}

}  // namespace

void set_config_value(PipelineConfig& cfg, const std::string& raw_key, const std::string& value) {
  std::string key = trim(raw_key);
  std::replace(key.begin(), key.end(), '-', '_');
  const std::string v = trim(value);
  if (key == "part") cfg.part_path = v;
  else if (key == "whole") cfg.whole_path = v;
  else if (key == "levels_step") cfg.levels_step = parse_number<int>(key, v), cfg.levels_around.clear();
  else if (key == "levels_around") cfg.levels_around = parse_int_list(key, v);
  else if (key == "halfwidth") cfg.halfwidth = parse_number<int>(key, v);
  else if (key == "amss_scale") cfg.amss_scale = parse_number<double>(key, v);
  else if (key == "bias_degrees") {
    const auto d = parse_int_list(key, v);
    if (d.size() != 2) bad_value(key, v, "two integers m,n");
    cfg.bias_m = d[0], cfg.bias_n = d[1];
  } else if (key == "min_line_length") cfg.min_line_length = parse_number<double>(key, v);
  else if (key == "min_len") cfg.min_len = parse_number<int>(key, v);
  else if (key == "max_len") cfg.max_len = parse_number<int>(key, v);
  else if (key == "band_slack") cfg.band_slack = parse_number<int>(key, v);
  else if (key == "match_threshold") cfg.match_threshold = parse_number<double>(key, v);
  else if (key == "max_frames") cfg.max_frames = parse_number<int>(key, v);
  else if (key == "ransac_iterations") cfg.ransac_iterations = parse_number<int>(key, v);
  else if (key == "inlier_tol_px") cfg.inlier_tol_px = parse_number<double>(key, v);
  else if (key == "min_inliers") cfg.min_inliers = parse_number<int>(key, v);
  else if (key == "distinct_radius_px") cfg.distinct_radius_px = parse_number<double>(key, v);
  else if (key == "seed") cfg.seed = parse_number<std::uint64_t>(key, v);
  else if (key == "threads") cfg.threads = parse_number<int>(key, v);
  else throw Error(ErrorCode::InvalidConfig, "unknown key '" + raw_key + "'");
}

PipelineConfig parse_config(std::istream& is) {
  PipelineConfig cfg;
  std::string line;
  int n = 0;
  while (std::getline(is, line)) {
    ++n;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::InvalidConfig, "line " + std::to_string(n) + ": expected key = value");
    }
    set_config_value(cfg, line.substr(0, eq), line.substr(eq + 1));
  }
  return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::Io, "cannot read config " + path.string());
  return parse_config(is);
}

void validate(const PipelineConfig& cfg) {
  if (!cfg.seed) throw Error(ErrorCode::InvalidConfig, "key 'seed' is required");
  if (cfg.levels_around.empty()) {
    const int s = cfg.levels_step;
    if (s != 16 && s != 12 && s != 8 && s != 4 && s != 1) out_of_range("levels_step", "one of 16, 12, 8, 4, 1");
  } else {
    for (int c : cfg.levels_around)
      if (c < 0 || c > 255) out_of_range("levels_around", "a list of levels in [0, 255]");
    if (cfg.halfwidth < 5 || cfg.halfwidth > 20) out_of_range("halfwidth", "in [5, 20]");
  }
  if (!(cfg.amss_scale >= 0.0 && cfg.amss_scale <= 20.0)) out_of_range("amss_scale", "in [0, 20]");
  if (cfg.bias_m < 0 || cfg.bias_m > 6 || cfg.bias_n < 0 || cfg.bias_n > 6) out_of_range("bias_degrees", "in [0, 6]");
  if (!(cfg.min_line_length >= 0.0)) out_of_range("min_line_length", "non-negative");
  if (cfg.min_len < 3 || cfg.max_len < cfg.min_len || cfg.max_len > 64) {
    out_of_range("min_len/max_len", "3 <= min_len <= max_len <= 64");
  }
  if (cfg.band_slack < 0 || cfg.band_slack > 10) out_of_range("band_slack", "in [0, 10]");
  if (!(cfg.match_threshold >= 0.0 && cfg.match_threshold <= 2.0)) out_of_range("match_threshold", "in [0, 2]");
  if (cfg.max_frames < 1 || cfg.max_frames > 16) out_of_range("max_frames", "in [1, 16]");
  if (cfg.ransac_iterations < 1 || cfg.ransac_iterations > 10'000'000) {
    out_of_range("ransac_iterations", "in [1, 10000000]");
  }
  if (!(cfg.inlier_tol_px > 0.0 && cfg.inlier_tol_px <= 100.0)) out_of_range("inlier_tol_px", "in (0, 100]");
  if (cfg.min_inliers < 1) out_of_range("min_inliers", "at least 1");
  if (!(cfg.distinct_radius_px >= 0.0)) out_of_range("distinct_radius_px", "non-negative");
  if (cfg.threads < 0) out_of_range("threads", "non-negative");
}

std::vector<double> config_levels(const PipelineConfig& cfg) {
  if (!cfg.levels_around.empty()) return levels_around(cfg.levels_around, cfg.halfwidth);
  return levels_by_step(cfg.levels_step);
}

ImageAnalysis analyse_image(const GrayImage& img, const PipelineConfig& cfg, StageTimings* timings) {
  validate(img);
  ImageAnalysis out;
  auto t0 = std::chrono::steady_clock::now();
  GrayImage work = img;
  if (cfg.bias_m > 0 || cfg.bias_n > 0) work = correct_bias(work, fit_bias(work, cfg.bias_m, cfg.bias_n));
  out.smoothed = cfg.amss_scale > 0.0 ? amss_smooth(work, cfg.amss_scale) : work;
  if (timings) timings->preprocess_s += seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  const auto levels = config_levels(cfg);
  const auto raw = extract_level_lines(out.smoothed, levels);
  out.stats.level_lines = static_cast<int>(raw.size());
  for (const auto& l : raw) {
    if (polyline_length(l.points, l.closed) < cfg.min_line_length) continue;
    try {
      out.lines.push_back(resample_uniform(l));
    } catch (const Error& e) {
      ++out.stats.errors[to_string(e.code())];
    }
  }
  out.stats.lines_used = static_cast<int>(out.lines.size());
  if (timings) timings->level_lines_s += seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  std::vector<LineResult> per_line(out.lines.size());
  parallel_for(static_cast<int>(out.lines.size()), cfg.threads,
               [&](int i) { per_line[i] = analyse_line(out.lines[i], i, cfg); });
  for (auto& r : per_line) {
    out.stats.candidates += r.candidates;
    out.stats.refined += r.refined;
    out.stats.pruned += r.pruned;
    for (const auto& [code, count] : r.errors) out.stats.errors[code] += count;
    for (auto& e : r.elements) out.elements.push_back(std::move(e));
  }
  out.stats.elements = static_cast<int>(out.elements.size());
  if (timings) timings->elements_s += seconds_since(t0);
  return out;
}

RegistrationReport register_analyses(const ImageAnalysis& part, const ImageAnalysis& whole,
                                     const PipelineConfig& cfg) {
  validate(cfg);
  RegistrationReport rep;
  rep.part = part.stats;
  rep.whole = whole.stats;
  auto t0 = std::chrono::steady_clock::now();
  rep.band = effective_band(part.elements, InflectionBand{cfg.min_len, cfg.max_len});
  if (!rep.band) {
    rep.failure = ErrorCode::NoShapeElements;
    rep.failure_message = "part has no shape element with at least 3 inflections";
    return rep;
  }
  rep.part_elements = filter_band(part.elements, *rep.band);
  // The whole keeps band_slack below the band so counts may differ across modalities.
  const InflectionBand whole_band{std::max(3, rep.band->min_len - cfg.band_slack), rep.band->max_len + cfg.band_slack};
  rep.whole_elements = filter_band(whole.elements, whole_band);
  rep.part.band_elements = static_cast<int>(rep.part_elements.size());
  rep.whole.band_elements = static_cast<int>(rep.whole_elements.size());
  if (rep.whole_elements.empty()) {
    rep.failure = ErrorCode::NoShapeElements;
    rep.failure_message = "whole has no shape element inside the inflection band";
    return rep;
  }
  for (const auto& p : rep.part_elements)
    for (const auto& w : rep.whole_elements)
      if (std::abs(p.inflection_length - w.inflection_length) <= cfg.band_slack) ++rep.comparisons;

  // Rows are independent per part element; split them across threads and
  // concatenate in part order.
  const int np = static_cast<int>(rep.part_elements.size());
  std::vector<std::vector<Match>> rows(np);
  const MatchOptions mopts{cfg.match_threshold, cfg.band_slack};
  parallel_for(np, cfg.threads, [&](int i) {
    rows[i] = match_elements(std::span(rep.part_elements).subspan(i, 1), rep.whole_elements, mopts);
    for (auto& m : rows[i]) m.part = i;
  });
  for (auto& r : rows) rep.matches.insert(rep.matches.end(), r.begin(), r.end());
  rep.timings.matching_s = seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  RansacOptions ropts;
  ropts.iterations = cfg.ransac_iterations;
  ropts.inlier_tol_px = cfg.inlier_tol_px;
  ropts.min_inliers = cfg.min_inliers;
  ropts.distinct_radius_px = cfg.distinct_radius_px;
  ropts.seed = *cfg.seed;
  try {
    if (rep.matches.empty()) throw Error(ErrorCode::ConsensusFailed, "no element pair within the match threshold");
    auto r = ransac_affine(rep.matches, rep.part_elements, rep.whole_elements, ropts);
    rep.transform = r.transform;
    rep.inliers = std::move(r.inliers);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::ConsensusFailed && e.code() != ErrorCode::DegenerateCorrespondences) throw;
    rep.failure = ErrorCode::ConsensusFailed;
    rep.failure_message = e.what();
  }
  rep.timings.ransac_s = seconds_since(t0);
  return rep;
}

RegistrationReport run_pipeline(const GrayImage& part, const GrayImage& whole, const PipelineConfig& cfg) {
  validate(cfg);
  StageTimings t;
  const auto pa = analyse_image(part, cfg, &t);
  const auto wa = analyse_image(whole, cfg, &t);
  auto rep = register_analyses(pa, wa, cfg);
  rep.timings.preprocess_s = t.preprocess_s;
  rep.timings.level_lines_s = t.level_lines_s;
  rep.timings.elements_s = t.elements_s;
  return rep;
}

RegistrationReport run_pipeline(const PipelineConfig& cfg) {
  validate(cfg);
  if (cfg.part_path.empty()) throw Error(ErrorCode::InvalidConfig, "key 'part' is required");
  if (cfg.whole_path.empty()) throw Error(ErrorCode::InvalidConfig, "key 'whole' is required");
  return run_pipeline(load_image(cfg.part_path), load_image(cfg.whole_path), cfg);
}

bool planted_consistent(const RegistrationReport& rep, int match, const AffineTransform& truth, double tol_px) {
  const Match& m = rep.matches.at(match);
  std::array<Point, 3> src, dst;
  match_correspondences(rep.part_elements[m.part], rep.whole_elements[m.whole], m.flipped, src, dst);
  for (int j = 0; j < 3; ++j)
    if (!((truth(src[j]) - dst[j]).norm() <= tol_px)) return false;
  return true;
}

int count_planted_consistent(const RegistrationReport& rep, const AffineTransform& truth, double tol_px) {
  int n = 0;
  for (int i = 0; i < static_cast<int>(rep.matches.size()); ++i) n += planted_consistent(rep, i, truth, tol_px);
  return n;
}

double corner_rmse(const AffineTransform& a, const AffineTransform& b, int width, int height) {
  const double x1 = width - 1, y1 = height - 1;
  double acc = 0.0;
  for (const Point& c : {Point(0, 0), Point(x1, 0), Point(0, y1), Point(x1, y1)}) acc += (a(c) - b(c)).squaredNorm();
  return std::sqrt(acc / 4.0);
}

std::string report_json(const RegistrationReport& rep, bool with_timings, const std::optional<AffineTransform>& truth,
                        double truth_tol_px) {
  nlohmann::json j;
  j["success"] = rep.success();
  if (rep.transform) j["transform"] = rep.transform->row_major();
  else j["transform"] = nullptr;
  if (rep.failure) {
    j["failure"] = {{"code", to_string(*rep.failure)}, {"message", rep.failure_message}};
  } else {
    j["failure"] = nullptr;
  }
  j["counts"] = {{"part", stats_json(rep.part)}, {"whole", stats_json(rep.whole)},
                 {"comparisons", rep.comparisons}, {"matches", rep.matches.size()}, {"inliers", rep.inliers.size()}};
  if (rep.band) j["band"] = {rep.band->min_len, rep.band->max_len};
  else j["band"] = nullptr;
  nlohmann::json matches = nlohmann::json::array();
  for (int i = 0; i < static_cast<int>(rep.matches.size()); ++i) {
    const auto& m = rep.matches[i];
    matches.push_back({{"part", m.part},
                       {"whole", m.whole},
                       {"distance", m.distance},
                       {"flipped", m.flipped},
                       {"inlier", std::binary_search(rep.inliers.begin(), rep.inliers.end(), i)},
                       {"planted_consistent", truth ? nlohmann::json(planted_consistent(rep, i, *truth, truth_tol_px))
                                                    : nlohmann::json(nullptr)},
                       {"part_element", element_json(rep.part_elements[m.part])},
                       {"whole_element", element_json(rep.whole_elements[m.whole])}});
  }
  j["matches"] = std::move(matches);
  j["inliers"] = rep.inliers;
  if (with_timings) {
    j["timings_s"] = {{"preprocess", rep.timings.preprocess_s}, {"level_lines", rep.timings.level_lines_s},
                      {"elements", rep.timings.elements_s},     {"matching", rep.timings.matching_s},
                      {"ransac", rep.timings.ransac_s}};
  }
  return j.dump(2);
}

std::string overlay_svg(const RegistrationReport& rep, const ImageAnalysis& part, const ImageAnalysis& whole) {
  std::ostringstream os;
  os << std::setprecision(10);
  const int w = whole.smoothed.width(), h = whole.smoothed.height();
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\" viewBox=\"0 0 " << w
     << ' ' << h << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  auto polyline = [&](const LevelLine& l, const AffineTransform* t, const char* cls) {
    os << "<polyline class=\"" << cls << "\" fill=\"none\" points=\"";
    for (std::size_t i = 0; i < l.points.size(); ++i) {
      const Point p = t ? (*t)(l.points[i]) : l.points[i];
      os << (i ? " " : "") << p.x() << ',' << p.y();
    }
    if (l.closed && !l.points.empty()) {
      const Point p = t ? (*t)(l.points.front()) : l.points.front();
      os << ' ' << p.x() << ',' << p.y();
    }
    os << "\"/>\n";
  };
  os << "<g id=\"whole-lines\" stroke=\"#4a7ab5\" stroke-width=\"0.5\">\n";
  for (const auto& l : whole.lines) polyline(l, nullptr, "whole");
  os << "</g>\n";
  const AffineTransform* t = rep.transform ? &*rep.transform : nullptr;
  os << "<g id=\"part-lines\" stroke=\"#e07b20\" stroke-width=\"0.5\">\n";
  for (const auto& l : part.lines) polyline(l, t, "part");
  os << "</g>\n";
  os << "<g id=\"frames\" fill=\"none\" stroke-width=\"1\">\n";
  for (int i = 0; i < static_cast<int>(rep.matches.size()); ++i) {
    const auto& m = rep.matches[i];
    const bool inlier = std::binary_search(rep.inliers.begin(), rep.inliers.end(), i);
    const char* colour = inlier ? "#2a9d3a" : "#b0b0b0";
    auto quad = [&](const Frame& f, const AffineTransform* tr, const char* cls) {
      os << "<polygon class=\"" << cls << "\" stroke=\"" << colour << "\" points=\"";
      bool first = true;
      for (const auto& c : f.corners()) {
        const Point p = tr ? (*tr)(c) : c;
        os << (first ? "" : " ") << p.x() << ',' << p.y();
        first = false;
      }
      os << "\"/>\n";
    };
    quad(rep.whole_elements[m.whole].frame, nullptr, inlier ? "whole-frame inlier" : "whole-frame");
    quad(rep.part_elements[m.part].frame, t, inlier ? "part-frame inlier" : "part-frame");
  }
  os << "</g>\n";
  if (rep.failure) {
    os << "<g id=\"failure\"><rect x=\"0\" y=\"0\" width=\"" << w
       << "\" height=\"24\" fill=\"#c0392b\" opacity=\"0.85\"/><text x=\"6\" y=\"17\" fill=\"white\" "
          "font-family=\"sans-serif\" font-size=\"14\">registration failed: "
       << to_string(*rep.failure) << "</text></g>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace shapereg
