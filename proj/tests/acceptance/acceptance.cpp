// Acceptance runner: one PASS/FAIL line per criterion.
//
// Exit status is 0 when the set of failing criteria equals the set named by
// --expect-fail (empty by default), so a known shortfall stays visible in the
// output without hiding a new regression or a silent fix.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "shapereg/bitangent.hpp"
#include "shapereg/ellipse.hpp"
#include "shapereg/frames.hpp"
#include "shapereg/matching.hpp"
#include "shapereg/pipeline.hpp"
#include "shapereg/preproc.hpp"
#include "shapereg/synthetic.hpp"
#include "support/curves.hpp"
#include "support/oracles.hpp"

using namespace shapereg;

namespace {

constexpr double kPi = std::numbers::pi;

using Clock = std::chrono::steady_clock;
double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// ---------------------------------------------------------------------------
// Sweep line

Outcome sweep_oracle() {
  std::mt19937_64 rng(7001);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  int exact = 0;
  double slowest = 0.0;
  long long total_hits = 0;
  for (int inst = 0; inst < 100; ++inst) {
    std::vector<Segment2> segs(200);
    for (auto& s : segs) {
      s.a = Point(U(rng), U(rng));
      s.b = s.a + 0.3 * Point(U(rng) - 0.5, U(rng) - 0.5);
    }
    const auto t0 = Clock::now();
    const auto hits = sweep_intersections(segs);
    slowest = std::max(slowest, since(t0));

    std::set<std::pair<int, int>> want, got;
    for (int i = 0; i < 200; ++i)
      for (int j = i + 1; j < 200; ++j)
        if (oracle::segments_cross(segs[i].a, segs[i].b, segs[j].a, segs[j].b)) want.insert({i, j});
    for (const auto& h : hits) got.insert({std::min(h.first, h.second), std::max(h.first, h.second)});
    exact += got == want && got.size() == hits.size();
    total_hits += static_cast<long long>(want.size());
  }
  return {exact == 100 && slowest < 1.0,
          fmt("%d/100 exact, %lld intersections, slowest %.4f s (limit 1 s)", exact, total_hits, slowest)};
}

// ---------------------------------------------------------------------------
// Frechet

// Minimum over every monotone coupling of the worst paired distance.
double exhaustive_frechet(const std::vector<Point>& p, const std::vector<Point>& q) {
  const int n = static_cast<int>(p.size()), m = static_cast<int>(q.size());
  double best = std::numeric_limits<double>::infinity();
  std::function<void(int, int, double)> walk = [&](int i, int j, double worst) {
    worst = std::max(worst, (p[i] - q[j]).norm());
    if (i == n - 1 && j == m - 1) {
      best = std::min(best, worst);
      return;
    }
    if (i + 1 < n) walk(i + 1, j, worst);
    if (j + 1 < m) walk(i, j + 1, worst);
    if (i + 1 < n && j + 1 < m) walk(i + 1, j + 1, worst);
  };
  walk(0, 0, 0.0);
  return best;
}

Outcome frechet_oracle() {
  std::mt19937_64 rng(7002);
  std::uniform_int_distribution<int> len(1, 8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto curve = [&](int n) {
    std::vector<Point> c(n);
    for (auto& p : c) p = Point(u(rng), u(rng));
    return c;
  };
  int exact = 0, consistent = 0;
  for (int t = 0; t < 500; ++t) {
    const auto p = curve(len(rng)), q = curve(len(rng));
    const double d = discrete_frechet(p, q);
    exact += d == exhaustive_frechet(p, q);
    const bool at = free_space_reachable(p, q, d).top_right();
    const bool above = free_space_reachable(p, q, d + 1e-9).top_right();
    const bool below = d > 0 ? !free_space_reachable(p, q, d - 1e-9).top_right() : true;
    consistent += at && above && below;
  }
  return {exact == 500 && consistent == 500,
          fmt("%d/500 exact against exhaustive couplings, %d/500 free-space consistent at dF and dF +- 1e-9", exact,
              consistent)};
}

// ---------------------------------------------------------------------------
// Ellipse pair bitangents and usable types

Conic ellipse(Point c, double a, double b, double rot) {
  const double cr = std::cos(rot), sr = std::sin(rot);
  const double A = cr * cr / (a * a) + sr * sr / (b * b);
  const double B = sr * sr / (a * a) + cr * cr / (b * b);
  const double C = 2 * cr * sr * (1 / (a * a) - 1 / (b * b));
  Eigen::Matrix<double, 6, 1> v;
  v << A, B, C, -2 * A * c.x() - C * c.y(), -2 * B * c.y() - C * c.x(),
      A * c.x() * c.x() + B * c.y() * c.y() + C * c.x() * c.y() - 1;
  return Conic::from_vector(v);
}

Outcome analytic_bitangents() {
  const auto far = ellipse_pair_bitangents(ellipse({0, 0}, 1, 1, 0), ellipse({4, 0}, 1, 1, 0));
  std::vector<double> slopes;
  for (const auto& b : far.lines) slopes.push_back(-b.line.a / b.line.b);
  std::sort(slopes.begin(), slopes.end());
  const std::vector<double> want{-1 / std::sqrt(3.0), 0.0, 0.0, 1 / std::sqrt(3.0)};
  double worst = slopes.size() == 4 ? 0.0 : std::numeric_limits<double>::infinity();
  if (slopes.size() == 4)
    for (int i = 0; i < 4; ++i) worst = std::max(worst, std::abs(slopes[i] - want[i]));

  const auto near = ellipse_pair_bitangents(ellipse({0, 0}, 1, 1, 0), ellipse({1, 0}, 1, 1, 0));
  int complex_ev = 0;
  for (const auto& e : near.eigenvalues) complex_ev += std::abs(e.imag()) > 1e-6;
  const bool ok = worst < 1e-6 && near.lines.size() == 2 && complex_ev == 2;
  return {ok, fmt("distance 4: %zu lines, max slope error %.2e (limit 1e-6); distance 1: %zu real, %d complex eigenvalues",
                  far.lines.size(), worst, near.lines.size(), complex_ev)};
}

Outcome usable_types() {
  const Conic a1 = ellipse({0, 0}, 3, 1.5, 0.2), a2 = ellipse({3.5, 0.3}, 3, 1.5, -0.2);
  const auto ll = select_usable(a1, a2, {0, 0.1}, {0.05, 0.1}, ellipse_pair_bitangents(a1, a2).lines);
  const Conic b1 = ellipse({0, 0}, 2, 1, 0.1), b2 = ellipse({8, 1}, 2, 1, 0.35);
  const auto rl = select_usable(b1, b2, {0.1, -0.3}, {-0.1, 0.3}, ellipse_pair_bitangents(b1, b2).lines);
  return {ll.type == BitangentType::LL && rl.type == BitangentType::RL,
          fmt("intersecting -> %s, disjoint -> %s", to_string(ll.type), to_string(rl.type))};
}

// ---------------------------------------------------------------------------
// x sin x

Outcome xsinx_bitangents() {
  LevelLine l;
  l.points = oracle::sample_graph([](double x) { return x * std::sin(x); }, 0, 4 * kPi, 6000, 20.0);
  l = resample_uniform(l, kDefaultSpacing);
  const DualCurve d = dual_curve(l);
  const int n = static_cast<int>(l.points.size());
  int crossings = 0;
  for (int i = 0; i + 1 < n; ++i)
    for (int j = i + 3; j + 1 < n; ++j)
      if (d.segment_valid[i] && d.segment_valid[j] &&
          oracle::segments_cross(d.points[i], d.points[i + 1], d.points[j], d.points[j + 1]))
        ++crossings;
  const auto cands = candidate_bitangents(l, annotate(l));
  return {crossings == 4 && cands.size() == 4,
          fmt("%d dual self-intersections (brute force), %zu candidate bitangents", crossings, cands.size())};
}

// ---------------------------------------------------------------------------
// Projective invariance

// Empty when no frame exists or the frame is unusable.
std::vector<Point> canonical_of(const LevelLine& l, const Bitangent& bt) {
  try {
    const auto portion = frame_portion(l, bt);
    const auto frames = build_frames(bt.p1, bt.p2, cast_points(portion));
    if (frames.empty()) return {};
    return canonical_curve(portion, frames[0]).points;
  } catch (const Error&) {
    return {};
  }
}

// The bitangent of `src` carried to `dst` by vertex index, then re-snapped on
// `dst` (which may be noisy).
std::optional<Bitangent> corresponding(const LevelLine& dst, const Bitangent& src) {
  Bitangent b = src;
  b.p1 = dst.points[b.i1];
  b.p2 = dst.points[b.i2];
  b.line = Line::through(b.p1, b.p2);
  try {
    return snap_contacts(dst, b);
  } catch (const Error&) {
    return std::nullopt;
  }
}

Outcome projective_invariance() {
  std::mt19937_64 rng(7006);
  std::normal_distribution<double> noise(0.0, 0.5);
  int clean_tested = 0, clean_ok = 0, noisy_ok = 0, noisy_unusable = 0;
  double clean_worst = 0.0;
  std::vector<double> noisy_df;
  for (int trial = 0; clean_tested < 50 && trial < 400; ++trial) {
    const auto a = synth::sinuous_curve(rng);
    const Homography h = synth::random_homography(rng);
    const auto bt = synth::long_bitangent(a);
    if (!bt) continue;
    const auto ca = canonical_of(a, *bt);
    if (ca.empty()) continue;
    ++clean_tested;

    LevelLine b = a;
    for (auto& p : b.points) p = apply(h, p);
    const auto bb = corresponding(b, *bt);
    const auto cb = bb ? canonical_of(b, *bb) : std::vector<Point>{};
    const double df = cb.empty() ? std::numeric_limits<double>::infinity() : discrete_frechet(ca, cb);
    clean_worst = std::max(clean_worst, df);
    clean_ok += df < 1e-3;

    LevelLine nb = b;
    for (auto& p : nb.points) p += Point(noise(rng), noise(rng));
    const auto nbt = corresponding(nb, *bt);
    const auto cn = nbt ? canonical_of(nb, *nbt) : std::vector<Point>{};
    const double dn = cn.empty() ? std::numeric_limits<double>::infinity() : discrete_frechet(ca, cn);
    noisy_unusable += cn.empty();
    noisy_df.push_back(dn);
    noisy_ok += dn < 0.05;
  }
  std::sort(noisy_df.begin(), noisy_df.end());
  const double median = noisy_df.empty() ? 0.0 : noisy_df[noisy_df.size() / 2];
  const bool clean_pass = clean_tested == 50 && clean_ok == 50;
  const bool noisy_pass = clean_tested == 50 && noisy_ok >= 45;
  return {clean_pass && noisy_pass,
          fmt("noise-free %d/%d below 1e-3 (worst %.2e); sigma 0.5: %d/%d below 0.05 (need 90%%), %d without a usable frame, median dF %.3f",
              clean_ok, clean_tested, clean_worst, noisy_ok, static_cast<int>(noisy_df.size()), noisy_unusable, median)};
}

// ---------------------------------------------------------------------------
// AMSS

Outcome amss_circle() {
  const Point c(63.5, 63.5);
  const GrayImage disk = oracle::render_disk(128, c, 30.0, 200.0, 0.0);
  const double r = oracle::mean_crossing_radius(amss_smooth(disk, 6.0), c, 100.0, 60.0);
  const double expect = std::pow(std::pow(30.0, 4.0 / 3.0) - 8.0, 0.75);
  const double rel = std::abs(r - expect) / expect;
  return {rel < 0.02, fmt("radius %.3f vs %.3f, relative error %.2f%% (limit 2%%)", r, expect, 100 * rel)};
}

// ---------------------------------------------------------------------------
// Registration on synthetic images

PipelineConfig acceptance_config(std::uint64_t seed, int step) {
  PipelineConfig cfg;
  cfg.levels_step = step;
  cfg.seed = seed;
  return cfg;
}

struct Planted {
  GrayImage whole;
  PlantedPart part;
};

Planted planted(int s) {
  Planted p{synth_whole(100 + s), {}};
  p.part = synth_part(p.whole, 200 + s);
  return p;
}

Outcome end_to_end(int seeds) {
  int ok = 0;
  double slowest = 0.0;
  std::string rmses;
  for (int s = 0; s < seeds; ++s) {
    const auto p = planted(s);
    const auto t0 = Clock::now();
    const auto rep = run_pipeline(p.part.image, p.whole, acceptance_config(s, 1));
    const double secs = since(t0);
    slowest = std::max(slowest, secs);
    const double rmse = rep.transform ? corner_rmse(*rep.transform, p.part.truth, 160, 160) : -1.0;
    const bool good = rep.transform && rmse < 2.0;
    ok += good;
    rmses += rep.transform ? fmt(" %.2f", rmse) : std::string(" fail");
    std::printf("  seed %d: %s, %zu matches, %zu inliers, %.1f s\n", s,
                rep.transform ? fmt("corner RMSE %.3f px", rmse).c_str() : std::string(to_string(*rep.failure)).c_str(),
                rep.matches.size(), rep.inliers.size(), secs);
    std::fflush(stdout);
  }
  return {ok * 10 >= seeds * 8 && slowest < 60.0,
          fmt("%d/%d seeds below 2 px (need 8/10), slowest run %.1f s (limit 60 s); RMSE:%s", ok, seeds, slowest,
              rmses.c_str())};
}

Outcome e1_sweep(int seeds) {
  const int steps[] = {16, 12, 8, 4};
  int monotone = 0;
  std::string rows;
  for (int s = 0; s < seeds; ++s) {
    const auto p = planted(s);
    std::vector<int> counts;
    for (int step : steps) {
      const auto cfg = acceptance_config(s, step);
      counts.push_back(count_planted_consistent(run_pipeline(p.part.image, p.whole, cfg), p.part.truth,
                                                cfg.inlier_tol_px));
    }
    // Non-decreasing within one match: no count falls more than 1 below the
    // running maximum.
    bool ok = true;
    int peak = counts[0];
    for (int c : counts) {
      ok = ok && c >= peak - 1;
      peak = std::max(peak, c);
    }
    monotone += ok;
    rows += fmt(" [%d %d %d %d]", counts[0], counts[1], counts[2], counts[3]);
  }
  return {monotone == seeds, fmt("%d/%d seeds monotone within 1; true matches at steps 16/12/8/4:%s", monotone, seeds,
                                 rows.c_str())};
}

Outcome robust_failure(int seeds) {
  int refused = 0, wrong = 0;
  std::string counts;
  for (int s = 0; s < seeds; ++s) {
    const auto pair = synth_ambiguous(s);
    const auto rep = run_pipeline(pair.part, pair.whole, acceptance_config(s, 1));
    const bool cf = rep.failure && *rep.failure == ErrorCode::ConsensusFailed;
    refused += cf;
    wrong += rep.transform.has_value();
    counts += fmt(" %zu", rep.matches.size());
  }
  return {refused * 10 >= seeds * 9,
          fmt("%d/%d ConsensusFailed (need 9/10), %d transforms returned; matches per seed:%s", refused, seeds, wrong,
              counts.c_str())};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::vector<std::string> expect_fail;
  std::vector<std::string> only;
  app.add_option("--expect-fail", expect_fail, "Criteria known to fail");
  app.add_option("--only", only, "Run just these criteria");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"sweep_oracle", sweep_oracle},
      {"frechet_oracle", frechet_oracle},
      {"analytic_bitangents", analytic_bitangents},
      {"xsinx_four_bitangents", xsinx_bitangents},
      {"usable_types_ll_rl", usable_types},
      {"projective_invariance", projective_invariance},
      {"amss_circle_law", amss_circle},
      {"planted_registration", [] { return end_to_end(10); }},
      {"level_step_sweep", [] { return e1_sweep(10); }},
      {"robust_failure", [] { return robust_failure(10); }},
  };

  std::set<std::string> failed;
  for (const auto& [name, run] : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), name) == only.end()) continue;
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(), since(t0));
    std::fflush(stdout);
    if (!o.pass) failed.insert(name);
  }

  std::set<std::string> expected;
  for (const auto& n : expect_fail)
    if (only.empty() || std::find(only.begin(), only.end(), n) != only.end()) expected.insert(n);
  if (failed != expected) {
    for (const auto& n : failed)
      if (!expected.count(n)) std::printf("unexpected failure: %s\n", n.c_str());
    for (const auto& n : expected)
      if (!failed.count(n)) std::printf("expected failure now passes: %s\n", n.c_str());
    return 1;
  }
  return 0;
}
