// Monte-Carlo check of bitangent refinement on y = x^4 - x^2 with vertex
// noise. Registered as an expected failure: at sigma = 0.5 px the ellipse
// contact error stays around 1-1.5 px (see README, known limitations).

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "shapereg/ellipse.hpp"
#include "support/oracles.hpp"

using namespace shapereg;

TEST(RefineNoise, QuarticContactsWithinOnePixel) {
  const double scale = 40.0;
  LevelLine clean;
  clean.points = oracle::sample_graph([](double x) { return x * x * x * x - x * x; }, -1.2, 1.2, 6000, scale);
  clean = resample_uniform(clean, kDefaultSpacing);
  const Point c1 = scale * Point(-1 / std::sqrt(2.0), -0.25), c2 = scale * Point(1 / std::sqrt(2.0), -0.25);
  auto err = [&](const Bitangent& b) { return std::max((b.p1 - c1).norm(), (b.p2 - c2).norm()); };

  std::mt19937_64 rng(2024);
  std::normal_distribution<double> noise(0.0, 0.5);
  const int trials = 100;
  int refined = 0, within = 0, better = 0;
  double sum_candidate = 0.0, sum_refined = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    LevelLine l = clean;
    for (auto& p : l.points) p += Point(noise(rng), noise(rng));
    const auto ann = annotate(l);
    const auto cands = candidate_bitangents(l, ann);
    const Bitangent* best = nullptr;
    for (const auto& b : cands)
      if (!best || err(b) < err(*best)) best = &b;
    if (!best) continue;
    try {
      const Bitangent r = refine_bitangent(l, ann, *best);
      ++refined;
      within += err(r) < 1.0;
      better += err(r) < err(*best);
      sum_candidate += err(*best);
      sum_refined += err(r);
    } catch (const Error&) {
    }
  }
  RecordProperty("refined", refined);
  RecordProperty("within_1px", within);
  RecordProperty("better", better);
  std::printf("refined %d/%d, within 1 px %d, better than candidate %d, mean error %.2f -> %.2f px\n", refined,
              trials, within, better, sum_candidate / std::max(refined, 1), sum_refined / std::max(refined, 1));
  EXPECT_EQ(within, trials);
  EXPECT_GE(better, 90);
}
