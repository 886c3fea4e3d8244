#pragma once

// Synthetic curve and transform generators shared by tests and the
// acceptance runner.

#include <optional>
#include <random>

#include "shapereg/bitangent.hpp"
#include "shapereg/frames.hpp"
#include "shapereg/level_lines.hpp"

namespace synth {

using shapereg::Bitangent;
using shapereg::Homography;
using shapereg::LevelLine;

// Open sinusoid with five half-periods over 300 px, the middle crest pulled
// down so bitangents over it span four inflections. Resampled.
LevelLine sinuous_curve(std::mt19937_64& rng);

// Projective map centred on (cx, cy): near-identity linear part and a small
// perspective row. The centred matrix has condition number below 50.
Homography random_homography(std::mt19937_64& rng, double cx = 256.0, double cy = 256.0);

// Condition number of the centred part of h.
double centred_condition(const Homography& h, double cx = 256.0, double cy = 256.0);

// First candidate spanning more than two inflections that survives
// refinement and contact snapping.
std::optional<Bitangent> long_bitangent(const LevelLine& line);

}  // namespace synth
