#pragma once

#include <cstdint>
#include <optional>

#include "shapereg/image.hpp"
#include "shapereg/matching.hpp"

namespace shapereg {

// Whole image: terraces of a smooth random field. Five contours of the field
// become step edges blurred over a couple of pixels, so each sinuous boundary
// carries a family of level lines.
GrayImage synth_whole(std::uint64_t seed, int size = 512);

struct PlantedPart {
  GrayImage image;
  AffineTransform truth;  // part pixels -> whole pixels
  double gamma = 1.0;     // contrast remap exponent
  bool flipped = false;
  double angle = 0.0;
};

struct PartOptions {
  int size = 160;
  double noise_sigma = 1.0;
  bool allow_flip = true;
  bool quantize = true;  // round to 8-bit as a saved file would
  // Drawn from the seed when unset.
  std::optional<double> angle;
  std::optional<bool> flipped;
  std::optional<double> gamma;
};

// Rotated, optionally mirrored crop of `whole`, contrast remapped by
// 255 (v/255)^gamma and corrupted with Gaussian noise.
PlantedPart synth_part(const GrayImage& whole, std::uint64_t seed, const PartOptions& opts = {});

// Ambiguity construction: a synthetic whole, and a part made of small discs
// cut from random places of the whole, each rotated independently and
// scattered without overlap. Each disc agrees with its source locally, but
// no single transform relates part and whole.
struct AmbiguousPair {
  GrayImage whole;
  GrayImage part;
};
AmbiguousPair synth_ambiguous(std::uint64_t seed, int whole_size = 512, int part_size = 160);

}  // namespace shapereg
