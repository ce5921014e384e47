#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "winstitch/image.hpp"

namespace winstitch {

// Smooth random Gaussian-blob fields, one per class, thresholded per pixel
// into a one-hot class map (argmax across channels; a single class yields a
// binary mask). Deterministic in the generator state.
ImageTensor make_class_map(int height, int width, int classes, std::mt19937_64& rng);

// Generates `count` maps from one seeded stream, so the sequence is
// reproducible as a whole.
std::vector<ImageTensor> make_class_maps(int count, int height, int width, int classes,
                                         std::uint64_t seed);

} // namespace winstitch
