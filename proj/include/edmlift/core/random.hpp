#pragma once

#include <cstdint>
#include <random>

#include "edmlift/core/pose.hpp"

namespace edmlift {

using Rng = std::mt19937_64;

/// Independent generator for item `index` of a run seeded with `seed`.
Rng stream_rng(std::uint64_t seed, std::uint64_t index);

/// Adds N(0, sigma^2) pixel noise to both coordinates of every visible joint of
/// a raw pose. sigma = 0 returns the input unchanged; sigma < 0 is rejected.
Pose2D add_pixel_noise(const Pose2D& pose, const Visibility& visibility, double sigma, Rng& rng);

}  // namespace edmlift
