#include "edmlift/core/random.hpp"

#include "edmlift/core/error.hpp"

namespace edmlift {

Rng stream_rng(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return Rng(seq);
}

Pose2D add_pixel_noise(const Pose2D& pose, const Visibility& visibility, double sigma, Rng& rng) {
  if (!(sigma >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "noise sigma must be >= 0");
  if (pose.normalized()) {
    throw Error(ErrorCode::kInvalidArgument, "pixel noise applies to raw poses, before normalization");
  }
  if (static_cast<int>(visibility.size()) != pose.size()) {
    throw Error(ErrorCode::kShape, "visibility length does not match joint count");
  }
  Pose2D out = pose;
  if (sigma == 0.0) return out;
  std::normal_distribution<double> noise(0.0, sigma);
  for (int j = 0; j < pose.size(); ++j) {
    if (!visibility[j]) continue;
    out.joints(j, 0) += noise(rng);
    out.joints(j, 1) += noise(rng);
  }
  return out;
}

}  // namespace edmlift
