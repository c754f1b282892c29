#include "edmlift/eval/corruption.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <utility>

#include "edmlift/core/error.hpp"

namespace edmlift::eval {
namespace {

constexpr std::array<std::pair<MaskKind, std::string_view>, 5> kMaskNames = {{
    {MaskKind::kRandom2, "random2"},
    {MaskKind::kRightArm, "right_arm"},
    {MaskKind::kLeftArm, "left_arm"},
    {MaskKind::kRightLeg, "right_leg"},
    {MaskKind::kLeftLeg, "left_leg"},
}};

}  // namespace

std::string_view to_string(MaskKind kind) {
  for (const auto& [k, name] : kMaskNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

MaskKind parse_mask_kind(std::string_view text) {
  for (const auto& [k, name] : kMaskNames) {
    if (name == text) return k;
  }
  throw Error(ErrorCode::kInvalidArgument,
              "unknown occlusion kind '" + std::string(text) +
                  "' (expected random2, right_arm, left_arm, right_leg or left_leg)");
}

Visibility make_occlusion_mask(MaskKind kind, const Skeleton& skeleton, Rng& rng) {
  const int n = skeleton.size();
  Visibility vis(n, true);
  if (kind == MaskKind::kRandom2) {
    if (n < 2) throw Error(ErrorCode::kInvalidArgument, "skeleton has fewer than 2 joints");
    const int a = std::uniform_int_distribution<int>(0, n - 1)(rng);
    int b = std::uniform_int_distribution<int>(0, n - 2)(rng);
    if (b >= a) ++b;
    vis[a] = vis[b] = false;
    return vis;
  }
  for (int j : skeleton.limb_group(std::string(to_string(kind)))) vis[j] = false;
  return vis;
}

Pose2D inject_noise(const Pose2D& pose, double sigma, Rng& rng, const Visibility& visibility) {
  return add_pixel_noise(pose, visibility.empty() ? all_visible(pose.size()) : visibility, sigma,
                         rng);
}

ProtocolSpec ProtocolSpec::parse(std::string_view text, std::uint64_t seed) {
  ProtocolSpec spec;
  spec.seed = seed;
  const auto colon = text.find(':');
  const std::string_view head = text.substr(0, colon);
  const std::string_view arg = colon == std::string_view::npos ? "" : text.substr(colon + 1);
  if (head == "clean" && colon == std::string_view::npos) {
    spec.kind = Kind::kClean;
  } else if (head == "noise" && !arg.empty()) {
    spec.kind = Kind::kNoise;
    const auto [end, ec] = std::from_chars(arg.data(), arg.data() + arg.size(), spec.sigma);
    if (ec != std::errc() || end != arg.data() + arg.size()) {
      throw Error(ErrorCode::kInvalidArgument, "bad noise level in protocol '" +
                                                   std::string(text) + "'");
    }
  } else if (head == "occlusion" && !arg.empty()) {
    spec.kind = Kind::kOcclusion;
    spec.mask = parse_mask_kind(arg);
  } else {
    throw Error(ErrorCode::kInvalidArgument,
                "unknown protocol '" + std::string(text) +
                    "' (expected clean, noise:SIGMA or occlusion:KIND)");
  }
  spec.validate();
  return spec;
}

std::string ProtocolSpec::to_string() const {
  switch (kind) {
    case Kind::kClean:
      return "clean";
    case Kind::kNoise: {
      char buf[32];
      std::snprintf(buf, sizeof buf, "noise:%.9g", sigma);
      return buf;
    }
    case Kind::kOcclusion:
      return "occlusion:" + std::string(eval::to_string(mask));
  }
  return "unknown";
}

void ProtocolSpec::validate() const {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw Error(ErrorCode::kInvalidArgument, "noise sigma must be finite and >= 0");
  }
}

ObservedPose2D apply_protocol(const ProtocolSpec& spec, const Skeleton& skeleton,
                              const Pose2D& raw, const Visibility& visibility,
                              std::uint64_t index) {
  if (raw.size() != skeleton.size()) {
    throw Error(ErrorCode::kShape, "pose does not match the skeleton");
  }
  ObservedPose2D out{raw, visibility.empty() ? all_visible(raw.size()) : visibility};
  if (spec.kind == ProtocolSpec::Kind::kClean) return out;
  Rng rng = stream_rng(spec.seed, index);
  if (spec.kind == ProtocolSpec::Kind::kNoise) {
    out.pose = inject_noise(raw, spec.sigma, rng, out.visibility);
  } else {
    const Visibility mask = make_occlusion_mask(spec.mask, skeleton, rng);
    for (int j = 0; j < raw.size(); ++j) out.visibility[j] = out.visibility[j] && mask[j];
  }
  return out;
}

}  // namespace edmlift::eval
