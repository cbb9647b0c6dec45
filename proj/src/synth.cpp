#include "dualbev/synth.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

#include "dualbev/error.hpp"
#include "dualbev/rng.hpp"

namespace dualbev {
namespace {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t s = seed ^ (0xD1B54A32D192ED03ULL * (stream + 1));
  return splitmix64(s);
}

constexpr std::uint64_t kSignatureStream = 1000;

// Entry depth of the ray origin + t * dir into an axis-aligned box; t is in
// units of `dir`.
std::optional<double> ray_box_entry(const Eigen::Vector3d& origin, const Eigen::Vector3d& dir,
                                    const SceneObject& box) {
  double t_near = -std::numeric_limits<double>::infinity();
  double t_far = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    const double lo = box.center[a] - 0.5 * box.size[a];
    const double hi = box.center[a] + 0.5 * box.size[a];
    if (std::abs(dir[a]) < 1e-12) {
      if (origin[a] < lo || origin[a] > hi) return std::nullopt;
      continue;
    }
    double t0 = (lo - origin[a]) / dir[a];
    double t1 = (hi - origin[a]) / dir[a];
    if (t0 > t1) std::swap(t0, t1);
    t_near = std::max(t_near, t0);
    t_far = std::min(t_far, t1);
  }
  if (t_near > t_far || t_near <= kMinProjectionDepth) return std::nullopt;
  return t_near;
}

double triangle_cdf(double x, double center, double half_width) {
  const double s = (x - center) / half_width;
  if (s <= -1.0) return 0.0;
  if (s <= 0.0) return 0.5 * (1.0 + s) * (1.0 + s);
  if (s < 1.0) return 1.0 - 0.5 * (1.0 - s) * (1.0 - s);
  return 1.0;
}

std::vector<float> unit_signature(Rng& rng, int channels) {
  std::vector<double> v(static_cast<std::size_t>(channels));
  double norm = 0.0;
  for (auto& x : v) {
    x = std::abs(rng.normal()) + 1e-3;
    norm += x * x;
  }
  norm = std::sqrt(norm);
  std::vector<float> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = static_cast<float>(v[i] / norm);
  return out;
}

}  // namespace

void SceneSpec::validate(const BevGridSpec& grid) const {
  if (n_cameras < 1) throw Error(Errc::NoCameras, "scene needs at least one camera");
  if (feat_w < 1 || feat_h < 1 || channels < 1)
    throw Error(Errc::ConfigError, "feature geometry must be positive");
  if (!(kappa > 0.0)) throw Error(Errc::ConfigError, "kappa must be > 0");
  if (!(noise_sigma >= 0.0)) throw Error(Errc::ConfigError, "noise sigma must be >= 0");
  for (const auto& o : objects) {
    if ((o.size.array() <= 0.0).any()) throw Error(Errc::ConfigError, "box sizes must be positive");
    if (o.center.x() - 0.5 * o.size.x() < grid.x_min || o.center.x() + 0.5 * o.size.x() > grid.x_max ||
        o.center.y() - 0.5 * o.size.y() < grid.y_min || o.center.y() + 0.5 * o.size.y() > grid.y_max)
      throw Error(Errc::ConfigError, "box footprint leaves the BEV grid");
    if (!o.signature.empty() && o.signature.size() != static_cast<std::size_t>(channels))
      throw Error(Errc::ConfigError, "box signature length differs from the channel count");
  }
}

SceneSpec standard_scene_spec(std::uint64_t seed) {
  SceneSpec spec;
  spec.seed = seed;
  spec.objects = {
      {{10.5, 0.0, 0.8}, {4.5, 2.0, 1.6}, {}},
      {{-12.0, 8.0, 0.9}, {4.0, 1.9, 1.8}, {}},
      {{6.0, -18.0, 1.5}, {8.0, 2.5, 3.0}, {}},
  };
  return spec;
}

std::vector<CameraRig> make_ring_rigs(int n_cameras, int feat_w, int feat_h,
                                      const RingCameraSpec& camera) {
  if (n_cameras < 1) throw Error(Errc::NoCameras, "ring needs at least one camera");
  std::vector<CameraRig> rigs;
  for (int i = 0; i < n_cameras; ++i) {
    const double yaw = camera.yaw_step_deg * i * std::numbers::pi / 180.0;
    const Eigen::Vector3d forward(std::cos(yaw), std::sin(yaw), 0.0);
    const Eigen::Vector3d right(std::sin(yaw), -std::cos(yaw), 0.0);
    const Eigen::Vector3d down(0.0, 0.0, -1.0);
    Eigen::Matrix3d rot;  // rows: camera axes in ego coordinates
    rot.row(0) = right.transpose();
    rot.row(1) = down.transpose();
    rot.row(2) = forward.transpose();
    const Eigen::Vector3d position = camera.mount_radius * forward + Eigen::Vector3d(0, 0, camera.mount_height);

    CameraRig rig;
    rig.K << camera.fx, 0.0, camera.cx, 0.0, camera.fy, camera.cy, 0.0, 0.0, 1.0;
    rig.T.setIdentity();
    rig.T.topLeftCorner<3, 3>() = rot;
    rig.T.topRightCorner<3, 1>() = -rot * position;
    rig.feat_w = feat_w;
    rig.feat_h = feat_h;
    rig.cam_id = i;
    rig.validate();
    rigs.push_back(rig);
  }
  return rigs;
}

std::vector<double> triangular_depth_distribution(double depth, double half_width,
                                                  const DepthBinSpec& dspec) {
  const int bins = dspec.n_bins();
  std::vector<double> mass(static_cast<std::size_t>(bins), 0.0);
  double total = 0.0;
  for (int k = 0; k < bins; ++k) {
    const double lo = dspec.d_min + k * dspec.step;
    mass[k] = triangle_cdf(lo + dspec.step, depth, half_width) - triangle_cdf(lo, depth, half_width);
    total += mass[k];
  }
  if (total <= 1e-12) {
    // Surface beyond the depth range: all mass on the nearest bin.
    std::fill(mass.begin(), mass.end(), 0.0);
    const double k = std::clamp(std::floor((depth - dspec.d_min) / dspec.step), 0.0, bins - 1.0);
    mass[static_cast<std::size_t>(k)] = 1.0;
    return mass;
  }
  for (auto& m : mass) m /= total;
  return mass;
}

Tensor footprint_to_bev_mask(const std::vector<SceneObject>& objects, const BevGridSpec& grid) {
  grid.validate();
  Tensor out({1, static_cast<std::size_t>(grid.ny), static_cast<std::size_t>(grid.nx)});
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i) {
      const Eigen::Vector2d c = grid.cell_center(i, j);
      for (const auto& o : objects)
        if (std::abs(c.x() - o.center.x()) <= 0.5 * o.size.x() &&
            std::abs(c.y() - o.center.y()) <= 0.5 * o.size.y()) {
          out[static_cast<std::size_t>(j) * grid.nx + i] = 1.0f;
          break;
        }
    }
  return out;
}

SceneBundle generate_scene(const SceneSpec& spec, const BevGridSpec& grid, const DepthBinSpec& dspec) {
  grid.validate();
  dspec.validate();
  spec.validate(grid);

  std::vector<std::vector<float>> signatures;
  Rng sig_rng(derive_seed(spec.seed, kSignatureStream));
  for (const auto& o : spec.objects)
    signatures.push_back(o.signature.empty() ? unit_signature(sig_rng, spec.channels) : o.signature);

  SceneBundle bundle;
  bundle.rigs = make_ring_rigs(spec.n_cameras, spec.feat_w, spec.feat_h, spec.camera);

  const auto n = static_cast<std::size_t>(spec.n_cameras);
  const auto ch = static_cast<std::size_t>(spec.channels);
  const auto h = static_cast<std::size_t>(spec.feat_h), w = static_cast<std::size_t>(spec.feat_w);
  const auto bins = static_cast<std::size_t>(dspec.n_bins());
  const std::size_t plane = h * w;
  Tensor feat({n, ch, h, w}), depth({n, bins, h, w}), mask({n, 1, h, w});
  const double half_width = dspec.step / spec.kappa;
  const auto uniform = static_cast<float>(1.0 / static_cast<double>(bins));

  for (std::size_t cam = 0; cam < n; ++cam) {
    const CameraRig& rig = bundle.rigs[cam];
    Rng rng(derive_seed(spec.seed, cam));
    const Eigen::Matrix4d ego_from_cam = rig.ego_from_camera();
    const Eigen::Matrix3d rot = ego_from_cam.topLeftCorner<3, 3>();
    const Eigen::Vector3d origin = ego_from_cam.topRightCorner<3, 1>();
    const Eigen::Matrix3d k_inv = rig.K.inverse();

    for (std::size_t v = 0; v < h; ++v)
      for (std::size_t u = 0; u < w; ++u) {
        const std::size_t p = v * w + u;
        // Camera-frame z of K^-1 (u, v, 1) is 1, so the ray parameter is depth.
        const Eigen::Vector3d dir = rot * (k_inv * Eigen::Vector3d(double(u), double(v), 1.0));
        std::optional<double> best;
        std::size_t best_obj = 0;
        for (std::size_t o = 0; o < spec.objects.size(); ++o) {
          const auto t = ray_box_entry(origin, dir, spec.objects[o]);
          if (t && (!best || *t < *best)) {
            best = t;
            best_obj = o;
          }
        }
        float* d_col = depth.ptr() + cam * bins * plane + p;
        if (best) {
          mask[cam * plane + p] = 1.0f;
          const auto dist = triangular_depth_distribution(*best, half_width, dspec);
          for (std::size_t k = 0; k < bins; ++k) d_col[k * plane] = static_cast<float>(dist[k]);
        } else {
          for (std::size_t k = 0; k < bins; ++k) d_col[k * plane] = uniform;
        }
        for (std::size_t c = 0; c < ch; ++c) {
          const double noise = spec.noise_sigma * rng.normal();
          const double base = best ? signatures[best_obj][c] : 0.0;
          feat[(cam * ch + c) * plane + p] = static_cast<float>(base + noise);
        }
      }
  }
  bundle.views = {std::move(feat), std::move(depth), std::move(mask)};
  bundle.gt_bev = footprint_to_bev_mask(spec.objects, grid);
  return bundle;
}

}  // namespace dualbev
