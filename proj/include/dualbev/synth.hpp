#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "dualbev/geometry.hpp"
#include "dualbev/inputs.hpp"
#include "dualbev/sampling.hpp"

namespace dualbev {

/// Axis-aligned box in the ego frame; size is (length along x, width along
/// y, height along z). An empty signature is drawn from the scene seed.
struct SceneObject {
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  Eigen::Vector3d size = Eigen::Vector3d::Ones();
  std::vector<float> signature;
};

/// Intrinsics (feature-pixel units) and mounting shared by a camera ring.
struct RingCameraSpec {
  double fx = 32.0;
  double fy = 32.0;
  double cx = 21.5;
  double cy = 7.5;
  double mount_height = 1.5;
  double mount_radius = 0.0;
  double yaw_step_deg = 60.0;
};

struct SceneSpec {
  std::uint64_t seed = 0;
  int n_cameras = 6;
  int feat_w = 44;
  int feat_h = 16;
  int channels = 64;
  double kappa = 4.0;  // depth sharpness: triangle half-width is step / kappa
  double noise_sigma = 0.05;
  RingCameraSpec camera;
  std::vector<SceneObject> objects;

  void validate(const BevGridSpec& grid) const;
};

/// Three boxes placed in front of, behind-left of and right of the ego
/// vehicle, each seen by a different camera of the default ring.
SceneSpec standard_scene_spec(std::uint64_t seed = 5);

/// Cameras at 0, step, 2*step, ... degrees of yaw, all looking horizontally.
std::vector<CameraRig> make_ring_rigs(int n_cameras, int feat_w, int feat_h,
                                      const RingCameraSpec& camera);

struct SceneBundle {
  std::vector<CameraRig> rigs;
  ViewInputs views;
  Tensor gt_bev;  // [1, ny, nx], 1 where a cell center lies in a box footprint
};

/// Ray-casts every feature pixel against the boxes. A hit at camera depth t
/// gets mask 1, a triangular depth distribution around t and the box
/// signature plus noise; a miss gets mask 0, a uniform depth distribution and
/// noise only. Deterministic in (spec, grid, dspec).
SceneBundle generate_scene(const SceneSpec& spec, const BevGridSpec& grid, const DepthBinSpec& dspec);

Tensor footprint_to_bev_mask(const std::vector<SceneObject>& objects, const BevGridSpec& grid);

/// Probability mass per depth bin of a triangular density centered at
/// `depth` with half-width `half_width`, renormalized to the bin range.
std::vector<double> triangular_depth_distribution(double depth, double half_width,
                                                  const DepthBinSpec& dspec);

}  // namespace dualbev
