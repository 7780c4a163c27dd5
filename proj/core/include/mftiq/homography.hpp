#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "mftiq/map2d.hpp"
#include "mftiq/track.hpp"

namespace mftiq {
struct FrameResult;
}

namespace mftiq::homography {

// Row-major 3x3 projective transform with unit Frobenius norm and a
// non-negative bottom-right entry.
class Homography {
 public:
  // Normalizes; throws DegeneracyError when |det| <= 1e-12 afterwards.
  explicit Homography(const std::array<double, 9>& m);
  static Homography identity();

  double operator()(int row, int col) const { return m_[static_cast<std::size_t>(row * 3 + col)]; }
  const std::array<double, 9>& data() const { return m_; }
  double determinant() const;
  Homography inverse() const;

  friend bool operator==(const Homography&, const Homography&) = default;

 private:
  std::array<double, 9> m_;
};

struct Correspondence {
  Point2 source;
  Point2 target;
  bool valid = true;
};

// Hartley-normalized direct linear transform over the valid pairs. Throws
// ArgumentError for fewer than four pairs and DegeneracyError when the
// system has rank below 8.
Homography dlt_solve(std::span<const Correspondence> corrs);

// Throws SingularTransferError when a point maps to the line at infinity.
Point2 transfer(const Homography& h, Point2 p);
std::vector<Point2> transfer(const Homography& h, std::span<const Point2> pts);
Quad transfer(const Homography& h, const Quad& pts);

// One-way transfer error |H(source) - target|; infinity for singular transfers.
double transfer_error(const Homography& h, const Correspondence& c);

struct RansacParams {
  double inlier_threshold = 3.0;
  int max_iterations = 2000;
  double confidence = 0.999;
  std::uint64_t seed = 0;
  // Smallest accepted consensus; 0 selects max(5, ceil(n / 10)) over the n
  // valid pairs. A 4-point sample always agrees with itself, so at least one
  // extra supporter is required.
  std::size_t min_inliers = 0;
};

struct RansacResult {
  Homography model = Homography::identity();
  std::vector<std::uint8_t> inliers;  // parallel to the input; invalid pairs are 0
  std::size_t inlier_count = 0;
  int iterations = 0;
};

// Throws EstimationFailure with fewer than four valid pairs or when no model
// reaches the minimum consensus.
RansacResult ransac_estimate(std::span<const Correspondence> corrs, const RansacParams& params = {});

struct PlanarParams {
  int grid_stride = 4;
  RansacParams ransac;
};

struct PlanarFrame {
  int frame = 1;
  Quad points;
  Homography model = Homography::identity();
  std::size_t inliers = 0;
  // Estimation failed; model and points repeat the last successful frame.
  bool carried_forward = false;
};

// Grid pixels of the convex quadrilateral `region`.
std::vector<Point2> region_grid(const Quad& region, Resolution frame, int stride);

// Transfers `control_points` into every result by the homography fitted to the
// unoccluded flow correspondences inside `region`. Throws DegeneracyError when
// the region is degenerate or holds fewer than four grid pixels.
std::vector<PlanarFrame> track_planar(std::span<const FrameResult> results, const Quad& region,
                                      const Quad& control_points, const PlanarParams& params = {});

}  // namespace mftiq::homography
