#include "mftiq/homography.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <string>

#include <Eigen/Dense>

#include "mftiq/flow.hpp"
#include "mftiq/tracker.hpp"

namespace mftiq::homography {

Homography::Homography(const std::array<double, 9>& m) : m_(m) {
  double norm = 0.0;
  for (double v : m_) {
    if (!std::isfinite(v)) throw DegeneracyError("homography has non-finite entries");
    norm += v * v;
  }
  norm = std::sqrt(norm);
  if (norm == 0.0) throw DegeneracyError("zero homography");
  const double s = m_[8] < 0.0 ? -1.0 / norm : 1.0 / norm;
  for (double& v : m_) v *= s;
  if (std::abs(determinant()) <= 1e-12) throw DegeneracyError("singular homography");
}

Homography Homography::identity() { return Homography({1, 0, 0, 0, 1, 0, 0, 0, 1}); }

double Homography::determinant() const {
  const auto& a = m_;
  return a[0] * (a[4] * a[8] - a[5] * a[7]) - a[1] * (a[3] * a[8] - a[5] * a[6]) + a[2] * (a[3] * a[7] - a[4] * a[6]);
}

Homography Homography::inverse() const {
  const auto& a = m_;
  // adjugate; the scale is fixed by the normalization
  return Homography({a[4] * a[8] - a[5] * a[7], a[2] * a[7] - a[1] * a[8], a[1] * a[5] - a[2] * a[4],
                     a[5] * a[6] - a[3] * a[8], a[0] * a[8] - a[2] * a[6], a[2] * a[3] - a[0] * a[5],
                     a[3] * a[7] - a[4] * a[6], a[1] * a[6] - a[0] * a[7], a[0] * a[4] - a[1] * a[3]});
}

namespace {

// Similarity moving the points to zero mean and sqrt(2) RMS radius.
Eigen::Matrix3d normalizing_transform(const std::vector<Point2>& pts) {
  double mx = 0.0, my = 0.0;
  for (const Point2& p : pts) {
    mx += p.x;
    my += p.y;
  }
  mx /= static_cast<double>(pts.size());
  my /= static_cast<double>(pts.size());
  double sq = 0.0;
  for (const Point2& p : pts) sq += (p.x - mx) * (p.x - mx) + (p.y - my) * (p.y - my);
  const double rms = std::sqrt(sq / static_cast<double>(pts.size()));
  if (!(rms > 0.0) || !std::isfinite(rms)) throw DegeneracyError("dlt: coincident points");
  const double s = std::sqrt(2.0) / rms;
  Eigen::Matrix3d t;
  t << s, 0, -s * mx, 0, s, -s * my, 0, 0, 1;
  return t;
}

}  // namespace

Homography dlt_solve(std::span<const Correspondence> corrs) {
  std::vector<Point2> src, dst;
  for (const Correspondence& c : corrs) {
    if (!c.valid) continue;
    src.push_back(c.source);
    dst.push_back(c.target);
  }
  if (src.size() < 4) {
    throw ArgumentError("dlt_solve needs at least 4 correspondences, got " + std::to_string(src.size()));
  }
  const Eigen::Matrix3d ts = normalizing_transform(src);
  const Eigen::Matrix3d td = normalizing_transform(dst);

  const Eigen::Index n = static_cast<Eigen::Index>(src.size());
  Eigen::MatrixXd a(2 * n, 9);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Vector3d p = ts * Eigen::Vector3d(src[static_cast<std::size_t>(i)].x, src[static_cast<std::size_t>(i)].y, 1.0);
    const Eigen::Vector3d q = td * Eigen::Vector3d(dst[static_cast<std::size_t>(i)].x, dst[static_cast<std::size_t>(i)].y, 1.0);
    const double x = p.x(), y = p.y(), u = q.x(), v = q.y();
    a.row(2 * i) << -x, -y, -1, 0, 0, 0, u * x, u * y, u;
    a.row(2 * i + 1) << 0, 0, 0, -x, -y, -1, v * x, v * y, v;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const Eigen::VectorXd& sv = svd.singularValues();
  if (sv.size() < 8 || sv(7) <= 1e-10 * sv(0)) throw DegeneracyError("dlt: degenerate point configuration");
  const Eigen::VectorXd h = svd.matrixV().col(8);
  Eigen::Matrix3d hn;
  hn << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);
  const Eigen::Matrix3d full = td.inverse() * hn * ts;
  std::array<double, 9> m;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) m[static_cast<std::size_t>(r * 3 + c)] = full(r, c);
  }
  return Homography(m);
}

Point2 transfer(const Homography& h, Point2 p) {
  const double w = h(2, 0) * p.x + h(2, 1) * p.y + h(2, 2);
  if (std::abs(w) < 1e-12) throw SingularTransferError("point maps to the line at infinity");
  return {(h(0, 0) * p.x + h(0, 1) * p.y + h(0, 2)) / w, (h(1, 0) * p.x + h(1, 1) * p.y + h(1, 2)) / w};
}

std::vector<Point2> transfer(const Homography& h, std::span<const Point2> pts) {
  std::vector<Point2> out;
  out.reserve(pts.size());
  for (const Point2& p : pts) out.push_back(transfer(h, p));
  return out;
}

Quad transfer(const Homography& h, const Quad& pts) {
  Quad out;
  for (std::size_t i = 0; i < pts.size(); ++i) out[i] = transfer(h, pts[i]);
  return out;
}

double transfer_error(const Homography& h, const Correspondence& c) {
  const double w = h(2, 0) * c.source.x + h(2, 1) * c.source.y + h(2, 2);
  if (std::abs(w) < 1e-12) return std::numeric_limits<double>::infinity();
  const double x = (h(0, 0) * c.source.x + h(0, 1) * c.source.y + h(0, 2)) / w;
  const double y = (h(1, 0) * c.source.x + h(1, 1) * c.source.y + h(1, 2)) / w;
  return std::hypot(x - c.target.x, y - c.target.y);
}

namespace {

std::size_t score(const Homography& h, std::span<const Correspondence> corrs, double threshold,
                  std::vector<std::uint8_t>* mask) {
  std::size_t count = 0;
  if (mask) mask->assign(corrs.size(), 0);
  for (std::size_t i = 0; i < corrs.size(); ++i) {
    if (!corrs[i].valid) continue;
    if (transfer_error(h, corrs[i]) <= threshold) {
      ++count;
      if (mask) (*mask)[i] = 1;
    }
  }
  return count;
}

int required_iterations(double inlier_ratio, double confidence, int cap) {
  const double w4 = std::pow(inlier_ratio, 4);
  if (w4 >= 1.0) return 1;
  if (w4 <= 0.0) return cap;
  const double n = std::log(1.0 - confidence) / std::log(1.0 - w4);
  if (!std::isfinite(n) || n >= cap) return cap;
  return std::max(1, static_cast<int>(std::ceil(n)));
}

}  // namespace

RansacResult ransac_estimate(std::span<const Correspondence> corrs, const RansacParams& params) {
  if (!(params.inlier_threshold > 0.0)) throw ArgumentError("ransac: threshold must be positive");
  if (!(params.confidence > 0.0 && params.confidence < 1.0)) throw ArgumentError("ransac: confidence outside (0, 1)");
  if (params.max_iterations < 1) throw ArgumentError("ransac: max_iterations must be >= 1");

  std::vector<std::size_t> valid;
  for (std::size_t i = 0; i < corrs.size(); ++i) {
    if (corrs[i].valid) valid.push_back(i);
  }
  const std::size_t n = valid.size();
  if (n < 4) throw EstimationFailure("ransac: " + std::to_string(n) + " valid correspondences, need 4");
  const std::size_t min_inliers =
      params.min_inliers > 0 ? params.min_inliers
                             : std::min(n, std::max<std::size_t>(5, (n + 9) / 10));

  std::mt19937_64 rng(params.seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::optional<Homography> best;
  std::size_t best_count = 0;
  int limit = params.max_iterations;
  int it = 0;
  for (; it < limit; ++it) {
    std::array<std::size_t, 4> sample;
    for (std::size_t k = 0; k < 4; ++k) {
      std::size_t idx;
      do {
        idx = valid[pick(rng)];
      } while (std::find(sample.begin(), sample.begin() + static_cast<std::ptrdiff_t>(k), idx) !=
               sample.begin() + static_cast<std::ptrdiff_t>(k));
      sample[k] = idx;
    }
    const std::array<Correspondence, 4> minimal{corrs[sample[0]], corrs[sample[1]], corrs[sample[2]], corrs[sample[3]]};
    std::optional<Homography> h;
    try {
      h = dlt_solve(minimal);
    } catch (const DegeneracyError&) {
      continue;
    }
    const std::size_t count = score(*h, corrs, params.inlier_threshold, nullptr);
    if (count > best_count) {
      best_count = count;
      best = h;
      limit = std::min(limit, required_iterations(static_cast<double>(count) / static_cast<double>(n),
                                                  params.confidence, params.max_iterations));
    }
  }
  if (!best || best_count < min_inliers) {
    throw EstimationFailure("ransac: best consensus " + std::to_string(best_count) + " of " + std::to_string(n) +
                            ", need " + std::to_string(min_inliers));
  }

  RansacResult result;
  result.iterations = std::min(it, limit);
  result.inlier_count = score(*best, corrs, params.inlier_threshold, &result.inliers);
  result.model = *best;
  std::vector<Correspondence> support;
  for (std::size_t i = 0; i < corrs.size(); ++i) {
    if (result.inliers[i]) support.push_back(corrs[i]);
  }
  try {
    const Homography refit = dlt_solve(support);
    std::vector<std::uint8_t> mask;
    const std::size_t count = score(refit, corrs, params.inlier_threshold, &mask);
    if (count >= result.inlier_count) {
      result.model = refit;
      result.inliers = std::move(mask);
      result.inlier_count = count;
    }
  } catch (const DegeneracyError&) {
  }
  return result;
}

namespace {

double cross(Point2 o, Point2 a, Point2 b) { return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x); }

double signed_area(const Quad& q) {
  double s = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    const Point2& a = q[i];
    const Point2& b = q[(i + 1) % q.size()];
    s += a.x * b.y - b.x * a.y;
  }
  return 0.5 * s;
}

bool inside(const Quad& q, Point2 p, double orientation) {
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (orientation * cross(q[i], q[(i + 1) % q.size()], p) < -1e-9) return false;
  }
  return true;
}

}  // namespace

std::vector<Point2> region_grid(const Quad& region, Resolution frame, int stride) {
  if (stride < 1) throw ArgumentError("grid stride must be >= 1");
  const double area = signed_area(region);
  if (!(std::abs(area) > 1e-6)) throw DegeneracyError("planar region is degenerate");
  const double orientation = area > 0 ? 1.0 : -1.0;
  double x0 = region[0].x, x1 = region[0].x, y0 = region[0].y, y1 = region[0].y;
  for (const Point2& p : region) {
    x0 = std::min(x0, p.x);
    x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y);
    y1 = std::max(y1, p.y);
  }
  const int gx0 = std::max(0, static_cast<int>(std::ceil(x0 / stride)) * stride);
  const int gy0 = std::max(0, static_cast<int>(std::ceil(y0 / stride)) * stride);
  const int gx1 = std::min(frame.width - 1, static_cast<int>(std::floor(x1)));
  const int gy1 = std::min(frame.height - 1, static_cast<int>(std::floor(y1)));
  std::vector<Point2> out;
  for (int y = gy0; y <= gy1; y += stride) {
    for (int x = gx0; x <= gx1; x += stride) {
      const Point2 p{static_cast<double>(x), static_cast<double>(y)};
      if (inside(region, p, orientation)) out.push_back(p);
    }
  }
  return out;
}

std::vector<PlanarFrame> track_planar(std::span<const FrameResult> results, const Quad& region,
                                      const Quad& control_points, const PlanarParams& params) {
  std::vector<PlanarFrame> out;
  if (results.empty()) return out;
  const std::vector<Point2> grid = region_grid(region, results.front().flow.resolution(), params.grid_stride);
  if (grid.size() < 4) throw DegeneracyError("planar region covers fewer than 4 grid pixels");

  PlanarFrame last{0, control_points, Homography::identity(), 0, false};
  std::vector<Correspondence> corrs;
  for (const FrameResult& r : results) {
    corrs.clear();
    for (const Point2& p : grid) {
      const int x = static_cast<int>(p.x), y = static_cast<int>(p.y);
      if (!r.flow.contains(x, y)) continue;
      const Vec2f d = r.flow(x, y);
      corrs.push_back({p, {p.x + d.x, p.y + d.y}, r.occlusion(x, y) <= kOcclusionThreshold});
    }
    RansacParams rp = params.ransac;
    rp.seed = params.ransac.seed + static_cast<std::uint64_t>(r.frame);
    try {
      RansacResult fit = ransac_estimate(corrs, rp);
      PlanarFrame f{r.frame, transfer(fit.model, control_points), fit.model, fit.inlier_count, false};
      last = f;
      out.push_back(f);
    } catch (const DataError&) {
      PlanarFrame f = last;
      f.frame = r.frame;
      f.inliers = 0;
      f.carried_forward = true;
      out.push_back(f);
    }
  }
  return out;
}

}  // namespace mftiq::homography
