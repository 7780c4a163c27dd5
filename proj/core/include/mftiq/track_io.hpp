#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "mftiq/homography.hpp"
#include "mftiq/metrics.hpp"
#include "mftiq/track.hpp"

namespace mftiq {

// Whitespace-separated text with the header
//   track_id frame x y occluded cost
// Numbers are written in shortest round-trip form.
std::string format_tracks(const std::vector<TrackRow>& rows);
std::vector<TrackRow> parse_tracks(std::string_view text);
void save_tracks(const std::filesystem::path& path, const std::vector<TrackRow>& rows);
std::vector<TrackRow> load_tracks(const std::filesystem::path& path);

// Ground-truth tracks: a "# resolution W H" line followed by the track format.
// Track ids are 0..N-1 and every track covers frames 1..T.
struct GroundTruthFile {
  Resolution resolution;
  metrics::GroundTruthTracks tracks;
};

std::string format_ground_truth(const GroundTruthFile& gt);
GroundTruthFile parse_ground_truth(std::string_view text);
void save_ground_truth(const std::filesystem::path& path, const GroundTruthFile& gt);
GroundTruthFile load_ground_truth(const std::filesystem::path& path);

// Predicted rows grouped by track id, then frame.
metrics::QueryPredictions group_predictions(const std::vector<TrackRow>& rows);

// Query points: header "track_id x y", one query per row.
struct QueryPoint {
  int track_id = 0;
  Point2 point;
};

std::string format_queries(const std::vector<QueryPoint>& queries);
std::vector<QueryPoint> parse_queries(std::string_view text);
std::vector<QueryPoint> load_queries(const std::filesystem::path& path);

// Evaluation queries: header "query_id track_id frame x y direction".
std::string format_eval_queries(const std::vector<metrics::EvalQuery>& queries);
std::vector<metrics::EvalQuery> parse_eval_queries(std::string_view text);

// Control points: header "frame x1 y1 x2 y2 x3 y3 x4 y4 carried".
std::string format_planar(const std::vector<homography::PlanarFrame>& frames);

// Shortest representation that parses back to the same value.
std::string format_number(double v);
std::string format_number(float v);

}  // namespace mftiq
