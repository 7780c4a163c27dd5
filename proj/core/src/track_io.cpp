#include "mftiq/track_io.hpp"

#include <charconv>
#include <cmath>
#include <map>

#include <fmt/format.h>

#include "mftiq/file_io.hpp"

namespace mftiq {

namespace {

constexpr std::string_view kTrackHeader = "track_id frame x y occluded cost";
constexpr std::string_view kQueryHeader = "track_id x y";
constexpr std::string_view kEvalQueryHeader = "query_id track_id frame x y direction";

std::string text_of(const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = read_file(path);
  return std::string(bytes.begin(), bytes.end());
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

// Visits non-empty lines with their 1-based numbers.
template <typename F>
void for_each_line(std::string_view text, F&& f) {
  std::size_t pos = 0;
  int number = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    ++number;
    std::string_view line = text.substr(pos, end - pos);
    if (!split_ws(line).empty()) f(number, line);
    pos = end + 1;
  }
}

[[noreturn]] void fail(int line, const std::string& what) {
  throw FormatError("line " + std::to_string(line) + ": " + what);
}

template <typename T>
T number_at(int line, std::string_view token) {
  T value{};
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) fail(line, "bad number '" + std::string(token) + "'");
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(value)) fail(line, "non-finite value '" + std::string(token) + "'");
  }
  return value;
}

bool flag_at(int line, std::string_view token) {
  if (token == "0") return false;
  if (token == "1") return true;
  fail(line, "flag must be 0 or 1, got '" + std::string(token) + "'");
}

std::string joined(const std::vector<std::string_view>& tokens) {
  std::string s;
  for (auto t : tokens) s += (s.empty() ? "" : " ") + std::string(t);
  return s;
}

void expect_header(int line, std::string_view got, std::string_view want) {
  if (joined(split_ws(got)) != want) {
    fail(line, "expected header '" + std::string(want) + "'");
  }
}

}  // namespace

std::string format_number(double v) { return fmt::format("{}", v); }
std::string format_number(float v) { return fmt::format("{}", v); }

std::string format_tracks(const std::vector<TrackRow>& rows) {
  std::string out(kTrackHeader);
  out += '\n';
  for (const TrackRow& r : rows) {
    out += fmt::format("{} {} {} {} {} {}\n", r.track_id, r.frame, r.position.x, r.position.y, r.occluded ? 1 : 0,
                       r.cost);
  }
  return out;
}

std::vector<TrackRow> parse_tracks(std::string_view text) {
  std::vector<TrackRow> rows;
  bool header = false;
  for_each_line(text, [&](int n, std::string_view line) {
    if (line.front() == '#') return;
    if (!header) {
      expect_header(n, line, kTrackHeader);
      header = true;
      return;
    }
    const auto tok = split_ws(line);
    if (tok.size() != 6) fail(n, "expected 6 columns, got " + std::to_string(tok.size()));
    rows.push_back({number_at<int>(n, tok[0]), number_at<int>(n, tok[1]),
                    {number_at<double>(n, tok[2]), number_at<double>(n, tok[3])}, flag_at(n, tok[4]),
                    number_at<float>(n, tok[5])});
  });
  if (!header) throw FormatError("track file has no header");
  return rows;
}

void save_tracks(const std::filesystem::path& path, const std::vector<TrackRow>& rows) {
  write_file_atomic(path, format_tracks(rows));
}

std::vector<TrackRow> load_tracks(const std::filesystem::path& path) {
  try {
    return parse_tracks(text_of(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::string format_ground_truth(const GroundTruthFile& gt) {
  std::vector<TrackRow> rows;
  for (std::size_t id = 0; id < gt.tracks.size(); ++id) {
    for (std::size_t f = 0; f < gt.tracks[id].size(); ++f) {
      const TrackPoint& p = gt.tracks[id][f];
      rows.push_back({static_cast<int>(id), static_cast<int>(f) + 1, p.position, !p.visible, 0.0f});
    }
  }
  return fmt::format("# resolution {} {}\n", gt.resolution.width, gt.resolution.height) + format_tracks(rows);
}

GroundTruthFile parse_ground_truth(std::string_view text) {
  GroundTruthFile gt;
  bool have_resolution = false;
  for_each_line(text, [&](int n, std::string_view line) {
    const auto tok = split_ws(line);
    if (tok.size() == 4 && tok[0] == "#" && tok[1] == "resolution") {
      gt.resolution = {number_at<int>(n, tok[2]), number_at<int>(n, tok[3])};
      if (gt.resolution.width <= 0 || gt.resolution.height <= 0) fail(n, "resolution must be positive");
      have_resolution = true;
    }
  });
  if (!have_resolution) throw FormatError("ground-truth file lacks a '# resolution W H' line");

  std::map<int, std::map<int, TrackPoint>> grouped;
  for (const TrackRow& r : parse_tracks(text)) {
    if (!grouped[r.track_id].emplace(r.frame, TrackPoint{r.position, !r.occluded}).second) {
      throw FormatError("duplicate row for track " + std::to_string(r.track_id) + " frame " + std::to_string(r.frame));
    }
  }
  int expected_id = 0;
  std::size_t frames = 0;
  for (const auto& [id, rows] : grouped) {
    if (id != expected_id++) throw FormatError("ground-truth track ids must be 0..N-1");
    if (frames == 0) frames = rows.size();
    if (rows.size() != frames || rows.begin()->first != 1 || rows.rbegin()->first != static_cast<int>(frames)) {
      throw FormatError("ground-truth track " + std::to_string(id) + " must cover frames 1.." + std::to_string(frames));
    }
    std::vector<TrackPoint> track;
    for (const auto& [frame, p] : rows) track.push_back(p);
    gt.tracks.push_back(std::move(track));
  }
  return gt;
}

void save_ground_truth(const std::filesystem::path& path, const GroundTruthFile& gt) {
  write_file_atomic(path, format_ground_truth(gt));
}

GroundTruthFile load_ground_truth(const std::filesystem::path& path) {
  try {
    return parse_ground_truth(text_of(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

metrics::QueryPredictions group_predictions(const std::vector<TrackRow>& rows) {
  metrics::QueryPredictions out;
  for (const TrackRow& r : rows) {
    if (!out[r.track_id].emplace(r.frame, TrackPoint{r.position, !r.occluded}).second) {
      throw FormatError("duplicate prediction for track " + std::to_string(r.track_id) + " frame " +
                        std::to_string(r.frame));
    }
  }
  return out;
}

std::string format_queries(const std::vector<QueryPoint>& queries) {
  std::string out(kQueryHeader);
  out += '\n';
  for (const QueryPoint& q : queries) out += fmt::format("{} {} {}\n", q.track_id, q.point.x, q.point.y);
  return out;
}

std::vector<QueryPoint> parse_queries(std::string_view text) {
  std::vector<QueryPoint> out;
  bool header = false;
  for_each_line(text, [&](int n, std::string_view line) {
    if (line.front() == '#') return;
    if (!header) {
      expect_header(n, line, kQueryHeader);
      header = true;
      return;
    }
    const auto tok = split_ws(line);
    if (tok.size() != 3) fail(n, "expected 3 columns, got " + std::to_string(tok.size()));
    out.push_back({number_at<int>(n, tok[0]), {number_at<double>(n, tok[1]), number_at<double>(n, tok[2])}});
  });
  if (!header) throw FormatError("query file has no header");
  return out;
}

std::vector<QueryPoint> load_queries(const std::filesystem::path& path) {
  try {
    return parse_queries(text_of(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::string format_eval_queries(const std::vector<metrics::EvalQuery>& queries) {
  std::string out(kEvalQueryHeader);
  out += '\n';
  for (std::size_t i = 0; i < queries.size(); ++i) {
    const auto& q = queries[i];
    out += fmt::format("{} {} {} {} {} {}\n", i, q.track_id, q.frame, q.point.x, q.point.y,
                       q.direction == metrics::Direction::Forward ? "forward" : "backward");
  }
  return out;
}

std::vector<metrics::EvalQuery> parse_eval_queries(std::string_view text) {
  std::vector<metrics::EvalQuery> out;
  bool header = false;
  for_each_line(text, [&](int n, std::string_view line) {
    if (line.front() == '#') return;
    if (!header) {
      expect_header(n, line, kEvalQueryHeader);
      header = true;
      return;
    }
    const auto tok = split_ws(line);
    if (tok.size() != 6) fail(n, "expected 6 columns, got " + std::to_string(tok.size()));
    if (number_at<int>(n, tok[0]) != static_cast<int>(out.size())) fail(n, "query ids must be 0..N-1 in order");
    metrics::EvalQuery q{number_at<int>(n, tok[1]), number_at<int>(n, tok[2]),
                         {number_at<double>(n, tok[3]), number_at<double>(n, tok[4])}, metrics::Direction::Forward};
    if (tok[5] == "backward") {
      q.direction = metrics::Direction::Backward;
    } else if (tok[5] != "forward") {
      fail(n, "direction must be forward or backward");
    }
    out.push_back(q);
  });
  if (!header) throw FormatError("query file has no header");
  return out;
}

std::string format_planar(const std::vector<homography::PlanarFrame>& frames) {
  std::string out = "frame x1 y1 x2 y2 x3 y3 x4 y4 carried\n";
  for (const auto& f : frames) {
    out += std::to_string(f.frame);
    for (const Point2& p : f.points) out += fmt::format(" {} {}", p.x, p.y);
    out += f.carried_forward ? " 1\n" : " 0\n";
  }
  return out;
}

}  // namespace mftiq
