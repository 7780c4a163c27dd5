#include "run_config.hpp"

#include <algorithm>
#include <set>

#include "json.hpp"
#include "mftiq/file_io.hpp"

namespace mftiq::cli {

using nlohmann::json;

namespace {

int line_of(std::string_view text, std::string_view key) {
  const std::string quoted = "\"" + std::string(key) + "\"";
  const std::size_t pos = text.find(quoted);
  if (pos == std::string_view::npos) return 0;
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
}

[[noreturn]] void fail(std::string_view text, std::string_view key, const std::string& what) {
  const int line = key.empty() ? 0 : line_of(text, key);
  throw FormatError("run config" + (line > 0 ? " line " + std::to_string(line) : std::string()) + ": " + what);
}

void reject_unknown(std::string_view text, const json& obj, std::initializer_list<const char*> allowed,
                    const char* where) {
  if (!obj.is_object()) fail(text, "", std::string(where) + " must be an object");
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& item : obj.items()) {
    if (!keys.count(item.key())) fail(text, item.key(), "unknown key '" + item.key() + "' in " + where);
  }
}

template <typename T>
T get(std::string_view text, const json& obj, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    fail(text, key, std::string("bad value for '") + key + "'");
  }
}

}  // namespace

void RunConfig::validate() const {
  if (!frames && !scene) throw ArgumentError("run config needs 'frames' or 'scene'");
  if (provider.type != "dir" && provider.type != "synth" && provider.type != "classical") {
    throw ArgumentError("provider must be dir, synth or classical, got '" + provider.type + "'");
  }
  if (estimator.type != "oracle" && estimator.type != "classical") {
    throw ArgumentError("estimator must be oracle or classical, got '" + estimator.type + "'");
  }
  if ((provider.type == "synth" || estimator.type == "oracle") && !scene) {
    throw ArgumentError("the synth provider and the oracle estimator need a 'scene'");
  }
  if (provider.type == "dir" && provider.root.empty()) throw ArgumentError("the dir provider needs 'root'");
  if (tracker.max_finite_delta() > 255) throw ArgumentError("deltas above 255 cannot be stored in delta PNGs");
  tracker.validate();
}

RunConfig parse_run_config(std::string_view text) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("run config: ") + e.what());
  }
  reject_unknown(text, root,
                 {"frames", "scene", "seed", "provider", "estimator", "deltas", "mode", "occlusion_penalty", "cache",
                  "out", "raw"},
                 "run config");
  RunConfig c;
  if (root.contains("frames")) c.frames = get<std::string>(text, root, "frames", "");
  if (root.contains("scene")) c.scene = get<std::string>(text, root, "scene", "");
  c.seed = get<std::uint64_t>(text, root, "seed", 0);
  if (root.contains("provider")) {
    const json& p = root["provider"];
    reject_unknown(text, p, {"type", "root", "pattern", "levels", "window", "iterations"}, "provider");
    c.provider.type = get<std::string>(text, p, "type", c.provider.type);
    c.provider.root = get<std::string>(text, p, "root", "");
    c.provider.pattern = get<std::string>(text, p, "pattern", c.provider.pattern);
    c.provider.classical.levels = get<int>(text, p, "levels", c.provider.classical.levels);
    c.provider.classical.window = get<int>(text, p, "window", c.provider.classical.window);
    c.provider.classical.iterations = get<int>(text, p, "iterations", c.provider.classical.iterations);
  }
  if (root.contains("estimator")) {
    const json& e = root["estimator"];
    reject_unknown(text, e,
                   {"type", "sharpness", "feature_stride", "patch_radius", "kappa", "offsets", "tau_photo", "fb_base",
                    "fb_slope", "backward_check"},
                   "estimator");
    auto& q = c.estimator.classical;
    c.estimator.type = get<std::string>(text, e, "type", c.estimator.type);
    c.estimator.sharpness = get<double>(text, e, "sharpness", c.estimator.sharpness);
    q.feature_stride = get<int>(text, e, "feature_stride", q.feature_stride);
    q.patch_radius = get<int>(text, e, "patch_radius", q.patch_radius);
    q.kappa = get<double>(text, e, "kappa", q.kappa);
    q.offsets = get<std::array<double, quality::kNumThresholds>>(text, e, "offsets", q.offsets);
    q.tau_photo = get<double>(text, e, "tau_photo", q.tau_photo);
    q.fb_base = get<double>(text, e, "fb_base", q.fb_base);
    q.fb_slope = get<double>(text, e, "fb_slope", q.fb_slope);
    c.estimator.backward_check = get<bool>(text, e, "backward_check", c.estimator.backward_check);
  }
  try {
    if (root.contains("deltas")) parse_deltas(get<std::string>(text, root, "deltas", ""), c.tracker);
    if (root.contains("mode")) c.tracker.mode = parse_selection_mode(get<std::string>(text, root, "mode", ""));
  } catch (const ArgumentError& e) {
    fail(text, root.contains("mode") ? "mode" : "deltas", e.what());
  }
  c.tracker.occlusion_penalty = get<double>(text, root, "occlusion_penalty", c.tracker.occlusion_penalty);
  c.cache = get<std::size_t>(text, root, "cache", c.cache);
  c.out = get<std::string>(text, root, "out", c.out.string());
  c.raw = get<bool>(text, root, "raw", c.raw);
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = read_file(path);
  RunConfig c = parse_run_config(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
  const std::filesystem::path base = path.parent_path();
  auto resolve = [&](std::filesystem::path& p) {
    if (!p.empty() && p.is_relative()) p = base / p;
  };
  if (c.frames) resolve(*c.frames);
  if (c.scene) resolve(*c.scene);
  resolve(c.provider.root);
  resolve(c.out);
  return c;
}

std::string to_json(const RunConfig& c) {
  json j;
  if (c.frames) j["frames"] = c.frames->string();
  if (c.scene) j["scene"] = c.scene->string();
  j["seed"] = c.seed;
  j["provider"] = {{"type", c.provider.type},
                   {"root", c.provider.root.string()},
                   {"pattern", c.provider.pattern},
                   {"levels", c.provider.classical.levels},
                   {"window", c.provider.classical.window},
                   {"iterations", c.provider.classical.iterations}};
  const auto& q = c.estimator.classical;
  j["estimator"] = {{"type", c.estimator.type},           {"sharpness", c.estimator.sharpness},
                    {"feature_stride", q.feature_stride}, {"patch_radius", q.patch_radius},
                    {"kappa", q.kappa},                   {"offsets", q.offsets},
                    {"tau_photo", q.tau_photo},           {"fb_base", q.fb_base},
                    {"fb_slope", q.fb_slope},             {"backward_check", c.estimator.backward_check}};
  j["deltas"] = format_deltas(c.tracker);
  j["mode"] = std::string(to_string(c.tracker.mode));
  j["occlusion_penalty"] = c.tracker.occlusion_penalty;
  j["cache"] = c.cache;
  j["out"] = c.out.string();
  j["raw"] = c.raw;
  return j.dump(2);
}

}  // namespace mftiq::cli
