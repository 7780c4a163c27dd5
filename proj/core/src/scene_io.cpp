#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "mftiq/synth.hpp"

namespace mftiq::synth {

namespace {

using nlohmann::json;

// Best-effort location of a key inside the source text, for error messages.
int line_of(std::string_view text, std::string_view key) {
  const std::string needle = "\"" + std::string(key) + "\"";
  const auto pos = text.find(needle);
  if (pos == std::string_view::npos) return 0;
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
}

[[noreturn]] void fail(std::string_view text, std::string_view key, const std::string& message) {
  const int line = line_of(text, key);
  throw FormatError("scene spec" + (line > 0 ? " line " + std::to_string(line) : std::string()) + ": " +
                    message);
}

void reject_unknown(std::string_view text, const json& obj, std::initializer_list<const char*> allowed,
                    const char* where) {
  if (!obj.is_object()) fail(text, where, std::string(where) + " must be an object");
  const std::set<std::string> names(allowed.begin(), allowed.end());
  for (const auto& item : obj.items()) {
    if (!names.contains(item.key())) fail(text, item.key(), "unknown key '" + item.key() + "' in " + where);
  }
}

template <typename T>
T get_or(std::string_view text, const json& obj, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    fail(text, key, std::string("bad value for '") + key + "': " + e.what());
  }
}

TextureSpec parse_texture(std::string_view text, const json& obj, const char* where) {
  reject_unknown(text, obj, {"seed", "scale"}, where);
  TextureSpec t;
  t.seed = get_or<std::uint64_t>(text, obj, "seed", 0);
  t.scale = get_or<double>(text, obj, "scale", 4.0);
  return t;
}

Point2 parse_vec2(std::string_view text, const json& obj, const char* key) {
  const json& v = obj.at(key);
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
    fail(text, key, std::string("'") + key + "' must be a two-element number array");
  }
  return {v[0].get<double>(), v[1].get<double>()};
}

}  // namespace

SceneSpec parse_scene_spec(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text.begin(), json_text.end());
  } catch (const json::parse_error& e) {
    // nlohmann messages carry "at line L, column C".
    throw FormatError(std::string("scene spec: ") + e.what());
  }
  const std::string_view text = json_text;
  reject_unknown(text, root,
                 {"width", "height", "frames", "background", "layers", "camera_motion", "replay_back_and_forth",
                  "simulation_frames", "noise_sigma"},
                 "scene");
  SceneSpec spec;
  if (!root.contains("width") || !root.contains("height") || !root.contains("frames")) {
    fail(text, "", "'width', 'height' and 'frames' are required");
  }
  spec.resolution = {get_or<int>(text, root, "width", 0), get_or<int>(text, root, "height", 0)};
  spec.frame_count = get_or<int>(text, root, "frames", 0);
  if (root.contains("background")) spec.background = parse_texture(text, root["background"], "background");
  if (root.contains("camera_motion")) spec.camera_motion = parse_vec2(text, root, "camera_motion");
  spec.replay_back_and_forth = get_or<bool>(text, root, "replay_back_and_forth", false);
  spec.simulation_frames = get_or<int>(text, root, "simulation_frames", 0);
  spec.noise_sigma = get_or<double>(text, root, "noise_sigma", 0.0);
  if (root.contains("layers")) {
    const json& layers = root["layers"];
    if (!layers.is_array()) fail(text, "layers", "'layers' must be an array");
    for (const json& lj : layers) {
      reject_unknown(text, lj, {"width", "height", "texture", "keyframes"}, "layer");
      LayerSpec layer;
      layer.width = get_or<double>(text, lj, "width", 0.0);
      layer.height = get_or<double>(text, lj, "height", 0.0);
      if (lj.contains("texture")) layer.texture = parse_texture(text, lj["texture"], "texture");
      if (!lj.contains("keyframes") || !lj["keyframes"].is_array()) {
        fail(text, "keyframes", "layer needs a 'keyframes' array");
      }
      for (const json& kj : lj["keyframes"]) {
        reject_unknown(text, kj, {"frame", "x", "y", "angle", "scale"}, "keyframe");
        Keyframe k;
        k.frame = get_or<int>(text, kj, "frame", 1);
        k.pose.x = get_or<double>(text, kj, "x", 0.0);
        k.pose.y = get_or<double>(text, kj, "y", 0.0);
        k.pose.angle = get_or<double>(text, kj, "angle", 0.0);
        k.pose.scale = get_or<double>(text, kj, "scale", 1.0);
        layer.keyframes.push_back(k);
      }
      spec.layers.push_back(std::move(layer));
    }
  }
  try {
    validate(spec);
  } catch (const ArgumentError& e) {
    throw FormatError(std::string(e.what()));
  }
  return spec;
}

SceneSpec load_scene_spec(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open scene spec " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scene_spec(ss.str());
}

std::string to_json(const SceneSpec& spec) {
  json root;
  root["width"] = spec.resolution.width;
  root["height"] = spec.resolution.height;
  root["frames"] = spec.frame_count;
  root["background"] = {{"seed", spec.background.seed}, {"scale", spec.background.scale}};
  root["camera_motion"] = {spec.camera_motion.x, spec.camera_motion.y};
  root["replay_back_and_forth"] = spec.replay_back_and_forth;
  root["simulation_frames"] = spec.simulation_frames;
  root["noise_sigma"] = spec.noise_sigma;
  root["layers"] = json::array();
  for (const LayerSpec& layer : spec.layers) {
    json lj;
    lj["width"] = layer.width;
    lj["height"] = layer.height;
    lj["texture"] = {{"seed", layer.texture.seed}, {"scale", layer.texture.scale}};
    lj["keyframes"] = json::array();
    for (const Keyframe& k : layer.keyframes) {
      lj["keyframes"].push_back(
          {{"frame", k.frame}, {"x", k.pose.x}, {"y", k.pose.y}, {"angle", k.pose.angle}, {"scale", k.pose.scale}});
    }
    root["layers"].push_back(std::move(lj));
  }
  return root.dump(2);
}

}  // namespace mftiq::synth
