#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <list>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <tuple>
#include <vector>

#include "mftiq/map2d.hpp"

namespace mftiq {

namespace synth {
class SyntheticSequence;
}

struct ProviderCapabilities {
  // Largest |b - a| the provider serves; 0 means unlimited.
  int max_frame_gap = 0;
  Resolution resolution;
};

// Source of pairwise optical flow between 1-based frame indices.
// get_flow(a, b) returns the displacement of every pixel of frame a into frame
// b. Implementations are deterministic and safe for concurrent calls.
class FlowProvider {
 public:
  virtual ~FlowProvider() = default;

  virtual FlowField get_flow(int a, int b) const = 0;
  virtual ProviderCapabilities capabilities() const = 0;
  // Distinguishes providers sharing a cache.
  virtual std::string id() const = 0;
};

// Precomputed .flo files named by a pattern with {a} and {b} fields, e.g.
// "flow_{a:06}_{b:06}.flo" (fmt syntax).
class DirectoryProvider final : public FlowProvider {
 public:
  static constexpr const char* kDefaultPattern = "flow_{a:06}_{b:06}.flo";

  explicit DirectoryProvider(std::filesystem::path root, std::string pattern = kDefaultPattern,
                             Resolution resolution = {});

  std::filesystem::path path_for(int a, int b) const;

  FlowField get_flow(int a, int b) const override;
  ProviderCapabilities capabilities() const override { return {0, resolution_}; }
  std::string id() const override { return "dir:" + root_.string() + "/" + pattern_; }

 private:
  std::filesystem::path root_;
  std::string pattern_;
  Resolution resolution_;
};

// Exact analytic flow from a synthetic sequence.
class SyntheticProvider final : public FlowProvider {
 public:
  explicit SyntheticProvider(const synth::SyntheticSequence& seq) : seq_(&seq) {}

  FlowField get_flow(int a, int b) const override;
  ProviderCapabilities capabilities() const override;
  std::string id() const override { return "synth"; }

 private:
  const synth::SyntheticSequence* seq_;
};

struct ClassicalFlowParams {
  int levels = 4;
  int window = 9;  // side length, pixels
  int iterations = 6;
};

// Coarse-to-fine dense Lucas-Kanade. At every pyramid level each pixel
// iteratively aligns its own window under a pure translation. Windows whose
// smaller structure-tensor eigenvalue is tiny keep their upsampled flow, steps
// are clamped to one pixel, and each level ends with a 3x3 median of the flow.
FlowField classical_flow(const Image& from, const Image& to, const ClassicalFlowParams& params = {});

// classical_flow over an in-memory frame list.
class ClassicalProvider final : public FlowProvider {
 public:
  ClassicalProvider(std::vector<Image> frames, ClassicalFlowParams params = {});

  FlowField get_flow(int a, int b) const override;
  ProviderCapabilities capabilities() const override;
  std::string id() const override;

  const std::vector<Image>& frames() const { return frames_; }

 private:
  std::vector<Image> frames_;
  ClassicalFlowParams params_;
};

// LRU memoization of another provider keyed by (provider id, a, b).
// capacity 0 means unbounded. Failed requests are not cached.
class CachedProvider final : public FlowProvider {
 public:
  CachedProvider(std::shared_ptr<const FlowProvider> inner, std::size_t capacity);

  FlowField get_flow(int a, int b) const override;
  ProviderCapabilities capabilities() const override { return inner_->capabilities(); }
  std::string id() const override { return inner_->id(); }

  std::uint64_t hits() const { return hits_.load(); }
  std::uint64_t misses() const { return misses_.load(); }
  std::size_t size() const;

 private:
  using Key = std::tuple<std::string, int, int>;
  struct Entry {
    Key key;
    std::shared_ptr<const FlowField> field;
  };

  std::shared_ptr<const FlowProvider> inner_;
  std::size_t capacity_;
  mutable std::mutex mutex_;
  mutable std::list<Entry> lru_;  // most recent first
  mutable std::map<Key, std::list<Entry>::iterator> index_;
  mutable std::atomic<std::uint64_t> hits_{0};
  mutable std::atomic<std::uint64_t> misses_{0};
};

std::shared_ptr<CachedProvider> cached(std::shared_ptr<const FlowProvider> provider, std::size_t capacity);

}  // namespace mftiq
