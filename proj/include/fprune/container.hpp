#pragma once

// Model weights plus architecture graph, and the FPWT on-disk container.
//
// FPWT layout (all integers little-endian):
//   "FPWT" | u32 version (=1) | u64 header_len | header_len bytes of UTF-8 JSON
//   | payload section
// The JSON header lists every tensor as {name, shape, dtype, offset, byte_len}
// with offsets relative to the start of the payload section, plus the layer
// graph and free-form metadata. Payloads are raw little-endian float32.
//
// Tensors belong to a layer by name prefix: "<layer>.weight", "<layer>.bias",
// "<layer>.running_mean", ...

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "fprune/filter_matrix.hpp"

namespace fprune {

enum class DType { float32 };

struct TensorRecord {
  std::string name;
  std::vector<std::int64_t> shape;
  DType dtype = DType::float32;
  std::vector<float> data;

  std::size_t element_count() const;

  /// Bit-exact comparison: -0.0f and 0.0f differ.
  friend bool operator==(const TensorRecord& a, const TensorRecord& b);
};

enum class LayerKind { conv, linear, batchnorm, add, input, output };

std::string_view layer_kind_name(LayerKind kind) noexcept;
LayerKind parse_layer_kind(std::string_view name);

struct LayerSpec {
  std::string name;
  LayerKind kind = LayerKind::conv;
  std::int64_t n_in = 0;
  std::int64_t n_out = 0;
  std::int64_t kernel_h = 0;
  std::int64_t kernel_w = 0;
  // Output spatial extents; 0 means unknown.
  std::int64_t out_h = 0;
  std::int64_t out_w = 0;
  std::int64_t stride = 1;
  std::int64_t padding = 0;
  std::vector<std::string> predecessors;

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

struct ModelSnapshot {
  std::vector<LayerSpec> layers;
  std::map<std::string, TensorRecord> tensors;
  std::map<std::string, std::string> metadata;

  const LayerSpec* find_layer(std::string_view name) const;
  const TensorRecord* find_tensor(std::string_view name) const;
  /// Every tensor named "<layer>.<suffix>".
  std::vector<const TensorRecord*> tensors_of(std::string_view layer) const;
  std::vector<std::string> conv_layers() const;

  friend bool operator==(const ModelSnapshot&, const ModelSnapshot&) = default;
};

/// Throws Error(invalid_snapshot | shape_mismatch | non_finite) describing the
/// first violated invariant.
void validate(const ModelSnapshot& snapshot);

/// Layer indices in an order where every predecessor precedes its consumers.
std::vector<std::size_t> topological_order(const ModelSnapshot& snapshot);

void write_container(const ModelSnapshot& snapshot, const std::filesystem::path& path);
ModelSnapshot read_container(const std::filesystem::path& path);

// JSON toy format: {"layers": [...], "tensors": {name: {"shape": [...],
// "data": nested arrays}}, "metadata": {...}}. Used for hand-written fixtures.
void write_json_snapshot(const ModelSnapshot& snapshot, const std::filesystem::path& path);
ModelSnapshot read_json_snapshot(const std::filesystem::path& path);

enum class ContainerFormat { fpwt, json };

ModelSnapshot load_snapshot(const std::filesystem::path& path, ContainerFormat format);
void save_snapshot(const ModelSnapshot& snapshot, const std::filesystem::path& path,
                   ContainerFormat format);

/// Rows are the output filters of a conv layer, each flattened row-major
/// over [n_in, kernel_h, kernel_w].
FilterMatrix filters_of(const ModelSnapshot& snapshot, std::string_view layer);

}  // namespace fprune
