#include "fprune/container.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <functional>
#include <iterator>
#include <nlohmann/json.hpp>
#include <numeric>
#include <set>

#include "fprune/error.hpp"

namespace fprune {
namespace {

using ordered_json = nlohmann::ordered_json;

constexpr char kMagic[4] = {'F', 'P', 'W', 'T'};
constexpr std::uint32_t kVersion = 1;
constexpr std::size_t kPreambleSize = 4 + 4 + 8;

std::int64_t shape_product(const std::vector<std::int64_t>& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::int64_t{1}, std::multiplies<>());
}

template <typename T>
void put_le(std::string& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>((value >> (8 * i)) & 0xFF));
  }
}

template <typename T>
T get_le(const unsigned char* p) {
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(p[i]) << (8 * i);
  return value;
}

void append_floats(std::string& out, const std::vector<float>& data) {
  for (float f : data) put_le(out, std::bit_cast<std::uint32_t>(f));
}

ordered_json layer_to_json(const LayerSpec& l) {
  ordered_json j;
  j["name"] = l.name;
  j["kind"] = std::string(layer_kind_name(l.kind));
  j["n_in"] = l.n_in;
  j["n_out"] = l.n_out;
  j["kernel_h"] = l.kernel_h;
  j["kernel_w"] = l.kernel_w;
  j["out_h"] = l.out_h;
  j["out_w"] = l.out_w;
  j["stride"] = l.stride;
  j["padding"] = l.padding;
  j["predecessors"] = l.predecessors;
  return j;
}

LayerSpec layer_from_json(const ordered_json& j) {
  LayerSpec l;
  l.name = j.at("name").get<std::string>();
  l.kind = parse_layer_kind(j.at("kind").get<std::string>());
  l.n_in = j.value("n_in", std::int64_t{0});
  l.n_out = j.value("n_out", std::int64_t{0});
  l.kernel_h = j.value("kernel_h", std::int64_t{0});
  l.kernel_w = j.value("kernel_w", std::int64_t{0});
  l.out_h = j.value("out_h", std::int64_t{0});
  l.out_w = j.value("out_w", std::int64_t{0});
  l.stride = j.value("stride", std::int64_t{1});
  l.padding = j.value("padding", std::int64_t{0});
  if (j.contains("predecessors")) l.predecessors = j.at("predecessors").get<std::vector<std::string>>();
  return l;
}

std::vector<char> slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open '" + path.string() + "'");
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(Errc::io, "read failure on '" + path.string() + "'");
  return bytes;
}

void spill(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io, "cannot open '" + path.string() + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) throw Error(Errc::io, "write failure on '" + path.string() + "'");
}

void check_shape(const std::string& name, const std::vector<std::int64_t>& shape) {
  for (auto d : shape) {
    if (d <= 0) throw Error(Errc::shape_mismatch, "tensor '" + name + "' has a non-positive dimension");
  }
}

// Nested-array helpers for the JSON toy format.
ordered_json nest(const std::vector<float>& data, const std::vector<std::int64_t>& shape,
                  std::size_t axis, std::size_t& cursor) {
  if (axis == shape.size()) return static_cast<double>(data[cursor++]);
  ordered_json arr = ordered_json::array();
  for (std::int64_t i = 0; i < shape[axis]; ++i) arr.push_back(nest(data, shape, axis + 1, cursor));
  return arr;
}

void infer_shape(const ordered_json& node, std::vector<std::int64_t>& shape) {
  const ordered_json* cur = &node;
  while (cur->is_array()) {
    shape.push_back(static_cast<std::int64_t>(cur->size()));
    if (cur->empty()) break;
    cur = &cur->front();
  }
}

void flatten(const ordered_json& node, const std::vector<std::int64_t>& shape, std::size_t axis,
             const std::string& name, std::vector<float>& out) {
  if (axis == shape.size()) {
    if (!node.is_number()) throw Error(Errc::shape_mismatch, "tensor '" + name + "': expected a number");
    out.push_back(static_cast<float>(node.get<double>()));
    return;
  }
  if (!node.is_array() || static_cast<std::int64_t>(node.size()) != shape[axis]) {
    throw Error(Errc::shape_mismatch, "tensor '" + name + "': ragged nested array");
  }
  for (const auto& child : node) flatten(child, shape, axis + 1, name, out);
}

}  // namespace

std::size_t TensorRecord::element_count() const {
  return static_cast<std::size_t>(shape_product(shape));
}

bool operator==(const TensorRecord& a, const TensorRecord& b) {
  return a.name == b.name && a.shape == b.shape && a.dtype == b.dtype &&
         a.data.size() == b.data.size() &&
         (a.data.empty() ||
          std::memcmp(a.data.data(), b.data.data(), a.data.size() * sizeof(float)) == 0);
}

std::string_view layer_kind_name(LayerKind kind) noexcept {
  switch (kind) {
    case LayerKind::conv: return "conv";
    case LayerKind::linear: return "linear";
    case LayerKind::batchnorm: return "batchnorm";
    case LayerKind::add: return "add";
    case LayerKind::input: return "input";
    case LayerKind::output: return "output";
  }
  return "unknown";
}

LayerKind parse_layer_kind(std::string_view name) {
  for (LayerKind k : {LayerKind::conv, LayerKind::linear, LayerKind::batchnorm, LayerKind::add,
                      LayerKind::input, LayerKind::output}) {
    if (layer_kind_name(k) == name) return k;
  }
  throw Error(Errc::invalid_snapshot, "unknown layer kind '" + std::string(name) + "'");
}

const LayerSpec* ModelSnapshot::find_layer(std::string_view name) const {
  auto it = std::find_if(layers.begin(), layers.end(), [&](const LayerSpec& l) { return l.name == name; });
  return it == layers.end() ? nullptr : &*it;
}

const TensorRecord* ModelSnapshot::find_tensor(std::string_view name) const {
  auto it = tensors.find(std::string(name));
  return it == tensors.end() ? nullptr : &it->second;
}

std::vector<const TensorRecord*> ModelSnapshot::tensors_of(std::string_view layer) const {
  std::vector<const TensorRecord*> out;
  const std::string prefix = std::string(layer) + ".";
  for (auto it = tensors.lower_bound(prefix); it != tensors.end() && it->first.starts_with(prefix); ++it) {
    // "conv1.weight" belongs to conv1, "conv1.a.weight" belongs to layer "conv1.a".
    if (it->first.find('.', prefix.size()) == std::string::npos) out.push_back(&it->second);
  }
  return out;
}

std::vector<std::string> ModelSnapshot::conv_layers() const {
  std::vector<std::string> out;
  for (const auto& l : layers) {
    if (l.kind == LayerKind::conv) out.push_back(l.name);
  }
  return out;
}

std::vector<std::size_t> topological_order(const ModelSnapshot& snapshot) {
  const auto& layers = snapshot.layers;
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (!index.emplace(layers[i].name, i).second) {
      throw Error(Errc::invalid_snapshot, "duplicate layer name '" + layers[i].name + "'");
    }
  }
  std::vector<std::size_t> indegree(layers.size(), 0);
  std::vector<std::vector<std::size_t>> consumers(layers.size());
  for (std::size_t i = 0; i < layers.size(); ++i) {
    for (const auto& p : layers[i].predecessors) {
      auto it = index.find(p);
      if (it == index.end()) {
        throw Error(Errc::inconsistent_graph,
                    "layer '" + layers[i].name + "' names missing predecessor '" + p + "'");
      }
      consumers[it->second].push_back(i);
      ++indegree[i];
    }
  }
  // Kahn's algorithm, always releasing the lowest declared index first.
  std::set<std::size_t> ready;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (indegree[i] == 0) ready.insert(i);
  }
  std::vector<std::size_t> order;
  while (!ready.empty()) {
    const std::size_t i = *ready.begin();
    ready.erase(ready.begin());
    order.push_back(i);
    for (std::size_t c : consumers[i]) {
      if (--indegree[c] == 0) ready.insert(c);
    }
  }
  if (order.size() != layers.size()) throw Error(Errc::inconsistent_graph, "layer graph has a cycle");
  return order;
}

void validate(const ModelSnapshot& snapshot) {
  for (const auto& [key, t] : snapshot.tensors) {
    if (key != t.name) {
      throw Error(Errc::invalid_snapshot, "tensor key '" + key + "' does not match record name '" + t.name + "'");
    }
    check_shape(t.name, t.shape);
    if (shape_product(t.shape) != static_cast<std::int64_t>(t.data.size())) {
      throw Error(Errc::shape_mismatch, "tensor '" + t.name + "': shape product does not match element count");
    }
    for (float v : t.data) {
      if (!std::isfinite(v)) throw Error(Errc::non_finite, "tensor '" + t.name + "' contains a non-finite value");
    }
  }
  if (snapshot.layers.empty()) return;

  (void)topological_order(snapshot);
  std::size_t sources = 0;
  for (const auto& l : snapshot.layers) {
    if (l.name.empty()) throw Error(Errc::invalid_snapshot, "layer with empty name");
    if (l.predecessors.empty()) ++sources;
    if (l.kind == LayerKind::input && !l.predecessors.empty()) {
      throw Error(Errc::invalid_snapshot, "input layer '" + l.name + "' has predecessors");
    }
    if (l.kind == LayerKind::conv) {
      if (l.n_in < 1 || l.n_out < 1 || l.kernel_h < 1 || l.kernel_w < 1) {
        throw Error(Errc::invalid_snapshot, "conv layer '" + l.name + "' has a non-positive dimension");
      }
      const TensorRecord* w = snapshot.find_tensor(l.name + ".weight");
      if (w == nullptr) throw Error(Errc::invalid_snapshot, "conv layer '" + l.name + "' has no weight tensor");
      const std::vector<std::int64_t> want{l.n_out, l.n_in, l.kernel_h, l.kernel_w};
      if (w->shape != want) {
        throw Error(Errc::shape_mismatch, "conv layer '" + l.name + "': weight shape does not match layer spec");
      }
    }
    if (l.kind == LayerKind::linear) {
      if (l.n_in < 1 || l.n_out < 1) {
        throw Error(Errc::invalid_snapshot, "linear layer '" + l.name + "' has a non-positive dimension");
      }
      if (const TensorRecord* w = snapshot.find_tensor(l.name + ".weight");
          w != nullptr && w->shape != std::vector<std::int64_t>{l.n_out, l.n_in}) {
        throw Error(Errc::shape_mismatch, "linear layer '" + l.name + "': weight shape does not match layer spec");
      }
    }
  }
  if (sources != 1) {
    throw Error(Errc::invalid_snapshot, "layer graph must have exactly one source node, found " +
                                            std::to_string(sources));
  }
}

void write_container(const ModelSnapshot& snapshot, const std::filesystem::path& path) {
  validate(snapshot);

  ordered_json header;
  header["tensors"] = ordered_json::array();
  std::uint64_t offset = 0;
  for (const auto& [name, t] : snapshot.tensors) {
    const std::uint64_t bytes = t.data.size() * sizeof(float);
    header["tensors"].push_back({{"name", name},
                                 {"shape", t.shape},
                                 {"dtype", "float32"},
                                 {"offset", offset},
                                 {"byte_len", bytes}});
    offset += bytes;
  }
  header["layers"] = ordered_json::array();
  for (const auto& l : snapshot.layers) header["layers"].push_back(layer_to_json(l));
  header["metadata"] = ordered_json::object();
  for (const auto& [k, v] : snapshot.metadata) header["metadata"][k] = v;

  const std::string header_text = header.dump();
  std::string out;
  out.reserve(kPreambleSize + header_text.size() + offset);
  out.append(kMagic, 4);
  put_le(out, kVersion);
  put_le(out, static_cast<std::uint64_t>(header_text.size()));
  out += header_text;
  for (const auto& [name, t] : snapshot.tensors) append_floats(out, t.data);
  spill(path, out);
}

ModelSnapshot read_container(const std::filesystem::path& path) {
  const std::vector<char> raw = slurp(path);
  const auto* bytes = reinterpret_cast<const unsigned char*>(raw.data());
  const std::size_t n = raw.size();

  const std::size_t magic_len = std::min<std::size_t>(n, 4);
  if (std::memcmp(raw.data(), kMagic, magic_len) != 0) {
    throw Error(Errc::bad_magic, "'" + path.string() + "' is not an FPWT container (bad magic)");
  }
  if (n < kPreambleSize) throw Error(Errc::truncated, "'" + path.string() + "': truncated preamble");
  const auto version = get_le<std::uint32_t>(bytes + 4);
  if (version != kVersion) {
    throw Error(Errc::version_mismatch, "'" + path.string() + "': unsupported FPWT version " +
                                            std::to_string(version));
  }
  const auto header_len = get_le<std::uint64_t>(bytes + 8);
  if (header_len > n - kPreambleSize) throw Error(Errc::truncated, "'" + path.string() + "': truncated header");

  ordered_json header;
  try {
    header = ordered_json::parse(raw.begin() + kPreambleSize,
                                 raw.begin() + static_cast<std::ptrdiff_t>(kPreambleSize + header_len));
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::invalid_snapshot, "'" + path.string() + "': malformed header: " + e.what());
  }
  const std::size_t payload_start = kPreambleSize + header_len;
  const std::size_t payload_size = n - payload_start;

  ModelSnapshot snap;
  try {
    for (const auto& entry : header.at("tensors")) {
      TensorRecord t;
      t.name = entry.at("name").get<std::string>();
      t.shape = entry.at("shape").get<std::vector<std::int64_t>>();
      if (entry.at("dtype").get<std::string>() != "float32") {
        throw Error(Errc::invalid_snapshot, "tensor '" + t.name + "': unsupported dtype");
      }
      check_shape(t.name, t.shape);
      const auto off = entry.at("offset").get<std::uint64_t>();
      const auto len = entry.at("byte_len").get<std::uint64_t>();
      if (static_cast<std::uint64_t>(shape_product(t.shape)) * sizeof(float) != len) {
        throw Error(Errc::shape_mismatch, "tensor '" + t.name + "': byte_len does not match shape");
      }
      if (off > payload_size || len > payload_size - off) {
        throw Error(Errc::truncated, "tensor '" + t.name + "': payload truncated");
      }
      t.data.resize(len / sizeof(float));
      const unsigned char* p = bytes + payload_start + off;
      for (std::size_t i = 0; i < t.data.size(); ++i) {
        t.data[i] = std::bit_cast<float>(get_le<std::uint32_t>(p + 4 * i));
      }
      if (!snap.tensors.emplace(t.name, t).second) {
        throw Error(Errc::invalid_snapshot, "duplicate tensor name '" + t.name + "'");
      }
    }
    for (const auto& l : header.at("layers")) snap.layers.push_back(layer_from_json(l));
    if (header.contains("metadata")) {
      for (const auto& [k, v] : header.at("metadata").items()) snap.metadata[k] = v.get<std::string>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::invalid_snapshot, "'" + path.string() + "': malformed header: " + e.what());
  }
  validate(snap);
  return snap;
}

void write_json_snapshot(const ModelSnapshot& snapshot, const std::filesystem::path& path) {
  validate(snapshot);
  ordered_json doc;
  doc["layers"] = ordered_json::array();
  for (const auto& l : snapshot.layers) doc["layers"].push_back(layer_to_json(l));
  doc["tensors"] = ordered_json::object();
  for (const auto& [name, t] : snapshot.tensors) {
    std::size_t cursor = 0;
    doc["tensors"][name] = {{"shape", t.shape}, {"data", nest(t.data, t.shape, 0, cursor)}};
  }
  doc["metadata"] = ordered_json::object();
  for (const auto& [k, v] : snapshot.metadata) doc["metadata"][k] = v;
  spill(path, doc.dump(1) + "\n");
}

ModelSnapshot read_json_snapshot(const std::filesystem::path& path) {
  const std::vector<char> raw = slurp(path);
  ModelSnapshot snap;
  try {
    const auto doc = ordered_json::parse(raw.begin(), raw.end());
    if (doc.contains("layers")) {
      for (const auto& l : doc.at("layers")) snap.layers.push_back(layer_from_json(l));
    }
    if (doc.contains("tensors")) {
      for (const auto& [name, entry] : doc.at("tensors").items()) {
        TensorRecord t;
        t.name = name;
        if (entry.contains("shape")) {
          t.shape = entry.at("shape").get<std::vector<std::int64_t>>();
        } else {
          infer_shape(entry.at("data"), t.shape);
        }
        check_shape(name, t.shape);
        flatten(entry.at("data"), t.shape, 0, name, t.data);
        snap.tensors.emplace(name, std::move(t));
      }
    }
    if (doc.contains("metadata")) {
      for (const auto& [k, v] : doc.at("metadata").items()) snap.metadata[k] = v.get<std::string>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::invalid_snapshot, "'" + path.string() + "': malformed JSON snapshot: " + e.what());
  }
  validate(snap);
  return snap;
}

ModelSnapshot load_snapshot(const std::filesystem::path& path, ContainerFormat format) {
  return format == ContainerFormat::json ? read_json_snapshot(path) : read_container(path);
}

void save_snapshot(const ModelSnapshot& snapshot, const std::filesystem::path& path,
                   ContainerFormat format) {
  if (format == ContainerFormat::json) {
    write_json_snapshot(snapshot, path);
  } else {
    write_container(snapshot, path);
  }
}

FilterMatrix filters_of(const ModelSnapshot& snapshot, std::string_view layer) {
  const LayerSpec* spec = snapshot.find_layer(layer);
  if (spec == nullptr) throw Error(Errc::unknown_layer, "unknown layer '" + std::string(layer) + "'");
  if (spec->kind != LayerKind::conv) {
    throw Error(Errc::not_conv, "layer '" + std::string(layer) + "' is not a conv layer");
  }
  const TensorRecord* w = snapshot.find_tensor(spec->name + ".weight");
  if (w == nullptr) throw Error(Errc::invalid_snapshot, "conv layer '" + spec->name + "' has no weight tensor");
  const auto rows = static_cast<std::size_t>(spec->n_out);
  const auto dim = static_cast<std::size_t>(spec->n_in * spec->kernel_h * spec->kernel_w);
  if (w->data.size() != rows * dim) {
    throw Error(Errc::shape_mismatch, "conv layer '" + spec->name + "': weight size does not match layer spec");
  }
  // [n_out, n_in, h, w] row-major: filter j is already the contiguous slab j.
  return FilterMatrix(rows, dim, w->data, spec->name);
}

}  // namespace fprune
