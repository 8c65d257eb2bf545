#include "fprune/zoo.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "fprune/error.hpp"

namespace fprune::zoo {
namespace {

class Builder {
 public:
  explicit Builder(WeightStyle style) : style_(style), rng_(style.seed) {}

  std::string input(std::int64_t channels, std::int64_t spatial) {
    LayerSpec l;
    l.name = "input";
    l.kind = LayerKind::input;
    l.n_out = channels;
    l.out_h = l.out_w = spatial;
    snap_.layers.push_back(l);
    return l.name;
  }

  std::string conv(const std::string& name, const std::string& pred, std::int64_t n_in, std::int64_t n_out,
                   std::int64_t kernel, std::int64_t stride, std::int64_t out_spatial, bool bias) {
    LayerSpec l;
    l.name = name;
    l.kind = LayerKind::conv;
    l.n_in = n_in;
    l.n_out = n_out;
    l.kernel_h = l.kernel_w = kernel;
    l.stride = stride;
    l.padding = kernel / 2;
    l.out_h = l.out_w = out_spatial;
    l.predecessors = {pred};
    snap_.layers.push_back(l);
    add_tensor(name + ".weight", {n_out, n_in, kernel, kernel}, clustered(n_out, n_in * kernel * kernel));
    if (bias) add_tensor(name + ".bias", {n_out}, small(n_out));
    return name;
  }

  std::string batchnorm(const std::string& name, const std::string& pred, std::int64_t channels,
                        std::int64_t spatial) {
    LayerSpec l;
    l.name = name;
    l.kind = LayerKind::batchnorm;
    l.n_in = l.n_out = channels;
    l.out_h = l.out_w = spatial;
    l.predecessors = {pred};
    snap_.layers.push_back(l);
    std::vector<float> ones(static_cast<std::size_t>(channels), 1.0f);
    add_tensor(name + ".weight", {channels}, ones);
    add_tensor(name + ".bias", {channels}, small(channels));
    add_tensor(name + ".running_mean", {channels}, small(channels));
    add_tensor(name + ".running_var", {channels}, ones);
    return name;
  }

  std::string add(const std::string& name, std::vector<std::string> preds, std::int64_t channels,
                  std::int64_t spatial) {
    LayerSpec l;
    l.name = name;
    l.kind = LayerKind::add;
    l.n_in = l.n_out = channels;
    l.out_h = l.out_w = spatial;
    l.predecessors = std::move(preds);
    snap_.layers.push_back(l);
    return name;
  }

  std::string linear(const std::string& name, const std::string& pred, std::int64_t n_in, std::int64_t n_out,
                     bool weights) {
    LayerSpec l;
    l.name = name;
    l.kind = LayerKind::linear;
    l.n_in = n_in;
    l.n_out = n_out;
    l.out_h = l.out_w = 1;
    l.predecessors = {pred};
    snap_.layers.push_back(l);
    if (weights) add_tensor(name + ".weight", {n_out, n_in}, gaussian(n_out * n_in, 1.0 / std::sqrt(double(n_in))));
    add_tensor(name + ".bias", {n_out}, small(n_out));
    return name;
  }

  void output(const std::string& pred, std::int64_t classes) {
    LayerSpec l;
    l.name = "output";
    l.kind = LayerKind::output;
    l.n_in = l.n_out = classes;
    l.predecessors = {pred};
    snap_.layers.push_back(l);
  }

  ModelSnapshot finish(std::string arch) {
    snap_.metadata["arch"] = std::move(arch);
    snap_.metadata["weights"] = "synthetic";
    snap_.metadata["seed"] = std::to_string(style_.seed);
    validate(snap_);
    return std::move(snap_);
  }

 private:
  void add_tensor(const std::string& name, std::vector<std::int64_t> shape, std::vector<float> data) {
    snap_.tensors[name] = TensorRecord{name, std::move(shape), DType::float32, std::move(data)};
  }

  std::vector<float> gaussian(std::int64_t count, double scale) {
    std::normal_distribution<double> dist(0.0, scale);
    std::vector<float> out(static_cast<std::size_t>(count));
    for (float& v : out) v = static_cast<float>(dist(rng_));
    return out;
  }

  std::vector<float> small(std::int64_t count) { return gaussian(count, 0.01); }

  std::vector<float> clustered(std::int64_t rows, std::int64_t dim) {
    const double scale = std::sqrt(2.0 / static_cast<double>(dim));
    const std::int64_t lo = std::max<std::int64_t>(1, rows / 8);
    const std::int64_t hi = std::max<std::int64_t>(lo, rows / 2);
    const std::int64_t protos = std::uniform_int_distribution<std::int64_t>(lo, hi)(rng_);
    const std::vector<float> centre = gaussian(protos * dim, scale);
    std::uniform_int_distribution<std::int64_t> pick(0, protos - 1);
    std::normal_distribution<double> noise(0.0, scale * style_.spread);
    std::vector<float> out(static_cast<std::size_t>(rows * dim));
    for (std::int64_t r = 0; r < rows; ++r) {
      const std::int64_t p = r < protos ? r : pick(rng_);
      for (std::int64_t d = 0; d < dim; ++d) {
        out[static_cast<std::size_t>(r * dim + d)] =
            static_cast<float>(centre[static_cast<std::size_t>(p * dim + d)] + noise(rng_));
      }
    }
    return out;
  }

  WeightStyle style_;
  std::mt19937_64 rng_;
  ModelSnapshot snap_;
};

}  // namespace

ModelSnapshot resnet_cifar(int depth, int num_classes, WeightStyle style) {
  if (depth < 8 || (depth - 2) % 6 != 0) {
    throw Error(Errc::invalid_argument, "CIFAR ResNet depth must be 6n + 2, got " + std::to_string(depth));
  }
  const int blocks = (depth - 2) / 6;
  Builder b(style);
  std::string x = b.input(3, 32);
  x = b.conv("conv1", x, 3, 16, 3, 1, 32, false);
  x = b.batchnorm("bn1", x, 16, 32);
  std::int64_t in_w = 16;
  for (int s = 0; s < 3; ++s) {
    const std::int64_t w = 16 << s;
    const std::int64_t sp = 32 >> s;
    for (int k = 0; k < blocks; ++k) {
      const std::string p = "layer" + std::to_string(s + 1) + "." + std::to_string(k) + ".";
      const std::int64_t stride = (s > 0 && k == 0) ? 2 : 1;
      std::string y = b.conv(p + "conv1", x, in_w, w, 3, stride, sp, false);
      y = b.batchnorm(p + "bn1", y, w, sp);
      y = b.conv(p + "conv2", y, w, w, 3, 1, sp, false);
      y = b.batchnorm(p + "bn2", y, w, sp);
      std::string shortcut = x;
      if (in_w != w) {
        shortcut = b.conv(p + "downsample.conv", x, in_w, w, 1, stride, sp, false);
        shortcut = b.batchnorm(p + "downsample.bn", shortcut, w, sp);
      }
      x = b.add(p + "add", {y, shortcut}, w, sp);
      in_w = w;
    }
  }
  x = b.linear("fc", x, 64, num_classes, true);
  b.output(x, num_classes);
  return b.finish("resnet" + std::to_string(depth) + "-cifar");
}

namespace {
constexpr int kVggCfg[] = {64, 64, 0, 128, 128, 0, 256, 256, 256, 0, 512, 512, 512, 0, 512, 512, 512, 0};
}

ModelSnapshot vgg16_cifar(int num_classes, WeightStyle style) {
  Builder b(style);
  std::string x = b.input(3, 32);
  std::int64_t ch = 3, sp = 32;
  int idx = 0;
  for (int v : kVggCfg) {
    if (v == 0) {
      sp /= 2;
      continue;
    }
    const std::string n = "features." + std::to_string(idx++);
    x = b.conv(n + ".conv", x, ch, v, 3, 1, sp, false);
    x = b.batchnorm(n + ".bn", x, v, sp);
    ch = v;
  }
  x = b.linear("classifier", x, ch * sp * sp, num_classes, true);
  b.output(x, num_classes);
  return b.finish("vgg16-cifar");
}

ModelSnapshot vgg16_imagenet(WeightStyle style) {
  Builder b(style);
  std::string x = b.input(3, 224);
  std::int64_t ch = 3, sp = 224;
  int idx = 0;
  for (int v : kVggCfg) {
    if (v == 0) {
      sp /= 2;
      continue;
    }
    x = b.conv("features." + std::to_string(idx++), x, ch, v, 3, 1, sp, true);
    ch = v;
  }
  x = b.linear("classifier.0", x, ch * sp * sp, 4096, false);
  x = b.linear("classifier.3", x, 4096, 4096, false);
  x = b.linear("classifier.6", x, 4096, 1000, false);
  b.output(x, 1000);
  return b.finish("vgg16-imagenet");
}

ModelSnapshot conv_chain(const std::vector<int>& widths, int in_channels, int spatial, int num_classes,
                         WeightStyle style) {
  Builder b(style);
  std::string x = b.input(in_channels, spatial);
  std::int64_t ch = in_channels;
  for (std::size_t i = 0; i < widths.size(); ++i) {
    x = b.conv("conv" + std::to_string(i + 1), x, ch, widths[i], 3, 1, spatial, true);
    ch = widths[i];
  }
  x = b.linear("fc", x, ch, num_classes, true);
  b.output(x, num_classes);
  return b.finish("chain");
}

}  // namespace fprune::zoo
