#pragma once

// Reference architectures as ModelSnapshots, with synthetic weights. Conv
// filters are drawn around a few per-layer prototypes, so they carry the
// cluster structure that trained filters tend to show.

#include <cstdint>
#include <string>

#include "fprune/container.hpp"

namespace fprune::zoo {

struct WeightStyle {
  std::uint64_t seed = 1;
  // Filters are prototype + spread * noise; a larger spread blurs clusters.
  double spread = 0.25;
};

/// CIFAR ResNet of depth 6n + 2 (20, 32, 56, 110, ...): 3x3 basic blocks at
/// widths 16/32/64, batchnorm after every conv, 1x1 projection shortcuts
/// where the width changes.
ModelSnapshot resnet_cifar(int depth, int num_classes = 10, WeightStyle style = {});

/// VGG-16 for 32x32 inputs with batchnorm and a single 512 -> classes head.
ModelSnapshot vgg16_cifar(int num_classes = 10, WeightStyle style = {});

/// VGG-16 for 224x224 inputs with the 25088-4096-4096-1000 classifier.
/// Linear weight tensors are omitted (biases are kept) to stay small; their
/// FLOPs and parameters follow from the layer specs.
ModelSnapshot vgg16_imagenet(WeightStyle style = {});

/// input(c) -> conv(3x3) -> ... -> linear; one conv per entry of `widths`.
ModelSnapshot conv_chain(const std::vector<int>& widths, int in_channels = 3, int spatial = 8,
                         int num_classes = 10, WeightStyle style = {});

}  // namespace fprune::zoo
