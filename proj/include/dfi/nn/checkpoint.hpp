#pragma once

#include <filesystem>
#include <optional>

#include "dfi/heatmap.hpp"
#include "dfi/nn/network.hpp"

namespace dfi::nn {

// Container layout, all integers little-endian:
//   "DFI1"
//   u32 input channels, u32 input height, u32 input width
//   u32 layer count, then per layer: u32 kind, u32 in, u32 out, u32 kernel
//   per conv layer in order: f32 weights (out·in·k·k), f32 biases (out)
//   u64 byte count of everything above
// A heatmap dump uses the same container with zero layers, the stack shape
// in the input fields and a single f32 tensor.

void save_checkpoint(const Regressor& net, const std::filesystem::path& path);

/// Throws IoError when unreadable and ParseError ("bad magic", "truncated
/// tensor in layer 3 (conv)", "dimension mismatch: ...") when malformed or,
/// if `expected` is given, when the stored architecture differs from it.
Regressor load_checkpoint(const std::filesystem::path& path,
                          const std::optional<Architecture>& expected = std::nullopt);

void save_heatmap_dump(const HeatmapStack& stack, const std::filesystem::path& path);
HeatmapStack load_heatmap_dump(const std::filesystem::path& path);

}  // namespace dfi::nn
