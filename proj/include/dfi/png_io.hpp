#pragma once

#include <filesystem>

#include "dfi/image.hpp"

namespace dfi {

/// Loads an 8-bit PNG as gray or RGB floats (value / 255). Alpha is dropped.
Image load_png(const std::filesystem::path& path);

/// Stores round(value·255) as an 8-bit gray or RGB PNG.
void save_png(const Image& img, const std::filesystem::path& path);

}  // namespace dfi
