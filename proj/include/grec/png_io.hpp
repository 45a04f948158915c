#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "grec/render.hpp"

namespace grec {

// Minimal 8-bit RGB PNG encoder (IHDR/IDAT/IEND, filter 0). Deterministic
// bytes for identical input.
std::vector<std::uint8_t> encode_png(const RenderedImage& image);

void write_png(const RenderedImage& image, const std::string& path);

std::string base64_encode(const std::vector<std::uint8_t>& data);

}  // namespace grec
