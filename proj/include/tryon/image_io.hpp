#pragma once

#include <string>
#include <vector>

#include "tryon/grid.hpp"

namespace tryon {

// PNG I/O. Images are float [0,1] in memory and 8-bit on disk; writes are
// byte-deterministic for identical pixel content.
void write_png(const std::string& path, const Grid3& img);  // 1 or 3 channels
void write_png_gray8(const std::string& path, const Gray8& img);
Grid3 read_png(const std::string& path);  // returns 1- or 3-channel grid

// Raw little-endian f32 blob with a JSON sidecar ("<path>.json") describing
// {shape, dtype, ...extra}. Used for latents, feature stacks and checkpoints.
void write_f32_blob(const std::string& path, const float* data, size_t n);
std::vector<float> read_f32_blob(const std::string& path);
void write_tensor(const std::string& path, const float* data,
                  const std::vector<int>& shape, const std::string& extra_json = "{}");
std::vector<float> read_tensor(const std::string& path, std::vector<int>& shape_out);

}  // namespace tryon
