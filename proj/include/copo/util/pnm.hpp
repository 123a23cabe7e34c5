#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace copo {

// Binary PGM (P5), one byte per pixel, row-major from the top row.
void write_pgm(const std::string& path, int width, int height,
               const std::vector<uint8_t>& gray);

// Binary PPM (P6), three bytes per pixel.
void write_ppm(const std::string& path, int width, int height,
               const std::vector<uint8_t>& rgb);

}  // namespace copo
