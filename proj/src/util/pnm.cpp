#include "copo/util/pnm.hpp"

#include <fstream>
#include <stdexcept>

namespace copo {

namespace {

std::ofstream open_binary(const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write file: " + path);
    return f;
}

}  // namespace

void write_pgm(const std::string& path, int width, int height,
               const std::vector<uint8_t>& gray) {
    if (static_cast<size_t>(width) * height != gray.size()) {
        throw std::runtime_error("pgm buffer size mismatch");
    }
    auto f = open_binary(path);
    f << "P5\n" << width << " " << height << "\n255\n";
    f.write(reinterpret_cast<const char*>(gray.data()), static_cast<std::streamsize>(gray.size()));
}

void write_ppm(const std::string& path, int width, int height,
               const std::vector<uint8_t>& rgb) {
    if (static_cast<size_t>(width) * height * 3 != rgb.size()) {
        throw std::runtime_error("ppm buffer size mismatch");
    }
    auto f = open_binary(path);
    f << "P6\n" << width << " " << height << "\n255\n";
    f.write(reinterpret_cast<const char*>(rgb.data()), static_cast<std::streamsize>(rgb.size()));
}

}  // namespace copo
