#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "copo/net/params.hpp"

namespace copo::net {

// Versioned binary container: string metadata plus named double vectors.
// Parameter sets, optimizer moments and the LCF state all ride in blobs;
// layer shapes ride in meta and are validated against expectations on
// load by the consumer.
struct Checkpoint {
    static constexpr std::uint32_t kMagic = 0x4f504f43;  // "COPO" little-endian
    static constexpr std::uint32_t kVersion = 1;

    std::map<std::string, std::string> meta;
    std::map<std::string, std::vector<double>> blobs;

    void save(const std::string& path) const;
    static Checkpoint load(const std::string& path);

    void put_shape(const std::string& key, const MlpShape& shape);
    MlpShape get_shape(const std::string& key) const;  // throws when absent/malformed

    void put_int(const std::string& key, long long v);
    long long get_int(const std::string& key, long long fallback) const;
    void put_double(const std::string& key, double v);
    double get_double(const std::string& key, double fallback) const;

    const std::vector<double>& blob(const std::string& key) const;  // throws when absent
};

}  // namespace copo::net
