#include "copo/net/checkpoint.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace copo::net {

namespace {

void write_u32(std::ostream& out, std::uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}
void write_u64(std::ostream& out, std::uint64_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}
void write_str(std::ostream& out, const std::string& s) {
    write_u32(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::uint32_t read_u32(std::istream& in) {
    std::uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}
std::uint64_t read_u64(std::istream& in) {
    std::uint64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}
std::string read_str(std::istream& in) {
    const std::uint32_t n = read_u32(in);
    if (n > (1u << 20)) throw std::runtime_error("checkpoint string field too long");
    std::string s(n, '\0');
    in.read(s.data(), n);
    return s;
}

}  // namespace

void Checkpoint::save(const std::string& path) const {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write checkpoint: " + tmp);
        write_u32(out, kMagic);
        write_u32(out, kVersion);
        write_u32(out, static_cast<std::uint32_t>(meta.size()));
        for (const auto& [k, v] : meta) {
            write_str(out, k);
            write_str(out, v);
        }
        write_u32(out, static_cast<std::uint32_t>(blobs.size()));
        for (const auto& [k, v] : blobs) {
            write_str(out, k);
            write_u64(out, v.size());
            out.write(reinterpret_cast<const char*>(v.data()),
                      static_cast<std::streamsize>(v.size() * sizeof(double)));
        }
        if (!out) throw std::runtime_error("short write on checkpoint: " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        throw std::runtime_error("cannot move checkpoint into place: " + path);
    }
}

Checkpoint Checkpoint::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
    if (read_u32(in) != kMagic) throw std::runtime_error("not a checkpoint file: " + path);
    const std::uint32_t version = read_u32(in);
    if (version != kVersion) {
        throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));
    }
    Checkpoint ck;
    const std::uint32_t n_meta = read_u32(in);
    for (std::uint32_t i = 0; i < n_meta; ++i) {
        std::string k = read_str(in);
        ck.meta[std::move(k)] = read_str(in);
    }
    const std::uint32_t n_blobs = read_u32(in);
    for (std::uint32_t i = 0; i < n_blobs; ++i) {
        std::string k = read_str(in);
        const std::uint64_t count = read_u64(in);
        if (count > (1ull << 30)) throw std::runtime_error("checkpoint blob too large");
        std::vector<double> v(count);
        in.read(reinterpret_cast<char*>(v.data()),
                static_cast<std::streamsize>(count * sizeof(double)));
        ck.blobs[std::move(k)] = std::move(v);
    }
    if (!in) throw std::runtime_error("truncated checkpoint: " + path);
    return ck;
}

void Checkpoint::put_shape(const std::string& key, const MlpShape& shape) {
    std::ostringstream ss;
    ss << shape.input;
    for (int h : shape.hidden) ss << "," << h;
    ss << "," << shape.output << ";log_std=" << (shape.with_log_std ? 1 : 0);
    meta[key] = ss.str();
}

MlpShape Checkpoint::get_shape(const std::string& key) const {
    const auto it = meta.find(key);
    if (it == meta.end()) throw std::runtime_error("checkpoint missing shape: " + key);
    const std::string& text = it->second;
    const auto semi = text.find(';');
    if (semi == std::string::npos || text.substr(semi, 9) != ";log_std=") {
        throw std::runtime_error("malformed shape entry: " + key);
    }
    std::vector<int> dims;
    std::stringstream ss(text.substr(0, semi));
    std::string tok;
    while (std::getline(ss, tok, ',')) dims.push_back(std::stoi(tok));
    if (dims.size() < 2) throw std::runtime_error("malformed shape entry: " + key);
    MlpShape shape;
    shape.input = dims.front();
    shape.output = dims.back();
    shape.hidden.assign(dims.begin() + 1, dims.end() - 1);
    shape.with_log_std = text.substr(semi + 9) == "1";
    return shape;
}

void Checkpoint::put_int(const std::string& key, long long v) { meta[key] = std::to_string(v); }

long long Checkpoint::get_int(const std::string& key, long long fallback) const {
    const auto it = meta.find(key);
    return it == meta.end() ? fallback : std::stoll(it->second);
}

void Checkpoint::put_double(const std::string& key, double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    meta[key] = buf;
}

double Checkpoint::get_double(const std::string& key, double fallback) const {
    const auto it = meta.find(key);
    return it == meta.end() ? fallback : std::stod(it->second);
}

const std::vector<double>& Checkpoint::blob(const std::string& key) const {
    const auto it = blobs.find(key);
    if (it == blobs.end()) throw std::runtime_error("checkpoint missing blob: " + key);
    return it->second;
}

}  // namespace copo::net
