#pragma once

#include "reid/tensor.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>

namespace reid {

/// Versioned container of named parameter matrices plus a free-form config
/// echo. Little-endian, fixed layout, so save -> load -> save is byte-stable.
template <typename S>
struct Checkpoint {
    static constexpr uint32_t kMagic = 0x5244434Bu;  // "RDCK"
    static constexpr uint32_t kVersion = 1;

    std::map<std::string, Mat<S>> tensors;  // ordered by name
    std::string config_echo;

    void save(const std::filesystem::path& path) const {
        std::ofstream f(path, std::ios::binary);
        if (!f) throw std::runtime_error("checkpoint save: cannot open " + path.string());
        write_u32(f, kMagic);
        write_u32(f, kVersion);
        write_u32(f, static_cast<uint32_t>(sizeof(S)));
        write_str(f, config_echo);
        write_u32(f, static_cast<uint32_t>(tensors.size()));
        for (const auto& [name, m] : tensors) {
            write_str(f, name);
            write_u32(f, static_cast<uint32_t>(m.rows()));
            write_u32(f, static_cast<uint32_t>(m.cols()));
            for (int j = 0; j < m.cols(); ++j)
                for (int i = 0; i < m.rows(); ++i) {
                    S v = m(i, j);
                    f.write(reinterpret_cast<const char*>(&v), sizeof(S));
                }
        }
    }

    static Checkpoint load(const std::filesystem::path& path) {
        std::ifstream f(path, std::ios::binary);
        if (!f) throw std::runtime_error("checkpoint load: cannot open " + path.string());
        if (read_u32(f) != kMagic) throw std::runtime_error("checkpoint load: bad magic");
        const uint32_t version = read_u32(f);
        if (version != kVersion)
            throw std::runtime_error("checkpoint load: unsupported version " +
                                     std::to_string(version));
        if (read_u32(f) != sizeof(S))
            throw std::runtime_error("checkpoint load: scalar width mismatch");
        Checkpoint ck;
        ck.config_echo = read_str(f);
        const uint32_t n = read_u32(f);
        for (uint32_t k = 0; k < n; ++k) {
            std::string name = read_str(f);
            const uint32_t rows = read_u32(f);
            const uint32_t cols = read_u32(f);
            Mat<S> m(rows, cols);
            for (uint32_t j = 0; j < cols; ++j)
                for (uint32_t i = 0; i < rows; ++i) {
                    S v;
                    f.read(reinterpret_cast<char*>(&v), sizeof(S));
                    m(i, j) = v;
                }
            if (!f) throw std::runtime_error("checkpoint load: truncated " + path.string());
            ck.tensors[name] = std::move(m);
        }
        return ck;
    }

    const Mat<S>& get(const std::string& name) const {
        auto it = tensors.find(name);
        if (it == tensors.end())
            throw std::runtime_error("checkpoint: missing tensor " + name);
        return it->second;
    }

private:
    static void write_u32(std::ofstream& f, uint32_t v) {
        unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16),
                              static_cast<unsigned char>(v >> 24)};
        f.write(reinterpret_cast<const char*>(b), 4);
    }
    static uint32_t read_u32(std::ifstream& f) {
        unsigned char b[4];
        f.read(reinterpret_cast<char*>(b), 4);
        return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
               (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
    }
    static void write_str(std::ofstream& f, const std::string& s) {
        write_u32(f, static_cast<uint32_t>(s.size()));
        f.write(s.data(), static_cast<std::streamsize>(s.size()));
    }
    static std::string read_str(std::ifstream& f) {
        const uint32_t n = read_u32(f);
        std::string s(n, '\0');
        f.read(s.data(), n);
        return s;
    }
};

}  // namespace reid
