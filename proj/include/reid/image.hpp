#pragma once

#include "reid/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>

namespace reid {

/// One image record: pixels in [0,1], optional identity, camera index,
/// optional binary foreground mask.
template <typename S>
struct ImageSample {
    Tensor<S> pixels;  // 3 x H x W
    int identity = -1; // -1 = unlabeled
    int camera = 0;
    Tensor<S> mask;    // 1 x H x W in {0,1}; empty() = absent
    std::string sample_id;

    bool has_identity() const { return identity >= 0; }
    bool has_mask() const { return !mask.empty(); }
};

template <typename S>
inline S clamp01(S v) {
    return std::min<S>(S(1), std::max<S>(S(0), v));
}

/// Snap to the 8-bit grid so in-memory pixels equal their on-disk encoding.
template <typename S>
void quantize8(Tensor<S>& t) {
    t.m = (t.m.array() * S(255)).round() / S(255);
}

// ---------------------------------------------------------------------------
// Binary PPM (P6) / PGM (P5) io. Deterministic bytes, no external codecs.
// ---------------------------------------------------------------------------

template <typename S>
void write_ppm(const std::filesystem::path& path, const Tensor<S>& img) {
    if (img.c != 3) throw std::invalid_argument("write_ppm: need 3 channels");
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("write_ppm: cannot open " + path.string());
    f << "P6\n" << img.w << " " << img.h << "\n255\n";
    std::string buf(static_cast<size_t>(img.h) * img.w * 3, '\0');
    size_t k = 0;
    for (int y = 0; y < img.h; ++y)
        for (int x = 0; x < img.w; ++x)
            for (int ch = 0; ch < 3; ++ch)
                buf[k++] = static_cast<char>(static_cast<uint8_t>(
                    std::lround(clamp01(img.at(ch, y, x)) * S(255))));
    f.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

template <typename S>
void write_pgm(const std::filesystem::path& path, const Tensor<S>& img) {
    if (img.c != 1) throw std::invalid_argument("write_pgm: need 1 channel");
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("write_pgm: cannot open " + path.string());
    f << "P5\n" << img.w << " " << img.h << "\n255\n";
    std::string buf(static_cast<size_t>(img.h) * img.w, '\0');
    size_t k = 0;
    for (int y = 0; y < img.h; ++y)
        for (int x = 0; x < img.w; ++x)
            buf[k++] = static_cast<char>(static_cast<uint8_t>(
                std::lround(clamp01(img.at(0, y, x)) * S(255))));
    f.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

namespace detail {
inline int read_pnm_token(std::istream& f) {
    // skips whitespace and '#' comments
    for (;;) {
        int ch = f.peek();
        if (ch == '#') {
            std::string line;
            std::getline(f, line);
        } else if (std::isspace(ch)) {
            f.get();
        } else {
            break;
        }
    }
    int v = 0;
    f >> v;
    return v;
}
}  // namespace detail

template <typename S>
Tensor<S> read_ppm(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("read_ppm: cannot open " + path.string());
    std::string magic;
    f >> magic;
    if (magic != "P6") throw std::runtime_error("read_ppm: bad magic in " + path.string());
    const int w = detail::read_pnm_token(f);
    const int h = detail::read_pnm_token(f);
    const int maxv = detail::read_pnm_token(f);
    if (maxv != 255) throw std::runtime_error("read_ppm: unsupported maxval");
    f.get();  // single whitespace after header
    std::string buf(static_cast<size_t>(h) * w * 3, '\0');
    f.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!f) throw std::runtime_error("read_ppm: truncated " + path.string());
    Tensor<S> img(3, h, w);
    size_t k = 0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int ch = 0; ch < 3; ++ch)
                img.at(ch, y, x) = static_cast<S>(static_cast<uint8_t>(buf[k++])) / S(255);
    return img;
}

template <typename S>
Tensor<S> read_pgm(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("read_pgm: cannot open " + path.string());
    std::string magic;
    f >> magic;
    if (magic != "P5") throw std::runtime_error("read_pgm: bad magic in " + path.string());
    const int w = detail::read_pnm_token(f);
    const int h = detail::read_pnm_token(f);
    const int maxv = detail::read_pnm_token(f);
    if (maxv != 255) throw std::runtime_error("read_pgm: unsupported maxval");
    f.get();
    std::string buf(static_cast<size_t>(h) * w, '\0');
    f.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!f) throw std::runtime_error("read_pgm: truncated " + path.string());
    Tensor<S> img(1, h, w);
    size_t k = 0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            img.at(0, y, x) = static_cast<S>(static_cast<uint8_t>(buf[k++])) / S(255);
    return img;
}

// ---------------------------------------------------------------------------
// Color transforms used by the synthetic renderer and augmentation.
// ---------------------------------------------------------------------------

/// Rotation of RGB around the gray axis (Rodrigues form), the usual
/// luminance-free hue shift. Output clamped to [0,1] by callers.
template <typename S>
Eigen::Matrix<S, 3, 3> hue_rotation_matrix(S degrees) {
    const S a = degrees * S(M_PI / 180.0);
    const S c = std::cos(a), s = std::sin(a);
    const S k = S(1) / S(std::sqrt(3.0));
    Eigen::Matrix<S, 3, 3> K;
    K << S(0), -k, k, k, S(0), -k, -k, k, S(0);
    return Eigen::Matrix<S, 3, 3>::Identity() * c + K * s +
           Eigen::Matrix<S, 3, 3>::Constant(k * k) * (S(1) - c);
}

template <typename S>
void apply_hue_gamma(Tensor<S>& img, S hue_degrees, S gamma) {
    const Eigen::Matrix<S, 3, 3> R = hue_rotation_matrix(hue_degrees);
    img.m = (R * img.m).eval();
    img.m = img.m.array().max(S(0)).min(S(1)).pow(gamma);
}

template <typename S>
Tensor<S> hflip(const Tensor<S>& t) {
    Tensor<S> out(t.c, t.h, t.w);
    for (int y = 0; y < t.h; ++y)
        for (int x = 0; x < t.w; ++x)
            out.m.col(y * t.w + x) = t.m.col(y * t.w + (t.w - 1 - x));
    return out;
}

/// Nearest-neighbor resize; keeps binary masks binary.
template <typename S>
Tensor<S> resize_nearest(const Tensor<S>& t, int nh, int nw) {
    Tensor<S> out(t.c, nh, nw);
    for (int y = 0; y < nh; ++y) {
        const int sy = std::min(t.h - 1, static_cast<int>(static_cast<long>(y) * t.h / nh));
        for (int x = 0; x < nw; ++x) {
            const int sx = std::min(t.w - 1, static_cast<int>(static_cast<long>(x) * t.w / nw));
            out.m.col(y * nw + x) = t.m.col(sy * t.w + sx);
        }
    }
    return out;
}

template <typename S>
Tensor<S> crop(const Tensor<S>& t, int oy, int ox, int ch, int cw) {
    Tensor<S> out(t.c, ch, cw);
    for (int y = 0; y < ch; ++y)
        for (int x = 0; x < cw; ++x)
            out.m.col(y * cw + x) = t.m.col((oy + y) * t.w + (ox + x));
    return out;
}

}  // namespace reid
