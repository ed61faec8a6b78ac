#pragma once

#include "reid/image.hpp"
#include "reid/rng.hpp"
#include "reid/tensor.hpp"

#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace reid::data {

template <typename S>
struct Dataset {
    std::vector<ImageSample<S>> samples;
    int num_identities = 0;
    int num_cameras = 0;
    std::string domain_tag;  // "source" | "target"

    size_t size() const { return samples.size(); }
};

template <typename S>
struct PKBatch {
    std::vector<ImageSample<S>> samples;
    std::vector<int> indices;  // positions in the source dataset
    int P = 0, K = 0;
};

struct IdentityAppearance {
    std::array<double, 3> torso{}, legs{}, head{};
    double build_w = 1.0;
    double leg_len = 0.36;   // fraction of image height
    double head_r = 0.085;   // fraction of image height
};

struct CameraStyle {
    double hue_deg = 0.0;
    double gamma = 1.0;
    int background = 0;  // 0 solid, 1 hstripes, 2 vstripes, 3 checker
    std::array<double, 3> bg_a{}, bg_b{};
};

struct SynthConfig {
    int num_identities = 20;       // per domain (train split)
    int num_test_identities = 10;  // per domain, used by make_benchmark
    int num_cameras_source = 4;
    int num_cameras_target = 4;
    int images_per_id_per_camera = 4;
    int img_h = 64;
    int img_w = 32;
    std::uint64_t seed = 7;
    double min_color_dist = 0.35;
    // When empty these are derived deterministically from `seed`.
    std::vector<IdentityAppearance> identities;  // source pool then target pool
    std::vector<CameraStyle> cameras;            // source cameras then target cameras

    void validate() const {
        if (num_identities <= 0) throw std::invalid_argument("synth: zero identities");
        if (img_h < 16 || img_w < 8) throw std::invalid_argument("synth: image too small");
        if (num_cameras_source <= 0 || num_cameras_target <= 0)
            throw std::invalid_argument("synth: need at least one camera per domain");
        if (images_per_id_per_camera <= 0)
            throw std::invalid_argument("synth: images_per_id_per_camera must be positive");
    }
};

// ---------------------------------------------------------------------------
// Identity / camera parameter draws
// ---------------------------------------------------------------------------

inline double appearance_distance(const IdentityAppearance& a, const IdentityAppearance& b) {
    double d2 = 0;
    for (int i = 0; i < 3; ++i) {
        d2 += (a.torso[i] - b.torso[i]) * (a.torso[i] - b.torso[i]);
        d2 += (a.legs[i] - b.legs[i]) * (a.legs[i] - b.legs[i]);
    }
    return std::sqrt(d2);
}

/// Rejection-samples `count` appearances whose pairwise torso+legs color
/// distance stays above cfg.min_color_dist.
inline std::vector<IdentityAppearance> draw_identity_pool(const SynthConfig& cfg, int count,
                                                          Rng& rng) {
    std::vector<IdentityAppearance> pool;
    pool.reserve(static_cast<size_t>(count));
    const long max_tries = 2000L * count + 2000;
    long tries = 0;
    while (static_cast<int>(pool.size()) < count) {
        if (++tries > max_tries)
            throw std::invalid_argument(
                "synth: cannot place " + std::to_string(count) +
                " identities with min_color_dist=" + std::to_string(cfg.min_color_dist));
        IdentityAppearance id;
        for (int i = 0; i < 3; ++i) id.torso[i] = rng.uniform(0.05, 0.95);
        for (int i = 0; i < 3; ++i) id.legs[i] = rng.uniform(0.05, 0.95);
        id.head = {0.9 + rng.uniform(-0.05, 0.05), 0.75 + rng.uniform(-0.05, 0.05),
                   0.62 + rng.uniform(-0.05, 0.05)};
        id.build_w = rng.uniform(0.85, 1.15);
        id.leg_len = rng.uniform(0.30, 0.40);
        id.head_r = rng.uniform(0.075, 0.095);
        bool ok = true;
        for (const auto& other : pool)
            if (appearance_distance(id, other) < cfg.min_color_dist) {
                ok = false;
                break;
            }
        if (ok) pool.push_back(id);
    }
    return pool;
}

/// Styles for all source + target cameras. Hues are spread over the full
/// circle in global camera order, so the two domains occupy disjoint hue
/// bands and the cross-domain gap is real.
inline std::vector<CameraStyle> draw_camera_styles(const SynthConfig& cfg, Rng& rng) {
    const int total = cfg.num_cameras_source + cfg.num_cameras_target;
    std::vector<CameraStyle> styles(static_cast<size_t>(total));
    for (int k = 0; k < total; ++k) {
        auto& st = styles[static_cast<size_t>(k)];
        st.hue_deg = 360.0 * k / total + rng.uniform(-10.0, 10.0);
        st.gamma = std::exp(std::log(0.7) +
                            (std::log(1.4) - std::log(0.7)) * ((k * 7) % total) / double(total)) *
                   std::exp(rng.uniform(-0.05, 0.05));
        st.background = k % 4;
        const double base = rng.uniform(0.10, 0.40);
        for (int i = 0; i < 3; ++i) st.bg_a[i] = clamp01(base + rng.uniform(-0.06, 0.06));
        const double base2 = base + rng.uniform(0.08, 0.22);
        for (int i = 0; i < 3; ++i) st.bg_b[i] = clamp01(base2 + rng.uniform(-0.06, 0.06));
    }
    return styles;
}

inline std::vector<CameraStyle> camera_styles(const SynthConfig& cfg) {
    if (!cfg.cameras.empty()) return cfg.cameras;
    Rng rng(cfg.seed);
    Rng cam_rng = rng.split(2);
    return draw_camera_styles(cfg, cam_rng);
}

// ---------------------------------------------------------------------------
// Renderer: stacked head/torso/legs silhouette on a camera-styled background
// ---------------------------------------------------------------------------

template <typename S>
ImageSample<S> render_person(const IdentityAppearance& id, const CameraStyle& cam, int h, int w,
                             Rng& pose_rng) {
    const double dx = pose_rng.uniform(-0.08, 0.08) * w;
    const double dy = pose_rng.uniform(-0.03, 0.03) * h;
    const double scale = pose_rng.uniform(0.92, 1.08);

    ImageSample<S> s;
    s.pixels = Tensor<S>(3, h, w);
    s.mask = Tensor<S>(1, h, w);

    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            bool alt = false;
            switch (cam.background) {
                case 1: alt = (y / 4) % 2 == 1; break;
                case 2: alt = (x / 4) % 2 == 1; break;
                case 3: alt = ((x / 4) + (y / 4)) % 2 == 1; break;
                default: break;
            }
            const auto& bg = alt ? cam.bg_b : cam.bg_a;
            for (int ch = 0; ch < 3; ++ch) s.pixels.at(ch, y, x) = S(bg[static_cast<size_t>(ch)]);
        }

    const double cx = w / 2.0 + dx;
    const double top = 0.06 * h + dy;
    const double head_ry = id.head_r * h * scale;
    const double head_rx = 0.8 * head_ry;
    const double head_cy = top + head_ry;
    const double torso_top = top + 2.0 * head_ry + 0.01 * h;
    const double torso_bot = torso_top + 0.30 * h * scale;
    const double torso_hw = 0.21 * w * id.build_w * scale;
    const double leg_bot = torso_bot + id.leg_len * h * scale;
    const double leg_in = 0.04 * w * scale;
    const double leg_out = 0.18 * w * id.build_w * scale;

    auto paint = [&](int y, int x, const std::array<double, 3>& col) {
        for (int ch = 0; ch < 3; ++ch) s.pixels.at(ch, y, x) = S(col[static_cast<size_t>(ch)]);
        s.mask.at(0, y, x) = S(1);
    };

    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double fy = y + 0.5, fx = x + 0.5;
            const double ey = (fy - head_cy) / head_ry, ex = (fx - cx) / head_rx;
            if (ey * ey + ex * ex <= 1.0) {
                paint(y, x, id.head);
                continue;
            }
            if (fy >= torso_top && fy < torso_bot && std::abs(fx - cx) <= torso_hw) {
                paint(y, x, id.torso);
                continue;
            }
            if (fy >= torso_bot && fy < leg_bot) {
                const double ax = std::abs(fx - cx);
                if (ax >= leg_in && ax <= leg_out) paint(y, x, id.legs);
            }
        }

    apply_hue_gamma(s.pixels, S(cam.hue_deg), S(cam.gamma));
    quantize8(s.pixels);
    return s;
}

namespace detail {

template <typename S>
Dataset<S> render_domain(const SynthConfig& cfg, const std::vector<IdentityAppearance>& ids,
                         const std::vector<CameraStyle>& styles, int cam_offset, int num_cams,
                         const std::string& tag, const std::string& id_prefix, Rng pose_rng) {
    Dataset<S> ds;
    ds.num_identities = static_cast<int>(ids.size());
    ds.num_cameras = num_cams;
    ds.domain_tag = tag;
    for (int i = 0; i < static_cast<int>(ids.size()); ++i)
        for (int c = 0; c < num_cams; ++c)
            for (int k = 0; k < cfg.images_per_id_per_camera; ++k) {
                ImageSample<S> s =
                    render_person<S>(ids[static_cast<size_t>(i)],
                                     styles[static_cast<size_t>(cam_offset + c)], cfg.img_h,
                                     cfg.img_w, pose_rng);
                s.identity = i;
                s.camera = c;
                std::ostringstream sid;
                sid << id_prefix << "_id" << i << "_cam" << c << "_im" << k;
                s.sample_id = sid.str();
                ds.samples.push_back(std::move(s));
            }
    return ds;
}

}  // namespace detail

/// Source and target training sets with disjoint identity pools. Pure
/// function of the config (per-seed deterministic down to the byte).
template <typename S>
std::pair<Dataset<S>, Dataset<S>> generate_synthetic(const SynthConfig& cfg) {
    cfg.validate();
    Rng rng(cfg.seed);
    Rng id_rng = rng.split(1);
    Rng cam_rng = rng.split(2);

    std::vector<IdentityAppearance> pool = cfg.identities;
    if (pool.empty()) pool = draw_identity_pool(cfg, 2 * cfg.num_identities, id_rng);
    if (static_cast<int>(pool.size()) < 2 * cfg.num_identities)
        throw std::invalid_argument("synth: identity pool smaller than 2*num_identities");
    std::vector<CameraStyle> styles = cfg.cameras;
    if (styles.empty()) styles = draw_camera_styles(cfg, cam_rng);

    std::vector<IdentityAppearance> src_ids(pool.begin(), pool.begin() + cfg.num_identities);
    std::vector<IdentityAppearance> tgt_ids(pool.begin() + cfg.num_identities,
                                            pool.begin() + 2 * cfg.num_identities);

    Dataset<S> source = detail::render_domain<S>(cfg, src_ids, styles, 0, cfg.num_cameras_source,
                                                 "source", "src", rng.split(3));
    Dataset<S> target =
        detail::render_domain<S>(cfg, tgt_ids, styles, cfg.num_cameras_source,
                                 cfg.num_cameras_target, "target", "tgt", rng.split(4));
    return {std::move(source), std::move(target)};
}

/// Full benchmark: train + query/gallery test splits per domain. Test
/// identities are fresh draws, disjoint from the train pools and each other.
template <typename S>
struct Benchmark {
    Dataset<S> source_train, source_query, source_gallery;
    Dataset<S> target_train, target_query, target_gallery;
};

template <typename S>
Benchmark<S> make_benchmark(const SynthConfig& cfg) {
    cfg.validate();
    Rng rng(cfg.seed);
    Rng id_rng = rng.split(1);
    Rng cam_rng = rng.split(2);

    const int m_train = cfg.num_identities, m_test = cfg.num_test_identities;
    std::vector<IdentityAppearance> pool = cfg.identities;
    if (pool.empty()) pool = draw_identity_pool(cfg, 2 * (m_train + m_test), id_rng);
    std::vector<CameraStyle> styles = cfg.cameras;
    if (styles.empty()) styles = draw_camera_styles(cfg, cam_rng);

    auto slice = [&](int lo, int n) {
        return std::vector<IdentityAppearance>(pool.begin() + lo, pool.begin() + lo + n);
    };
    Benchmark<S> b;
    b.source_train = detail::render_domain<S>(cfg, slice(0, m_train), styles, 0,
                                              cfg.num_cameras_source, "source", "src",
                                              rng.split(3));
    b.target_train = detail::render_domain<S>(cfg, slice(m_train, m_train), styles,
                                              cfg.num_cameras_source, cfg.num_cameras_target,
                                              "target", "tgt", rng.split(4));
    Dataset<S> src_test = detail::render_domain<S>(cfg, slice(2 * m_train, m_test), styles, 0,
                                                   cfg.num_cameras_source, "source", "srctest",
                                                   rng.split(5));
    Dataset<S> tgt_test = detail::render_domain<S>(
        cfg, slice(2 * m_train + m_test, m_test), styles, cfg.num_cameras_source,
        cfg.num_cameras_target, "target", "tgttest", rng.split(6));

    // first image of each (id, camera) is the query, the rest go to the gallery
    auto split_qg = [&](const Dataset<S>& test, Dataset<S>& q, Dataset<S>& g) {
        q.num_identities = g.num_identities = test.num_identities;
        q.num_cameras = g.num_cameras = test.num_cameras;
        q.domain_tag = g.domain_tag = test.domain_tag;
        std::map<std::pair<int, int>, int> seen;
        for (const auto& s : test.samples) {
            int& n = seen[{s.identity, s.camera}];
            (n++ == 0 ? q : g).samples.push_back(s);
        }
    };
    split_qg(src_test, b.source_query, b.source_gallery);
    split_qg(tgt_test, b.target_query, b.target_gallery);
    return b;
}

// ---------------------------------------------------------------------------
// Manifest persistence: header `path,identity,camera`, identity -1 = unlabeled
// ---------------------------------------------------------------------------

template <typename S>
void save_dataset(const Dataset<S>& ds, const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir / "images");
    fs::create_directories(dir / "masks");
    std::ofstream manifest(dir / "manifest.csv");
    if (!manifest) throw std::runtime_error("save_dataset: cannot write manifest in " + dir.string());
    manifest << "path,identity,camera\n";
    for (const auto& s : ds.samples) {
        const std::string img_rel = "images/" + s.sample_id + ".ppm";
        write_ppm(dir / img_rel, s.pixels);
        if (s.has_mask()) write_pgm(dir / ("masks/" + s.sample_id + ".pgm"), s.mask);
        manifest << img_rel << "," << s.identity << "," << s.camera << "\n";
    }
}

template <typename S>
Dataset<S> load_manifest(const std::filesystem::path& path, int declared_cameras = -1) {
    namespace fs = std::filesystem;
    fs::path manifest_path = fs::is_directory(path) ? path / "manifest.csv" : path;
    std::ifstream f(manifest_path);
    if (!f) throw std::runtime_error("load_manifest: cannot open " + manifest_path.string());
    const fs::path base = manifest_path.parent_path();

    std::string line;
    if (!std::getline(f, line) || line != "path,identity,camera")
        throw std::runtime_error("load_manifest: bad header in " + manifest_path.string());

    Dataset<S> ds;
    int row = 1;
    int max_id = -1, max_cam = -1;
    while (std::getline(f, line)) {
        ++row;
        if (line.empty()) continue;
        const auto c1 = line.find(',');
        const auto c2 = line.find(',', c1 == std::string::npos ? c1 : c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos)
            throw std::runtime_error("load_manifest: malformed row " + std::to_string(row));
        const std::string p = line.substr(0, c1);
        const std::string ids = line.substr(c1 + 1, c2 - c1 - 1);
        const std::string cams = line.substr(c2 + 1);
        int identity, camera;
        try {
            identity = std::stoi(ids);
            camera = std::stoi(cams);
        } catch (const std::exception&) {
            throw std::runtime_error("load_manifest: malformed row " + std::to_string(row));
        }
        if (identity < -1 || camera < 0)
            throw std::runtime_error("load_manifest: malformed row " + std::to_string(row));
        if (declared_cameras >= 0 && camera >= declared_cameras)
            throw std::runtime_error("load_manifest: camera index " + std::to_string(camera) +
                                     " out of range at row " + std::to_string(row));
        const fs::path img_path = base / p;
        if (!fs::exists(img_path))
            throw std::runtime_error("load_manifest: missing image at row " + std::to_string(row) +
                                     ": " + img_path.string());
        ImageSample<S> s;
        s.pixels = read_ppm<S>(img_path);
        s.identity = identity;
        s.camera = camera;
        s.sample_id = img_path.stem().string();
        const fs::path mask_path = base / "masks" / (img_path.stem().string() + ".pgm");
        if (fs::exists(mask_path)) {
            s.mask = read_pgm<S>(mask_path);
            s.mask.m = (s.mask.m.array() >= S(0.5)).template cast<S>();
        }
        max_id = std::max(max_id, identity);
        max_cam = std::max(max_cam, camera);
        ds.samples.push_back(std::move(s));
    }
    ds.num_identities = max_id + 1;
    ds.num_cameras = declared_cameras >= 0 ? declared_cameras : max_cam + 1;
    return ds;
}

// ---------------------------------------------------------------------------
// PK sampling
// ---------------------------------------------------------------------------

template <typename S>
PKBatch<S> pk_sample(const Dataset<S>& ds, int P, int K, Rng& rng) {
    std::map<int, std::vector<int>> by_id;
    for (int i = 0; i < static_cast<int>(ds.samples.size()); ++i)
        if (ds.samples[static_cast<size_t>(i)].has_identity())
            by_id[ds.samples[static_cast<size_t>(i)].identity].push_back(i);
    if (static_cast<int>(by_id.size()) < P)
        throw std::runtime_error("pk_sample: only " + std::to_string(by_id.size()) +
                                 " labeled identities, need " + std::to_string(P));
    std::vector<int> ids;
    ids.reserve(by_id.size());
    for (const auto& [id, _] : by_id) ids.push_back(id);
    rng.shuffle(ids);
    ids.resize(static_cast<size_t>(P));

    PKBatch<S> batch;
    batch.P = P;
    batch.K = K;
    for (int id : ids) {
        const auto& pool = by_id[id];
        if (static_cast<int>(pool.size()) >= K) {
            std::vector<int> copy = pool;
            rng.shuffle(copy);
            for (int k = 0; k < K; ++k) batch.indices.push_back(copy[static_cast<size_t>(k)]);
        } else {
            for (int k = 0; k < K; ++k)
                batch.indices.push_back(
                    pool[static_cast<size_t>(rng.uniform_int(0, static_cast<int>(pool.size()) - 1))]);
        }
    }
    for (int i : batch.indices) batch.samples.push_back(ds.samples[static_cast<size_t>(i)]);
    return batch;
}

// ---------------------------------------------------------------------------
// Augmentation
// ---------------------------------------------------------------------------

struct AugmentPolicy {
    bool crop = false;
    bool hflip = false;
    bool erase = false;
    bool color_jitter = false;
    double crop_scale_lo = 0.75, crop_scale_hi = 1.0;
    double flip_prob = 0.5;
    double erase_prob = 0.5;
    double erase_frac_lo = 0.10, erase_frac_hi = 0.30;
    double erase_aspect_lo = 0.5, erase_aspect_hi = 2.0;
    double jitter_strength = 0.10;

    static AugmentPolicy pretrain() {
        AugmentPolicy p;
        p.crop = p.hflip = true;
        return p;
    }
    static AugmentPolicy finetune() {
        AugmentPolicy p;
        p.crop = p.hflip = p.erase = true;
        return p;
    }
};

template <typename S>
ImageSample<S> augment(const ImageSample<S>& in, const AugmentPolicy& policy, Rng& rng) {
    ImageSample<S> s = in;
    const int h = s.pixels.h, w = s.pixels.w;

    if (policy.crop) {
        const double sh = rng.uniform(policy.crop_scale_lo, policy.crop_scale_hi);
        const double sw = rng.uniform(policy.crop_scale_lo, policy.crop_scale_hi);
        int ch = std::min(h, std::max(1, static_cast<int>(std::lround(sh * h))));
        int cw = std::min(w, std::max(1, static_cast<int>(std::lround(sw * w))));
        const int oy = ch < h ? rng.uniform_int(0, h - ch) : 0;
        const int ox = cw < w ? rng.uniform_int(0, w - cw) : 0;
        if (ch != h || cw != w) {
            s.pixels = resize_nearest(crop(s.pixels, oy, ox, ch, cw), h, w);
            if (s.has_mask()) s.mask = resize_nearest(crop(s.mask, oy, ox, ch, cw), h, w);
        }
    }
    if (policy.hflip && rng.bernoulli(policy.flip_prob)) {
        s.pixels = hflip(s.pixels);
        if (s.has_mask()) s.mask = hflip(s.mask);
    }
    if (policy.color_jitter) {
        for (int ch = 0; ch < 3; ++ch) {
            const S gain = S(rng.uniform(1.0 - policy.jitter_strength, 1.0 + policy.jitter_strength));
            s.pixels.m.row(ch) = (s.pixels.m.row(ch) * gain).array().max(S(0)).min(S(1));
        }
    }
    if (policy.erase && rng.bernoulli(policy.erase_prob)) {
        int eh = 0, ew = 0;
        for (int attempt = 0; attempt < 50; ++attempt) {
            const double frac = rng.uniform(policy.erase_frac_lo, policy.erase_frac_hi);
            const double ar = rng.uniform(policy.erase_aspect_lo, policy.erase_aspect_hi);
            eh = std::min(h, std::max(1, static_cast<int>(std::lround(std::sqrt(frac * h * w * ar)))));
            ew = std::min(w, std::max(1, static_cast<int>(std::lround(frac * h * w / eh))));
            const double got = double(eh) * ew / (double(h) * w);
            if (got >= policy.erase_frac_lo && got <= policy.erase_frac_hi) break;
            eh = ew = 0;
        }
        if (eh > 0) {
            const int oy = rng.uniform_int(0, h - eh);
            const int ox = rng.uniform_int(0, w - ew);
            for (int y = oy; y < oy + eh; ++y)
                for (int x = ox; x < ox + ew; ++x)
                    for (int ch = 0; ch < 3; ++ch)
                        s.pixels.at(ch, y, x) = S(rng.uniform());
        }
    }
    return s;
}

}  // namespace reid::data
