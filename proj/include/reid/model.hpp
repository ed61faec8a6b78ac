#pragma once

#include "reid/checkpoint.hpp"
#include "reid/image.hpp"
#include "reid/nn.hpp"
#include "reid/rng.hpp"
#include "reid/tensor.hpp"

#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace reid::model {

enum class Pooling { gmp, gap, gmp_all };

inline const char* pooling_name(Pooling p) {
    switch (p) {
        case Pooling::gmp: return "gmp";
        case Pooling::gap: return "gap";
        default: return "gmp_all";
    }
}

inline Pooling pooling_from_name(const std::string& s) {
    if (s == "gmp") return Pooling::gmp;
    if (s == "gap") return Pooling::gap;
    if (s == "gmp_all") return Pooling::gmp_all;
    throw std::invalid_argument("unknown pooling mode: " + s);
}

struct BackboneConfig {
    int in_h = 64, in_w = 32;
    std::vector<int> widths = {16, 32, 64, 128};  // three stride-2 blocks + one stride-1
    Pooling pooling = Pooling::gmp;

    int feat_c() const { return widths.back(); }
    int feat_h() const { return in_h / 8; }
    int feat_w() const { return in_w / 8; }

    std::string echo() const {
        std::ostringstream os;
        os << "backbone.in_h=" << in_h << "\nbackbone.in_w=" << in_w << "\nbackbone.widths=";
        for (size_t i = 0; i < widths.size(); ++i) os << (i ? "," : "") << widths[i];
        os << "\nbackbone.pooling=" << pooling_name(pooling) << "\n";
        return os.str();
    }
};

// ---------------------------------------------------------------------------
// Free functions over feature maps
// ---------------------------------------------------------------------------

using nn::global_avg_pool;
using nn::global_max_pool;

/// Horizontal split into upper/lower halves; row-concatenation of the parts
/// reconstructs the input exactly.
template <typename S>
std::pair<Tensor<S>, Tensor<S>> split_parts(const Tensor<S>& f) {
    if (f.h % 2 != 0) throw std::invalid_argument("split_parts: odd height");
    const int hh = f.h / 2;
    Tensor<S> up(f.c, hh, f.w), lo(f.c, hh, f.w);
    up.m = f.m.leftCols(hh * f.w);
    lo.m = f.m.rightCols(hh * f.w);
    return {std::move(up), std::move(lo)};
}

template <typename S>
Vec<S> classify(const Vec<S>& e, const Mat<S>& head) {
    if (head.cols() != e.size()) throw std::invalid_argument("classify: dimension mismatch");
    return head * e;
}

/// W_c = mean feature of cluster c, copied exactly.
template <typename S>
Mat<S> reinit_classifier(const std::vector<Vec<S>>& means) {
    if (means.empty()) throw std::invalid_argument("reinit_classifier: empty means");
    Mat<S> w(static_cast<int>(means.size()), static_cast<int>(means[0].size()));
    for (int i = 0; i < w.rows(); ++i) {
        if (means[static_cast<size_t>(i)].size() != w.cols())
            throw std::invalid_argument("reinit_classifier: inconsistent mean lengths");
        w.row(i) = means[static_cast<size_t>(i)].transpose();
    }
    return w;
}

// ---------------------------------------------------------------------------
// Two-branch re-ID model: conv encoder + BN bottleneck + bias-free classifier
// + mirrored decoder for the reconstruction branch.
// ---------------------------------------------------------------------------

template <typename S>
class ReidModel {
public:
    ReidModel(const BackboneConfig& cfg, int num_classes, Rng& rng) : cfg_(cfg) {
        if (static_cast<int>(cfg.widths.size()) != 4)
            throw std::invalid_argument("backbone: expected 4 widths");
        if (cfg.in_h % 8 != 0 || cfg.in_w % 8 != 0)
            throw std::invalid_argument("backbone: input dims must be multiples of 8");
        const auto& w = cfg.widths;
        auto block = [&](int ci, int co, int stride, const std::string& nm) {
            encoder_.add(std::make_unique<nn::Conv2d<S>>(ci, co, 3, 3, stride, 1, rng, nm));
            auto bn = std::make_unique<nn::BatchNorm<S>>(co, nm + "_bn");
            encoder_bns_.push_back(bn.get());
            encoder_.add(std::move(bn));
            encoder_.add(std::make_unique<nn::ReLU<S>>());
        };
        block(3, w[0], 2, "enc1");
        block(w[0], w[1], 2, "enc2");
        block(w[1], w[2], 2, "enc3");
        block(w[2], w[3], 1, "enc4");

        bneck_ = std::make_unique<nn::BatchNorm<S>>(w[3], "bneck");

        cls_w_ = Mat<S>::Zero(num_classes, w[3]);
        for (int i = 0; i < cls_w_.rows(); ++i)
            for (int j = 0; j < cls_w_.cols(); ++j)
                cls_w_(i, j) = S(rng.normal()) * S(0.01);
        cls_dw_ = Mat<S>::Zero(cls_w_.rows(), cls_w_.cols());

        decoder_.add(std::make_unique<nn::ConvTranspose2d<S>>(w[3], w[2], 3, 3, 1, 1, rng, "dec1"));
        decoder_.add(std::make_unique<nn::InstanceNorm<S>>(w[2], "dec1_in"));
        decoder_.add(std::make_unique<nn::ReLU<S>>());
        decoder_.add(std::make_unique<nn::ConvTranspose2d<S>>(w[2], w[1], 4, 4, 2, 1, rng, "dec2"));
        decoder_.add(std::make_unique<nn::InstanceNorm<S>>(w[1], "dec2_in"));
        decoder_.add(std::make_unique<nn::ReLU<S>>());
        decoder_.add(std::make_unique<nn::ConvTranspose2d<S>>(w[1], w[0], 4, 4, 2, 1, rng, "dec3"));
        decoder_.add(std::make_unique<nn::InstanceNorm<S>>(w[0], "dec3_in"));
        decoder_.add(std::make_unique<nn::ReLU<S>>());
        decoder_.add(std::make_unique<nn::ConvTranspose2d<S>>(w[0], 3, 4, 4, 2, 1, rng, "dec4"));
        decoder_.add(std::make_unique<nn::Sigmoid<S>>());
    }

    const BackboneConfig& config() const { return cfg_; }
    int num_classes() const { return static_cast<int>(cls_w_.rows()); }
    Mat<S>& classifier() { return cls_w_; }
    const Mat<S>& classifier() const { return cls_w_; }

    void set_classifier(const Mat<S>& w) {
        if (w.cols() != cfg_.feat_c())
            throw std::invalid_argument("set_classifier: feature dim mismatch");
        cls_w_ = w;
        cls_dw_ = Mat<S>::Zero(w.rows(), w.cols());
    }

    // -- inference -----------------------------------------------------------

    Tensor<S> encode(const Tensor<S>& image) {
        check_shape(image, 3, cfg_.in_h, cfg_.in_w, "encode");
        Batch<S> out = encoder_.forward({image}, false, nullptr);
        return out[0];
    }

    Batch<S> encode_batch_eval(const Batch<S>& images) {
        return encoder_.forward(images, false, nullptr);
    }

    /// pool (per config) -> BN bottleneck (running stats) = retrieval descriptor.
    Vec<S> descriptor_from_features(const Tensor<S>& f) {
        Vec<S> v = cfg_.pooling == Pooling::gap ? global_avg_pool(f) : global_max_pool(f);
        Tensor<S> t(f.c, 1, 1);
        t.m.col(0) = v;
        Batch<S> out = bneck_->forward({t}, false, nullptr);
        return out[0].m.col(0);
    }

    Vec<S> descriptor(const Tensor<S>& image) { return descriptor_from_features(encode(image)); }

    /// raw pooled part vectors (upper, lower) used by the partial branch.
    std::pair<Vec<S>, Vec<S>> part_features(const Tensor<S>& f) {
        const int half = (f.h / 2) * f.w;
        Tensor<S> up(f.c, f.h / 2, f.w), lo(f.c, f.h / 2, f.w);
        up.m = f.m.leftCols(half);
        lo.m = f.m.rightCols(half);
        if (cfg_.pooling == Pooling::gap)
            return {global_avg_pool(up), global_avg_pool(lo)};
        return {global_max_pool(up), global_max_pool(lo)};
    }

    Batch<S> decode_eval(const Batch<S>& features) { return decoder_.forward(features, false, nullptr); }

    // -- training ------------------------------------------------------------

    struct ForwardCache {
        nn::CachePtr<S> enc;
        nn::CachePtr<S> bneck;
        Batch<S> features;
        Mat<S> pooled_tri;                      // n x C, raw (triplet branch)
        std::vector<std::vector<int>> tri_arg;  // argmax when max-pooled
        Mat<S> pooled_cls;                      // n x C, pre-bottleneck
        std::vector<std::vector<int>> cls_arg;
        Mat<S> bneck_out;  // n x C
        Mat<S> logits;     // n x num_classes
        Mat<S> f_up, f_lower;                   // n x C, raw part pools
        std::vector<std::vector<int>> up_arg, lo_arg;
        bool with_parts = false;
    };

    void forward_train(const Batch<S>& images, ForwardCache& c, bool with_parts = false) {
        c.features = encoder_.forward(images, true, &c.enc);
        const int n = static_cast<int>(images.size());
        const int C = cfg_.feat_c();
        c.pooled_tri.resize(n, C);
        c.pooled_cls.resize(n, C);
        c.tri_arg.assign(static_cast<size_t>(n), {});
        c.cls_arg.assign(static_cast<size_t>(n), {});
        c.with_parts = with_parts;
        const bool tri_max = cfg_.pooling != Pooling::gap;
        const bool cls_max = cfg_.pooling == Pooling::gmp_all;
        for (int i = 0; i < n; ++i) {
            const auto& f = c.features[static_cast<size_t>(i)];
            c.pooled_tri.row(i) =
                (tri_max ? global_max_pool(f, &c.tri_arg[static_cast<size_t>(i)])
                         : global_avg_pool(f))
                    .transpose();
            c.pooled_cls.row(i) =
                (cls_max ? global_max_pool(f, &c.cls_arg[static_cast<size_t>(i)])
                         : global_avg_pool(f))
                    .transpose();
        }
        Batch<S> pre;
        pre.reserve(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) {
            Tensor<S> t(C, 1, 1);
            t.m.col(0) = c.pooled_cls.row(i).transpose();
            pre.push_back(std::move(t));
        }
        Batch<S> post = bneck_->forward(pre, true, &c.bneck);
        c.bneck_out.resize(n, C);
        for (int i = 0; i < n; ++i) c.bneck_out.row(i) = post[static_cast<size_t>(i)].m.col(0).transpose();
        c.logits = c.bneck_out * cls_w_.transpose();

        if (with_parts) {
            const auto& f0 = c.features[0];
            const int half = (f0.h / 2) * f0.w;
            c.f_up.resize(n, C);
            c.f_lower.resize(n, C);
            c.up_arg.assign(static_cast<size_t>(n), {});
            c.lo_arg.assign(static_cast<size_t>(n), {});
            const bool part_max = cfg_.pooling != Pooling::gap;
            for (int i = 0; i < n; ++i) {
                const auto& f = c.features[static_cast<size_t>(i)];
                Tensor<S> up(f.c, f.h / 2, f.w), lo(f.c, f.h / 2, f.w);
                up.m = f.m.leftCols(half);
                lo.m = f.m.rightCols(half);
                c.f_up.row(i) = (part_max ? global_max_pool(up, &c.up_arg[static_cast<size_t>(i)])
                                          : global_avg_pool(up))
                                    .transpose();
                c.f_lower.row(i) = (part_max ? global_max_pool(lo, &c.lo_arg[static_cast<size_t>(i)])
                                             : global_avg_pool(lo))
                                       .transpose();
            }
        }
    }

    /// Accumulates parameter gradients. Any of the gradient matrices may be
    /// empty (zero rows) to skip that path.
    void backward_train(const ForwardCache& c, const Mat<S>& dlogits, const Mat<S>& dpooled_tri,
                        const Mat<S>& df_up = Mat<S>(), const Mat<S>& df_lower = Mat<S>()) {
        const int n = static_cast<int>(c.features.size());
        const int C = cfg_.feat_c();
        Batch<S> dF;
        dF.reserve(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) dF.push_back(Tensor<S>::zeros_like(c.features[static_cast<size_t>(i)]));

        if (dlogits.rows() == n) {
            cls_dw_ += dlogits.transpose() * c.bneck_out;
            Mat<S> dbn = dlogits * cls_w_;  // n x C
            Batch<S> dpost;
            for (int i = 0; i < n; ++i) {
                Tensor<S> t(C, 1, 1);
                t.m.col(0) = dbn.row(i).transpose();
                dpost.push_back(std::move(t));
            }
            Batch<S> dpre = bneck_->backward(dpost, *c.bneck);
            const bool cls_max = cfg_.pooling == Pooling::gmp_all;
            for (int i = 0; i < n; ++i) {
                Vec<S> dv = dpre[static_cast<size_t>(i)].m.col(0);
                if (cls_max)
                    nn::global_max_pool_backward(dv, c.cls_arg[static_cast<size_t>(i)], dF[static_cast<size_t>(i)]);
                else
                    nn::global_avg_pool_backward(dv, dF[static_cast<size_t>(i)]);
            }
        }
        if (dpooled_tri.rows() == n) {
            const bool tri_max = cfg_.pooling != Pooling::gap;
            for (int i = 0; i < n; ++i) {
                Vec<S> dv = dpooled_tri.row(i).transpose();
                if (tri_max)
                    nn::global_max_pool_backward(dv, c.tri_arg[static_cast<size_t>(i)], dF[static_cast<size_t>(i)]);
                else
                    nn::global_avg_pool_backward(dv, dF[static_cast<size_t>(i)]);
            }
        }
        if (c.with_parts && df_up.rows() == n) {
            const bool part_max = cfg_.pooling != Pooling::gap;
            const int hh = c.features[0].h / 2, w = c.features[0].w;
            for (int i = 0; i < n; ++i) {
                auto& df = dF[static_cast<size_t>(i)];
                if (part_max) {
                    for (int ch = 0; ch < C; ++ch) {
                        df.m(ch, c.up_arg[static_cast<size_t>(i)][static_cast<size_t>(ch)]) +=
                            df_up(i, ch);
                        df.m(ch, hh * w + c.lo_arg[static_cast<size_t>(i)][static_cast<size_t>(ch)]) +=
                            df_lower(i, ch);
                    }
                } else {
                    const S inv = S(1) / S(hh * w);
                    df.m.leftCols(hh * w).colwise() += (df_up.row(i).transpose() * inv).eval();
                    df.m.rightCols(hh * w).colwise() += (df_lower.row(i).transpose() * inv).eval();
                }
            }
        }
        encoder_.backward(dF, *c.enc);
    }

    /// Reconstruction pass: encoder + decoder on (typically erased) images,
    /// returns reconstructions; backward drives both with the image-space grad.
    struct ReconCache {
        nn::CachePtr<S> enc, dec;
    };

    Batch<S> forward_recon(const Batch<S>& images, ReconCache& c) {
        Batch<S> f = encoder_.forward(images, true, &c.enc);
        return decoder_.forward(f, true, &c.dec);
    }

    void backward_recon(const ReconCache& c, const Batch<S>& drecon) {
        Batch<S> df = decoder_.backward(drecon, *c.dec);
        encoder_.backward(df, *c.enc);
    }

    // -- parameters / persistence --------------------------------------------

    std::vector<nn::ParamRef<S>> params(bool with_decoder = true) {
        std::vector<nn::ParamRef<S>> out;
        encoder_.collect_params(out, "encoder.");
        bneck_->collect_params(out, "");
        out.push_back({&cls_w_, &cls_dw_, "classifier.W"});
        if (with_decoder) decoder_.collect_params(out, "decoder.");
        return out;
    }

    Checkpoint<S> to_checkpoint() {
        Checkpoint<S> ck;
        for (auto& p : params()) ck.tensors[p.name] = *p.value;
        auto stats = [&](nn::BatchNorm<S>* bn, const std::string& prefix) {
            ck.tensors[prefix + ".running_mean"] = bn->running_mean();
            ck.tensors[prefix + ".running_var"] = bn->running_var();
        };
        for (size_t i = 0; i < encoder_bns_.size(); ++i)
            stats(encoder_bns_[i], "encoder.bn" + std::to_string(i));
        stats(bneck_.get(), "bneck");
        ck.config_echo = cfg_.echo();
        return ck;
    }

    void from_checkpoint(const Checkpoint<S>& ck) {
        // classifier shape follows the checkpoint (cluster count varies)
        cls_w_ = ck.get("classifier.W");
        cls_dw_ = Mat<S>::Zero(cls_w_.rows(), cls_w_.cols());
        for (auto& p : params()) {
            if (p.name == "classifier.W") continue;
            const Mat<S>& stored = ck.get(p.name);
            if (stored.rows() != p.value->rows() || stored.cols() != p.value->cols())
                throw std::runtime_error("checkpoint: shape mismatch for " + p.name);
            *p.value = stored;
        }
        for (size_t i = 0; i < encoder_bns_.size(); ++i) {
            encoder_bns_[i]->running_mean() = ck.get("encoder.bn" + std::to_string(i) + ".running_mean");
            encoder_bns_[i]->running_var() = ck.get("encoder.bn" + std::to_string(i) + ".running_var");
        }
        bneck_->running_mean() = ck.get("bneck.running_mean");
        bneck_->running_var() = ck.get("bneck.running_var");
    }

    void save(const std::filesystem::path& path) { to_checkpoint().save(path); }

    static ReidModel load(const std::filesystem::path& path, Rng& rng) {
        Checkpoint<S> ck = Checkpoint<S>::load(path);
        BackboneConfig cfg = parse_config_echo(ck.config_echo);
        ReidModel m(cfg, static_cast<int>(ck.get("classifier.W").rows()), rng);
        m.from_checkpoint(ck);
        return m;
    }

    static BackboneConfig parse_config_echo(const std::string& echo) {
        BackboneConfig cfg;
        std::istringstream is(echo);
        std::string line;
        while (std::getline(is, line)) {
            const auto eq = line.find('=');
            if (eq == std::string::npos) continue;
            const std::string key = line.substr(0, eq), val = line.substr(eq + 1);
            if (key == "backbone.in_h") cfg.in_h = std::stoi(val);
            else if (key == "backbone.in_w") cfg.in_w = std::stoi(val);
            else if (key == "backbone.pooling") cfg.pooling = pooling_from_name(val);
            else if (key == "backbone.widths") {
                cfg.widths.clear();
                std::istringstream vs(val);
                std::string tok;
                while (std::getline(vs, tok, ',')) cfg.widths.push_back(std::stoi(tok));
            }
        }
        return cfg;
    }

    void set_pooling(Pooling p) { cfg_.pooling = p; }

private:
    BackboneConfig cfg_;
    nn::Sequential<S> encoder_;
    std::vector<nn::BatchNorm<S>*> encoder_bns_;
    std::unique_ptr<nn::BatchNorm<S>> bneck_;
    Mat<S> cls_w_, cls_dw_;
    nn::Sequential<S> decoder_;
};

}  // namespace reid::model
