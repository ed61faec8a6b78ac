#pragma once

#include "reid/rng.hpp"
#include "reid/tensor.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace reid::nn {

template <typename S>
struct ParamRef {
    Mat<S>* value;
    Mat<S>* grad;
    std::string name;
};

/// Forward activations are recorded into external cache objects rather than
/// into the layers, so several forward passes through the same network can be
/// alive at once (the generator runs up to four per step).
template <typename S>
struct LayerCache {
    virtual ~LayerCache() = default;
};

template <typename S>
using CachePtr = std::unique_ptr<LayerCache<S>>;

template <typename S>
class Layer {
public:
    virtual ~Layer() = default;
    /// cache == nullptr means inference only, nothing recorded.
    virtual Batch<S> forward(const Batch<S>& x, bool train, CachePtr<S>* cache) = 0;
    /// Accumulates parameter gradients, returns gradient w.r.t. the input.
    virtual Batch<S> backward(const Batch<S>& dy, const LayerCache<S>& cache) = 0;
    virtual void collect_params(std::vector<ParamRef<S>>& out, const std::string& prefix) {}
};

// ---------------------------------------------------------------------------
// im2col / col2im (adjoint pair)
// ---------------------------------------------------------------------------

inline int conv_out_dim(int in, int k, int stride, int pad) {
    return (in + 2 * pad - k) / stride + 1;
}

template <typename S>
Mat<S> im2col(const Tensor<S>& x, int kh, int kw, int stride, int pad, int ho, int wo) {
    Mat<S> cols = Mat<S>::Zero(x.c * kh * kw, ho * wo);
    for (int oy = 0; oy < ho; ++oy) {
        for (int ox = 0; ox < wo; ++ox) {
            const int col = oy * wo + ox;
            const int y0 = oy * stride - pad;
            const int x0 = ox * stride - pad;
            for (int ky = 0; ky < kh; ++ky) {
                const int iy = y0 + ky;
                if (iy < 0 || iy >= x.h) continue;
                for (int kx = 0; kx < kw; ++kx) {
                    const int ix = x0 + kx;
                    if (ix < 0 || ix >= x.w) continue;
                    const int r0 = (ky * kw + kx);
                    for (int ci = 0; ci < x.c; ++ci)
                        cols(ci * kh * kw + r0, col) = x.m(ci, iy * x.w + ix);
                }
            }
        }
    }
    return cols;
}

template <typename S>
Tensor<S> col2im(const Mat<S>& cols, int c, int h, int w, int kh, int kw, int stride, int pad,
                 int ho, int wo) {
    Tensor<S> out(c, h, w);
    for (int oy = 0; oy < ho; ++oy) {
        for (int ox = 0; ox < wo; ++ox) {
            const int col = oy * wo + ox;
            const int y0 = oy * stride - pad;
            const int x0 = ox * stride - pad;
            for (int ky = 0; ky < kh; ++ky) {
                const int iy = y0 + ky;
                if (iy < 0 || iy >= h) continue;
                for (int kx = 0; kx < kw; ++kx) {
                    const int ix = x0 + kx;
                    if (ix < 0 || ix >= w) continue;
                    const int r0 = (ky * kw + kx);
                    for (int ci = 0; ci < c; ++ci)
                        out.m(ci, iy * w + ix) += cols(ci * kh * kw + r0, col);
                }
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Conv2d
// ---------------------------------------------------------------------------

template <typename S>
class Conv2d : public Layer<S> {
public:
    Conv2d(int cin, int cout, int kh, int kw, int stride, int pad, Rng& rng,
           std::string name = "conv")
        : cin_(cin), cout_(cout), kh_(kh), kw_(kw), stride_(stride), pad_(pad),
          name_(std::move(name)) {
        const S std = S(std::sqrt(2.0 / (cin * kh * kw)));
        W_ = Mat<S>(cout, cin * kh * kw);
        for (int i = 0; i < W_.rows(); ++i)
            for (int j = 0; j < W_.cols(); ++j) W_(i, j) = S(rng.normal()) * std;
        b_ = Mat<S>::Zero(cout, 1);
        dW_ = Mat<S>::Zero(W_.rows(), W_.cols());
        db_ = Mat<S>::Zero(cout, 1);
    }

    struct Cache : LayerCache<S> {
        std::vector<Mat<S>> cols;
        int h = 0, w = 0;
    };

    Batch<S> forward(const Batch<S>& x, bool, CachePtr<S>* cache) override {
        Batch<S> y;
        y.reserve(x.size());
        auto c = cache ? std::make_unique<Cache>() : nullptr;
        for (const auto& xi : x) {
            if (xi.c != cin_) throw std::invalid_argument(name_ + ": channel mismatch");
            const int ho = conv_out_dim(xi.h, kh_, stride_, pad_);
            const int wo = conv_out_dim(xi.w, kw_, stride_, pad_);
            Mat<S> cols = im2col(xi, kh_, kw_, stride_, pad_, ho, wo);
            Tensor<S> yi(cout_, ho, wo);
            yi.m = W_ * cols;
            yi.m.colwise() += b_.col(0);
            if (c) {
                c->cols.push_back(std::move(cols));
                c->h = xi.h;
                c->w = xi.w;
            }
            y.push_back(std::move(yi));
        }
        if (cache) *cache = std::move(c);
        return y;
    }

    Batch<S> backward(const Batch<S>& dy, const LayerCache<S>& cache) override {
        const auto& c = static_cast<const Cache&>(cache);
        Batch<S> dx;
        dx.reserve(dy.size());
        for (size_t i = 0; i < dy.size(); ++i) {
            const auto& dyi = dy[i];
            dW_ += dyi.m * c.cols[i].transpose();
            db_.col(0) += dyi.m.rowwise().sum();
            Mat<S> dcols = W_.transpose() * dyi.m;
            dx.push_back(col2im(dcols, cin_, c.h, c.w, kh_, kw_, stride_, pad_, dyi.h, dyi.w));
        }
        return dx;
    }

    void collect_params(std::vector<ParamRef<S>>& out, const std::string& prefix) override {
        out.push_back({&W_, &dW_, prefix + name_ + ".W"});
        out.push_back({&b_, &db_, prefix + name_ + ".b"});
    }

private:
    int cin_, cout_, kh_, kw_, stride_, pad_;
    std::string name_;
    Mat<S> W_, b_, dW_, db_;
};

// ---------------------------------------------------------------------------
// ConvTranspose2d — exact adjoint of Conv2d with the same geometry.
// out = (in - 1) * stride - 2*pad + k
// ---------------------------------------------------------------------------

template <typename S>
class ConvTranspose2d : public Layer<S> {
public:
    ConvTranspose2d(int cin, int cout, int kh, int kw, int stride, int pad, Rng& rng,
                    std::string name = "convT")
        : cin_(cin), cout_(cout), kh_(kh), kw_(kw), stride_(stride), pad_(pad),
          name_(std::move(name)) {
        const S std = S(std::sqrt(2.0 / (cin * kh * kw)));
        W_ = Mat<S>(cin, cout * kh * kw);
        for (int i = 0; i < W_.rows(); ++i)
            for (int j = 0; j < W_.cols(); ++j) W_(i, j) = S(rng.normal()) * std;
        b_ = Mat<S>::Zero(cout, 1);
        dW_ = Mat<S>::Zero(W_.rows(), W_.cols());
        db_ = Mat<S>::Zero(cout, 1);
    }

    struct Cache : LayerCache<S> {
        Batch<S> x;
    };

    Batch<S> forward(const Batch<S>& x, bool, CachePtr<S>* cache) override {
        Batch<S> y;
        y.reserve(x.size());
        auto c = cache ? std::make_unique<Cache>() : nullptr;
        for (const auto& xi : x) {
            if (xi.c != cin_) throw std::invalid_argument(name_ + ": channel mismatch");
            const int ho = (xi.h - 1) * stride_ - 2 * pad_ + kh_;
            const int wo = (xi.w - 1) * stride_ - 2 * pad_ + kw_;
            Mat<S> cols = W_.transpose() * xi.m;  // (cout*kh*kw) x (hi*wi)
            Tensor<S> yi = col2im(cols, cout_, ho, wo, kh_, kw_, stride_, pad_, xi.h, xi.w);
            yi.m.colwise() += b_.col(0);
            if (c) c->x.push_back(xi);
            y.push_back(std::move(yi));
        }
        if (cache) *cache = std::move(c);
        return y;
    }

    Batch<S> backward(const Batch<S>& dy, const LayerCache<S>& cache) override {
        const auto& c = static_cast<const Cache&>(cache);
        Batch<S> dx;
        dx.reserve(dy.size());
        for (size_t i = 0; i < dy.size(); ++i) {
            const auto& dyi = dy[i];
            const auto& xi = c.x[i];
            Mat<S> dcols = im2col(dyi, kh_, kw_, stride_, pad_, xi.h, xi.w);
            dW_ += xi.m * dcols.transpose();
            db_.col(0) += dyi.m.rowwise().sum();
            Tensor<S> dxi(cin_, xi.h, xi.w);
            dxi.m = W_ * dcols;
            dx.push_back(std::move(dxi));
        }
        return dx;
    }

    void collect_params(std::vector<ParamRef<S>>& out, const std::string& prefix) override {
        out.push_back({&W_, &dW_, prefix + name_ + ".W"});
        out.push_back({&b_, &db_, prefix + name_ + ".b"});
    }

private:
    int cin_, cout_, kh_, kw_, stride_, pad_;
    std::string name_;
    Mat<S> W_, b_, dW_, db_;
};

// ---------------------------------------------------------------------------
// BatchNorm — per-channel over batch and spatial dims. Also serves as the
// 1-d bottleneck norm by feeding Cx1x1 tensors.
// ---------------------------------------------------------------------------

template <typename S>
class BatchNorm : public Layer<S> {
public:
    explicit BatchNorm(int channels, std::string name = "bn", S eps = S(1e-5), S momentum = S(0.1))
        : c_(channels), eps_(eps), momentum_(momentum), name_(std::move(name)) {
        gamma_ = Mat<S>::Ones(channels, 1);
        beta_ = Mat<S>::Zero(channels, 1);
        dgamma_ = Mat<S>::Zero(channels, 1);
        dbeta_ = Mat<S>::Zero(channels, 1);
        running_mean_ = Mat<S>::Zero(channels, 1);
        running_var_ = Mat<S>::Ones(channels, 1);
    }

    struct Cache : LayerCache<S> {
        Batch<S> xhat;
        Vec<S> invstd;
        bool train = true;
        long m = 0;
    };

    Batch<S> forward(const Batch<S>& x, bool train, CachePtr<S>* cache) override {
        if (x.empty()) return {};
        auto c = cache ? std::make_unique<Cache>() : nullptr;
        Batch<S> y;
        y.reserve(x.size());
        if (train) {
            const long m = static_cast<long>(x.size()) * x[0].h * x[0].w;
            Vec<S> mean = Vec<S>::Zero(c_), var = Vec<S>::Zero(c_);
            for (const auto& xi : x) mean += xi.m.rowwise().sum();
            mean /= S(m);
            for (const auto& xi : x)
                var += (xi.m.colwise() - mean).array().square().matrix().rowwise().sum();
            var /= S(m);
            Vec<S> invstd = (var.array() + eps_).rsqrt();
            for (const auto& xi : x) {
                Tensor<S> yi(xi.c, xi.h, xi.w);
                Tensor<S> xhat(xi.c, xi.h, xi.w);
                xhat.m = (xi.m.colwise() - mean).array().colwise() * invstd.array();
                yi.m = (xhat.m.array().colwise() * gamma_.col(0).array()).colwise() +
                       beta_.col(0).array();
                if (c) c->xhat.push_back(xhat);
                y.push_back(std::move(yi));
            }
            running_mean_.col(0) = (S(1) - momentum_) * running_mean_.col(0) + momentum_ * mean;
            Vec<S> var_unbiased = m > 1 ? (var * S(m) / S(m - 1)).eval() : var;
            running_var_.col(0) = (S(1) - momentum_) * running_var_.col(0) + momentum_ * var_unbiased;
            if (c) {
                c->invstd = invstd;
                c->train = true;
                c->m = m;
            }
        } else {
            Vec<S> invstd = (running_var_.col(0).array() + eps_).rsqrt();
            for (const auto& xi : x) {
                Tensor<S> yi(xi.c, xi.h, xi.w);
                yi.m = ((xi.m.colwise() - running_mean_.col(0)).array().colwise() *
                        (invstd.array() * gamma_.col(0).array()))
                           .colwise() +
                       beta_.col(0).array();
                y.push_back(std::move(yi));
            }
            if (c) {
                c->invstd = invstd;
                c->train = false;
            }
        }
        if (cache) *cache = std::move(c);
        return y;
    }

    Batch<S> backward(const Batch<S>& dy, const LayerCache<S>& cache) override {
        const auto& c = static_cast<const Cache&>(cache);
        Batch<S> dx;
        dx.reserve(dy.size());
        if (!c.train) {
            for (const auto& dyi : dy) {
                Tensor<S> dxi(dyi.c, dyi.h, dyi.w);
                dxi.m = dyi.m.array().colwise() * (c.invstd.array() * gamma_.col(0).array());
                dx.push_back(std::move(dxi));
            }
            return dx;
        }
        const S m = S(c.m);
        Vec<S> sum_dy = Vec<S>::Zero(c_), sum_dy_xhat = Vec<S>::Zero(c_);
        for (size_t i = 0; i < dy.size(); ++i) {
            sum_dy += dy[i].m.rowwise().sum();
            sum_dy_xhat += (dy[i].m.array() * c.xhat[i].m.array()).matrix().rowwise().sum();
        }
        dgamma_.col(0) += sum_dy_xhat;
        dbeta_.col(0) += sum_dy;
        for (size_t i = 0; i < dy.size(); ++i) {
            Tensor<S> dxi(dy[i].c, dy[i].h, dy[i].w);
            // dx = invstd/m * gamma * (m*dy - sum_dy - xhat * sum(dy*xhat))
            dxi.m = ((dy[i].m * m).colwise() - sum_dy).array() -
                    (c.xhat[i].m.array().colwise() * sum_dy_xhat.array());
            dxi.m = dxi.m.array().colwise() *
                    (c.invstd.array() * gamma_.col(0).array() / m);
            dx.push_back(std::move(dxi));
        }
        return dx;
    }

    void collect_params(std::vector<ParamRef<S>>& out, const std::string& prefix) override {
        out.push_back({&gamma_, &dgamma_, prefix + name_ + ".gamma"});
        out.push_back({&beta_, &dbeta_, prefix + name_ + ".beta"});
    }

    Mat<S>& running_mean() { return running_mean_; }
    Mat<S>& running_var() { return running_var_; }
    const std::string& name() const { return name_; }

private:
    int c_;
    S eps_, momentum_;
    std::string name_;
    Mat<S> gamma_, beta_, dgamma_, dbeta_;
    Mat<S> running_mean_, running_var_;
};

// ---------------------------------------------------------------------------
// InstanceNorm — per-sample per-channel over spatial dims; identical in train
// and inference modes, which keeps generator outputs a pure function of input.
// ---------------------------------------------------------------------------

template <typename S>
class InstanceNorm : public Layer<S> {
public:
    explicit InstanceNorm(int channels, std::string name = "in", S eps = S(1e-5))
        : c_(channels), eps_(eps), name_(std::move(name)) {
        gamma_ = Mat<S>::Ones(channels, 1);
        beta_ = Mat<S>::Zero(channels, 1);
        dgamma_ = Mat<S>::Zero(channels, 1);
        dbeta_ = Mat<S>::Zero(channels, 1);
    }

    struct Cache : LayerCache<S> {
        Batch<S> xhat;
        std::vector<Vec<S>> invstd;
    };

    Batch<S> forward(const Batch<S>& x, bool, CachePtr<S>* cache) override {
        auto c = cache ? std::make_unique<Cache>() : nullptr;
        Batch<S> y;
        y.reserve(x.size());
        for (const auto& xi : x) {
            const S m = S(xi.h * xi.w);
            Vec<S> mean = xi.m.rowwise().mean();
            Vec<S> var =
                (xi.m.colwise() - mean).array().square().matrix().rowwise().sum() / m;
            Vec<S> invstd = (var.array() + eps_).rsqrt();
            Tensor<S> xhat(xi.c, xi.h, xi.w);
            xhat.m = (xi.m.colwise() - mean).array().colwise() * invstd.array();
            Tensor<S> yi(xi.c, xi.h, xi.w);
            yi.m = (xhat.m.array().colwise() * gamma_.col(0).array()).colwise() +
                   beta_.col(0).array();
            if (c) {
                c->xhat.push_back(xhat);
                c->invstd.push_back(invstd);
            }
            y.push_back(std::move(yi));
        }
        if (cache) *cache = std::move(c);
        return y;
    }

    Batch<S> backward(const Batch<S>& dy, const LayerCache<S>& cache) override {
        const auto& c = static_cast<const Cache&>(cache);
        Batch<S> dx;
        dx.reserve(dy.size());
        for (size_t i = 0; i < dy.size(); ++i) {
            const auto& dyi = dy[i];
            const auto& xhat = c.xhat[i];
            const S m = S(dyi.h * dyi.w);
            Vec<S> sum_dy = dyi.m.rowwise().sum();
            Vec<S> sum_dy_xhat = (dyi.m.array() * xhat.m.array()).matrix().rowwise().sum();
            dgamma_.col(0) += sum_dy_xhat;
            dbeta_.col(0) += sum_dy;
            Tensor<S> dxi(dyi.c, dyi.h, dyi.w);
            dxi.m = ((dyi.m * m).colwise() - sum_dy).array() -
                    (xhat.m.array().colwise() * sum_dy_xhat.array());
            dxi.m = dxi.m.array().colwise() *
                    (c.invstd[i].array() * gamma_.col(0).array() / m);
            dx.push_back(std::move(dxi));
        }
        return dx;
    }

    void collect_params(std::vector<ParamRef<S>>& out, const std::string& prefix) override {
        out.push_back({&gamma_, &dgamma_, prefix + name_ + ".gamma"});
        out.push_back({&beta_, &dbeta_, prefix + name_ + ".beta"});
    }

private:
    int c_;
    S eps_;
    std::string name_;
    Mat<S> gamma_, beta_, dgamma_, dbeta_;
};

// ---------------------------------------------------------------------------
// Activations
// ---------------------------------------------------------------------------

template <typename S>
class LeakyReLU : public Layer<S> {
public:
    explicit LeakyReLU(S slope = S(0)) : slope_(slope) {}

    struct Cache : LayerCache<S> {
        Batch<S> x;
    };

    Batch<S> forward(const Batch<S>& x, bool, CachePtr<S>* cache) override {
        Batch<S> y;
        y.reserve(x.size());
        for (const auto& xi : x) {
            Tensor<S> yi(xi.c, xi.h, xi.w);
            yi.m = xi.m.array().max(xi.m.array() * slope_);
            y.push_back(std::move(yi));
        }
        if (cache) {
            auto c = std::make_unique<Cache>();
            c->x = x;
            *cache = std::move(c);
        }
        return y;
    }

    Batch<S> backward(const Batch<S>& dy, const LayerCache<S>& cache) override {
        const auto& c = static_cast<const Cache&>(cache);
        Batch<S> dx;
        dx.reserve(dy.size());
        for (size_t i = 0; i < dy.size(); ++i) {
            Tensor<S> dxi(dy[i].c, dy[i].h, dy[i].w);
            dxi.m = (c.x[i].m.array() > S(0))
                        .select(dy[i].m, dy[i].m * slope_);
            dx.push_back(std::move(dxi));
        }
        return dx;
    }

private:
    S slope_;
};

template <typename S>
class ReLU : public LeakyReLU<S> {
public:
    ReLU() : LeakyReLU<S>(S(0)) {}
};

template <typename S>
class Tanh : public Layer<S> {
public:
    struct Cache : LayerCache<S> {
        Batch<S> y;
    };

    Batch<S> forward(const Batch<S>& x, bool, CachePtr<S>* cache) override {
        Batch<S> y;
        y.reserve(x.size());
        for (const auto& xi : x) {
            Tensor<S> yi(xi.c, xi.h, xi.w);
            yi.m = xi.m.array().tanh();
            y.push_back(std::move(yi));
        }
        if (cache) {
            auto c = std::make_unique<Cache>();
            c->y = y;
            *cache = std::move(c);
        }
        return y;
    }

    Batch<S> backward(const Batch<S>& dy, const LayerCache<S>& cache) override {
        const auto& c = static_cast<const Cache&>(cache);
        Batch<S> dx;
        dx.reserve(dy.size());
        for (size_t i = 0; i < dy.size(); ++i) {
            Tensor<S> dxi(dy[i].c, dy[i].h, dy[i].w);
            dxi.m = dy[i].m.array() * (S(1) - c.y[i].m.array().square());
            dx.push_back(std::move(dxi));
        }
        return dx;
    }
};

template <typename S>
class Sigmoid : public Layer<S> {
public:
    struct Cache : LayerCache<S> {
        Batch<S> y;
    };

    Batch<S> forward(const Batch<S>& x, bool, CachePtr<S>* cache) override {
        Batch<S> y;
        y.reserve(x.size());
        for (const auto& xi : x) {
            Tensor<S> yi(xi.c, xi.h, xi.w);
            yi.m = (S(1) / (S(1) + (-xi.m.array()).exp()));
            y.push_back(std::move(yi));
        }
        if (cache) {
            auto c = std::make_unique<Cache>();
            c->y = y;
            *cache = std::move(c);
        }
        return y;
    }

    Batch<S> backward(const Batch<S>& dy, const LayerCache<S>& cache) override {
        const auto& c = static_cast<const Cache&>(cache);
        Batch<S> dx;
        dx.reserve(dy.size());
        for (size_t i = 0; i < dy.size(); ++i) {
            Tensor<S> dxi(dy[i].c, dy[i].h, dy[i].w);
            dxi.m = dy[i].m.array() * c.y[i].m.array() * (S(1) - c.y[i].m.array());
            dx.push_back(std::move(dxi));
        }
        return dx;
    }
};

// ---------------------------------------------------------------------------
// Sequential
// ---------------------------------------------------------------------------

template <typename S>
class Sequential : public Layer<S> {
public:
    struct Cache : LayerCache<S> {
        std::vector<CachePtr<S>> stages;
    };

    Sequential() = default;

    void add(std::unique_ptr<Layer<S>> l) { layers_.push_back(std::move(l)); }
    size_t size() const { return layers_.size(); }

    Batch<S> forward(const Batch<S>& x, bool train, CachePtr<S>* cache) override {
        auto c = cache ? std::make_unique<Cache>() : nullptr;
        Batch<S> cur = x;
        for (auto& l : layers_) {
            CachePtr<S> lc;
            cur = l->forward(cur, train, cache ? &lc : nullptr);
            if (c) c->stages.push_back(std::move(lc));
        }
        if (cache) *cache = std::move(c);
        return cur;
    }

    Batch<S> backward(const Batch<S>& dy, const LayerCache<S>& cache) override {
        const auto& c = static_cast<const Cache&>(cache);
        Batch<S> cur = dy;
        for (int i = static_cast<int>(layers_.size()) - 1; i >= 0; --i)
            cur = layers_[static_cast<size_t>(i)]->backward(cur, *c.stages[static_cast<size_t>(i)]);
        return cur;
    }

    void collect_params(std::vector<ParamRef<S>>& out, const std::string& prefix) override {
        for (size_t i = 0; i < layers_.size(); ++i)
            layers_[i]->collect_params(out, prefix + std::to_string(i) + ".");
    }

    Layer<S>* operator[](size_t i) { return layers_[i].get(); }

private:
    std::vector<std::unique_ptr<Layer<S>>> layers_;
};

/// Residual block: x + IN(conv(relu(IN(conv(x))))).
template <typename S>
class ResBlock : public Layer<S> {
public:
    ResBlock(int channels, Rng& rng, const std::string& name = "res") {
        body_.add(std::make_unique<Conv2d<S>>(channels, channels, 3, 3, 1, 1, rng, name + ".c1"));
        body_.add(std::make_unique<InstanceNorm<S>>(channels, name + ".n1"));
        body_.add(std::make_unique<ReLU<S>>());
        body_.add(std::make_unique<Conv2d<S>>(channels, channels, 3, 3, 1, 1, rng, name + ".c2"));
        body_.add(std::make_unique<InstanceNorm<S>>(channels, name + ".n2"));
    }

    struct Cache : LayerCache<S> {
        CachePtr<S> body;
    };

    Batch<S> forward(const Batch<S>& x, bool train, CachePtr<S>* cache) override {
        auto c = cache ? std::make_unique<Cache>() : nullptr;
        Batch<S> y = body_.forward(x, train, cache ? &c->body : nullptr);
        for (size_t i = 0; i < y.size(); ++i) y[i].m += x[i].m;
        if (cache) *cache = std::move(c);
        return y;
    }

    Batch<S> backward(const Batch<S>& dy, const LayerCache<S>& cache) override {
        const auto& c = static_cast<const Cache&>(cache);
        Batch<S> dx = body_.backward(dy, *c.body);
        for (size_t i = 0; i < dx.size(); ++i) dx[i].m += dy[i].m;
        return dx;
    }

    void collect_params(std::vector<ParamRef<S>>& out, const std::string& prefix) override {
        body_.collect_params(out, prefix);
    }

private:
    Sequential<S> body_;
};

// ---------------------------------------------------------------------------
// Pooling free functions (with explicit backward helpers)
// ---------------------------------------------------------------------------

template <typename S>
Vec<S> global_avg_pool(const Tensor<S>& f) {
    return f.m.rowwise().mean();
}

/// Per-channel max; argmax recorded as the first maximal spatial index so
/// backward is deterministic under ties.
template <typename S>
Vec<S> global_max_pool(const Tensor<S>& f, std::vector<int>* argmax = nullptr) {
    Vec<S> out(f.c);
    if (argmax) argmax->assign(static_cast<size_t>(f.c), 0);
    for (int ch = 0; ch < f.c; ++ch) {
        S best = f.m(ch, 0);
        int bi = 0;
        for (int j = 1; j < f.h * f.w; ++j)
            if (f.m(ch, j) > best) {
                best = f.m(ch, j);
                bi = j;
            }
        out(ch) = best;
        if (argmax) (*argmax)[static_cast<size_t>(ch)] = bi;
    }
    return out;
}

template <typename S>
void global_avg_pool_backward(const Vec<S>& dv, Tensor<S>& df) {
    df.m.colwise() += dv / S(df.h * df.w);
}

template <typename S>
void global_max_pool_backward(const Vec<S>& dv, const std::vector<int>& argmax, Tensor<S>& df) {
    for (int ch = 0; ch < df.c; ++ch) df.m(ch, argmax[static_cast<size_t>(ch)]) += dv(ch);
}

// ---------------------------------------------------------------------------
// Adam (classic, L2 weight decay folded into the gradient)
// ---------------------------------------------------------------------------

template <typename S>
class Adam {
public:
    Adam(std::vector<ParamRef<S>> params, S lr, S beta1 = S(0.9), S beta2 = S(0.999),
         S weight_decay = S(0), S eps = S(1e-8))
        : params_(std::move(params)), lr_(lr), b1_(beta1), b2_(beta2), wd_(weight_decay),
          eps_(eps) {
        for (auto& p : params_)
            state_.push_back({Mat<S>::Zero(p.value->rows(), p.value->cols()),
                              Mat<S>::Zero(p.value->rows(), p.value->cols())});
    }

    void zero_grad() {
        for (auto& p : params_) p.grad->setZero();
    }

    void step() {
        ++t_;
        const S bc1 = S(1) - S(std::pow(static_cast<double>(b1_), static_cast<double>(t_)));
        const S bc2 = S(1) - S(std::pow(static_cast<double>(b2_), static_cast<double>(t_)));
        for (size_t i = 0; i < params_.size(); ++i) {
            auto& p = params_[i];
            auto& st = state_[i];
            Mat<S> g = *p.grad + wd_ * *p.value;
            st.m = b1_ * st.m + (S(1) - b1_) * g;
            st.v = b2_ * st.v + (S(1) - b2_) * g.array().square().matrix();
            p.value->array() -=
                lr_ * (st.m.array() / bc1) / ((st.v.array() / bc2).sqrt() + eps_);
        }
    }

    void set_lr(S lr) { lr_ = lr; }
    S lr() const { return lr_; }
    std::vector<ParamRef<S>>& params() { return params_; }

private:
    struct State {
        Mat<S> m, v;
    };
    std::vector<ParamRef<S>> params_;
    std::vector<State> state_;
    S lr_, b1_, b2_, wd_, eps_;
    long t_ = 0;
};

template <typename S>
long param_count(std::vector<ParamRef<S>> params) {
    long n = 0;
    for (auto& p : params) n += p.value->size();
    return n;
}

}  // namespace reid::nn
