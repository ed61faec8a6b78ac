#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "fd_check.hpp"
#include "reid/nn.hpp"
#include "reid/rng.hpp"

#include <memory>

using namespace reid;
using D = double;

namespace {

Batch<D> random_batch(int n, int c, int h, int w, Rng& rng, double scale = 1.0) {
    Batch<D> b;
    for (int i = 0; i < n; ++i) {
        Tensor<D> t(c, h, w);
        for (int r = 0; r < t.m.rows(); ++r)
            for (int q = 0; q < t.m.cols(); ++q) t.m(r, q) = rng.normal() * scale;
        b.push_back(std::move(t));
    }
    return b;
}

// loss = sum of (fixed random weights * outputs); checks input + param grads
double layer_grad_check(nn::Layer<D>& layer, Batch<D> x, Rng& rng, bool train = true) {
    nn::CachePtr<D> cache;
    Batch<D> y0 = layer.forward(x, train, &cache);
    Batch<D> w = random_batch(static_cast<int>(y0.size()), y0[0].c, y0[0].h, y0[0].w, rng);

    auto eval = [&]() {
        Batch<D> y = layer.forward(x, train, nullptr);
        double s = 0;
        for (size_t i = 0; i < y.size(); ++i) s += (y[i].m.array() * w[i].m.array()).sum();
        return s;
    };

    std::vector<nn::ParamRef<D>> params;
    layer.collect_params(params, "");
    for (auto& p : params) p.grad->setZero();
    Batch<D> dy = w;
    nn::CachePtr<D> c2;
    layer.forward(x, train, &c2);
    Batch<D> dx = layer.backward(dy, *c2);

    double worst = 0;
    for (size_t i = 0; i < x.size(); ++i)
        worst = std::max(worst, fd::check_grad_matrix(x[i].m, dx[i].m, eval));
    for (auto& p : params)
        worst = std::max(worst, fd::check_grad_matrix(*p.value, *p.grad, eval));
    return worst;
}

}  // namespace

TEST_CASE("conv2d forward matches direct convolution on a hand case") {
    Rng rng(1);
    nn::Conv2d<D> conv(1, 1, 3, 3, 1, 1, rng);
    std::vector<nn::ParamRef<D>> params;
    conv.collect_params(params, "");
    params[0].value->setZero();
    (*params[0].value)(0, 4) = 1.0;  // center tap: identity kernel
    params[1].value->setZero();
    Tensor<D> x(1, 3, 3);
    for (int i = 0; i < 9; ++i) x.m(0, i) = i + 1;
    Batch<D> y = conv.forward({x}, false, nullptr);
    CHECK(y[0].m.isApprox(x.m));
}

TEST_CASE("conv2d gradients match finite differences") {
    Rng rng(2);
    nn::Conv2d<D> conv(2, 3, 3, 3, 1, 1, rng);
    CHECK(layer_grad_check(conv, random_batch(2, 2, 5, 4, rng), rng) < 1e-6);
    nn::Conv2d<D> strided(2, 3, 3, 3, 2, 1, rng);
    CHECK(layer_grad_check(strided, random_batch(2, 2, 6, 4, rng), rng) < 1e-6);
    nn::Conv2d<D> rect(2, 2, 4, 2, 1, 0, rng);
    CHECK(layer_grad_check(rect, random_batch(1, 2, 6, 4, rng), rng) < 1e-6);
}

TEST_CASE("conv_transpose doubles resolution and matches finite differences") {
    Rng rng(3);
    nn::ConvTranspose2d<D> up(2, 3, 4, 4, 2, 1, rng);
    Batch<D> x = random_batch(2, 2, 3, 2, rng);
    Batch<D> y = up.forward(x, false, nullptr);
    CHECK(y[0].h == 6);
    CHECK(y[0].w == 4);
    CHECK(layer_grad_check(up, x, rng) < 1e-6);

    nn::ConvTranspose2d<D> same(3, 2, 3, 3, 1, 1, rng);
    Batch<D> x2 = random_batch(1, 3, 4, 3, rng);
    Batch<D> y2 = same.forward(x2, false, nullptr);
    CHECK(y2[0].h == 4);
    CHECK(y2[0].w == 3);
    CHECK(layer_grad_check(same, x2, rng) < 1e-6);
}

TEST_CASE("batchnorm train-mode gradients match finite differences") {
    Rng rng(4);
    nn::BatchNorm<D> bn(3);
    CHECK(layer_grad_check(bn, random_batch(3, 3, 2, 2, rng), rng, true) < 1e-5);
}

TEST_CASE("batchnorm eval uses running stats and is deterministic") {
    Rng rng(5);
    nn::BatchNorm<D> bn(2);
    Batch<D> x = random_batch(4, 2, 2, 2, rng);
    bn.forward(x, true, nullptr);  // update running stats
    Batch<D> y1 = bn.forward(x, false, nullptr);
    Batch<D> y2 = bn.forward(x, false, nullptr);
    for (size_t i = 0; i < y1.size(); ++i) CHECK(y1[i].m == y2[i].m);
}

TEST_CASE("batchnorm 1d bottleneck (Cx1x1 tensors) gradcheck") {
    Rng rng(6);
    nn::BatchNorm<D> bn(5);
    CHECK(layer_grad_check(bn, random_batch(6, 5, 1, 1, rng), rng, true) < 1e-5);
}

TEST_CASE("instancenorm gradients match finite differences") {
    Rng rng(7);
    nn::InstanceNorm<D> in(3);
    CHECK(layer_grad_check(in, random_batch(2, 3, 3, 3, rng), rng) < 1e-5);
}

TEST_CASE("activation gradients match finite differences") {
    Rng rng(8);
    // keep inputs away from the ReLU kink
    Batch<D> x = random_batch(2, 2, 3, 3, rng);
    for (auto& t : x) t.m = t.m.array().sign() * (t.m.array().abs() + 0.1);

    nn::LeakyReLU<D> lrelu(0.01);
    CHECK(layer_grad_check(lrelu, x, rng) < 1e-6);
    nn::Tanh<D> th;
    CHECK(layer_grad_check(th, x, rng) < 1e-6);
    nn::Sigmoid<D> sg;
    CHECK(layer_grad_check(sg, x, rng) < 1e-6);
}

TEST_CASE("resblock and sequential composite gradcheck") {
    Rng rng(9);
    nn::ResBlock<D> res(3, rng);
    CHECK(layer_grad_check(res, random_batch(2, 3, 4, 4, rng), rng) < 1e-5);

    nn::Sequential<D> seq;
    seq.add(std::make_unique<nn::Conv2d<D>>(2, 3, 3, 3, 2, 1, rng));
    seq.add(std::make_unique<nn::InstanceNorm<D>>(3));
    seq.add(std::make_unique<nn::ReLU<D>>());
    seq.add(std::make_unique<nn::ConvTranspose2d<D>>(3, 2, 4, 4, 2, 1, rng));
    seq.add(std::make_unique<nn::Tanh<D>>());
    CHECK(layer_grad_check(seq, random_batch(2, 2, 4, 4, rng), rng) < 1e-5);
}

TEST_CASE("pooling helpers: values and backward") {
    Tensor<D> f(1, 2, 2);
    f.m << 1, 2, 3, 4;
    CHECK(nn::global_max_pool(f)(0) == 4.0);
    CHECK(nn::global_avg_pool(f)(0) == 2.5);

    std::vector<int> arg;
    Vec<D> mx = nn::global_max_pool(f, &arg);
    CHECK(arg[0] == 3);
    Tensor<D> df(1, 2, 2);
    Vec<D> dv(1);
    dv << 2.0;
    nn::global_max_pool_backward(dv, arg, df);
    CHECK(df.m(0, 3) == 2.0);
    CHECK(df.m(0, 0) == 0.0);

    Tensor<D> dg(1, 2, 2);
    nn::global_avg_pool_backward(dv, dg);
    CHECK(dg.m(0, 0) == doctest::Approx(0.5));
}

TEST_CASE("adam decreases a simple quadratic") {
    Mat<D> w = Mat<D>::Constant(2, 2, 5.0);
    Mat<D> g = Mat<D>::Zero(2, 2);
    nn::Adam<D> opt({{&w, &g, "w"}}, 0.1);
    for (int i = 0; i < 200; ++i) {
        g = w;  // grad of 0.5*||w||^2
        opt.step();
    }
    CHECK(w.norm() < 1.0);
}

TEST_CASE("param_count sums every tensor") {
    Rng rng(10);
    nn::Conv2d<D> conv(2, 4, 3, 3, 1, 1, rng);
    std::vector<nn::ParamRef<D>> params;
    conv.collect_params(params, "");
    CHECK(nn::param_count(params) == 4 * 2 * 3 * 3 + 4);
}
