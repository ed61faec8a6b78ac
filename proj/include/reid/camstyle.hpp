#pragma once

#include "reid/checkpoint.hpp"
#include "reid/dataset.hpp"
#include "reid/image.hpp"
#include "reid/losses.hpp"
#include "reid/nn.hpp"
#include "reid/rng.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace reid::camstyle {

/// Camera-as-domain label over the joint source+target vocabulary:
/// source cameras occupy [0, C_S), target cameras [C_S, C_S + C_T).
struct DomainLabel {
    int index = 0;
};

struct GanArch {
    int img_h = 64, img_w = 32;
    int n_domains = 8;
    int base_ch = 16;
    int n_res = 3;

    long expected_generator_params() const {
        const int b = base_ch, in_c = 3 + n_domains;
        auto conv = [](int ci, int co, int kh, int kw) { return long(co) * ci * kh * kw + co; };
        auto norm = [](int c) { return 2L * c; };
        long n = conv(in_c, b, 7, 7) + norm(b);
        n += conv(b, 2 * b, 4, 4) + norm(2 * b);
        n += conv(2 * b, 4 * b, 4, 4) + norm(4 * b);
        n += n_res * (2 * (conv(4 * b, 4 * b, 3, 3) + norm(4 * b)));
        n += conv(4 * b, 2 * b, 4, 4) + norm(2 * b);  // transposed, same count
        n += conv(2 * b, b, 4, 4) + norm(b);
        n += conv(b, 3, 7, 7);
        return n;
    }

    long expected_discriminator_params() const {
        const int b = base_ch;
        auto conv = [](int ci, int co, int kh, int kw) { return long(co) * ci * kh * kw + co; };
        long n = conv(3, b, 4, 4) + conv(b, 2 * b, 4, 4) + conv(2 * b, 4 * b, 4, 4);
        n += conv(4 * b, 1, 3, 3);
        n += conv(4 * b, n_domains, img_h / 8, img_w / 8);
        return n;
    }
};

// ---------------------------------------------------------------------------
// Generator: images in [0,1] conditioned on a one-hot domain, StarGAN layout
// scaled down (2 downsampling convs, n_res residual blocks, 2 upsampling).
// ---------------------------------------------------------------------------

template <typename S>
class Generator {
public:
    Generator(const GanArch& arch, Rng& rng) : arch_(arch) {
        const int b = arch.base_ch, nd = arch.n_domains;
        net_.add(std::make_unique<nn::Conv2d<S>>(3 + nd, b, 7, 7, 1, 3, rng, "g_in"));
        net_.add(std::make_unique<nn::InstanceNorm<S>>(b, "g_in_n"));
        net_.add(std::make_unique<nn::ReLU<S>>());
        net_.add(std::make_unique<nn::Conv2d<S>>(b, 2 * b, 4, 4, 2, 1, rng, "g_d1"));
        net_.add(std::make_unique<nn::InstanceNorm<S>>(2 * b, "g_d1_n"));
        net_.add(std::make_unique<nn::ReLU<S>>());
        net_.add(std::make_unique<nn::Conv2d<S>>(2 * b, 4 * b, 4, 4, 2, 1, rng, "g_d2"));
        net_.add(std::make_unique<nn::InstanceNorm<S>>(4 * b, "g_d2_n"));
        net_.add(std::make_unique<nn::ReLU<S>>());
        for (int i = 0; i < arch.n_res; ++i)
            net_.add(std::make_unique<nn::ResBlock<S>>(4 * b, rng, "g_res" + std::to_string(i)));
        net_.add(std::make_unique<nn::ConvTranspose2d<S>>(4 * b, 2 * b, 4, 4, 2, 1, rng, "g_u1"));
        net_.add(std::make_unique<nn::InstanceNorm<S>>(2 * b, "g_u1_n"));
        net_.add(std::make_unique<nn::ReLU<S>>());
        net_.add(std::make_unique<nn::ConvTranspose2d<S>>(2 * b, b, 4, 4, 2, 1, rng, "g_u2"));
        net_.add(std::make_unique<nn::InstanceNorm<S>>(b, "g_u2_n"));
        net_.add(std::make_unique<nn::ReLU<S>>());
        net_.add(std::make_unique<nn::Conv2d<S>>(b, 3, 7, 7, 1, 3, rng, "g_out"));
        net_.add(std::make_unique<nn::Tanh<S>>());
    }

    const GanArch& arch() const { return arch_; }

    /// images in [0,1] -> images in [0,1]; one forward pass, cached if requested.
    Batch<S> forward(const Batch<S>& images, const std::vector<int>& domains, nn::CachePtr<S>* cache) {
        Batch<S> in;
        in.reserve(images.size());
        for (size_t i = 0; i < images.size(); ++i) {
            const auto& img = images[i];
            const int d = domains[i];
            if (d < 0 || d >= arch_.n_domains)
                throw std::invalid_argument("generator: invalid domain index " + std::to_string(d));
            Tensor<S> t(3 + arch_.n_domains, img.h, img.w);
            t.m.topRows(3) = img.m * S(2) - Mat<S>::Constant(3, img.m.cols(), S(1));
            t.m.row(3 + d).setConstant(S(1));
            in.push_back(std::move(t));
        }
        Batch<S> out = net_.forward(in, true, cache);
        for (auto& o : out) o.m = ((o.m.array() + S(1)) * S(0.5)).max(S(0)).min(S(1));
        return out;
    }

    /// dout in [0,1] output space; accumulates parameter grads and returns the
    /// gradient w.r.t. the [0,1] input images.
    Batch<S> backward(const Batch<S>& dout, const nn::LayerCache<S>& cache) {
        Batch<S> dy = dout;
        for (auto& d : dy) d.m *= S(0.5);
        Batch<S> din = net_.backward(dy, cache);
        Batch<S> dimg;
        dimg.reserve(din.size());
        for (auto& d : din) {
            Tensor<S> t(3, d.h, d.w);
            t.m = d.m.topRows(3) * S(2);
            dimg.push_back(std::move(t));
        }
        return dimg;
    }

    std::vector<nn::ParamRef<S>> params() {
        std::vector<nn::ParamRef<S>> out;
        net_.collect_params(out, "G.");
        return out;
    }

private:
    GanArch arch_;
    nn::Sequential<S> net_;
};

// ---------------------------------------------------------------------------
// Discriminator: shared conv trunk, patch-style real/fake head averaged to a
// scalar score per image, and a domain-classification head.
// ---------------------------------------------------------------------------

template <typename S>
class Discriminator {
public:
    Discriminator(const GanArch& arch, Rng& rng) : arch_(arch) {
        const int b = arch.base_ch;
        trunk_.add(std::make_unique<nn::Conv2d<S>>(3, b, 4, 4, 2, 1, rng, "d_1"));
        trunk_.add(std::make_unique<nn::LeakyReLU<S>>(S(0.01)));
        trunk_.add(std::make_unique<nn::Conv2d<S>>(b, 2 * b, 4, 4, 2, 1, rng, "d_2"));
        trunk_.add(std::make_unique<nn::LeakyReLU<S>>(S(0.01)));
        trunk_.add(std::make_unique<nn::Conv2d<S>>(2 * b, 4 * b, 4, 4, 2, 1, rng, "d_3"));
        trunk_.add(std::make_unique<nn::LeakyReLU<S>>(S(0.01)));
        src_head_ = std::make_unique<nn::Conv2d<S>>(4 * b, 1, 3, 3, 1, 1, rng, "d_src");
        cls_head_ = std::make_unique<nn::Conv2d<S>>(4 * b, arch.n_domains, arch.img_h / 8,
                                                    arch.img_w / 8, 1, 0, rng, "d_cls");
    }

    struct Output {
        Vec<S> src_scores;     // per-sample mean over the patch map
        Mat<S> domain_logits;  // n x n_domains
        int patch_h = 0, patch_w = 0;
    };

    struct Cache {
        nn::CachePtr<S> trunk, src, cls;
        Batch<S> trunk_out;
    };

    Output forward(const Batch<S>& images, Cache* cache) {
        Batch<S> in;
        in.reserve(images.size());
        for (const auto& img : images) {
            Tensor<S> t(3, img.h, img.w);
            t.m = img.m * S(2) - Mat<S>::Constant(3, img.m.cols(), S(1));
            in.push_back(std::move(t));
        }
        Batch<S> t = trunk_.forward(in, true, cache ? &cache->trunk : nullptr);
        Batch<S> patch = src_head_->forward(t, true, cache ? &cache->src : nullptr);
        Batch<S> dom = cls_head_->forward(t, true, cache ? &cache->cls : nullptr);
        Output out;
        const int n = static_cast<int>(images.size());
        out.src_scores.resize(n);
        out.domain_logits.resize(n, arch_.n_domains);
        out.patch_h = patch[0].h;
        out.patch_w = patch[0].w;
        for (int i = 0; i < n; ++i) {
            out.src_scores(i) = patch[static_cast<size_t>(i)].m.mean();
            out.domain_logits.row(i) = dom[static_cast<size_t>(i)].m.col(0).transpose();
        }
        if (cache) cache->trunk_out = t;
        return out;
    }

    /// Returns gradient w.r.t. the [0,1] input images.
    Batch<S> backward(const Vec<S>& dsrc_scores, const Mat<S>& ddomain_logits, const Cache& cache,
                      int patch_h, int patch_w) {
        const int n = static_cast<int>(cache.trunk_out.size());
        Batch<S> dpatch, ddom;
        for (int i = 0; i < n; ++i) {
            Tensor<S> p(1, patch_h, patch_w);
            p.m.setConstant(dsrc_scores(i) / S(patch_h * patch_w));
            dpatch.push_back(std::move(p));
            Tensor<S> d(arch_.n_domains, 1, 1);
            d.m.col(0) = ddomain_logits.row(i).transpose();
            ddom.push_back(std::move(d));
        }
        Batch<S> dt = src_head_->backward(dpatch, *cache.src);
        Batch<S> dt2 = cls_head_->backward(ddom, *cache.cls);
        for (int i = 0; i < n; ++i) dt[static_cast<size_t>(i)].m += dt2[static_cast<size_t>(i)].m;
        Batch<S> din = trunk_.backward(dt, *cache.trunk);
        for (auto& d : din) d.m *= S(2);
        return din;
    }

    std::vector<nn::ParamRef<S>> params() {
        std::vector<nn::ParamRef<S>> out;
        trunk_.collect_params(out, "D.");
        src_head_->collect_params(out, "D.");
        cls_head_->collect_params(out, "D.");
        return out;
    }

private:
    GanArch arch_;
    nn::Sequential<S> trunk_;
    std::unique_ptr<nn::Conv2d<S>> src_head_, cls_head_;
};

template <typename S>
struct GanModels {
    GanArch arch;
    std::unique_ptr<Generator<S>> g;
    std::unique_ptr<Discriminator<S>> d;

    GanModels(const GanArch& a, Rng& rng)
        : arch(a), g(std::make_unique<Generator<S>>(a, rng)),
          d(std::make_unique<Discriminator<S>>(a, rng)) {}

    Checkpoint<S> to_checkpoint() {
        Checkpoint<S> ck;
        for (auto& p : g->params()) ck.tensors[p.name] = *p.value;
        for (auto& p : d->params()) ck.tensors[p.name] = *p.value;
        std::ostringstream os;
        os << "gan.img_h=" << arch.img_h << "\ngan.img_w=" << arch.img_w
           << "\ngan.n_domains=" << arch.n_domains << "\ngan.base_ch=" << arch.base_ch
           << "\ngan.n_res=" << arch.n_res << "\n";
        ck.config_echo = os.str();
        return ck;
    }

    void from_checkpoint(const Checkpoint<S>& ck) {
        for (auto& p : g->params()) *p.value = ck.get(p.name);
        for (auto& p : d->params()) *p.value = ck.get(p.name);
    }

    void save(const std::filesystem::path& path) { to_checkpoint().save(path); }

    static GanArch arch_from_echo(const std::string& echo) {
        GanArch a;
        std::istringstream is(echo);
        std::string line;
        while (std::getline(is, line)) {
            const auto eq = line.find('=');
            if (eq == std::string::npos) continue;
            const std::string key = line.substr(0, eq);
            const int val = std::stoi(line.substr(eq + 1));
            if (key == "gan.img_h") a.img_h = val;
            else if (key == "gan.img_w") a.img_w = val;
            else if (key == "gan.n_domains") a.n_domains = val;
            else if (key == "gan.base_ch") a.base_ch = val;
            else if (key == "gan.n_res") a.n_res = val;
        }
        return a;
    }

    static GanModels load(const std::filesystem::path& path, Rng& rng) {
        Checkpoint<S> ck = Checkpoint<S>::load(path);
        GanModels m(arch_from_echo(ck.config_echo), rng);
        m.from_checkpoint(ck);
        return m;
    }
};

// ---------------------------------------------------------------------------
// Ops
// ---------------------------------------------------------------------------

/// G(x, c): pixels translated and clamped; identity + mask copied, camera set
/// to the conditioning domain.
template <typename S>
ImageSample<S> translate(const ImageSample<S>& x, DomainLabel c, Generator<S>& g) {
    if (c.index < 0 || c.index >= g.arch().n_domains)
        throw std::invalid_argument("translate: invalid domain index");
    Batch<S> out = g.forward({x.pixels}, {c.index}, nullptr);
    ImageSample<S> y = x;
    y.pixels = std::move(out[0]);
    y.camera = c.index;
    return y;
}

/// One translated copy of every source image per target camera; identities
/// carried over unchanged.
template <typename S>
data::Dataset<S> generate_transferred_set(const data::Dataset<S>& source,
                                          const std::vector<DomainLabel>& target_cameras,
                                          Generator<S>& g) {
    data::Dataset<S> out;
    out.num_identities = source.num_identities;
    out.num_cameras = g.arch().n_domains;
    out.domain_tag = "transferred";
    for (const auto& s : source.samples)
        for (const auto& cam : target_cameras) {
            ImageSample<S> t = translate(s, cam, g);
            t.sample_id = s.sample_id + "_t" + std::to_string(cam.index);
            out.samples.push_back(std::move(t));
        }
    return out;
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

struct GanTrainConfig {
    int batch_size = 16;
    int n_critic = 5;            // discriminator updates per generator update
    double lr_g = 1e-4, lr_d = 1e-4;
    double beta1 = 0.5, beta2 = 0.999;
    int iters = 5000;            // one iter = n_critic D steps + 1 G step
    int ckpt_every = 1000;
    bool nonsaturating_g = false;  // Eq. 5 literal by default
    bool pid_normalize = true;
    std::uint64_t seed = 1;
};

template <typename S>
struct GanTrainResult {
    long d_updates = 0, g_updates = 0;
    losses::GanComponents<S> last;
};

namespace detail {

template <typename S>
struct UnionSample {
    const ImageSample<S>* sample;
    int domain;       // global camera index
    bool from_target;
};

template <typename S>
std::vector<UnionSample<S>> build_union(const data::Dataset<S>& source,
                                        const data::Dataset<S>& target) {
    std::vector<UnionSample<S>> u;
    u.reserve(source.size() + target.size());
    for (const auto& s : source.samples) u.push_back({&s, s.camera, false});
    for (const auto& s : target.samples) u.push_back({&s, source.num_cameras + s.camera, true});
    return u;
}

/// pid consistency view: horizontal flip + mild color jitter, mask flipped with it.
template <typename S>
ImageSample<S> pid_augment(const ImageSample<S>& s, Rng& rng) {
    ImageSample<S> a = s;
    a.pixels = hflip(s.pixels);
    if (s.has_mask()) a.mask = hflip(s.mask);
    for (int ch = 0; ch < 3; ++ch) {
        const S gain = S(rng.uniform(0.9, 1.1));
        a.pixels.m.row(ch) = (a.pixels.m.row(ch) * gain).array().max(S(0)).min(S(1));
    }
    return a;
}

}  // namespace detail

/// Thrown when any loss component stops being finite; carries a diagnostic.
struct GanDiverged : std::runtime_error {
    explicit GanDiverged(const std::string& what) : std::runtime_error(what) {}
};

template <typename S>
GanTrainResult<S> train_gan(const data::Dataset<S>& source, const data::Dataset<S>& target,
                            GanModels<S>& models, const GanTrainConfig& cfg,
                            const losses::LossWeights<S>& w, std::ostream* loss_log = nullptr,
                            const std::filesystem::path* ckpt_dir = nullptr) {
    if (cfg.n_critic < 1) throw std::invalid_argument("train_gan: n_critic must be >= 1");
    const int nd = models.arch.n_domains;
    if (nd != source.num_cameras + target.num_cameras)
        throw std::invalid_argument("train_gan: domain vocabulary mismatch");

    auto uni = detail::build_union(source, target);
    if (uni.empty()) throw std::invalid_argument("train_gan: empty training union");
    Rng rng(cfg.seed);

    nn::Adam<S> opt_g(models.g->params(), S(cfg.lr_g), S(cfg.beta1), S(cfg.beta2));
    nn::Adam<S> opt_d(models.d->params(), S(cfg.lr_d), S(cfg.beta1), S(cfg.beta2));

    GanTrainResult<S> res;

    auto draw_batch = [&](Batch<S>& images, Batch<S>& masks, std::vector<int>& dom_true,
                          std::vector<int>& dom_cond, std::vector<const ImageSample<S>*>& raw) {
        images.clear();
        masks.clear();
        dom_true.clear();
        dom_cond.clear();
        raw.clear();
        for (int b = 0; b < cfg.batch_size; ++b) {
            const auto& u = uni[static_cast<size_t>(rng.uniform_int(0, static_cast<int>(uni.size()) - 1))];
            images.push_back(u.sample->pixels);
            if (w.lambda_pid > S(0)) {
                if (!u.sample->has_mask())
                    throw std::invalid_argument("train_gan: lambda_pid > 0 but sample " +
                                                u.sample->sample_id + " has no mask");
                masks.push_back(u.sample->mask);
            }
            dom_true.push_back(u.domain);
            dom_cond.push_back(rng.uniform_int(0, nd - 1));
            raw.push_back(u.sample);
        }
    };

    Batch<S> images, masks;
    std::vector<int> dom_true, dom_cond;
    std::vector<const ImageSample<S>*> raw;

    for (int iter = 0; iter < cfg.iters; ++iter) {
        losses::GanComponents<S> comp;

        // --- discriminator steps ---
        for (int k = 0; k < cfg.n_critic; ++k) {
            draw_batch(images, masks, dom_true, dom_cond, raw);
            Batch<S> fake = models.g->forward(images, dom_cond, nullptr);

            typename Discriminator<S>::Cache cr, cf;
            auto real_out = models.d->forward(images, &cr);
            auto fake_out = models.d->forward(fake, &cf);

            Vec<S> ds_real, ds_fake;
            comp.adv = losses::adversarial_from_scores(real_out.src_scores, fake_out.src_scores,
                                                       &ds_real, &ds_fake);
            Mat<S> dlog_real;
            comp.cls_real = losses::domain_classification(real_out.domain_logits, dom_true,
                                                          &dlog_real);
            // L_D = -adv + lambda_cls * cls_real
            opt_d.zero_grad();
            models.d->backward(-ds_real, w.lambda_cls * dlog_real, cr, real_out.patch_h,
                               real_out.patch_w);
            models.d->backward(-ds_fake, Mat<S>::Zero(fake_out.domain_logits.rows(), nd), cf,
                               fake_out.patch_h, fake_out.patch_w);
            opt_d.step();
            ++res.d_updates;
        }

        // --- generator step ---
        draw_batch(images, masks, dom_true, dom_cond, raw);
        opt_g.zero_grad();

        nn::CachePtr<S> gf;
        Batch<S> fake = models.g->forward(images, dom_cond, &gf);

        typename Discriminator<S>::Cache df;
        auto fake_out = models.d->forward(fake, &df);

        Vec<S> ds_fake;
        S adv_fake_term;
        if (cfg.nonsaturating_g) {
            adv_fake_term = losses::nonsaturating_gen_from_scores(fake_out.src_scores, &ds_fake);
        } else {
            Vec<S> empty(0), unused;
            adv_fake_term = losses::adversarial_from_scores(empty, fake_out.src_scores, &unused,
                                                            &ds_fake);
        }
        Mat<S> dlog_fake;
        comp.cls_fake = losses::domain_classification(fake_out.domain_logits, dom_cond, &dlog_fake);

        // reconstruction: G(G(x,c), c') vs x
        nn::CachePtr<S> gr;
        Batch<S> rec = models.g->forward(fake, dom_true, &gr);
        Batch<S> drec;
        comp.rec = losses::l1_component(rec, images, &drec);

        // identity mapping on target-domain inputs with their own domain
        std::vector<int> idt_rows;
        Batch<S> idt_in;
        std::vector<int> idt_dom;
        for (size_t i = 0; i < raw.size(); ++i)
            if (dom_true[i] >= source.num_cameras) {
                idt_rows.push_back(static_cast<int>(i));
                idt_in.push_back(images[i]);
                idt_dom.push_back(dom_true[i]);
            }
        nn::CachePtr<S> gi;
        Batch<S> didt;
        if (!idt_in.empty()) {
            Batch<S> idt_out = models.g->forward(idt_in, idt_dom, &gi);
            comp.idt = losses::l1_component(idt_out, idt_in, &didt);
        }

        // person-identity preserve: masked anchor term + consistency term
        Batch<S> dfake_pid1, dfake_pid2, dfake_aug;
        nn::CachePtr<S> ga;
        if (w.lambda_pid > S(0)) {
            comp.pid = losses::masked_sq_component(fake, images, masks, &dfake_pid1, nullptr,
                                                   cfg.pid_normalize);
            Batch<S> aug_imgs, aug_masks;
            for (const auto* s : raw) {
                ImageSample<S> a = detail::pid_augment(*s, rng);
                aug_imgs.push_back(std::move(a.pixels));
                aug_masks.push_back(std::move(a.mask));
            }
            Batch<S> fake_aug = models.g->forward(aug_imgs, dom_cond, &ga);
            comp.pid += losses::masked_pair_sq_component(fake, masks, fake_aug, aug_masks,
                                                         &dfake_pid2, &dfake_aug,
                                                         cfg.pid_normalize);
        }

        // adv component reported per Eq. 5 needs the real half too
        {
            typename Discriminator<S>::Cache tmp;
            auto real_out = models.d->forward(images, nullptr);
            Vec<S> r1, r2;
            comp.adv = losses::adversarial_from_scores(real_out.src_scores, fake_out.src_scores,
                                                       &r1, &r2);
        }
        (void)adv_fake_term;

        if (!comp.finite()) {
            if (ckpt_dir) models.save(*ckpt_dir / "gan_diverged.ckpt");
            std::ostringstream os;
            os << "train_gan: non-finite loss at iteration " << iter << " (adv=" << comp.adv
               << " cls_r=" << comp.cls_real << " cls_f=" << comp.cls_fake << " rec=" << comp.rec
               << " idt=" << comp.idt << " pid=" << comp.pid << ")";
            throw GanDiverged(os.str());
        }

        // accumulate d(L_G)/d(fake) from every consumer, then one backward
        Batch<S> dfake = models.d->backward(ds_fake, w.lambda_cls * dlog_fake, df,
                                            fake_out.patch_h, fake_out.patch_w);
        for (auto& d : drec) d.m *= w.lambda_rec;
        Batch<S> dfake_rec = models.g->backward(drec, *gr);  // also accumulates G grads (cycle)
        for (size_t i = 0; i < dfake.size(); ++i) {
            dfake[i].m += dfake_rec[i].m;
            if (w.lambda_pid > S(0))
                dfake[i].m += w.lambda_pid * (dfake_pid1[i].m + dfake_pid2[i].m);
        }
        models.g->backward(dfake, *gf);
        if (!idt_in.empty()) {
            for (auto& d : didt) d.m *= w.lambda_idt;
            models.g->backward(didt, *gi);
        }
        if (w.lambda_pid > S(0)) {
            for (auto& d : dfake_aug) d.m *= w.lambda_pid;
            models.g->backward(dfake_aug, *ga);
        }
        opt_g.step();
        ++res.g_updates;
        res.last = comp;

        if (loss_log) {
            (*loss_log) << "{\"iter\":" << iter << ",\"adv\":" << comp.adv
                        << ",\"cls_real\":" << comp.cls_real << ",\"cls_fake\":" << comp.cls_fake
                        << ",\"rec\":" << comp.rec << ",\"idt\":" << comp.idt
                        << ",\"pid\":" << comp.pid << "}\n";
        }
        if (ckpt_dir && cfg.ckpt_every > 0 && (iter + 1) % cfg.ckpt_every == 0)
            models.save(*ckpt_dir / ("gan_iter" + std::to_string(iter + 1) + ".ckpt"));
    }
    return res;
}

}  // namespace reid::camstyle
