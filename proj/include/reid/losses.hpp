#pragma once

#include "reid/tensor.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace reid::losses {

constexpr double kLogFloor = 1e-12;  // clamp inside every log

template <typename S>
struct LossWeights {
    S lambda_t = S(1);
    S lambda_cls = S(1);
    S lambda_rec = S(10);
    S lambda_idt = S(1);
    S lambda_pid = S(10);
    S lambda_g = S(1);
    S lambda_up = S(1);
    S lambda_lower = S(0.5);
    S lambda_erase = S(1);
    S margin_pretrain = S(0.5);
    S margin_finetune = S(0.3);
    S epsilon = S(0.1);
};

// ---------------------------------------------------------------------------
// Cross-entropy with label smoothing
// ---------------------------------------------------------------------------

/// Smoothed target distribution: 1-eps+eps/M at the true class, eps/M elsewhere.
template <typename S>
Vec<S> smoothed_target(int label, S eps, int num_classes) {
    Vec<S> q = Vec<S>::Constant(num_classes, eps / S(num_classes));
    q(label) += S(1) - eps;
    return q;
}

/// probs: n x M rows on the simplex (softmax upstream). Mean over the batch.
template <typename S>
S smoothed_cross_entropy(const Mat<S>& probs, const std::vector<int>& labels, S eps,
                         int num_classes, Mat<S>* dprobs = nullptr) {
    const int n = static_cast<int>(probs.rows());
    if (n != static_cast<int>(labels.size()))
        throw std::invalid_argument("smoothed_cross_entropy: batch size mismatch");
    if (dprobs) *dprobs = Mat<S>::Zero(n, num_classes);
    S loss = 0;
    const S floor = S(kLogFloor);
    for (int i = 0; i < n; ++i) {
        const int y = labels[static_cast<size_t>(i)];
        if (y < 0 || y >= num_classes)
            throw std::invalid_argument("smoothed_cross_entropy: label out of range");
        for (int k = 0; k < num_classes; ++k) {
            const S q = eps / S(num_classes) + (k == y ? S(1) - eps : S(0));
            const S p = probs(i, k);
            loss -= q * S(std::log(static_cast<double>(std::max(p, floor))));
            if (dprobs && p > floor) (*dprobs)(i, k) = -q / (p * S(n));
        }
    }
    return loss / S(n);
}

template <typename S>
Mat<S> softmax_rows(const Mat<S>& logits) {
    Mat<S> p(logits.rows(), logits.cols());
    for (int i = 0; i < logits.rows(); ++i) {
        const S mx = logits.row(i).maxCoeff();
        Eigen::Array<S, 1, Eigen::Dynamic> e = (logits.row(i).array() - mx).exp();
        p.row(i) = e / e.sum();
    }
    return p;
}

/// Fused softmax + smoothed CE for training: dlogits = (p - q) / n.
template <typename S>
S smoothed_cross_entropy_logits(const Mat<S>& logits, const std::vector<int>& labels, S eps,
                                Mat<S>* dlogits = nullptr) {
    const int n = static_cast<int>(logits.rows());
    const int m = static_cast<int>(logits.cols());
    Mat<S> p = softmax_rows(logits);
    const S loss = smoothed_cross_entropy<S>(p, labels, eps, m, nullptr);
    if (dlogits) {
        *dlogits = p;
        for (int i = 0; i < n; ++i) {
            const Vec<S> q = smoothed_target(labels[static_cast<size_t>(i)], eps, m);
            dlogits->row(i) -= q.transpose();
        }
        *dlogits /= S(n);
    }
    return loss;
}

// ---------------------------------------------------------------------------
// Batch-hard triplet
// ---------------------------------------------------------------------------

template <typename S>
Mat<S> pairwise_euclidean(const Mat<S>& a, const Mat<S>& b) {
    if (a.cols() != b.cols())
        throw std::invalid_argument("pairwise_euclidean: dimension mismatch");
    Mat<S> d2 = (-2 * a * b.transpose()).eval();
    d2.colwise() += a.rowwise().squaredNorm();
    d2.rowwise() += b.rowwise().squaredNorm().transpose();
    return d2.array().max(S(0)).sqrt();
}

/// Hardest positive (max same-label dist, self excluded) minus hardest
/// negative (min other-label dist), hinged at the margin, averaged over
/// anchors. `sum_reduction` restores the paper's plain sum.
template <typename S>
S batch_hard_triplet(const Mat<S>& emb, const std::vector<int>& labels, S margin,
                     Mat<S>* demb = nullptr, bool sum_reduction = false) {
    const int n = static_cast<int>(emb.rows());
    if (n != static_cast<int>(labels.size()))
        throw std::invalid_argument("batch_hard_triplet: batch size mismatch");
    if (n < 2) throw std::invalid_argument("batch_hard_triplet: batch too small");
    Mat<S> dist = pairwise_euclidean(emb, emb);
    if (demb) *demb = Mat<S>::Zero(emb.rows(), emb.cols());

    const S scale = sum_reduction ? S(1) : S(1) / S(n);
    S loss = 0;
    for (int a = 0; a < n; ++a) {
        int hardest_pos = -1, hardest_neg = -1;
        for (int j = 0; j < n; ++j) {
            if (j == a) continue;
            if (labels[static_cast<size_t>(j)] == labels[static_cast<size_t>(a)]) {
                if (hardest_pos < 0 || dist(a, j) > dist(a, hardest_pos)) hardest_pos = j;
            } else {
                if (hardest_neg < 0 || dist(a, j) < dist(a, hardest_neg)) hardest_neg = j;
            }
        }
        if (hardest_pos < 0)
            throw std::invalid_argument("batch_hard_triplet: anchor " + std::to_string(a) +
                                        " has no positive");
        if (hardest_neg < 0)
            throw std::invalid_argument("batch_hard_triplet: single-class batch");
        const S term = margin + dist(a, hardest_pos) - dist(a, hardest_neg);
        if (term > S(0)) {
            loss += term * scale;
            if (demb) {
                const S dp = dist(a, hardest_pos), dn = dist(a, hardest_neg);
                if (dp > S(0)) {
                    const auto diff = ((emb.row(a) - emb.row(hardest_pos)) / dp * scale).eval();
                    demb->row(a) += diff;
                    demb->row(hardest_pos) -= diff;
                }
                if (dn > S(0)) {
                    const auto diff = ((emb.row(a) - emb.row(hardest_neg)) / dn * scale).eval();
                    demb->row(a) -= diff;
                    demb->row(hardest_neg) += diff;
                }
            }
        }
    }
    return loss;
}

// ---------------------------------------------------------------------------
// Stage I objective
// ---------------------------------------------------------------------------

template <typename S>
struct BaselineLoss {
    S total = 0, cross = 0, triplet = 0;
};

template <typename S>
BaselineLoss<S> baseline_loss(const Mat<S>& logits, const Mat<S>& emb,
                              const std::vector<int>& labels, const LossWeights<S>& w,
                              Mat<S>* dlogits = nullptr, Mat<S>* demb = nullptr) {
    BaselineLoss<S> out;
    out.cross = smoothed_cross_entropy_logits(logits, labels, w.epsilon, dlogits);
    out.triplet = batch_hard_triplet(emb, labels, w.margin_pretrain, demb);
    if (demb) *demb *= w.lambda_t;
    out.total = out.cross + w.lambda_t * out.triplet;
    return out;
}

// ---------------------------------------------------------------------------
// GAN loss components (Eqs. 5-11 shapes)
// ---------------------------------------------------------------------------

/// adv = E[log d_real] + E[log(1 - d_fake)] on probabilities in [0,1].
template <typename S>
S adversarial_component(const Vec<S>& d_real, const Vec<S>& d_fake, Vec<S>* dd_real = nullptr,
                        Vec<S>* dd_fake = nullptr) {
    const S floor = S(kLogFloor);
    S loss = 0;
    if (dd_real) *dd_real = Vec<S>::Zero(d_real.size());
    if (dd_fake) *dd_fake = Vec<S>::Zero(d_fake.size());
    for (int i = 0; i < d_real.size(); ++i) {
        const S p = std::max(d_real(i), floor);
        loss += S(std::log(static_cast<double>(p))) / S(d_real.size());
        if (dd_real && d_real(i) > floor) (*dd_real)(i) = S(1) / (p * S(d_real.size()));
    }
    for (int i = 0; i < d_fake.size(); ++i) {
        const S p = std::max(S(1) - d_fake(i), floor);
        loss += S(std::log(static_cast<double>(p))) / S(d_fake.size());
        if (dd_fake && S(1) - d_fake(i) > floor) (*dd_fake)(i) = S(-1) / (p * S(d_fake.size()));
    }
    return loss;
}

/// Same quantity on raw scores, numerically stable: log sigmoid(s) = -softplus(-s).
template <typename S>
S adversarial_from_scores(const Vec<S>& s_real, const Vec<S>& s_fake, Vec<S>* ds_real = nullptr,
                          Vec<S>* ds_fake = nullptr) {
    auto softplus = [](S v) {
        return v > S(0) ? v + S(std::log1p(std::exp(-static_cast<double>(v))))
                        : S(std::log1p(std::exp(static_cast<double>(v))));
    };
    auto sigmoid = [](S v) { return S(1) / (S(1) + S(std::exp(-static_cast<double>(v)))); };
    S loss = 0;
    if (ds_real) *ds_real = Vec<S>::Zero(s_real.size());
    if (ds_fake) *ds_fake = Vec<S>::Zero(s_fake.size());
    for (int i = 0; i < s_real.size(); ++i) {
        loss -= softplus(-s_real(i)) / S(s_real.size());
        if (ds_real) (*ds_real)(i) = (S(1) - sigmoid(s_real(i))) / S(s_real.size());
    }
    for (int i = 0; i < s_fake.size(); ++i) {
        loss -= softplus(s_fake(i)) / S(s_fake.size());
        if (ds_fake) (*ds_fake)(i) = -sigmoid(s_fake(i)) / S(s_fake.size());
    }
    return loss;
}

/// Non-saturating generator surrogate: -E[log d_fake]; same minimizer, usable
/// gradient when the discriminator is ahead.
template <typename S>
S nonsaturating_gen_from_scores(const Vec<S>& s_fake, Vec<S>* ds_fake = nullptr) {
    auto softplus = [](S v) {
        return v > S(0) ? v + S(std::log1p(std::exp(-static_cast<double>(v))))
                        : S(std::log1p(std::exp(static_cast<double>(v))));
    };
    auto sigmoid = [](S v) { return S(1) / (S(1) + S(std::exp(-static_cast<double>(v)))); };
    S loss = 0;
    if (ds_fake) *ds_fake = Vec<S>::Zero(s_fake.size());
    for (int i = 0; i < s_fake.size(); ++i) {
        loss += softplus(-s_fake(i)) / S(s_fake.size());
        if (ds_fake) (*ds_fake)(i) = (sigmoid(s_fake(i)) - S(1)) / S(s_fake.size());
    }
    return loss;
}

/// Domain-classification CE on head logits (Eqs. 6-7): -E[log p(domain|x)].
template <typename S>
S domain_classification(const Mat<S>& logits, const std::vector<int>& domains,
                        Mat<S>* dlogits = nullptr) {
    const int n = static_cast<int>(logits.rows());
    Mat<S> p = softmax_rows(logits);
    S loss = 0;
    const S floor = S(kLogFloor);
    for (int i = 0; i < n; ++i)
        loss -= S(std::log(static_cast<double>(
                     std::max(p(i, domains[static_cast<size_t>(i)]), floor)))) /
                S(n);
    if (dlogits) {
        *dlogits = p;
        for (int i = 0; i < n; ++i) (*dlogits)(i, domains[static_cast<size_t>(i)]) -= S(1);
        *dlogits /= S(n);
    }
    return loss;
}

/// Mean absolute difference over all pixels and the batch.
template <typename S>
S l1_component(const Batch<S>& a, const Batch<S>& b, Batch<S>* da = nullptr) {
    if (a.size() != b.size()) throw std::invalid_argument("l1_component: batch size mismatch");
    if (a.empty()) return S(0);
    S loss = 0;
    long count = 0;
    for (const auto& t : a) count += t.size();
    if (da) da->clear();
    for (size_t i = 0; i < a.size(); ++i) {
        loss += (a[i].m - b[i].m).array().abs().sum() / S(count);
        if (da) {
            Tensor<S> d = Tensor<S>::zeros_like(a[i]);
            d.m = (a[i].m - b[i].m).array().sign() / S(count);
            da->push_back(std::move(d));
        }
    }
    return loss;
}

/// Masked squared-L2, normalized by foreground area (flag restores the raw
/// sum): per-sample sum(((a-b) . mask)^2) / (3 * |mask|), batch mean.
template <typename S>
S masked_sq_component(const Batch<S>& a, const Batch<S>& b, const Batch<S>& masks,
                      Batch<S>* da = nullptr, Batch<S>* db = nullptr, bool normalize = true) {
    if (a.size() != b.size() || a.size() != masks.size())
        throw std::invalid_argument("masked_sq_component: batch size mismatch");
    if (a.empty()) return S(0);
    S loss = 0;
    const S n = S(a.size());
    if (da) da->clear();
    if (db) db->clear();
    for (size_t i = 0; i < a.size(); ++i) {
        const auto mrow = masks[i].m.row(0);
        const S area = std::max<S>(S(1), mrow.sum());
        const S denom = (normalize ? S(a[i].c) * area : S(1)) * n;
        Mat<S> diff = (a[i].m - b[i].m).array().rowwise() * mrow.array();
        loss += diff.array().square().sum() / denom;
        if (da) {
            Tensor<S> d = Tensor<S>::zeros_like(a[i]);
            d.m = (S(2) / denom) * (diff.array().rowwise() * mrow.array()).matrix();
            da->push_back(std::move(d));
        }
        if (db) {
            Tensor<S> d = Tensor<S>::zeros_like(b[i]);
            d.m = (S(-2) / denom) *
                  ((a[i].m - b[i].m).array().rowwise() * mrow.array().square()).matrix();
            db->push_back(std::move(d));
        }
    }
    return loss;
}

template <typename S>
struct GanComponents {
    S adv = 0, cls_real = 0, cls_fake = 0, rec = 0, idt = 0, pid = 0;

    bool finite() const {
        return std::isfinite(static_cast<double>(adv)) &&
               std::isfinite(static_cast<double>(cls_real)) &&
               std::isfinite(static_cast<double>(cls_fake)) &&
               std::isfinite(static_cast<double>(rec)) &&
               std::isfinite(static_cast<double>(idt)) && std::isfinite(static_cast<double>(pid));
    }
};

/// Eq. 11: L_G = adv + l_cls cls_fake + l_rec rec + l_idt idt + l_pid pid.
template <typename S>
S generator_objective(const GanComponents<S>& c, const LossWeights<S>& w) {
    return c.adv + w.lambda_cls * c.cls_fake + w.lambda_rec * c.rec + w.lambda_idt * c.idt +
           w.lambda_pid * c.pid;
}

/// Eq. 11: L_D = -adv + l_cls cls_real.
template <typename S>
S discriminator_objective(const GanComponents<S>& c, const LossWeights<S>& w) {
    return -c.adv + w.lambda_cls * c.cls_real;
}

// ---------------------------------------------------------------------------
// Stage III objective (Eq. 12)
// ---------------------------------------------------------------------------

constexpr int kNoise = -1;

template <typename S>
struct CmfcLoss {
    S total = 0, cross = 0, tri_global = 0, tri_up = 0, tri_lower = 0;
    int skipped_terms = 0;  // branch terms that could not form a triplet
};

namespace detail {

/// Largest subset on which batch_hard_triplet's preconditions hold: drop
/// NOISE and singleton-label samples, require two classes.
inline std::vector<int> triplet_subset(const std::vector<int>& labels) {
    std::vector<int> keep;
    for (int i = 0; i < static_cast<int>(labels.size()); ++i) {
        if (labels[static_cast<size_t>(i)] == kNoise) continue;
        int same = 0;
        for (int j = 0; j < static_cast<int>(labels.size()); ++j)
            if (j != i && labels[static_cast<size_t>(j)] == labels[static_cast<size_t>(i)]) ++same;
        if (same >= 1) keep.push_back(i);
    }
    int distinct = 0;
    std::vector<int> seen;
    for (int i : keep) {
        bool found = false;
        for (int s : seen)
            if (s == labels[static_cast<size_t>(i)]) found = true;
        if (!found) {
            seen.push_back(labels[static_cast<size_t>(i)]);
            ++distinct;
        }
    }
    if (distinct < 2) keep.clear();
    return keep;
}

template <typename S>
S guarded_triplet(const Mat<S>& emb, const std::vector<int>& labels, S margin, Mat<S>* demb,
                  int* skipped) {
    const std::vector<int> keep = triplet_subset(labels);
    if (demb) *demb = Mat<S>::Zero(emb.rows(), emb.cols());
    if (keep.empty()) {
        if (skipped) ++*skipped;
        return S(0);
    }
    Mat<S> sub(static_cast<int>(keep.size()), emb.cols());
    std::vector<int> sub_labels;
    for (size_t i = 0; i < keep.size(); ++i) {
        sub.row(static_cast<int>(i)) = emb.row(keep[i]);
        sub_labels.push_back(labels[static_cast<size_t>(keep[i])]);
    }
    Mat<S> dsub;
    const S loss = batch_hard_triplet(sub, sub_labels, margin, demb ? &dsub : nullptr);
    if (demb)
        for (size_t i = 0; i < keep.size(); ++i) demb->row(keep[i]) = dsub.row(static_cast<int>(i));
    return loss;
}

}  // namespace detail

/// logits rows align with the batch; labels may contain kNoise, and noisy
/// samples are excluded from the matching branch term only.
template <typename S>
CmfcLoss<S> cmfc_loss(const Mat<S>& logits, const Mat<S>& f_global, const Mat<S>& f_up,
                      const Mat<S>& f_lower, const std::vector<int>& y,
                      const std::vector<int>& y_up, const std::vector<int>& y_lower,
                      const LossWeights<S>& w, Mat<S>* dlogits = nullptr,
                      Mat<S>* df_global = nullptr, Mat<S>* df_up = nullptr,
                      Mat<S>* df_lower = nullptr) {
    CmfcLoss<S> out;
    // cross-entropy over the non-noise global subset
    std::vector<int> ce_rows, ce_labels;
    for (int i = 0; i < static_cast<int>(y.size()); ++i)
        if (y[static_cast<size_t>(i)] != kNoise) {
            ce_rows.push_back(i);
            ce_labels.push_back(y[static_cast<size_t>(i)]);
        }
    if (dlogits) *dlogits = Mat<S>::Zero(logits.rows(), logits.cols());
    if (!ce_rows.empty()) {
        Mat<S> sub(static_cast<int>(ce_rows.size()), logits.cols());
        for (size_t i = 0; i < ce_rows.size(); ++i)
            sub.row(static_cast<int>(i)) = logits.row(ce_rows[i]);
        Mat<S> dsub;
        out.cross = smoothed_cross_entropy_logits(sub, ce_labels, w.epsilon,
                                                  dlogits ? &dsub : nullptr);
        if (dlogits)
            for (size_t i = 0; i < ce_rows.size(); ++i)
                dlogits->row(ce_rows[i]) = dsub.row(static_cast<int>(i));
    } else {
        ++out.skipped_terms;
    }

    out.tri_global = detail::guarded_triplet(f_global, y, w.margin_finetune, df_global,
                                             &out.skipped_terms);
    out.tri_up = detail::guarded_triplet(f_up, y_up, w.margin_finetune, df_up, &out.skipped_terms);
    out.tri_lower =
        detail::guarded_triplet(f_lower, y_lower, w.margin_finetune, df_lower, &out.skipped_terms);

    if (df_global) *df_global *= w.lambda_g;
    if (df_up) *df_up *= w.lambda_up;
    if (df_lower) *df_lower *= w.lambda_lower;
    out.total = out.cross + w.lambda_g * out.tri_global + w.lambda_up * out.tri_up +
                w.lambda_lower * out.tri_lower;
    return out;
}

}  // namespace reid::losses
