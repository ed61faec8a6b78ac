#pragma once

#include "reid/image.hpp"
#include "reid/tensor.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace reid::eval {

struct RetrievalMeta {
    std::vector<int> identity;
    std::vector<int> camera;

    size_t size() const { return identity.size(); }
};

struct MetricsReport {
    double map = 0, rank1 = 0, rank5 = 0, rank10 = 0;
    int num_query = 0, num_gallery = 0;
    int skipped_queries = 0;  // queries with no valid cross-camera match
    std::string protocol = "cross-camera-euclidean";

    std::string to_kv() const {
        std::ostringstream os;
        os.precision(17);
        os << "protocol=" << protocol << "\n"
           << "mAP=" << map << "\n"
           << "rank1=" << rank1 << "\n"
           << "rank5=" << rank5 << "\n"
           << "rank10=" << rank10 << "\n"
           << "num_query=" << num_query << "\n"
           << "num_gallery=" << num_gallery << "\n"
           << "skipped_queries=" << skipped_queries << "\n";
        return os.str();
    }
};

template <typename S>
Mat<S> pairwise_euclidean(const Mat<S>& q, const Mat<S>& g) {
    if (q.cols() != g.cols())
        throw std::invalid_argument("pairwise_euclidean: dimension mismatch");
    Mat<S> d2 = (-2 * q * g.transpose()).eval();
    d2.colwise() += q.rowwise().squaredNorm();
    d2.rowwise() += g.rowwise().squaredNorm().transpose();
    return d2.array().max(S(0)).sqrt();
}

/// Cross-camera protocol: gallery entries sharing both identity and camera
/// with the query are excluded; remaining entries ranked by ascending
/// distance (ties by gallery index). AP = mean over correct matches of
/// (#correct up to rank r) / r. Queries with no valid match are skipped and
/// counted.
template <typename S>
MetricsReport cmc_map(const Mat<S>& dist, const RetrievalMeta& query, const RetrievalMeta& gallery) {
    const int nq = static_cast<int>(dist.rows());
    const int ng = static_cast<int>(dist.cols());
    if (nq != static_cast<int>(query.size()) || ng != static_cast<int>(gallery.size()))
        throw std::invalid_argument("cmc_map: metadata misaligned with distance matrix");

    MetricsReport rep;
    rep.num_query = nq;
    rep.num_gallery = ng;
    double sum_ap = 0, hits1 = 0, hits5 = 0, hits10 = 0;
    int valid = 0;

    std::vector<int> order(static_cast<size_t>(ng));
    for (int qi = 0; qi < nq; ++qi) {
        std::vector<int> keep;
        keep.reserve(static_cast<size_t>(ng));
        for (int gi = 0; gi < ng; ++gi) {
            const bool same_id = gallery.identity[static_cast<size_t>(gi)] ==
                                 query.identity[static_cast<size_t>(qi)];
            const bool same_cam = gallery.camera[static_cast<size_t>(gi)] ==
                                  query.camera[static_cast<size_t>(qi)];
            if (same_id && same_cam) continue;
            keep.push_back(gi);
        }
        bool has_match = false;
        for (int gi : keep)
            if (gallery.identity[static_cast<size_t>(gi)] == query.identity[static_cast<size_t>(qi)])
                has_match = true;
        if (!has_match) {
            ++rep.skipped_queries;
            continue;
        }
        ++valid;
        order.assign(keep.begin(), keep.end());
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            if (dist(qi, a) != dist(qi, b)) return dist(qi, a) < dist(qi, b);
            return a < b;
        });
        int correct = 0;
        double ap = 0;
        int first_hit = -1;
        for (int r = 0; r < static_cast<int>(order.size()); ++r) {
            if (gallery.identity[static_cast<size_t>(order[static_cast<size_t>(r)])] ==
                query.identity[static_cast<size_t>(qi)]) {
                ++correct;
                ap += static_cast<double>(correct) / (r + 1);
                if (first_hit < 0) first_hit = r;
            }
        }
        sum_ap += ap / correct;
        if (first_hit < 1) hits1 += 1;
        if (first_hit < 5) hits5 += 1;
        if (first_hit < 10) hits10 += 1;
    }
    if (valid == 0) throw std::runtime_error("cmc_map: no query has a valid match");
    rep.map = sum_ap / valid;
    rep.rank1 = hits1 / valid;
    rep.rank5 = hits5 / valid;
    rep.rank10 = hits10 / valid;
    return rep;
}

inline void append_results_ledger(const std::filesystem::path& ledger, const std::string& line) {
    std::ofstream f(ledger, std::ios::app);
    if (!f) throw std::runtime_error("cannot append to results ledger " + ledger.string());
    f << line << "\n";
}

// ---------------------------------------------------------------------------
// Retrieval grid figure: query tile on the left, top-k gallery tiles to the
// right; solid green border = correct match, dashed red = false match.
// ---------------------------------------------------------------------------

template <typename S>
void retrieval_grid(const ImageSample<S>& query, const std::vector<ImageSample<S>>& gallery,
                    const Vec<S>& dist, int k, const std::filesystem::path& out_path) {
    if (k > static_cast<int>(gallery.size()))
        throw std::invalid_argument("retrieval_grid: k exceeds gallery size");
    const int h = query.pixels.h, w = query.pixels.w;
    const int border = 2, gap = 2;
    const int tile_w = w + 2 * border, tile_h = h + 2 * border;
    const int total_w = (k + 1) * tile_w + k * gap + gap;  // extra gap after the query
    Tensor<S> canvas(3, tile_h, total_w);
    canvas.m.setConstant(S(1));

    std::vector<int> order(gallery.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        if (dist(a) != dist(b)) return dist(a) < dist(b);
        return a < b;
    });

    auto blit = [&](const Tensor<S>& img, int x0, S br, S bg, S bb, bool dashed) {
        for (int y = 0; y < tile_h; ++y)
            for (int x = 0; x < tile_w; ++x) {
                const bool on_border =
                    y < border || y >= tile_h - border || x < border || x >= tile_w - border;
                if (!on_border) continue;
                if (dashed && ((x + y) / 3) % 2 == 1) continue;
                canvas.at(0, y, x0 + x) = br;
                canvas.at(1, y, x0 + x) = bg;
                canvas.at(2, y, x0 + x) = bb;
            }
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                for (int ch = 0; ch < 3; ++ch)
                    canvas.at(ch, y + border, x0 + x + border) = img.at(ch, y, x);
    };

    blit(query.pixels, 0, S(0.5), S(0.5), S(0.5), false);
    for (int r = 0; r < k; ++r) {
        const auto& g = gallery[static_cast<size_t>(order[static_cast<size_t>(r)])];
        const bool correct = g.identity == query.identity;
        const int x0 = tile_w + gap + r * (tile_w + gap);
        if (correct)
            blit(g.pixels, x0, S(0), S(0.8), S(0), false);
        else
            blit(g.pixels, x0, S(0.9), S(0), S(0), true);
    }
    write_ppm(out_path, canvas);
}

}  // namespace reid::eval
