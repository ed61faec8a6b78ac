#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace reid {

template <typename S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;

template <typename S>
using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;

/// Spatial tensor of shape channels x height x width. Storage is a dense
/// matrix with one row per channel and one column per pixel (row-major
/// spatial index y*w + x), so channel-wise reductions are rowwise() ops and
/// im2col products are plain GEMMs.
template <typename S>
struct Tensor {
    int c = 0, h = 0, w = 0;
    Mat<S> m;

    Tensor() = default;
    Tensor(int c_, int h_, int w_) : c(c_), h(h_), w(w_), m(Mat<S>::Zero(c_, h_ * w_)) {}

    bool empty() const { return c == 0; }
    int size() const { return c * h * w; }
    bool same_shape(const Tensor& o) const { return c == o.c && h == o.h && w == o.w; }

    S& at(int ch, int y, int x) { return m(ch, y * w + x); }
    S at(int ch, int y, int x) const { return m(ch, y * w + x); }

    static Tensor zeros_like(const Tensor& o) { return Tensor(o.c, o.h, o.w); }

    template <typename T>
    Tensor<T> cast() const {
        Tensor<T> out;
        out.c = c;
        out.h = h;
        out.w = w;
        out.m = m.template cast<T>();
        return out;
    }
};

template <typename S>
using Batch = std::vector<Tensor<S>>;

template <typename S>
void check_shape(const Tensor<S>& t, int c, int h, int w, const std::string& what) {
    if (t.c != c || t.h != h || t.w != w)
        throw std::invalid_argument(what + ": expected " + std::to_string(c) + "x" +
                                    std::to_string(h) + "x" + std::to_string(w) + ", got " +
                                    std::to_string(t.c) + "x" + std::to_string(t.h) + "x" +
                                    std::to_string(t.w));
}

/// Rows of `out` are the per-sample vectors (n x dim), the layout every loss
/// and clustering routine expects.
template <typename S>
Mat<S> stack_rows(const std::vector<Vec<S>>& vs) {
    if (vs.empty()) return Mat<S>();
    Mat<S> out(static_cast<int>(vs.size()), static_cast<int>(vs[0].size()));
    for (int i = 0; i < out.rows(); ++i) out.row(i) = vs[static_cast<size_t>(i)].transpose();
    return out;
}

}  // namespace reid
