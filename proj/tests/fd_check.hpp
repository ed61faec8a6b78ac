#pragma once

// Central finite-difference helpers shared by the gradient-check tests.

#include "reid/tensor.hpp"

#include <cmath>
#include <functional>

namespace fd {

using reid::Mat;

// max relative error between analytic gradient and central differences,
// perturbing every entry of `x`
template <typename F>
double check_grad_matrix(Mat<double>& x, const Mat<double>& analytic, F&& eval,
                         double h = 1e-5) {
    double worst = 0;
    for (int i = 0; i < x.rows(); ++i)
        for (int j = 0; j < x.cols(); ++j) {
            const double orig = x(i, j);
            const double step = h * std::max(1.0, std::abs(orig));
            x(i, j) = orig + step;
            const double fp = eval();
            x(i, j) = orig - step;
            const double fm = eval();
            x(i, j) = orig;
            const double num = (fp - fm) / (2 * step);
            const double ana = analytic(i, j);
            const double denom = std::max({1.0, std::abs(num), std::abs(ana)});
            worst = std::max(worst, std::abs(num - ana) / denom);
        }
    return worst;
}

}  // namespace fd
