#include "haloscan/savgol.hpp"

#include "haloscan/errors.hpp"
#include "haloscan/simd/kernels.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <string>

namespace haloscan {

int SavitzkyGolay::window_bins(double window_hz, double bin_width) {
    int w = static_cast<int>(std::lround(window_hz / bin_width));
    if (w % 2 == 0) ++w;
    return w;
}

SavitzkyGolay::SavitzkyGolay(int window, int order) : window_(window), order_(order) {
    if (window < 3 || window % 2 == 0) {
        throw DomainError("savgol: window must be odd and >= 3, got " + std::to_string(window));
    }
    if (order < 0 || order >= window) {
        throw DomainError("savgol: polynomial order must be in [0, window)");
    }
    const int half = window / 2;
    // Abscissa scaled to [-1, 1] keeps the normal equations well conditioned.
    Eigen::MatrixXd A(window, order + 1);
    for (int i = 0; i < window; ++i) {
        const double t = static_cast<double>(i - half) / half;
        double v = 1.0;
        for (int k = 0; k <= order; ++k) {
            A(i, k) = v;
            v *= t;
        }
    }
    // Rows of the pseudo-inverse: polynomial coefficients as linear maps of y.
    const Eigen::MatrixXd pinv =
        A.colPivHouseholderQr().solve(Eigen::MatrixXd::Identity(window, window));

    auto row_at = [&](double t) {
        Eigen::RowVectorXd basis(order + 1);
        double v = 1.0;
        for (int k = 0; k <= order; ++k) {
            basis(k) = v;
            v *= t;
        }
        return Eigen::RowVectorXd(basis * pinv);
    };

    const Eigen::RowVectorXd c = row_at(0.0);
    centre_.assign(c.data(), c.data() + window);
    edge_.resize(static_cast<std::size_t>(half) * window);
    for (int k = 0; k < half; ++k) {
        const Eigen::RowVectorXd r = row_at(static_cast<double>(k - half) / half);
        std::copy(r.data(), r.data() + window, edge_.begin() + static_cast<long>(k) * window);
    }
}

std::vector<double> SavitzkyGolay::smooth(std::span<const double> y) const {
    const auto n = y.size();
    const auto w = static_cast<std::size_t>(window_);
    if (n < w) {
        throw DomainError("savgol: window of " + std::to_string(window_) +
                          " bins exceeds the band of " + std::to_string(n) + " bins");
    }
    const std::size_t half = w / 2;
    std::vector<double> out(n);
    simd::kernels().correlate(y, centre_, std::span<double>(out).subspan(half, n - w + 1));
    for (std::size_t k = 0; k < half; ++k) {
        const double* row = edge_.data() + k * w;
        double lo = 0.0;
        double hi = 0.0;
        for (std::size_t i = 0; i < w; ++i) {
            lo += row[i] * y[i];
            // Mirror: offset k from the right end uses the reversed row.
            hi += row[i] * y[n - 1 - i];
        }
        out[k] = lo;
        out[n - 1 - k] = hi;
    }
    return out;
}

}  // namespace haloscan
