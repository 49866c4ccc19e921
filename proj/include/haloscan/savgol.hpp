#pragma once

#include <span>
#include <vector>

namespace haloscan {

// Savitzky-Golay smoother: least-squares polynomial of the given order over a
// sliding odd-length window, evaluated at the window centre. Within half a
// window of either end the polynomial fitted to the first/last full window is
// evaluated at the point instead.
class SavitzkyGolay {
public:
    SavitzkyGolay(int window, int order);

    // Odd window (in bins) closest to window_hz / bin_width.
    static int window_bins(double window_hz, double bin_width);

    int window() const { return window_; }
    int order() const { return order_; }

    // Symmetric interior taps, length window().
    std::span<const double> taps() const { return centre_; }

    // Throws DomainError if y is shorter than the window.
    std::vector<double> smooth(std::span<const double> y) const;

private:
    int window_;
    int order_;
    std::vector<double> centre_;
    std::vector<double> edge_;  // half rows of length window_, row k evaluates at offset k
};

}  // namespace haloscan
