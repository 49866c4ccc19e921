#include "haloscan/inference.hpp"

#include "haloscan/errors.hpp"
#include "haloscan/simd/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace haloscan {

double log_prior_update(double x, double mu) { return mu * x - 0.5 * mu * mu; }

double prior_update(double x, double mu) { return std::exp(log_prior_update(x, mu)); }

std::vector<double> combine_updates(std::span<const double> initial,
                                    std::span<const std::vector<double>> rescans) {
    std::vector<double> U(initial.begin(), initial.end());
    for (const auto& r : rescans) {
        if (r.size() != U.size()) throw DomainError("combine_updates: rescan is not aligned");
        for (std::size_t i = 0; i < U.size(); ++i) {
            if (!std::isnan(r[i])) U[i] *= r[i];
        }
    }
    return U;
}

double aggregate(std::span<const double> U) {
    if (U.empty()) throw DomainError("aggregate: no bins");
    double sum = 0.0;
    for (double u : U) sum += u;
    return sum / static_cast<double>(U.size());
}

double aggregate_log(std::span<const double> log_U) {
    if (log_U.empty()) throw DomainError("aggregate: no bins");
    const double top = *std::max_element(log_U.begin(), log_U.end());
    if (top == -std::numeric_limits<double>::infinity()) return 0.0;
    double sum = 0.0;
    for (double l : log_U) sum += std::exp(l - top);
    return std::exp(top + std::log(sum / static_cast<double>(log_U.size())));
}

std::vector<double> coupling_grid(double g_min, double g_max, int n) {
    if (!(g_min > 0 && g_max > g_min) || n < 2) {
        throw DomainError("coupling grid: need 0 < g_min < g_max and n >= 2");
    }
    std::vector<double> g(static_cast<std::size_t>(n));
    const double ratio = std::log(g_max / g_min);
    for (int k = 0; k < n; ++k) g[static_cast<std::size_t>(k)] = g_min * std::exp(ratio * k / (n - 1));
    g.front() = g_min;
    g.back() = g_max;
    return g;
}

UpdateField::UpdateField(std::vector<UpdateLayer> layers) : layers_(std::move(layers)) {
    if (layers_.empty()) throw DomainError("update field: need at least one scan");
    n_ = layers_.front().x.size();
    for (auto& l : layers_) {
        if (l.x.size() != n_ || l.eta.size() != n_) throw DomainError("update field: misaligned scans");
        for (std::size_t i = 0; i < n_; ++i) {
            if (std::isnan(l.x[i])) {
                l.x[i] = 0.0;
                l.eta[i] = 0.0;
            }
        }
    }
}

void UpdateField::log_U(double g, std::span<double> out) const {
    if (out.size() != n_) throw DomainError("update field: output size mismatch");
    const auto& kern = simd::kernels();
    std::fill(out.begin(), out.end(), 0.0);
    std::vector<double> tmp(n_);
    for (const auto& l : layers_) {
        kern.log_updates(l.x, l.eta, g * g, tmp);
        for (std::size_t i = 0; i < n_; ++i) out[i] += tmp[i];
    }
}

double UpdateField::aggregate(double g, std::size_t begin, std::size_t end) const {
    if (begin >= end || end > n_) throw DomainError("aggregate: empty bin range");
    std::vector<double> l(n_);
    log_U(g, l);
    return aggregate_log(std::span<const double>(l).subspan(begin, end - begin));
}

std::vector<std::pair<std::size_t, std::size_t>> partition_windows(std::size_t n_bins,
                                                                   std::size_t n_windows) {
    if (n_windows == 0 || n_windows > n_bins) {
        throw DomainError("windows: need 1 <= n_windows <= number of bins");
    }
    std::vector<std::pair<std::size_t, std::size_t>> out;
    const std::size_t base = n_bins / n_windows;
    const std::size_t extra = n_bins % n_windows;
    std::size_t lo = 0;
    for (std::size_t w = 0; w < n_windows; ++w) {
        const std::size_t len = base + (w < extra ? 1 : 0);
        out.emplace_back(lo, lo + len);
        lo += len;
    }
    return out;
}

std::optional<double> bisect_crossing(const std::function<double(double)>& U,
                                      std::span<const double> g_grid,
                                      std::span<const double> U_grid, double target,
                                      double tolerance) {
    for (std::size_t k = 0; k + 1 < g_grid.size(); ++k) {
        if (!(U_grid[k] >= target && U_grid[k + 1] < target)) continue;
        double lo = g_grid[k];
        double hi = g_grid[k + 1];
        while (hi - lo > tolerance * hi) {
            const double mid = 0.5 * (lo + hi);
            if (U(mid) >= target) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        return 0.5 * (lo + hi);
    }
    return std::nullopt;
}

void ExclusionSettings::validate() const {
    if (!(g_min > 0 && g_max > g_min) || n_grid < 2) throw DomainError("exclusion: bad coupling grid");
    if (!(target > 0 && target < 1)) throw DomainError("exclusion: target must lie in (0, 1)");
    if (n_windows < 1) throw DomainError("exclusion: need at least one window");
    if (!(tolerance > 0)) throw DomainError("exclusion: tolerance must be positive");
}

ExclusionResult exclusion(const UpdateField& field, std::span<const double> nu,
                          const ExclusionSettings& settings) {
    settings.validate();
    const std::size_t n = field.size();
    if (n == 0) throw DomainError("exclusion: no analysed bins");
    if (nu.size() != n) throw DomainError("exclusion: frequency labels do not match the bins");

    ExclusionResult out;
    out.target = settings.target;
    out.n_bins = n;
    out.g_grid = coupling_grid(settings.g_min, settings.g_max, settings.n_grid);
    const auto parts = partition_windows(n, static_cast<std::size_t>(settings.n_windows));
    out.windows.resize(parts.size());
    for (std::size_t w = 0; w < parts.size(); ++w) {
        out.windows[w].nu_lo = nu[parts[w].first];
        out.windows[w].nu_hi = nu[parts[w].second - 1];
        out.windows[w].n_bins = parts[w].second - parts[w].first;
        out.windows[w].U.resize(out.g_grid.size());
    }
    out.aggregate_U.resize(out.g_grid.size());

    const auto n_g = static_cast<long long>(out.g_grid.size());
#pragma omp parallel for schedule(static)
    for (long long k = 0; k < n_g; ++k) {
        const auto kk = static_cast<std::size_t>(k);
        std::vector<double> l(n);
        field.log_U(out.g_grid[kk], l);
        out.aggregate_U[kk] = aggregate_log(l);
        for (std::size_t w = 0; w < parts.size(); ++w) {
            out.windows[w].U[kk] = aggregate_log(
                std::span<const double>(l).subspan(parts[w].first, parts[w].second - parts[w].first));
        }
    }

    out.g_star = bisect_crossing([&](double g) { return field.aggregate(g); }, out.g_grid,
                                 out.aggregate_U, settings.target, settings.tolerance);
    for (std::size_t w = 0; w < parts.size(); ++w) {
        const auto [lo, hi] = parts[w];
        out.windows[w].g_target =
            bisect_crossing([&, lo = lo, hi = hi](double g) { return field.aggregate(g, lo, hi); },
                            out.g_grid, out.windows[w].U, settings.target, settings.tolerance);
    }
    return out;
}

AnalysedBins analysed_bins(const GrandSpectrum& initial, std::span<const GrandSpectrum> rescans,
                           const FrequencyWindow& window) {
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < initial.size(); ++i) {
        if (std::isfinite(initial.x[i]) && window.contains(initial.nu_at(i))) keep.push_back(i);
    }
    if (keep.empty()) throw DomainError("exclusion: no valid bins inside the analysis window");

    std::vector<UpdateLayer> layers;
    UpdateLayer base;
    std::vector<double> nu;
    for (std::size_t i : keep) {
        base.x.push_back(initial.x[i]);
        base.eta.push_back(initial.eta_sens[i]);
        nu.push_back(initial.nu_at(i));
    }
    layers.push_back(std::move(base));
    for (const auto& r : rescans) {
        if (r.bin_width != initial.bin_width) throw DomainError("exclusion: rescan bin width differs");
        const double exact = (r.nu_start - initial.nu_start) / initial.bin_width;
        const long shift = std::lround(exact);
        if (std::abs(exact - static_cast<double>(shift)) > 1e-6) {
            throw DomainError("exclusion: rescan grid is offset from the initial grid");
        }
        UpdateLayer layer;
        layer.x.assign(keep.size(), std::numeric_limits<double>::quiet_NaN());
        layer.eta.assign(keep.size(), 0.0);
        for (std::size_t k = 0; k < keep.size(); ++k) {
            const long j = static_cast<long>(keep[k]) - shift;
            if (j < 0 || j >= static_cast<long>(r.size())) continue;
            const auto jj = static_cast<std::size_t>(j);
            if (!std::isfinite(r.x[jj])) continue;
            layer.x[k] = r.x[jj];
            layer.eta[k] = r.eta_sens[jj];
        }
        layers.push_back(std::move(layer));
    }
    return AnalysedBins{std::move(nu), UpdateField(std::move(layers))};
}

}  // namespace haloscan
