#include "rewind/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rewindlab {

void RunningStats::add(double x) noexcept {
    ++n_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (x - mean_);
}

double RunningStats::variance() const noexcept {
    return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0;
}

McEstimate RunningStats::estimate() const noexcept {
    McEstimate e;
    e.mean = mean_;
    e.samples = n_;
    e.stderr_ = n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
    return e;
}

McEstimate summarize(std::span<const double> xs) {
    RunningStats s;
    for (double x : xs) s.add(x);
    return s.estimate();
}

double median(std::vector<double> xs) {
    if (xs.empty()) throw std::invalid_argument("median: empty sample");
    std::sort(xs.begin(), xs.end());
    const std::size_t n = xs.size();
    return n % 2 == 1 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

double stddev(std::span<const double> xs) {
    if (xs.empty()) return 0.0;
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double acc = 0.0;
    for (double x : xs) acc += (x - mean) * (x - mean);
    return std::sqrt(acc / static_cast<double>(xs.size()));
}

LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw std::invalid_argument("linear_fit: need at least two paired points");
    }
    const auto n = static_cast<double>(x.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    LinearFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    return fit;
}

std::vector<HistogramBin> histogram(std::span<const double> xs, double lo, double hi,
                                    std::size_t bins) {
    if (bins == 0 || !(hi > lo)) {
        throw std::invalid_argument("histogram: need bins > 0 and hi > lo");
    }
    std::vector<HistogramBin> out(bins);
    const double width = (hi - lo) / static_cast<double>(bins);
    for (std::size_t b = 0; b < bins; ++b) {
        out[b] = {lo + width * static_cast<double>(b), lo + width * static_cast<double>(b + 1), 0};
    }
    out.back().right = hi;
    for (double x : xs) {
        auto b = static_cast<long>(std::floor((x - lo) / width));
        b = std::clamp(b, 0L, static_cast<long>(bins) - 1);
        ++out[static_cast<std::size_t>(b)].count;
    }
    return out;
}

double ks_statistic(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("ks_statistic: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::size_t i = 0;
    std::size_t j = 0;
    double d = 0.0;
    const auto na = static_cast<double>(a.size());
    const auto nb = static_cast<double>(b.size());
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

}  // namespace rewindlab
