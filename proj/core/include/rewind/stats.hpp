// Small statistics helpers shared by the Monte Carlo drivers.
#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace rewindlab {

struct McEstimate {
    double mean = 0.0;
    double stderr_ = 0.0;  // standard error of the mean
    std::size_t samples = 0;
};

/// Welford accumulator.
class RunningStats {
public:
    void add(double x) noexcept;
    std::size_t count() const noexcept { return n_; }
    double mean() const noexcept { return mean_; }
    double variance() const noexcept;  // unbiased
    McEstimate estimate() const noexcept;

private:
    std::size_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

McEstimate summarize(std::span<const double> xs);

double median(std::vector<double> xs);
double stddev(std::span<const double> xs);  // population

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

struct HistogramBin {
    double left;
    double right;
    std::size_t count;
};

/// Equal-width bins on [lo, hi]; values outside are clamped to the edge bins.
std::vector<HistogramBin> histogram(std::span<const double> xs, double lo, double hi,
                                    std::size_t bins);

/// Two-sample Kolmogorov-Smirnov statistic sup |F1 - F2|.
double ks_statistic(std::vector<double> a, std::vector<double> b);

}  // namespace rewindlab
