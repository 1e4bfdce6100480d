#include "adexsim/stats.hpp"

#include "adexsim/error.hpp"

#include <algorithm>
#include <cmath>

namespace adexsim {

LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw FitFailed("fit_line: need at least two paired points");
    }
    const double mx = mean(x);
    const double my = mean(y);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (!(sxx > 0.0)) {
        throw FitFailed("fit_line: x values are all equal");
    }
    LinearFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    return fit;
}

ExponentialFit fit_exponential_decay(std::span<const double> t, std::span<const double> y) {
    if (t.size() != y.size() || t.size() < 3) {
        throw FitFailed("exponential fit: need at least three samples");
    }
    const double sign = y.front() < 0.0 ? -1.0 : 1.0;
    std::vector<double> log_y;
    log_y.reserve(y.size());
    for (double v : y) {
        if (!(sign * v > 0.0)) {
            throw FitFailed("exponential fit: samples change sign or reach zero");
        }
        log_y.push_back(std::log(sign * v));
    }
    const LinearFit line = fit_line(t, log_y);
    if (!(line.slope < 0.0)) {
        throw FitFailed("exponential fit: trace does not decay");
    }
    return {-1.0 / line.slope, sign * std::exp(line.intercept), line.r_squared};
}

double mean(std::span<const double> v) {
    if (v.empty()) {
        return 0.0;
    }
    double sum = 0.0;
    for (double x : v) {
        sum += x;
    }
    return sum / static_cast<double>(v.size());
}

double stddev(std::span<const double> v) {
    if (v.size() < 2) {
        return 0.0;
    }
    const double m = mean(v);
    double ss = 0.0;
    for (double x : v) {
        ss += (x - m) * (x - m);
    }
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

double quantile(std::vector<double> v, double q) {
    if (v.empty()) {
        return 0.0;
    }
    std::sort(v.begin(), v.end());
    const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return v[lo] + frac * (v[hi] - v[lo]);
}

double median(std::vector<double> v) { return quantile(std::move(v), 0.5); }

double coefficient_of_variation(std::span<const double> v) {
    const double m = mean(v);
    return m != 0.0 ? stddev(v) / std::abs(m) : 0.0;
}

} // namespace adexsim
