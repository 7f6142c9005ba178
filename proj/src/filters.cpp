#include "vfloc/filters.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>
#include <stdexcept>

namespace vfloc {

namespace {

constexpr double kPi = std::numbers::pi;

Biquad lowpass_section(double cutoff_hz, double fs_hz, double q) {
    const double w0 = 2.0 * kPi * cutoff_hz / fs_hz;
    const double cw = std::cos(w0);
    const double sw = std::sin(w0);
    const double alpha = sw / (2.0 * q);
    const double a0 = 1.0 + alpha;
    Biquad s;
    s.b0 = (1.0 - cw) / 2.0 / a0;
    s.b1 = (1.0 - cw) / a0;
    s.b2 = (1.0 - cw) / 2.0 / a0;
    s.a1 = -2.0 * cw / a0;
    s.a2 = (1.0 - alpha) / a0;
    return s;
}

void run_cascade(const std::vector<Biquad>& cascade, std::vector<double>& x) {
    for (const Biquad& s : cascade) {
        double z1 = 0.0, z2 = 0.0;  // transposed direct form II
        for (double& v : x) {
            const double in = v;
            const double out = s.b0 * in + z1;
            z1 = s.b1 * in - s.a1 * out + z2;
            z2 = s.b2 * in - s.a2 * out;
            v = out;
        }
    }
}

}  // namespace

std::vector<Biquad> butterworth_lowpass(int order, double cutoff_hz, double fs_hz) {
    if (order < 2 || order % 2 != 0) throw std::invalid_argument("order must be even and >= 2");
    if (cutoff_hz <= 0.0 || cutoff_hz >= fs_hz / 2.0)
        throw std::invalid_argument("cutoff must lie inside (0, fs/2)");
    std::vector<Biquad> cascade;
    cascade.reserve(static_cast<std::size_t>(order) / 2);
    for (int k = 0; k < order / 2; ++k) {
        const double theta = kPi * (2.0 * k + 1.0) / (2.0 * order);
        const double q = 1.0 / (2.0 * std::sin(theta));
        cascade.push_back(lowpass_section(cutoff_hz, fs_hz, q));
    }
    return cascade;
}

Biquad notch(double f0_hz, double q, double fs_hz) {
    if (f0_hz <= 0.0 || f0_hz >= fs_hz / 2.0)
        throw std::invalid_argument("notch frequency must lie inside (0, fs/2)");
    const double w0 = 2.0 * kPi * f0_hz / fs_hz;
    const double cw = std::cos(w0);
    const double alpha = std::sin(w0) / (2.0 * q);
    const double a0 = 1.0 + alpha;
    Biquad s;
    s.b0 = 1.0 / a0;
    s.b1 = -2.0 * cw / a0;
    s.b2 = 1.0 / a0;
    s.a1 = -2.0 * cw / a0;
    s.a2 = (1.0 - alpha) / a0;
    return s;
}

std::vector<double> filter_forward(const std::vector<Biquad>& cascade,
                                   const std::vector<double>& x) {
    std::vector<double> y = x;
    run_cascade(cascade, y);
    return y;
}

std::vector<double> filtfilt(const std::vector<Biquad>& cascade,
                             const std::vector<double>& x,
                             std::size_t pad) {
    const std::size_t n = x.size();
    if (n == 0) return {};
    pad = std::min(pad, n - 1);

    std::vector<double> ext;
    ext.reserve(n + 2 * pad);
    // odd reflection about the first/last samples
    for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
    ext.insert(ext.end(), x.begin(), x.end());
    for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 1 - i]);

    run_cascade(cascade, ext);
    std::reverse(ext.begin(), ext.end());
    run_cascade(cascade, ext);
    std::reverse(ext.begin(), ext.end());

    return std::vector<double>(ext.begin() + static_cast<std::ptrdiff_t>(pad),
                               ext.begin() + static_cast<std::ptrdiff_t>(pad + n));
}

std::vector<double> moving_median(const std::vector<double>& x, std::size_t width) {
    const std::size_t n = x.size();
    if (n == 0) return {};
    if (width < 2) return x;
    if (width % 2 == 0) ++width;
    const std::size_t half = width / 2;

    // sorted window maintained by insertion; window widths here are small
    std::vector<double> win;
    win.reserve(width);
    std::vector<double> out(n);
    auto insert_sorted = [&win](double v) {
        win.insert(std::upper_bound(win.begin(), win.end(), v), v);
    };
    auto erase_sorted = [&win](double v) {
        win.erase(std::lower_bound(win.begin(), win.end(), v));
    };

    std::size_t lo = 0, hi = std::min(n, half + 1);  // window [lo, hi)
    for (std::size_t i = 0; i < hi; ++i) insert_sorted(x[i]);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t want_lo = i > half ? i - half : 0;
        const std::size_t want_hi = std::min(n, i + half + 1);
        while (lo < want_lo) erase_sorted(x[lo++]);
        while (hi < want_hi) insert_sorted(x[hi++]);
        const std::size_t m = win.size();
        out[i] = (m % 2 == 1) ? win[m / 2] : 0.5 * (win[m / 2 - 1] + win[m / 2]);
    }
    return out;
}

std::vector<double> moving_max(const std::vector<double>& x, std::size_t width) {
    const std::size_t n = x.size();
    if (n == 0) return {};
    if (width < 2) return x;
    if (width % 2 == 0) ++width;
    const std::size_t half = width / 2;

    std::deque<std::size_t> dq;  // indices with decreasing values
    std::vector<double> out(n);
    std::size_t hi = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t want_lo = i > half ? i - half : 0;
        const std::size_t want_hi = std::min(n, i + half + 1);
        while (hi < want_hi) {
            while (!dq.empty() && x[dq.back()] <= x[hi]) dq.pop_back();
            dq.push_back(hi++);
        }
        while (dq.front() < want_lo) dq.pop_front();
        out[i] = x[dq.front()];
    }
    return out;
}

}  // namespace vfloc
