#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "vfloc/filters.hpp"
#include "vfloc/signal.hpp"

using namespace vfloc;

namespace {

std::vector<double> tone(double f, double fs, std::size_t n, double amp = 1.0) {
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i)
        x[i] = amp * std::sin(2.0 * std::numbers::pi * f * static_cast<double>(i) / fs);
    return x;
}

}  // namespace

TEST_CASE("lowpass passes the passband and kills the stopband") {
    const double fs = 12500.0;
    const auto lp = butterworth_lowpass(4, 500.0, fs);
    const std::size_t n = 25000;

    auto pass = filtfilt(lp, tone(50.0, fs, n), 1000);
    auto stop = filtfilt(lp, tone(3000.0, fs, n), 1000);
    const std::vector<double> mid_pass(pass.begin() + 2000, pass.end() - 2000);
    const std::vector<double> mid_stop(stop.begin() + 2000, stop.end() - 2000);
    CHECK(rms(mid_pass) == doctest::Approx(1.0 / std::numbers::sqrt2).epsilon(0.01));
    CHECK(rms(mid_stop) < 1e-4);
}

TEST_CASE("filtfilt has no phase shift") {
    const double fs = 1000.0;
    const auto lp = butterworth_lowpass(4, 100.0, fs);
    const std::size_t n = 4000;
    const auto x = tone(10.0, fs, n);
    const auto y = filtfilt(lp, x, 500);
    // same zero crossings: correlate against the input
    double dot = 0.0, xx = 0.0, yy = 0.0;
    for (std::size_t i = 500; i < n - 500; ++i) {
        dot += x[i] * y[i];
        xx += x[i] * x[i];
        yy += y[i] * y[i];
    }
    CHECK(dot / std::sqrt(xx * yy) > 0.9999);
}

TEST_CASE("notch removes its line only") {
    const double fs = 12500.0;
    const Biquad bs = notch(100.0, 50.0, fs);
    const std::size_t n = 50000;
    auto at_notch = tone(100.0, fs, n);
    auto keep = tone(108.8, fs, n);
    auto cut = filtfilt({bs}, at_notch, 6000);
    auto kept = filtfilt({bs}, keep, 6000);
    const std::vector<double> mid_cut(cut.begin() + 10000, cut.end() - 10000);
    const std::vector<double> mid_kept(kept.begin() + 10000, kept.end() - 10000);
    CHECK(rms(mid_cut) < 0.02);
    CHECK(rms(mid_kept) > 0.65);
}

TEST_CASE("moving median follows steps and ignores spikes") {
    std::vector<double> x(100, 0.0);
    for (std::size_t i = 50; i < 100; ++i) x[i] = 4.0;
    x[20] = 100.0;  // spike
    const auto m = moving_median(x, 9);
    CHECK(m[20] == 0.0);
    CHECK(m[10] == 0.0);
    CHECK(m[80] == 4.0);
    // step is preserved within half a window
    CHECK(m[47] == 0.0);
    CHECK(m[53] == 4.0);
}

TEST_CASE("moving max is an upper envelope") {
    std::mt19937 rng(1);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    std::vector<double> x(500);
    for (auto& v : x) v = dist(rng);
    const auto m = moving_max(x, 11);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(m[i] >= x[i]);
    CHECK(m[250] == *std::max_element(x.begin() + 245, x.begin() + 256));
}
