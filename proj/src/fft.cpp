#include "vfloc/fft.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace vfloc {

namespace {

constexpr double kPi = std::numbers::pi;

// Twiddle tables per FFT size; sizes repeat heavily across the pipeline.
const std::vector<cplx>& twiddles(std::size_t n) {
    static std::map<std::size_t, std::unique_ptr<std::vector<cplx>>> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto& entry = cache[n];
    if (!entry) {
        entry = std::make_unique<std::vector<cplx>>(n / 2);
        for (std::size_t k = 0; k < n / 2; ++k) {
            const double ang = -2.0 * kPi * static_cast<double>(k) / static_cast<double>(n);
            (*entry)[k] = cplx(std::cos(ang), std::sin(ang));
        }
    }
    return *entry;
}

struct BluesteinPlan {
    std::size_t n = 0;
    std::size_t m = 0;                // convolution FFT size
    std::vector<cplx> chirp;          // exp(-i*pi*k^2/n)
    std::vector<cplx> chirp_fft;      // FFT of the chirp kernel
};

const BluesteinPlan& bluestein_plan(std::size_t n) {
    static std::map<std::size_t, std::unique_ptr<BluesteinPlan>> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto& entry = cache[n];
    if (!entry) {
        auto plan = std::make_unique<BluesteinPlan>();
        plan->n = n;
        plan->m = next_pow2(2 * n - 1);
        plan->chirp.resize(n);
        for (std::size_t k = 0; k < n; ++k) {
            // k^2 mod 2n keeps the angle argument small and exact.
            const unsigned long long kk = static_cast<unsigned long long>(k) * k % (2 * n);
            const double ang = -kPi * static_cast<double>(kk) / static_cast<double>(n);
            plan->chirp[k] = cplx(std::cos(ang), std::sin(ang));
        }
        std::vector<cplx> kernel(plan->m, cplx(0.0, 0.0));
        kernel[0] = std::conj(plan->chirp[0]);
        for (std::size_t k = 1; k < n; ++k) {
            kernel[k] = std::conj(plan->chirp[k]);
            kernel[plan->m - k] = std::conj(plan->chirp[k]);
        }
        fft_pow2(kernel, false);
        plan->chirp_fft = std::move(kernel);
        entry = std::move(plan);
    }
    return *entry;
}

std::vector<cplx> bluestein(const std::vector<cplx>& input) {
    const std::size_t n = input.size();
    const BluesteinPlan& plan = bluestein_plan(n);
    std::vector<cplx> a(plan.m, cplx(0.0, 0.0));
    for (std::size_t k = 0; k < n; ++k) a[k] = input[k] * plan.chirp[k];
    fft_pow2(a, false);
    for (std::size_t k = 0; k < plan.m; ++k) a[k] *= plan.chirp_fft[k];
    fft_pow2(a, true);
    std::vector<cplx> out(n);
    for (std::size_t k = 0; k < n; ++k) out[k] = a[k] * plan.chirp[k];
    return out;
}

}  // namespace

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

void fft_pow2(std::vector<cplx>& data, bool inverse) {
    const std::size_t n = data.size();
    if (n == 0) return;
    if ((n & (n - 1)) != 0) throw std::invalid_argument("fft_pow2 requires power-of-two size");
    if (n == 1) return;

    // bit-reversal permutation
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(data[i], data[j]);
    }

    const std::vector<cplx>& tw = twiddles(n);
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t step = n / len;
        for (std::size_t i = 0; i < n; i += len) {
            for (std::size_t k = 0; k < len / 2; ++k) {
                cplx w = tw[k * step];
                if (inverse) w = std::conj(w);
                const cplx u = data[i + k];
                const cplx v = data[i + k + len / 2] * w;
                data[i + k] = u + v;
                data[i + k + len / 2] = u - v;
            }
        }
    }

    if (inverse) {
        const double scale = 1.0 / static_cast<double>(n);
        for (auto& x : data) x *= scale;
    }
}

std::vector<cplx> dft(const std::vector<cplx>& input, bool inverse) {
    const std::size_t n = input.size();
    if (n == 0) return {};
    if ((n & (n - 1)) == 0) {
        std::vector<cplx> out = input;
        fft_pow2(out, inverse);
        return out;
    }
    if (!inverse) return bluestein(input);
    // inverse via conjugation: idft(x) = conj(dft(conj(x)))/n
    std::vector<cplx> tmp(n);
    for (std::size_t k = 0; k < n; ++k) tmp[k] = std::conj(input[k]);
    std::vector<cplx> out = bluestein(tmp);
    const double scale = 1.0 / static_cast<double>(n);
    for (auto& x : out) x = std::conj(x) * scale;
    return out;
}

std::vector<cplx> dft_real(const std::vector<double>& input) {
    std::vector<cplx> tmp(input.size());
    for (std::size_t i = 0; i < input.size(); ++i) tmp[i] = cplx(input[i], 0.0);
    return dft(tmp, false);
}

std::vector<cplx> dft_naive(const std::vector<cplx>& input, bool inverse) {
    const std::size_t n = input.size();
    std::vector<cplx> out(n, cplx(0.0, 0.0));
    const double sign = inverse ? 1.0 : -1.0;
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t j = 0; j < n; ++j) {
            const double ang =
                sign * 2.0 * kPi * static_cast<double>(k * j % n) / static_cast<double>(n);
            out[k] += input[j] * cplx(std::cos(ang), std::sin(ang));
        }
        if (inverse) out[k] /= static_cast<double>(n);
    }
    return out;
}

}  // namespace vfloc
