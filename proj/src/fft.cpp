#include "fft.hpp"

#include <algorithm>
#include <mutex>
#include <new>

namespace crplus::detail {

namespace {
// FFTW planning is not thread-safe; execution is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace

RealFft::RealFft(std::size_t n) : n_(n) {
    real_ = fftw_alloc_real(n_);
    spectrum_ = fftw_alloc_complex(n_ / 2 + 1);
    if (!real_ || !spectrum_) {
        fftw_free(real_);
        fftw_free(spectrum_);
        throw std::bad_alloc();
    }
    std::lock_guard lock(planner_mutex());
    const int len = static_cast<int>(n_);
    forward_plan_ = fftw_plan_dft_r2c_1d(len, real_, spectrum_, FFTW_ESTIMATE);
    inverse_plan_ = fftw_plan_dft_c2r_1d(len, spectrum_, real_, FFTW_ESTIMATE);
}

RealFft::~RealFft() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(forward_plan_);
    fftw_destroy_plan(inverse_plan_);
    fftw_free(real_);
    fftw_free(spectrum_);
}

std::vector<std::complex<double>> RealFft::forward(std::span<const double> input) {
    const std::size_t m = std::min(input.size(), n_);
    std::copy_n(input.begin(), m, real_);
    std::fill(real_ + m, real_ + n_, 0.0);
    fftw_execute(forward_plan_);
    std::vector<std::complex<double>> out(spectrum_size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = {spectrum_[k][0], spectrum_[k][1]};
    return out;
}

std::vector<double> RealFft::inverse(std::span<const std::complex<double>> spectrum) {
    for (std::size_t k = 0; k < spectrum_size(); ++k) {
        spectrum_[k][0] = spectrum[k].real();
        spectrum_[k][1] = spectrum[k].imag();
    }
    fftw_execute(inverse_plan_);
    return std::vector<double>(real_, real_ + n_);
}

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::size_t next_power_of_two(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

}  // namespace crplus::detail
