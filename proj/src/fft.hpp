#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <fftw3.h>

namespace crplus::detail {

// Real-to-complex / complex-to-real transform pair of fixed length, backed by
// FFTW. forward: X_k = sum_n x_n e^{-2 pi i k n / N}, k = 0..N/2.
// inverse is unnormalized: x_n = sum_k X_k e^{+2 pi i k n / N}.
class RealFft {
public:
    explicit RealFft(std::size_t n);
    ~RealFft();
    RealFft(const RealFft&) = delete;
    RealFft& operator=(const RealFft&) = delete;

    std::size_t size() const { return n_; }
    std::size_t spectrum_size() const { return n_ / 2 + 1; }

    // `input` shorter than size() is zero-padded.
    std::vector<std::complex<double>> forward(std::span<const double> input);
    std::vector<double> inverse(std::span<const std::complex<double>> spectrum);

private:
    std::size_t n_;
    double* real_ = nullptr;
    fftw_complex* spectrum_ = nullptr;
    fftw_plan forward_plan_ = nullptr;
    fftw_plan inverse_plan_ = nullptr;
};

bool is_power_of_two(std::size_t n);
std::size_t next_power_of_two(std::size_t n);

}  // namespace crplus::detail
