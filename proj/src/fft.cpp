#include "lungphase/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cstring>
#include <mutex>
#include <stdexcept>

namespace lungphase {

namespace {
// The FFTW planner is not re-entrant; plan execution is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}
} // namespace

struct RealFft::Impl {
    double* real = nullptr;
    fftw_complex* spectrum = nullptr;
    fftw_plan forward = nullptr;
    fftw_plan inverse = nullptr;

    explicit Impl(std::size_t n) {
        std::lock_guard lock(planner_mutex());
        real = fftw_alloc_real(n);
        spectrum = fftw_alloc_complex(n / 2 + 1);
        const int len = static_cast<int>(n);
        forward = fftw_plan_dft_r2c_1d(len, real, spectrum, FFTW_ESTIMATE);
        inverse = fftw_plan_dft_c2r_1d(len, spectrum, real, FFTW_ESTIMATE);
        if (!real || !spectrum || !forward || !inverse) {
            release();
            throw std::runtime_error("FFTW plan creation failed");
        }
    }

    ~Impl() {
        std::lock_guard lock(planner_mutex());
        release();
    }

    void release() {
        if (forward) fftw_destroy_plan(forward);
        if (inverse) fftw_destroy_plan(inverse);
        if (real) fftw_free(real);
        if (spectrum) fftw_free(spectrum);
        forward = inverse = nullptr;
        real = nullptr;
        spectrum = nullptr;
    }
};

RealFft::RealFft(std::size_t n) : n_(n) {
    if (n < 2) {
        throw std::invalid_argument("FFT length must be at least 2");
    }
    impl_ = std::make_unique<Impl>(n);
}

RealFft::~RealFft() = default;
RealFft::RealFft(RealFft&&) noexcept = default;
RealFft& RealFft::operator=(RealFft&&) noexcept = default;

void RealFft::forward(std::span<const double> in, std::span<std::complex<double>> out) {
    if (in.size() != n_ || out.size() != bins()) {
        throw std::invalid_argument("RealFft::forward size mismatch");
    }
    std::copy(in.begin(), in.end(), impl_->real);
    fftw_execute(impl_->forward);
    for (std::size_t k = 0; k < bins(); ++k) {
        out[k] = {impl_->spectrum[k][0], impl_->spectrum[k][1]};
    }
}

void RealFft::inverse(std::span<const std::complex<double>> in, std::span<double> out) {
    if (in.size() != bins() || out.size() != n_) {
        throw std::invalid_argument("RealFft::inverse size mismatch");
    }
    for (std::size_t k = 0; k < bins(); ++k) {
        impl_->spectrum[k][0] = in[k].real();
        impl_->spectrum[k][1] = in[k].imag();
    }
    fftw_execute(impl_->inverse);
    std::copy(impl_->real, impl_->real + n_, out.begin());
}

} // namespace lungphase
