#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>

namespace lungphase {

// Real-input FFT of fixed length backed by FFTW. Each instance owns its
// buffers and plans, so separate instances may execute concurrently.
class RealFft {
public:
    explicit RealFft(std::size_t n);
    ~RealFft();
    RealFft(RealFft&&) noexcept;
    RealFft& operator=(RealFft&&) noexcept;
    RealFft(const RealFft&) = delete;
    RealFft& operator=(const RealFft&) = delete;

    std::size_t size() const noexcept { return n_; }
    std::size_t bins() const noexcept { return n_ / 2 + 1; }

    // out.size() == bins(); unnormalized X_k = sum x_n e^{-2 pi i k n / N}.
    void forward(std::span<const double> in, std::span<std::complex<double>> out);
    // out.size() == size(); unnormalized (result is N times the true inverse).
    void inverse(std::span<const std::complex<double>> in, std::span<double> out);

private:
    struct Impl;
    std::size_t n_;
    std::unique_ptr<Impl> impl_;
};

} // namespace lungphase
