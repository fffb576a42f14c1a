#pragma once

// Independent reference implementations used only by tests. They share no
// code with the library beyond plain data types.

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

// |X_k|^2 for k in [0, N) of (x * w) by the direct O(N^2) sum in long double.
std::vector<double> dft_power(const std::vector<double>& x, const std::vector<double>& w);

// Confusion regions on a uniform grid: each cell of width `step` is
// classified by membership of its midpoint. Intervals are [start, end).
struct GridConfusion {
    double tp = 0, fp = 0, tn = 0, fn = 0;
};
GridConfusion grid_confusion(const std::vector<std::pair<double, double>>& a,
                             const std::vector<std::pair<double, double>>& b, double domain, double step);

// Little-endian RIFF/WAVE writer. `format` 1 = PCM, 3 = IEEE float; samples
// are already encoded frame-interleaved payload bytes.
std::vector<std::uint8_t> wav_bytes(std::uint16_t format, std::uint16_t channels, std::uint32_t rate,
                                    std::uint16_t bits, const std::vector<std::uint8_t>& payload);

void put_le(std::vector<std::uint8_t>& out, std::uint64_t value, int n_bytes);

// Fresh empty directory under the system temp dir.
std::filesystem::path temp_dir(const std::string& name);

} // namespace oracle
