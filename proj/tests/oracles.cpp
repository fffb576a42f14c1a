#include "oracles.hpp"

#include <cmath>
#include <numbers>

namespace oracle {

std::vector<double> dft_power(const std::vector<double>& x, const std::vector<double>& w) {
    const std::size_t n = x.size();
    std::vector<long double> c(n), s(n), xw(n);
    for (std::size_t i = 0; i < n; ++i) {
        const long double angle = 2.0L * std::numbers::pi_v<long double> * static_cast<long double>(i) / n;
        c[i] = std::cos(angle);
        s[i] = std::sin(angle);
        xw[i] = static_cast<long double>(x[i]) * w[i];
    }
    std::vector<double> power(n);
    for (std::size_t k = 0; k < n; ++k) {
        long double re = 0, im = 0;
        std::size_t idx = 0;
        for (std::size_t t = 0; t < n; ++t) {
            re += xw[t] * c[idx];
            im -= xw[t] * s[idx];
            idx += k;
            if (idx >= n) idx -= n;
        }
        power[k] = static_cast<double>(re * re + im * im);
    }
    return power;
}

namespace {

bool inside(const std::vector<std::pair<double, double>>& set, double t) {
    for (const auto& [lo, hi] : set) {
        if (t >= lo && t < hi) return true;
    }
    return false;
}

} // namespace

GridConfusion grid_confusion(const std::vector<std::pair<double, double>>& a,
                             const std::vector<std::pair<double, double>>& b, double domain, double step) {
    GridConfusion g;
    const auto cells = static_cast<long>(std::floor(domain / step));
    for (long i = 0; i < cells; ++i) {
        const double mid = (i + 0.5) * step;
        const bool in_a = inside(a, mid);
        const bool in_b = inside(b, mid);
        if (in_a && in_b) g.tp += step;
        else if (in_a) g.fp += step;
        else if (in_b) g.fn += step;
        else g.tn += step;
    }
    // Remainder cell shorter than `step` at the end of the domain.
    const double rest = domain - cells * step;
    if (rest > 0) {
        const double mid = cells * step + rest / 2;
        const bool in_a = inside(a, mid);
        const bool in_b = inside(b, mid);
        if (in_a && in_b) g.tp += rest;
        else if (in_a) g.fp += rest;
        else if (in_b) g.fn += rest;
        else g.tn += rest;
    }
    return g;
}

void put_le(std::vector<std::uint8_t>& out, std::uint64_t value, int n_bytes) {
    for (int i = 0; i < n_bytes; ++i) out.push_back(static_cast<std::uint8_t>((value >> (8 * i)) & 0xFF));
}

std::vector<std::uint8_t> wav_bytes(std::uint16_t format, std::uint16_t channels, std::uint32_t rate,
                                    std::uint16_t bits, const std::vector<std::uint8_t>& payload) {
    std::vector<std::uint8_t> out;
    auto tag = [&](const char* t) { out.insert(out.end(), t, t + 4); };
    tag("RIFF");
    put_le(out, 4 + 8 + 16 + 8 + payload.size() + (payload.size() & 1), 4);
    tag("WAVE");
    tag("fmt ");
    put_le(out, 16, 4);
    put_le(out, format, 2);
    put_le(out, channels, 2);
    put_le(out, rate, 4);
    put_le(out, static_cast<std::uint64_t>(rate) * channels * bits / 8, 4);
    put_le(out, channels * bits / 8, 2);
    put_le(out, bits, 2);
    tag("data");
    put_le(out, payload.size(), 4);
    out.insert(out.end(), payload.begin(), payload.end());
    if (payload.size() & 1) out.push_back(0);
    return out;
}

std::filesystem::path temp_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("lungphase_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace oracle
