#pragma once

// Shared numeric plumbing: deterministic summation, stable gamma-ratio
// products, a portable seeded Gaussian stream, and report formatting helpers.

#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace bergmanlab {

inline constexpr double pi = 3.141592653589793238462643383279502884;

using cplx = std::complex<double>;

// Raised when a quadrature or solver cannot meet its accuracy contract.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

struct ConfigError : std::invalid_argument {
    explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

// Pairwise reduction: a fixed summation tree, so results do not depend on
// accumulation order elsewhere and reports stay bit-reproducible.
inline double pairwise_sum(std::span<const double> v) {
    if (v.size() <= 8) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }
    const std::size_t half = v.size() / 2;
    return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

inline double pairwise_sum(const std::vector<double>& v) {
    return pairwise_sum(std::span<const double>(v.data(), v.size()));
}

// Neumaier compensation for running accumulations whose length is not known
// up front.
struct CompensatedSum {
    double s = 0.0, c = 0.0;
    void add(double x) {
        const double t = s + x;
        if (std::abs(s) >= std::abs(x))
            c += (s - t) + x;
        else
            c += (x - t) + s;
        s = t;
    }
    double value() const { return s + c; }
};

// Gamma(k + a) / Gamma(k + b) type ratios accumulate to ~1e-15 relative error
// per factor; the running product avoids lgamma cancellation entirely.
// monomial_norm_sq in disk_core is the main client.
inline double ratio_product(int k, double num_shift, double den_shift) {
    double r = 1.0;
    for (int j = 1; j <= k; ++j) r *= (j + num_shift) / (j + den_shift);
    return r;
}

// FNV-1a, used to stamp reports with a hash of their canonical config string.
inline std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// Shortest round-trip formatting is locale/implementation dependent; %.17g is
// not, so every serialized double goes through here.
inline std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

// Box-Muller over mt19937_64. std::normal_distribution's stream is
// implementation-defined, which would break seeded reproducibility.
class GaussianStream {
  public:
    explicit GaussianStream(std::uint64_t seed) : eng_(seed) {}

    double operator()() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = unit_open();
        double u2 = unit_open();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * pi * u2);
        have_spare_ = true;
        return r * std::cos(2.0 * pi * u2);
    }

    // Uniform in (0,1); never returns 0.
    double unit_open() {
        const double x = (eng_() >> 11) * 0x1.0p-53;
        return x > 0.0 ? x : 0x1.0p-53;
    }

  private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

inline bool finite(const cplx& z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

}  // namespace bergmanlab
