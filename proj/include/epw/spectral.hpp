#pragma once

// Fourier operators on the periodic grid x_j = -L + 2 L j / n, backed by FFTW.

#include <algorithm>
#include <complex>
#include <mutex>
#include <numbers>
#include <vector>

#include <fftw3.h>

#include "epw/error.hpp"

namespace epw {

class Spectral {
public:
    using cplx = std::complex<double>;

    Spectral(int n, double L) : n_(n), L_(L), real_(n), spec_(n / 2 + 1) {
        if (n < 8 || (n & (n - 1)) != 0) throw DomainError("Spectral: n must be a power of two >= 8");
        if (!(L > 0.0)) throw DomainError("Spectral: L must be positive");
        {
            // FFTW planning is not thread-safe.
            std::lock_guard<std::mutex> lock(plan_mutex());
            fwd_ = fftw_plan_dft_r2c_1d(n, real_.data(), reinterpret_cast<fftw_complex*>(spec_.data()), FFTW_ESTIMATE);
            bwd_ = fftw_plan_dft_c2r_1d(n, reinterpret_cast<fftw_complex*>(spec_.data()), real_.data(), FFTW_ESTIMATE);
        }
        k_.resize(n / 2 + 1);
        for (int j = 0; j <= n / 2; ++j) k_[j] = std::numbers::pi * j / L;
        cutoff_ = n / 3;
    }
    ~Spectral() {
        std::lock_guard<std::mutex> lock(plan_mutex());
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
    }
    Spectral(const Spectral&) = delete;
    Spectral& operator=(const Spectral&) = delete;

    [[nodiscard]] int size() const { return n_; }
    [[nodiscard]] double length() const { return L_; }
    [[nodiscard]] double dx() const { return 2.0 * L_ / n_; }
    [[nodiscard]] const std::vector<double>& wavenumbers() const { return k_; }

    [[nodiscard]] std::vector<double> grid() const {
        std::vector<double> x(n_);
        for (int j = 0; j < n_; ++j) x[j] = -L_ + dx() * j;
        return x;
    }

    std::vector<cplx> forward(const std::vector<double>& f) {
        std::copy(f.begin(), f.end(), real_.begin());
        fftw_execute(fwd_);
        return spec_;
    }

    std::vector<double> backward(const std::vector<cplx>& fh) {
        std::copy(fh.begin(), fh.end(), spec_.begin());
        fftw_execute(bwd_);
        std::vector<double> out(real_);
        for (double& v : out) v /= n_;
        return out;
    }

    /// d^order f / dx^order; the Nyquist mode is dropped for odd orders.
    std::vector<double> derivative(const std::vector<double>& f, int order = 1) {
        auto fh = forward(f);
        for (std::size_t j = 0; j < fh.size(); ++j) {
            cplx m = 1.0;
            for (int o = 0; o < order; ++o) m *= cplx(0.0, k_[j]);
            fh[j] *= m;
        }
        if (order % 2 == 1) fh.back() = 0.0;
        return backward(fh);
    }

    /// 2/3-rule low-pass: modes above n/3 are zeroed.
    std::vector<double> filter(const std::vector<double>& f) {
        auto fh = forward(f);
        for (std::size_t j = cutoff_ + 1; j < fh.size(); ++j) fh[j] = 0.0;
        return backward(fh);
    }

    /// Solves (-d_xx + m) u = f for a constant m > 0.
    std::vector<double> helmholtz_solve(const std::vector<double>& f, double m) {
        auto fh = forward(f);
        for (std::size_t j = 0; j < fh.size(); ++j) fh[j] /= (k_[j] * k_[j] + m);
        return backward(fh);
    }

    /// -d_xx f.
    std::vector<double> neg_laplacian(const std::vector<double>& f) {
        auto fh = forward(f);
        for (std::size_t j = 0; j < fh.size(); ++j) fh[j] *= k_[j] * k_[j];
        return backward(fh);
    }

    /// Fraction of spectral energy of f in the upper half of the retained band (n/6, n/3].
    double tail_fraction(const std::vector<double>& f) {
        const auto fh = forward(f);
        double total = 0.0, tail = 0.0;
        for (std::size_t j = 1; j <= cutoff_; ++j) {
            const double e = std::norm(fh[j]);
            total += e;
            if (j > cutoff_ / 2) tail += e;
        }
        return total > 0.0 ? tail / total : 0.0;
    }

private:
    static std::mutex& plan_mutex() {
        static std::mutex m;
        return m;
    }

    int n_;
    double L_;
    std::vector<double> real_;
    std::vector<cplx> spec_;
    std::vector<double> k_;
    std::size_t cutoff_ = 0;
    fftw_plan fwd_ = nullptr;
    fftw_plan bwd_ = nullptr;
};

}  // namespace epw
