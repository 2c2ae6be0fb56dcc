#pragma once

#include <fftw3.h>

#include <complex>
#include <cstring>
#include <vector>

namespace revar::detail {

// Thin RAII wrappers around FFTW plans. Plans are created with
// FFTW_ESTIMATE so results are reproducible run to run, and each wrapper
// owns its buffers so callers never deal with FFTW alignment rules.

class RealFft {
public:
    explicit RealFft(int n)
        : n_(n),
          in_(fftw_alloc_real(static_cast<std::size_t>(n))),
          out_(fftw_alloc_complex(static_cast<std::size_t>(n) / 2 + 1)) {
        fwd_ = fftw_plan_dft_r2c_1d(n, in_, out_, FFTW_ESTIMATE);
        inv_ = fftw_plan_dft_c2r_1d(n, out_, in_, FFTW_ESTIMATE);
    }
    ~RealFft() {
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(inv_);
        fftw_free(in_);
        fftw_free(out_);
    }
    RealFft(const RealFft&) = delete;
    RealFft& operator=(const RealFft&) = delete;

    int size() const { return n_; }
    int bins() const { return n_ / 2 + 1; }

    // out must hold n/2 + 1 complex values.
    void forward(const double* in, std::complex<double>* out) {
        std::memcpy(in_, in, sizeof(double) * static_cast<std::size_t>(n_));
        fftw_execute(fwd_);
        std::memcpy(out, out_, sizeof(fftw_complex) * static_cast<std::size_t>(bins()));
    }

    // Normalized inverse: forward -> inverse reproduces the input.
    void inverse(const std::complex<double>* in, double* out) {
        std::memcpy(out_, in, sizeof(fftw_complex) * static_cast<std::size_t>(bins()));
        fftw_execute(inv_);
        const double scale = 1.0 / n_;
        for (int i = 0; i < n_; ++i) out[i] = in_[i] * scale;
    }

private:
    int n_;
    double* in_;
    fftw_complex* out_;
    fftw_plan fwd_;
    fftw_plan inv_;
};

// 2-D complex backward transform (unnormalized, exp(+i...) kernel).
class ComplexIfft2d {
public:
    ComplexIfft2d(int rows, int cols)
        : rows_(rows), cols_(cols),
          buf_(fftw_alloc_complex(static_cast<std::size_t>(rows) * cols)) {
        plan_ = fftw_plan_dft_2d(rows, cols, buf_, buf_, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    ~ComplexIfft2d() {
        fftw_destroy_plan(plan_);
        fftw_free(buf_);
    }
    ComplexIfft2d(const ComplexIfft2d&) = delete;
    ComplexIfft2d& operator=(const ComplexIfft2d&) = delete;

    // In-place on the caller's buffer contents; writes the transform back.
    void execute(std::complex<double>* data) {
        const std::size_t n = static_cast<std::size_t>(rows_) * cols_;
        std::memcpy(buf_, data, sizeof(fftw_complex) * n);
        fftw_execute(plan_);
        std::memcpy(data, buf_, sizeof(fftw_complex) * n);
    }

private:
    int rows_;
    int cols_;
    fftw_complex* buf_;
    fftw_plan plan_;
};

}  // namespace revar::detail
