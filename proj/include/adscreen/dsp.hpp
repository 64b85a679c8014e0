#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace adscreen::dsp {

size_t next_pow2(size_t n);

// In-place iterative radix-2 FFT; size must be a power of two.
void fft(std::vector<std::complex<double>>& a);

// |X[k]|^2 for k = 0..nfft/2 of the zero-padded frame.
std::vector<double> power_spectrum(const std::vector<double>& frame, size_t nfft);

std::vector<double> hamming(int n);
std::vector<double> hann(int n);

}  // namespace adscreen::dsp
