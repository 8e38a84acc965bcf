#pragma once

#include <complex>

namespace bspec::fft {

// In-place complex-to-complex DFT, unnormalized, dims[0] slowest.
// sign = -1 applies e^{-i2pi jk/n} (forward), sign = +1 the inverse kernel.
// Plans are cached per (dims, sign); safe to call from multiple threads.
void dft(int rank, const int* dims, std::complex<double>* data, int sign);

// Smallest 5-smooth integer >= n (sizes FFTW handles at full speed).
int next_fast_size(int n);

} // namespace bspec::fft
