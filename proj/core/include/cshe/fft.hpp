#ifndef CSHE_FFT_HPP
#define CSHE_FFT_HPP

#include <complex>

#include <Eigen/Dense>

namespace cshe {
namespace fft {

// Unnormalized DFT, sign -1: X_k = sum_n x_n e^{-2*pi*i*k*n/N};
// sign +1 is the unnormalized inverse. FFTW behind a planning lock.
Eigen::VectorXcd transform(const Eigen::VectorXcd& x, int sign);

} // namespace fft
} // namespace cshe

#endif
