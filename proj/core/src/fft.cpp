#include "cshe/fft.hpp"

#include <mutex>
#include <stdexcept>

#include <fftw3.h>

namespace cshe {
namespace fft {

namespace {
std::mutex plan_mutex; // FFTW planning is not thread safe
}

Eigen::VectorXcd transform(const Eigen::VectorXcd& x, int sign) {
    if (x.size() == 0) throw std::invalid_argument("fft: empty input");
    const int n = static_cast<int>(x.size());
    Eigen::VectorXcd out(n);
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(plan_mutex);
        plan = fftw_plan_dft_1d(
            n,
            reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(x.data())),
            reinterpret_cast<fftw_complex*>(out.data()),
            sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_PRESERVE_INPUT);
    }
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(plan_mutex);
        fftw_destroy_plan(plan);
    }
    return out;
}

} // namespace fft
} // namespace cshe
