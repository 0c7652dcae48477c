#ifndef MTDS_KERNELS_HPP
#define MTDS_KERNELS_HPP

#include <complex>
#include <cstddef>

namespace mtds::kern {

// One batch of power-sum terms:
//   sum_j w_j * exp(-(sa * log_a[j] + sb * log_b[j]))
// log_b may be null (single-power form, sb ignored). Weights are optional:
// w_re == nullptr means w_j = 1; w_im == nullptr with w_re set means real
// weights. This is the hot inner loop of every series evaluator (Hurwitz
// main sums, Mordell-Tornheim inner sums, divisor-convolution box sums).
struct Terms {
    const double* log_a = nullptr;
    const double* log_b = nullptr;
    const double* w_re = nullptr;
    const double* w_im = nullptr;
    std::size_t n = 0;
};

std::complex<double> pow_sum(std::complex<double> sa, std::complex<double> sb, const Terms& t);

// Name of the kernel currently dispatched ("scalar", "avx2").
const char* active_kernel();

// Force a kernel by name ("scalar", "avx2", "auto"). Returns false if the
// requested kernel is unavailable on this machine. Also settable through
// the MTDS_KERNEL environment variable before first use.
bool force_kernel(const char* name);

} // namespace mtds::kern

#endif
