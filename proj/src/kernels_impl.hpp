#ifndef MTDS_KERNELS_IMPL_HPP
#define MTDS_KERNELS_IMPL_HPP

#include "mtds/kernels.hpp"

namespace mtds::kern {

// out[0] += sum re, out[1] += sum im
void pow_sum_scalar(std::complex<double> sa, std::complex<double> sb, const Terms& t,
                    double out[2]);

#if defined(__x86_64__) || defined(_M_X64) || defined(__i386__)
#define MTDS_X86 1
void pow_sum_avx2(std::complex<double> sa, std::complex<double> sb, const Terms& t,
                  double out[2]);
bool avx2_compiled_in();
#endif

} // namespace mtds::kern

#endif
