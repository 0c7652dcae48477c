#include <cmath>

#include "kernels_impl.hpp"

namespace mtds::kern {

// Reference kernel. The SIMD variants are equivalence-tested against this.
void pow_sum_scalar(std::complex<double> sa, std::complex<double> sb, const Terms& t,
                    double out[2]) {
    const double sar = sa.real(), sai = sa.imag();
    const double sbr = sb.real(), sbi = sb.imag();
    double acc_re = 0.0, acc_im = 0.0;
    for (std::size_t j = 0; j < t.n; ++j) {
        const double la = t.log_a[j];
        double u = sar * la;
        double v = sai * la;
        if (t.log_b) {
            const double lb = t.log_b[j];
            u += sbr * lb;
            v += sbi * lb;
        }
        const double amp = std::exp(-u);
        // exp(-u - i v) = amp * (cos v - i sin v)
        double tre = amp * std::cos(v);
        double tim = -amp * std::sin(v);
        if (t.w_re) {
            const double wr = t.w_re[j];
            if (t.w_im) {
                const double wi = t.w_im[j];
                const double re = tre * wr - tim * wi;
                const double im = tre * wi + tim * wr;
                tre = re;
                tim = im;
            } else {
                tre *= wr;
                tim *= wr;
            }
        }
        acc_re += tre;
        acc_im += tim;
    }
    out[0] += acc_re;
    out[1] += acc_im;
}

} // namespace mtds::kern
