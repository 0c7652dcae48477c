#include "mtds/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

#include "kernels_impl.hpp"

namespace mtds::kern {

namespace {

enum class Impl { scalar, avx2 };

bool avx2_usable() {
#if defined(MTDS_X86)
#if defined(__GNUC__) || defined(__clang__)
    return avx2_compiled_in() && __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
#else
    return false;
#endif
}

Impl pick_default() {
    if (const char* env = std::getenv("MTDS_KERNEL")) {
        if (std::strcmp(env, "scalar") == 0) return Impl::scalar;
        if (std::strcmp(env, "avx2") == 0 && avx2_usable()) return Impl::avx2;
        // "auto" or unrecognized falls through
    }
    return avx2_usable() ? Impl::avx2 : Impl::scalar;
}

std::atomic<Impl>& current() {
    static std::atomic<Impl> impl{pick_default()};
    return impl;
}

} // namespace

std::complex<double> pow_sum(std::complex<double> sa, std::complex<double> sb, const Terms& t) {
    double out[2] = {0.0, 0.0};
    switch (current().load(std::memory_order_relaxed)) {
#if defined(MTDS_X86)
        case Impl::avx2:
            pow_sum_avx2(sa, sb, t, out);
            break;
#endif
        default:
            pow_sum_scalar(sa, sb, t, out);
            break;
    }
    return {out[0], out[1]};
}

const char* active_kernel() {
    return current().load(std::memory_order_relaxed) == Impl::avx2 ? "avx2" : "scalar";
}

bool force_kernel(const char* name) {
    if (std::strcmp(name, "scalar") == 0) {
        current().store(Impl::scalar);
        return true;
    }
    if (std::strcmp(name, "avx2") == 0) {
        if (!avx2_usable()) return false;
        current().store(Impl::avx2);
        return true;
    }
    if (std::strcmp(name, "auto") == 0) {
        current().store(avx2_usable() ? Impl::avx2 : Impl::scalar);
        return true;
    }
    return false;
}

} // namespace mtds::kern
