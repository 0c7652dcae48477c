#include "mtds/complexops.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace mtds {

std::string cplx_to_string(cplx z) {
    char buf[64];
    std::string out;
    std::snprintf(buf, sizeof buf, "%.17g", z.real());
    out = buf;
    std::snprintf(buf, sizeof buf, "%.17g", std::abs(z.imag()));
    out += (std::signbit(z.imag()) ? "-" : "+");
    out += buf;
    out += "i";
    return out;
}

cplx cplx_from_string(const std::string& s) {
    const char* p = s.c_str();
    while (*p == ' ') ++p;
    if (*p == '\0') fail(ErrKind::config, "empty complex literal");
    char* end = nullptr;
    double first = std::strtod(p, &end);
    if (end == p) {
        // forms like "i", "+i", "-i", "-0.5i" handled below; bare sign+i:
        if ((*p == 'i') || ((p[0] == '+' || p[0] == '-') && p[1] == 'i')) {
            double im = (*p == '-') ? -1.0 : 1.0;
            const char* q = (*p == 'i') ? p + 1 : p + 2;
            while (*q == ' ') ++q;
            if (*q != '\0') fail(ErrKind::config, "bad complex literal: " + s);
            return {0.0, im};
        }
        fail(ErrKind::config, "bad complex literal: " + s);
    }
    p = end;
    while (*p == ' ') ++p;
    if (*p == '\0') return {first, 0.0};
    if (*p == 'i') {
        ++p;
        while (*p == ' ') ++p;
        if (*p != '\0') fail(ErrKind::config, "bad complex literal: " + s);
        return {0.0, first};
    }
    if (*p != '+' && *p != '-') fail(ErrKind::config, "bad complex literal: " + s);
    double second;
    if ((p[0] == '+' || p[0] == '-') && p[1] == 'i' ) {
        second = (p[0] == '-') ? -1.0 : 1.0;
        p += 2;
    } else {
        end = nullptr;
        second = std::strtod(p, &end);
        if (end == p) fail(ErrKind::config, "bad complex literal: " + s);
        p = end;
        if (*p != 'i') fail(ErrKind::config, "bad complex literal (missing i): " + s);
        ++p;
    }
    while (*p == ' ') ++p;
    if (*p != '\0') fail(ErrKind::config, "bad complex literal: " + s);
    return {first, second};
}

} // namespace mtds
