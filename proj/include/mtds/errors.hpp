#ifndef MTDS_ERRORS_HPP
#define MTDS_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace mtds {

// Failure taxonomy. "region" and "budget" are refusals (the input was legal
// but the evaluation declines to produce a value it cannot bound); the CLI
// maps them to exit code 2. Everything else is a hard error.
enum class ErrKind {
    pole,            // argument sits on (or within the guard band of) a pole
    region,          // outside a convergence/validity region
    budget,          // term or node budget exhausted before the bound met tol
    envelope,        // outside the validated accuracy envelope
    nonconvergence,  // refinement failed to stabilize
    hypothesis,      // an identity's stated hypotheses are violated
    invalid,         // malformed argument
    config           // bad run configuration (CLI exit 1)
};

class Error : public std::runtime_error {
public:
    Error(ErrKind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
    ErrKind kind;
};

[[noreturn]] inline void fail(ErrKind k, const std::string& msg) { throw Error(k, msg); }

inline bool is_refusal(const Error& e) {
    return e.kind == ErrKind::region || e.kind == ErrKind::budget;
}

} // namespace mtds

#endif
