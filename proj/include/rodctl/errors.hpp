#pragma once

#include <stdexcept>
#include <string>

namespace rodctl {

enum class ErrorKind {
    data,             // non-finite samples, malformed inputs
    domain,           // argument outside the admissible set
    range,            // evaluation or window outside an interval
    controllability,  // horizon below the critical time
    unsupported,      // cases the solver does not handle (N < 2)
    assembly,         // row or count mismatch while building systems
    invariant,        // post-condition violated
    numeric,          // singular or inconsistent linear algebra
    input             // missing or corrupt artifacts
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

[[nodiscard]] inline const char* to_string(ErrorKind k) {
    switch (k) {
        case ErrorKind::data: return "data";
        case ErrorKind::domain: return "domain";
        case ErrorKind::range: return "range";
        case ErrorKind::controllability: return "controllability";
        case ErrorKind::unsupported: return "unsupported";
        case ErrorKind::assembly: return "assembly";
        case ErrorKind::invariant: return "invariant";
        case ErrorKind::numeric: return "numeric";
        case ErrorKind::input: return "input";
    }
    return "unknown";
}

}  // namespace rodctl
