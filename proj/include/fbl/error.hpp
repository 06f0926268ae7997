#pragma once

#include <stdexcept>
#include <string>

namespace fbl {

enum class ErrorKind {
    DegenerateGrid,
    Domain,
    DegenerateRescaling,
    Ellipticity,
    OutOfRange,
    NonInvertible,
    Convergence,
    Config,
    Io,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

inline void ensure(bool cond, ErrorKind kind, const std::string& msg) {
    if (!cond) throw Error(kind, msg);
}

}  // namespace fbl
