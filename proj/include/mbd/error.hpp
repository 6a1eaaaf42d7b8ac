#ifndef MBD_ERROR_HPP
#define MBD_ERROR_HPP

#include <stdexcept>
#include <string>

namespace mbd {

// Input could not be decoded (bad syntax, bad field value).
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Input decoded fine but violates a documented precondition or invariant.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace mbd

#endif
