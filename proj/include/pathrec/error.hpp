#pragma once

#include <stdexcept>
#include <string>

namespace pathrec {

// Single exception type for library failures. Messages are kept single-line so
// the CLI can forward them verbatim as machine-readable errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace pathrec
