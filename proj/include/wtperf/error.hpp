#pragma once

#include <stdexcept>
#include <string>

namespace wtperf {

/// Raised for every contract violation in the library: malformed input,
/// degenerate data, numerical failure. The message carries the diagnostic.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace wtperf
