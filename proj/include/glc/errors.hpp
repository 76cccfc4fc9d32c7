#pragma once

#include <stdexcept>
#include <string>

namespace glc {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A parameter, config value or input object violates its documented range.
struct ValidationError : Error {
    using Error::Error;
};

// A file exists but its contents do not match the expected schema.
struct ParseError : Error {
    using Error::Error;
};

// Missing file, unreadable file, failed write.
struct IoError : Error {
    using Error::Error;
};

}  // namespace glc
