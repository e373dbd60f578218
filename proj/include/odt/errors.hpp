#pragma once

#include <stdexcept>
#include <string>

namespace odt {

// Base class for everything this library throws.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed input files (CSV rows, split files, model containers).
struct ParseError : Error {
    using Error::Error;
};

// Semantically invalid data or configuration (unknown API, bad split sizes,
// dimension mismatches).
struct ValidationError : Error {
    using Error::Error;
};

// Training loss became non-finite.
struct DivergenceError : Error {
    using Error::Error;
};

} // namespace odt
