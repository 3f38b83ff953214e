#pragma once

#include <stdexcept>
#include <string>

namespace spherestat {

// Base class for every error raised by the library. Subclasses name the
// failure category so callers (and the CLI exit-code mapping) can dispatch.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class DomainError : public Error {
    using Error::Error;
};
class AddressingError : public Error {
    using Error::Error;
};
class GeometryError : public Error {
    using Error::Error;
};
class DegenerateRegionError : public GeometryError {
    using GeometryError::GeometryError;
};
class FormatError : public Error {
    using Error::Error;
};
class ParseError : public FormatError {
    using FormatError::FormatError;
};
class UnsupportedFormatError : public FormatError {
    using FormatError::FormatError;
};
class BoundsError : public Error {
    using Error::Error;
};
class SchemaError : public Error {
    using Error::Error;
};
class UniquenessError : public Error {
    using Error::Error;
};
class ParameterError : public Error {
    using Error::Error;
};
class StratificationError : public Error {
    using Error::Error;
};
class GapError : public Error {
    using Error::Error;
};
class IoError : public Error {
    using Error::Error;
};

} // namespace spherestat
