#pragma once

#include <stdexcept>
#include <string>

namespace windregime {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A value or structure violates a documented invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// An index window or period falls outside its parent.
class RangeError : public Error {
public:
    using Error::Error;
};

/// A named channel or key is not present.
class LookupError : public Error {
public:
    using Error::Error;
};

/// On-disk data disagrees with its manifest.
class CorruptionError : public Error {
public:
    using Error::Error;
};

class VersionError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// A pipeline stage was run before the stage that produces its input.
class DependencyError : public Error {
public:
    using Error::Error;
};

} // namespace windregime
