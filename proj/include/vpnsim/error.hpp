#pragma once

#include <stdexcept>
#include <string>

namespace vpnsim {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

class UnknownNode : public Error {
public:
    using Error::Error;
};

class UnknownLink : public Error {
public:
    using Error::Error;
};

class ConnectivityUnattainable : public Error {
public:
    using Error::Error;
};

class ScenarioError : public Error {
public:
    using Error::Error;
};

}  // namespace vpnsim
