#pragma once

#include <stdexcept>
#include <string>

namespace waynav {

// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IndexError : public Error { public: using Error::Error; };
class RangeError : public Error { public: using Error::Error; };
class ConfigError : public Error { public: using Error::Error; };
class ValidationError : public Error { public: using Error::Error; };
class PoseError : public Error { public: using Error::Error; };
class StateError : public Error { public: using Error::Error; };
class ParseError : public Error { public: using Error::Error; };
class BackendError : public Error { public: using Error::Error; };
class LoadError : public Error { public: using Error::Error; };

}  // namespace waynav
