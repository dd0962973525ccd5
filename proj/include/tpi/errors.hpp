#pragma once

#include <stdexcept>
#include <string>

namespace tpi {

// Exit-code contract: ConfigError -> 2, NumericalError -> 3, IoError -> 4.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

struct NumericalError : Error {
    explicit NumericalError(const std::string& msg) : Error(msg) {}
};

struct IoError : Error {
    explicit IoError(const std::string& msg) : Error(msg) {}
};

}  // namespace tpi
