#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace biomark {

// Base error carrying a short machine-parsable code alongside the human
// message. Subclasses map to CLI exit codes: ConfigError -> 1,
// DataError -> 2, AlgorithmError -> 3.
class Error : public std::runtime_error {
  public:
    Error(std::string code, const std::string& what)
        : std::runtime_error(what), code_(std::move(code)) {}
    const std::string& code() const noexcept { return code_; }

  private:
    std::string code_;
};

class ConfigError : public Error {
  public:
    ConfigError(std::string code, const std::string& what) : Error(std::move(code), what) {}
};

class DataError : public Error {
  public:
    DataError(std::string code, const std::string& what) : Error(std::move(code), what) {}
};

class AlgorithmError : public Error {
  public:
    AlgorithmError(std::string code, const std::string& what) : Error(std::move(code), what) {}
};

}  // namespace biomark
