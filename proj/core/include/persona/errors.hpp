#pragma once

#include <stdexcept>
#include <string>

namespace persona {

// Error taxonomy mirrors the CLI exit codes: config -> 2, data -> 3,
// provider -> 4. Structural errors flag bugs in upstream stages and are
// reported as data errors by the CLI.
class Error : public std::runtime_error {
public:
    enum class Kind { config, data, provider, structural };

    Error(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(Kind::config, what) {}
};

class DataError : public Error {
public:
    explicit DataError(const std::string& what) : Error(Kind::data, what) {}
};

class ProviderError : public Error {
public:
    explicit ProviderError(const std::string& what) : Error(Kind::provider, what) {}
};

class StructuralError : public Error {
public:
    explicit StructuralError(const std::string& what) : Error(Kind::structural, what) {}
};

} // namespace persona
