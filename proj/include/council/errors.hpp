#pragma once

#include <stdexcept>
#include <string>

namespace council {

// Fault taxonomy; the CLI maps kinds onto exit codes (config 2, provider 3,
// data 4).
enum class ErrorKind {
    Config,       // bad configuration, usage, schema violation
    Provider,     // transport failure after retries, endpoint unreachable
    Protocol,     // backend answered, payload malformed
    Parse,        // structured agent output could not be extracted
    Validation,   // coherence judging failed for an evaluator
    Degenerate,   // statistic undefined on this input
    Data,         // inconsistent or missing run data
    Io,           // filesystem faults
};

class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const { return kind_; }

  private:
    ErrorKind kind_;
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& m) : Error(ErrorKind::Config, m) {}
};
struct ProviderError : Error {
    explicit ProviderError(const std::string& m) : Error(ErrorKind::Provider, m) {}
};
struct ProtocolError : Error {
    explicit ProtocolError(const std::string& m) : Error(ErrorKind::Protocol, m) {}
};
struct ParseError : Error {
    explicit ParseError(const std::string& m) : Error(ErrorKind::Parse, m) {}
};
struct ValidationError : Error {
    explicit ValidationError(const std::string& m) : Error(ErrorKind::Validation, m) {}
};
struct DegenerateStatError : Error {
    explicit DegenerateStatError(const std::string& m) : Error(ErrorKind::Degenerate, m) {}
};
struct DataError : Error {
    explicit DataError(const std::string& m) : Error(ErrorKind::Data, m) {}
};
struct IoError : Error {
    explicit IoError(const std::string& m) : Error(ErrorKind::Io, m) {}
};

} // namespace council
