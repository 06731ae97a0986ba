#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mindpres {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ProfileError : public Error { using Error::Error; };
class EmptyCorpus : public Error { using Error::Error; };
class InsufficientClasses : public Error { using Error::Error; };
class IntegrityError : public Error { using Error::Error; };
class ConfigError : public Error { using Error::Error; };
class VocabMismatch : public Error { using Error::Error; };
class EmptyDataset : public Error { using Error::Error; };
class EmptyInput : public Error { using Error::Error; };
class StreamOrderError : public Error { using Error::Error; };
class AuditError : public Error { using Error::Error; };
class ScenarioError : public Error { using Error::Error; };
class TransportError : public Error { using Error::Error; };

/// Model loading/validation failures. VersionError and CorruptModel refine it.
class ModelError : public Error { using Error::Error; };
class VersionError : public ModelError { using ModelError::ModelError; };
class CorruptModel : public ModelError { using ModelError::ModelError; };

/// Malformed line in a line-oriented file; `line()` is 1-based.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace mindpres
