#pragma once

#include <stdexcept>
#include <string>

namespace promptloop {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid or unusable run configuration (bad file, unknown key, bad value).
class ConfigError : public Error {
    using Error::Error;
};

/// Role template could not be loaded or rendered (missing placeholder, bad header).
class TemplateError : public Error {
    using Error::Error;
};

/// Requested task kind is not one of the supported benchmarks.
class UnsupportedTaskError : public Error {
    using Error::Error;
};

/// Scripted backend asked for a response that was never scripted or is exhausted.
/// This indicates a test bug, not a runtime condition.
class ScriptError : public Error {
    using Error::Error;
};

/// Transport-level failure after exhausting the retry policy.
class BackendUnavailableError : public Error {
    using Error::Error;
};

/// Backend answered but the response body is not the expected wire shape.
class ProtocolError : public Error {
    using Error::Error;
};

/// Dataset file missing, unreadable, or a record is malformed.
class DatasetError : public Error {
    using Error::Error;
};

/// A loaded split does not match its declared size.
class SplitIntegrityError : public Error {
    using Error::Error;
};

/// answers_equal or compare_methods called on incomparable operands.
class ComparisonError : public Error {
    using Error::Error;
};

/// LLM judge produced output with no parseable verdict token.
class JudgeError : public Error {
    using Error::Error;
};

/// Numeric domain violation (e.g. accuracy_ci with n = 0).
class DomainError : public Error {
    using Error::Error;
};

}  // namespace promptloop
