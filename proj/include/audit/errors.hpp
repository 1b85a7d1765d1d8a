#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace audit {

/// Base class for every error raised by the audit library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid configuration, input data, or precondition violation. Fatal.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Filesystem failure (missing file, unwritable directory, malformed row).
class IoError : public Error {
 public:
  using Error::Error;
};

/// Provider unreachable after the configured retries. Fatal for the run,
/// but the cache makes a re-run resume where it stopped.
class TransientProviderError : public Error {
 public:
  using Error::Error;
};

/// Credential missing or rejected by the provider. Fatal.
class AuthError : public Error {
 public:
  using Error::Error;
};

/// The provider answered but its content is unusable (refusal, empty body,
/// unparseable list). Recorded as an exclusion; the run continues.
class ContentError : public Error {
 public:
  ContentError(std::string kind, const std::string& what)
      : Error(what), kind_(std::move(kind)) {}
  const std::string& kind() const { return kind_; }

 private:
  std::string kind_;
};

/// A raw completion with zero parseable list items.
class EmptyListError : public ContentError {
 public:
  explicit EmptyListError(const std::string& what)
      : ContentError("empty_list", what) {}
};

/// A value has no entry in the active translation table. Fatal, never a
/// silent pass-through.
class TranslationError : public Error {
 public:
  using Error::Error;
};

/// Aggregation contract violation (value with zero rows, too few values,
/// too few paired observations).
class AggregationError : public Error {
 public:
  using Error::Error;
};

}  // namespace audit
