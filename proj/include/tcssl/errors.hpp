#pragma once

#include <stdexcept>
#include <string>

namespace tcssl {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller broke a documented precondition (dimension mismatch, bad index, ...).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration value.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent on-disk data.
class DataError : public Error {
 public:
  using Error::Error;
};

class FormatError : public DataError {
 public:
  using DataError::DataError;
};

class SamplerError : public Error {
 public:
  using Error::Error;
};

/// The video is too short for any frame to have a temporally distant partner.
class NoValidDistantFrame : public SamplerError {
 public:
  using SamplerError::SamplerError;
};

/// No valid offset could be drawn for a fixed anchor frame.
class ResampleExhausted : public SamplerError {
 public:
  using SamplerError::SamplerError;
};

/// Training produced a non-finite loss or gradient.
class TrainingError : public Error {
 public:
  using Error::Error;
};

}  // namespace tcssl
