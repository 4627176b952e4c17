#pragma once

#include <stdexcept>
#include <string>

namespace zce {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter lies outside the domain of the operation (nonpositive scale,
/// probability outside (0,1), ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Sufficient statistic is zero where a positive sum is required.
class DegenerateSummaryError : public Error {
 public:
  using Error::Error;
};

/// Not enough observations for the requested tail size.
class DataSizeError : public Error {
 public:
  using Error::Error;
};

/// Ties at the threshold leave fewer strict exceedances than requested.
class TieError : public Error {
 public:
  using Error::Error;
};

/// The requested annual quantile sits below the threshold's own percentile.
class QuantileBelowThresholdError : public Error {
 public:
  using Error::Error;
};

/// A series truncation could not reach its mass target within the hard cap.
class TruncationError : public Error {
 public:
  using Error::Error;
};

/// Malformed text input (config, CSV, distribution string).
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace zce
