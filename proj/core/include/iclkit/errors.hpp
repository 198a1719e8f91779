#pragma once

#include <stdexcept>
#include <string>

namespace iclkit {

// Validation failures (bad arguments, malformed inputs). The CLI maps these
// to exit code 1.
class ShapeError : public std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
class DomainError : public std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
class EmptyInputError : public std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
class InputError : public std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
class ConfigError : public std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
class RankError : public std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
class DegenerateLabelError : public std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
class DegenerateVarianceError : public std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
class UnsupportedGradientError : public std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
class SelectionError : public std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Runtime failures (I/O, numerics, remote endpoints). The CLI maps these to
// exit code 2.
class NumericError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};
class IoError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};
class CorruptionError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};
class ExperimentError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

class ClientError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};
class TransportError : public ClientError {
  using ClientError::ClientError;
};
class RequestError : public ClientError {
  using ClientError::ClientError;
};
class ProtocolError : public ClientError {
  using ClientError::ClientError;
};
class GenerationError : public ClientError {
  using ClientError::ClientError;
};

}  // namespace iclkit
