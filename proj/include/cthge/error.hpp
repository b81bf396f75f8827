#pragma once

#include <stdexcept>
#include <string>

namespace cthge {

// Input-side failures: bad files, bad flags, mismatched shapes.
// The CLI maps these to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ParseError : ConfigError {
  using ConfigError::ConfigError;
};
struct ValidationError : ConfigError {
  using ConfigError::ConfigError;
};
struct DimensionError : ConfigError {
  using ConfigError::ConfigError;
};

// Failures that occur while a pipeline is running. CLI exit code 1.
struct PipelineError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericError : PipelineError {
  using PipelineError::PipelineError;
};
struct DomainError : PipelineError {
  using PipelineError::PipelineError;
};
struct DivergenceError : PipelineError {
  using PipelineError::PipelineError;
};
struct UndefinedMetricError : PipelineError {
  using PipelineError::PipelineError;
};
struct PruneError : PipelineError {
  using PipelineError::PipelineError;
};
struct SearchError : PipelineError {
  using PipelineError::PipelineError;
};

}  // namespace cthge
