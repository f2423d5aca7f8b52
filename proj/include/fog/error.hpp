#pragma once

#include <stdexcept>
#include <string>

namespace fog {

// Base of every library error. The three direct children map onto the CLI
// exit-code contract: config error = 1, data error = 2, inference failure = 3.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : Error {
    using Error::Error;
};
struct DataError : Error {
    using Error::Error;
};
struct InferenceError : Error {
    using Error::Error;
};

// ingest
struct MissingColumn : DataError {
    using DataError::DataError;
};
struct RaggedRows : DataError {
    using DataError::DataError;
};
struct EmptyRecording : DataError {
    using DataError::DataError;
};
struct BadFactor : DataError {
    using DataError::DataError;
};
struct TooFewSubjects : DataError {
    using DataError::DataError;
};

// windowing
struct RecordingTooShort : DataError {
    using DataError::DataError;
};

// gaf
struct BadLength : DataError {
    using DataError::DataError;
};
struct OutOfRange : DataError {
    using DataError::DataError;
};

// nn / model
struct ShapeMismatch : DataError {
    using DataError::DataError;
};
struct OddDims : DataError {
    using DataError::DataError;
};
struct BadRate : ConfigError {
    using ConfigError::ConfigError;
};
struct DegenerateBatch : DataError {
    using DataError::DataError;
};
struct BadConfig : ConfigError {
    using ConfigError::ConfigError;
};
struct EmptyTrainingSet : DataError {
    using DataError::DataError;
};
struct VersionMismatch : DataError {
    using DataError::DataError;
};
struct ChecksumFailure : DataError {
    using DataError::DataError;
};

// federated
struct EmptyShard : DataError {
    using DataError::DataError;
};
struct EmptyUpdateList : DataError {
    using DataError::DataError;
};

// eval
struct LengthMismatch : DataError {
    using DataError::DataError;
};
struct UnsortedInput : DataError {
    using DataError::DataError;
};
struct GridMismatch : DataError {
    using DataError::DataError;
};
struct MissingF1 : DataError {
    using DataError::DataError;
};
struct AllChannelsFailed : InferenceError {
    using InferenceError::InferenceError;
};

// archive
struct BadArchive : DataError {
    using DataError::DataError;
};

}  // namespace fog
