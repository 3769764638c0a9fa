#pragma once

#include <filesystem>
#include <stdexcept>

#include "owadd/streamgen.hpp"

namespace owadd {

class StreamIoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// File is not a stream file or its structure is inconsistent.
class MalformedStreamFile : public StreamIoError {
public:
    using StreamIoError::StreamIoError;
};

/// File carries a format version this build does not understand.
class StreamVersionMismatch : public StreamIoError {
public:
    using StreamIoError::StreamIoError;
};

/// File ends before the declared payload is complete.
class TruncatedStreamFile : public StreamIoError {
public:
    using StreamIoError::StreamIoError;
};

/// Writes the binary stream file (little-endian, versioned header with a
/// config echo, then per-chunk row blocks) and a `<path>.truth.json`
/// ground-truth sidecar. Byte-identical for identical streams.
void write_stream(const Stream& stream, const StreamConfig& config,
                  const std::filesystem::path& path);

struct LoadedStream {
    Stream stream;
    StreamConfig config;
};

LoadedStream read_stream(const std::filesystem::path& path);

/// Reads only the ground-truth sidecar of a stream file.
GroundTruth read_ground_truth(const std::filesystem::path& stream_path);

/// Human-inspectable export: chunk, class_id, is_unknown, f0..f{d-1}.
void export_stream_csv(const Stream& stream, const std::filesystem::path& path);

} // namespace owadd
