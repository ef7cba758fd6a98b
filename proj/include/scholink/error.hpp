#pragma once
// Error hierarchy shared by every module.
//
// Each error carries a stable machine code (snake_case) that survives into
// CLI output and HTTP error bodies.

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>

namespace scholink {

class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

// Caller supplied something unusable (bad flag, unknown name, bad file).
// The CLI maps these to exit code 1.
class UserError : public Error {
public:
    using Error::Error;
};

class IoError : public UserError {
public:
    explicit IoError(const std::string& message) : UserError("io_error", message) {}
};

class FormatVersionError : public UserError {
public:
    explicit FormatVersionError(const std::string& message)
        : UserError("format_version_error", message) {}
};

class ParseError : public UserError {
public:
    ParseError(std::size_t line_number, std::string reason)
        : UserError("parse_error",
                    "line " + std::to_string(line_number) + ": " + reason),
          line_number_(line_number), reason_(std::move(reason)) {}

    std::size_t line_number() const noexcept { return line_number_; }
    const std::string& reason() const noexcept { return reason_; }

private:
    std::size_t line_number_;
    std::string reason_;
};

class ConfigError : public UserError {
public:
    explicit ConfigError(const std::string& message) : UserError("config_error", message) {}
};

class EmptyStore : public UserError {
public:
    EmptyStore() : UserError("empty_store", "no entities available") {}
};

class EmptyQuery : public UserError {
public:
    EmptyQuery() : UserError("empty_query", "query is empty after normalization") {}
};

class InvalidK : public UserError {
public:
    InvalidK() : UserError("invalid_k", "k must be at least 1") {}
};

class DimensionMismatch : public UserError {
public:
    DimensionMismatch(std::size_t expected, std::size_t actual)
        : UserError("dimension_mismatch", "expected dimension " + std::to_string(expected) +
                                              ", got " + std::to_string(actual)) {}
    explicit DimensionMismatch(const std::string& message)
        : UserError("dimension_mismatch", message) {}
};

class KindMismatch : public UserError {
public:
    explicit KindMismatch(const std::string& message) : UserError("kind_mismatch", message) {}
};

class NoTrainableTriples : public UserError {
public:
    NoTrainableTriples()
        : UserError("no_trainable_triples", "no entity-to-entity triples to train on") {}
};

class NonFiniteGradient : public Error {
public:
    explicit NonFiniteGradient(const std::string& message)
        : Error("non_finite_gradient", message) {}
};

class EmptyText : public UserError {
public:
    EmptyText() : UserError("empty_text", "text is empty after normalization") {}
    explicit EmptyText(std::size_t index)
        : UserError("empty_text", "text at index " + std::to_string(index) +
                                      " is empty after normalization"),
          index_(index), has_index_(true) {}

    bool has_index() const noexcept { return has_index_; }
    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_ = 0;
    bool has_index_ = false;
};

class RemoteUnavailable : public Error {
public:
    RemoteUnavailable(std::string endpoint, const std::string& cause)
        : Error("remote_unavailable", endpoint + ": " + cause), endpoint_(std::move(endpoint)) {}

    const std::string& endpoint() const noexcept { return endpoint_; }

private:
    std::string endpoint_;
};

class BadRemoteVector : public Error {
public:
    explicit BadRemoteVector(const std::string& message)
        : Error("bad_remote_vector", message) {}
};

class SimOutOfRange : public UserError {
public:
    explicit SimOutOfRange(double sim)
        : UserError("sim_out_of_range",
                    "string similarity " + std::to_string(sim) + " outside [0, 1]") {}
};

class NonFiniteOutput : public Error {
public:
    NonFiniteOutput() : Error("non_finite_output", "network produced a non-finite value") {}
};

class EmptyDataset : public UserError {
public:
    EmptyDataset() : UserError("empty_dataset", "training dataset is empty") {}
};

class DivergedLoss : public Error {
public:
    explicit DivergedLoss(std::size_t epoch)
        : Error("diverged_loss", "non-finite loss in epoch " + std::to_string(epoch)) {}
};

class EmptyCandidates : public UserError {
public:
    EmptyCandidates() : UserError("empty_candidates", "nothing to rank") {}
};

class SpanParseError : public UserError {
public:
    SpanParseError(std::size_t position, const std::string& reason, std::string raw = {})
        : UserError("span_parse_error",
                    "position " + std::to_string(position) + ": " + reason),
          position_(position), raw_(std::move(raw)) {}

    std::size_t position() const noexcept { return position_; }
    const std::string& raw() const noexcept { return raw_; }
    void set_raw(std::string raw) { raw_ = std::move(raw); }

private:
    std::size_t position_;
    std::string raw_;
};

class SchemaError : public UserError {
public:
    SchemaError(std::string path, const std::string& reason)
        : UserError("schema_error", path + ": " + reason), path_(std::move(path)) {}

    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

class DuplicateId : public UserError {
public:
    explicit DuplicateId(const std::string& id)
        : UserError("duplicate_id", "duplicate question id '" + id + "'") {}
};

class ResourceMissing : public UserError {
public:
    explicit ResourceMissing(const std::string& name)
        : UserError("resource_missing", "resource not loaded: " + name) {}
};

class LabelSyntaxError : public UserError {
public:
    explicit LabelSyntaxError(const std::string& label)
        : UserError("label_syntax_error",
                    "label contains a reserved character ('|' or '['): " + label) {}
};

}  // namespace scholink
