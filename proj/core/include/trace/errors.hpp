#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace trace {

// Base for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct IoError : Error {
    using Error::Error;
};

struct ParseError : Error {
    using Error::Error;
};

struct ValidationError : Error {
    using Error::Error;
};

struct MalformedId : Error {
    using Error::Error;
};

struct UnknownArtifact : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

struct KindMismatch : Error {
    using Error::Error;
};

struct ShapeError : Error {
    using Error::Error;
};

struct DegenerateMarginals : Error {
    using Error::Error;
};

struct DegenerateInput : Error {
    using Error::Error;
};

struct EmptyInput : Error {
    using Error::Error;
};

struct EmptyIndex : Error {
    using Error::Error;
};

struct MissingLabel : Error {
    long proposal_id;
    explicit MissingLabel(long id)
        : Error("no label for proposal " + std::to_string(id)), proposal_id(id) {}
};

// Gateway errors.
struct CacheMiss : Error {
    std::string fingerprint;
    explicit CacheMiss(std::string fp)
        : Error("transcript cache miss for fingerprint " + fp), fingerprint(std::move(fp)) {}
};

struct TransportError : Error {
    using Error::Error;
};

struct ApiError : Error {
    int status;
    ApiError(int status_, const std::string& msg)
        : Error("api error (status " + std::to_string(status_) + "): " + msg), status(status_) {}
};

struct PromptTooLarge : Error {
    using Error::Error;
};

// Model replied, but not in the shape the phase contract requires.
struct MalformedModelOutput : Error {
    std::string phase;
    std::vector<std::string> raw_replies;
    MalformedModelOutput(std::string phase_, std::vector<std::string> replies)
        : Error("malformed model output in phase '" + phase_ + "' after " +
                std::to_string(replies.size()) + " replies"),
          phase(std::move(phase_)),
          raw_replies(std::move(replies)) {}
};

}  // namespace trace
