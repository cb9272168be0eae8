#pragma once

#include <stdexcept>
#include <string>

namespace weakcat {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// data / format errors
struct ParseError : Error {
    ParseError(const std::string& what, std::size_t line)
        : Error(what + " (line " + std::to_string(line) + ")"), line(line) {}
    std::size_t line;
};
struct EmptyCorpus : Error { using Error::Error; };
struct DegenerateSplit : Error { using Error::Error; };
struct CorruptFile : Error { using Error::Error; };
struct CorruptCheckpoint : Error { using Error::Error; };
struct VocabMismatch : Error { using Error::Error; };

// contract violations
struct EmptyIndex : Error { using Error::Error; };
struct NotEnoughCandidates : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };
struct IndexOutOfRange : Error { using Error::Error; };
struct ZeroEmbedding : Error { using Error::Error; };
struct DegenerateLabels : Error { using Error::Error; };

// numeric failures
struct NonFiniteLoss : Error { using Error::Error; };

} // namespace weakcat
