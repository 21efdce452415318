#ifndef FSEL_COMMON_HPP
#define FSEL_COMMON_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace fsel {

// All internal arithmetic is double precision; corpus files store float32.
using Vec = std::vector<double>;
using Mat = std::vector<Vec>;  // list of rows, all rows the same length

// Inputs whose dimensions/lengths disagree with an operation's contract.
struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Inputs whose values are outside an operation's domain (zero vectors,
// infeasible counts, bad temperatures).
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

// Malformed or truncated files. Carries the byte offset where reading failed
// when one is known.
struct FormatError : std::runtime_error {
    explicit FormatError(const std::string& what,
                         std::optional<std::uint64_t> offset = std::nullopt)
        : std::runtime_error(offset ? what + " (byte offset " + std::to_string(*offset) + ")"
                                    : what),
          byte_offset(offset) {}

    std::optional<std::uint64_t> byte_offset;
};

inline void check_rectangular(const Mat& m, const char* what) {
    for (const auto& row : m) {
        if (row.size() != m.front().size())
            throw ShapeError(std::string(what) + ": ragged matrix");
    }
}

// FNV-1a 64-bit, used for artifact checksums in run manifests.
std::uint64_t fnv1a64(const void* data, std::size_t len);
std::uint64_t fnv1a64_file(const std::string& path);

}  // namespace fsel

#endif
