#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace macroalloc {

/// Lowercase hex SHA-256 digest.
std::string sha256_hex(std::string_view data);

/// Digest of a file's bytes; throws IoError if it cannot be read.
std::string sha256_file(const std::filesystem::path& path);

/// Incremental SHA-256 for hashing several fields without concatenating them.
class Sha256 {
public:
    Sha256();
    ~Sha256();
    Sha256(const Sha256&) = delete;
    Sha256& operator=(const Sha256&) = delete;

    Sha256& update(std::string_view data);
    /// Appends the byte length before the data, so adjacent fields cannot alias.
    Sha256& field(std::string_view data);
    std::string hex();

private:
    struct Impl;
    Impl* impl_;
};

}  // namespace macroalloc
