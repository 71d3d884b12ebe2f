// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "mixsent/model.hpp"

namespace mixsent {

struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

struct BadMagic : std::runtime_error {
    explicit BadMagic(const std::string& what) : std::runtime_error(what) {}
};

struct VersionMismatch : std::runtime_error {
    explicit VersionMismatch(const std::string& what) : std::runtime_error(what) {}
};

struct ChecksumMismatch : std::runtime_error {
    explicit ChecksumMismatch(const std::string& what) : std::runtime_error(what) {}
};

struct MalformedCheckpoint : std::runtime_error {
    explicit MalformedCheckpoint(const std::string& what) : std::runtime_error(what) {}
};

// Checkpoint layout: magic "MXL1", u32 LE version, u32 LE config-record
// length + UTF-8 record, then per parameter: u32 name length + name, u32
// rank + u64 dims, raw little-endian f64 payload; trailing CRC-32 of
// everything before it. load(save(m)) is bit-identical to m.
void save_checkpoint(const Model& model, const std::filesystem::path& path);
Model load_checkpoint(const std::filesystem::path& path);

}  // namespace mixsent
