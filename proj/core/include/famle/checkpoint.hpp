#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include <famle/model.hpp>

namespace famle {

// Versioned JSON checkpoint: architecture, normalization statistics, flat
// row-major parameter arrays in layer order, and the embedding table in
// index order. Numbers survive a save/load round trip bit-exactly.
struct Checkpoint {
    ModelParams params;
    std::optional<EmbeddingTable> table;
};

void save_checkpoint(std::ostream& out, const Checkpoint& ckpt);
void save_checkpoint(const std::string& path, const Checkpoint& ckpt);

Checkpoint load_checkpoint(std::istream& in);
Checkpoint load_checkpoint(const std::string& path);

} // namespace famle
