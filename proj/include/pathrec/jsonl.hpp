#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "pathrec/kg.hpp"

namespace pathrec {

// Name-level view of a path: entity, relation, entity, ... with "^-1"
// appended to relations traversed against their direction.
std::vector<std::string> path_to_names(const ReasoningPath& p, const KnowledgeGraph& g);
ReasoningPath path_from_names(std::span<const std::string> names, const KnowledgeGraph& g);

struct RecEntry {
    ReasoningPath path;
    double prob = 0.0;
    double relevance = 0.0;
    std::string explanation; // empty until the explain stage fills it
};

struct UserRecord {
    EntityId user = -1;
    std::vector<RecEntry> recs;       // ranked recommendation list
    std::vector<RecEntry> candidates; // wider pool kept for post-processing
    bool flagged = false;             // list came up short of the requested size
};

// One JSON object per line. Ranks are implied by array order; explanations
// and candidate pools are omitted when empty.
void write_records(std::ostream& out, std::span<const UserRecord> records,
                   const KnowledgeGraph& g);
void write_records(const std::filesystem::path& file, std::span<const UserRecord> records,
                   const KnowledgeGraph& g);
std::vector<UserRecord> read_records(std::istream& in, const KnowledgeGraph& g);
std::vector<UserRecord> read_records(const std::filesystem::path& file,
                                     const KnowledgeGraph& g);

} // namespace pathrec
