#pragma once

#include <filesystem>
#include <string>

#include "pathrec/kg.hpp"

namespace pathrec {

struct LoadOptions {
    std::string feedback_relation;
    long min_relation_count = 0;
};

struct LoadInfo {
    std::size_t raw_triples = 0;
    std::size_t duplicate_triples = 0;
    std::size_t removed_relations = 0; // below min_relation_count
    std::size_t removed_triples = 0;   // triples of removed relations
    std::size_t dropped_interactions = 0; // user or product not a KG entity
};

struct Dataset {
    KnowledgeGraph graph; // filtered; contains no feedback triples unless the KG file had them
    InteractionLog interactions;
    LoadInfo info;
};

// Reads the three ingestion files. Relation types occurring fewer than
// min_relation_count times are dropped with their triples (the feedback
// relation is exempt: its occurrences are the interactions themselves).
// Interactions whose user or product is not a declared KG entity are dropped.
// The user and product types are inferred from the interaction columns and
// must each be uniform.
Dataset load_dataset(const std::filesystem::path& interactions_file,
                     const std::filesystem::path& kg_file,
                     const std::filesystem::path& entities_file, const LoadOptions& opts);

// Writes the graph back out in the ingestion formats.
void write_graph(const KnowledgeGraph& g, const std::filesystem::path& kg_file,
                 const std::filesystem::path& entities_file);

void write_interactions(const InteractionLog& log, const KnowledgeGraph& g,
                        const std::filesystem::path& file);

// Strict reload of an interactions file whose entities must all resolve
// against the graph (used for split artifacts, unlike load_dataset's
// drop-on-unknown ingestion policy).
InteractionLog read_interactions(const std::filesystem::path& file, const KnowledgeGraph& g);

} // namespace pathrec
