#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "pathrec/kg.hpp"

namespace pathrec {

struct EmbeddingTable {
    int dim = 0;
    std::vector<double> entity_vecs;   // num_entities x dim, row-major
    std::vector<double> entity_bias;   // num_entities
    std::vector<double> relation_vecs; // num_relations x dim, row-major

    std::size_t num_entities() const { return entity_bias.size(); }
    std::size_t num_relations() const {
        return dim == 0 ? 0 : relation_vecs.size() / static_cast<std::size_t>(dim);
    }

    std::span<const double> entity(EntityId e) const;
    std::span<double> entity(EntityId e);
    std::span<const double> relation(RelationId r) const;
    std::span<double> relation(RelationId r);
    double bias(EntityId e) const;

    // <e_head, e_tail> + b_tail
    double relevance(EntityId head, EntityId tail) const;
    // <e_head + r, e_tail> + b_tail
    double triple_score(EntityId head, RelationId rel, EntityId tail) const;
};

struct EmbeddingTrainOptions {
    int dim = 64;
    int epochs = 30;
    double lr = 0.01;
    int negatives_per_positive = 1;
    double margin = 1.0;
    std::uint64_t seed = 0;
};

// Entity and relation vectors uniform in [-6/sqrt(d), 6/sqrt(d)], biases zero.
EmbeddingTable init_embeddings(std::size_t num_entities, std::size_t num_relations, int dim,
                               std::uint64_t seed);

// SGD on the margin ranking loss max(0, margin - s(pos) + s(neg)) with
// s(h,r,t) = <e_h + r, e_t> + b_t. Negatives corrupt the tail uniformly,
// resampled while the corrupted triple exists in the graph. Entity vectors
// are projected back onto the unit ball after each update. Deterministic
// given the seed; zero epochs returns the seeded initialization.
EmbeddingTable train_embeddings(const KnowledgeGraph& g, const EmbeddingTrainOptions& opts);

double margin_pair_loss(const EmbeddingTable& table, const Triple& pos, const Triple& neg,
                        double margin);

// Gradient of margin_pair_loss accumulated into buffers shaped like the
// table's parameter vectors.
void margin_pair_grad(const EmbeddingTable& table, const Triple& pos, const Triple& neg,
                      double margin, std::span<double> grad_entity_vecs,
                      std::span<double> grad_entity_bias, std::span<double> grad_relation_vecs);

// TSV checkpoint: a "dim num_entities num_relations" header, one row per
// entity (dim components then the bias), one row per relation. Values are
// written with enough digits to round-trip exactly.
void save_embeddings(const EmbeddingTable& table, const std::filesystem::path& file);
EmbeddingTable load_embeddings(const std::filesystem::path& file);

} // namespace pathrec
