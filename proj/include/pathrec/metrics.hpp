#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "pathrec/kg.hpp"

namespace pathrec {

struct EwmaSeries {
    std::vector<double> raw;
    std::vector<double> normalized;
};

// raw_1 = v_1, raw_i = (1-beta)*raw_{i-1} + beta*v_i, followed by min-max
// normalization over the series. A constant or singleton series normalizes to
// all ones. Requires beta in (0, 1] and a non-empty series.
EwmaSeries ewma_normalized(std::span<const double> values, double beta);

// Per-user normalized interaction recency. When a user interacted with the
// same product more than once, the most recent occurrence's score is kept.
class RecencyTable {
public:
    RecencyTable() = default;
    explicit RecencyTable(double beta) : beta_(beta) {}

    static RecencyTable build(const InteractionLog& log, double beta);

    std::optional<double> score(EntityId user, EntityId product) const;
    void set(EntityId user, EntityId product, double value);
    double beta() const { return beta_; }

    struct Row {
        EntityId user;
        EntityId product;
        std::int64_t timestamp;
        double raw;
        double normalized;
    };
    const std::vector<Row>& rows() const { return rows_; }

private:
    double beta_ = 0.3;
    std::map<EntityId, std::map<EntityId, double>> scores_;
    std::vector<Row> rows_;
};

// Per-entity normalized popularity. Entities are grouped by type, sorted by
// participation count ascending (ties by id), and scored with the same
// decayed average as interaction recency.
class PopularityTable {
public:
    PopularityTable() = default;
    explicit PopularityTable(double beta) : beta_(beta) {}

    static PopularityTable build(const KnowledgeGraph& g, double beta);

    std::optional<double> score(EntityId entity) const;
    void set(EntityId entity, double value);
    double beta() const { return beta_; }

    struct Row {
        EntityId entity;
        TypeId type;
        std::size_t degree;
        double raw;
        double normalized;
    };
    const std::vector<Row>& rows() const { return rows_; }

private:
    double beta_ = 0.3;
    std::map<EntityId, double> scores_;
    std::vector<Row> rows_;
};

// List-level reasoning path quality metrics. All take a non-empty path list;
// lir/sep throw when a referenced table entry is missing.

// Mean recency of the linking interactions (e_1 per path).
double lir(std::span<const ReasoningPath> paths, const RecencyTable& recency);
// Distinct linking interactions over list size.
double lid(std::span<const ReasoningPath> paths);
// Mean popularity of the shared entities (e_{k-1} per path).
double sep(std::span<const ReasoningPath> paths, const PopularityTable& popularity);
// Distinct shared entities over list size.
double sed(std::span<const ReasoningPath> paths);
// Distinct path types over min(list size, number of relation types).
double ptd(std::span<const ReasoningPath> paths, std::size_t num_relation_types);
// Inverse Simpson balance of path types; requires at least 2 paths.
double ptc(std::span<const ReasoningPath> paths);

} // namespace pathrec
