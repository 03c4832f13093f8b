#pragma once

#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "pathrec/kg.hpp"
#include "pathrec/metrics.hpp"

namespace pathrec {

// Binary-relevance NDCG over the first n entries: a hit at rank i gains
// 1/log2(i + 1), the ideal list front-loads min(|relevant|, n) hits.
// Zero when nothing is relevant.
double ndcg_at_k(std::span<const EntityId> ranked, const std::set<EntityId>& relevant,
                 std::size_t n = 10);

// Reciprocal rank of the first hit within the first n entries, else zero.
double mrr_at_k(std::span<const EntityId> ranked, const std::set<EntityId>& relevant,
                std::size_t n = 10);

struct UserEval {
    EntityId user = -1;
    std::size_t list_size = 0;
    double ndcg = 0.0;
    double mrr = 0.0;
    // List metrics are absent when their inputs are (a table entry missing,
    // or fewer than two paths for the concentration term).
    std::optional<double> lir, lid, sep, sed, ptd, ptc;
};

struct RunReport {
    std::vector<UserEval> users;
    std::size_t num_users = 0;
    double mean_ndcg = 0.0;
    double mean_mrr = 0.0;
    // Macro means over the users where each metric is defined.
    std::optional<double> mean_lir, mean_lid, mean_sep, mean_sed, mean_ptd, mean_ptc;
};

struct UserPaths {
    EntityId user = -1;
    std::vector<ReasoningPath> paths; // recommendation order
};

RunReport evaluate_run(std::span<const UserPaths> runs, const InteractionLog& test,
                       const RecencyTable& recency, const PopularityTable& popularity,
                       std::size_t num_relation_types, std::size_t n = 10);

struct RecencyBuckets {
    // Percentage of users by mean gap between their interactions and their
    // most recent one: within a day, a month (30 days), a year (365 days),
    // or older.
    double day = 0.0;
    double month = 0.0;
    double year = 0.0;
    double older = 0.0;
};

struct TypeDegreeStats {
    TypeId type = -1;
    std::string name;
    std::size_t entities = 0;
    std::size_t min_degree = 0;
    std::size_t max_degree = 0;
    double mean_degree = 0.0;
    double median_degree = 0.0;
    double p90_degree = 0.0;
};

struct RelationStats {
    RelationId rel = -1;
    std::string name;
    std::size_t triples = 0;
    double fraction = 0.0;
};

struct DatasetStats {
    std::size_t num_users = 0;
    std::size_t num_interactions = 0;
    RecencyBuckets recency;
    std::vector<TypeDegreeStats> degrees;   // one row per entity type
    std::vector<RelationStats> relations;   // one row per relation
};

DatasetStats dataset_stats(const KnowledgeGraph& g, const InteractionLog& log);

} // namespace pathrec
