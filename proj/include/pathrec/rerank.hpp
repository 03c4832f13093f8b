#pragma once

#include "pathrec/agent.hpp"
#include "pathrec/metrics.hpp"
#include "pathrec/sampler.hpp"

namespace pathrec {

struct RerankConfig {
    double alpha = 0.0;
    MetricSet metrics;
    std::size_t n = 10;
};

// Greedy list construction: at each position take the candidate maximizing
// (1 - alpha) * relevance + alpha * (marginal gain of each selected list
// metric over the prefix). Ties fall back to relevance, then probability,
// then candidate order. Each product appears at most once; gains over the
// empty prefix are the singleton metric values, and the concentration term
// joins once the prefix holds a path for it to pair with.
RankedList rerank(const CandidateSet& cands, const RerankConfig& config,
                  const RecencyTable* recency, const PopularityTable* popularity,
                  int num_relation_types);

} // namespace pathrec
