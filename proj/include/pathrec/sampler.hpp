#pragma once

#include <array>
#include <limits>
#include <set>
#include <vector>

#include "pathrec/agent.hpp"
#include "pathrec/embeddings.hpp"
#include "pathrec/kg.hpp"

namespace pathrec {

// A beam width that never prunes, for exhaustive enumeration.
inline constexpr int kUnboundedBeam = std::numeric_limits<int>::max();

struct CandidateSet {
    std::vector<ReasoningPath> paths;
    std::vector<double> probs;     // product of per-hop policy probabilities
    std::vector<double> relevance; // embedding relevance user -> terminal

    std::size_t size() const { return paths.size(); }
};

// Level-by-level beam walk from the user: at each level every partial walk
// expands over its full valid action space under the policy's softmax, the
// per-level expansions are ranked by probability, and the best beam_sizes[i]
// survive. Finished walks keep the product of their hop probabilities; only
// those ending on a product entity are returned.
CandidateSet sample_candidates(const KnowledgeGraph& g, const PolicyModel& policy,
                               const EmbeddingTable& table, EntityId user, int hops = 3,
                               std::array<int, 3> beam_sizes = {20, 10, 10});

// One champion path per distinct terminal product: the highest-probability
// path, earlier index on ties. Returned in ascending product order.
std::vector<std::size_t> select_best_paths(const CandidateSet& cands);

struct RankedList {
    std::vector<std::size_t> indices; // into the candidate set
    bool flagged = false;             // fewer than n results available
};

// The n champions with the highest relevance (ties: higher probability,
// then earlier index), skipping products in exclude.
RankedList top_n(const CandidateSet& cands, const std::vector<std::size_t>& selected,
                 std::size_t n, const std::set<EntityId>& exclude = {});

} // namespace pathrec
