#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include "pathrec/embeddings.hpp"
#include "pathrec/kg.hpp"
#include "pathrec/metrics.hpp"

namespace pathrec {

// One step of a walk is the same record as one hop of a finished path.
using Action = Hop;

struct AgentState {
    EntityId user = -1;
    EntityId current = -1;
    std::vector<Hop> history;

    int step() const { return static_cast<int>(history.size()); }
    ReasoningPath path() const { return ReasoningPath{user, history}; }
};

AgentState initial_state(const KnowledgeGraph& g, EntityId user);
AgentState apply_action(const KnowledgeGraph& g, const AgentState& state, const Action& a);

// Edges out of the current entity, minus any that would revisit an entity
// already on the walk (the user included) or reuse a (relation, direction)
// pair already traversed. Order follows the graph's adjacency lists.
std::vector<Action> action_space(const KnowledgeGraph& g, const AgentState& state);

struct MetricSet {
    bool lir = false;
    bool sep = false;
    bool ptd = false;
    bool ptc = false; // list-level only; ignored by per-step shaping

    bool any() const { return lir || sep || ptd || ptc; }
};

struct RewardConfig {
    double alpha = 0.0;
    MetricSet metrics;
    int max_hops = 3;
    std::array<int, 3> prune_sizes{20, 10, 10};
};

// Lookup context for per-step shaping. seen_types tracks (user, path type)
// pairs already produced this epoch; entities or products missing from a
// table contribute zero rather than failing the walk.
struct PathQualityContext {
    const RecencyTable* recency = nullptr;
    const PopularityTable* popularity = nullptr;
    const std::set<std::pair<EntityId, RelationId>>* seen_types = nullptr;
};

// Blend of embedding relevance toward the reached entity and the quality
// terms of the extended partial walk: (1 - alpha) * rel + alpha * sum.
double score_action(const KnowledgeGraph& g, const EmbeddingTable& table,
                    const AgentState& state, const Action& a, const RewardConfig& config,
                    const PathQualityContext& ctx);

// Keep the prune_sizes[step] highest-scoring actions; ties prefer the
// smaller (relation, direction, entity) triple. Fewer actions pass through.
std::vector<Action> prune_action_space(const KnowledgeGraph& g, const EmbeddingTable& table,
                                       const AgentState& state, std::vector<Action> actions,
                                       const RewardConfig& config,
                                       const PathQualityContext& ctx);

// Terminal reward: zero unless the walk has exactly max_hops hops and ends
// on a product, else (1 - alpha) * relevance(user, end) + alpha * quality.
double reward(const KnowledgeGraph& g, const EmbeddingTable& table, const AgentState& state,
              const RewardConfig& config, const PathQualityContext& ctx);

// Two ReLU layers from the state encoding to a query vector that is dotted
// with each action's [signed relation; entity] feature to produce logits.
struct PolicyModel {
    int dim = 0;    // embedding dimension
    int hidden = 0;
    std::vector<double> w1, b1; // hidden x 3*dim
    std::vector<double> w2, b2; // hidden x hidden
    std::vector<double> w3, b3; // 2*dim x hidden

    bool empty() const { return w1.empty(); }
};

PolicyModel init_policy(int dim, int hidden, std::uint64_t seed);

struct PolicyForward {
    std::vector<double> x;  // 3*dim input
    std::vector<double> z1, h1;
    std::vector<double> z2, h2;
    std::vector<double> q;  // 2*dim query
};

PolicyForward policy_forward(const PolicyModel& m, const EmbeddingTable& table,
                             const AgentState& state);

// [relation vector, negated when traversed backward; entity vector]
std::vector<double> action_feature(const EmbeddingTable& table, const Action& a);

std::vector<double> policy_probs(const EmbeddingTable& table, std::span<const double> query,
                                 std::span<const Action> actions);

// Parameter-shaped gradient buffers.
struct PolicyGradients {
    std::vector<double> w1, b1, w2, b2, w3, b3;

    explicit PolicyGradients(const PolicyModel& m)
        : w1(m.w1.size()), b1(m.b1.size()), w2(m.w2.size()), b2(m.b2.size()), w3(m.w3.size()),
          b3(m.b3.size()) {}
};

// d log pi(actions[chosen] | state) / d parameters
PolicyGradients policy_logprob_gradient(const PolicyModel& m, const EmbeddingTable& table,
                                        const AgentState& state, std::span<const Action> actions,
                                        std::size_t chosen);

struct PolicyTrainOptions {
    int episodes = 10000;
    double lr = 5e-4;
    double discount = 0.99;
    double baseline_rate = 0.05;
    int hidden = 128;
    std::uint64_t seed = 0;
};

struct TrainStats {
    int episodes = 0;
    int completed = 0; // walks that earned a nonzero-eligible terminal
    double mean_reward = 0.0;
};

// REINFORCE over pruned action spaces: sample a walk from the softmax
// policy, then ascend discount^(T-1-t) * (R - baseline) * grad log pi for
// each step. The baseline is a moving average of episode returns. Users are
// drawn uniformly; the per-epoch set of seen path types resets every
// num_users episodes. Embeddings stay fixed.
PolicyModel train_policy(const KnowledgeGraph& g, const EmbeddingTable& table,
                         const RewardConfig& config, const PolicyTrainOptions& opts,
                         const RecencyTable* recency, const PopularityTable* popularity,
                         TrainStats* stats = nullptr);

void save_policy(const PolicyModel& m, const std::filesystem::path& file);
PolicyModel load_policy(const std::filesystem::path& file);

} // namespace pathrec
