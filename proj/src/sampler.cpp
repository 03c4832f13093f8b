#include "pathrec/sampler.hpp"

#include <algorithm>
#include <map>

#include "pathrec/error.hpp"

namespace pathrec {

namespace {

struct BeamItem {
    AgentState state;
    double prob = 1.0;
};

} // namespace

CandidateSet sample_candidates(const KnowledgeGraph& g, const PolicyModel& policy,
                               const EmbeddingTable& table, EntityId user, int hops,
                               std::array<int, 3> beam_sizes) {
    if (policy.empty()) throw Error("policy model is empty");
    if (hops < 1) throw Error("hops must be at least 1");
    for (int z : beam_sizes)
        if (z < 1) throw Error("beam sizes must be at least 1");

    std::vector<BeamItem> beam{BeamItem{initial_state(g, user), 1.0}};
    for (int level = 0; level < hops; ++level) {
        std::vector<BeamItem> expanded;
        for (const BeamItem& item : beam) {
            std::vector<Action> actions = action_space(g, item.state);
            if (actions.empty()) continue;
            PolicyForward fwd = policy_forward(policy, table, item.state);
            std::vector<double> probs = policy_probs(table, fwd.q, actions);
            for (std::size_t i = 0; i < actions.size(); ++i) {
                BeamItem next;
                next.state = item.state;
                next.state.history.push_back(actions[i]);
                next.state.current = actions[i].entity;
                next.prob = item.prob * probs[i];
                expanded.push_back(std::move(next));
            }
        }
        std::size_t keep = static_cast<std::size_t>(
            beam_sizes[std::min<std::size_t>(level, beam_sizes.size() - 1)]);
        if (expanded.size() > keep) {
            std::stable_sort(expanded.begin(), expanded.end(),
                             [](const BeamItem& a, const BeamItem& b) { return a.prob > b.prob; });
            expanded.resize(keep);
        }
        beam = std::move(expanded);
        if (beam.empty()) break;
    }

    CandidateSet out;
    for (BeamItem& item : beam) {
        if (item.state.step() != hops) continue;
        if (!g.is_product(item.state.current)) continue;
        out.probs.push_back(item.prob);
        out.relevance.push_back(table.relevance(user, item.state.current));
        out.paths.push_back(item.state.path());
    }
    return out;
}

std::vector<std::size_t> select_best_paths(const CandidateSet& cands) {
    std::map<EntityId, std::size_t> champion;
    for (std::size_t i = 0; i < cands.size(); ++i) {
        EntityId product = cands.paths[i].terminal();
        auto [it, inserted] = champion.try_emplace(product, i);
        if (!inserted && cands.probs[i] > cands.probs[it->second]) it->second = i;
    }
    std::vector<std::size_t> out;
    out.reserve(champion.size());
    for (const auto& [product, idx] : champion) out.push_back(idx);
    return out;
}

RankedList top_n(const CandidateSet& cands, const std::vector<std::size_t>& selected,
                 std::size_t n, const std::set<EntityId>& exclude) {
    if (n < 1) throw Error("list size must be at least 1");
    std::vector<std::size_t> pool;
    for (std::size_t idx : selected) {
        if (idx >= cands.size()) throw Error("selected index out of range");
        if (exclude.contains(cands.paths[idx].terminal())) continue;
        pool.push_back(idx);
    }
    std::sort(pool.begin(), pool.end(), [&](std::size_t a, std::size_t b) {
        if (cands.relevance[a] != cands.relevance[b])
            return cands.relevance[a] > cands.relevance[b];
        if (cands.probs[a] != cands.probs[b]) return cands.probs[a] > cands.probs[b];
        return a < b;
    });
    RankedList out;
    out.flagged = pool.size() < n;
    if (pool.size() > n) pool.resize(n);
    out.indices = std::move(pool);
    return out;
}

} // namespace pathrec
