#include "pathrec/rerank.hpp"

#include <algorithm>
#include <map>

#include "pathrec/error.hpp"

namespace pathrec {

RankedList rerank(const CandidateSet& cands, const RerankConfig& config,
                  const RecencyTable* recency, const PopularityTable* popularity,
                  int num_relation_types) {
    if (config.alpha < 0.0 || config.alpha > 1.0) throw Error("alpha must be in [0, 1]");
    if (config.n < 1) throw Error("list size must be at least 1");
    if (cands.size() == 0) throw Error("cannot rerank an empty candidate set");
    if (config.metrics.lir && recency == nullptr)
        throw Error("recency table required when reranking with linked-interaction recency");
    if (config.metrics.sep && popularity == nullptr)
        throw Error("popularity table required when reranking with shared-entity popularity");
    if (config.metrics.ptd && num_relation_types < 1)
        throw Error("relation type count required when reranking with path-type diversity");

    std::size_t m_total = cands.size();
    std::vector<double> ir_l(m_total, 0.0), ep_l(m_total, 0.0);
    std::vector<RelationId> type_l(m_total, -1);
    for (std::size_t i = 0; i < m_total; ++i) {
        const ReasoningPath& p = cands.paths[i];
        if (p.length() < 1) throw Error("candidate paths must have at least one hop");
        if (config.metrics.lir) {
            if (auto s = recency->score(p.origin, p.entity_at(1))) ir_l[i] = *s;
        }
        if (config.metrics.sep && p.length() >= 2) {
            if (auto s = popularity->score(p.entity_at(p.length() - 1))) ep_l[i] = *s;
        }
        type_l[i] = path_type(p);
    }

    // prefix aggregates
    std::size_t m = 0;
    double sum_ir = 0.0, sum_ep = 0.0;
    std::map<RelationId, std::size_t> type_counts;
    double repeat_pairs = 0.0; // sum over types of N(N-1)
    std::set<EntityId> chosen_products;
    std::vector<bool> taken(m_total, false);

    RankedList out;
    while (out.indices.size() < config.n) {
        double dm = static_cast<double>(m);
        double lir_base = m > 0 ? sum_ir / dm : 0.0;
        double sep_base = m > 0 ? sum_ep / dm : 0.0;
        double ptd_base =
            m > 0 ? static_cast<double>(type_counts.size()) /
                        static_cast<double>(std::min<std::size_t>(m, num_relation_types))
                  : 0.0;
        double ptc_base = m >= 2 ? 1.0 - repeat_pairs / (dm * (dm - 1.0)) : 0.0;

        bool found = false;
        std::size_t best = 0;
        double best_q = 0.0, best_rel = 0.0, best_prob = 0.0;
        for (std::size_t i = 0; i < m_total; ++i) {
            if (taken[i]) continue;
            if (chosen_products.contains(cands.paths[i].terminal())) continue;
            double gain = 0.0;
            if (config.metrics.lir) gain += (sum_ir + ir_l[i]) / (dm + 1.0) - lir_base;
            if (config.metrics.sep) gain += (sum_ep + ep_l[i]) / (dm + 1.0) - sep_base;
            if (config.metrics.ptd) {
                auto it = type_counts.find(type_l[i]);
                std::size_t distinct = type_counts.size() + (it == type_counts.end() ? 1 : 0);
                gain += static_cast<double>(distinct) /
                            static_cast<double>(std::min<std::size_t>(m + 1, num_relation_types)) -
                        ptd_base;
            }
            if (config.metrics.ptc) {
                if (m >= 1) {
                    auto it = type_counts.find(type_l[i]);
                    double n_t = it == type_counts.end() ? 0.0 : static_cast<double>(it->second);
                    double next_val = 1.0 - (repeat_pairs + 2.0 * n_t) / ((dm + 1.0) * dm);
                    gain += next_val - ptc_base;
                }
            }
            double q = (1.0 - config.alpha) * cands.relevance[i] + config.alpha * gain;
            if (!found || q > best_q ||
                (q == best_q && (cands.relevance[i] > best_rel ||
                                 (cands.relevance[i] == best_rel && cands.probs[i] > best_prob)))) {
                found = true;
                best = i;
                best_q = q;
                best_rel = cands.relevance[i];
                best_prob = cands.probs[i];
            }
        }
        if (!found) break;

        taken[best] = true;
        chosen_products.insert(cands.paths[best].terminal());
        out.indices.push_back(best);
        sum_ir += ir_l[best];
        sum_ep += ep_l[best];
        std::size_t& count = type_counts[type_l[best]];
        repeat_pairs += 2.0 * static_cast<double>(count);
        ++count;
        ++m;
    }
    out.flagged = out.indices.size() < config.n;
    return out;
}

} // namespace pathrec
