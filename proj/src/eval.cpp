#include "pathrec/eval.hpp"

#include <algorithm>
#include <cmath>

#include "pathrec/error.hpp"

namespace pathrec {

namespace {

double log2_gain(std::size_t rank) { return 1.0 / std::log2(static_cast<double>(rank) + 1.0); }

} // namespace

double ndcg_at_k(std::span<const EntityId> ranked, const std::set<EntityId>& relevant,
                 std::size_t n) {
    if (n < 1) throw Error("cutoff must be at least 1");
    if (relevant.empty()) return 0.0;
    double dcg = 0.0;
    std::size_t limit = std::min(n, ranked.size());
    for (std::size_t i = 0; i < limit; ++i)
        if (relevant.contains(ranked[i])) dcg += log2_gain(i + 1);
    double idcg = 0.0;
    std::size_t ideal = std::min(n, relevant.size());
    for (std::size_t i = 1; i <= ideal; ++i) idcg += log2_gain(i);
    return dcg / idcg;
}

double mrr_at_k(std::span<const EntityId> ranked, const std::set<EntityId>& relevant,
                std::size_t n) {
    if (n < 1) throw Error("cutoff must be at least 1");
    std::size_t limit = std::min(n, ranked.size());
    for (std::size_t i = 0; i < limit; ++i)
        if (relevant.contains(ranked[i])) return 1.0 / static_cast<double>(i + 1);
    return 0.0;
}

RunReport evaluate_run(std::span<const UserPaths> runs, const InteractionLog& test,
                       const RecencyTable& recency, const PopularityTable& popularity,
                       std::size_t num_relation_types, std::size_t n) {
    RunReport report;
    report.num_users = runs.size();
    double sum_ndcg = 0.0, sum_mrr = 0.0;
    double sum_lir = 0.0, sum_lid = 0.0, sum_sep = 0.0, sum_sed = 0.0, sum_ptd = 0.0,
           sum_ptc = 0.0;
    std::size_t n_lir = 0, n_lid = 0, n_sep = 0, n_sed = 0, n_ptd = 0, n_ptc = 0;

    for (const UserPaths& run : runs) {
        UserEval ue;
        ue.user = run.user;
        ue.list_size = run.paths.size();
        std::vector<EntityId> ranked;
        ranked.reserve(run.paths.size());
        for (const ReasoningPath& p : run.paths) ranked.push_back(p.terminal());
        std::set<EntityId> relevant;
        for (const Interaction& it : test.for_user(run.user)) relevant.insert(it.product);
        ue.ndcg = ndcg_at_k(ranked, relevant, n);
        ue.mrr = mrr_at_k(ranked, relevant, n);

        std::span<const ReasoningPath> paths = run.paths;
        if (!paths.empty()) {
            auto guarded = [&](auto&& fn) -> std::optional<double> {
                try {
                    return fn();
                } catch (const Error&) {
                    return std::nullopt;
                }
            };
            ue.lir = guarded([&] { return lir(paths, recency); });
            ue.lid = guarded([&] { return lid(paths); });
            ue.sep = guarded([&] { return sep(paths, popularity); });
            ue.sed = guarded([&] { return sed(paths); });
            ue.ptd = guarded([&] { return ptd(paths, num_relation_types); });
            ue.ptc = guarded([&] { return ptc(paths); });
        }

        sum_ndcg += ue.ndcg;
        sum_mrr += ue.mrr;
        auto tally = [](const std::optional<double>& v, double& sum, std::size_t& count) {
            if (v) {
                sum += *v;
                ++count;
            }
        };
        tally(ue.lir, sum_lir, n_lir);
        tally(ue.lid, sum_lid, n_lid);
        tally(ue.sep, sum_sep, n_sep);
        tally(ue.sed, sum_sed, n_sed);
        tally(ue.ptd, sum_ptd, n_ptd);
        tally(ue.ptc, sum_ptc, n_ptc);
        report.users.push_back(std::move(ue));
    }

    if (report.num_users > 0) {
        report.mean_ndcg = sum_ndcg / static_cast<double>(report.num_users);
        report.mean_mrr = sum_mrr / static_cast<double>(report.num_users);
    }
    auto mean_of = [](double sum, std::size_t count) -> std::optional<double> {
        if (count == 0) return std::nullopt;
        return sum / static_cast<double>(count);
    };
    report.mean_lir = mean_of(sum_lir, n_lir);
    report.mean_lid = mean_of(sum_lid, n_lid);
    report.mean_sep = mean_of(sum_sep, n_sep);
    report.mean_sed = mean_of(sum_sed, n_sed);
    report.mean_ptd = mean_of(sum_ptd, n_ptd);
    report.mean_ptc = mean_of(sum_ptc, n_ptc);
    return report;
}

DatasetStats dataset_stats(const KnowledgeGraph& g, const InteractionLog& log) {
    DatasetStats stats;
    stats.num_users = log.num_users();
    stats.num_interactions = log.total_interactions();

    constexpr double kDay = 86400.0;
    std::size_t in_day = 0, in_month = 0, in_year = 0, older = 0;
    for (const auto& [user, items] : log.by_user()) {
        if (items.empty()) continue;
        std::int64_t last = items.back().timestamp;
        double mean_gap = 0.0;
        for (const Interaction& it : items)
            mean_gap += static_cast<double>(last - it.timestamp);
        mean_gap /= static_cast<double>(items.size());
        if (mean_gap <= kDay)
            ++in_day;
        else if (mean_gap <= 30.0 * kDay)
            ++in_month;
        else if (mean_gap <= 365.0 * kDay)
            ++in_year;
        else
            ++older;
    }
    if (stats.num_users > 0) {
        double denom = static_cast<double>(stats.num_users);
        stats.recency.day = 100.0 * static_cast<double>(in_day) / denom;
        stats.recency.month = 100.0 * static_cast<double>(in_month) / denom;
        stats.recency.year = 100.0 * static_cast<double>(in_year) / denom;
        stats.recency.older = 100.0 * static_cast<double>(older) / denom;
    }

    for (TypeId t = 0; t < static_cast<TypeId>(g.num_types()); ++t) {
        std::vector<std::size_t> degrees;
        for (EntityId e = 0; e < static_cast<EntityId>(g.num_entities()); ++e)
            if (g.entity_type(e) == t) degrees.push_back(g.degree(e));
        TypeDegreeStats row;
        row.type = t;
        row.name = g.type_name(t);
        row.entities = degrees.size();
        if (!degrees.empty()) {
            std::sort(degrees.begin(), degrees.end());
            row.min_degree = degrees.front();
            row.max_degree = degrees.back();
            double sum = 0.0;
            for (std::size_t d : degrees) sum += static_cast<double>(d);
            row.mean_degree = sum / static_cast<double>(degrees.size());
            std::size_t m = degrees.size();
            row.median_degree = m % 2 == 1 ? static_cast<double>(degrees[m / 2])
                                           : (static_cast<double>(degrees[m / 2 - 1]) +
                                              static_cast<double>(degrees[m / 2])) /
                                                 2.0;
            std::size_t rank = static_cast<std::size_t>(
                std::ceil(0.9 * static_cast<double>(m)));
            if (rank == 0) rank = 1;
            row.p90_degree = static_cast<double>(degrees[rank - 1]);
        }
        stats.degrees.push_back(std::move(row));
    }

    std::vector<std::size_t> counts(g.num_relations(), 0);
    for (const Triple& t : g.triples()) ++counts[static_cast<std::size_t>(t.rel)];
    for (RelationId r = 0; r < static_cast<RelationId>(g.num_relations()); ++r) {
        RelationStats row;
        row.rel = r;
        row.name = g.relation_name(r);
        row.triples = counts[static_cast<std::size_t>(r)];
        row.fraction = g.num_triples() > 0 ? static_cast<double>(row.triples) /
                                                 static_cast<double>(g.num_triples())
                                           : 0.0;
        stats.relations.push_back(std::move(row));
    }
    return stats;
}

} // namespace pathrec
