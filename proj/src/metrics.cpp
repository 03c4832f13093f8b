#include "pathrec/metrics.hpp"

#include <algorithm>
#include <set>
#include <string>

#include "pathrec/error.hpp"

namespace pathrec {

EwmaSeries ewma_normalized(std::span<const double> values, double beta) {
    if (values.empty()) throw Error("ewma_normalized: empty series");
    if (!(beta > 0.0) || !(beta <= 1.0)) {
        throw Error("ewma_normalized: beta must lie in (0, 1]");
    }

    EwmaSeries out;
    // a constant series is a fixed point of the recurrence; computing it
    // through the formula would leave rounding noise that breaks the
    // all-ones normalization
    if (std::all_of(values.begin(), values.end(), [&](double v) { return v == values[0]; })) {
        out.raw.assign(values.begin(), values.end());
        out.normalized.assign(values.size(), 1.0);
        return out;
    }
    out.raw.resize(values.size());
    out.raw[0] = values[0];
    for (std::size_t i = 1; i < values.size(); ++i) {
        out.raw[i] = (1.0 - beta) * out.raw[i - 1] + beta * values[i];
    }

    const auto [lo_it, hi_it] = std::minmax_element(out.raw.begin(), out.raw.end());
    const double lo = *lo_it, hi = *hi_it;
    out.normalized.resize(values.size());
    if (hi == lo) {
        std::fill(out.normalized.begin(), out.normalized.end(), 1.0);
    } else {
        for (std::size_t i = 0; i < out.raw.size(); ++i) {
            out.normalized[i] = (out.raw[i] - lo) / (hi - lo);
        }
    }
    return out;
}

RecencyTable RecencyTable::build(const InteractionLog& log, double beta) {
    if (!log.sorted()) throw Error("RecencyTable: log is not chronologically sorted");
    RecencyTable table(beta);
    for (const auto& [user, list] : log.by_user()) {
        std::vector<double> stamps(list.size());
        for (std::size_t i = 0; i < list.size(); ++i) {
            stamps[i] = static_cast<double>(list[i].timestamp);
        }
        const EwmaSeries series = ewma_normalized(stamps, beta);
        auto& per_user = table.scores_[user];
        for (std::size_t i = 0; i < list.size(); ++i) {
            per_user[list[i].product] = series.normalized[i]; // later occurrences overwrite
            table.rows_.push_back(Row{user, list[i].product, list[i].timestamp, series.raw[i],
                                      series.normalized[i]});
        }
    }
    return table;
}

std::optional<double> RecencyTable::score(EntityId user, EntityId product) const {
    const auto user_it = scores_.find(user);
    if (user_it == scores_.end()) return std::nullopt;
    const auto it = user_it->second.find(product);
    if (it == user_it->second.end()) return std::nullopt;
    return it->second;
}

void RecencyTable::set(EntityId user, EntityId product, double value) {
    scores_[user][product] = value;
}

PopularityTable PopularityTable::build(const KnowledgeGraph& g, double beta) {
    PopularityTable table(beta);
    for (TypeId type = 0; static_cast<std::size_t>(type) < g.num_types(); ++type) {
        std::vector<EntityId> members;
        for (std::size_t i = 0; i < g.num_entities(); ++i) {
            if (g.entity_type(static_cast<EntityId>(i)) == type) {
                members.push_back(static_cast<EntityId>(i));
            }
        }
        if (members.empty()) continue;
        std::stable_sort(members.begin(), members.end(), [&](EntityId a, EntityId b) {
            return std::pair(g.degree(a), a) < std::pair(g.degree(b), b);
        });
        std::vector<double> degrees(members.size());
        for (std::size_t i = 0; i < members.size(); ++i) {
            degrees[i] = static_cast<double>(g.degree(members[i]));
        }
        const EwmaSeries series = ewma_normalized(degrees, beta);
        for (std::size_t i = 0; i < members.size(); ++i) {
            table.scores_[members[i]] = series.normalized[i];
            table.rows_.push_back(Row{members[i], type, g.degree(members[i]), series.raw[i],
                                      series.normalized[i]});
        }
    }
    return table;
}

std::optional<double> PopularityTable::score(EntityId entity) const {
    const auto it = scores_.find(entity);
    if (it == scores_.end()) return std::nullopt;
    return it->second;
}

void PopularityTable::set(EntityId entity, double value) {
    scores_[entity] = value;
}

namespace {

void require_nonempty(std::span<const ReasoningPath> paths, const char* what) {
    if (paths.empty()) throw Error(std::string(what) + ": empty path list");
}

} // namespace

double lir(std::span<const ReasoningPath> paths, const RecencyTable& recency) {
    require_nonempty(paths, "lir");
    double sum = 0.0;
    for (const ReasoningPath& p : paths) {
        const EntityId product = linked_entity(p);
        const auto score = recency.score(p.origin, product);
        if (!score) {
            throw Error("lir: no recency entry for user " + std::to_string(p.origin) +
                        ", product " + std::to_string(product));
        }
        sum += *score;
    }
    return sum / static_cast<double>(paths.size());
}

double lid(std::span<const ReasoningPath> paths) {
    require_nonempty(paths, "lid");
    std::set<EntityId> distinct;
    for (const ReasoningPath& p : paths) distinct.insert(linked_entity(p));
    return static_cast<double>(distinct.size()) / static_cast<double>(paths.size());
}

double sep(std::span<const ReasoningPath> paths, const PopularityTable& popularity) {
    require_nonempty(paths, "sep");
    double sum = 0.0;
    for (const ReasoningPath& p : paths) {
        const EntityId entity = shared_entity(p);
        const auto score = popularity.score(entity);
        if (!score) {
            throw Error("sep: no popularity entry for entity " + std::to_string(entity));
        }
        sum += *score;
    }
    return sum / static_cast<double>(paths.size());
}

double sed(std::span<const ReasoningPath> paths) {
    require_nonempty(paths, "sed");
    std::set<EntityId> distinct;
    for (const ReasoningPath& p : paths) distinct.insert(shared_entity(p));
    return static_cast<double>(distinct.size()) / static_cast<double>(paths.size());
}

double ptd(std::span<const ReasoningPath> paths, std::size_t num_relation_types) {
    require_nonempty(paths, "ptd");
    if (num_relation_types < 1) throw Error("ptd: num_relation_types must be at least 1");
    std::set<RelationId> types;
    for (const ReasoningPath& p : paths) types.insert(path_type(p));
    const std::size_t denom = std::min(paths.size(), num_relation_types);
    return static_cast<double>(types.size()) / static_cast<double>(denom);
}

double ptc(std::span<const ReasoningPath> paths) {
    if (paths.size() < 2) throw Error("ptc: undefined for fewer than 2 paths");
    std::map<RelationId, std::size_t> counts;
    for (const ReasoningPath& p : paths) ++counts[path_type(p)];
    double repeats = 0.0;
    for (const auto& [type, n] : counts) {
        repeats += static_cast<double>(n) * static_cast<double>(n - 1);
    }
    const auto m = static_cast<double>(paths.size());
    return 1.0 - repeats / (m * (m - 1.0));
}

} // namespace pathrec
