#include "pathrec/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "pathrec/error.hpp"
#include "pathrec/rng.hpp"

namespace pathrec {

namespace {

constexpr std::int64_t kNow = 1'700'000'000;

const std::vector<std::pair<std::string, std::string>>& attr_vocabulary() {
    static const std::vector<std::pair<std::string, std::string>> vocab{
        {"artist", "performed"}, {"genre", "tagged"},    {"label", "published"},
        {"playlist", "collected"}, {"mood", "evoked"},   {"studio", "recorded"},
    };
    return vocab;
}

void check_spec(const SynthSpec& s) {
    if (s.users < 1) throw Error("need at least one user");
    if (s.products < 2) throw Error("need at least two products");
    if (s.attr_types < 1) throw Error("need at least one attribute type");
    if (s.entities_per_attr < 2) throw Error("need at least two entities per attribute type");
    if (s.links_per_product < 1) throw Error("need at least one link per product");
    if (s.relation_imbalance < 1.0) throw Error("relation imbalance must be at least 1");
    if (s.popularity_skew < 0.0) throw Error("popularity skew must be non-negative");
    if (s.interactions_min < 1 || s.interactions_max < s.interactions_min)
        throw Error("interaction counts must satisfy 1 <= min <= max");
    if (s.clusters < 1) throw Error("need at least one cluster");
    if (s.cluster_affinity < 0.0 || s.cluster_affinity > 1.0)
        throw Error("cluster affinity must be in [0, 1]");
    double mix = 0.0;
    for (double w : s.recency_mix) {
        if (w < 0.0) throw Error("recency mix weights must be non-negative");
        mix += w;
    }
    if (mix <= 0.0) throw Error("recency mix must have positive mass");
    for (double d : s.band_days)
        if (d <= 0.0) throw Error("recency band spans must be positive");
}

// Weighted draw from pool, weight 1/(rank+1)^skew; returns pool index.
std::size_t zipf_draw(Rng& rng, const std::vector<int>& pool_ranks, double skew) {
    double total = 0.0;
    for (int rank : pool_ranks) total += std::pow(static_cast<double>(rank) + 1.0, -skew);
    double u = rand_u01(rng) * total;
    double cum = 0.0;
    for (std::size_t i = 0; i < pool_ranks.size(); ++i) {
        cum += std::pow(static_cast<double>(pool_ranks[i]) + 1.0, -skew);
        if (u < cum) return i;
    }
    return pool_ranks.size() - 1;
}

} // namespace

SynthData generate_synthetic(const SynthSpec& spec) {
    check_spec(spec);
    Rng rng(spec.seed);
    SynthData data;
    data.feedback_relation = "listened";

    auto user_name = [](int i) { return "user_" + std::to_string(i + 1); };
    auto song_name = [](int i) { return "song_" + std::to_string(i + 1); };

    std::vector<std::string> attr_type_names(spec.attr_types);
    std::vector<std::string> attr_rel_names(spec.attr_types);
    const auto& vocab = attr_vocabulary();
    for (int t = 0; t < spec.attr_types; ++t) {
        if (static_cast<std::size_t>(t) < vocab.size()) {
            attr_type_names[t] = vocab[t].first;
            attr_rel_names[t] = vocab[t].second;
        } else {
            attr_type_names[t] = "attr" + std::to_string(t + 1);
            attr_rel_names[t] = "linked" + std::to_string(t + 1);
        }
    }
    auto attr_name = [&](int type, int i) {
        return attr_type_names[type] + "_" + std::to_string(i + 1);
    };

    for (int i = 0; i < spec.users; ++i)
        data.entities.push_back({user_name(i), "user", user_name(i)});
    for (int i = 0; i < spec.products; ++i)
        data.entities.push_back({song_name(i), "song", song_name(i)});
    for (int t = 0; t < spec.attr_types; ++t)
        for (int i = 0; i < spec.entities_per_attr; ++i)
            data.entities.push_back({attr_name(t, i), attr_type_names[t], attr_name(t, i)});

    // product-attribute links, rarer relations geometrically thinner
    std::vector<std::set<int>> linked(static_cast<std::size_t>(spec.attr_types));
    for (int p = 0; p < spec.products; ++p) {
        int cluster = p % spec.clusters;
        for (int t = 0; t < spec.attr_types; ++t) {
            int links = std::max(
                1, static_cast<int>(std::lround(spec.links_per_product *
                                                std::pow(spec.relation_imbalance, -t))));
            links = std::min(links, spec.entities_per_attr);
            std::set<int> chosen;
            while (static_cast<int>(chosen.size()) < links) {
                std::vector<int> pool;
                bool own = rand_u01(rng) < spec.cluster_affinity;
                for (int i = 0; i < spec.entities_per_attr; ++i) {
                    if (chosen.contains(i)) continue;
                    if (own && i % spec.clusters != cluster) continue;
                    pool.push_back(i);
                }
                if (pool.empty()) {
                    for (int i = 0; i < spec.entities_per_attr; ++i)
                        if (!chosen.contains(i)) pool.push_back(i);
                }
                int pick = pool[zipf_draw(rng, pool, spec.popularity_skew)];
                chosen.insert(pick);
            }
            for (int i : chosen) {
                data.triples.push_back({attr_name(t, i), attr_rel_names[t], song_name(p)});
                linked[static_cast<std::size_t>(t)].insert(i);
            }
        }
    }
    // make sure no attribute entity is an orphan
    for (int t = 0; t < spec.attr_types; ++t) {
        for (int i = 0; i < spec.entities_per_attr; ++i) {
            if (linked[static_cast<std::size_t>(t)].contains(i)) continue;
            int p = static_cast<int>(rand_below(rng, static_cast<std::size_t>(spec.products)));
            data.triples.push_back({attr_name(t, i), attr_rel_names[t], song_name(p)});
        }
    }

    double mix_total = 0.0;
    for (double w : spec.recency_mix) mix_total += w;
    for (int u = 0; u < spec.users; ++u) {
        int cluster = u % spec.clusters;
        int count = spec.interactions_min +
                    static_cast<int>(rand_below(
                        rng, static_cast<std::size_t>(spec.interactions_max -
                                                      spec.interactions_min + 1)));
        std::vector<SynthInteraction> items;
        for (int i = 0; i < count; ++i) {
            double pick = rand_u01(rng) * mix_total;
            std::size_t band = spec.recency_mix.size() - 1;
            double cum = 0.0;
            for (std::size_t b = 0; b < spec.recency_mix.size(); ++b) {
                cum += spec.recency_mix[b];
                if (pick < cum) {
                    band = b;
                    break;
                }
            }
            double span = spec.band_days[band] * 86400.0;
            std::int64_t ts = kNow - static_cast<std::int64_t>(rand_u01(rng) * span);

            std::vector<int> pool;
            bool own = rand_u01(rng) < spec.cluster_affinity;
            for (int p = 0; p < spec.products; ++p)
                if (!own || p % spec.clusters == cluster) pool.push_back(p);
            if (pool.empty())
                for (int p = 0; p < spec.products; ++p) pool.push_back(p);
            int product = pool[zipf_draw(rng, pool, spec.popularity_skew)];
            items.push_back({user_name(u), song_name(product), ts});
        }
        std::stable_sort(items.begin(), items.end(),
                         [](const SynthInteraction& a, const SynthInteraction& b) {
                             return a.timestamp < b.timestamp;
                         });
        data.interactions.insert(data.interactions.end(), items.begin(), items.end());
    }
    return data;
}

void write_synthetic(const SynthData& data, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir / "entities.tsv");
        if (!out) throw Error("cannot open " + (dir / "entities.tsv").string() + " for writing");
        for (const SynthEntity& e : data.entities)
            out << e.name << '\t' << e.type << '\t' << e.display << '\n';
        if (!out) throw Error("failed writing entities.tsv");
    }
    {
        std::ofstream out(dir / "kg.tsv");
        if (!out) throw Error("cannot open " + (dir / "kg.tsv").string() + " for writing");
        for (const SynthTriple& t : data.triples)
            out << t.head << '\t' << t.rel << '\t' << t.tail << '\n';
        if (!out) throw Error("failed writing kg.tsv");
    }
    {
        std::ofstream out(dir / "interactions.tsv");
        if (!out)
            throw Error("cannot open " + (dir / "interactions.tsv").string() + " for writing");
        for (const SynthInteraction& it : data.interactions)
            out << it.user << '\t' << it.product << '\t' << it.timestamp << '\n';
        if (!out) throw Error("failed writing interactions.tsv");
    }
}

} // namespace pathrec
