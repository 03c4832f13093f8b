#include "pathrec/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <vector>

#include "pathrec/error.hpp"

namespace pathrec {
namespace {

std::string loc(const std::filesystem::path& file, std::size_t line) {
    return file.filename().string() + ":" + std::to_string(line);
}

std::vector<std::string> split_tsv(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t tab = line.find('\t', start);
        if (tab == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, tab - start));
        start = tab + 1;
    }
    return fields;
}

// Reads non-empty lines, strips a trailing CR, enforces the column count.
template <typename Fn>
void for_each_row(const std::filesystem::path& file, std::size_t columns, Fn&& fn) {
    std::ifstream in(file);
    if (!in) throw Error("cannot open " + file.string());
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split_tsv(line);
        if (fields.size() != columns) {
            throw Error(loc(file, lineno) + ": expected " + std::to_string(columns) +
                        " tab-separated fields, got " + std::to_string(fields.size()));
        }
        fn(lineno, fields);
    }
}

std::int64_t parse_timestamp(const std::string& s, const std::filesystem::path& file,
                             std::size_t lineno) {
    std::int64_t value = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw Error(loc(file, lineno) + ": invalid timestamp '" + s + "'");
    }
    return value;
}

} // namespace

Dataset load_dataset(const std::filesystem::path& interactions_file,
                     const std::filesystem::path& kg_file,
                     const std::filesystem::path& entities_file, const LoadOptions& opts) {
    if (opts.feedback_relation.empty()) {
        throw Error("load_dataset: feedback_relation is not configured");
    }
    if (opts.min_relation_count < 0) {
        throw Error("load_dataset: min_relation_count must be non-negative");
    }

    struct RawEntity {
        std::string name;
        std::string type;
        std::string display;
    };
    std::vector<RawEntity> entities;
    std::map<std::string, std::size_t> entity_lookup;
    for_each_row(entities_file, 3, [&](std::size_t lineno, const std::vector<std::string>& f) {
        if (f[0].empty() || f[1].empty()) {
            throw Error(loc(entities_file, lineno) + ": empty entity id or type");
        }
        if (!entity_lookup.emplace(f[0], entities.size()).second) {
            throw Error(loc(entities_file, lineno) + ": duplicate entity '" + f[0] + "'");
        }
        entities.push_back({f[0], f[1], f[2]});
    });

    struct RawTriple {
        std::size_t head;
        std::string rel;
        std::size_t tail;
        bool operator<(const RawTriple& o) const {
            return std::tie(head, rel, tail) < std::tie(o.head, o.rel, o.tail);
        }
    };
    std::set<RawTriple> triples;
    std::vector<std::string> relation_order; // first-appearance order in the KG file
    std::set<std::string> relations_seen;
    std::size_t raw_triples = 0;
    for_each_row(kg_file, 3, [&](std::size_t lineno, const std::vector<std::string>& f) {
        const auto head = entity_lookup.find(f[0]);
        if (head == entity_lookup.end()) {
            throw Error(loc(kg_file, lineno) + ": undeclared head entity '" + f[0] + "'");
        }
        if (f[1].empty()) throw Error(loc(kg_file, lineno) + ": empty relation name");
        const auto tail = entity_lookup.find(f[2]);
        if (tail == entity_lookup.end()) {
            throw Error(loc(kg_file, lineno) + ": undeclared tail entity '" + f[2] + "'");
        }
        ++raw_triples;
        if (relations_seen.insert(f[1]).second) relation_order.push_back(f[1]);
        triples.insert({head->second, f[1], tail->second});
    });

    LoadInfo info;
    info.raw_triples = raw_triples;
    info.duplicate_triples = raw_triples - triples.size();

    std::map<std::string, std::size_t> relation_counts;
    for (const auto& t : triples) ++relation_counts[t.rel];

    std::set<std::string> kept_relations;
    for (const auto& [rel, count] : relation_counts) {
        const bool keep = rel == opts.feedback_relation ||
                          count >= static_cast<std::size_t>(opts.min_relation_count);
        if (keep)
            kept_relations.insert(rel);
        else
            ++info.removed_relations;
    }

    struct RawInteraction {
        std::size_t user;
        std::size_t product;
        std::int64_t timestamp;
    };
    std::vector<RawInteraction> interactions;
    for_each_row(interactions_file, 3, [&](std::size_t lineno, const std::vector<std::string>& f) {
        const std::int64_t t = parse_timestamp(f[2], interactions_file, lineno);
        const auto user = entity_lookup.find(f[0]);
        const auto product = entity_lookup.find(f[1]);
        if (user == entity_lookup.end() || product == entity_lookup.end()) {
            ++info.dropped_interactions;
            return;
        }
        interactions.push_back({user->second, product->second, t});
    });
    if (interactions.empty()) {
        throw Error("load_dataset: no interactions left after filtering");
    }

    const std::string& user_type = entities[interactions.front().user].type;
    const std::string& product_type = entities[interactions.front().product].type;
    for (const auto& it : interactions) {
        if (entities[it.user].type != user_type) {
            throw Error("load_dataset: mixed entity types in the user column ('" + user_type +
                        "' vs '" + entities[it.user].type + "')");
        }
        if (entities[it.product].type != product_type) {
            throw Error("load_dataset: mixed entity types in the product column ('" + product_type +
                        "' vs '" + entities[it.product].type + "')");
        }
    }
    if (user_type == product_type) {
        throw Error("load_dataset: user and product columns share the entity type '" + user_type +
                    "'");
    }

    GraphBuilder builder;
    for (const auto& e : entities) builder.intern_type(e.type);
    for (const auto& e : entities) {
        builder.add_entity(e.name, *builder.find_type(e.type), e.display);
    }
    for (const auto& rel : relation_order) {
        if (kept_relations.count(rel)) builder.intern_relation(rel);
    }
    const RelationId feedback = builder.intern_relation(opts.feedback_relation);
    std::size_t kept_triples = 0;
    for (const auto& t : triples) {
        if (!kept_relations.count(t.rel)) continue;
        builder.add_triple(static_cast<EntityId>(t.head), *builder.find_relation(t.rel),
                           static_cast<EntityId>(t.tail));
        ++kept_triples;
    }
    info.removed_triples = triples.size() - kept_triples;
    if (builder.num_triples() == 0) {
        throw Error("load_dataset: no triples left after filtering");
    }

    Dataset out{builder.build(feedback, *builder.find_type(user_type),
                              *builder.find_type(product_type)),
                InteractionLog{}, info};
    for (const auto& it : interactions) {
        out.interactions.add(static_cast<EntityId>(it.user), static_cast<EntityId>(it.product),
                             it.timestamp);
    }
    out.interactions.finalize();
    return out;
}

void write_graph(const KnowledgeGraph& g, const std::filesystem::path& kg_file,
                 const std::filesystem::path& entities_file) {
    std::ofstream ents(entities_file);
    if (!ents) throw Error("cannot write " + entities_file.string());
    for (std::size_t i = 0; i < g.num_entities(); ++i) {
        const auto e = static_cast<EntityId>(i);
        ents << g.entity_name(e) << '\t' << g.type_name(g.entity_type(e)) << '\t'
             << g.entity_display(e) << '\n';
    }

    std::ofstream kg(kg_file);
    if (!kg) throw Error("cannot write " + kg_file.string());
    for (const Triple& t : g.triples()) {
        kg << g.entity_name(t.head) << '\t' << g.relation_name(t.rel) << '\t'
           << g.entity_name(t.tail) << '\n';
    }
}

void write_interactions(const InteractionLog& log, const KnowledgeGraph& g,
                        const std::filesystem::path& file) {
    std::ofstream out(file);
    if (!out) throw Error("cannot write " + file.string());
    for (const auto& [user, list] : log.by_user()) {
        for (const Interaction& it : list) {
            out << g.entity_name(user) << '\t' << g.entity_name(it.product) << '\t' << it.timestamp
                << '\n';
        }
    }
}

InteractionLog read_interactions(const std::filesystem::path& file, const KnowledgeGraph& g) {
    InteractionLog log;
    for_each_row(file, 3, [&](std::size_t lineno, const std::vector<std::string>& f) {
        const auto user = g.find_entity(f[0]);
        if (!user) throw Error(loc(file, lineno) + ": unknown user entity '" + f[0] + "'");
        const auto product = g.find_entity(f[1]);
        if (!product) throw Error(loc(file, lineno) + ": unknown product entity '" + f[1] + "'");
        log.add(*user, *product, parse_timestamp(f[2], file, lineno));
    });
    log.finalize();
    return log;
}

} // namespace pathrec
