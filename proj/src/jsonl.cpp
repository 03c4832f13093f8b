#include "pathrec/jsonl.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "pathrec/error.hpp"

namespace pathrec {

namespace {

constexpr std::string_view kInverseSuffix = "^-1";

using ordered_json = nlohmann::ordered_json;

} // namespace

std::vector<std::string> path_to_names(const ReasoningPath& p, const KnowledgeGraph& g) {
    std::vector<std::string> out;
    out.reserve(2 * p.length() + 1);
    out.push_back(g.entity_name(p.origin));
    for (const Hop& h : p.hops) {
        std::string rel = g.relation_name(h.rel);
        if (h.dir == Direction::Backward) rel += kInverseSuffix;
        out.push_back(std::move(rel));
        out.push_back(g.entity_name(h.entity));
    }
    return out;
}

ReasoningPath path_from_names(std::span<const std::string> names, const KnowledgeGraph& g) {
    if (names.size() < 3 || names.size() % 2 == 0)
        throw Error("a path needs entity, relation, entity, ... with at least one hop");
    auto resolve_entity = [&](const std::string& name) {
        std::optional<EntityId> e = g.find_entity(name);
        if (!e) throw Error("unknown entity '" + name + "' in path");
        return *e;
    };
    ReasoningPath p;
    p.origin = resolve_entity(names[0]);
    for (std::size_t i = 1; i + 1 < names.size(); i += 2) {
        std::string_view rel_name = names[i];
        Direction dir = Direction::Forward;
        if (rel_name.size() > kInverseSuffix.size() &&
            rel_name.substr(rel_name.size() - kInverseSuffix.size()) == kInverseSuffix) {
            dir = Direction::Backward;
            rel_name.remove_suffix(kInverseSuffix.size());
        }
        std::optional<RelationId> r = g.find_relation(rel_name);
        if (!r) throw Error("unknown relation '" + std::string(rel_name) + "' in path");
        p.hops.push_back(Hop{*r, dir, resolve_entity(names[i + 1])});
    }
    return p;
}

namespace {

ordered_json entry_to_json(const RecEntry& entry, std::size_t rank, const KnowledgeGraph& g) {
    ordered_json j;
    j["rank"] = rank;
    j["product"] = g.entity_name(entry.path.terminal());
    j["score"] = entry.relevance;
    j["prob"] = entry.prob;
    j["path"] = path_to_names(entry.path, g);
    if (!entry.explanation.empty()) j["explanation"] = entry.explanation;
    return j;
}

RecEntry entry_from_json(const ordered_json& j, const KnowledgeGraph& g) {
    RecEntry entry;
    std::vector<std::string> names = j.at("path").get<std::vector<std::string>>();
    entry.path = path_from_names(names, g);
    entry.relevance = j.at("score").get<double>();
    entry.prob = j.at("prob").get<double>();
    if (j.contains("explanation")) entry.explanation = j.at("explanation").get<std::string>();
    return entry;
}

} // namespace

void write_records(std::ostream& out, std::span<const UserRecord> records,
                   const KnowledgeGraph& g) {
    for (const UserRecord& rec : records) {
        ordered_json j;
        j["user"] = g.entity_name(rec.user);
        j["flagged"] = rec.flagged;
        ordered_json recs = ordered_json::array();
        for (std::size_t i = 0; i < rec.recs.size(); ++i)
            recs.push_back(entry_to_json(rec.recs[i], i + 1, g));
        j["recs"] = std::move(recs);
        if (!rec.candidates.empty()) {
            ordered_json cands = ordered_json::array();
            for (std::size_t i = 0; i < rec.candidates.size(); ++i)
                cands.push_back(entry_to_json(rec.candidates[i], i + 1, g));
            j["candidates"] = std::move(cands);
        }
        out << j.dump() << '\n';
    }
    if (!out) throw Error("failed writing record stream");
}

void write_records(const std::filesystem::path& file, std::span<const UserRecord> records,
                   const KnowledgeGraph& g) {
    std::ofstream out(file);
    if (!out) throw Error("cannot open " + file.string() + " for writing");
    write_records(out, records, g);
}

std::vector<UserRecord> read_records(std::istream& in, const KnowledgeGraph& g) {
    std::vector<UserRecord> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        try {
            ordered_json j = ordered_json::parse(line);
            UserRecord rec;
            std::string user_name = j.at("user").get<std::string>();
            std::optional<EntityId> user = g.find_entity(user_name);
            if (!user) throw Error("unknown user '" + user_name + "'");
            rec.user = *user;
            rec.flagged = j.value("flagged", false);
            for (const ordered_json& e : j.at("recs")) rec.recs.push_back(entry_from_json(e, g));
            if (j.contains("candidates"))
                for (const ordered_json& e : j.at("candidates"))
                    rec.candidates.push_back(entry_from_json(e, g));
            out.push_back(std::move(rec));
        } catch (const nlohmann::json::exception& e) {
            throw Error("line " + std::to_string(lineno) + ": " + e.what());
        } catch (const Error& e) {
            throw Error("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

std::vector<UserRecord> read_records(const std::filesystem::path& file,
                                     const KnowledgeGraph& g) {
    std::ifstream in(file);
    if (!in) throw Error("cannot open " + file.string());
    try {
        return read_records(in, g);
    } catch (const Error& e) {
        throw Error(file.string() + ": " + e.what());
    }
}

} // namespace pathrec
