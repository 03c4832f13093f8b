#include "pathrec/explain.hpp"

#include <array>
#include <map>

#include "pathrec/error.hpp"

namespace pathrec {

std::string render_explanation(const ReasoningPath& p, const KnowledgeGraph& g,
                               const ExplanationTemplate& tmpl) {
    if (p.length() != 3) throw Error("explanations need a path with exactly 3 hops");
    if (!g.is_user(p.origin)) throw Error("explanation path must start at a user");

    auto surface = [&](EntityId e) -> const std::string& {
        const std::string& s = g.entity_display(e);
        if (s.empty()) throw Error("entity " + std::to_string(e) + " has no display name");
        return s;
    };
    std::map<std::string, std::string, std::less<>> slots{
        {"ek", surface(p.entity_at(3))},
        {"r1", g.relation_name(p.hops[0].rel)},
        {"e1", surface(p.entity_at(1))},
        {"rk", g.relation_name(p.hops[2].rel)},
        {"ek1", surface(p.entity_at(2))},
    };

    std::map<std::string, int, std::less<>> used;
    std::string out;
    out.reserve(tmpl.text.size() + 64);
    std::size_t pos = 0;
    while (pos < tmpl.text.size()) {
        std::size_t open = tmpl.text.find('{', pos);
        if (open == std::string::npos) {
            out.append(tmpl.text, pos, std::string::npos);
            break;
        }
        out.append(tmpl.text, pos, open - pos);
        std::size_t close = tmpl.text.find('}', open);
        if (close == std::string::npos) throw Error("unterminated slot in explanation template");
        std::string_view name(tmpl.text.data() + open + 1, close - open - 1);
        auto it = slots.find(name);
        if (it == slots.end())
            throw Error("unknown slot {" + std::string(name) + "} in explanation template");
        out += it->second;
        ++used[it->first];
        pos = close + 1;
    }
    for (const auto& [name, value] : slots) {
        auto it = used.find(name);
        if (it == used.end() || it->second != 1)
            throw Error("explanation template must use slot {" + name + "} exactly once");
    }
    return out;
}

} // namespace pathrec
