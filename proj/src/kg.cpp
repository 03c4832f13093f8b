#include "pathrec/kg.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <utility>

#include "pathrec/error.hpp"

namespace pathrec {

RelationId path_type(const ReasoningPath& p) {
    if (p.hops.empty()) throw Error("path_type: empty path");
    return p.hops.back().rel;
}

EntityId linked_entity(const ReasoningPath& p) {
    if (p.hops.empty()) throw Error("linked_entity: empty path");
    return p.hops.front().entity;
}

EntityId shared_entity(const ReasoningPath& p) {
    if (p.hops.size() < 2) throw Error("shared_entity: path has fewer than 2 hops");
    return p.hops[p.hops.size() - 2].entity;
}

void InteractionLog::add(EntityId user, EntityId product, std::int64_t timestamp) {
    auto& list = by_user_[user];
    if (!list.empty() && timestamp < list.back().timestamp) sorted_ = false;
    list.push_back({product, timestamp});
}

void InteractionLog::finalize() {
    if (sorted_) return;
    for (auto& [user, list] : by_user_) {
        std::stable_sort(list.begin(), list.end(),
                         [](const Interaction& a, const Interaction& b) {
                             return a.timestamp < b.timestamp;
                         });
    }
    sorted_ = true;
}

std::span<const Interaction> InteractionLog::for_user(EntityId u) const {
    auto it = by_user_.find(u);
    if (it == by_user_.end()) return {};
    return it->second;
}

std::vector<EntityId> InteractionLog::users() const {
    std::vector<EntityId> out;
    out.reserve(by_user_.size());
    for (const auto& [user, list] : by_user_) out.push_back(user);
    return out;
}

std::size_t InteractionLog::total_interactions() const {
    std::size_t n = 0;
    for (const auto& [user, list] : by_user_) n += list.size();
    return n;
}

namespace {

// floor(frac * m) with a guard against binary fraction representation
// (0.7 * 10 evaluates just below 7.0 in IEEE arithmetic).
std::size_t frac_floor(double frac, std::size_t m) {
    return static_cast<std::size_t>(std::floor(frac * static_cast<double>(m) + 1e-9));
}

} // namespace

SplitResult chronological_split(const InteractionLog& log, double train_frac, double valid_frac) {
    if (!(train_frac > 0.0) || !(valid_frac > 0.0) || !(train_frac + valid_frac < 1.0)) {
        throw Error("chronological_split: fractions must be positive and sum below 1");
    }
    if (!log.sorted()) throw Error("chronological_split: log is not chronologically sorted");

    SplitResult out;
    for (const auto& [user, list] : log.by_user()) {
        const std::size_t m = list.size();
        if (m < 3) {
            for (const auto& it : list) out.train.add(user, it.product, it.timestamp);
            out.flagged.push_back(user);
            continue;
        }
        const std::size_t n_train = frac_floor(train_frac, m);
        const std::size_t n_train_valid = frac_floor(train_frac + valid_frac, m);
        for (std::size_t i = 0; i < m; ++i) {
            if (i < n_train)
                out.train.add(user, list[i].product, list[i].timestamp);
            else if (i < n_train_valid)
                out.valid.add(user, list[i].product, list[i].timestamp);
            else
                out.test.add(user, list[i].product, list[i].timestamp);
        }
    }
    return out;
}

const std::string& KnowledgeGraph::entity_name(EntityId e) const {
    check_entity(e);
    return entity_names_[static_cast<std::size_t>(e)];
}

const std::string& KnowledgeGraph::entity_display(EntityId e) const {
    check_entity(e);
    return entity_display_[static_cast<std::size_t>(e)];
}

TypeId KnowledgeGraph::entity_type(EntityId e) const {
    check_entity(e);
    return entity_types_[static_cast<std::size_t>(e)];
}

const std::string& KnowledgeGraph::type_name(TypeId t) const {
    if (t < 0 || static_cast<std::size_t>(t) >= type_names_.size()) {
        throw Error("unknown type id " + std::to_string(t));
    }
    return type_names_[static_cast<std::size_t>(t)];
}

const std::string& KnowledgeGraph::relation_name(RelationId r) const {
    if (r < 0 || static_cast<std::size_t>(r) >= relation_names_.size()) {
        throw Error("unknown relation id " + std::to_string(r));
    }
    return relation_names_[static_cast<std::size_t>(r)];
}

std::optional<EntityId> KnowledgeGraph::find_entity(std::string_view name) const {
    auto it = entity_index_.find(name);
    if (it == entity_index_.end()) return std::nullopt;
    return it->second;
}

std::optional<RelationId> KnowledgeGraph::find_relation(std::string_view name) const {
    auto it = relation_index_.find(name);
    if (it == relation_index_.end()) return std::nullopt;
    return it->second;
}

std::optional<TypeId> KnowledgeGraph::find_type(std::string_view name) const {
    auto it = type_index_.find(name);
    if (it == type_index_.end()) return std::nullopt;
    return it->second;
}

std::span<const Edge> KnowledgeGraph::edges_from(EntityId e) const {
    check_entity(e);
    const auto i = static_cast<std::size_t>(e);
    return std::span<const Edge>(adj_edges_.data() + adj_offsets_[i],
                                 adj_offsets_[i + 1] - adj_offsets_[i]);
}

bool KnowledgeGraph::has_triple(EntityId head, RelationId rel, EntityId tail) const {
    return std::binary_search(triples_.begin(), triples_.end(), Triple{head, rel, tail});
}

std::size_t KnowledgeGraph::degree(EntityId e) const {
    return edges_from(e).size();
}

void KnowledgeGraph::check_entity(EntityId e) const {
    if (e < 0 || static_cast<std::size_t>(e) >= entity_names_.size()) {
        throw Error("unknown entity id " + std::to_string(e));
    }
}

void KnowledgeGraph::index_triples() {
    std::sort(triples_.begin(), triples_.end());
    triples_.erase(std::unique(triples_.begin(), triples_.end()), triples_.end());

    const std::size_t n = entity_names_.size();
    std::vector<std::size_t> counts(n + 1, 0);
    for (const Triple& t : triples_) {
        ++counts[static_cast<std::size_t>(t.head)];
        ++counts[static_cast<std::size_t>(t.tail)];
    }
    adj_offsets_.assign(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) adj_offsets_[i + 1] = adj_offsets_[i] + counts[i];
    adj_edges_.resize(adj_offsets_[n]);
    std::vector<std::size_t> fill(adj_offsets_.begin(), adj_offsets_.end() - 1);
    for (const Triple& t : triples_) {
        adj_edges_[fill[static_cast<std::size_t>(t.head)]++] = Edge{t.rel, Direction::Forward, t.tail};
        adj_edges_[fill[static_cast<std::size_t>(t.tail)]++] = Edge{t.rel, Direction::Backward, t.head};
    }
    for (std::size_t i = 0; i < n; ++i) {
        std::sort(adj_edges_.begin() + static_cast<std::ptrdiff_t>(adj_offsets_[i]),
                  adj_edges_.begin() + static_cast<std::ptrdiff_t>(adj_offsets_[i + 1]));
    }

    users_.clear();
    products_.clear();
    for (std::size_t i = 0; i < n; ++i) {
        if (entity_types_[i] == user_type_) users_.push_back(static_cast<EntityId>(i));
        if (entity_types_[i] == product_type_) products_.push_back(static_cast<EntityId>(i));
    }
}

KnowledgeGraph KnowledgeGraph::with_feedback(const InteractionLog& log) const {
    KnowledgeGraph g = *this;
    for (const auto& [user, list] : log.by_user()) {
        if (!g.is_user(user)) {
            throw Error("with_feedback: entity " + entity_name(user) + " is not a user");
        }
        for (const Interaction& it : list) {
            if (!g.is_product(it.product)) {
                throw Error("with_feedback: entity " + entity_name(it.product) + " is not a product");
            }
            g.triples_.push_back(Triple{user, feedback_rel_, it.product});
        }
    }
    g.index_triples();
    return g;
}

bool KnowledgeGraph::valid_path(const ReasoningPath& p) const {
    if (p.hops.empty()) return false;
    if (p.origin < 0 || static_cast<std::size_t>(p.origin) >= num_entities()) return false;

    std::set<EntityId> seen_entities{p.origin};
    std::set<std::pair<RelationId, Direction>> seen_tokens;
    EntityId at = p.origin;
    for (const Hop& hop : p.hops) {
        if (hop.entity < 0 || static_cast<std::size_t>(hop.entity) >= num_entities()) return false;
        if (hop.rel < 0 || static_cast<std::size_t>(hop.rel) >= num_relations()) return false;
        const bool connected = hop.dir == Direction::Forward
                                   ? has_triple(at, hop.rel, hop.entity)
                                   : has_triple(hop.entity, hop.rel, at);
        if (!connected) return false;
        if (!seen_entities.insert(hop.entity).second) return false;
        if (!seen_tokens.insert({hop.rel, hop.dir}).second) return false;
        at = hop.entity;
    }
    return true;
}

PathParts KnowledgeGraph::path_parts(const ReasoningPath& p) const {
    if (p.length() != 3) {
        throw Error("path_parts: expected a 3-hop path, got " + std::to_string(p.length()) + " hops");
    }
    if (!is_user(p.origin)) {
        throw Error("path_parts: origin " + entity_name(p.origin) + " is not a user");
    }
    if (!is_product(p.hops[0].entity)) {
        throw Error("path_parts: linked entity " + entity_name(p.hops[0].entity) + " is not a product");
    }
    if (!is_product(p.hops[2].entity)) {
        throw Error("path_parts: terminal " + entity_name(p.hops[2].entity) + " is not a product");
    }
    PathParts parts;
    parts.linking_interaction = {p.origin, p.hops[0].rel, p.hops[0].dir, p.hops[0].entity};
    parts.entity_chain = {p.hops[0].entity, p.hops[1].rel, p.hops[1].dir, p.hops[1].entity};
    parts.recommendation = {p.hops[1].entity, p.hops[2].rel, p.hops[2].dir, p.hops[2].entity};
    return parts;
}

TypeId GraphBuilder::intern_type(std::string_view name) {
    if (auto it = type_index_.find(name); it != type_index_.end()) return it->second;
    const auto id = static_cast<TypeId>(type_names_.size());
    type_names_.emplace_back(name);
    type_index_.emplace(std::string(name), id);
    return id;
}

RelationId GraphBuilder::intern_relation(std::string_view name) {
    if (auto it = relation_index_.find(name); it != relation_index_.end()) return it->second;
    const auto id = static_cast<RelationId>(relation_names_.size());
    relation_names_.emplace_back(name);
    relation_index_.emplace(std::string(name), id);
    return id;
}

EntityId GraphBuilder::add_entity(std::string_view name, TypeId type, std::string_view display) {
    if (entity_index_.count(name)) {
        throw Error("duplicate entity " + std::string(name));
    }
    if (type < 0 || static_cast<std::size_t>(type) >= type_names_.size()) {
        throw Error("add_entity: unknown type id " + std::to_string(type));
    }
    const auto id = static_cast<EntityId>(entity_names_.size());
    entity_names_.emplace_back(name);
    entity_display_.emplace_back(display.empty() ? name : display);
    entity_types_.push_back(type);
    entity_index_.emplace(std::string(name), id);
    return id;
}

void GraphBuilder::add_triple(EntityId head, RelationId rel, EntityId tail) {
    auto check = [this](EntityId e) {
        if (e < 0 || static_cast<std::size_t>(e) >= entity_names_.size()) {
            throw Error("add_triple: unknown entity id " + std::to_string(e));
        }
    };
    check(head);
    check(tail);
    if (rel < 0 || static_cast<std::size_t>(rel) >= relation_names_.size()) {
        throw Error("add_triple: unknown relation id " + std::to_string(rel));
    }
    triples_.push_back(Triple{head, rel, tail});
}

std::optional<EntityId> GraphBuilder::find_entity(std::string_view name) const {
    auto it = entity_index_.find(name);
    if (it == entity_index_.end()) return std::nullopt;
    return it->second;
}

std::optional<RelationId> GraphBuilder::find_relation(std::string_view name) const {
    auto it = relation_index_.find(name);
    if (it == relation_index_.end()) return std::nullopt;
    return it->second;
}

std::optional<TypeId> GraphBuilder::find_type(std::string_view name) const {
    auto it = type_index_.find(name);
    if (it == type_index_.end()) return std::nullopt;
    return it->second;
}

KnowledgeGraph GraphBuilder::build(RelationId feedback_rel, TypeId user_type,
                                   TypeId product_type) const {
    if (user_type < 0 || static_cast<std::size_t>(user_type) >= type_names_.size()) {
        throw Error("build: unknown user type id " + std::to_string(user_type));
    }
    if (product_type < 0 || static_cast<std::size_t>(product_type) >= type_names_.size()) {
        throw Error("build: unknown product type id " + std::to_string(product_type));
    }
    if (user_type == product_type) {
        throw Error("build: user type and product type must differ");
    }
    if (feedback_rel < 0 || static_cast<std::size_t>(feedback_rel) >= relation_names_.size()) {
        throw Error("build: unknown feedback relation id " + std::to_string(feedback_rel));
    }
    for (const Triple& t : triples_) {
        if (t.rel != feedback_rel) continue;
        if (entity_types_[static_cast<std::size_t>(t.head)] != user_type ||
            entity_types_[static_cast<std::size_t>(t.tail)] != product_type) {
            throw Error("build: feedback triple " + entity_names_[static_cast<std::size_t>(t.head)] +
                        " -> " + entity_names_[static_cast<std::size_t>(t.tail)] +
                        " does not connect a user to a product");
        }
    }

    KnowledgeGraph g;
    g.entity_names_ = entity_names_;
    g.entity_display_ = entity_display_;
    g.entity_types_ = entity_types_;
    g.type_names_ = type_names_;
    g.relation_names_ = relation_names_;
    g.entity_index_ = entity_index_;
    g.relation_index_ = relation_index_;
    g.type_index_ = type_index_;
    g.triples_ = triples_;
    g.user_type_ = user_type;
    g.product_type_ = product_type;
    g.feedback_rel_ = feedback_rel;
    g.index_triples();
    return g;
}

} // namespace pathrec
