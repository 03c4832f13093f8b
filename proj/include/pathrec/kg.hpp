#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pathrec {

using EntityId = std::int32_t;
using RelationId = std::int32_t;
using TypeId = std::int32_t;

enum class Direction : std::uint8_t { Forward, Backward };

struct Triple {
    EntityId head;
    RelationId rel;
    EntityId tail;
    friend auto operator<=>(const Triple&, const Triple&) = default;
};

// One adjacency entry: a triple seen from one of its endpoints.
struct Edge {
    RelationId rel;
    Direction dir;
    EntityId to;
    friend auto operator<=>(const Edge&, const Edge&) = default;
};

// One movement along a path: the relation, the direction it was traversed in,
// and the entity reached. A backward hop (r, Backward, e) from entity x means
// (e, r, x) is the underlying triple.
struct Hop {
    RelationId rel;
    Direction dir;
    EntityId entity;
    friend auto operator<=>(const Hop&, const Hop&) = default;
};

struct ReasoningPath {
    EntityId origin = -1;
    std::vector<Hop> hops;

    std::size_t length() const { return hops.size(); }
    EntityId entity_at(std::size_t i) const { return i == 0 ? origin : hops[i - 1].entity; }
    EntityId terminal() const { return hops.empty() ? origin : hops.back().entity; }
    friend auto operator<=>(const ReasoningPath&, const ReasoningPath&) = default;
};

// The type of a path is its last relation.
RelationId path_type(const ReasoningPath& p);

// e_1, the experienced product the path hangs off. Requires length >= 1.
EntityId linked_entity(const ReasoningPath& p);

// e_{k-1}, the entity shared between the experienced and the recommended
// product. Requires length >= 2.
EntityId shared_entity(const ReasoningPath& p);

struct Interaction {
    EntityId product;
    std::int64_t timestamp;
    friend auto operator<=>(const Interaction&, const Interaction&) = default;
};

// Per-user interaction lists, chronologically ascending. add() keeps track of
// whether insertions arrived in order; call finalize() after bulk loading to
// stable-sort out-of-order users (input order is kept among equal timestamps).
class InteractionLog {
public:
    void add(EntityId user, EntityId product, std::int64_t timestamp);
    void finalize();
    bool sorted() const { return sorted_; }

    std::span<const Interaction> for_user(EntityId u) const;
    const std::map<EntityId, std::vector<Interaction>>& by_user() const { return by_user_; }
    std::vector<EntityId> users() const;
    std::size_t num_users() const { return by_user_.size(); }
    std::size_t total_interactions() const;
    bool empty() const { return by_user_.empty(); }

private:
    std::map<EntityId, std::vector<Interaction>> by_user_;
    bool sorted_ = true;
};

struct SplitResult {
    InteractionLog train;
    InteractionLog valid;
    InteractionLog test;
    std::vector<EntityId> flagged; // users with fewer than 3 interactions, all assigned to train
};

// Per user with m interactions: the oldest floor(train_frac*m) go to train,
// the next floor((train_frac+valid_frac)*m) - floor(train_frac*m) to valid,
// the remainder to test. Users with fewer than 3 interactions go entirely to
// train and are flagged.
SplitResult chronological_split(const InteractionLog& log, double train_frac = 0.7,
                                double valid_frac = 0.1);

struct PathStep {
    EntityId from;
    RelationId rel;
    Direction dir;
    EntityId to;
};

struct PathParts {
    PathStep linking_interaction; // (e_0, r_1, e_1)
    PathStep entity_chain;        // (e_1, r_2, e_2)
    PathStep recommendation;      // (e_{k-1}, r_k, e_k)
};

class GraphBuilder;

// Immutable triple store with typed entities. Adjacency holds each triple
// twice: forward from its head and backward from its tail. Safe for
// unrestricted concurrent reads once built.
class KnowledgeGraph {
public:
    KnowledgeGraph() = default; // empty; populate through GraphBuilder::build

    std::size_t num_entities() const { return entity_names_.size(); }
    std::size_t num_relations() const { return relation_names_.size(); }
    std::size_t num_types() const { return type_names_.size(); }
    std::size_t num_triples() const { return triples_.size(); }

    const std::string& entity_name(EntityId e) const;
    const std::string& entity_display(EntityId e) const;
    TypeId entity_type(EntityId e) const;
    const std::string& type_name(TypeId t) const;
    const std::string& relation_name(RelationId r) const;

    std::optional<EntityId> find_entity(std::string_view name) const;
    std::optional<RelationId> find_relation(std::string_view name) const;
    std::optional<TypeId> find_type(std::string_view name) const;

    // Sorted by (head, rel, tail), deduplicated.
    const std::vector<Triple>& triples() const { return triples_; }
    std::span<const Edge> edges_from(EntityId e) const;
    bool has_triple(EntityId head, RelationId rel, EntityId tail) const;
    // Number of triples the entity participates in (head or tail side).
    std::size_t degree(EntityId e) const;

    TypeId user_type() const { return user_type_; }
    TypeId product_type() const { return product_type_; }
    RelationId feedback_relation() const { return feedback_rel_; }
    bool is_user(EntityId e) const { return entity_type(e) == user_type_; }
    bool is_product(EntityId e) const { return entity_type(e) == product_type_; }
    const std::vector<EntityId>& users() const { return users_; }
    const std::vector<EntityId>& products() const { return products_; }

    // Copy of this graph with (user, feedback_relation, product) triples added
    // for every interaction in the log.
    KnowledgeGraph with_feedback(const InteractionLog& log) const;

    // True when every hop follows an existing edge in the stated direction and
    // no entity or (relation, direction) token repeats along the path.
    bool valid_path(const ReasoningPath& p) const;

    // Decomposes a 3-hop user-to-product path; throws unless the path has
    // length 3 with a user origin and products at e_1 and e_3.
    PathParts path_parts(const ReasoningPath& p) const;

private:
    friend class GraphBuilder;
    void index_triples();
    void check_entity(EntityId e) const;

    std::vector<std::string> entity_names_;
    std::vector<std::string> entity_display_;
    std::vector<TypeId> entity_types_;
    std::vector<std::string> type_names_;
    std::vector<std::string> relation_names_;
    std::map<std::string, EntityId, std::less<>> entity_index_;
    std::map<std::string, RelationId, std::less<>> relation_index_;
    std::map<std::string, TypeId, std::less<>> type_index_;

    std::vector<Triple> triples_;
    std::vector<std::size_t> adj_offsets_;
    std::vector<Edge> adj_edges_;

    TypeId user_type_ = -1;
    TypeId product_type_ = -1;
    RelationId feedback_rel_ = -1;
    std::vector<EntityId> users_;
    std::vector<EntityId> products_;
};

class GraphBuilder {
public:
    TypeId intern_type(std::string_view name);
    RelationId intern_relation(std::string_view name);
    // Throws on duplicate entity names. Empty display falls back to the name.
    EntityId add_entity(std::string_view name, TypeId type, std::string_view display = {});
    void add_triple(EntityId head, RelationId rel, EntityId tail);

    std::optional<EntityId> find_entity(std::string_view name) const;
    std::optional<RelationId> find_relation(std::string_view name) const;
    std::optional<TypeId> find_type(std::string_view name) const;
    std::size_t num_entities() const { return entity_names_.size(); }
    std::size_t num_relations() const { return relation_names_.size(); }
    std::size_t num_triples() const { return triples_.size(); }

    // Validates ids, deduplicates triples, builds adjacency. Feedback triples
    // must connect user-typed heads to product-typed tails.
    KnowledgeGraph build(RelationId feedback_rel, TypeId user_type, TypeId product_type) const;

private:
    std::vector<std::string> entity_names_;
    std::vector<std::string> entity_display_;
    std::vector<TypeId> entity_types_;
    std::vector<std::string> type_names_;
    std::vector<std::string> relation_names_;
    std::map<std::string, EntityId, std::less<>> entity_index_;
    std::map<std::string, RelationId, std::less<>> relation_index_;
    std::map<std::string, TypeId, std::less<>> type_index_;
    std::vector<Triple> triples_;
};

} // namespace pathrec
