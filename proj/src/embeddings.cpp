#include "pathrec/embeddings.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <string>

#include "pathrec/error.hpp"
#include "pathrec/rng.hpp"

namespace pathrec {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

void check_entity(const EmbeddingTable& t, EntityId e) {
    if (e < 0 || static_cast<std::size_t>(e) >= t.num_entities())
        throw Error("embedding table has no entity " + std::to_string(e));
}

void check_relation(const EmbeddingTable& t, RelationId r) {
    if (r < 0 || static_cast<std::size_t>(r) >= t.num_relations())
        throw Error("embedding table has no relation " + std::to_string(r));
}

void project_to_unit_ball(std::span<double> v) {
    double norm2 = dot(v, v);
    if (norm2 > 1.0) {
        double inv = 1.0 / std::sqrt(norm2);
        for (double& x : v) x *= inv;
    }
}

} // namespace

std::span<const double> EmbeddingTable::entity(EntityId e) const {
    check_entity(*this, e);
    return {entity_vecs.data() + static_cast<std::size_t>(e) * dim, static_cast<std::size_t>(dim)};
}

std::span<double> EmbeddingTable::entity(EntityId e) {
    check_entity(*this, e);
    return {entity_vecs.data() + static_cast<std::size_t>(e) * dim, static_cast<std::size_t>(dim)};
}

std::span<const double> EmbeddingTable::relation(RelationId r) const {
    check_relation(*this, r);
    return {relation_vecs.data() + static_cast<std::size_t>(r) * dim,
            static_cast<std::size_t>(dim)};
}

std::span<double> EmbeddingTable::relation(RelationId r) {
    check_relation(*this, r);
    return {relation_vecs.data() + static_cast<std::size_t>(r) * dim,
            static_cast<std::size_t>(dim)};
}

double EmbeddingTable::bias(EntityId e) const {
    check_entity(*this, e);
    return entity_bias[static_cast<std::size_t>(e)];
}

double EmbeddingTable::relevance(EntityId head, EntityId tail) const {
    return dot(entity(head), entity(tail)) + bias(tail);
}

double EmbeddingTable::triple_score(EntityId head, RelationId rel, EntityId tail) const {
    std::span<const double> h = entity(head);
    std::span<const double> r = relation(rel);
    std::span<const double> t = entity(tail);
    double s = 0.0;
    for (int i = 0; i < dim; ++i) s += (h[i] + r[i]) * t[i];
    return s + bias(tail);
}

EmbeddingTable init_embeddings(std::size_t num_entities, std::size_t num_relations, int dim,
                               std::uint64_t seed) {
    if (dim <= 0) throw Error("embedding dimension must be positive");
    EmbeddingTable t;
    t.dim = dim;
    t.entity_vecs.resize(num_entities * static_cast<std::size_t>(dim));
    t.entity_bias.assign(num_entities, 0.0);
    t.relation_vecs.resize(num_relations * static_cast<std::size_t>(dim));
    double bound = 6.0 / std::sqrt(static_cast<double>(dim));
    Rng rng(seed);
    for (double& x : t.entity_vecs) x = rand_uniform(rng, -bound, bound);
    for (double& x : t.relation_vecs) x = rand_uniform(rng, -bound, bound);
    return t;
}

double margin_pair_loss(const EmbeddingTable& table, const Triple& pos, const Triple& neg,
                        double margin) {
    double s_pos = table.triple_score(pos.head, pos.rel, pos.tail);
    double s_neg = table.triple_score(neg.head, neg.rel, neg.tail);
    return std::max(0.0, margin - s_pos + s_neg);
}

void margin_pair_grad(const EmbeddingTable& table, const Triple& pos, const Triple& neg,
                      double margin, std::span<double> grad_entity_vecs,
                      std::span<double> grad_entity_bias, std::span<double> grad_relation_vecs) {
    if (grad_entity_vecs.size() != table.entity_vecs.size() ||
        grad_entity_bias.size() != table.entity_bias.size() ||
        grad_relation_vecs.size() != table.relation_vecs.size())
        throw Error("gradient buffers do not match embedding table shape");
    if (margin_pair_loss(table, pos, neg, margin) <= 0.0) return;
    int d = table.dim;
    auto ent_grad = [&](EntityId e) {
        return grad_entity_vecs.subspan(static_cast<std::size_t>(e) * d,
                                        static_cast<std::size_t>(d));
    };
    auto rel_grad = [&](RelationId r) {
        return grad_relation_vecs.subspan(static_cast<std::size_t>(r) * d,
                                          static_cast<std::size_t>(d));
    };
    // loss = margin - s_pos + s_neg on the active branch
    std::span<const double> ph = table.entity(pos.head);
    std::span<const double> pr = table.relation(pos.rel);
    std::span<const double> pt = table.entity(pos.tail);
    auto gph = ent_grad(pos.head);
    auto gpr = rel_grad(pos.rel);
    auto gpt = ent_grad(pos.tail);
    for (int i = 0; i < d; ++i) {
        gph[i] -= pt[i];
        gpr[i] -= pt[i];
        gpt[i] -= ph[i] + pr[i];
    }
    grad_entity_bias[static_cast<std::size_t>(pos.tail)] -= 1.0;

    std::span<const double> nh = table.entity(neg.head);
    std::span<const double> nr = table.relation(neg.rel);
    std::span<const double> nt = table.entity(neg.tail);
    auto gnh = ent_grad(neg.head);
    auto gnr = rel_grad(neg.rel);
    auto gnt = ent_grad(neg.tail);
    for (int i = 0; i < d; ++i) {
        gnh[i] += nt[i];
        gnr[i] += nt[i];
        gnt[i] += nh[i] + nr[i];
    }
    grad_entity_bias[static_cast<std::size_t>(neg.tail)] += 1.0;
}

EmbeddingTable train_embeddings(const KnowledgeGraph& g, const EmbeddingTrainOptions& opts) {
    if (opts.epochs < 0) throw Error("epochs must be non-negative");
    if (opts.lr < 0.0) throw Error("learning rate must be non-negative");
    if (opts.negatives_per_positive < 1) throw Error("need at least one negative per positive");
    if (opts.margin <= 0.0) throw Error("margin must be positive");
    if (g.num_entities() == 0) throw Error("cannot train embeddings on an empty graph");

    EmbeddingTable table = init_embeddings(g.num_entities(), g.num_relations(), opts.dim, opts.seed);
    const std::vector<Triple>& triples = g.triples();
    if (triples.empty() || opts.epochs == 0 || opts.lr == 0.0) return table;

    Rng rng(~opts.seed);
    std::vector<std::size_t> order(triples.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::size_t n_ent = g.num_entities();
    int d = table.dim;
    std::vector<double> head_plus_rel(static_cast<std::size_t>(d));
    std::vector<double> tail_old(static_cast<std::size_t>(d));
    std::vector<double> neg_tail_old(static_cast<std::size_t>(d));

    for (int epoch = 0; epoch < opts.epochs; ++epoch) {
        shuffle(order, rng);
        for (std::size_t idx : order) {
            const Triple& pos = triples[idx];
            for (int k = 0; k < opts.negatives_per_positive; ++k) {
                EntityId neg_tail = pos.tail;
                for (int attempt = 0; attempt < 200; ++attempt) {
                    EntityId cand = static_cast<EntityId>(rand_below(rng, n_ent));
                    if (cand != pos.tail && !g.has_triple(pos.head, pos.rel, cand)) {
                        neg_tail = cand;
                        break;
                    }
                }
                if (neg_tail == pos.tail) continue; // graph too dense to corrupt
                double s_pos = table.triple_score(pos.head, pos.rel, pos.tail);
                double s_neg = table.triple_score(pos.head, pos.rel, neg_tail);
                if (opts.margin - s_pos + s_neg <= 0.0) continue;

                auto h = table.entity(pos.head);
                auto r = table.relation(pos.rel);
                auto t = table.entity(pos.tail);
                auto t_neg = table.entity(neg_tail);
                for (int i = 0; i < d; ++i) {
                    head_plus_rel[i] = h[i] + r[i];
                    tail_old[i] = t[i];
                    neg_tail_old[i] = t_neg[i];
                }
                for (int i = 0; i < d; ++i) {
                    double push = opts.lr * (tail_old[i] - neg_tail_old[i]);
                    h[i] += push;
                    r[i] += push;
                    t[i] += opts.lr * head_plus_rel[i];
                    t_neg[i] -= opts.lr * head_plus_rel[i];
                }
                table.entity_bias[static_cast<std::size_t>(pos.tail)] += opts.lr;
                table.entity_bias[static_cast<std::size_t>(neg_tail)] -= opts.lr;
                project_to_unit_ball(h);
                project_to_unit_ball(t);
                project_to_unit_ball(t_neg);
            }
        }
    }
    return table;
}

void save_embeddings(const EmbeddingTable& table, const std::filesystem::path& file) {
    std::ofstream out(file);
    if (!out) throw Error("cannot open " + file.string() + " for writing");
    out << std::setprecision(17);
    out << table.dim << '\t' << table.num_entities() << '\t' << table.num_relations() << '\n';
    for (std::size_t e = 0; e < table.num_entities(); ++e) {
        for (int i = 0; i < table.dim; ++i)
            out << table.entity_vecs[e * table.dim + i] << '\t';
        out << table.entity_bias[e] << '\n';
    }
    for (std::size_t r = 0; r < table.num_relations(); ++r) {
        for (int i = 0; i < table.dim; ++i) {
            if (i) out << '\t';
            out << table.relation_vecs[r * table.dim + i];
        }
        out << '\n';
    }
    if (!out) throw Error("failed writing " + file.string());
}

namespace {

std::vector<double> parse_row(const std::string& line, const std::filesystem::path& file,
                              std::size_t lineno, std::size_t expect) {
    std::vector<double> vals;
    vals.reserve(expect);
    std::size_t pos = 0;
    while (pos <= line.size()) {
        std::size_t tab = line.find('\t', pos);
        std::string_view field(line.data() + pos,
                               (tab == std::string::npos ? line.size() : tab) - pos);
        double v = 0.0;
        auto [p, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
        if (ec != std::errc{} || p != field.data() + field.size())
            throw Error(file.string() + ":" + std::to_string(lineno) + ": bad number '" +
                        std::string(field) + "'");
        vals.push_back(v);
        if (tab == std::string::npos) break;
        pos = tab + 1;
    }
    if (vals.size() != expect)
        throw Error(file.string() + ":" + std::to_string(lineno) + ": expected " +
                    std::to_string(expect) + " fields, got " + std::to_string(vals.size()));
    return vals;
}

} // namespace

EmbeddingTable load_embeddings(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw Error("cannot open " + file.string());
    std::string line;
    if (!std::getline(in, line)) throw Error(file.string() + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream header(line);
    long long dim = 0, n_ent = 0, n_rel = 0;
    if (!(header >> dim >> n_ent >> n_rel) || dim <= 0 || n_ent < 0 || n_rel < 0)
        throw Error(file.string() + ": bad header '" + line + "'");
    EmbeddingTable t;
    t.dim = static_cast<int>(dim);
    t.entity_vecs.reserve(static_cast<std::size_t>(n_ent * dim));
    t.entity_bias.reserve(static_cast<std::size_t>(n_ent));
    t.relation_vecs.reserve(static_cast<std::size_t>(n_rel * dim));
    std::size_t lineno = 1;
    for (long long e = 0; e < n_ent; ++e) {
        if (!std::getline(in, line)) throw Error(file.string() + ": truncated entity rows");
        if (!line.empty() && line.back() == '\r') line.pop_back();
        ++lineno;
        std::vector<double> vals = parse_row(line, file, lineno, static_cast<std::size_t>(dim) + 1);
        t.entity_vecs.insert(t.entity_vecs.end(), vals.begin(), vals.end() - 1);
        t.entity_bias.push_back(vals.back());
    }
    for (long long r = 0; r < n_rel; ++r) {
        if (!std::getline(in, line)) throw Error(file.string() + ": truncated relation rows");
        if (!line.empty() && line.back() == '\r') line.pop_back();
        ++lineno;
        std::vector<double> vals = parse_row(line, file, lineno, static_cast<std::size_t>(dim));
        t.relation_vecs.insert(t.relation_vecs.end(), vals.begin(), vals.end());
    }
    return t;
}

} // namespace pathrec
