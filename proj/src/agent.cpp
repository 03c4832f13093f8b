#include "pathrec/agent.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>

#include "pathrec/error.hpp"
#include "pathrec/rng.hpp"

namespace pathrec {

namespace {

void check_config(const RewardConfig& config) {
    if (config.alpha < 0.0 || config.alpha > 1.0)
        throw Error("alpha must be in [0, 1]");
    if (config.max_hops < 1) throw Error("max_hops must be at least 1");
    for (int z : config.prune_sizes)
        if (z < 1) throw Error("prune sizes must be at least 1");
}

void check_tables(const RewardConfig& config, const PathQualityContext& ctx) {
    if (config.metrics.lir && ctx.recency == nullptr)
        throw Error("recency table required when shaping with linked-interaction recency");
    if (config.metrics.sep && ctx.popularity == nullptr)
        throw Error("popularity table required when shaping with shared-entity popularity");
    if (config.metrics.ptd && ctx.seen_types == nullptr)
        throw Error("seen-type set required when shaping with path-type diversity");
}

// Quality terms of a (possibly partial) walk; absent table entries count 0.
double partial_quality(const ReasoningPath& path, EntityId user, const RewardConfig& config,
                       const PathQualityContext& ctx) {
    double sum = 0.0;
    int len = static_cast<int>(path.length());
    if (config.metrics.lir && len >= 1) {
        if (auto s = ctx.recency->score(user, path.entity_at(1))) sum += *s;
    }
    if (config.metrics.sep && len >= config.max_hops - 1 && config.max_hops >= 2) {
        if (auto s = ctx.popularity->score(path.entity_at(config.max_hops - 1))) sum += *s;
    }
    if (config.metrics.ptd && len >= 2) {
        if (!ctx.seen_types->contains({user, path_type(path)})) sum += 1.0;
    }
    return sum;
}

double score_action_unchecked(const KnowledgeGraph&, const EmbeddingTable& table,
                              const AgentState& state, const Action& a,
                              const RewardConfig& config, const PathQualityContext& ctx) {
    double rel = table.relevance(state.current, a.entity);
    if (config.alpha == 0.0 || !config.metrics.any()) return (1.0 - config.alpha) * rel;
    ReasoningPath extended{state.user, state.history};
    extended.hops.push_back(a);
    return (1.0 - config.alpha) * rel +
           config.alpha * partial_quality(extended, state.user, config, ctx);
}

} // namespace

AgentState initial_state(const KnowledgeGraph& g, EntityId user) {
    if (!g.is_user(user))
        throw Error("entity " + std::to_string(user) + " is not a user");
    return AgentState{user, user, {}};
}

AgentState apply_action(const KnowledgeGraph& g, const AgentState& state, const Action& a) {
    bool connected = a.dir == Direction::Forward
                         ? g.has_triple(state.current, a.rel, a.entity)
                         : g.has_triple(a.entity, a.rel, state.current);
    if (!connected) throw Error("action does not follow an edge from the current entity");
    if (a.entity == state.user || a.entity == state.current)
        throw Error("action revisits an entity on the walk");
    for (const Hop& h : state.history) {
        if (h.entity == a.entity) throw Error("action revisits an entity on the walk");
        if (h.rel == a.rel && h.dir == a.dir)
            throw Error("action reuses a relation-direction pair");
    }
    AgentState next = state;
    next.history.push_back(a);
    next.current = a.entity;
    return next;
}

std::vector<Action> action_space(const KnowledgeGraph& g, const AgentState& state) {
    std::set<EntityId> visited{state.user, state.current};
    std::set<std::pair<RelationId, Direction>> used;
    for (const Hop& h : state.history) {
        visited.insert(h.entity);
        used.insert({h.rel, h.dir});
    }
    std::vector<Action> out;
    for (const Edge& e : g.edges_from(state.current)) {
        if (visited.contains(e.to)) continue;
        if (used.contains({e.rel, e.dir})) continue;
        out.push_back(Action{e.rel, e.dir, e.to});
    }
    return out;
}

double score_action(const KnowledgeGraph& g, const EmbeddingTable& table,
                    const AgentState& state, const Action& a, const RewardConfig& config,
                    const PathQualityContext& ctx) {
    check_config(config);
    check_tables(config, ctx);
    if (state.step() >= config.max_hops)
        throw Error("walk already has the maximum number of hops");
    std::vector<Action> space = action_space(g, state);
    if (std::find(space.begin(), space.end(), a) == space.end())
        throw Error("action is not available from this state");
    return score_action_unchecked(g, table, state, a, config, ctx);
}

std::vector<Action> prune_action_space(const KnowledgeGraph& g, const EmbeddingTable& table,
                                       const AgentState& state, std::vector<Action> actions,
                                       const RewardConfig& config,
                                       const PathQualityContext& ctx) {
    check_config(config);
    check_tables(config, ctx);
    std::size_t slot = static_cast<std::size_t>(
        std::min(state.step(), static_cast<int>(config.prune_sizes.size()) - 1));
    std::size_t keep = static_cast<std::size_t>(config.prune_sizes[slot]);
    if (actions.size() <= keep) return actions;
    std::vector<double> scores(actions.size());
    for (std::size_t i = 0; i < actions.size(); ++i)
        scores[i] = score_action_unchecked(g, table, state, actions[i], config, ctx);
    std::vector<std::size_t> order(actions.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return actions[a] < actions[b];
    });
    std::vector<Action> kept;
    kept.reserve(keep);
    for (std::size_t i = 0; i < keep; ++i) kept.push_back(actions[order[i]]);
    return kept;
}

double reward(const KnowledgeGraph& g, const EmbeddingTable& table, const AgentState& state,
              const RewardConfig& config, const PathQualityContext& ctx) {
    check_config(config);
    check_tables(config, ctx);
    if (state.step() != config.max_hops || !g.is_product(state.current)) return 0.0;
    double rel = table.relevance(state.user, state.current);
    if (config.alpha == 0.0 || !config.metrics.any()) return (1.0 - config.alpha) * rel;
    return (1.0 - config.alpha) * rel +
           config.alpha * partial_quality(state.path(), state.user, config, ctx);
}

PolicyModel init_policy(int dim, int hidden, std::uint64_t seed) {
    if (dim < 1) throw Error("policy dimension must be positive");
    if (hidden < 1) throw Error("policy hidden width must be positive");
    PolicyModel m;
    m.dim = dim;
    m.hidden = hidden;
    std::size_t in = 3 * static_cast<std::size_t>(dim);
    std::size_t out = 2 * static_cast<std::size_t>(dim);
    std::size_t h = static_cast<std::size_t>(hidden);
    m.w1.resize(h * in);
    m.b1.assign(h, 0.0);
    m.w2.resize(h * h);
    m.b2.assign(h, 0.0);
    m.w3.resize(out * h);
    m.b3.assign(out, 0.0);
    Rng rng(seed);
    double bound1 = 1.0 / std::sqrt(static_cast<double>(in));
    double bound2 = 1.0 / std::sqrt(static_cast<double>(h));
    for (double& x : m.w1) x = rand_uniform(rng, -bound1, bound1);
    for (double& x : m.w2) x = rand_uniform(rng, -bound2, bound2);
    for (double& x : m.w3) x = rand_uniform(rng, -bound2, bound2);
    return m;
}

std::vector<double> action_feature(const EmbeddingTable& table, const Action& a) {
    std::span<const double> r = table.relation(a.rel);
    std::span<const double> e = table.entity(a.entity);
    std::vector<double> f(2 * static_cast<std::size_t>(table.dim));
    double sign = a.dir == Direction::Forward ? 1.0 : -1.0;
    for (int i = 0; i < table.dim; ++i) {
        f[i] = sign * r[i];
        f[table.dim + i] = e[i];
    }
    return f;
}

namespace {

// y = W x + b with W stored row-major (rows x cols)
void affine(const std::vector<double>& w, const std::vector<double>& b,
            std::span<const double> x, std::vector<double>& y) {
    std::size_t rows = b.size();
    std::size_t cols = x.size();
    y.resize(rows);
    for (std::size_t i = 0; i < rows; ++i) {
        double s = b[i];
        const double* row = w.data() + i * cols;
        for (std::size_t j = 0; j < cols; ++j) s += row[j] * x[j];
        y[i] = s;
    }
}

std::vector<double> relu(const std::vector<double>& z) {
    std::vector<double> h(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) h[i] = z[i] > 0.0 ? z[i] : 0.0;
    return h;
}

} // namespace

PolicyForward policy_forward(const PolicyModel& m, const EmbeddingTable& table,
                             const AgentState& state) {
    if (m.empty()) throw Error("policy model is empty");
    if (m.dim != table.dim) throw Error("policy and embedding dimensions differ");
    int d = m.dim;
    PolicyForward f;
    f.x.assign(3 * static_cast<std::size_t>(d), 0.0);
    std::span<const double> u = table.entity(state.user);
    std::span<const double> c = table.entity(state.current);
    std::copy(u.begin(), u.end(), f.x.begin());
    std::copy(c.begin(), c.end(), f.x.begin() + d);
    if (!state.history.empty()) {
        double denom = 2.0 * static_cast<double>(state.history.size());
        for (const Hop& h : state.history) {
            std::span<const double> r = table.relation(h.rel);
            std::span<const double> e = table.entity(h.entity);
            double sign = h.dir == Direction::Forward ? 1.0 : -1.0;
            for (int i = 0; i < d; ++i)
                f.x[2 * d + i] += (sign * r[i] + e[i]) / denom;
        }
    }
    affine(m.w1, m.b1, f.x, f.z1);
    f.h1 = relu(f.z1);
    affine(m.w2, m.b2, f.h1, f.z2);
    f.h2 = relu(f.z2);
    affine(m.w3, m.b3, f.h2, f.q);
    return f;
}

std::vector<double> policy_probs(const EmbeddingTable& table, std::span<const double> query,
                                 std::span<const Action> actions) {
    if (query.size() != 2 * static_cast<std::size_t>(table.dim))
        throw Error("query length does not match embedding dimension");
    std::vector<double> logits(actions.size());
    for (std::size_t i = 0; i < actions.size(); ++i) {
        std::vector<double> f = action_feature(table, actions[i]);
        logits[i] = std::inner_product(f.begin(), f.end(), query.begin(), 0.0);
    }
    if (logits.empty()) return logits;
    double mx = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double& l : logits) {
        l = std::exp(l - mx);
        sum += l;
    }
    for (double& l : logits) l /= sum;
    return logits;
}

namespace {

struct StepRecord {
    PolicyForward fwd;
    std::vector<Action> actions;
    std::vector<double> probs;
    std::size_t chosen = 0;
};

void clear_grads(PolicyGradients& g) {
    auto zero = [](std::vector<double>& v) { std::fill(v.begin(), v.end(), 0.0); };
    zero(g.w1);
    zero(g.b1);
    zero(g.w2);
    zero(g.b2);
    zero(g.w3);
    zero(g.b3);
}

// weight * grad log pi(chosen) for one step, added into grads
void accumulate_step(const PolicyModel& m, const EmbeddingTable& table, const StepRecord& rec,
                     double weight, PolicyGradients& grads) {
    std::size_t d2 = 2 * static_cast<std::size_t>(m.dim);
    std::size_t h = static_cast<std::size_t>(m.hidden);
    std::size_t in = 3 * static_cast<std::size_t>(m.dim);

    // d log pi / d q = f_chosen - sum_a p_a f_a
    std::vector<double> dq(d2, 0.0);
    for (std::size_t a = 0; a < rec.actions.size(); ++a) {
        std::vector<double> f = action_feature(table, rec.actions[a]);
        double coef = (a == rec.chosen ? 1.0 : 0.0) - rec.probs[a];
        for (std::size_t j = 0; j < d2; ++j) dq[j] += coef * f[j];
    }

    for (std::size_t o = 0; o < d2; ++o) {
        grads.b3[o] += weight * dq[o];
        double* row = grads.w3.data() + o * h;
        for (std::size_t i = 0; i < h; ++i) row[i] += weight * dq[o] * rec.fwd.h2[i];
    }
    std::vector<double> dz2(h, 0.0);
    for (std::size_t i = 0; i < h; ++i) {
        if (rec.fwd.z2[i] <= 0.0) continue;
        double s = 0.0;
        for (std::size_t o = 0; o < d2; ++o) s += m.w3[o * h + i] * dq[o];
        dz2[i] = s;
    }
    for (std::size_t i = 0; i < h; ++i) {
        if (dz2[i] == 0.0) continue;
        grads.b2[i] += weight * dz2[i];
        double* row = grads.w2.data() + i * h;
        for (std::size_t j = 0; j < h; ++j) row[j] += weight * dz2[i] * rec.fwd.h1[j];
    }
    std::vector<double> dz1(h, 0.0);
    for (std::size_t j = 0; j < h; ++j) {
        if (rec.fwd.z1[j] <= 0.0) continue;
        double s = 0.0;
        for (std::size_t i = 0; i < h; ++i) s += m.w2[i * h + j] * dz2[i];
        dz1[j] = s;
    }
    for (std::size_t i = 0; i < h; ++i) {
        if (dz1[i] == 0.0) continue;
        grads.b1[i] += weight * dz1[i];
        double* row = grads.w1.data() + i * in;
        for (std::size_t j = 0; j < in; ++j) row[j] += weight * dz1[i] * rec.fwd.x[j];
    }
}

void apply_grads(PolicyModel& m, const PolicyGradients& grads, double lr) {
    auto add = [lr](std::vector<double>& p, const std::vector<double>& g) {
        for (std::size_t i = 0; i < p.size(); ++i) p[i] += lr * g[i];
    };
    add(m.w1, grads.w1);
    add(m.b1, grads.b1);
    add(m.w2, grads.w2);
    add(m.b2, grads.b2);
    add(m.w3, grads.w3);
    add(m.b3, grads.b3);
}

} // namespace

PolicyGradients policy_logprob_gradient(const PolicyModel& m, const EmbeddingTable& table,
                                        const AgentState& state, std::span<const Action> actions,
                                        std::size_t chosen) {
    if (actions.empty()) throw Error("no actions to differentiate over");
    if (chosen >= actions.size()) throw Error("chosen action index out of range");
    StepRecord rec;
    rec.fwd = policy_forward(m, table, state);
    rec.probs = policy_probs(table, rec.fwd.q, actions);
    rec.actions.assign(actions.begin(), actions.end());
    rec.chosen = chosen;
    PolicyGradients grads(m);
    accumulate_step(m, table, rec, 1.0, grads);
    return grads;
}

PolicyModel train_policy(const KnowledgeGraph& g, const EmbeddingTable& table,
                         const RewardConfig& config, const PolicyTrainOptions& opts,
                         const RecencyTable* recency, const PopularityTable* popularity,
                         TrainStats* stats) {
    check_config(config);
    if (opts.episodes < 0) throw Error("episodes must be non-negative");
    if (opts.lr < 0.0) throw Error("learning rate must be non-negative");
    if (opts.discount <= 0.0 || opts.discount > 1.0)
        throw Error("discount must be in (0, 1]");
    if (opts.baseline_rate < 0.0 || opts.baseline_rate > 1.0)
        throw Error("baseline rate must be in [0, 1]");
    if (table.num_entities() != g.num_entities())
        throw Error("embedding table does not cover the graph");
    std::span<const EntityId> users = g.users();
    if (users.empty()) throw Error("graph has no users to train on");
    if (config.metrics.lir && recency == nullptr)
        throw Error("recency table required when shaping with linked-interaction recency");
    if (config.metrics.sep && popularity == nullptr)
        throw Error("popularity table required when shaping with shared-entity popularity");

    PolicyModel model = init_policy(table.dim, opts.hidden, opts.seed);
    Rng rng(~opts.seed);
    std::set<std::pair<EntityId, RelationId>> seen;
    PathQualityContext ctx{recency, popularity, &seen};
    PolicyGradients grads(model);
    double baseline = 0.0;
    long long completed = 0;
    double total_reward = 0.0;

    for (int ep = 0; ep < opts.episodes; ++ep) {
        if (ep % static_cast<int>(users.size()) == 0) seen.clear();
        EntityId user = users[rand_below(rng, users.size())];
        AgentState state = initial_state(g, user);
        std::vector<StepRecord> trajectory;
        for (int step = 0; step < config.max_hops; ++step) {
            std::vector<Action> actions = action_space(g, state);
            if (actions.empty()) break;
            actions = prune_action_space(g, table, state, std::move(actions), config, ctx);
            StepRecord rec;
            rec.fwd = policy_forward(model, table, state);
            rec.probs = policy_probs(table, rec.fwd.q, actions);
            double u = rand_u01(rng);
            double cum = 0.0;
            rec.chosen = actions.size() - 1;
            for (std::size_t i = 0; i < actions.size(); ++i) {
                cum += rec.probs[i];
                if (u < cum) {
                    rec.chosen = i;
                    break;
                }
            }
            Action act = actions[rec.chosen];
            rec.actions = std::move(actions);
            trajectory.push_back(std::move(rec));
            state.history.push_back(act);
            state.current = act.entity;
        }
        double ret = reward(g, table, state, config, ctx);
        bool eligible = state.step() == config.max_hops && g.is_product(state.current);
        if (eligible) {
            ++completed;
            seen.insert({user, path_type(state.path())});
        }
        total_reward += ret;
        if (!trajectory.empty() && opts.lr > 0.0) {
            clear_grads(grads);
            std::size_t T = trajectory.size();
            for (std::size_t t = 0; t < T; ++t) {
                double adv = std::pow(opts.discount, static_cast<double>(T - 1 - t)) *
                             (ret - baseline);
                accumulate_step(model, table, trajectory[t], adv, grads);
            }
            apply_grads(model, grads, opts.lr);
        }
        baseline = (1.0 - opts.baseline_rate) * baseline + opts.baseline_rate * ret;
    }
    if (stats) {
        stats->episodes = opts.episodes;
        stats->completed = static_cast<int>(completed);
        stats->mean_reward = opts.episodes > 0 ? total_reward / opts.episodes : 0.0;
    }
    return model;
}

namespace {

constexpr char kPolicyMagic[8] = {'P', 'R', 'P', 'O', 'L', 'I', 'C', 'Y'};
constexpr std::uint32_t kPolicyVersion = 1;

void write_block(std::ofstream& out, const std::vector<double>& v) {
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(double)));
}

void read_block(std::ifstream& in, std::vector<double>& v, std::size_t n,
                const std::filesystem::path& file) {
    v.resize(n);
    in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
    if (!in) throw Error(file.string() + ": truncated policy file");
}

} // namespace

void save_policy(const PolicyModel& m, const std::filesystem::path& file) {
    if (m.empty()) throw Error("refusing to save an empty policy");
    std::ofstream out(file, std::ios::binary);
    if (!out) throw Error("cannot open " + file.string() + " for writing");
    out.write(kPolicyMagic, sizeof(kPolicyMagic));
    std::uint32_t version = kPolicyVersion;
    std::int32_t dim = m.dim;
    std::int32_t hidden = m.hidden;
    out.write(reinterpret_cast<const char*>(&version), sizeof(version));
    out.write(reinterpret_cast<const char*>(&dim), sizeof(dim));
    out.write(reinterpret_cast<const char*>(&hidden), sizeof(hidden));
    write_block(out, m.w1);
    write_block(out, m.b1);
    write_block(out, m.w2);
    write_block(out, m.b2);
    write_block(out, m.w3);
    write_block(out, m.b3);
    if (!out) throw Error("failed writing " + file.string());
}

PolicyModel load_policy(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw Error("cannot open " + file.string());
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kPolicyMagic, sizeof(magic)) != 0)
        throw Error(file.string() + ": not a policy file");
    std::uint32_t version = 0;
    std::int32_t dim = 0;
    std::int32_t hidden = 0;
    in.read(reinterpret_cast<char*>(&version), sizeof(version));
    in.read(reinterpret_cast<char*>(&dim), sizeof(dim));
    in.read(reinterpret_cast<char*>(&hidden), sizeof(hidden));
    if (!in || version != kPolicyVersion)
        throw Error(file.string() + ": unsupported policy version");
    if (dim < 1 || hidden < 1) throw Error(file.string() + ": corrupt policy header");
    PolicyModel m;
    m.dim = dim;
    m.hidden = hidden;
    std::size_t in_dim = 3 * static_cast<std::size_t>(dim);
    std::size_t out_dim = 2 * static_cast<std::size_t>(dim);
    std::size_t h = static_cast<std::size_t>(hidden);
    read_block(in, m.w1, h * in_dim, file);
    read_block(in, m.b1, h, file);
    read_block(in, m.w2, h * h, file);
    read_block(in, m.b2, h, file);
    read_block(in, m.w3, out_dim * h, file);
    read_block(in, m.b3, out_dim, file);
    return m;
}

} // namespace pathrec
