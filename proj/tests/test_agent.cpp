#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <vector>

#include "oracles.hpp"
#include "pathrec/agent.hpp"
#include "pathrec/error.hpp"

using namespace pathrec;

namespace {

std::filesystem::path temp_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("pathrec_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

// u0 listened to m0; albums m0/m2 share artist a0, m0/m1 share genre g0
struct Fixture {
    KnowledgeGraph graph;
    EntityId u0 = 0, m0 = 1, m1 = 2, m2 = 3, a0 = 4, g0 = 5;
    RelationId listened = 0, performed = 1, tagged = 2;
};

Fixture make_fixture() {
    Fixture f;
    GraphBuilder b;
    const TypeId ut = b.intern_type("user");
    const TypeId pt = b.intern_type("album");
    const TypeId at = b.intern_type("artist");
    const TypeId gt = b.intern_type("genre");
    b.intern_relation("listened");
    b.intern_relation("performed");
    b.intern_relation("tagged");
    b.add_entity("u0", ut);
    b.add_entity("m0", pt);
    b.add_entity("m1", pt);
    b.add_entity("m2", pt);
    b.add_entity("a0", at);
    b.add_entity("g0", gt);
    b.add_triple(f.a0, f.performed, f.m0);
    b.add_triple(f.a0, f.performed, f.m2);
    b.add_triple(f.g0, f.tagged, f.m0);
    b.add_triple(f.g0, f.tagged, f.m1);
    InteractionLog log;
    log.add(f.u0, f.m0, 100);
    log.finalize();
    f.graph = b.build(f.listened, ut, pt).with_feedback(log);
    return f;
}

// dim 2 table with hand-set components in slot 0
EmbeddingTable hand_table() {
    EmbeddingTable t = init_embeddings(6, 3, 2, 0);
    std::fill(t.entity_vecs.begin(), t.entity_vecs.end(), 0.0);
    std::fill(t.relation_vecs.begin(), t.relation_vecs.end(), 0.0);
    t.entity(0)[0] = 1.0;  // u0
    t.entity(1)[0] = 0.5;  // m0
    t.entity(3)[0] = 0.4;  // m2
    t.entity(4)[0] = 0.2;  // a0
    t.entity_bias[1] = 0.25;
    t.entity_bias[4] = 0.1;
    return t;
}

std::set<Action> as_set(const std::vector<Action>& v) { return {v.begin(), v.end()}; }

} // namespace

TEST_CASE("walk states expose steps and paths") {
    Fixture f = make_fixture();
    AgentState s = initial_state(f.graph, f.u0);
    CHECK(s.step() == 0);
    CHECK(s.current == f.u0);
    CHECK_THROWS_AS(initial_state(f.graph, f.a0), Error);

    s = apply_action(f.graph, s, Action{f.listened, Direction::Forward, f.m0});
    CHECK(s.step() == 1);
    CHECK(s.current == f.m0);
    CHECK(s.path().entity_at(1) == f.m0);
}

TEST_CASE("actions must follow edges and respect the no-repeat rules") {
    Fixture f = make_fixture();
    const AgentState start = initial_state(f.graph, f.u0);
    // not an edge from u0
    CHECK_THROWS_AS(apply_action(f.graph, start, Action{f.performed, Direction::Backward, f.a0}),
                    Error);
    // wrong direction for an existing edge
    CHECK_THROWS_AS(apply_action(f.graph, start, Action{f.listened, Direction::Backward, f.m0}),
                    Error);
    AgentState at_m0 = apply_action(f.graph, start, Action{f.listened, Direction::Forward, f.m0});
    AgentState at_a0 =
        apply_action(f.graph, at_m0, Action{f.performed, Direction::Backward, f.a0});
    // revisiting the linked album
    CHECK_THROWS_AS(apply_action(f.graph, at_a0, Action{f.performed, Direction::Forward, f.m0}),
                    Error);
    // reusing a traversed (relation, direction) pair
    const AgentState token_state{f.u0, f.g0, {Hop{f.tagged, Direction::Forward, f.m1}}};
    CHECK_THROWS_AS(apply_action(f.graph, token_state, Action{f.tagged, Direction::Forward, f.m0}),
                    Error);
}

TEST_CASE("action spaces exclude the walk so far") {
    Fixture f = make_fixture();
    const AgentState start = initial_state(f.graph, f.u0);
    CHECK(as_set(action_space(f.graph, start)) ==
          std::set<Action>{Action{f.listened, Direction::Forward, f.m0}});

    const AgentState at_m0{f.u0, f.m0, {Hop{f.listened, Direction::Forward, f.m0}}};
    // backward listened to u0 is dropped because it revisits the user
    CHECK(as_set(action_space(f.graph, at_m0)) ==
          std::set<Action>{Action{f.performed, Direction::Backward, f.a0},
                           Action{f.tagged, Direction::Backward, f.g0}});

    // a used (tagged, forward) token blocks the only remaining genre edge
    const AgentState at_g0{f.u0, f.g0, {Hop{f.tagged, Direction::Forward, f.m0}}};
    CHECK(action_space(f.graph, at_g0).empty());
}

TEST_CASE("action scores blend relevance with partial walk quality") {
    Fixture f = make_fixture();
    const EmbeddingTable t = hand_table();
    RecencyTable rec;
    rec.set(f.u0, f.m0, 0.6);
    PopularityTable pop;
    pop.set(f.a0, 0.3);
    pop.set(f.g0, 0.8);
    std::set<std::pair<EntityId, RelationId>> seen;
    const PathQualityContext ctx{&rec, &pop, &seen};

    const AgentState start = initial_state(f.graph, f.u0);
    const Action first{f.listened, Direction::Forward, f.m0};
    // relevance(u0, m0) = 1*0.5 + 0.25
    RewardConfig cfg;
    cfg.alpha = 0.0;
    cfg.metrics.lir = true;
    CHECK(score_action(f.graph, t, start, first, cfg, ctx) == doctest::Approx(0.75));
    cfg.alpha = 0.5;
    CHECK(score_action(f.graph, t, start, first, cfg, ctx) ==
          doctest::Approx(0.5 * 0.75 + 0.5 * 0.6));
    cfg.alpha = 1.0;
    CHECK(score_action(f.graph, t, start, first, cfg, ctx) == doctest::Approx(0.6));

    // one hop in: recency + popularity + first-time type bonus
    const AgentState at_m0{f.u0, f.m0, {first}};
    const Action to_artist{f.performed, Direction::Backward, f.a0};
    RewardConfig full;
    full.alpha = 0.5;
    full.metrics.lir = full.metrics.sep = full.metrics.ptd = true;
    // relevance(m0, a0) = 0.5*0.2 + 0.1 = 0.2; quality = 0.6 + 0.3 + 1
    CHECK(score_action(f.graph, t, at_m0, to_artist, full, ctx) ==
          doctest::Approx(0.5 * 0.2 + 0.5 * 1.9));
    seen.insert({f.u0, f.performed});
    CHECK(score_action(f.graph, t, at_m0, to_artist, full, ctx) ==
          doctest::Approx(0.5 * 0.2 + 0.5 * 0.9));
    seen.clear();

    // absent table rows contribute zero
    RecencyTable empty_rec;
    const PathQualityContext sparse{&empty_rec, &pop, &seen};
    RewardConfig lir_only;
    lir_only.alpha = 1.0;
    lir_only.metrics.lir = true;
    CHECK(score_action(f.graph, t, start, first, lir_only, sparse) == 0.0);
}

TEST_CASE("action scoring rejects bad configurations") {
    Fixture f = make_fixture();
    const EmbeddingTable t = hand_table();
    std::set<std::pair<EntityId, RelationId>> seen;
    RecencyTable rec;
    PopularityTable pop;
    const AgentState start = initial_state(f.graph, f.u0);
    const Action first{f.listened, Direction::Forward, f.m0};

    RewardConfig cfg;
    cfg.alpha = 1.5;
    CHECK_THROWS_AS(score_action(f.graph, t, start, first, cfg, {&rec, &pop, &seen}), Error);
    cfg.alpha = 0.5;
    cfg.metrics.lir = true;
    CHECK_THROWS_AS(score_action(f.graph, t, start, first, cfg, {nullptr, &pop, &seen}), Error);
    cfg.metrics = {};
    cfg.metrics.sep = true;
    CHECK_THROWS_AS(score_action(f.graph, t, start, first, cfg, {&rec, nullptr, &seen}), Error);
    cfg.metrics = {};
    cfg.metrics.ptd = true;
    CHECK_THROWS_AS(score_action(f.graph, t, start, first, cfg, {&rec, &pop, nullptr}), Error);
    cfg.metrics = {};

    // action outside the current space
    CHECK_THROWS_AS(
        score_action(f.graph, t, start, Action{f.performed, Direction::Backward, f.a0}, cfg,
                     {&rec, &pop, &seen}),
        Error);
    // walk already complete
    const AgentState done{f.u0, f.m2,
                          {Hop{f.listened, Direction::Forward, f.m0},
                           Hop{f.performed, Direction::Backward, f.a0},
                           Hop{f.performed, Direction::Forward, f.m2}}};
    CHECK_THROWS_AS(score_action(f.graph, t, done, first, cfg, {&rec, &pop, &seen}), Error);
}

TEST_CASE("pruning keeps the top-scored actions and leaves small spaces alone") {
    Fixture f = make_fixture();
    const EmbeddingTable t = hand_table();
    RecencyTable rec;
    PopularityTable pop;
    pop.set(f.a0, 0.3);
    pop.set(f.g0, 0.8);
    std::set<std::pair<EntityId, RelationId>> seen;
    const PathQualityContext ctx{&rec, &pop, &seen};
    const AgentState at_m0{f.u0, f.m0, {Hop{f.listened, Direction::Forward, f.m0}}};
    // deliberately reversed order to show small spaces pass through untouched
    const std::vector<Action> space{Action{f.tagged, Direction::Backward, f.g0},
                                    Action{f.performed, Direction::Backward, f.a0}};

    RewardConfig cfg;
    cfg.alpha = 1.0;
    cfg.metrics.sep = true;
    cfg.prune_sizes = {20, 2, 10};
    CHECK(prune_action_space(f.graph, t, at_m0, space, cfg, ctx) == space);

    cfg.prune_sizes = {20, 1, 10};
    const auto kept = prune_action_space(f.graph, t, at_m0, space, cfg, ctx);
    REQUIRE(kept.size() == 1);
    CHECK(kept[0] == Action{f.tagged, Direction::Backward, f.g0}); // popularity 0.8 beats 0.3

    // equal scores fall back to the smaller action triple
    pop.set(f.a0, 0.8);
    const auto tied = prune_action_space(f.graph, t, at_m0, space, cfg, ctx);
    REQUIRE(tied.size() == 1);
    CHECK(tied[0] == Action{f.performed, Direction::Backward, f.a0});
}

TEST_CASE("reward is zero off the goal states and blended on them") {
    Fixture f = make_fixture();
    const EmbeddingTable t = hand_table();
    RecencyTable rec;
    rec.set(f.u0, f.m0, 0.6);
    PopularityTable pop;
    pop.set(f.a0, 0.3);
    std::set<std::pair<EntityId, RelationId>> seen;
    const PathQualityContext ctx{&rec, &pop, &seen};
    RewardConfig cfg;
    cfg.alpha = 0.5;
    cfg.metrics.lir = cfg.metrics.sep = cfg.metrics.ptd = true;

    const AgentState full{f.u0, f.m2,
                          {Hop{f.listened, Direction::Forward, f.m0},
                           Hop{f.performed, Direction::Backward, f.a0},
                           Hop{f.performed, Direction::Forward, f.m2}}};
    // relevance(u0, m2) = 0.4; quality = 0.6 + 0.3 + 1
    CHECK(reward(f.graph, t, full, cfg, ctx) == doctest::Approx(0.5 * 0.4 + 0.5 * 1.9));

    const AgentState halfway{f.u0, f.a0,
                             {Hop{f.listened, Direction::Forward, f.m0},
                              Hop{f.performed, Direction::Backward, f.a0}}};
    CHECK(reward(f.graph, t, halfway, cfg, ctx) == 0.0);

    AgentState not_product = full;
    not_product.current = f.a0;
    CHECK(reward(f.graph, t, not_product, cfg, ctx) == 0.0);

    cfg.alpha = 0.0;
    CHECK(reward(f.graph, t, full, cfg, ctx) == doctest::Approx(0.4));
}

TEST_CASE("policy forward pass composes the state encoding by hand") {
    EmbeddingTable t = init_embeddings(3, 1, 1, 0);
    t.entity(0)[0] = 2.0;
    t.entity(1)[0] = 3.0;
    t.entity(2)[0] = 5.0;
    t.relation(0)[0] = 7.0;

    PolicyModel m;
    m.dim = 1;
    m.hidden = 1;
    m.w1 = {0.5, 1.0, 0.25};
    m.b1 = {0.1};
    m.w2 = {2.0};
    m.b2 = {-1.0};
    m.w3 = {0.5, -1.0};
    m.b3 = {0.1, 0.2};

    const AgentState state{0, 1,
                           {Hop{0, Direction::Forward, 2}, Hop{0, Direction::Backward, 1}}};
    const PolicyForward f = policy_forward(m, t, state);
    // history mean: ((7 + 5) + (-7 + 3)) / 4 = 2
    CHECK(f.x == std::vector<double>{2.0, 3.0, 2.0});
    CHECK(f.z1[0] == doctest::Approx(0.5 * 2 + 3 + 0.25 * 2 + 0.1));
    CHECK(f.h2[0] == doctest::Approx(2 * 4.6 - 1));
    CHECK(f.q[0] == doctest::Approx(0.5 * 8.2 + 0.1));
    CHECK(f.q[1] == doctest::Approx(-8.2 + 0.2));

    // a negative preactivation is clamped and stops contributing
    m.w2 = {-2.0};
    const PolicyForward g = policy_forward(m, t, state);
    CHECK(g.h2[0] == 0.0);
    CHECK(g.q[0] == doctest::Approx(0.1));
    CHECK(g.q[1] == doctest::Approx(0.2));
}

TEST_CASE("policy probabilities are a masked softmax over action features") {
    EmbeddingTable t = init_embeddings(3, 1, 1, 0);
    t.entity(2)[0] = 5.0;
    t.relation(0)[0] = 7.0;
    const std::vector<double> q{0.3, -0.2};
    const std::vector<Action> actions{Action{0, Direction::Forward, 2},
                                      Action{0, Direction::Backward, 2}};
    const std::vector<double> p = policy_probs(t, q, actions);
    REQUIRE(p.size() == 2);
    // logits: 0.3*7 - 0.2*5 = 1.1 and -0.3*7 - 0.2*5 = -3.1
    const double expect = 1.0 / (1.0 + std::exp(-3.1 - 1.1));
    CHECK(p[0] == doctest::Approx(expect).epsilon(1e-14));
    CHECK(p[0] + p[1] == doctest::Approx(1.0).epsilon(1e-14));

    CHECK(policy_probs(t, q, {}).empty());
    const std::vector<double> bad_q{0.3};
    CHECK_THROWS_AS(policy_probs(t, bad_q, actions), Error);
}

TEST_CASE("log-probability gradient agrees with finite differences") {
    Fixture f = make_fixture();
    const EmbeddingTable t = init_embeddings(6, 3, 4, 3);
    PolicyModel m = init_policy(4, 6, 1);

    const AgentState at_m0{f.u0, f.m0, {Hop{f.listened, Direction::Forward, f.m0}}};
    const std::vector<Action> actions = action_space(f.graph, at_m0);
    REQUIRE(actions.size() == 2);
    const std::size_t chosen = 1;
    const PolicyGradients grads = policy_logprob_gradient(m, t, at_m0, actions, chosen);

    auto logp = [&] {
        const PolicyForward fwd = policy_forward(m, t, at_m0);
        return std::log(policy_probs(t, fwd.q, actions)[chosen]);
    };
    auto check_group = [&](std::vector<double>& params, const std::vector<double>& grad,
                           std::size_t stride) {
        for (std::size_t i = 0; i < params.size(); i += stride) {
            const double fd = oracle::central_diff(params[i], 1e-6, logp);
            CHECK(std::abs(fd - grad[i]) <= 1e-5);
        }
    };
    check_group(m.w1, grads.w1, 5);
    check_group(m.b1, grads.b1, 1);
    check_group(m.w2, grads.w2, 7);
    check_group(m.b2, grads.b2, 1);
    check_group(m.w3, grads.w3, 3);
    check_group(m.b3, grads.b3, 1);

    CHECK_THROWS_AS(policy_logprob_gradient(m, t, at_m0, {}, 0), Error);
    CHECK_THROWS_AS(policy_logprob_gradient(m, t, at_m0, actions, 5), Error);
}

TEST_CASE("policy training is seeded and a zero learning rate is inert") {
    Rng rng(31);
    const KnowledgeGraph g = oracle::random_music_graph(rng);
    const EmbeddingTable t = init_embeddings(g.num_entities(), g.num_relations(), 4, 7);
    RewardConfig cfg; // relevance-only reward
    PolicyTrainOptions opts;
    opts.episodes = 60;
    opts.lr = 5e-3;
    opts.hidden = 8;
    opts.seed = 2;

    TrainStats stats;
    const PolicyModel a = train_policy(g, t, cfg, opts, nullptr, nullptr, &stats);
    const PolicyModel b = train_policy(g, t, cfg, opts, nullptr, nullptr);
    CHECK(a.w1 == b.w1);
    CHECK(a.w3 == b.w3);
    CHECK(stats.episodes == 60);
    CHECK(stats.completed >= 0);
    CHECK(stats.completed <= 60);
    CHECK(std::isfinite(stats.mean_reward));

    opts.lr = 0.0;
    const PolicyModel frozen = train_policy(g, t, cfg, opts, nullptr, nullptr);
    const PolicyModel init = init_policy(4, 8, 2);
    CHECK(frozen.w1 == init.w1);
    CHECK(frozen.w2 == init.w2);
    CHECK(frozen.w3 == init.w3);
}

TEST_CASE("policy training validates its inputs") {
    Rng rng(32);
    const KnowledgeGraph g = oracle::random_music_graph(rng);
    const EmbeddingTable t = init_embeddings(g.num_entities(), g.num_relations(), 4, 7);
    RewardConfig cfg;
    PolicyTrainOptions opts;
    opts.episodes = 1;
    opts.hidden = 4;

    PolicyTrainOptions bad = opts;
    bad.discount = 0.0;
    CHECK_THROWS_AS(train_policy(g, t, cfg, bad, nullptr, nullptr), Error);
    bad = opts;
    bad.baseline_rate = 1.5;
    CHECK_THROWS_AS(train_policy(g, t, cfg, bad, nullptr, nullptr), Error);

    const EmbeddingTable small = init_embeddings(2, g.num_relations(), 4, 7);
    CHECK_THROWS_AS(train_policy(g, small, cfg, opts, nullptr, nullptr), Error);

    RewardConfig needs_rec;
    needs_rec.metrics.lir = true;
    CHECK_THROWS_AS(train_policy(g, t, needs_rec, opts, nullptr, nullptr), Error);
    RewardConfig needs_pop;
    needs_pop.metrics.sep = true;
    CHECK_THROWS_AS(train_policy(g, t, needs_pop, opts, nullptr, nullptr), Error);
}

TEST_CASE("policy checkpoints round-trip and reject corrupt files") {
    const auto dir = temp_dir("agent_io");
    const PolicyModel m = init_policy(3, 4, 11);
    save_policy(m, dir / "policy.bin");
    const PolicyModel back = load_policy(dir / "policy.bin");
    CHECK(back.dim == 3);
    CHECK(back.hidden == 4);
    CHECK(back.w1 == m.w1);
    CHECK(back.b1 == m.b1);
    CHECK(back.w2 == m.w2);
    CHECK(back.b2 == m.b2);
    CHECK(back.w3 == m.w3);
    CHECK(back.b3 == m.b3);

    CHECK_THROWS_AS(load_policy(dir / "missing.bin"), Error);
    std::ofstream bad(dir / "bad.bin", std::ios::binary);
    bad << "NOTAPOLICYFILE";
    bad.close();
    CHECK_THROWS_AS(load_policy(dir / "bad.bin"), Error);
}
