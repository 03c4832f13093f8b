#include "pathrec/pipeline.hpp"

#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "pathrec/error.hpp"
#include "pathrec/explain.hpp"
#include "pathrec/jsonl.hpp"
#include "pathrec/rerank.hpp"
#include "pathrec/sampler.hpp"

namespace pathrec {

namespace {

using ordered_json = nlohmann::ordered_json;

void require_file(const std::filesystem::path& file, const std::string& producer) {
    if (!std::filesystem::exists(file))
        throw Error(file.string() + " not found; run the " + producer + " stage first");
}

void write_meta(const std::filesystem::path& artifact, const Config& config,
                const std::string& stage, ordered_json extra = ordered_json::object()) {
    ordered_json j;
    j["format_version"] = 1;
    j["stage"] = stage;
    for (auto& [key, value] : extra.items()) j[key] = value;
    ordered_json cfg = ordered_json::object();
    for (const auto& [k, v] : config.entries()) cfg[k] = v;
    j["config"] = std::move(cfg);
    std::filesystem::path meta = artifact;
    meta += ".meta.json";
    std::ofstream out(meta);
    if (!out) throw Error("cannot open " + meta.string() + " for writing");
    out << j.dump(2) << '\n';
}

LoadOptions load_options(const Config& config) {
    LoadOptions opts;
    opts.feedback_relation = config.get("feedback_relation");
    opts.min_relation_count = config.get_int_or("min_relation_count", 200);
    return opts;
}

double config_alpha(const Config& config, const std::string& key) {
    double a = config.get_double_or(key, 0.0);
    if (a < 0.0 || a > 1.0) throw Error("config key '" + key + "' must be in [0, 1]");
    return a;
}

RewardConfig reward_config(const Config& config) {
    RewardConfig rc;
    rc.alpha = config_alpha(config, "alpha_in");
    rc.metrics = parse_metric_set(config.get_or("metrics_in", ""));
    rc.max_hops = static_cast<int>(config.get_int_or("k", 3));
    rc.prune_sizes = {static_cast<int>(config.get_int_or("z1", 20)),
                      static_cast<int>(config.get_int_or("z2", 10)),
                      static_cast<int>(config.get_int_or("z3", 10))};
    return rc;
}

struct Tables {
    RecencyTable recency;
    PopularityTable popularity;
};

Tables build_tables(const Config& config, const InteractionLog& train_log,
                    const KnowledgeGraph& graph_with_feedback) {
    Tables t;
    t.recency = RecencyTable::build(train_log, config.get_double_or("beta_ir", 0.3));
    t.popularity =
        PopularityTable::build(graph_with_feedback, config.get_double_or("beta_ep", 0.3));
    return t;
}

InteractionLog load_train_log(const Workspace& ws, const KnowledgeGraph& g) {
    require_file(ws.train(), "split");
    return read_interactions(ws.train(), g);
}

std::filesystem::path latest_run_file(const Workspace& ws) {
    for (const std::filesystem::path& p : {ws.explained(), ws.reranked(), ws.recs()})
        if (std::filesystem::exists(p)) return p;
    throw Error("no recommendation file in " + ws.dir.string() + "; run the recommend stage first");
}

std::set<EntityId> experienced_products(const InteractionLog& log, EntityId user) {
    std::set<EntityId> out;
    for (const Interaction& it : log.for_user(user)) out.insert(it.product);
    return out;
}

CandidateSet to_candidate_set(const std::vector<RecEntry>& entries) {
    CandidateSet cands;
    for (const RecEntry& e : entries) {
        cands.paths.push_back(e.path);
        cands.probs.push_back(e.prob);
        cands.relevance.push_back(e.relevance);
    }
    return cands;
}

} // namespace

MetricSet parse_metric_set(const std::string& csv) {
    MetricSet m;
    std::size_t pos = 0;
    while (pos <= csv.size()) {
        std::size_t comma = csv.find(',', pos);
        std::string_view token(csv.data() + pos,
                               (comma == std::string::npos ? csv.size() : comma) - pos);
        while (!token.empty() && (token.front() == ' ' || token.front() == '\t'))
            token.remove_prefix(1);
        while (!token.empty() && (token.back() == ' ' || token.back() == '\t'))
            token.remove_suffix(1);
        if (!token.empty()) {
            if (token == "lir")
                m.lir = true;
            else if (token == "sep")
                m.sep = true;
            else if (token == "ptd")
                m.ptd = true;
            else if (token == "ptc")
                m.ptc = true;
            else
                throw Error("unknown metric '" + std::string(token) +
                            "' (expected lir, sep, ptd, ptc)");
        }
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return m;
}

Dataset load_workspace(const Config& config, const Workspace& ws) {
    require_file(ws.interactions(), "ingest");
    require_file(ws.graph(), "ingest");
    require_file(ws.entities(), "ingest");
    return load_dataset(ws.interactions(), ws.graph(), ws.entities(), load_options(config));
}

IngestSummary run_ingest(const Config& config, const Workspace& ws) {
    std::filesystem::path interactions = config.get("interactions_file");
    std::filesystem::path kg = config.get("kg_file");
    std::filesystem::path entities = config.get("entities_file");
    Dataset ds = load_dataset(interactions, kg, entities, load_options(config));
    std::filesystem::create_directories(ws.dir);
    write_graph(ds.graph, ws.graph(), ws.entities());
    write_interactions(ds.interactions, ds.graph, ws.interactions());

    IngestSummary s;
    s.entities = ds.graph.num_entities();
    s.triples = ds.graph.num_triples();
    s.relations = ds.graph.num_relations();
    s.users = ds.interactions.num_users();
    s.interactions = ds.interactions.total_interactions();
    s.info = ds.info;
    ordered_json extra{{"entities", s.entities},
                       {"triples", s.triples},
                       {"relations", s.relations},
                       {"users", s.users},
                       {"interactions", s.interactions},
                       {"duplicate_triples", s.info.duplicate_triples},
                       {"removed_relations", s.info.removed_relations},
                       {"removed_triples", s.info.removed_triples},
                       {"dropped_interactions", s.info.dropped_interactions}};
    write_meta(ws.graph(), config, "ingest", extra);
    return s;
}

SplitSummary run_split(const Config& config, const Workspace& ws) {
    Dataset ds = load_workspace(config, ws);
    double train_frac = config.get_double_or("train_frac", 0.7);
    double valid_frac = config.get_double_or("valid_frac", 0.1);
    SplitResult split = chronological_split(ds.interactions, train_frac, valid_frac);
    write_interactions(split.train, ds.graph, ws.train());
    write_interactions(split.valid, ds.graph, ws.valid());
    write_interactions(split.test, ds.graph, ws.test());

    SplitSummary s;
    s.train = split.train.total_interactions();
    s.valid = split.valid.total_interactions();
    s.test = split.test.total_interactions();
    s.flagged_users = split.flagged.size();
    write_meta(ws.train(), config, "split",
               {{"train", s.train},
                {"valid", s.valid},
                {"test", s.test},
                {"flagged_users", s.flagged_users}});
    return s;
}

std::filesystem::path run_train_embeddings(const Config& config, const Workspace& ws) {
    Dataset ds = load_workspace(config, ws);
    InteractionLog train_log = load_train_log(ws, ds.graph);
    KnowledgeGraph g = ds.graph.with_feedback(train_log);

    EmbeddingTrainOptions opts;
    opts.dim = static_cast<int>(config.get_int_or("dim", 64));
    opts.epochs = static_cast<int>(config.get_int_or("epochs", 30));
    opts.lr = config.get_double_or("lr_embed", 0.01);
    opts.negatives_per_positive = static_cast<int>(config.get_int_or("negatives", 1));
    opts.margin = config.get_double_or("margin", 1.0);
    opts.seed = static_cast<std::uint64_t>(config.get_int_or("seed", 0));
    EmbeddingTable table = train_embeddings(g, opts);
    save_embeddings(table, ws.embeddings());
    write_meta(ws.embeddings(), config, "train-embeddings",
               {{"dim", table.dim},
                {"entities", table.num_entities()},
                {"relations", table.num_relations()},
                {"triples", g.num_triples()}});
    return ws.embeddings();
}

TrainStats run_train_agent(const Config& config, const Workspace& ws) {
    Dataset ds = load_workspace(config, ws);
    InteractionLog train_log = load_train_log(ws, ds.graph);
    KnowledgeGraph g = ds.graph.with_feedback(train_log);
    require_file(ws.embeddings(), "train-embeddings");
    EmbeddingTable table = load_embeddings(ws.embeddings());
    Tables tables = build_tables(config, train_log, g);

    RewardConfig rc = reward_config(config);
    PolicyTrainOptions opts;
    opts.episodes = static_cast<int>(config.get_int_or("episodes", 10000));
    opts.lr = config.get_double_or("lr_policy", 5e-4);
    opts.discount = config.get_double_or("discount", 0.99);
    opts.baseline_rate = config.get_double_or("baseline_rate", 0.05);
    opts.hidden = static_cast<int>(config.get_int_or("hidden", 128));
    opts.seed = static_cast<std::uint64_t>(config.get_int_or("seed", 0));

    TrainStats stats;
    PolicyModel model =
        train_policy(g, table, rc, opts, &tables.recency, &tables.popularity, &stats);
    save_policy(model, ws.policy());
    write_meta(ws.policy(), config, "train-agent",
               {{"episodes", stats.episodes},
                {"completed", stats.completed},
                {"mean_reward", stats.mean_reward}});
    return stats;
}

RecommendSummary run_recommend(const Config& config, const Workspace& ws,
                               const std::optional<std::string>& only_user,
                               std::optional<std::filesystem::path> out) {
    Dataset ds = load_workspace(config, ws);
    InteractionLog train_log = load_train_log(ws, ds.graph);
    KnowledgeGraph g = ds.graph.with_feedback(train_log);
    require_file(ws.embeddings(), "train-embeddings");
    require_file(ws.policy(), "train-agent");
    EmbeddingTable table = load_embeddings(ws.embeddings());
    PolicyModel model = load_policy(ws.policy());

    int hops = static_cast<int>(config.get_int_or("k", 3));
    std::array<int, 3> beam{static_cast<int>(config.get_int_or("z1", 20)),
                            static_cast<int>(config.get_int_or("z2", 10)),
                            static_cast<int>(config.get_int_or("z3", 10))};
    std::size_t n = static_cast<std::size_t>(config.get_int_or("n", 10));

    std::vector<EntityId> targets;
    if (only_user) {
        std::optional<EntityId> u = g.find_entity(*only_user);
        if (!u || !g.is_user(*u)) throw Error("unknown user '" + *only_user + "'");
        targets.push_back(*u);
    } else {
        targets = train_log.users();
    }

    std::vector<UserRecord> records;
    RecommendSummary summary;
    for (EntityId user : targets) {
        CandidateSet cands = sample_candidates(g, model, table, user, hops, beam);
        std::set<EntityId> exclude = experienced_products(train_log, user);
        std::vector<std::size_t> selected = select_best_paths(cands);
        RankedList ranked = top_n(cands, selected, n, exclude);

        UserRecord rec;
        rec.user = user;
        rec.flagged = ranked.flagged;
        for (std::size_t idx : ranked.indices)
            rec.recs.push_back(RecEntry{cands.paths[idx], cands.probs[idx],
                                        cands.relevance[idx], {}});
        for (std::size_t i = 0; i < cands.size(); ++i) {
            if (exclude.contains(cands.paths[i].terminal())) continue;
            rec.candidates.push_back(
                RecEntry{cands.paths[i], cands.probs[i], cands.relevance[i], {}});
        }
        if (rec.flagged) ++summary.flagged;
        ++summary.users;
        records.push_back(std::move(rec));
    }
    std::filesystem::path out_file = out.value_or(ws.recs());
    write_records(out_file, records, g);
    write_meta(out_file, config, "recommend",
               {{"users", summary.users}, {"flagged", summary.flagged}});
    return summary;
}

RecommendSummary run_rerank(const Config& config, const Workspace& ws,
                            std::optional<std::filesystem::path> in,
                            std::optional<std::filesystem::path> out) {
    Dataset ds = load_workspace(config, ws);
    InteractionLog train_log = load_train_log(ws, ds.graph);
    KnowledgeGraph g = ds.graph.with_feedback(train_log);
    std::filesystem::path in_file = in.value_or(ws.recs());
    require_file(in_file, "recommend");
    std::vector<UserRecord> records = read_records(in_file, g);
    Tables tables = build_tables(config, train_log, g);

    RerankConfig rc;
    rc.alpha = config_alpha(config, "alpha_post");
    rc.metrics = parse_metric_set(config.get_or("metrics_post", ""));
    rc.n = static_cast<std::size_t>(config.get_int_or("n", 10));
    int num_relation_types = static_cast<int>(g.num_relations());

    RecommendSummary summary;
    for (UserRecord& rec : records) {
        const std::vector<RecEntry>& pool = rec.candidates.empty() ? rec.recs : rec.candidates;
        if (pool.empty()) {
            rec.flagged = true;
            ++summary.flagged;
            ++summary.users;
            continue;
        }
        CandidateSet cands = to_candidate_set(pool);
        RankedList ranked = rerank(cands, rc, &tables.recency, &tables.popularity,
                                   num_relation_types);
        rec.recs.clear();
        for (std::size_t idx : ranked.indices)
            rec.recs.push_back(RecEntry{cands.paths[idx], cands.probs[idx],
                                        cands.relevance[idx], {}});
        rec.flagged = ranked.flagged;
        if (rec.flagged) ++summary.flagged;
        ++summary.users;
    }
    std::filesystem::path out_file = out.value_or(ws.reranked());
    write_records(out_file, records, g);
    write_meta(out_file, config, "rerank",
               {{"users", summary.users}, {"flagged", summary.flagged}});
    return summary;
}

ExplainSummary run_explain(const Config& config, const Workspace& ws,
                           std::optional<std::filesystem::path> in,
                           std::optional<std::filesystem::path> out) {
    Dataset ds = load_workspace(config, ws);
    std::filesystem::path in_file = in.value_or(std::filesystem::path{});
    if (in_file.empty()) in_file = latest_run_file(ws);
    require_file(in_file, "recommend");
    // feedback edges are needed to resolve paths that walk through users
    InteractionLog train_log = load_train_log(ws, ds.graph);
    KnowledgeGraph g = ds.graph.with_feedback(train_log);
    std::vector<UserRecord> records = read_records(in_file, g);

    ExplainSummary summary;
    for (UserRecord& rec : records) {
        ++summary.records;
        for (RecEntry& entry : rec.recs) {
            entry.explanation = render_explanation(entry.path, g);
            ++summary.explanations;
        }
    }
    std::filesystem::path out_file = out.value_or(ws.explained());
    write_records(out_file, records, g);
    write_meta(out_file, config, "explain",
               {{"records", summary.records}, {"explanations", summary.explanations}});
    return summary;
}

RunReport run_evaluate(const Config& config, const Workspace& ws,
                       std::optional<std::filesystem::path> run_file,
                       std::optional<std::filesystem::path> test_file) {
    Dataset ds = load_workspace(config, ws);
    InteractionLog train_log = load_train_log(ws, ds.graph);
    KnowledgeGraph g = ds.graph.with_feedback(train_log);
    std::filesystem::path in_file = run_file.value_or(std::filesystem::path{});
    if (in_file.empty()) in_file = latest_run_file(ws);
    require_file(in_file, "recommend");
    std::filesystem::path tf = test_file.value_or(ws.test());
    require_file(tf, "split");
    InteractionLog test_log = read_interactions(tf, ds.graph);
    std::vector<UserRecord> records = read_records(in_file, g);
    Tables tables = build_tables(config, train_log, g);

    std::vector<UserPaths> runs;
    for (const UserRecord& rec : records) {
        UserPaths up;
        up.user = rec.user;
        for (const RecEntry& e : rec.recs) up.paths.push_back(e.path);
        runs.push_back(std::move(up));
    }
    std::size_t n = static_cast<std::size_t>(config.get_int_or("n", 10));
    RunReport report = evaluate_run(runs, test_log, tables.recency, tables.popularity,
                                    g.num_relations(), n);

    {
        std::ofstream out(ws.report_tsv());
        if (!out) throw Error("cannot open " + ws.report_tsv().string() + " for writing");
        out << std::setprecision(17);
        out << "user\tlist_size\tndcg\tmrr\tlir\tlid\tsep\tsed\tptd\tptc\n";
        auto cell = [&](const std::optional<double>& v) {
            if (v)
                out << '\t' << *v;
            else
                out << "\t-";
        };
        for (const UserEval& ue : report.users) {
            out << g.entity_name(ue.user) << '\t' << ue.list_size << '\t' << ue.ndcg << '\t'
                << ue.mrr;
            cell(ue.lir);
            cell(ue.lid);
            cell(ue.sep);
            cell(ue.sed);
            cell(ue.ptd);
            cell(ue.ptc);
            out << '\n';
        }
        if (!out) throw Error("failed writing " + ws.report_tsv().string());
    }
    {
        ordered_json j;
        j["run"] = in_file.string();
        j["num_users"] = report.num_users;
        j["ndcg"] = report.mean_ndcg;
        j["mrr"] = report.mean_mrr;
        auto field = [&](const char* key, const std::optional<double>& v) {
            if (v)
                j[key] = *v;
            else
                j[key] = nullptr;
        };
        field("lir", report.mean_lir);
        field("lid", report.mean_lid);
        field("sep", report.mean_sep);
        field("sed", report.mean_sed);
        field("ptd", report.mean_ptd);
        field("ptc", report.mean_ptc);
        std::ofstream out(ws.report_json());
        if (!out) throw Error("cannot open " + ws.report_json().string() + " for writing");
        out << j.dump(2) << '\n';
    }
    write_meta(ws.report_json(), config, "evaluate", {{"run", in_file.string()}});
    return report;
}

RunReport run_pipeline(const Config& config, const Workspace& ws, std::ostream* log) {
    auto note = [&](const std::string& line) {
        if (log) *log << line << '\n';
    };
    IngestSummary ingest = run_ingest(config, ws);
    note("ingest: " + std::to_string(ingest.entities) + " entities, " +
         std::to_string(ingest.triples) + " triples, " + std::to_string(ingest.interactions) +
         " interactions");
    SplitSummary split = run_split(config, ws);
    note("split: " + std::to_string(split.train) + " train / " + std::to_string(split.valid) +
         " valid / " + std::to_string(split.test) + " test");
    run_train_embeddings(config, ws);
    note("embeddings: " + ws.embeddings().string());
    TrainStats stats = run_train_agent(config, ws);
    note("agent: " + std::to_string(stats.completed) + "/" + std::to_string(stats.episodes) +
         " complete walks, mean reward " + std::to_string(stats.mean_reward));
    RecommendSummary recs = run_recommend(config, ws, {});
    note("recommend: " + std::to_string(recs.users) + " users (" + std::to_string(recs.flagged) +
         " short)");
    run_rerank(config, ws, {}, {});
    note("rerank: " + ws.reranked().string());
    run_explain(config, ws, ws.reranked(), {});
    note("explain: " + ws.explained().string());
    RunReport report = run_evaluate(config, ws, ws.explained(), {});
    note("evaluate: ndcg " + std::to_string(report.mean_ndcg) + ", mrr " +
         std::to_string(report.mean_mrr));
    run_stats(config, ws);
    note("stats: " + ws.stats_json().string());
    return report;
}

DatasetStats run_stats(const Config& config, const Workspace& ws) {
    Dataset ds = load_workspace(config, ws);
    DatasetStats stats = dataset_stats(ds.graph, ds.interactions);

    KnowledgeGraph g = ds.graph.with_feedback(ds.interactions);
    RecencyTable recency = RecencyTable::build(ds.interactions, config.get_double_or("beta_ir", 0.3));
    PopularityTable popularity = PopularityTable::build(g, config.get_double_or("beta_ep", 0.3));

    {
        std::ofstream out(ws.dir / "recency_table.tsv");
        if (!out) throw Error("cannot open recency_table.tsv for writing");
        out << std::setprecision(17);
        out << "user\tproduct\ttimestamp\traw\tnormalized\n";
        for (const RecencyTable::Row& row : recency.rows())
            out << ds.graph.entity_name(row.user) << '\t' << ds.graph.entity_name(row.product)
                << '\t' << row.timestamp << '\t' << row.raw << '\t' << row.normalized << '\n';
    }
    {
        std::ofstream out(ws.dir / "popularity_table.tsv");
        if (!out) throw Error("cannot open popularity_table.tsv for writing");
        out << std::setprecision(17);
        out << "entity\ttype\tdegree\traw\tnormalized\n";
        for (const PopularityTable::Row& row : popularity.rows())
            out << g.entity_name(row.entity) << '\t' << g.type_name(row.type) << '\t'
                << row.degree << '\t' << row.raw << '\t' << row.normalized << '\n';
    }
    {
        ordered_json j;
        j["num_users"] = stats.num_users;
        j["num_interactions"] = stats.num_interactions;
        j["recency_buckets"] = {{"day", stats.recency.day},
                                {"month", stats.recency.month},
                                {"year", stats.recency.year},
                                {"older", stats.recency.older}};
        ordered_json degrees = ordered_json::array();
        for (const TypeDegreeStats& row : stats.degrees)
            degrees.push_back({{"type", row.name},
                               {"entities", row.entities},
                               {"min", row.min_degree},
                               {"max", row.max_degree},
                               {"mean", row.mean_degree},
                               {"median", row.median_degree},
                               {"p90", row.p90_degree}});
        j["degrees"] = std::move(degrees);
        ordered_json relations = ordered_json::array();
        for (const RelationStats& row : stats.relations)
            relations.push_back(
                {{"relation", row.name}, {"triples", row.triples}, {"fraction", row.fraction}});
        j["relations"] = std::move(relations);
        std::ofstream out(ws.stats_json());
        if (!out) throw Error("cannot open " + ws.stats_json().string() + " for writing");
        out << j.dump(2) << '\n';
    }
    write_meta(ws.stats_json(), config, "stats");
    return stats;
}

SynthData run_synth(const Config& config, const std::filesystem::path& out_dir) {
    SynthSpec spec;
    spec.users = static_cast<int>(config.get_int_or("synth_users", spec.users));
    spec.products = static_cast<int>(config.get_int_or("synth_products", spec.products));
    spec.attr_types = static_cast<int>(config.get_int_or("synth_attr_types", spec.attr_types));
    spec.entities_per_attr =
        static_cast<int>(config.get_int_or("synth_entities_per_attr", spec.entities_per_attr));
    spec.links_per_product =
        static_cast<int>(config.get_int_or("synth_links_per_product", spec.links_per_product));
    spec.relation_imbalance =
        config.get_double_or("synth_relation_imbalance", spec.relation_imbalance);
    spec.popularity_skew = config.get_double_or("synth_popularity_skew", spec.popularity_skew);
    spec.interactions_min =
        static_cast<int>(config.get_int_or("synth_interactions_min", spec.interactions_min));
    spec.interactions_max =
        static_cast<int>(config.get_int_or("synth_interactions_max", spec.interactions_max));
    spec.clusters = static_cast<int>(config.get_int_or("synth_clusters", spec.clusters));
    spec.cluster_affinity =
        config.get_double_or("synth_cluster_affinity", spec.cluster_affinity);
    spec.seed = static_cast<std::uint64_t>(
        config.get_int_or("synth_seed", static_cast<long long>(spec.seed)));
    SynthData data = generate_synthetic(spec);
    write_synthetic(data, out_dir);
    return data;
}

} // namespace pathrec
