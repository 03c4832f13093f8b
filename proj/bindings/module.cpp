#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "pathrec/agent.hpp"
#include "pathrec/config.hpp"
#include "pathrec/error.hpp"
#include "pathrec/dataset.hpp"
#include "pathrec/embeddings.hpp"
#include "pathrec/eval.hpp"
#include "pathrec/explain.hpp"
#include "pathrec/jsonl.hpp"
#include "pathrec/kg.hpp"
#include "pathrec/metrics.hpp"
#include "pathrec/pipeline.hpp"
#include "pathrec/rerank.hpp"
#include "pathrec/sampler.hpp"
#include "pathrec/synth.hpp"

namespace py = pybind11;
using namespace pathrec;

namespace {

std::vector<ReasoningPath> paths_from_names(const KnowledgeGraph& g,
                                            const std::vector<std::vector<std::string>>& names) {
    std::vector<ReasoningPath> out;
    out.reserve(names.size());
    for (const auto& n : names) out.push_back(path_from_names(n, g));
    return out;
}

MetricSet metric_set(const std::string& csv) { return parse_metric_set(csv); }

} // namespace

PYBIND11_MODULE(pathrec, m) {
    m.doc() = "path-reasoning recommender over a knowledge graph";

    py::class_<Interaction>(m, "Interaction")
        .def_readonly("product", &Interaction::product)
        .def_readonly("timestamp", &Interaction::timestamp);

    py::class_<InteractionLog>(m, "InteractionLog")
        .def(py::init<>())
        .def("add", &InteractionLog::add)
        .def("finalize", &InteractionLog::finalize)
        .def("users", &InteractionLog::users)
        .def("num_users", &InteractionLog::num_users)
        .def("total_interactions", &InteractionLog::total_interactions)
        .def("for_user", [](const InteractionLog& log, EntityId u) {
            auto span = log.for_user(u);
            return std::vector<Interaction>(span.begin(), span.end());
        });

    py::class_<KnowledgeGraph>(m, "KnowledgeGraph")
        .def("num_entities", &KnowledgeGraph::num_entities)
        .def("num_relations", &KnowledgeGraph::num_relations)
        .def("num_types", &KnowledgeGraph::num_types)
        .def("num_triples", &KnowledgeGraph::num_triples)
        .def("entity_name", &KnowledgeGraph::entity_name,
             py::return_value_policy::reference_internal)
        .def("entity_display", &KnowledgeGraph::entity_display,
             py::return_value_policy::reference_internal)
        .def("relation_name", &KnowledgeGraph::relation_name,
             py::return_value_policy::reference_internal)
        .def("type_name", &KnowledgeGraph::type_name,
             py::return_value_policy::reference_internal)
        .def("find_entity", &KnowledgeGraph::find_entity)
        .def("find_relation", &KnowledgeGraph::find_relation)
        .def("degree", &KnowledgeGraph::degree)
        .def("is_user", &KnowledgeGraph::is_user)
        .def("is_product", &KnowledgeGraph::is_product)
        .def("users", &KnowledgeGraph::users)
        .def("products", &KnowledgeGraph::products)
        .def("with_feedback", &KnowledgeGraph::with_feedback);

    py::class_<LoadInfo>(m, "LoadInfo")
        .def_readonly("raw_triples", &LoadInfo::raw_triples)
        .def_readonly("duplicate_triples", &LoadInfo::duplicate_triples)
        .def_readonly("removed_relations", &LoadInfo::removed_relations)
        .def_readonly("removed_triples", &LoadInfo::removed_triples)
        .def_readonly("dropped_interactions", &LoadInfo::dropped_interactions);

    py::class_<Dataset>(m, "Dataset")
        .def_readonly("graph", &Dataset::graph)
        .def_readonly("interactions", &Dataset::interactions)
        .def_readonly("info", &Dataset::info);

    m.def(
        "load_dataset",
        [](const std::filesystem::path& interactions, const std::filesystem::path& kg,
           const std::filesystem::path& entities, const std::string& feedback_relation,
           long min_relation_count) {
            return load_dataset(interactions, kg, entities,
                                LoadOptions{feedback_relation, min_relation_count});
        },
        py::arg("interactions_file"), py::arg("kg_file"), py::arg("entities_file"),
        py::arg("feedback_relation"), py::arg("min_relation_count") = 200);

    py::class_<SplitResult>(m, "SplitResult")
        .def_readonly("train", &SplitResult::train)
        .def_readonly("valid", &SplitResult::valid)
        .def_readonly("test", &SplitResult::test)
        .def_readonly("flagged", &SplitResult::flagged);

    m.def("chronological_split", &chronological_split, py::arg("log"),
          py::arg("train_frac") = 0.7, py::arg("valid_frac") = 0.1);

    m.def("ewma_normalized", [](const std::vector<double>& raw, double beta) {
        EwmaSeries s = ewma_normalized(raw, beta);
        return py::make_tuple(s.raw, s.normalized);
    });

    py::class_<RecencyTable>(m, "RecencyTable")
        .def_static("build", &RecencyTable::build)
        .def("score", &RecencyTable::score)
        .def("beta", &RecencyTable::beta);

    py::class_<PopularityTable>(m, "PopularityTable")
        .def_static("build", &PopularityTable::build)
        .def("score", &PopularityTable::score)
        .def("beta", &PopularityTable::beta);

    m.def("lir", [](const KnowledgeGraph& g, const std::vector<std::vector<std::string>>& paths,
                    const RecencyTable& recency) {
        return lir(paths_from_names(g, paths), recency);
    });
    m.def("lid", [](const KnowledgeGraph& g, const std::vector<std::vector<std::string>>& paths) {
        return lid(paths_from_names(g, paths));
    });
    m.def("sep", [](const KnowledgeGraph& g, const std::vector<std::vector<std::string>>& paths,
                    const PopularityTable& popularity) {
        return sep(paths_from_names(g, paths), popularity);
    });
    m.def("sed", [](const KnowledgeGraph& g, const std::vector<std::vector<std::string>>& paths) {
        return sed(paths_from_names(g, paths));
    });
    m.def("ptd", [](const KnowledgeGraph& g, const std::vector<std::vector<std::string>>& paths,
                    std::size_t num_relation_types) {
        return ptd(paths_from_names(g, paths), num_relation_types);
    });
    m.def("ptc", [](const KnowledgeGraph& g, const std::vector<std::vector<std::string>>& paths) {
        return ptc(paths_from_names(g, paths));
    });

    py::class_<EmbeddingTable>(m, "EmbeddingTable")
        .def_readonly("dim", &EmbeddingTable::dim)
        .def("num_entities", &EmbeddingTable::num_entities)
        .def("num_relations", &EmbeddingTable::num_relations)
        .def("relevance", &EmbeddingTable::relevance)
        .def("triple_score", &EmbeddingTable::triple_score);

    m.def(
        "train_embeddings",
        [](const KnowledgeGraph& g, int dim, int epochs, double lr, int negatives,
           double margin, std::uint64_t seed) {
            EmbeddingTrainOptions opts;
            opts.dim = dim;
            opts.epochs = epochs;
            opts.lr = lr;
            opts.negatives_per_positive = negatives;
            opts.margin = margin;
            opts.seed = seed;
            return train_embeddings(g, opts);
        },
        py::arg("graph"), py::arg("dim") = 64, py::arg("epochs") = 30, py::arg("lr") = 0.01,
        py::arg("negatives") = 1, py::arg("margin") = 1.0, py::arg("seed") = 0);
    m.def("save_embeddings", &save_embeddings);
    m.def("load_embeddings", &load_embeddings);

    py::class_<PolicyModel>(m, "PolicyModel")
        .def_readonly("dim", &PolicyModel::dim)
        .def_readonly("hidden", &PolicyModel::hidden);

    py::class_<TrainStats>(m, "TrainStats")
        .def_readonly("episodes", &TrainStats::episodes)
        .def_readonly("completed", &TrainStats::completed)
        .def_readonly("mean_reward", &TrainStats::mean_reward);

    m.def(
        "train_policy",
        [](const KnowledgeGraph& g, const EmbeddingTable& table, double alpha,
           const std::string& metrics, int episodes, double lr, double discount,
           double baseline_rate, int hidden, std::uint64_t seed, const RecencyTable* recency,
           const PopularityTable* popularity) {
            RewardConfig rc;
            rc.alpha = alpha;
            rc.metrics = metric_set(metrics);
            PolicyTrainOptions opts;
            opts.episodes = episodes;
            opts.lr = lr;
            opts.discount = discount;
            opts.baseline_rate = baseline_rate;
            opts.hidden = hidden;
            opts.seed = seed;
            TrainStats stats;
            PolicyModel model = train_policy(g, table, rc, opts, recency, popularity, &stats);
            return py::make_tuple(model, stats);
        },
        py::arg("graph"), py::arg("table"), py::arg("alpha") = 0.0, py::arg("metrics") = "",
        py::arg("episodes") = 10000, py::arg("lr") = 5e-4, py::arg("discount") = 0.99,
        py::arg("baseline_rate") = 0.05, py::arg("hidden") = 128, py::arg("seed") = 0,
        py::arg("recency") = nullptr, py::arg("popularity") = nullptr);
    m.def("save_policy", &save_policy);
    m.def("load_policy", &load_policy);

    m.def(
        "sample_candidates",
        [](const KnowledgeGraph& g, const PolicyModel& policy, const EmbeddingTable& table,
           const std::string& user, int hops, std::array<int, 3> beams) {
            std::optional<EntityId> u = g.find_entity(user);
            if (!u) throw Error("unknown entity '" + user + "'");
            CandidateSet cands = sample_candidates(g, policy, table, *u, hops, beams);
            py::list out;
            for (std::size_t i = 0; i < cands.size(); ++i)
                out.append(py::make_tuple(path_to_names(cands.paths[i], g), cands.probs[i],
                                          cands.relevance[i]));
            return out;
        },
        py::arg("graph"), py::arg("policy"), py::arg("table"), py::arg("user"),
        py::arg("hops") = 3, py::arg("beams") = std::array<int, 3>{20, 10, 10});

    m.def(
        "rerank_paths",
        [](const KnowledgeGraph& g,
           const std::vector<std::tuple<std::vector<std::string>, double, double>>& entries,
           double alpha, const std::string& metrics, std::size_t n, const RecencyTable* recency,
           const PopularityTable* popularity) {
            CandidateSet cands;
            for (const auto& [names, prob, relevance] : entries) {
                cands.paths.push_back(path_from_names(names, g));
                cands.probs.push_back(prob);
                cands.relevance.push_back(relevance);
            }
            RerankConfig rc;
            rc.alpha = alpha;
            rc.metrics = metric_set(metrics);
            rc.n = n;
            RankedList ranked = rerank(cands, rc, recency, popularity,
                                       static_cast<int>(g.num_relations()));
            return py::make_tuple(ranked.indices, ranked.flagged);
        },
        py::arg("graph"), py::arg("entries"), py::arg("alpha") = 0.0, py::arg("metrics") = "",
        py::arg("n") = 10, py::arg("recency") = nullptr, py::arg("popularity") = nullptr);

    m.def("render_explanation",
          [](const KnowledgeGraph& g, const std::vector<std::string>& path) {
              return render_explanation(path_from_names(path, g), g);
          });

    m.def(
        "ndcg_at_k",
        [](const std::vector<EntityId>& ranked, const std::set<EntityId>& relevant,
           std::size_t n) { return ndcg_at_k(ranked, relevant, n); },
        py::arg("ranked"), py::arg("relevant"), py::arg("n") = 10);
    m.def(
        "mrr_at_k",
        [](const std::vector<EntityId>& ranked, const std::set<EntityId>& relevant,
           std::size_t n) { return mrr_at_k(ranked, relevant, n); },
        py::arg("ranked"), py::arg("relevant"), py::arg("n") = 10);

    py::class_<SynthSpec>(m, "SynthSpec")
        .def(py::init<>())
        .def_readwrite("users", &SynthSpec::users)
        .def_readwrite("products", &SynthSpec::products)
        .def_readwrite("attr_types", &SynthSpec::attr_types)
        .def_readwrite("entities_per_attr", &SynthSpec::entities_per_attr)
        .def_readwrite("links_per_product", &SynthSpec::links_per_product)
        .def_readwrite("relation_imbalance", &SynthSpec::relation_imbalance)
        .def_readwrite("popularity_skew", &SynthSpec::popularity_skew)
        .def_readwrite("interactions_min", &SynthSpec::interactions_min)
        .def_readwrite("interactions_max", &SynthSpec::interactions_max)
        .def_readwrite("clusters", &SynthSpec::clusters)
        .def_readwrite("cluster_affinity", &SynthSpec::cluster_affinity)
        .def_readwrite("seed", &SynthSpec::seed);

    py::class_<SynthData>(m, "SynthData")
        .def_readonly("feedback_relation", &SynthData::feedback_relation)
        .def("num_entities", [](const SynthData& d) { return d.entities.size(); })
        .def("num_triples", [](const SynthData& d) { return d.triples.size(); })
        .def("num_interactions", [](const SynthData& d) { return d.interactions.size(); });

    m.def("generate_synthetic", &generate_synthetic);
    m.def("write_synthetic", &write_synthetic);

    py::class_<Config>(m, "Config")
        .def_static("load", &Config::load)
        .def_static("parse", &Config::parse, py::arg("text"), py::arg("origin") = "<config>")
        .def("has", &Config::has)
        .def("get", &Config::get)
        .def("set", &Config::set)
        .def("to_text", &Config::to_text);

    py::class_<Workspace>(m, "Workspace")
        .def(py::init([](const std::filesystem::path& dir) { return Workspace{dir}; }))
        .def_readonly("dir", &Workspace::dir);

    py::class_<UserEval>(m, "UserEval")
        .def_readonly("user", &UserEval::user)
        .def_readonly("list_size", &UserEval::list_size)
        .def_readonly("ndcg", &UserEval::ndcg)
        .def_readonly("mrr", &UserEval::mrr)
        .def_readonly("lir", &UserEval::lir)
        .def_readonly("lid", &UserEval::lid)
        .def_readonly("sep", &UserEval::sep)
        .def_readonly("sed", &UserEval::sed)
        .def_readonly("ptd", &UserEval::ptd)
        .def_readonly("ptc", &UserEval::ptc);

    py::class_<RunReport>(m, "RunReport")
        .def_readonly("users", &RunReport::users)
        .def_readonly("num_users", &RunReport::num_users)
        .def_readonly("ndcg", &RunReport::mean_ndcg)
        .def_readonly("mrr", &RunReport::mean_mrr)
        .def_readonly("lir", &RunReport::mean_lir)
        .def_readonly("lid", &RunReport::mean_lid)
        .def_readonly("sep", &RunReport::mean_sep)
        .def_readonly("sed", &RunReport::mean_sed)
        .def_readonly("ptd", &RunReport::mean_ptd)
        .def_readonly("ptc", &RunReport::mean_ptc);

    m.def("run_ingest", [](const Config& c, const Workspace& w) { run_ingest(c, w); });
    m.def("run_split", [](const Config& c, const Workspace& w) { run_split(c, w); });
    m.def("run_train_embeddings",
          [](const Config& c, const Workspace& w) { run_train_embeddings(c, w); });
    m.def("run_train_agent", [](const Config& c, const Workspace& w) {
        TrainStats s = run_train_agent(c, w);
        return s;
    });
    m.def("run_recommend", [](const Config& c, const Workspace& w) { run_recommend(c, w); });
    m.def("run_rerank", [](const Config& c, const Workspace& w) { run_rerank(c, w); });
    m.def("run_explain", [](const Config& c, const Workspace& w) { run_explain(c, w); });
    m.def("run_evaluate",
          [](const Config& c, const Workspace& w) { return run_evaluate(c, w); });
    m.def("run_stats", [](const Config& c, const Workspace& w) { run_stats(c, w); });
    m.def("run_pipeline",
          [](const Config& c, const Workspace& w) { return run_pipeline(c, w, nullptr); });
}
