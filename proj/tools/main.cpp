#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "pathrec/error.hpp"
#include "pathrec/pipeline.hpp"

namespace {

using pathrec::Config;
using pathrec::Workspace;

std::string num(double v) {
    std::ostringstream s;
    s.precision(17);
    s << v;
    return s.str();
}

void print_report(const pathrec::RunReport& report) {
    auto opt = [](const std::optional<double>& v) {
        return v ? std::to_string(*v) : std::string("-");
    };
    std::cout << "users " << report.num_users << "  ndcg " << report.mean_ndcg << "  mrr "
              << report.mean_mrr << '\n'
              << "lir " << opt(report.mean_lir) << "  lid " << opt(report.mean_lid) << "  sep "
              << opt(report.mean_sep) << "  sed " << opt(report.mean_sed) << "  ptd "
              << opt(report.mean_ptd) << "  ptc " << opt(report.mean_ptc) << '\n';
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"path-reasoning recommender over a knowledge graph"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_file;
    std::string workdir = "work";
    app.add_option("-c,--config", config_file, "settings file (key = value lines)")->required();
    app.add_option("-w,--workdir", workdir, "working directory for pipeline artifacts");

    CLI::App* ingest = app.add_subcommand("ingest", "load and normalize the dataset files");
    CLI::App* split = app.add_subcommand("split", "chronological train/valid/test split");
    CLI::App* train_emb = app.add_subcommand("train-embeddings", "fit entity/relation vectors");

    CLI::App* train_agent = app.add_subcommand("train-agent", "train the walking policy");
    double alpha = 0.0;
    std::string metrics;
    long long episodes = 0;
    long long seed = 0;
    train_agent->add_option("--alpha", alpha, "blend weight for quality shaping");
    train_agent->add_option("--metrics", metrics, "comma list of lir,sep,ptd,ptc");
    train_agent->add_option("--episodes", episodes, "training episodes");
    train_agent->add_option("--seed", seed, "random seed");

    CLI::App* recommend = app.add_subcommand("recommend", "beam-sample ranked paths per user");
    std::string user;
    bool all_users = false;
    long long topn = 0;
    std::string out_file;
    recommend->add_option("--user", user, "single user to recommend for");
    recommend->add_flag("--all", all_users, "recommend for every user (default)");
    recommend->add_option("--n", topn, "list size");
    recommend->add_option("--out", out_file, "output JSONL path");

    CLI::App* rerank = app.add_subcommand("rerank", "greedy quality-aware reordering");
    double alpha_post = 0.0;
    std::string metric_post;
    std::string in_file;
    rerank->add_option("--alpha", alpha_post, "blend weight for list quality");
    rerank->add_option("--metric,--metrics", metric_post, "comma list of lir,sep,ptd,ptc");
    rerank->add_option("--n", topn, "list size");
    rerank->add_option("--in", in_file, "input JSONL (default workdir recs)");
    rerank->add_option("--out", out_file, "output JSONL path");

    CLI::App* explain = app.add_subcommand("explain", "render explanation sentences");
    explain->add_option("--in", in_file, "input JSONL (default: latest run file)");
    explain->add_option("--out", out_file, "output JSONL path");

    CLI::App* evaluate = app.add_subcommand("evaluate", "score a run against the test split");
    std::string run_file;
    std::string test_file;
    evaluate->add_option("--run", run_file, "run JSONL (default: latest run file)");
    evaluate->add_option("--test", test_file, "held-out interactions TSV");

    CLI::App* stats = app.add_subcommand("stats", "dataset distribution report");
    std::string dataset_dir;
    stats->add_option("--dataset", dataset_dir, "directory with normalized dataset files");

    CLI::App* synth = app.add_subcommand("synth", "generate a synthetic dataset");
    std::string synth_out;
    synth->add_option("--out", synth_out, "output directory for the TSV files");

    CLI::App* run = app.add_subcommand("run", "all stages in order");

    CLI11_PARSE(app, argc, argv);

    try {
        Config cfg = Config::load(config_file);
        if (cfg.has("workdir") && !app.count("--workdir")) workdir = cfg.get("workdir");
        Workspace ws{workdir};

        if (*ingest) {
            pathrec::IngestSummary s = pathrec::run_ingest(cfg, ws);
            std::cout << "entities " << s.entities << "  triples " << s.triples << "  relations "
                      << s.relations << "  users " << s.users << "  interactions "
                      << s.interactions << '\n'
                      << "dropped: " << s.info.duplicate_triples << " duplicate triples, "
                      << s.info.removed_relations << " rare relations ("
                      << s.info.removed_triples << " triples), " << s.info.dropped_interactions
                      << " interactions\n";
        } else if (*split) {
            pathrec::SplitSummary s = pathrec::run_split(cfg, ws);
            std::cout << "train " << s.train << "  valid " << s.valid << "  test " << s.test
                      << "  short-history users " << s.flagged_users << '\n';
        } else if (*train_emb) {
            std::cout << "wrote " << pathrec::run_train_embeddings(cfg, ws).string() << '\n';
        } else if (*train_agent) {
            if (train_agent->count("--alpha")) cfg.set("alpha_in", num(alpha));
            if (train_agent->count("--metrics")) cfg.set("metrics_in", metrics);
            if (train_agent->count("--episodes")) cfg.set("episodes", std::to_string(episodes));
            if (train_agent->count("--seed")) cfg.set("seed", std::to_string(seed));
            pathrec::TrainStats s = pathrec::run_train_agent(cfg, ws);
            std::cout << "episodes " << s.episodes << "  complete walks " << s.completed
                      << "  mean reward " << s.mean_reward << '\n';
        } else if (*recommend) {
            if (recommend->count("--n")) cfg.set("n", std::to_string(topn));
            std::optional<std::string> only;
            if (recommend->count("--user")) only = user;
            std::optional<std::filesystem::path> out;
            if (recommend->count("--out")) out = out_file;
            pathrec::RecommendSummary s = pathrec::run_recommend(cfg, ws, only, out);
            std::cout << "users " << s.users << "  short lists " << s.flagged << '\n';
        } else if (*rerank) {
            if (rerank->count("--alpha")) cfg.set("alpha_post", num(alpha_post));
            if (rerank->count("--metric")) cfg.set("metrics_post", metric_post);
            if (rerank->count("--n")) cfg.set("n", std::to_string(topn));
            std::optional<std::filesystem::path> in, out;
            if (rerank->count("--in")) in = in_file;
            if (rerank->count("--out")) out = out_file;
            pathrec::RecommendSummary s = pathrec::run_rerank(cfg, ws, in, out);
            std::cout << "users " << s.users << "  short lists " << s.flagged << '\n';
        } else if (*explain) {
            std::optional<std::filesystem::path> in, out;
            if (explain->count("--in")) in = in_file;
            if (explain->count("--out")) out = out_file;
            pathrec::ExplainSummary s = pathrec::run_explain(cfg, ws, in, out);
            std::cout << "records " << s.records << "  explanations " << s.explanations << '\n';
        } else if (*evaluate) {
            std::optional<std::filesystem::path> rf, tf;
            if (evaluate->count("--run")) rf = run_file;
            if (evaluate->count("--test")) tf = test_file;
            print_report(pathrec::run_evaluate(cfg, ws, rf, tf));
        } else if (*stats) {
            Workspace target = ws;
            if (stats->count("--dataset")) target.dir = dataset_dir;
            pathrec::DatasetStats s = pathrec::run_stats(cfg, target);
            std::cout << "users " << s.num_users << "  interactions " << s.num_interactions
                      << '\n'
                      << "recency%: day " << s.recency.day << "  month " << s.recency.month
                      << "  year " << s.recency.year << "  older " << s.recency.older << '\n';
            for (const pathrec::RelationStats& r : s.relations)
                std::cout << "relation " << r.name << ": " << r.triples << " triples ("
                          << 100.0 * r.fraction << "%)\n";
        } else if (*synth) {
            std::filesystem::path out =
                synth->count("--out") ? synth_out : cfg.get_or("synth_dir", "synth-data");
            pathrec::SynthData d = pathrec::run_synth(cfg, out);
            std::cout << "wrote " << d.entities.size() << " entities, " << d.triples.size()
                      << " triples, " << d.interactions.size() << " interactions to "
                      << out.string() << '\n';
        } else if (*run) {
            print_report(pathrec::run_pipeline(cfg, ws, &std::cout));
        }
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
