#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "pathrec/agent.hpp"
#include "pathrec/config.hpp"
#include "pathrec/dataset.hpp"
#include "pathrec/eval.hpp"
#include "pathrec/synth.hpp"

namespace pathrec {

// File layout of a working directory shared by the pipeline stages.
struct Workspace {
    std::filesystem::path dir;

    std::filesystem::path entities() const { return dir / "entities.tsv"; }
    std::filesystem::path graph() const { return dir / "kg.tsv"; }
    std::filesystem::path interactions() const { return dir / "interactions.tsv"; }
    std::filesystem::path train() const { return dir / "train.tsv"; }
    std::filesystem::path valid() const { return dir / "valid.tsv"; }
    std::filesystem::path test() const { return dir / "test.tsv"; }
    std::filesystem::path embeddings() const { return dir / "embeddings.tsv"; }
    std::filesystem::path policy() const { return dir / "policy.bin"; }
    std::filesystem::path recs() const { return dir / "recs.jsonl"; }
    std::filesystem::path reranked() const { return dir / "reranked.jsonl"; }
    std::filesystem::path explained() const { return dir / "explained.jsonl"; }
    std::filesystem::path report_tsv() const { return dir / "report.tsv"; }
    std::filesystem::path report_json() const { return dir / "report.json"; }
    std::filesystem::path stats_json() const { return dir / "stats.json"; }
};

// "lir,sep,ptd,ptc" (any subset, empty allowed)
MetricSet parse_metric_set(const std::string& csv);

// Ingested dataset reloaded from the workspace's normalized files.
Dataset load_workspace(const Config& config, const Workspace& ws);

struct IngestSummary {
    std::size_t entities = 0;
    std::size_t triples = 0;
    std::size_t relations = 0;
    std::size_t users = 0;
    std::size_t interactions = 0;
    LoadInfo info;
};

struct SplitSummary {
    std::size_t train = 0;
    std::size_t valid = 0;
    std::size_t test = 0;
    std::size_t flagged_users = 0;
};

struct RecommendSummary {
    std::size_t users = 0;
    std::size_t flagged = 0;
};

struct ExplainSummary {
    std::size_t records = 0;
    std::size_t explanations = 0;
};

IngestSummary run_ingest(const Config& config, const Workspace& ws);
SplitSummary run_split(const Config& config, const Workspace& ws);
std::filesystem::path run_train_embeddings(const Config& config, const Workspace& ws);
TrainStats run_train_agent(const Config& config, const Workspace& ws);
RecommendSummary run_recommend(const Config& config, const Workspace& ws,
                               const std::optional<std::string>& only_user = {},
                               std::optional<std::filesystem::path> out = {});
RecommendSummary run_rerank(const Config& config, const Workspace& ws,
                            std::optional<std::filesystem::path> in = {},
                            std::optional<std::filesystem::path> out = {});
ExplainSummary run_explain(const Config& config, const Workspace& ws,
                           std::optional<std::filesystem::path> in = {},
                           std::optional<std::filesystem::path> out = {});
RunReport run_evaluate(const Config& config, const Workspace& ws,
                       std::optional<std::filesystem::path> run_file = {},
                       std::optional<std::filesystem::path> test_file = {});
DatasetStats run_stats(const Config& config, const Workspace& ws);
SynthData run_synth(const Config& config, const std::filesystem::path& out_dir);

// All stages in order; log, when given, receives one progress line per stage.
RunReport run_pipeline(const Config& config, const Workspace& ws, std::ostream* log = nullptr);

} // namespace pathrec
