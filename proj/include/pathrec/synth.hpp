#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace pathrec {

// Parameters for a synthetic music dataset: listeners, songs, attribute
// entities (artists, genres, labels, ...) linked to songs with imbalanced
// relation frequencies, Zipf-skewed attribute popularity, clustered taste,
// and interaction timestamps drawn from a mix of recency bands.
struct SynthSpec {
    int users = 220;
    int products = 120;
    int attr_types = 3;
    int entities_per_attr = 25;
    int links_per_product = 3;       // links of the most frequent relation
    double relation_imbalance = 2.0; // each further relation is this factor rarer
    double popularity_skew = 1.0;    // Zipf exponent over attribute ranks
    int interactions_min = 12;
    int interactions_max = 24;
    std::array<double, 4> recency_mix{0.4, 0.3, 0.2, 0.1}; // per band, normalized
    std::array<double, 4> band_days{0.5, 45.0, 500.0, 3000.0};
    int clusters = 4;
    double cluster_affinity = 0.8; // probability of staying inside the own cluster
    std::uint64_t seed = 7;
};

struct SynthEntity {
    std::string name;
    std::string type;
    std::string display;
};

struct SynthTriple {
    std::string head;
    std::string rel;
    std::string tail;
};

struct SynthInteraction {
    std::string user;
    std::string product;
    std::int64_t timestamp;
};

struct SynthData {
    std::vector<SynthEntity> entities;
    std::vector<SynthTriple> triples;
    std::vector<SynthInteraction> interactions; // per user, ascending timestamps
    std::string feedback_relation;
};

SynthData generate_synthetic(const SynthSpec& spec);

// entities.tsv, kg.tsv, interactions.tsv under dir (created if missing).
void write_synthetic(const SynthData& data, const std::filesystem::path& dir);

} // namespace pathrec
