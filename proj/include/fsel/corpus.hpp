#ifndef FSEL_CORPUS_HPP
#define FSEL_CORPUS_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fsel/common.hpp"

namespace fsel {

// Per-frame generator truth, carried through the file format so train/test
// pipelines need no side channels. cluster_label -1 means "none".
struct FrameTruth {
    std::int32_t cluster_label = -1;
    bool is_noise = false;
    bool is_query_target = false;

    bool operator==(const FrameTruth&) const = default;
};

struct VideoRecord {
    std::uint32_t video_id = 0;
    Mat frames;  // N x d, row order is temporal order
    std::vector<FrameTruth> truth;  // empty, or one entry per frame

    std::size_t frame_count() const { return frames.size(); }
    bool has_truth() const { return !truth.empty(); }
};

struct QueryRecord {
    std::uint32_t query_id = 0;
    Vec embedding;
    std::uint32_t paired_video_id = 0;
};

struct Corpus {
    std::uint32_t dim = 0;
    std::vector<VideoRecord> videos;
    std::vector<QueryRecord> queries;
    std::string provenance;  // generator spec echo or source path

    const VideoRecord* find_video(std::uint32_t video_id) const;
};

struct SynthSpec {
    std::uint32_t video_count = 1;
    std::uint32_t frames_per_video = 16;
    std::uint32_t planted_clusters = 4;
    std::uint32_t noise_frames_per_video = 0;
    std::uint32_t dim = 64;
    double cluster_separation = 6.0;  // inter-centroid distance / intra-cluster radius
    double query_noise_scale = 0.1;
    std::uint64_t seed = 0;
};

// Plants per-video content clusters on the unit sphere plus optional noise
// frames, and one query per video aimed at a designated clean frame.
//
// Layout per video:
//   - cluster centroids are unit vectors: mutually orthogonal when the
//     dimension allows, otherwise equally spaced on a random great circle;
//   - clean frames are a centroid plus an isotropic perturbation of radius
//     at most (min inter-centroid distance) / cluster_separation;
//   - when noise frames are requested, every centroid leans on a fixed
//     corpus-wide quality axis while noise frames are drawn isotropically in
//     its orthogonal complement, so noise is uncorrelated with every centroid
//     in expectation but carries none of the shared clean-frame component;
//   - the query is a unit-normalized copy of the target frame plus Gaussian
//     noise with expected norm query_noise_scale.
//
// All stored values are truncated to float32 so the in-memory corpus equals
// its file round-trip exactly.
Corpus generate_synthetic(const SynthSpec& spec);

// Binary corpus format, little-endian throughout:
//   magic "FSC1" (4 bytes)
//   version  u16 = 1
//   flags    u16   bit 0: truth labels present
//   d            u32
//   video_count  u32
//   query_count  u32
//   per video:
//     video_id u32, N u32, N*d float32 row-major,
//     if flagged: N x { cluster_label i32 (-1 = none), is_noise u8, is_query_target u8 }
//   per query:
//     query_id u32, paired_video_id u32, d float32
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);
Corpus load_corpus(const std::filesystem::path& path);

struct ValidationIssue {
    std::string kind;    // e.g. "nan_entry", "dangling_pair", "duplicate_id"
    std::string detail;  // human-readable location
};

// Structural audit: dimension mismatches, non-finite entries, dangling
// paired_video_id, duplicate ids, truth-label length mismatches.
// Empty result iff all corpus invariants hold.
std::vector<ValidationIssue> validate_corpus(const Corpus& corpus);

std::string validation_report_json(const std::vector<ValidationIssue>& issues);

}  // namespace fsel

#endif
