#include "fsel/corpus.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "fsel/core.hpp"
#include "fsel/rng.hpp"
#include "json.hpp"

namespace fsel {
namespace {

// Mixing weight of the corpus-wide quality axis in clean-content centroids
// (only used when noise frames are planted). Large enough that a linear
// scorer can separate clean from noise, small enough that clusters stay
// well apart.
constexpr double kQualityAxisWeight = 0.5;

double f32(double x) { return static_cast<double>(static_cast<float>(x)); }

void truncate_to_f32(Vec& v) {
    for (auto& x : v) x = f32(x);
}

// Remove the components of `v` along each (unit) vector in `basis`.
void project_out(Vec& v, const Mat& basis) {
    for (const auto& b : basis) {
        const double c = dot(v, b);
        for (std::size_t j = 0; j < v.size(); ++j) v[j] -= c * b[j];
    }
}

// Draw a unit vector orthogonal to every vector in `basis`.
Vec unit_in_complement(Rng& rng, std::size_t dim, const Mat& basis) {
    for (;;) {
        Vec v = rng.gaussian_vector(dim);
        project_out(v, basis);
        const double n = norm(v);
        if (n > 1e-9) {
            for (auto& x : v) x /= n;
            return v;
        }
    }
}

struct LittleEndianWriter {
    std::ofstream out;

    explicit LittleEndianWriter(const std::filesystem::path& path)
        : out(path, std::ios::binary) {
        if (!out) throw FormatError("cannot open for writing: " + path.string());
    }

    template <typename T>
    void raw(T value) {
        unsigned char buf[sizeof(T)];
        std::memcpy(buf, &value, sizeof(T));
#if defined(__BYTE_ORDER__) && __BYTE_ORDER__ == __ORDER_BIG_ENDIAN__
        std::reverse(buf, buf + sizeof(T));
#endif
        out.write(reinterpret_cast<const char*>(buf), sizeof(T));
    }

    void u8(std::uint8_t v) { raw(v); }
    void u16(std::uint16_t v) { raw(v); }
    void u32(std::uint32_t v) { raw(v); }
    void i32(std::int32_t v) { raw(v); }
    void f32le(float v) { raw(v); }
};

struct LittleEndianReader {
    std::ifstream in;
    std::uint64_t offset = 0;
    std::string path;

    explicit LittleEndianReader(const std::filesystem::path& p)
        : in(p, std::ios::binary), path(p.string()) {
        if (!in) throw FormatError("cannot open for reading: " + path);
    }

    template <typename T>
    T raw() {
        unsigned char buf[sizeof(T)];
        in.read(reinterpret_cast<char*>(buf), sizeof(T));
        if (in.gcount() != static_cast<std::streamsize>(sizeof(T)))
            throw FormatError("truncated corpus file: " + path, offset);
#if defined(__BYTE_ORDER__) && __BYTE_ORDER__ == __ORDER_BIG_ENDIAN__
        std::reverse(buf, buf + sizeof(T));
#endif
        offset += sizeof(T);
        T value;
        std::memcpy(&value, buf, sizeof(T));
        return value;
    }

    std::uint8_t u8() { return raw<std::uint8_t>(); }
    std::uint16_t u16() { return raw<std::uint16_t>(); }
    std::uint32_t u32() { return raw<std::uint32_t>(); }
    std::int32_t i32() { return raw<std::int32_t>(); }
    float f32le() { return raw<float>(); }
};

constexpr char kMagic[4] = {'F', 'S', 'C', '1'};

}  // namespace

const VideoRecord* Corpus::find_video(std::uint32_t video_id) const {
    for (const auto& v : videos)
        if (v.video_id == video_id) return &v;
    return nullptr;
}

Corpus generate_synthetic(const SynthSpec& spec) {
    const std::uint32_t n = spec.frames_per_video;
    const std::uint32_t c = spec.planted_clusters;
    const std::uint32_t d = spec.dim;
    const bool with_noise = spec.noise_frames_per_video > 0;

    if (spec.video_count < 1) throw DomainError("generate_synthetic: video_count must be >= 1");
    if (n < 1) throw DomainError("generate_synthetic: frames_per_video must be >= 1");
    if (d < 1) throw DomainError("generate_synthetic: dim must be >= 1");
    if (c < 1) throw DomainError("generate_synthetic: planted_clusters must be >= 1");
    if (c + spec.noise_frames_per_video > n)
        throw DomainError("generate_synthetic: clusters + noise frames exceed frames_per_video");
    if (!(spec.cluster_separation > 0.0))
        throw DomainError("generate_synthetic: cluster_separation must be positive");
    if (spec.query_noise_scale < 0.0)
        throw DomainError("generate_synthetic: query_noise_scale must be >= 0");

    // Content directions live in the complement of the quality axis when noise
    // frames are planted, so the axis dimension is reserved up front.
    const std::uint32_t content_dims = with_noise ? d - 1 : d;
    const bool orthogonal_fit = c <= content_dims;
    const bool ring_fit = content_dims >= 2;
    if (with_noise && d < 2)
        throw DomainError("generate_synthetic: noise frames need dim >= 2");
    if (!orthogonal_fit && !ring_fit && c > 1)
        throw DomainError("generate_synthetic: cannot place clusters in this dimension");

    Rng rng(mix_seed(spec.seed, 0x5eedc0de));

    Mat quality_axis;  // zero or one unit vector
    if (with_noise) quality_axis.push_back(rng.unit_vector(d));
    const double axis_w = with_noise ? kQualityAxisWeight : 0.0;
    const double perp_w = std::sqrt(1.0 - axis_w * axis_w);

    Corpus corpus;
    corpus.dim = d;
    {
        std::ostringstream prov;
        prov << "synthetic videos=" << spec.video_count << " frames=" << n << " clusters=" << c
             << " noise=" << spec.noise_frames_per_video << " dim=" << d
             << " separation=" << spec.cluster_separation
             << " query_noise=" << spec.query_noise_scale << " seed=" << spec.seed;
        corpus.provenance = prov.str();
    }

    for (std::uint32_t v = 0; v < spec.video_count; ++v) {
        // Cluster centroids for this video.
        Mat perp_dirs;
        if (orthogonal_fit) {
            Mat used = quality_axis;
            for (std::uint32_t j = 0; j < c; ++j) {
                Vec e = unit_in_complement(rng, d, used);
                used.push_back(e);
                perp_dirs.push_back(std::move(e));
            }
        } else {
            // Equally spaced directions on a random great circle.
            Vec u1 = unit_in_complement(rng, d, quality_axis);
            Mat tmp = quality_axis;
            tmp.push_back(u1);
            Vec u2 = unit_in_complement(rng, d, tmp);
            const double phase = 2.0 * M_PI * rng.uniform();
            for (std::uint32_t j = 0; j < c; ++j) {
                const double a = phase + 2.0 * M_PI * j / c;
                Vec e(d);
                for (std::uint32_t t = 0; t < d; ++t)
                    e[t] = std::cos(a) * u1[t] + std::sin(a) * u2[t];
                perp_dirs.push_back(std::move(e));
            }
        }

        Mat centroids(c, Vec(d, 0.0));
        for (std::uint32_t j = 0; j < c; ++j) {
            for (std::uint32_t t = 0; t < d; ++t) {
                centroids[j][t] = perp_w * perp_dirs[j][t];
                if (with_noise) centroids[j][t] += axis_w * quality_axis[0][t];
            }
        }

        double min_dist = 2.0;
        for (std::uint32_t a = 0; a < c; ++a)
            for (std::uint32_t b = a + 1; b < c; ++b) {
                Vec diff(d);
                for (std::uint32_t t = 0; t < d; ++t) diff[t] = centroids[a][t] - centroids[b][t];
                min_dist = std::min(min_dist, norm(diff));
            }
        const double radius = (c > 1) ? min_dist / spec.cluster_separation
                                      : 1.0 / spec.cluster_separation;

        // Slot layout: clean frames round-robin over clusters, noise at the
        // end, then shuffled into a random temporal order.
        std::vector<std::int32_t> labels(n);
        const std::uint32_t clean_count = n - spec.noise_frames_per_video;
        for (std::uint32_t i = 0; i < clean_count; ++i)
            labels[i] = static_cast<std::int32_t>(i % c);
        for (std::uint32_t i = clean_count; i < n; ++i) labels[i] = -1;
        rng.shuffle(labels);

        VideoRecord video;
        video.video_id = v;
        video.frames.reserve(n);
        video.truth.resize(n);

        std::vector<std::uint32_t> clean_positions;
        for (std::uint32_t i = 0; i < n; ++i) {
            Vec frame(d);
            if (labels[i] >= 0) {
                const Vec dir = rng.unit_vector(d);
                const double mag = radius * rng.uniform();
                const auto& ctr = centroids[static_cast<std::size_t>(labels[i])];
                for (std::uint32_t t = 0; t < d; ++t) frame[t] = ctr[t] + mag * dir[t];
                clean_positions.push_back(i);
            } else {
                const Vec dir = unit_in_complement(rng, d, quality_axis);
                const double mag = 0.8 + 0.4 * rng.uniform();
                for (std::uint32_t t = 0; t < d; ++t) frame[t] = mag * dir[t];
            }
            truncate_to_f32(frame);
            video.frames.push_back(std::move(frame));
            video.truth[i].cluster_label = labels[i];
            video.truth[i].is_noise = labels[i] < 0;
        }

        const std::uint32_t target =
            clean_positions[static_cast<std::size_t>(rng.uniform_int(clean_positions.size()))];
        video.truth[target].is_query_target = true;

        QueryRecord query;
        query.query_id = v;
        query.paired_video_id = v;
        query.embedding = video.frames[target];
        if (spec.query_noise_scale > 0.0) {
            const Vec z = rng.gaussian_vector(d);
            const double per_coord = spec.query_noise_scale / std::sqrt(static_cast<double>(d));
            for (std::uint32_t t = 0; t < d; ++t) query.embedding[t] += per_coord * z[t];
        }
        const double qn = norm(query.embedding);
        for (auto& x : query.embedding) x /= qn;
        truncate_to_f32(query.embedding);

        corpus.videos.push_back(std::move(video));
        corpus.queries.push_back(std::move(query));
    }
    return corpus;
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
    bool any_truth = false;
    for (const auto& v : corpus.videos) any_truth = any_truth || v.has_truth();

    LittleEndianWriter w(path);
    w.out.write(kMagic, 4);
    w.u16(1);
    w.u16(any_truth ? 1 : 0);
    w.u32(corpus.dim);
    w.u32(static_cast<std::uint32_t>(corpus.videos.size()));
    w.u32(static_cast<std::uint32_t>(corpus.queries.size()));

    for (const auto& v : corpus.videos) {
        w.u32(v.video_id);
        w.u32(static_cast<std::uint32_t>(v.frames.size()));
        for (const auto& row : v.frames)
            for (double x : row) w.f32le(static_cast<float>(x));
        if (any_truth) {
            if (v.truth.size() != v.frames.size())
                throw FormatError("save_corpus: truth labels must cover every frame");
            for (const auto& t : v.truth) {
                w.i32(t.cluster_label);
                w.u8(t.is_noise ? 1 : 0);
                w.u8(t.is_query_target ? 1 : 0);
            }
        }
    }
    for (const auto& q : corpus.queries) {
        w.u32(q.query_id);
        w.u32(q.paired_video_id);
        for (double x : q.embedding) w.f32le(static_cast<float>(x));
    }
    w.out.flush();
    if (!w.out) throw FormatError("save_corpus: write failed: " + path.string());
}

Corpus load_corpus(const std::filesystem::path& path) {
    LittleEndianReader r(path);

    char magic[4];
    r.in.read(magic, 4);
    if (r.in.gcount() != 4 || std::memcmp(magic, kMagic, 4) != 0)
        throw FormatError("not a corpus file (bad magic): " + path.string(), 0);
    r.offset = 4;

    const std::uint16_t version = r.u16();
    if (version != 1)
        throw FormatError("unsupported corpus version " + std::to_string(version), r.offset - 2);
    const std::uint16_t flags = r.u16();
    const bool has_truth = (flags & 1u) != 0;

    Corpus corpus;
    corpus.dim = r.u32();
    const std::uint32_t video_count = r.u32();
    const std::uint32_t query_count = r.u32();
    corpus.provenance = path.string();

    corpus.videos.reserve(video_count);
    for (std::uint32_t v = 0; v < video_count; ++v) {
        VideoRecord video;
        video.video_id = r.u32();
        const std::uint32_t n = r.u32();
        video.frames.assign(n, Vec(corpus.dim));
        for (std::uint32_t i = 0; i < n; ++i)
            for (std::uint32_t j = 0; j < corpus.dim; ++j)
                video.frames[i][j] = static_cast<double>(r.f32le());
        if (has_truth) {
            video.truth.resize(n);
            for (std::uint32_t i = 0; i < n; ++i) {
                video.truth[i].cluster_label = r.i32();
                video.truth[i].is_noise = r.u8() != 0;
                video.truth[i].is_query_target = r.u8() != 0;
            }
        }
        corpus.videos.push_back(std::move(video));
    }

    corpus.queries.reserve(query_count);
    for (std::uint32_t q = 0; q < query_count; ++q) {
        QueryRecord query;
        query.query_id = r.u32();
        query.paired_video_id = r.u32();
        query.embedding.resize(corpus.dim);
        for (std::uint32_t j = 0; j < corpus.dim; ++j)
            query.embedding[j] = static_cast<double>(r.f32le());
        corpus.queries.push_back(std::move(query));
    }
    return corpus;
}

std::vector<ValidationIssue> validate_corpus(const Corpus& corpus) {
    std::vector<ValidationIssue> issues;
    auto add = [&](std::string kind, std::string detail) {
        issues.push_back({std::move(kind), std::move(detail)});
    };

    std::vector<std::uint32_t> seen_videos;
    for (const auto& v : corpus.videos) {
        for (std::uint32_t prior : seen_videos)
            if (prior == v.video_id) {
                add("duplicate_id", "video id " + std::to_string(v.video_id));
                break;
            }
        seen_videos.push_back(v.video_id);

        if (v.frames.empty())
            add("empty_video", "video " + std::to_string(v.video_id) + " has no frames");
        for (std::size_t i = 0; i < v.frames.size(); ++i) {
            if (v.frames[i].size() != corpus.dim)
                add("dimension_mismatch", "video " + std::to_string(v.video_id) + " frame " +
                                              std::to_string(i));
            for (double x : v.frames[i])
                if (!std::isfinite(x)) {
                    add("nan_entry",
                        "video " + std::to_string(v.video_id) + " frame " + std::to_string(i));
                    break;
                }
        }
        if (v.has_truth() && v.truth.size() != v.frames.size())
            add("truth_length_mismatch", "video " + std::to_string(v.video_id));
    }

    std::vector<std::uint32_t> seen_queries;
    for (const auto& q : corpus.queries) {
        for (std::uint32_t prior : seen_queries)
            if (prior == q.query_id) {
                add("duplicate_id", "query id " + std::to_string(q.query_id));
                break;
            }
        seen_queries.push_back(q.query_id);

        if (q.embedding.size() != corpus.dim)
            add("dimension_mismatch", "query " + std::to_string(q.query_id));
        for (double x : q.embedding)
            if (!std::isfinite(x)) {
                add("nan_entry", "query " + std::to_string(q.query_id));
                break;
            }
        if (corpus.find_video(q.paired_video_id) == nullptr)
            add("dangling_pair", "query " + std::to_string(q.query_id) + " pairs missing video " +
                                     std::to_string(q.paired_video_id));
    }
    return issues;
}

std::string validation_report_json(const std::vector<ValidationIssue>& issues) {
    nlohmann::json j;
    j["issue_count"] = issues.size();
    j["issues"] = nlohmann::json::array();
    for (const auto& issue : issues)
        j["issues"].push_back({{"kind", issue.kind}, {"detail", issue.detail}});
    return j.dump(2) + "\n";
}

}  // namespace fsel
