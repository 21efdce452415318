#include "fsel/cli.hpp"

#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "fsel/bench.hpp"
#include "fsel/corpus.hpp"
#include "fsel/learn.hpp"
#include "fsel/models.hpp"
#include "fsel/retrieval.hpp"
#include "fsel/selectors.hpp"
#include "json.hpp"

namespace fsel {
namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string hex64(std::uint64_t value) {
    std::ostringstream out;
    out << std::hex << std::setw(16) << std::setfill('0') << value;
    return out.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot open for writing: " + path);
    out << content;
    if (!out) throw FormatError("write failed: " + path);
}

// One manifest per subcommand invocation, written beside the primary output.
// Checksums let a later run verify it reproduced the same artifacts.
struct Manifest {
    std::string subcommand;
    json arguments = json::object();
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;

    void write() const {
        json j;
        j["subcommand"] = subcommand;
        j["arguments"] = arguments;
        j["inputs"] = json::array();
        for (const auto& p : inputs)
            j["inputs"].push_back({{"path", p}, {"fnv1a64", hex64(fnv1a64_file(p))}});
        j["outputs"] = json::array();
        for (const auto& p : outputs)
            j["outputs"].push_back({{"path", p}, {"fnv1a64", hex64(fnv1a64_file(p))}});
        write_text_file(outputs.front() + ".manifest.json", j.dump(2) + "\n");
    }
};

std::vector<int> parse_k_list(const std::string& text) {
    std::vector<int> ks;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            const int k = std::stoi(item, &used);
            if (used != item.size() || k < 1) throw std::invalid_argument(item);
            ks.push_back(k);
        } catch (const std::exception&) {
            throw UsageError("bad K value '" + item + "' (expected positive integers)");
        }
    }
    if (ks.empty()) throw UsageError("empty K list");
    return ks;
}

Policy parse_policy(const std::string& name) {
    const auto p = policy_from_name(name);
    if (!p)
        throw UsageError("unknown policy '" + name +
                         "' (expected uni, rand, redun, lq, nint or int)");
    return *p;
}

// Loads each --model file, keyed by kind.
struct LoadedModels {
    std::optional<ScorerNet> scorer;
    std::optional<AttentionSelector> attention;

    void load(const std::vector<std::string>& paths) {
        for (const auto& path : paths) {
            const std::string kind = peek_model_kind(path);
            if (kind == "scorer" && !scorer)
                scorer = load_scorer(path);
            else if (kind == "attention" && !attention)
                attention = load_attention(path);
        }
    }

    void require_for(Policy policy) const {
        if (policy_needs_scorer(policy) && !scorer)
            throw UsageError("policy 'lq' needs a trained scorer model (--model)");
        if (policy_needs_attention(policy) && !attention)
            throw UsageError("policy 'int' needs a trained attention model (--model)");
    }

    void configure(SelectorConfig& config) const {
        config.scorer = scorer ? &*scorer : nullptr;
        config.attention = attention ? &*attention : nullptr;
    }
};

std::string table_path_for(const std::string& report_path) {
    const auto dot = report_path.rfind('.');
    if (dot != std::string::npos && report_path.substr(dot) == ".json")
        return report_path.substr(0, dot) + ".txt";
    return report_path + ".txt";
}

// --- gen ---------------------------------------------------------------------

struct GenOptions {
    SynthSpec spec;
    std::string output;
};

int do_gen(const GenOptions& opt) {
    const Corpus corpus = generate_synthetic(opt.spec);
    save_corpus(corpus, opt.output);

    Manifest m;
    m.subcommand = "gen";
    m.arguments = {{"videos", opt.spec.video_count},
                   {"frames", opt.spec.frames_per_video},
                   {"clusters", opt.spec.planted_clusters},
                   {"noise_frames", opt.spec.noise_frames_per_video},
                   {"dim", opt.spec.dim},
                   {"separation", opt.spec.cluster_separation},
                   {"query_noise", opt.spec.query_noise_scale},
                   {"seed", opt.spec.seed},
                   {"output", opt.output}};
    m.outputs = {opt.output};
    m.write();
    return kExitOk;
}

// --- select ------------------------------------------------------------------

struct SelectOptions {
    std::string policy_name;
    int k = 1;
    int z = 0;
    std::uint64_t seed = 0;
    std::vector<std::string> model_paths;
    std::optional<std::int64_t> query_id;
    std::string corpus_path;
    std::string output;
};

int do_select(const SelectOptions& opt) {
    const Policy policy = parse_policy(opt.policy_name);
    LoadedModels models;
    models.load(opt.model_paths);
    models.require_for(policy);

    const Corpus corpus = load_corpus(opt.corpus_path);
    SelectorConfig config;
    config.policy = policy;
    config.k = opt.k;
    config.z = opt.z;
    config.seed = opt.seed;
    models.configure(config);

    std::vector<SelectionRecord> records;
    if (!policy_is_text_guided(policy)) {
        if (opt.query_id)
            throw UsageError("--query-id applies only to the text-guided policies");
        for (const auto& video : corpus.videos)
            records.push_back({video.video_id, std::nullopt,
                               run_selector(video.frames, nullptr, config, video.video_id)});
    } else if (opt.query_id) {
        const QueryRecord* query = nullptr;
        for (const auto& q : corpus.queries)
            if (q.query_id == static_cast<std::uint32_t>(*opt.query_id)) query = &q;
        if (!query) throw DomainError("query id not present in corpus");
        for (const auto& video : corpus.videos)
            records.push_back({video.video_id, query->query_id,
                               run_selector(video.frames, &query->embedding, config,
                                            video.video_id)});
    } else {
        // one selection per query against its paired video
        for (const auto& query : corpus.queries) {
            const VideoRecord* video = corpus.find_video(query.paired_video_id);
            if (!video) throw DomainError("query pairs a missing video");
            records.push_back({video->video_id, query.query_id,
                               run_selector(video->frames, &query.embedding, config,
                                            video->video_id)});
        }
    }

    write_text_file(opt.output, selections_to_json(policy_name(policy), opt.k, records));

    Manifest m;
    m.subcommand = "select";
    m.arguments = {{"policy", opt.policy_name}, {"k", opt.k},   {"z", opt.z},
                   {"seed", opt.seed},          {"corpus", opt.corpus_path},
                   {"output", opt.output}};
    if (opt.query_id) m.arguments["query_id"] = *opt.query_id;
    m.arguments["models"] = opt.model_paths;
    m.inputs.push_back(opt.corpus_path);
    for (const auto& p : opt.model_paths) m.inputs.push_back(p);
    m.outputs = {opt.output};
    m.write();
    return kExitOk;
}

// --- train -------------------------------------------------------------------

struct TrainOptions {
    std::string target;
    std::string corpus_path;
    TrainConfig config;
    std::string output;
};

int do_train(const TrainOptions& opt) {
    const Corpus corpus = load_corpus(opt.corpus_path);

    std::ostringstream echo;
    echo << "target=" << opt.target << " epochs=" << opt.config.epochs
         << " batch=" << opt.config.batch_size << " lr=" << opt.config.learning_rate
         << " seed=" << opt.config.seed << " corpus=" << opt.corpus_path;

    if (opt.target == "scorer") {
        const ScorerTrainResult result = train_scorer(corpus, opt.config);
        save_scorer(result.model, result.log_vtc_temperature, opt.output, echo.str(),
                    result.loss_trace);
    } else if (opt.target == "attention") {
        TrainConfig config = opt.config;
        config.use_cl = true;  // the contrastive-selection objective gate
        const AttentionTrainResult result = train_attention_selector(corpus, config);
        save_attention(result.model, opt.output, echo.str(), result.loss_trace);
    } else {
        throw UsageError("unknown train target '" + opt.target + "'");
    }

    Manifest m;
    m.subcommand = "train";
    m.arguments = {{"target", opt.target},
                   {"corpus", opt.corpus_path},
                   {"epochs", opt.config.epochs},
                   {"batch", opt.config.batch_size},
                   {"lr", opt.config.learning_rate},
                   {"seed", opt.config.seed},
                   {"output", opt.output}};
    m.inputs = {opt.corpus_path};
    m.outputs = {opt.output};
    m.write();
    return kExitOk;
}

// --- eval --------------------------------------------------------------------

struct EvalOptions {
    std::string policy_name;
    std::string combine;
    std::string k_list;
    int z = 0;
    std::uint64_t seed = 0;
    std::vector<std::string> model_paths;
    std::string corpus_path;
    std::string report_path;
};

int do_eval(const EvalOptions& opt) {
    if (opt.policy_name.empty() == opt.combine.empty())
        throw UsageError("eval needs exactly one of --policy or --combine");

    std::vector<Policy> parts;
    if (!opt.combine.empty()) {
        std::stringstream ss(opt.combine);
        std::string item;
        while (std::getline(ss, item, ',')) parts.push_back(parse_policy(item));
        if (parts.size() < 2) throw UsageError("--combine needs at least two policies");
    } else {
        parts.push_back(parse_policy(opt.policy_name));
    }

    LoadedModels models;
    models.load(opt.model_paths);
    for (Policy p : parts) models.require_for(p);

    const std::vector<int> ks = parse_k_list(opt.k_list);
    const Corpus corpus = load_corpus(opt.corpus_path);

    std::vector<RankingReport> rows;
    for (int k : ks) {
        if (!opt.combine.empty()) {
            std::vector<SelectorConfig> configs;
            for (Policy p : parts) {
                SelectorConfig c;
                c.policy = p;
                c.k = k;
                c.z = opt.z;
                c.seed = opt.seed;
                models.configure(c);
                configs.push_back(c);
            }
            RankingReport report = evaluate_combination(corpus, configs, k);
            if (opt.z > 0) report.policy += " (Z=" + std::to_string(opt.z) + ")";
            rows.push_back(std::move(report));
        } else {
            SelectorConfig config;
            config.policy = parts.front();
            config.k = k;
            config.z = opt.z;
            config.seed = opt.seed;
            models.configure(config);
            rows.push_back(evaluate_policy(corpus, config));
        }
    }

    json j;
    j["corpus"] = opt.corpus_path;
    j["reports"] = json::array();
    for (const auto& r : rows) j["reports"].push_back(json::parse(ranking_report_json(r)));
    write_text_file(opt.report_path, j.dump(2) + "\n");

    const std::string table = ranking_table(rows);
    const std::string table_path = table_path_for(opt.report_path);
    write_text_file(table_path, table);
    std::cout << table;

    Manifest m;
    m.subcommand = "eval";
    m.arguments = {{"policy", opt.policy_name}, {"combine", opt.combine},
                   {"k", opt.k_list},           {"z", opt.z},
                   {"seed", opt.seed},          {"corpus", opt.corpus_path},
                   {"report", opt.report_path}};
    m.arguments["models"] = opt.model_paths;
    m.inputs.push_back(opt.corpus_path);
    for (const auto& p : opt.model_paths) m.inputs.push_back(p);
    m.outputs = {opt.report_path, table_path};
    m.write();
    return kExitOk;
}

// --- bench -------------------------------------------------------------------

struct BenchOptions {
    std::string policy_name;
    int k = 1;
    int z = 0;
    std::uint64_t seed = 0;
    int repetitions = 5;
    std::vector<std::string> model_paths;
    std::string corpus_path;
    std::string report_path;
};

int do_bench(const BenchOptions& opt) {
    const Policy policy = parse_policy(opt.policy_name);
    LoadedModels models;
    models.load(opt.model_paths);
    models.require_for(policy);

    const Corpus corpus = load_corpus(opt.corpus_path);
    SelectorConfig config;
    config.policy = policy;
    config.k = opt.k;
    config.z = opt.z;
    config.seed = opt.seed;
    models.configure(config);

    const EfficiencyReport report = time_policy(corpus, config, opt.repetitions);
    write_text_file(opt.report_path, efficiency_report_json(report));

    const std::string table = efficiency_table({report});
    const std::string table_path = table_path_for(opt.report_path);
    write_text_file(table_path, table);
    std::cout << table;

    Manifest m;
    m.subcommand = "bench";
    m.arguments = {{"policy", opt.policy_name}, {"k", opt.k},
                   {"z", opt.z},                {"seed", opt.seed},
                   {"reps", opt.repetitions},   {"corpus", opt.corpus_path},
                   {"report", opt.report_path}};
    m.arguments["models"] = opt.model_paths;
    m.inputs.push_back(opt.corpus_path);
    for (const auto& p : opt.model_paths) m.inputs.push_back(p);
    m.outputs = {opt.report_path, table_path};
    m.write();
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"frame-selection toolkit for embedding-based text-to-video retrieval"};
    app.require_subcommand(1);

    GenOptions gen;
    auto* gen_cmd = app.add_subcommand("gen", "generate a synthetic embedding corpus");
    gen_cmd->add_option("--videos", gen.spec.video_count, "number of videos")->required();
    gen_cmd->add_option("--frames", gen.spec.frames_per_video, "frames per video")->required();
    gen_cmd->add_option("--clusters", gen.spec.planted_clusters, "planted content clusters");
    gen_cmd->add_option("--noise-frames", gen.spec.noise_frames_per_video,
                        "noise frames per video");
    gen_cmd->add_option("--dim", gen.spec.dim, "embedding dimension");
    gen_cmd->add_option("--separation", gen.spec.cluster_separation,
                        "inter-centroid distance over intra-cluster radius");
    gen_cmd->add_option("--query-noise", gen.spec.query_noise_scale,
                        "query perturbation scale");
    gen_cmd->add_option("--seed", gen.spec.seed, "generator seed");
    gen_cmd->add_option("-o,--output", gen.output, "corpus output path")->required();

    SelectOptions sel;
    auto* sel_cmd = app.add_subcommand("select", "run one frame-selection policy");
    sel_cmd->add_option("--policy", sel.policy_name, "uni|rand|redun|lq|nint|int")->required();
    sel_cmd->add_option("-k", sel.k, "frames to keep")->required();
    sel_cmd->add_option("--z", sel.z, "cluster count for redundancy scoring");
    sel_cmd->add_option("--seed", sel.seed, "selection seed");
    sel_cmd->add_option("--model", sel.model_paths, "trained model file (repeatable)");
    std::int64_t query_id_raw = -1;
    auto* qopt = sel_cmd->add_option("--query-id", query_id_raw,
                                     "restrict a text-guided policy to one query");
    sel_cmd->add_option("--corpus", sel.corpus_path, "corpus file")->required();
    sel_cmd->add_option("-o,--output", sel.output, "selections output path")->required();

    TrainOptions train;
    train.config.epochs = 200;
    auto* train_cmd = app.add_subcommand("train", "train a selector model");
    train_cmd->add_option("--target", train.target, "scorer|attention")->required();
    train_cmd->add_option("--corpus", train.corpus_path, "corpus file")->required();
    train_cmd->add_option("--epochs", train.config.epochs, "training epochs");
    train_cmd->add_option("--lr", train.config.learning_rate, "learning rate");
    train_cmd->add_option("--batch", train.config.batch_size, "contrastive batch size");
    train_cmd->add_option("--seed", train.config.seed, "training seed");
    train_cmd->add_option("-o,--output", train.output, "model output path")->required();

    EvalOptions eval;
    auto* eval_cmd = app.add_subcommand("eval", "evaluate retrieval for a policy");
    eval_cmd->add_option("--policy", eval.policy_name, "single policy to evaluate");
    eval_cmd->add_option("--combine", eval.combine, "comma list of policies to score-sum");
    eval_cmd->add_option("-k", eval.k_list, "K or comma list of Ks")->required();
    eval_cmd->add_option("--z", eval.z, "cluster count for redundancy scoring");
    eval_cmd->add_option("--seed", eval.seed, "evaluation seed");
    eval_cmd->add_option("--model", eval.model_paths, "trained model file (repeatable)");
    eval_cmd->add_option("--corpus", eval.corpus_path, "corpus file")->required();
    eval_cmd->add_option("--report", eval.report_path, "report output path")->required();

    BenchOptions bench;
    auto* bench_cmd = app.add_subcommand("bench", "measure interaction cost for a policy");
    bench_cmd->add_option("--policy", bench.policy_name, "policy to time")->required();
    bench_cmd->add_option("-k", bench.k, "frames to keep")->required();
    bench_cmd->add_option("--z", bench.z, "cluster count for redundancy scoring");
    bench_cmd->add_option("--seed", bench.seed, "selection seed");
    bench_cmd->add_option("--reps", bench.repetitions, "timing repetitions")->required();
    bench_cmd->add_option("--model", bench.model_paths, "trained model file (repeatable)");
    bench_cmd->add_option("--corpus", bench.corpus_path, "corpus file")->required();
    bench_cmd->add_option("--report", bench.report_path, "report output path")->required();

    std::vector<std::string> argv(args.rbegin(), args.rend());  // CLI11 takes reversed args
    try {
        app.parse(argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*gen_cmd) return do_gen(gen);
        if (*sel_cmd) {
            if (qopt->count() > 0) sel.query_id = query_id_raw;
            return do_select(sel);
        }
        if (*train_cmd) return do_train(train);
        if (*eval_cmd) return do_eval(eval);
        if (*bench_cmd) return do_bench(bench);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const FormatError& e) {
        std::cerr << "format error: " << e.what() << "\n";
        return kExitData;
    } catch (const DomainError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const ShapeError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitUsage;
}

}  // namespace fsel
