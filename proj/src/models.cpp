#include "fsel/models.hpp"

#include <cmath>
#include <fstream>

#include "json.hpp"

namespace fsel {

using nlohmann::json;

double ScorerNet::score(const Vec& frame) const {
    if (frame.size() != weight.size()) throw ShapeError("ScorerNet: dimension mismatch");
    return dot(weight, frame) + bias;
}

Vec ScorerNet::scores(const Mat& frames) const {
    Vec out(frames.size());
    for (std::size_t i = 0; i < frames.size(); ++i) out[i] = score(frames[i]);
    return out;
}

double AttentionSelector::temperature() const { return std::exp(log_temperature); }

Vec AttentionSelector::project_text(const Vec& text) const {
    if (text.size() != dim()) throw ShapeError("AttentionSelector: text dimension mismatch");
    Vec q(proj_dim(), 0.0);
    for (std::size_t a = 0; a < text.size(); ++a)
        for (std::size_t j = 0; j < q.size(); ++j) q[j] += text[a] * w_q[a][j];
    return q;
}

Mat AttentionSelector::project(const Mat& frames, const Mat& w) const {
    Mat out(frames.size(), Vec(proj_dim(), 0.0));
    for (std::size_t i = 0; i < frames.size(); ++i) {
        if (frames[i].size() != dim())
            throw ShapeError("AttentionSelector: frame dimension mismatch");
        for (std::size_t a = 0; a < frames[i].size(); ++a) {
            const double x = frames[i][a];
            for (std::size_t j = 0; j < out[i].size(); ++j) out[i][j] += x * w[a][j];
        }
    }
    return out;
}

AttentionSelector::Forward AttentionSelector::forward(const Mat& frames, const Vec& text) const {
    if (frames.empty()) throw ShapeError("AttentionSelector: no frames");
    const Vec q = project_text(text);
    const Mat keys = project(frames, w_k);
    const Mat values = project(frames, w_v);

    Forward f;
    const double scale = 1.0 / std::sqrt(static_cast<double>(proj_dim()));
    f.logits.resize(frames.size());
    for (std::size_t i = 0; i < frames.size(); ++i) f.logits[i] = dot(q, keys[i]) * scale;
    f.weights = softmax(f.logits);
    f.fused.assign(proj_dim(), 0.0);
    for (std::size_t i = 0; i < frames.size(); ++i)
        for (std::size_t j = 0; j < f.fused.size(); ++j)
            f.fused[j] += f.weights[i] * values[i][j];
    return f;
}

namespace {

void write_json(const json& j, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot open for writing: " + path.string());
    out << j.dump(2) << "\n";
}

json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open for reading: " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw FormatError("malformed model file " + path.string() + ": " + e.what());
    }
    return j;
}

}  // namespace

void save_scorer(const ScorerNet& model, double log_vtc_temperature,
                 const std::filesystem::path& path, const std::string& config_echo,
                 const std::vector<double>& loss_trace) {
    json j;
    j["kind"] = "scorer";
    j["dim"] = model.weight.size();
    j["weight"] = model.weight;
    j["bias"] = model.bias;
    j["log_vtc_temperature"] = log_vtc_temperature;
    if (!config_echo.empty()) j["config"] = config_echo;
    if (!loss_trace.empty()) j["loss_trace"] = loss_trace;
    write_json(j, path);
}

void save_attention(const AttentionSelector& model, const std::filesystem::path& path,
                    const std::string& config_echo, const std::vector<double>& loss_trace) {
    json j;
    j["kind"] = "attention";
    j["dim"] = model.dim();
    j["proj_dim"] = model.proj_dim();
    j["w_q"] = model.w_q;
    j["w_k"] = model.w_k;
    j["w_v"] = model.w_v;
    j["log_cl_temperature"] = model.log_temperature;
    if (!config_echo.empty()) j["config"] = config_echo;
    if (!loss_trace.empty()) j["loss_trace"] = loss_trace;
    write_json(j, path);
}

std::string peek_model_kind(const std::filesystem::path& path) {
    const json j = read_json(path);
    if (!j.contains("kind") || !j["kind"].is_string())
        throw FormatError("model file missing kind: " + path.string());
    return j["kind"].get<std::string>();
}

ScorerNet load_scorer(const std::filesystem::path& path) {
    const json j = read_json(path);
    if (j.value("kind", "") != "scorer")
        throw FormatError("not a scorer model: " + path.string());
    ScorerNet m;
    m.weight = j.at("weight").get<Vec>();
    m.bias = j.at("bias").get<double>();
    if (j.contains("dim") && j["dim"].get<std::size_t>() != m.weight.size())
        throw FormatError("scorer dimension mismatch in " + path.string());
    return m;
}

AttentionSelector load_attention(const std::filesystem::path& path) {
    const json j = read_json(path);
    if (j.value("kind", "") != "attention")
        throw FormatError("not an attention model: " + path.string());
    AttentionSelector m;
    m.w_q = j.at("w_q").get<Mat>();
    m.w_k = j.at("w_k").get<Mat>();
    m.w_v = j.at("w_v").get<Mat>();
    m.log_temperature = j.at("log_cl_temperature").get<double>();
    const auto check = [&](const Mat& w, const char* name) {
        if (w.size() != m.w_q.size() || (w.size() && w.front().size() != m.w_q.front().size()))
            throw FormatError(std::string("attention projection shape mismatch: ") + name +
                              " in " + path.string());
    };
    check(m.w_k, "w_k");
    check(m.w_v, "w_v");
    return m;
}

}  // namespace fsel
