#include <famle/checkpoint.hpp>

#include <fstream>
#include <sstream>
#include <vector>

#include <json.hpp>

namespace famle {

namespace {

using nlohmann::json;

constexpr int kFormatVersion = 1;

json vec_to_json(const Eigen::VectorXd& v)
{
    return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::VectorXd json_to_vec(const json& j)
{
    auto vals = j.get<std::vector<double>>();
    return Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

} // namespace

void save_checkpoint(std::ostream& out, const Checkpoint& ckpt)
{
    const auto& p = ckpt.params;
    json j;
    j["format_version"] = kFormatVersion;
    j["architecture"] = {
        {"state_dim", p.arch.state_dim},
        {"action_dim", p.arch.action_dim},
        {"embed_dim", p.arch.embed_dim},
        {"hidden", p.arch.hidden},
        {"activation", "tanh"},
    };
    j["normalization"] = {
        {"mean", vec_to_json(p.norm.mean)},
        {"std", vec_to_json(p.norm.std)},
    };

    json layers = json::array();
    for (const auto& l : p.layers) {
        std::vector<double> flat;
        flat.reserve(static_cast<size_t>(l.W.size()));
        for (int r = 0; r < l.W.rows(); ++r) {
            for (int c = 0; c < l.W.cols(); ++c) flat.push_back(l.W(r, c));
        }
        layers.push_back({{"rows", l.W.rows()},
                          {"cols", l.W.cols()},
                          {"weights", flat},
                          {"bias", vec_to_json(l.b)}});
    }
    j["layers"] = layers;

    if (ckpt.table) {
        json rows = json::array();
        for (const auto& h : ckpt.table->rows) rows.push_back(vec_to_json(h));
        j["embeddings"] = {{"dim", ckpt.table->dim()}, {"rows", rows}};
    }

    out << j.dump(2) << "\n";
    if (!out) throw IoError("failed writing checkpoint");
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt)
{
    std::ofstream f(path);
    if (!f) throw IoError("cannot open checkpoint for writing: " + path);
    save_checkpoint(f, ckpt);
}

Checkpoint load_checkpoint(std::istream& in)
{
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw IoError(std::string("malformed checkpoint: ") + e.what());
    }
    if (!j.contains("format_version") || j["format_version"].get<int>() != kFormatVersion) {
        throw IoError("unsupported checkpoint format version");
    }

    Checkpoint ckpt;
    ModelParams& p = ckpt.params;
    const auto& arch = j.at("architecture");
    p.arch.state_dim = arch.at("state_dim").get<int>();
    p.arch.action_dim = arch.at("action_dim").get<int>();
    p.arch.embed_dim = arch.at("embed_dim").get<int>();
    p.arch.hidden = arch.at("hidden").get<std::vector<int>>();
    if (arch.at("activation").get<std::string>() != "tanh") {
        throw IoError("unknown activation tag in checkpoint");
    }

    p.norm.mean = json_to_vec(j.at("normalization").at("mean"));
    p.norm.std = json_to_vec(j.at("normalization").at("std"));

    int expect_in = p.arch.input_dim();
    std::vector<int> outs = p.arch.hidden;
    outs.push_back(p.arch.output_dim());
    size_t li = 0;
    for (const auto& jl : j.at("layers")) {
        const int rows = jl.at("rows").get<int>();
        const int cols = jl.at("cols").get<int>();
        if (li >= outs.size() || rows != outs[li] || cols != expect_in) {
            throw IoError("checkpoint layer dimensions do not chain with architecture");
        }
        auto flat = jl.at("weights").get<std::vector<double>>();
        if (static_cast<int>(flat.size()) != rows * cols) {
            throw IoError("checkpoint weight array has wrong length");
        }
        Layer l;
        l.W.resize(rows, cols);
        for (int r = 0; r < rows; ++r) {
            for (int c = 0; c < cols; ++c) l.W(r, c) = flat[static_cast<size_t>(r) * cols + c];
        }
        l.b = json_to_vec(jl.at("bias"));
        if (l.b.size() != rows) throw IoError("checkpoint bias has wrong length");
        if (!l.W.allFinite() || !l.b.allFinite()) throw IoError("non-finite checkpoint values");
        p.layers.push_back(std::move(l));
        expect_in = rows;
        ++li;
    }
    if (li != outs.size()) throw IoError("checkpoint is missing layers");

    if (j.contains("embeddings")) {
        EmbeddingTable table;
        const int d = j["embeddings"].at("dim").get<int>();
        for (const auto& row : j["embeddings"].at("rows")) {
            Eigen::VectorXd h = json_to_vec(row);
            if (h.size() != d) throw IoError("embedding row has wrong dimension");
            table.rows.push_back(std::move(h));
        }
        if (table.rows.empty()) throw IoError("embedding table must not be empty");
        ckpt.table = std::move(table);
    }
    return ckpt;
}

Checkpoint load_checkpoint(const std::string& path)
{
    std::ifstream f(path);
    if (!f) throw IoError("cannot open checkpoint: " + path);
    return load_checkpoint(f);
}

} // namespace famle
