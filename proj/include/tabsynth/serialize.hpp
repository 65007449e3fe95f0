#ifndef TABSYNTH_SERIALIZE_HPP
#define TABSYNTH_SERIALIZE_HPP

#include <string>
#include <vector>

#include <json.hpp>

#include "tabsynth/bayesnet.hpp"
#include "tabsynth/copula.hpp"
#include "tabsynth/ctgan.hpp"
#include "tabsynth/encoding.hpp"
#include "tabsynth/error.hpp"
#include "tabsynth/gmm.hpp"
#include "tabsynth/matrix.hpp"
#include "tabsynth/nn.hpp"
#include "tabsynth/table.hpp"
#include "tabsynth/tvae.hpp"

namespace tabsynth {

using Json = nlohmann::ordered_json;

constexpr int kModelFormatVersion = 1;
constexpr const char* kModelFormatName = "tabsynth-model";

// ---------------------------------------------------------------------------
// schema

inline Json schema_to_json(const std::vector<ColumnSchema>& schema) {
    Json out = Json::array();
    for (const auto& cs : schema) {
        Json j;
        j["name"] = cs.name;
        j["kind"] = cs.kind == ColumnKind::Numeric ? "numeric" : "categorical";
        if (cs.kind == ColumnKind::Numeric) {
            j["observed_min"] = cs.observed_min;
            j["observed_max"] = cs.observed_max;
        } else {
            j["categories"] = cs.categories;
        }
        out.push_back(std::move(j));
    }
    return out;
}

inline std::vector<ColumnSchema> schema_from_json(const Json& j) {
    std::vector<ColumnSchema> schema;
    for (const auto& item : j) {
        ColumnSchema cs;
        cs.name = item.at("name").get<std::string>();
        const std::string kind = item.at("kind").get<std::string>();
        if (kind == "numeric") {
            cs.kind = ColumnKind::Numeric;
            cs.observed_min = item.at("observed_min").get<double>();
            cs.observed_max = item.at("observed_max").get<double>();
        } else if (kind == "categorical") {
            cs.kind = ColumnKind::Categorical;
            cs.categories = item.at("categories").get<std::vector<std::string>>();
        } else {
            throw FormatError("schema_from_json: unknown column kind '" + kind + "'");
        }
        schema.push_back(std::move(cs));
    }
    return schema;
}

// ---------------------------------------------------------------------------
// building blocks

inline Json matrix_to_json(const Matrix& m) {
    Json j;
    j["rows"] = m.rows();
    j["cols"] = m.cols();
    j["data"] = m.data();
    return j;
}

inline Matrix matrix_from_json(const Json& j) {
    Matrix m(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
    m.data() = j.at("data").get<std::vector<double>>();
    if (m.data().size() != m.rows() * m.cols())
        throw FormatError("matrix_from_json: data length does not match shape");
    return m;
}

inline Json mlp_to_json(const Mlp& net) {
    Json layers = Json::array();
    for (const auto& l : net.layers()) {
        Json j;
        j["in"] = l.w.cols();
        j["out"] = l.w.rows();
        switch (l.act) {
            case Activation::Identity: j["activation"] = "identity"; break;
            case Activation::Relu: j["activation"] = "relu"; break;
            case Activation::Tanh: j["activation"] = "tanh"; break;
        }
        j["w"] = l.w.data();
        j["b"] = l.b;
        layers.push_back(std::move(j));
    }
    return layers;
}

inline Mlp mlp_from_json(const Json& j) {
    std::vector<std::size_t> dims;
    std::vector<Activation> acts;
    for (const auto& layer : j) {
        if (dims.empty()) dims.push_back(layer.at("in").get<std::size_t>());
        dims.push_back(layer.at("out").get<std::size_t>());
        const std::string a = layer.at("activation").get<std::string>();
        if (a == "identity") acts.push_back(Activation::Identity);
        else if (a == "relu") acts.push_back(Activation::Relu);
        else if (a == "tanh") acts.push_back(Activation::Tanh);
        else throw FormatError("mlp_from_json: unknown activation '" + a + "'");
    }
    DeterministicRng dummy(0);
    Mlp net(dims, acts, dummy);
    std::size_t i = 0;
    for (const auto& layer : j) {
        auto& l = net.layers()[i++];
        l.w.data() = layer.at("w").get<std::vector<double>>();
        l.b = layer.at("b").get<std::vector<double>>();
        if (l.w.data().size() != l.w.rows() * l.w.cols() || l.b.size() != l.w.rows())
            throw FormatError("mlp_from_json: weight shape mismatch");
    }
    return net;
}

inline Json gmm_to_json(const GaussianMixture& g) {
    Json j;
    j["weights"] = g.weights;
    j["means"] = g.means;
    j["stds"] = g.stds;
    j["sigma_floor"] = g.sigma_floor;
    return j;
}

inline GaussianMixture gmm_from_json(const Json& j) {
    GaussianMixture g;
    g.weights = j.at("weights").get<std::vector<double>>();
    g.means = j.at("means").get<std::vector<double>>();
    g.stds = j.at("stds").get<std::vector<double>>();
    g.sigma_floor = j.at("sigma_floor").get<double>();
    return g;
}

inline Json encoding_to_json(const TableEncoding& enc) {
    Json j;
    j["schema"] = schema_to_json(enc.schema);
    j["width"] = enc.width;
    Json cols = Json::array();
    for (const auto& ce : enc.columns) {
        Json c;
        c["kind"] = ce.kind == ColumnKind::Numeric ? "numeric" : "categorical";
        if (ce.kind == ColumnKind::Numeric) {
            c["gmm"] = gmm_to_json(ce.gmm);
            c["alpha_col"] = ce.alpha_col;
        }
        c["onehot_begin"] = ce.onehot_begin;
        c["onehot_size"] = ce.onehot_size;
        cols.push_back(std::move(c));
    }
    j["columns"] = std::move(cols);
    Json blocks = Json::array();
    for (const auto& b : enc.discrete_blocks) {
        Json bj;
        bj["column"] = b.column;
        bj["is_mode_block"] = b.is_mode_block;
        bj["begin"] = b.begin;
        bj["size"] = b.size;
        bj["counts"] = b.counts;
        blocks.push_back(std::move(bj));
    }
    j["discrete_blocks"] = std::move(blocks);
    return j;
}

inline TableEncoding encoding_from_json(const Json& j) {
    TableEncoding enc;
    enc.schema = schema_from_json(j.at("schema"));
    enc.width = j.at("width").get<std::size_t>();
    for (const auto& c : j.at("columns")) {
        ColumnEncoding ce;
        ce.kind = c.at("kind").get<std::string>() == "numeric" ? ColumnKind::Numeric
                                                               : ColumnKind::Categorical;
        if (ce.kind == ColumnKind::Numeric) {
            ce.gmm = gmm_from_json(c.at("gmm"));
            ce.alpha_col = c.at("alpha_col").get<std::size_t>();
        }
        ce.onehot_begin = c.at("onehot_begin").get<std::size_t>();
        ce.onehot_size = c.at("onehot_size").get<std::size_t>();
        enc.columns.push_back(std::move(ce));
    }
    for (const auto& b : j.at("discrete_blocks")) {
        DiscreteBlock block;
        block.column = b.at("column").get<std::size_t>();
        block.is_mode_block = b.at("is_mode_block").get<bool>();
        block.begin = b.at("begin").get<std::size_t>();
        block.size = b.at("size").get<std::size_t>();
        block.counts = b.at("counts").get<std::vector<double>>();
        enc.discrete_blocks.push_back(std::move(block));
    }
    return enc;
}

// ---------------------------------------------------------------------------
// model payloads

inline Json copula_to_json(const CopulaModel& m) {
    Json params;
    Json marginals = Json::array();
    for (const auto& marginal : m.marginals) {
        Json j;
        if (std::holds_alternative<EmpiricalCdf>(marginal)) {
            j["type"] = "ecdf";
            j["sorted_values"] = std::get<EmpiricalCdf>(marginal).sorted_values();
        } else {
            j["type"] = "intervals";
            j["boundaries"] = std::get<CategoricalIntervalCoder>(marginal).boundaries();
        }
        marginals.push_back(std::move(j));
    }
    params["marginals"] = std::move(marginals);
    params["correlation"] = matrix_to_json(m.corr.values);
    return params;
}

inline CopulaModel copula_from_json(const std::vector<ColumnSchema>& schema, const Json& params) {
    CopulaModel m;
    m.schema = schema;
    for (const auto& j : params.at("marginals")) {
        if (j.at("type").get<std::string>() == "ecdf")
            m.marginals.emplace_back(EmpiricalCdf(j.at("sorted_values").get<std::vector<double>>()));
        else
            m.marginals.emplace_back(
                CategoricalIntervalCoder(j.at("boundaries").get<std::vector<double>>()));
    }
    m.corr = {matrix_from_json(params.at("correlation"))};
    return m;
}

inline Json bayesnet_to_json(const BayesNetModel& m) {
    Json params;
    params["dag"] = m.dag;
    params["edges"] = m.discretizer.edges;
    params["domain_sizes"] = m.domain_sizes;
    Json cpts = Json::array();
    for (const auto& cpt : m.cpts) {
        Json j;
        j["parent_configs"] = cpt.parent_configs;
        j["domain"] = cpt.domain;
        j["probs"] = cpt.probs;
        cpts.push_back(std::move(j));
    }
    params["cpts"] = std::move(cpts);
    return params;
}

inline BayesNetModel bayesnet_from_json(const std::vector<ColumnSchema>& schema,
                                        const Json& params) {
    BayesNetModel m;
    m.schema = schema;
    m.dag = params.at("dag").get<Dag>();
    m.discretizer.edges = params.at("edges").get<std::vector<std::vector<double>>>();
    m.domain_sizes = params.at("domain_sizes").get<std::vector<std::size_t>>();
    for (const auto& j : params.at("cpts")) {
        Cpt cpt;
        cpt.parent_configs = j.at("parent_configs").get<std::size_t>();
        cpt.domain = j.at("domain").get<std::size_t>();
        cpt.probs = j.at("probs").get<std::vector<double>>();
        m.cpts.push_back(std::move(cpt));
    }
    m.topo_order = topological_order(m.dag);
    return m;
}

inline Json tvae_to_json(const TvaeModel& m) {
    Json params;
    params["latent"] = m.hyper.latent;
    params["sample_categoricals"] = m.hyper.sample_categoricals;
    params["encoding"] = encoding_to_json(m.enc);
    params["encoder"] = mlp_to_json(m.encoder);
    params["decoder"] = mlp_to_json(m.decoder);
    params["numeric_logvar"] = m.numeric_logvar.values;
    return params;
}

inline TvaeModel tvae_from_json(const Json& params) {
    TvaeModel m;
    m.hyper.latent = params.at("latent").get<std::size_t>();
    m.hyper.sample_categoricals = params.at("sample_categoricals").get<bool>();
    m.enc = encoding_from_json(params.at("encoding"));
    m.encoder = mlp_from_json(params.at("encoder"));
    m.decoder = mlp_from_json(params.at("decoder"));
    const auto lv = params.at("numeric_logvar").get<std::vector<double>>();
    m.numeric_logvar = AdamVector(lv.size());
    m.numeric_logvar.values = lv;
    return m;
}

inline Json ctgan_to_json(const CtganModel& m) {
    Json params;
    params["noise"] = m.hyper.noise;
    params["pac"] = m.hyper.pac;
    params["tau"] = m.hyper.tau;
    params["batch"] = m.hyper.batch;
    params["encoding"] = encoding_to_json(m.enc);
    Json cond;
    cond["block_ids"] = m.cond.block_ids;
    cond["offsets"] = m.cond.offsets;
    cond["width"] = m.cond.width;
    cond["log_freq"] = m.cond.log_freq;
    params["conditioning"] = std::move(cond);
    params["generator"] = mlp_to_json(m.generator);
    params["critic"] = mlp_to_json(m.critic);
    return params;
}

inline CtganModel ctgan_from_json(const Json& params) {
    CtganModel m;
    m.hyper.noise = params.at("noise").get<std::size_t>();
    m.hyper.pac = params.at("pac").get<std::size_t>();
    m.hyper.tau = params.at("tau").get<double>();
    m.hyper.batch = params.at("batch").get<std::size_t>();
    m.enc = encoding_from_json(params.at("encoding"));
    const auto& cond = params.at("conditioning");
    m.cond.block_ids = cond.at("block_ids").get<std::vector<std::size_t>>();
    m.cond.offsets = cond.at("offsets").get<std::vector<std::size_t>>();
    m.cond.width = cond.at("width").get<std::size_t>();
    m.cond.log_freq = cond.at("log_freq").get<std::vector<std::vector<double>>>();
    m.generator = mlp_from_json(params.at("generator"));
    m.critic = mlp_from_json(params.at("critic"));
    return m;
}

// ---------------------------------------------------------------------------
// envelope

inline Json wrap_model(const std::string& model_type, const std::vector<ColumnSchema>& schema,
                       Json parameters) {
    Json j;
    j["format"] = kModelFormatName;
    j["version"] = kModelFormatVersion;
    j["model_type"] = model_type;
    j["schema"] = schema_to_json(schema);
    j["parameters"] = std::move(parameters);
    return j;
}

inline void check_envelope(const Json& j) {
    if (!j.contains("format") || j.at("format").get<std::string>() != kModelFormatName)
        throw FormatError("not a tabsynth model document");
    if (!j.contains("version") || !j.at("version").is_number_integer())
        throw FormatError("model document has no integer version");
    if (j.at("version").get<int>() != kModelFormatVersion)
        throw FormatError("unsupported model document version " +
                          std::to_string(j.at("version").get<int>()));
}

}  // namespace tabsynth

#endif
