#ifndef TABSYNTH_GENERATOR_HPP
#define TABSYNTH_GENERATOR_HPP

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tabsynth/bayesnet.hpp"
#include "tabsynth/copula.hpp"
#include "tabsynth/ctgan.hpp"
#include "tabsynth/error.hpp"
#include "tabsynth/serialize.hpp"
#include "tabsynth/table.hpp"
#include "tabsynth/tvae.hpp"

namespace tabsynth {

// Uniform fit/sample surface over the four model families. Fitted
// generators are immutable; sampling needs an exclusive rng per call.
class Generator {
public:
    virtual ~Generator() = default;
    virtual std::string name() const = 0;
    virtual void fit(const Table& t, DeterministicRng& rng) = 0;
    virtual Table sample(std::size_t n, DeterministicRng& rng) const = 0;
    virtual Json save() const = 0;
};

class CopulaGenerator final : public Generator {
public:
    std::string name() const override { return "copula"; }
    void fit(const Table& t, DeterministicRng& rng) override { model_ = copula_fit(t, rng); }
    Table sample(std::size_t n, DeterministicRng& rng) const override {
        if (!model_) throw ContractError("copula: sample before fit");
        return copula_sample(*model_, n, rng);
    }
    Json save() const override {
        if (!model_) throw ContractError("copula: save before fit");
        return wrap_model(name(), model_->schema, copula_to_json(*model_));
    }
    void restore(CopulaModel m) { model_ = std::move(m); }

private:
    std::optional<CopulaModel> model_;
};

class BayesNetGenerator final : public Generator {
public:
    explicit BayesNetGenerator(std::size_t bins = 10) : bins_(bins) {}
    std::string name() const override { return "bayes-net"; }
    void fit(const Table& t, DeterministicRng& rng) override { model_ = bn_fit(t, bins_, rng); }
    Table sample(std::size_t n, DeterministicRng& rng) const override {
        if (!model_) throw ContractError("bayes-net: sample before fit");
        return bn_sample(*model_, n, rng);
    }
    Json save() const override {
        if (!model_) throw ContractError("bayes-net: save before fit");
        return wrap_model(name(), model_->schema, bayesnet_to_json(*model_));
    }
    void restore(BayesNetModel m) { model_ = std::move(m); }

private:
    std::size_t bins_;
    std::optional<BayesNetModel> model_;
};

class TvaeGenerator final : public Generator {
public:
    explicit TvaeGenerator(TvaeHyper hyper = {}) : hyper_(hyper) {}
    std::string name() const override { return "tvae"; }
    void fit(const Table& t, DeterministicRng& rng) override {
        model_ = tvae_train(t, hyper_, rng);
    }
    Table sample(std::size_t n, DeterministicRng& rng) const override {
        if (!model_) throw ContractError("tvae: sample before fit");
        return tvae_sample(*model_, n, rng);
    }
    Json save() const override {
        if (!model_) throw ContractError("tvae: save before fit");
        return wrap_model(name(), model_->enc.schema, tvae_to_json(*model_));
    }
    void restore(TvaeModel m) { model_ = std::move(m); }

private:
    TvaeHyper hyper_;
    std::optional<TvaeModel> model_;
};

class CtganGenerator final : public Generator {
public:
    explicit CtganGenerator(CtganHyper hyper = {}) : hyper_(hyper) {}
    std::string name() const override { return "ctgan"; }
    void fit(const Table& t, DeterministicRng& rng) override {
        model_ = ctgan_train(t, hyper_, rng);
    }
    Table sample(std::size_t n, DeterministicRng& rng) const override {
        if (!model_) throw ContractError("ctgan: sample before fit");
        return ctgan_sample(*model_, n, rng);
    }
    Json save() const override {
        if (!model_) throw ContractError("ctgan: save before fit");
        return wrap_model(name(), model_->enc.schema, ctgan_to_json(*model_));
    }
    void restore(CtganModel m) { model_ = std::move(m); }

private:
    CtganHyper hyper_;
    std::optional<CtganModel> model_;
};

namespace detail {

inline std::vector<std::size_t> sizes_from_json(const Json& j) {
    return j.get<std::vector<std::size_t>>();
}

}  // namespace detail

// Builds a generator from its name, an optional hyperparameter profile
// ("compact" keeps the defaults, "deep" widens and lengthens the neural
// models), and per-key hyperparameter overrides.
inline std::unique_ptr<Generator> make_generator(const std::string& name,
                                                 const std::string& profile = "compact",
                                                 const Json& hyper = Json::object()) {
    if (profile != "compact" && profile != "deep")
        throw ContractError("unknown generator profile '" + profile + "'");
    const bool deep = profile == "deep";

    if (name == "copula") {
        return std::make_unique<CopulaGenerator>();
    }
    if (name == "bayes-net") {
        std::size_t bins = 10;
        if (hyper.contains("bins")) bins = hyper.at("bins").get<std::size_t>();
        return std::make_unique<BayesNetGenerator>(bins);
    }
    if (name == "tvae") {
        TvaeHyper h;
        if (deep) {
            h.hidden = {256, 256};
            h.epochs = 450;
        }
        if (hyper.contains("latent")) h.latent = hyper.at("latent").get<std::size_t>();
        if (hyper.contains("hidden")) h.hidden = detail::sizes_from_json(hyper.at("hidden"));
        if (hyper.contains("batch")) h.batch = hyper.at("batch").get<std::size_t>();
        if (hyper.contains("epochs")) h.epochs = hyper.at("epochs").get<std::size_t>();
        if (hyper.contains("lr")) h.lr = hyper.at("lr").get<double>();
        if (hyper.contains("max_k")) h.max_k = hyper.at("max_k").get<std::size_t>();
        if (hyper.contains("sample_categoricals"))
            h.sample_categoricals = hyper.at("sample_categoricals").get<bool>();
        return std::make_unique<TvaeGenerator>(h);
    }
    if (name == "ctgan") {
        CtganHyper h;
        if (deep) {
            h.gen_hidden = {256, 256};
            h.critic_hidden = {256, 256};
            h.epochs = 450;
        }
        if (hyper.contains("noise")) h.noise = hyper.at("noise").get<std::size_t>();
        if (hyper.contains("gen_hidden"))
            h.gen_hidden = detail::sizes_from_json(hyper.at("gen_hidden"));
        if (hyper.contains("critic_hidden"))
            h.critic_hidden = detail::sizes_from_json(hyper.at("critic_hidden"));
        if (hyper.contains("batch")) h.batch = hyper.at("batch").get<std::size_t>();
        if (hyper.contains("epochs")) h.epochs = hyper.at("epochs").get<std::size_t>();
        if (hyper.contains("lr")) h.lr = hyper.at("lr").get<double>();
        if (hyper.contains("pac")) h.pac = hyper.at("pac").get<std::size_t>();
        if (hyper.contains("clip")) h.clip = hyper.at("clip").get<double>();
        if (hyper.contains("tau")) h.tau = hyper.at("tau").get<double>();
        if (hyper.contains("max_k")) h.max_k = hyper.at("max_k").get<std::size_t>();
        if (hyper.contains("condition_on_modes"))
            h.condition_on_modes = hyper.at("condition_on_modes").get<bool>();
        return std::make_unique<CtganGenerator>(h);
    }
    throw ContractError("unknown generator '" + name + "'");
}

// Rehydrates a fitted generator from its JSON document.
inline std::unique_ptr<Generator> load_model(const Json& doc) {
    check_envelope(doc);
    const std::string type = doc.at("model_type").get<std::string>();
    const auto schema = schema_from_json(doc.at("schema"));
    const Json& params = doc.at("parameters");
    if (type == "copula") {
        auto g = std::make_unique<CopulaGenerator>();
        g->restore(copula_from_json(schema, params));
        return g;
    }
    if (type == "bayes-net") {
        auto g = std::make_unique<BayesNetGenerator>();
        g->restore(bayesnet_from_json(schema, params));
        return g;
    }
    if (type == "tvae") {
        auto g = std::make_unique<TvaeGenerator>();
        g->restore(tvae_from_json(params));
        return g;
    }
    if (type == "ctgan") {
        auto g = std::make_unique<CtganGenerator>();
        g->restore(ctgan_from_json(params));
        return g;
    }
    throw FormatError("unknown model_type '" + type + "'");
}

}  // namespace tabsynth

#endif
