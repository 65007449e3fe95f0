#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <vector>

#include "oracles.hpp"
#include "tabsynth/ctgan.hpp"

using namespace tabsynth;

namespace {

Table one_categorical(const std::vector<double>& freqs, std::size_t n, DeterministicRng& rng) {
    Table t;
    ColumnSchema cs;
    cs.name = "c";
    cs.kind = ColumnKind::Categorical;
    for (std::size_t j = 0; j < freqs.size(); ++j) cs.categories.push_back("k" + std::to_string(j));
    CategoricalColumn col(n);
    for (auto& v : col) {
        double u = rng.uniform();
        std::int32_t pick = 0;
        for (std::size_t j = 0; j < freqs.size(); ++j) {
            u -= freqs[j];
            if (u < 0.0) {
                pick = static_cast<std::int32_t>(j);
                break;
            }
        }
        v = pick;
    }
    t.schema = {cs};
    t.columns = {std::move(col)};
    return t;
}

CtganHyper tiny_hyper() {
    CtganHyper h;
    h.noise = 3;
    h.gen_hidden = {8};
    h.critic_hidden = {8};
    h.batch = 8;
    h.pac = 2;
    h.max_k = 2;
    return h;
}

}  // namespace

TEST_CASE("condvec has one hot per row and the right width") {
    DeterministicRng data_rng(1);
    const Table t = one_categorical({0.5, 0.3, 0.2}, 100, data_rng);
    DeterministicRng rng(2);
    CtganModel m = ctgan_fit_prepare(t, tiny_hyper(), rng);
    REQUIRE(m.cond.width == 3);
    auto [vec, choices] = ctgan_sample_condvec(m, 16, rng);
    REQUIRE(vec.rows() == 16);
    REQUIRE(vec.cols() == 3);
    for (std::size_t r = 0; r < 16; ++r) {
        double s = 0.0;
        for (std::size_t c = 0; c < 3; ++c) s += vec(r, c);
        REQUIRE(s == 1.0);
        REQUIRE(vec(r, choices[r].category) == 1.0);
    }
}

TEST_CASE("log-frequency sampling oversamples the rare category") {
    DeterministicRng data_rng(3);
    const Table t = one_categorical({0.9, 0.1}, 1000, data_rng);
    DeterministicRng rng(4);
    CtganModel m = ctgan_fit_prepare(t, tiny_hyper(), rng);
    auto [vec, choices] = ctgan_sample_condvec(m, 10000, rng);
    double rare = 0.0;
    for (const auto& ch : choices)
        if (ch.category == 1) rare += 1.0;
    rare /= 10000.0;
    CHECK(rare > 0.15);  // plain frequency sampling would give ~0.1
    CHECK(rare < 0.5);
}

TEST_CASE("no discrete information disables conditioning") {
    Table t;
    t.schema = {{"x", ColumnKind::Numeric, {}, 0, 0}};
    NumericColumn v(60);
    DeterministicRng data_rng(5);
    for (double& x : v) x = data_rng.normal();
    t.columns = {std::move(v)};
    t.refresh_numeric_bounds();
    CtganHyper h = tiny_hyper();
    h.max_k = 1;  // single mode everywhere, no conditionable block
    DeterministicRng rng(6);
    CtganModel m = ctgan_fit_prepare(t, h, rng);
    REQUIRE(m.cond.width == 0);
    auto [vec, choices] = ctgan_sample_condvec(m, 8, rng);
    REQUIRE(vec.cols() == 0);
    const auto picked = ctgan_training_batch(m, choices, t.n_rows(), rng);
    REQUIRE(picked.size() == 8);
}

TEST_CASE("training batches contain only matching rows, uniformly") {
    DeterministicRng data_rng(7);
    const Table t = one_categorical({0.4, 0.6}, 50, data_rng);
    DeterministicRng rng(8);
    CtganModel m = ctgan_fit_prepare(t, tiny_hyper(), rng);

    std::vector<CondChoice> choices(10000, CondChoice{0, 1});
    const auto picked = ctgan_training_batch(m, choices, t.n_rows(), rng);
    std::map<std::size_t, double> counts;
    for (std::size_t idx : picked) {
        REQUIRE(t.categorical(0)[idx] == 1);  // filter contract
        counts[idx] += 1.0;
    }
    // uniformity: chi-squared against the uniform over matching rows
    const double k = static_cast<double>(m.cond.rows[0][1].size());
    const double expected = 10000.0 / k;
    double chi2 = 0.0;
    for (std::size_t idx : m.cond.rows[0][1])
        chi2 += (counts[idx] - expected) * (counts[idx] - expected) / expected;
    // dof = k-1; loose 0.999 quantile bound ~ k + 3*sqrt(2k) + 10
    CHECK(chi2 < k + 3.0 * std::sqrt(2.0 * k) + 10.0);
}

TEST_CASE("rare categories still fill whole batches") {
    DeterministicRng data_rng(9);
    Table t = one_categorical({0.99, 0.01}, 200, data_rng);
    // ensure at least one rare row exists
    t.categorical(0)[0] = 1;
    DeterministicRng rng(10);
    CtganModel m = ctgan_fit_prepare(t, tiny_hyper(), rng);
    std::vector<CondChoice> choices(64, CondChoice{0, 1});
    const auto picked = ctgan_training_batch(m, choices, t.n_rows(), rng);
    REQUIRE(picked.size() == 64);
    for (std::size_t idx : picked) REQUIRE(t.categorical(0)[idx] == 1);
}

TEST_CASE("critic output is one scalar per pac group") {
    DeterministicRng data_rng(11);
    const Table t = one_categorical({0.5, 0.5}, 64, data_rng);
    DeterministicRng rng(12);
    CtganModel m = ctgan_fit_prepare(t, tiny_hyper(), rng);
    REQUIRE(m.critic.output_width() == 1);
    REQUIRE(m.critic.input_width() == m.hyper.pac * (m.enc.width + m.cond.width));
}

TEST_CASE("critic loss gradients match finite differences") {
    DeterministicRng data_rng(13);
    const Table t = one_categorical({0.6, 0.4}, 64, data_rng);
    for (int trial = 0; trial < 5; ++trial) {
        DeterministicRng rng(100 + trial);
        Matrix encoded;
        CtganModel m = ctgan_fit_prepare(t, tiny_hyper(), rng, &encoded);
        const std::size_t batch = m.hyper.batch;

        auto [cond, choices] = ctgan_sample_condvec(m, batch, rng);
        const auto picked = ctgan_training_batch(m, choices, t.n_rows(), rng);
        Matrix real_rows(batch, m.enc.width);
        for (std::size_t r = 0; r < batch; ++r)
            std::copy(encoded.row_ptr(picked[r]), encoded.row_ptr(picked[r]) + m.enc.width,
                      real_rows.row_ptr(r));
        Matrix z(batch, m.hyper.noise);
        for (double& v : z.data()) v = rng.normal();
        Matrix gumbel(batch, m.enc.width);
        ctgan_fill_gumbel(gumbel, m.enc, rng);

        ctgan_critic_loss_and_grads(m, real_rows, cond, z, gumbel);
        const auto analytic = m.critic.flatten_grads();

        auto loss_of = [&](const std::vector<double>& p) {
            CtganModel probe = m;
            probe.critic.set_params(p);
            return ctgan_critic_loss_and_grads(probe, real_rows, cond, z, gumbel);
        };
        const auto numeric =
            oracles::finite_difference_gradient(loss_of, m.critic.flatten_params());
        REQUIRE(oracles::gradient_relative_error(analytic, numeric) < 1e-4);
    }
}

TEST_CASE("generator loss gradients match finite differences") {
    DeterministicRng data_rng(14);
    const Table t = one_categorical({0.5, 0.3, 0.2}, 64, data_rng);
    for (int trial = 0; trial < 5; ++trial) {
        DeterministicRng rng(200 + trial);
        CtganModel m = ctgan_fit_prepare(t, tiny_hyper(), rng);
        const std::size_t batch = m.hyper.batch;

        auto [cond, choices] = ctgan_sample_condvec(m, batch, rng);
        Matrix z(batch, m.hyper.noise);
        for (double& v : z.data()) v = rng.normal();
        Matrix gumbel(batch, m.enc.width);
        ctgan_fill_gumbel(gumbel, m.enc, rng);

        ctgan_generator_loss_and_grads(m, cond, choices, z, gumbel);
        const auto analytic = m.generator.flatten_grads();

        auto loss_of = [&](const std::vector<double>& p) {
            CtganModel probe = m;
            probe.generator.set_params(p);
            return ctgan_generator_loss_and_grads(probe, cond, choices, z, gumbel);
        };
        const auto numeric =
            oracles::finite_difference_gradient(loss_of, m.generator.flatten_params());
        REQUIRE(oracles::gradient_relative_error(analytic, numeric) < 1e-4);
    }
}

TEST_CASE("smoke training satisfies conditions and clips critic weights") {
    DeterministicRng data_rng(15);
    const Table t = one_categorical({0.7, 0.3}, 200, data_rng);
    CtganHyper h = tiny_hyper();
    h.batch = 20;
    h.pac = 2;
    h.epochs = 60;
    h.lr = 1e-3;
    DeterministicRng rng(16);
    const CtganModel m = ctgan_train(t, h, rng);

    for (double p : m.critic.flatten_params()) {
        REQUIRE(p <= h.clip);
        REQUIRE(p >= -h.clip);
    }

    // conditional generation: generate with fixed condition vectors and
    // check the requested category dominates
    DeterministicRng srng(17);
    Mlp generator = m.generator;
    const std::size_t batch = 200;
    Matrix cond(batch, m.cond.width);
    for (std::size_t r = 0; r < batch; ++r) cond(r, 1) = 1.0;  // request category 1
    Matrix z(batch, h.noise);
    for (double& v : z.data()) v = srng.normal();
    const Matrix raw = generator.forward(detail::hconcat(z, cond));
    const Matrix act = ctgan_activate(raw, m.enc, nullptr, h.tau, true);
    DeterministicRng drng(18);
    const Table synth = msn_decode(act, m.enc, drng);
    double hit = 0.0;
    for (auto v : synth.categorical(0))
        if (v == 1) hit += 1.0;
    CHECK(hit / static_cast<double>(batch) >= 0.9);
}

TEST_CASE("sampling produces the requested row count deterministically") {
    DeterministicRng data_rng(19);
    Table t = one_categorical({0.5, 0.5}, 120, data_rng);
    // add a numeric column so both paths are exercised
    NumericColumn num(120);
    for (double& v : num) v = data_rng.normal() * 3.0;
    t.schema.push_back({"x", ColumnKind::Numeric, {}, 0, 0});
    t.columns.emplace_back(std::move(num));
    t.refresh_numeric_bounds();

    CtganHyper h = tiny_hyper();
    h.batch = 24;
    h.pac = 4;
    h.epochs = 3;
    DeterministicRng rng(20);
    const CtganModel m = ctgan_train(t, h, rng);
    DeterministicRng s1(21), s2(21);
    const Table a = ctgan_sample(m, 37, s1);
    const Table b = ctgan_sample(m, 37, s2);
    REQUIRE(a.n_rows() == 37);
    REQUIRE(a.categorical(0) == b.categorical(0));
    REQUIRE(a.numeric(1) == b.numeric(1));
    REQUIRE(schema_compatible(a.schema, t.schema));
}

TEST_CASE("batch must be a multiple of pac") {
    DeterministicRng data_rng(22);
    const Table t = one_categorical({0.5, 0.5}, 60, data_rng);
    CtganHyper h = tiny_hyper();
    h.batch = 7;
    h.pac = 2;
    DeterministicRng rng(23);
    CHECK_THROWS_AS(ctgan_train(t, h, rng), ContractError);
}
