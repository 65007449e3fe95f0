#ifndef TABSYNTH_CTGAN_HPP
#define TABSYNTH_CTGAN_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <utility>
#include <vector>

#include "tabsynth/encoding.hpp"
#include "tabsynth/error.hpp"
#include "tabsynth/nn.hpp"
#include "tabsynth/table.hpp"

namespace tabsynth {

struct CtganHyper {
    std::size_t noise = 16;
    std::vector<std::size_t> gen_hidden = {128, 128};
    std::vector<std::size_t> critic_hidden = {128, 128};
    std::size_t batch = 100;
    std::size_t epochs = 300;
    double lr = 2e-4;
    std::size_t pac = 10;
    double clip = 0.01;   // critic weight clipping bound
    double tau = 0.2;     // gumbel-softmax temperature
    std::size_t max_k = 10;
    bool condition_on_modes = true;
};

// Conditioning state: which one-hot blocks can be conditioned on (only
// blocks with at least two categories carry information), their offsets
// inside the condition vector, log-frequency sampling tables, and the
// real-row index lists behind training-by-sampling.
struct CtganConditioning {
    std::vector<std::size_t> block_ids;  // indices into enc.discrete_blocks
    std::vector<std::size_t> offsets;    // per conditionable block
    std::size_t width = 0;
    std::vector<std::vector<double>> log_freq;            // per block, per category: log1p(count)
    std::vector<std::vector<std::vector<std::size_t>>> rows;  // block -> category -> real rows
};

struct CondChoice {
    std::size_t block = 0;     // index into conditioning.block_ids
    std::size_t category = 0;
};

struct CtganModel {
    TableEncoding enc;
    CtganConditioning cond;
    Mlp generator;  // noise (+ cond) -> hidden relu -> width, raw
    Mlp critic;     // pac * (width + cond) -> hidden relu -> 1
    CtganHyper hyper;
};

inline CtganConditioning build_conditioning(const TableEncoding& enc, const Matrix& encoded,
                                            bool condition_on_modes) {
    CtganConditioning cond;
    for (std::size_t b = 0; b < enc.discrete_blocks.size(); ++b) {
        const auto& block = enc.discrete_blocks[b];
        if (block.size < 2) continue;
        if (block.is_mode_block && !condition_on_modes) continue;
        cond.block_ids.push_back(b);
        cond.offsets.push_back(cond.width);
        cond.width += block.size;
        std::vector<double> lf(block.size);
        for (std::size_t j = 0; j < block.size; ++j) lf[j] = std::log1p(block.counts[j]);
        cond.log_freq.push_back(std::move(lf));
        std::vector<std::vector<std::size_t>> rows(block.size);
        for (std::size_t r = 0; r < encoded.rows(); ++r) {
            const double* row = encoded.row_ptr(r);
            std::size_t hot = 0;
            for (std::size_t j = 1; j < block.size; ++j)
                if (row[block.begin + j] > row[block.begin + hot]) hot = j;
            rows[hot].push_back(r);
        }
        cond.rows.push_back(std::move(rows));
    }
    return cond;
}

// Per row: pick a conditionable block uniformly, then a category by
// log-frequency sampling (rare categories get oversampled relative to
// their plain frequency).
inline std::pair<Matrix, std::vector<CondChoice>> ctgan_sample_condvec(
    const CtganModel& m, std::size_t batch, DeterministicRng& rng) {
    const auto& cond = m.cond;
    Matrix vec(batch, cond.width);
    std::vector<CondChoice> choices(batch);
    if (cond.width == 0) return {std::move(vec), std::move(choices)};
    for (std::size_t r = 0; r < batch; ++r) {
        const std::size_t b = rng.bounded(cond.block_ids.size());
        const auto& lf = cond.log_freq[b];
        double total = 0.0;
        for (double v : lf) total += v;
        std::size_t cat = lf.size() - 1;
        double u = rng.uniform() * total;
        for (std::size_t j = 0; j < lf.size(); ++j) {
            u -= lf[j];
            if (u < 0.0) {
                cat = j;
                break;
            }
        }
        choices[r] = {b, cat};
        vec(r, cond.offsets[b] + cat) = 1.0;
    }
    return {std::move(vec), std::move(choices)};
}

// Training-by-sampling: each batch slot draws a real row uniformly among
// the rows matching its chosen (block, category).
inline std::vector<std::size_t> ctgan_training_batch(const CtganModel& m,
                                                     const std::vector<CondChoice>& choices,
                                                     std::size_t n_real, DeterministicRng& rng) {
    std::vector<std::size_t> picked(choices.size());
    if (m.cond.width == 0) {
        for (auto& idx : picked) idx = rng.bounded(n_real);
        return picked;
    }
    for (std::size_t r = 0; r < choices.size(); ++r) {
        const auto& rows = m.cond.rows[choices[r].block][choices[r].category];
        if (rows.empty())
            throw ContractError("ctgan_training_batch: condition has no matching real rows");
        picked[r] = rows[rng.bounded(rows.size())];
    }
    return picked;
}

// Generator output transform: tanh on alpha columns; one-hot blocks via
// gumbel-softmax (training) or argmax one-hot (sampling).
inline Matrix ctgan_activate(const Matrix& raw, const TableEncoding& enc, const Matrix* gumbel,
                             double tau, bool hard) {
    Matrix act = raw;
    for (const auto& ce : enc.columns) {
        if (ce.kind == ColumnKind::Numeric)
            for (std::size_t r = 0; r < act.rows(); ++r)
                act(r, ce.alpha_col) = std::tanh(raw(r, ce.alpha_col));
        if (ce.onehot_size == 0) continue;
        for (std::size_t r = 0; r < act.rows(); ++r) {
            double* row = act.row_ptr(r);
            if (hard) {
                std::size_t best = 0;
                for (std::size_t j = 1; j < ce.onehot_size; ++j)
                    if (row[ce.onehot_begin + j] > row[ce.onehot_begin + best]) best = j;
                for (std::size_t j = 0; j < ce.onehot_size; ++j)
                    row[ce.onehot_begin + j] = j == best ? 1.0 : 0.0;
            } else {
                for (std::size_t j = 0; j < ce.onehot_size; ++j) {
                    const std::size_t c = ce.onehot_begin + j;
                    row[c] = (raw(r, c) + (*gumbel)(r, c)) / tau;
                }
            }
        }
        if (!hard) softmax_segment(act, ce.onehot_begin, ce.onehot_begin + ce.onehot_size);
    }
    return act;
}

// dL/draw given dL/dact for the soft (training) transform.
inline Matrix ctgan_activate_backward(const Matrix& dact, const Matrix& act,
                                      const TableEncoding& enc, double tau) {
    Matrix draw = dact;
    for (const auto& ce : enc.columns) {
        if (ce.kind == ColumnKind::Numeric)
            for (std::size_t r = 0; r < draw.rows(); ++r) {
                const double y = act(r, ce.alpha_col);
                draw(r, ce.alpha_col) = dact(r, ce.alpha_col) * (1.0 - y * y);
            }
        if (ce.onehot_size == 0) continue;
        for (std::size_t r = 0; r < draw.rows(); ++r) {
            double dot = 0.0;
            for (std::size_t j = 0; j < ce.onehot_size; ++j) {
                const std::size_t c = ce.onehot_begin + j;
                dot += dact(r, c) * act(r, c);
            }
            for (std::size_t j = 0; j < ce.onehot_size; ++j) {
                const std::size_t c = ce.onehot_begin + j;
                draw(r, c) = act(r, c) * (dact(r, c) - dot) / tau;
            }
        }
    }
    return draw;
}

namespace detail {

inline Matrix hconcat(const Matrix& a, const Matrix& b) {
    if (b.cols() == 0) return a;
    Matrix out(a.rows(), a.cols() + b.cols());
    for (std::size_t r = 0; r < a.rows(); ++r) {
        std::copy(a.row_ptr(r), a.row_ptr(r) + a.cols(), out.row_ptr(r));
        std::copy(b.row_ptr(r), b.row_ptr(r) + b.cols(), out.row_ptr(r) + a.cols());
    }
    return out;
}

// batch x w -> batch/pac x (pac w): consecutive rows form one pac group
inline Matrix pack_rows(const Matrix& m, std::size_t pac) {
    Matrix out(m.rows() / pac, m.cols() * pac);
    std::copy(m.data().begin(), m.data().end(), out.data().begin());
    return out;
}

inline Matrix unpack_rows(const Matrix& m, std::size_t pac) {
    Matrix out(m.rows() * pac, m.cols() / pac);
    std::copy(m.data().begin(), m.data().end(), out.data().begin());
    return out;
}

}  // namespace detail

// Critic (Wasserstein) loss: mean critic(fake) - mean critic(real), with
// pac consecutive samples concatenated per critic input. Fills critic
// gradients; generator parameters are left untouched.
inline double ctgan_critic_loss_and_grads(CtganModel& m, const Matrix& real_rows,
                                          const Matrix& cond, const Matrix& z,
                                          const Matrix& gumbel) {
    const std::size_t batch = z.rows();
    const std::size_t groups = batch / m.hyper.pac;
    m.critic.zero_grads();

    const Matrix raw = m.generator.forward(detail::hconcat(z, cond));
    const Matrix fake = ctgan_activate(raw, m.enc, &gumbel, m.hyper.tau, false);

    const Matrix fake_in = detail::pack_rows(detail::hconcat(fake, cond), m.hyper.pac);
    const Matrix real_in = detail::pack_rows(detail::hconcat(real_rows, cond), m.hyper.pac);

    Matrix dout(groups, 1);

    const Matrix fake_score = m.critic.forward(fake_in);
    double loss = 0.0;
    for (std::size_t g = 0; g < groups; ++g) loss += fake_score(g, 0);
    dout.fill(1.0 / static_cast<double>(groups));
    m.critic.backward(dout);

    const Matrix real_score = m.critic.forward(real_in);
    for (std::size_t g = 0; g < groups; ++g) loss -= real_score(g, 0);
    dout.fill(-1.0 / static_cast<double>(groups));
    m.critic.backward(dout);

    return loss / static_cast<double>(groups);
}

// Generator loss: -mean critic(fake) plus the conditional-generator
// cross-entropy between the generated logits of the conditioned block and
// the condition itself. Fills generator gradients; the critic is used as
// a frozen scoring function (its gradient buffers are scratch here).
inline double ctgan_generator_loss_and_grads(CtganModel& m, const Matrix& cond,
                                             const std::vector<CondChoice>& choices,
                                             const Matrix& z, const Matrix& gumbel) {
    const std::size_t batch = z.rows();
    const std::size_t groups = batch / m.hyper.pac;
    m.generator.zero_grads();
    m.critic.zero_grads();

    const Matrix raw = m.generator.forward(detail::hconcat(z, cond));
    const Matrix fake = ctgan_activate(raw, m.enc, &gumbel, m.hyper.tau, false);
    const Matrix fake_in = detail::pack_rows(detail::hconcat(fake, cond), m.hyper.pac);

    const Matrix score = m.critic.forward(fake_in);
    double loss = 0.0;
    for (std::size_t g = 0; g < groups; ++g) loss -= score(g, 0);
    loss /= static_cast<double>(groups);

    Matrix dout(groups, 1, -1.0 / static_cast<double>(groups));
    const Matrix dpacked = m.critic.backward(dout);
    const Matrix djoint = detail::unpack_rows(dpacked, m.hyper.pac);  // batch x (width + cond)
    Matrix dact(batch, m.enc.width);
    for (std::size_t r = 0; r < batch; ++r)
        std::copy(djoint.row_ptr(r), djoint.row_ptr(r) + m.enc.width, dact.row_ptr(r));

    Matrix draw = ctgan_activate_backward(dact, fake, m.enc, m.hyper.tau);

    // conditional-generator term on the chosen block of each row
    if (m.cond.width > 0) {
        const double inv_b = 1.0 / static_cast<double>(batch);
        double ce = 0.0;
        for (std::size_t r = 0; r < batch; ++r) {
            const auto& block = m.enc.discrete_blocks[m.cond.block_ids[choices[r].block]];
            const double* row = raw.row_ptr(r);
            double mx = row[block.begin];
            for (std::size_t j = 0; j < block.size; ++j) mx = std::max(mx, row[block.begin + j]);
            double zsum = 0.0;
            for (std::size_t j = 0; j < block.size; ++j)
                zsum += std::exp(row[block.begin + j] - mx);
            const double logz = mx + std::log(zsum);
            ce -= row[block.begin + choices[r].category] - logz;
            for (std::size_t j = 0; j < block.size; ++j) {
                const double q = std::exp(row[block.begin + j] - logz);
                const double target = j == choices[r].category ? 1.0 : 0.0;
                draw(r, block.begin + j) += (q - target) * inv_b;
            }
        }
        loss += ce * inv_b;
    }

    m.generator.backward(draw);
    return loss;
}

inline CtganModel ctgan_fit_prepare(const Table& t, const CtganHyper& hyper,
                                    DeterministicRng& rng, Matrix* encoded_out = nullptr) {
    CtganModel m;
    m.hyper = hyper;
    m.enc = msn_fit(t, hyper.max_k, rng);
    Matrix encoded = msn_encode(t, m.enc);
    m.cond = build_conditioning(m.enc, encoded, hyper.condition_on_modes);

    std::vector<std::size_t> gen_dims{hyper.noise + m.cond.width};
    std::vector<Activation> gen_acts;
    for (std::size_t h : hyper.gen_hidden) {
        gen_dims.push_back(h);
        gen_acts.push_back(Activation::Relu);
    }
    gen_dims.push_back(m.enc.width);
    gen_acts.push_back(Activation::Identity);
    m.generator = Mlp(gen_dims, gen_acts, rng);

    std::vector<std::size_t> critic_dims{hyper.pac * (m.enc.width + m.cond.width)};
    std::vector<Activation> critic_acts;
    for (std::size_t h : hyper.critic_hidden) {
        critic_dims.push_back(h);
        critic_acts.push_back(Activation::Relu);
    }
    critic_dims.push_back(1);
    critic_acts.push_back(Activation::Identity);
    m.critic = Mlp(critic_dims, critic_acts, rng);

    if (encoded_out) *encoded_out = std::move(encoded);
    return m;
}

inline void ctgan_fill_gumbel(Matrix& gumbel, const TableEncoding& enc, DeterministicRng& rng) {
    gumbel.fill(0.0);
    for (const auto& ce : enc.columns)
        for (std::size_t j = 0; j < ce.onehot_size; ++j)
            for (std::size_t r = 0; r < gumbel.rows(); ++r) {
                const double u = std::max(rng.uniform(), 1e-12);
                gumbel(r, ce.onehot_begin + j) = -std::log(-std::log(u));
            }
}

// Alternating critic/generator Adam steps, one of each per minibatch.
// Critic weights are clipped after every update (weight-clipped WGAN).
inline CtganModel ctgan_train(const Table& t, const CtganHyper& hyper, DeterministicRng& rng,
                              std::vector<double>* epoch_critic_losses = nullptr) {
    if (t.n_rows() < hyper.batch) throw ContractError("ctgan_train: fewer rows than batch size");
    if (hyper.batch % hyper.pac != 0)
        throw ContractError("ctgan_train: batch must be a multiple of pac");

    Matrix encoded;
    CtganModel m = ctgan_fit_prepare(t, hyper, rng, &encoded);

    const std::size_t steps = t.n_rows() / hyper.batch;
    Matrix z(hyper.batch, hyper.noise);
    Matrix gumbel(hyper.batch, m.enc.width);
    Matrix real_rows(hyper.batch, m.enc.width);

    for (std::size_t epoch = 0; epoch < hyper.epochs; ++epoch) {
        double epoch_loss = 0.0;
        for (std::size_t s = 0; s < steps; ++s) {
            // critic update
            auto [cond, choices] = ctgan_sample_condvec(m, hyper.batch, rng);
            const auto picked = ctgan_training_batch(m, choices, t.n_rows(), rng);
            for (std::size_t r = 0; r < hyper.batch; ++r)
                std::copy(encoded.row_ptr(picked[r]), encoded.row_ptr(picked[r]) + m.enc.width,
                          real_rows.row_ptr(r));
            for (double& v : z.data()) v = rng.normal();
            ctgan_fill_gumbel(gumbel, m.enc, rng);
            const double critic_loss = ctgan_critic_loss_and_grads(m, real_rows, cond, z, gumbel);
            if (!std::isfinite(critic_loss)) throw Error("ctgan_train: critic loss diverged");
            m.critic.adam_step(hyper.lr);
            m.critic.clip_weights(hyper.clip);
            epoch_loss += critic_loss;

            // generator update
            auto [gcond, gchoices] = ctgan_sample_condvec(m, hyper.batch, rng);
            for (double& v : z.data()) v = rng.normal();
            ctgan_fill_gumbel(gumbel, m.enc, rng);
            const double gen_loss = ctgan_generator_loss_and_grads(m, gcond, gchoices, z, gumbel);
            if (!std::isfinite(gen_loss)) throw Error("ctgan_train: generator loss diverged");
            m.generator.adam_step(hyper.lr);
        }
        if (epoch_critic_losses)
            epoch_critic_losses->push_back(epoch_loss / static_cast<double>(steps));
    }
    return m;
}

inline Table ctgan_sample(const CtganModel& model, std::size_t n, DeterministicRng& rng) {
    Mlp generator = model.generator;
    const std::size_t batch = model.hyper.batch;
    Table out;
    std::vector<Table> chunks;
    std::size_t produced = 0;
    while (produced < n) {
        const std::size_t take = std::min(batch, n - produced);
        auto [cond, choices] = ctgan_sample_condvec(model, batch, rng);
        Matrix z(batch, model.hyper.noise);
        for (double& v : z.data()) v = rng.normal();
        Matrix raw = generator.forward(detail::hconcat(z, cond));
        Matrix act = ctgan_activate(raw, model.enc, nullptr, model.hyper.tau, true);
        Matrix slice(take, model.enc.width);
        for (std::size_t r = 0; r < take; ++r)
            std::copy(act.row_ptr(r), act.row_ptr(r) + model.enc.width, slice.row_ptr(r));
        chunks.push_back(msn_decode(slice, model.enc, rng, false));
        produced += take;
    }
    out = chunks.front();
    for (std::size_t i = 1; i < chunks.size(); ++i) {
        for (std::size_t c = 0; c < out.n_cols(); ++c) {
            if (out.schema[c].kind == ColumnKind::Numeric) {
                auto& dst = out.numeric(c);
                const auto& src = chunks[i].numeric(c);
                dst.insert(dst.end(), src.begin(), src.end());
            } else {
                auto& dst = out.categorical(c);
                const auto& src = chunks[i].categorical(c);
                dst.insert(dst.end(), src.begin(), src.end());
            }
        }
    }
    out.refresh_numeric_bounds();
    return out;
}

}  // namespace tabsynth

#endif
