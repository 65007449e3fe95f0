#ifndef TABSYNTH_TVAE_HPP
#define TABSYNTH_TVAE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "tabsynth/encoding.hpp"
#include "tabsynth/error.hpp"
#include "tabsynth/nn.hpp"
#include "tabsynth/table.hpp"

namespace tabsynth {

struct TvaeHyper {
    std::size_t latent = 16;
    std::vector<std::size_t> hidden = {128, 128};
    std::size_t batch = 100;
    std::size_t epochs = 300;
    double lr = 1e-3;
    std::size_t max_k = 10;
    bool sample_categoricals = false;  // argmax decode by default
};

struct TvaeModel {
    TableEncoding enc;
    Mlp encoder;               // width -> hidden -> 2L (mu | log sigma^2)
    Mlp decoder;               // L -> hidden -> width (alpha means + logits)
    AdamVector numeric_logvar;  // learned log-variance per numeric column
    TvaeHyper hyper;
};

namespace detail {
constexpr double kLogTwoPi = 1.8378770664093453;
}

// Negative ELBO of one encoded batch with externally supplied latent
// noise, plus gradient accumulation into encoder, decoder and the learned
// variances. Keeping the noise an argument makes the loss a deterministic
// function of (parameters, batch, noise), which the finite-difference
// checks rely on.
inline double tvae_loss_and_grads(TvaeModel& m, const Matrix& x, const Matrix& noise) {
    const std::size_t batch = x.rows();
    const std::size_t latent = m.hyper.latent;
    if (noise.rows() != batch || noise.cols() != latent)
        throw ContractError("tvae_loss: noise shape mismatch");

    m.encoder.zero_grads();
    m.decoder.zero_grads();
    m.numeric_logvar.zero_grads();

    const Matrix stats = m.encoder.forward(x);  // batch x 2L
    Matrix z(batch, latent);
    for (std::size_t r = 0; r < batch; ++r)
        for (std::size_t l = 0; l < latent; ++l)
            z(r, l) = stats(r, l) + std::exp(0.5 * stats(r, latent + l)) * noise(r, l);

    const Matrix dec = m.decoder.forward(z);  // batch x width
    Matrix ddec(batch, m.enc.width);

    const double inv_b = 1.0 / static_cast<double>(batch);
    double recon = 0.0;
    std::size_t numeric_index = 0;
    for (const auto& ce : m.enc.columns) {
        if (ce.kind == ColumnKind::Numeric) {
            const double logvar = m.numeric_logvar.values[numeric_index];
            const double inv_var = std::exp(-logvar);
            double dlv = 0.0;
            for (std::size_t r = 0; r < batch; ++r) {
                const double diff = dec(r, ce.alpha_col) - x(r, ce.alpha_col);
                recon += 0.5 * (detail::kLogTwoPi + logvar + diff * diff * inv_var);
                ddec(r, ce.alpha_col) = diff * inv_var * inv_b;
                dlv += 0.5 * (1.0 - diff * diff * inv_var);
            }
            m.numeric_logvar.grads[numeric_index] += dlv * inv_b;
            ++numeric_index;
        }
        if (ce.onehot_size > 0) {
            for (std::size_t r = 0; r < batch; ++r) {
                const double* row = dec.row_ptr(r);
                double mx = row[ce.onehot_begin];
                for (std::size_t j = 0; j < ce.onehot_size; ++j)
                    mx = std::max(mx, row[ce.onehot_begin + j]);
                double zsum = 0.0;
                for (std::size_t j = 0; j < ce.onehot_size; ++j)
                    zsum += std::exp(row[ce.onehot_begin + j] - mx);
                const double logz = mx + std::log(zsum);
                for (std::size_t j = 0; j < ce.onehot_size; ++j) {
                    const double logit = row[ce.onehot_begin + j];
                    const double q = std::exp(logit - logz);
                    const double target = x(r, ce.onehot_begin + j);
                    recon -= target * (logit - logz);
                    ddec(r, ce.onehot_begin + j) = (q - target) * inv_b;
                }
            }
        }
    }

    double kl = 0.0;
    const Matrix dz = m.decoder.backward(ddec);  // batch x L
    Matrix dstats(batch, 2 * latent);
    for (std::size_t r = 0; r < batch; ++r) {
        for (std::size_t l = 0; l < latent; ++l) {
            const double mu = stats(r, l);
            const double lv = stats(r, latent + l);
            kl += -0.5 * (1.0 + lv - mu * mu - std::exp(lv));
            dstats(r, l) = dz(r, l) + mu * inv_b;
            dstats(r, latent + l) =
                dz(r, l) * noise(r, l) * 0.5 * std::exp(0.5 * lv) + 0.5 * (std::exp(lv) - 1.0) * inv_b;
        }
    }
    m.encoder.backward(dstats);

    return (recon + kl) * inv_b;
}

// Minibatch Adam training of the full model. `epoch_losses`, when given,
// receives the epoch-averaged negative ELBO.
inline TvaeModel tvae_train(const Table& t, const TvaeHyper& hyper, DeterministicRng& rng,
                            std::vector<double>* epoch_losses = nullptr) {
    if (t.n_rows() < hyper.batch) throw ContractError("tvae_train: fewer rows than batch size");
    TvaeModel m;
    m.hyper = hyper;
    m.enc = msn_fit(t, hyper.max_k, rng);
    const Matrix x = msn_encode(t, m.enc);

    std::vector<std::size_t> enc_dims{m.enc.width};
    std::vector<Activation> enc_acts;
    for (std::size_t h : hyper.hidden) {
        enc_dims.push_back(h);
        enc_acts.push_back(Activation::Relu);
    }
    enc_dims.push_back(2 * hyper.latent);
    enc_acts.push_back(Activation::Identity);
    m.encoder = Mlp(enc_dims, enc_acts, rng);

    std::vector<std::size_t> dec_dims{hyper.latent};
    std::vector<Activation> dec_acts;
    for (std::size_t h : hyper.hidden) {
        dec_dims.push_back(h);
        dec_acts.push_back(Activation::Relu);
    }
    dec_dims.push_back(m.enc.width);
    dec_acts.push_back(Activation::Identity);
    m.decoder = Mlp(dec_dims, dec_acts, rng);

    std::size_t n_numeric = 0;
    for (const auto& ce : m.enc.columns)
        if (ce.kind == ColumnKind::Numeric) ++n_numeric;
    m.numeric_logvar = AdamVector(n_numeric, 0.0);

    const std::size_t n = t.n_rows();
    const std::size_t steps = n / hyper.batch;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);

    Matrix batch(hyper.batch, m.enc.width);
    Matrix noise(hyper.batch, hyper.latent);
    for (std::size_t epoch = 0; epoch < hyper.epochs; ++epoch) {
        for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.bounded(i)]);
        double epoch_loss = 0.0;
        for (std::size_t s = 0; s < steps; ++s) {
            for (std::size_t r = 0; r < hyper.batch; ++r) {
                const std::size_t src = order[s * hyper.batch + r];
                std::copy(x.row_ptr(src), x.row_ptr(src) + m.enc.width, batch.row_ptr(r));
            }
            for (double& g : noise.data()) g = rng.normal();
            const double loss = tvae_loss_and_grads(m, batch, noise);
            if (!std::isfinite(loss)) throw Error("tvae_train: loss diverged (non-finite)");
            m.encoder.adam_step(hyper.lr);
            m.decoder.adam_step(hyper.lr);
            m.numeric_logvar.adam_step(hyper.lr);
            for (double& lv : m.numeric_logvar.values) lv = std::clamp(lv, -15.0, 5.0);
            epoch_loss += loss;
        }
        if (epoch_losses) epoch_losses->push_back(epoch_loss / static_cast<double>(steps));
    }
    return m;
}

// Draw latent vectors from the standard normal prior, decode, and invert
// the encoding.
inline Table tvae_sample(const TvaeModel& model, std::size_t n, DeterministicRng& rng) {
    Mlp decoder = model.decoder;  // keep the trained model's caches untouched
    Matrix z(n, model.hyper.latent);
    for (double& v : z.data()) v = rng.normal();
    Matrix out = decoder.forward(z);
    for (const auto& ce : model.enc.columns)
        if (ce.onehot_size > 0)
            softmax_segment(out, ce.onehot_begin, ce.onehot_begin + ce.onehot_size);
    return msn_decode(out, model.enc, rng, model.hyper.sample_categoricals);
}

}  // namespace tabsynth

#endif
