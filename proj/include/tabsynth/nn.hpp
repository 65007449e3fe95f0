#ifndef TABSYNTH_NN_HPP
#define TABSYNTH_NN_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "tabsynth/error.hpp"
#include "tabsynth/matrix.hpp"
#include "tabsynth/rng.hpp"

namespace tabsynth {

enum class Activation { Identity, Relu, Tanh };

// One fully connected layer with gradient buffers and Adam moments.
// Forward caches what backward needs; training is single-threaded per
// network, so the caches live on the layer itself.
struct DenseLayer {
    Matrix w;  // out x in
    std::vector<double> b;
    Activation act = Activation::Identity;

    Matrix gw;
    std::vector<double> gb;
    Matrix mw, vw;
    std::vector<double> mb, vb;

    Matrix input;   // batch x in
    Matrix output;  // batch x out, post-activation

    DenseLayer(std::size_t in, std::size_t out, Activation a, DeterministicRng& rng)
        : w(out, in), b(out, 0.0), act(a), gw(out, in), gb(out, 0.0), mw(out, in), vw(out, in),
          mb(out, 0.0), vb(out, 0.0) {
        const double scale = std::sqrt(6.0 / static_cast<double>(in + out));
        for (double& v : w.data()) v = rng.uniform(-scale, scale);
    }

    Matrix forward(const Matrix& x) {
        if (x.cols() != w.cols()) throw ContractError("dense forward: shape mismatch");
        input = x;
        Matrix y = matmul_a_bt(x, w);
        for (std::size_t r = 0; r < y.rows(); ++r) {
            double* row = y.row_ptr(r);
            for (std::size_t c = 0; c < y.cols(); ++c) {
                row[c] += b[c];
                switch (act) {
                    case Activation::Identity: break;
                    case Activation::Relu: row[c] = row[c] > 0.0 ? row[c] : 0.0; break;
                    case Activation::Tanh: row[c] = std::tanh(row[c]); break;
                }
            }
        }
        output = y;
        return y;
    }

    // Accumulates parameter gradients, returns dL/dinput.
    Matrix backward(const Matrix& dy) {
        if (dy.rows() != output.rows() || dy.cols() != output.cols())
            throw ContractError("dense backward: shape mismatch");
        Matrix da = dy;
        for (std::size_t r = 0; r < da.rows(); ++r) {
            double* row = da.row_ptr(r);
            const double* out = output.row_ptr(r);
            for (std::size_t c = 0; c < da.cols(); ++c) {
                switch (act) {
                    case Activation::Identity: break;
                    case Activation::Relu: row[c] = out[c] > 0.0 ? row[c] : 0.0; break;
                    case Activation::Tanh: row[c] *= 1.0 - out[c] * out[c]; break;
                }
            }
        }
        const Matrix dw = matmul_at_b(da, input);  // out x in
        for (std::size_t i = 0; i < gw.data().size(); ++i) gw.data()[i] += dw.data()[i];
        for (std::size_t r = 0; r < da.rows(); ++r) {
            const double* row = da.row_ptr(r);
            for (std::size_t c = 0; c < da.cols(); ++c) gb[c] += row[c];
        }
        return matmul(da, w);  // batch x in
    }
};

class Mlp {
public:
    Mlp() = default;

    // dims = {in, hidden..., out}; acts has dims.size()-1 entries
    Mlp(const std::vector<std::size_t>& dims, const std::vector<Activation>& acts,
        DeterministicRng& rng) {
        if (dims.size() < 2 || acts.size() != dims.size() - 1)
            throw ContractError("Mlp: dims/activations mismatch");
        for (std::size_t i = 0; i + 1 < dims.size(); ++i)
            layers_.emplace_back(dims[i], dims[i + 1], acts[i], rng);
    }

    std::size_t input_width() const { return layers_.front().w.cols(); }
    std::size_t output_width() const { return layers_.back().w.rows(); }
    std::vector<DenseLayer>& layers() { return layers_; }
    const std::vector<DenseLayer>& layers() const { return layers_; }

    Matrix forward(const Matrix& x) {
        Matrix y = x;
        for (auto& l : layers_) y = l.forward(y);
        return y;
    }

    Matrix backward(const Matrix& dy) {
        Matrix d = dy;
        for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) d = it->backward(d);
        return d;
    }

    void zero_grads() {
        for (auto& l : layers_) {
            l.gw.fill(0.0);
            std::fill(l.gb.begin(), l.gb.end(), 0.0);
        }
    }

    // Standard Adam with bias correction; one shared step counter.
    void adam_step(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8) {
        ++step_;
        const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step_));
        const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step_));
        for (auto& l : layers_) {
            auto& w = l.w.data();
            auto& g = l.gw.data();
            auto& m = l.mw.data();
            auto& v = l.vw.data();
            for (std::size_t i = 0; i < w.size(); ++i) {
                m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
                v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
                w[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps);
            }
            for (std::size_t i = 0; i < l.b.size(); ++i) {
                l.mb[i] = beta1 * l.mb[i] + (1.0 - beta1) * l.gb[i];
                l.vb[i] = beta2 * l.vb[i] + (1.0 - beta2) * l.gb[i] * l.gb[i];
                l.b[i] -= lr * (l.mb[i] / c1) / (std::sqrt(l.vb[i] / c2) + eps);
            }
        }
    }

    // WGAN Lipschitz constraint
    void clip_weights(double c) {
        for (auto& l : layers_) {
            for (double& v : l.w.data()) v = std::clamp(v, -c, c);
            for (double& v : l.b) v = std::clamp(v, -c, c);
        }
    }

    std::vector<double> flatten_params() const {
        std::vector<double> out;
        for (const auto& l : layers_) {
            out.insert(out.end(), l.w.data().begin(), l.w.data().end());
            out.insert(out.end(), l.b.begin(), l.b.end());
        }
        return out;
    }

    void set_params(const std::vector<double>& params) {
        std::size_t k = 0;
        for (auto& l : layers_) {
            for (double& v : l.w.data()) v = params[k++];
            for (double& v : l.b) v = params[k++];
        }
        if (k != params.size()) throw ContractError("set_params: size mismatch");
    }

    std::vector<double> flatten_grads() const {
        std::vector<double> out;
        for (const auto& l : layers_) {
            out.insert(out.end(), l.gw.data().begin(), l.gw.data().end());
            out.insert(out.end(), l.gb.begin(), l.gb.end());
        }
        return out;
    }

    std::size_t n_params() const {
        std::size_t n = 0;
        for (const auto& l : layers_) n += l.w.data().size() + l.b.size();
        return n;
    }

private:
    std::vector<DenseLayer> layers_;
    long step_ = 0;
};

// A free parameter vector trained with its own Adam moments (used for the
// learned per-column output variances).
struct AdamVector {
    std::vector<double> values;
    std::vector<double> grads;
    std::vector<double> m, v;
    long step = 0;

    explicit AdamVector(std::size_t n = 0, double init = 0.0)
        : values(n, init), grads(n, 0.0), m(n, 0.0), v(n, 0.0) {}

    void zero_grads() { std::fill(grads.begin(), grads.end(), 0.0); }

    void adam_step(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8) {
        ++step;
        const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
        const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
        for (std::size_t i = 0; i < values.size(); ++i) {
            m[i] = beta1 * m[i] + (1.0 - beta1) * grads[i];
            v[i] = beta2 * v[i] + (1.0 - beta2) * grads[i] * grads[i];
            values[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps);
        }
    }
};

// Row-wise softmax over [begin, end) columns, in place.
inline void softmax_segment(Matrix& m, std::size_t begin, std::size_t end) {
    for (std::size_t r = 0; r < m.rows(); ++r) {
        double* row = m.row_ptr(r);
        double mx = row[begin];
        for (std::size_t c = begin; c < end; ++c) mx = std::max(mx, row[c]);
        double z = 0.0;
        for (std::size_t c = begin; c < end; ++c) {
            row[c] = std::exp(row[c] - mx);
            z += row[c];
        }
        for (std::size_t c = begin; c < end; ++c) row[c] /= z;
    }
}

}  // namespace tabsynth

#endif
