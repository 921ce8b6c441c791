#include "metacost/mlp.hpp"

#include <cmath>

#include "metacost/error.hpp"

namespace metacost {

namespace {

constexpr double kLeakySlope = 0.01;

std::uint64_t splitmix(std::uint64_t& s) {
    s += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = s;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double sym_uniform(std::uint64_t& s, double r) {
    return ((splitmix(s) >> 11) * 0x1.0p-53 * 2.0 - 1.0) * r;
}

double act_fn(double z, Activation a) {
    if (z > 0.0) return z;
    return a == Activation::relu ? 0.0 : kLeakySlope * z;
}

double act_dfn(double z, Activation a) {
    if (z > 0.0) return 1.0;
    return a == Activation::relu ? 0.0 : kLeakySlope;
}

} // namespace

Mlp::Mlp(std::size_t n_inputs, const std::vector<int>& hidden, Activation act,
         std::uint64_t seed)
    : n_in_(n_inputs), hidden_(hidden), act_(act) {
    if (n_inputs == 0) throw validation_error("mlp needs at least one input");
    if (hidden.empty()) throw validation_error("mlp needs a hidden layer");
    for (int w : hidden)
        if (w < 1) throw validation_error("mlp layer width must be >= 1");

    std::uint64_t s = seed * 0x9e3779b97f4a7c15ULL + 0x1234abcdULL;
    int prev = static_cast<int>(n_inputs);
    for (std::size_t l = 0; l <= hidden.size(); ++l) {
        Layer ly;
        ly.in = prev;
        ly.out = l < hidden.size() ? hidden[l] : 1;
        ly.w.resize(static_cast<std::size_t>(ly.in) * ly.out);
        ly.b.assign(ly.out, 0.0);
        const double r = std::sqrt(6.0 / ly.in); // He-style fan-in scaling
        for (double& w : ly.w) w = sym_uniform(s, r);
        prev = ly.out;
        layers_.push_back(std::move(ly));
    }
}

std::size_t Mlp::n_params() const {
    std::size_t n = 0;
    for (const auto& ly : layers_) n += ly.w.size() + ly.b.size();
    return n;
}

double Mlp::forward(std::span<const double> x) const {
    if (x.size() != n_in_) throw validation_error("mlp input size mismatch");
    std::vector<double> h(x.begin(), x.end()), next;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const Layer& ly = layers_[l];
        next.assign(ly.out, 0.0);
        for (int o = 0; o < ly.out; ++o) {
            double z = ly.b[o];
            const double* wr = &ly.w[static_cast<std::size_t>(o) * ly.in];
            for (int i = 0; i < ly.in; ++i) z += wr[i] * h[i];
            next[o] = l + 1 < layers_.size() ? act_fn(z, act_) : z;
        }
        h.swap(next);
    }
    return h[0];
}

void Mlp::accumulate_grad(std::span<const double> x, double gout,
                          std::span<double> grad) const {
    if (x.size() != n_in_) throw validation_error("mlp input size mismatch");
    if (grad.size() != n_params())
        throw validation_error("mlp grad buffer size mismatch");

    // Forward pass keeping pre-activations.
    std::vector<std::vector<double>> hs(layers_.size() + 1);
    std::vector<std::vector<double>> zs(layers_.size());
    hs[0].assign(x.begin(), x.end());
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const Layer& ly = layers_[l];
        zs[l].assign(ly.out, 0.0);
        hs[l + 1].assign(ly.out, 0.0);
        for (int o = 0; o < ly.out; ++o) {
            double z = ly.b[o];
            const double* wr = &ly.w[static_cast<std::size_t>(o) * ly.in];
            for (int i = 0; i < ly.in; ++i) z += wr[i] * hs[l][i];
            zs[l][o] = z;
            hs[l + 1][o] = l + 1 < layers_.size() ? act_fn(z, act_) : z;
        }
    }

    // Backward pass, accumulating into the flat buffer tail-to-head.
    std::vector<double> delta{gout}, prev_delta;
    std::size_t off = n_params();
    for (std::size_t l = layers_.size(); l-- > 0;) {
        const Layer& ly = layers_[l];
        off -= ly.w.size() + ly.b.size();
        double* gw = grad.data() + off;
        double* gb = gw + ly.w.size();
        prev_delta.assign(ly.in, 0.0);
        for (int o = 0; o < ly.out; ++o) {
            const double d = delta[o];
            gb[o] += d;
            const double* wr = &ly.w[static_cast<std::size_t>(o) * ly.in];
            double* gwr = gw + static_cast<std::size_t>(o) * ly.in;
            for (int i = 0; i < ly.in; ++i) {
                gwr[i] += d * hs[l][i];
                prev_delta[i] += d * wr[i];
            }
        }
        if (l > 0)
            for (int i = 0; i < ly.in; ++i)
                prev_delta[i] *= act_dfn(zs[l - 1][i], act_);
        delta.swap(prev_delta);
    }
}

std::vector<double> Mlp::flat_params() const {
    std::vector<double> p;
    p.reserve(n_params());
    for (const auto& ly : layers_) {
        p.insert(p.end(), ly.w.begin(), ly.w.end());
        p.insert(p.end(), ly.b.begin(), ly.b.end());
    }
    return p;
}

void Mlp::set_flat_params(std::span<const double> p) {
    if (p.size() != n_params())
        throw validation_error("mlp flat param size mismatch");
    std::size_t off = 0;
    for (auto& ly : layers_) {
        std::copy(p.begin() + off, p.begin() + off + ly.w.size(),
                  ly.w.begin());
        off += ly.w.size();
        std::copy(p.begin() + off, p.begin() + off + ly.b.size(),
                  ly.b.begin());
        off += ly.b.size();
    }
}

Adam::Adam(std::size_t n, double lr, double weight_decay, double beta1,
           double beta2, double eps)
    : lr_(lr), wd_(weight_decay), b1_(beta1), b2_(beta2), eps_(eps),
      m_(n, 0.0), v_(n, 0.0) {
    if (lr <= 0.0) throw validation_error("adam lr must be > 0");
}

void Adam::step(std::span<double> params, std::span<const double> grad) {
    if (params.size() != m_.size() || grad.size() != m_.size())
        throw validation_error("adam size mismatch");
    ++t_;
    const double c1 = 1.0 - std::pow(b1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(b2_, static_cast<double>(t_));
    for (std::size_t i = 0; i < m_.size(); ++i) {
        const double g = grad[i] + wd_ * params[i];
        m_[i] = b1_ * m_[i] + (1.0 - b1_) * g;
        v_[i] = b2_ * v_[i] + (1.0 - b2_) * g * g;
        const double mh = m_[i] / c1;
        const double vh = v_[i] / c2;
        params[i] -= lr_ * mh / (std::sqrt(vh) + eps_);
    }
}

} // namespace metacost
