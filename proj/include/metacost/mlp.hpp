#pragma once
#include <cstdint>
#include <span>
#include <vector>

namespace metacost {

enum class Activation { relu, leaky_relu };

// Dense scalar-output network, double precision throughout. One network
// is shared across all channels of a trial; gradients are accumulated
// per input sample into a caller-owned flat buffer aligned with
// flat_params(), which also serves the finite-difference checks.
class Mlp {
public:
    Mlp(std::size_t n_inputs, const std::vector<int>& hidden, Activation act,
        std::uint64_t seed);

    std::size_t n_inputs() const { return n_in_; }
    std::size_t n_params() const;

    double forward(std::span<const double> x) const;

    // d(output)/d(params) scaled by gout, added into grad (size n_params).
    void accumulate_grad(std::span<const double> x, double gout,
                         std::span<double> grad) const;

    std::vector<double> flat_params() const;
    void set_flat_params(std::span<const double> p);

    const std::vector<int>& hidden() const { return hidden_; }
    Activation activation() const { return act_; }

private:
    struct Layer {
        int in = 0, out = 0;
        std::vector<double> w; // row-major out x in
        std::vector<double> b;
    };
    std::size_t n_in_ = 0;
    std::vector<int> hidden_;
    Activation act_ = Activation::leaky_relu;
    std::vector<Layer> layers_; // hidden layers then scalar output layer
};

// Adam with bias-corrected moments and decoupled L2 weight decay; state
// lives with the caller so one optimizer drives one flat parameter vector.
class Adam {
public:
    Adam(std::size_t n, double lr, double weight_decay, double beta1 = 0.9,
         double beta2 = 0.999, double eps = 1e-8);

    void step(std::span<double> params, std::span<const double> grad);

private:
    double lr_, wd_, b1_, b2_, eps_;
    std::uint64_t t_ = 0;
    std::vector<double> m_, v_;
};

} // namespace metacost
