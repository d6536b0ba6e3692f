#pragma once

#include <vector>

#include "fsacd/tensor.hpp"

namespace fsacd {

/// Adam with bias correction over a fixed parameter list. Every parameter
/// must require grad; moment buffers are zero-initialized and keyed by list
/// position, so the list order must stay stable across steps.
class Adam {
public:
    explicit Adam(std::vector<Tensor> params, double lr = 1e-3, double beta1 = 0.9,
                  double beta2 = 0.999, double eps = 1e-8);

    /// Applies one update from the accumulated grads, then zeroes them.
    void step();
    void zero_grad();

    int steps_taken() const { return t_; }
    double learning_rate() const { return lr_; }

private:
    std::vector<Tensor> params_;
    std::vector<std::vector<double>> m_;
    std::vector<std::vector<double>> v_;
    double lr_, beta1_, beta2_, eps_;
    int t_ = 0;
};

}  // namespace fsacd
