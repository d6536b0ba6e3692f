#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "fsacd/rng.hpp"

namespace fsacd {

class Tensor;

namespace detail {

struct TensorNode {
    std::vector<int> shape;
    std::vector<double> data;
    std::vector<double> grad;  // sized like data iff requires_grad
    bool requires_grad = false;
    std::vector<std::shared_ptr<TensorNode>> parents;
    // Pulls this node's grad into the parents' grads. Empty for leaves.
    std::function<void(TensorNode&)> backward;
};

}  // namespace detail

/// Dense float64 array participating in a dynamic reverse-mode tape.
///
/// A Tensor is a cheap handle sharing ownership of its node; copies alias the
/// same storage. Data is immutable by convention once an op has consumed the
/// tensor; grads are the only buffers mutated afterwards. A graph and all its
/// tensors belong to one worker thread.
class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(std::vector<int> shape, bool requires_grad = false);
    static Tensor full(std::vector<int> shape, double value, bool requires_grad = false);
    static Tensor scalar(double value, bool requires_grad = false);
    static Tensor from_data(std::vector<double> data, std::vector<int> shape,
                            bool requires_grad = false);
    /// Elementwise draws from N(0, stddev^2) in row-major order.
    static Tensor randn(std::vector<int> shape, double stddev, Rng& rng,
                        bool requires_grad = true);

    bool defined() const { return node_ != nullptr; }
    const std::vector<int>& shape() const;
    int numel() const;
    bool requires_grad() const;

    std::vector<double>& data();
    const std::vector<double>& data() const;
    std::vector<double>& grad();
    const std::vector<double>& grad() const;

    /// Value of a single-element tensor. ContractError otherwise.
    double value() const;

    void zero_grad();

    /// Reverse-mode sweep from this scalar. Populates grad on every reachable
    /// requires_grad tensor. Repeated calls without zeroing accumulate.
    void backward();

    /// Leaf copy of the current values: same data, fresh storage, no history.
    Tensor detached_copy() const;

    static std::string shape_str(const std::vector<int>& shape);

private:
    friend struct OpAccess;
    explicit Tensor(std::shared_ptr<detail::TensorNode> node) : node_(std::move(node)) {}
    std::shared_ptr<detail::TensorNode> node_;
};

/// Internal accessor for op implementations.
struct OpAccess {
    static std::shared_ptr<detail::TensorNode>& node(Tensor& t) { return t.node_; }
    static const std::shared_ptr<detail::TensorNode>& node(const Tensor& t) { return t.node_; }
    static Tensor wrap(std::shared_ptr<detail::TensorNode> n) { return Tensor(std::move(n)); }
};

}  // namespace fsacd
