#include "fsacd/tensor.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_set>

#include "fsacd/errors.hpp"

namespace fsacd {

namespace {

int shape_numel(const std::vector<int>& shape) {
    int n = 1;
    for (int d : shape) n *= d;
    return n;
}

void check_shape(const std::vector<int>& shape) {
    for (int d : shape) {
        if (d <= 0) {
            throw DimensionError("tensor shape must have positive extents, got " +
                                 Tensor::shape_str(shape));
        }
    }
}

}  // namespace

std::string Tensor::shape_str(const std::vector<int>& shape) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << ',';
        os << shape[i];
    }
    os << ']';
    return os.str();
}

Tensor Tensor::zeros(std::vector<int> shape, bool requires_grad) {
    check_shape(shape);
    auto node = std::make_shared<detail::TensorNode>();
    int n = shape_numel(shape);
    node->shape = std::move(shape);
    node->data.assign(static_cast<std::size_t>(n), 0.0);
    node->requires_grad = requires_grad;
    if (requires_grad) node->grad.assign(static_cast<std::size_t>(n), 0.0);
    return Tensor(std::move(node));
}

Tensor Tensor::full(std::vector<int> shape, double value, bool requires_grad) {
    Tensor t = zeros(std::move(shape), requires_grad);
    std::fill(t.data().begin(), t.data().end(), value);
    return t;
}

Tensor Tensor::scalar(double value, bool requires_grad) {
    return full({1}, value, requires_grad);
}

Tensor Tensor::from_data(std::vector<double> data, std::vector<int> shape,
                         bool requires_grad) {
    check_shape(shape);
    if (static_cast<std::size_t>(shape_numel(shape)) != data.size()) {
        throw DimensionError("data length " + std::to_string(data.size()) +
                             " does not match shape " + shape_str(shape));
    }
    Tensor t = zeros(std::move(shape), requires_grad);
    t.data() = std::move(data);
    return t;
}

Tensor Tensor::randn(std::vector<int> shape, double stddev, Rng& rng, bool requires_grad) {
    Tensor t = zeros(std::move(shape), requires_grad);
    for (double& v : t.data()) v = rng.normal(0.0, stddev);
    return t;
}

const std::vector<int>& Tensor::shape() const {
    if (!node_) throw ContractError("use of undefined tensor");
    return node_->shape;
}

int Tensor::numel() const { return static_cast<int>(node_ ? node_->data.size() : 0); }

bool Tensor::requires_grad() const { return node_ && node_->requires_grad; }

std::vector<double>& Tensor::data() {
    if (!node_) throw ContractError("use of undefined tensor");
    return node_->data;
}

const std::vector<double>& Tensor::data() const {
    if (!node_) throw ContractError("use of undefined tensor");
    return node_->data;
}

std::vector<double>& Tensor::grad() {
    if (!requires_grad()) throw ContractError("grad() on tensor without requires_grad");
    return node_->grad;
}

const std::vector<double>& Tensor::grad() const {
    if (!requires_grad()) throw ContractError("grad() on tensor without requires_grad");
    return node_->grad;
}

double Tensor::value() const {
    if (numel() != 1) {
        throw ContractError("value() requires a single-element tensor, shape is " +
                            shape_str(shape()));
    }
    return node_->data[0];
}

void Tensor::zero_grad() {
    if (requires_grad()) std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
}

void Tensor::backward() {
    if (!node_) throw ContractError("backward() on undefined tensor");
    if (numel() != 1) {
        throw ContractError("backward() requires a scalar loss, shape is " +
                            shape_str(shape()));
    }
    if (!node_->requires_grad) return;  // constant loss, nothing reachable

    // Iterative post-order DFS: children appear after all their parents are
    // visited, so the reversed order is a valid topological order.
    std::vector<detail::TensorNode*> order;
    std::unordered_set<detail::TensorNode*> visited;
    struct Frame {
        detail::TensorNode* node;
        std::size_t next_parent;
    };
    std::vector<Frame> stack;
    stack.push_back({node_.get(), 0});
    visited.insert(node_.get());
    while (!stack.empty()) {
        Frame& f = stack.back();
        if (f.next_parent < f.node->parents.size()) {
            detail::TensorNode* p = f.node->parents[f.next_parent++].get();
            if (p->requires_grad && !visited.count(p)) {
                visited.insert(p);
                stack.push_back({p, 0});
            }
        } else {
            order.push_back(f.node);
            stack.pop_back();
        }
    }

    // Interior grads are scratch for this sweep; leaf grads persist so that
    // repeated backward() calls accumulate into parameters.
    for (detail::TensorNode* n : order) {
        if (n->backward) std::fill(n->grad.begin(), n->grad.end(), 0.0);
    }
    node_->grad[0] += 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        if ((*it)->backward) (*it)->backward(**it);
    }
}

Tensor Tensor::detached_copy() const {
    if (!node_) return Tensor();
    return from_data(node_->data, node_->shape, node_->requires_grad);
}

}  // namespace fsacd
