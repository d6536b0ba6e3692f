#pragma once

#include <optional>
#include <vector>

#include "fsacd/tensor.hpp"

namespace fsacd {

// Elementwise; both operands must share a shape.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor neg(const Tensor& a);

// Broadcast against a single-element tensor.
Tensor scale(const Tensor& a, const Tensor& s);
Tensor shift(const Tensor& a, const Tensor& s);
// Constant variants.
Tensor scale(const Tensor& a, double c);
Tensor shift(const Tensor& a, double c);

Tensor matmul(const Tensor& a, const Tensor& b);

/// Length-preserving 1-D convolution over an [l x d_in] sequence with
/// [w x d_in x d_out] filters and [d_out] bias; w must be odd, zero padding
/// of (w-1)/2 on each side.
Tensor conv1d_same(const Tensor& x, const Tensor& filters, const Tensor& bias);

Tensor relu(const Tensor& a);
Tensor tanh(const Tensor& a);
Tensor exp(const Tensor& a);
Tensor log(const Tensor& a);
Tensor sqrt(const Tensor& a);
Tensor clamp_min(const Tensor& a, double floor);
Tensor reciprocal(const Tensor& a);

/// Stabilized softmax over a 1-D tensor. Masked positions (mask false) emit
/// exactly 0 and receive no gradient; the rest sum to 1.
Tensor softmax(const Tensor& x, const std::vector<bool>* mask = nullptr);

Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);

/// Concatenate 1-D tensors along axis 0 or 2-D tensors along axis 0/1.
Tensor concat(const std::vector<Tensor>& parts, int axis);

/// Elementwise mean over same-shape tensors. Each element's addends are
/// summed in sorted order, so the result is bitwise invariant to permuting
/// the inputs.
Tensor mean_rows(const std::vector<Tensor>& rows);

/// Same data, new shape (element count preserved); gradient passes through.
Tensor reshape(const Tensor& a, std::vector<int> shape);

Tensor dot(const Tensor& u, const Tensor& v);

/// L2 distance between two same-shape tensors, as a scalar.
Tensor euclidean_distance(const Tensor& u, const Tensor& v);

/// Cosine similarity as a scalar; exactly 0 (with zero gradient) when either
/// operand's norm falls below 1e-12.
Tensor cosine(const Tensor& u, const Tensor& v);

/// Gather rows of a [V x d] matrix by index; ids < 0 produce zero rows.
/// Gradient scatter-adds into the matrix when it requires grad.
Tensor embedding_rows(const Tensor& matrix, const std::vector<int>& ids);

}  // namespace fsacd
