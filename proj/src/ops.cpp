#include "fsacd/ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>

#include "fsacd/errors.hpp"

namespace fsacd {
namespace {

using detail::TensorNode;
using NodePtr = std::shared_ptr<TensorNode>;

const NodePtr& np(const Tensor& t) { return OpAccess::node(t); }

void check_defined(const Tensor& t, const char* op) {
    if (!t.defined()) throw ContractError(std::string(op) + ": undefined tensor");
}

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (a.shape() != b.shape()) {
        throw DimensionError(std::string(op) + ": " + Tensor::shape_str(a.shape()) +
                             " vs " + Tensor::shape_str(b.shape()));
    }
}

// Result node wired to its parents. Parents and a backward are only kept when
// some parent needs gradients; otherwise the node is a detached leaf.
NodePtr make_result(std::vector<int> shape, std::vector<NodePtr> parents) {
    auto n = std::make_shared<TensorNode>();
    std::size_t count = 1;
    for (int e : shape) count *= static_cast<std::size_t>(e);
    n->shape = std::move(shape);
    n->data.assign(count, 0.0);
    for (const auto& p : parents) {
        if (p->requires_grad) {
            n->requires_grad = true;
            break;
        }
    }
    if (n->requires_grad) {
        n->grad.assign(count, 0.0);
        n->parents = std::move(parents);
    }
    return n;
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
    check_defined(a, "add");
    check_defined(b, "add");
    check_same_shape(a, b, "add");
    auto n = make_result(a.shape(), {np(a), np(b)});
    const auto& ad = np(a)->data;
    const auto& bd = np(b)->data;
    for (std::size_t i = 0; i < n->data.size(); ++i) n->data[i] = ad[i] + bd[i];
    if (n->requires_grad) {
        n->backward = [](TensorNode& o) {
            for (int k = 0; k < 2; ++k) {
                auto& p = *o.parents[k];
                if (!p.requires_grad) continue;
                for (std::size_t i = 0; i < o.grad.size(); ++i) p.grad[i] += o.grad[i];
            }
        };
    }
    return OpAccess::wrap(n);
}

Tensor sub(const Tensor& a, const Tensor& b) {
    check_defined(a, "sub");
    check_defined(b, "sub");
    check_same_shape(a, b, "sub");
    auto n = make_result(a.shape(), {np(a), np(b)});
    const auto& ad = np(a)->data;
    const auto& bd = np(b)->data;
    for (std::size_t i = 0; i < n->data.size(); ++i) n->data[i] = ad[i] - bd[i];
    if (n->requires_grad) {
        n->backward = [](TensorNode& o) {
            auto& pa = *o.parents[0];
            auto& pb = *o.parents[1];
            for (std::size_t i = 0; i < o.grad.size(); ++i) {
                if (pa.requires_grad) pa.grad[i] += o.grad[i];
                if (pb.requires_grad) pb.grad[i] -= o.grad[i];
            }
        };
    }
    return OpAccess::wrap(n);
}

Tensor mul(const Tensor& a, const Tensor& b) {
    check_defined(a, "mul");
    check_defined(b, "mul");
    check_same_shape(a, b, "mul");
    auto n = make_result(a.shape(), {np(a), np(b)});
    const auto& ad = np(a)->data;
    const auto& bd = np(b)->data;
    for (std::size_t i = 0; i < n->data.size(); ++i) n->data[i] = ad[i] * bd[i];
    if (n->requires_grad) {
        n->backward = [](TensorNode& o) {
            auto& pa = *o.parents[0];
            auto& pb = *o.parents[1];
            for (std::size_t i = 0; i < o.grad.size(); ++i) {
                if (pa.requires_grad) pa.grad[i] += o.grad[i] * pb.data[i];
                if (pb.requires_grad) pb.grad[i] += o.grad[i] * pa.data[i];
            }
        };
    }
    return OpAccess::wrap(n);
}

Tensor neg(const Tensor& a) {
    check_defined(a, "neg");
    auto n = make_result(a.shape(), {np(a)});
    const auto& ad = np(a)->data;
    for (std::size_t i = 0; i < n->data.size(); ++i) n->data[i] = -ad[i];
    if (n->requires_grad) {
        n->backward = [](TensorNode& o) {
            auto& p = *o.parents[0];
            for (std::size_t i = 0; i < o.grad.size(); ++i) p.grad[i] -= o.grad[i];
        };
    }
    return OpAccess::wrap(n);
}

Tensor scale(const Tensor& a, const Tensor& s) {
    check_defined(a, "scale");
    check_defined(s, "scale");
    if (s.numel() != 1) {
        throw DimensionError("scale: factor must have one element, got " +
                             Tensor::shape_str(s.shape()));
    }
    auto n = make_result(a.shape(), {np(a), np(s)});
    const auto& ad = np(a)->data;
    const double sv = np(s)->data[0];
    for (std::size_t i = 0; i < n->data.size(); ++i) n->data[i] = ad[i] * sv;
    if (n->requires_grad) {
        n->backward = [](TensorNode& o) {
            auto& pa = *o.parents[0];
            auto& ps = *o.parents[1];
            const double sv = ps.data[0];
            for (std::size_t i = 0; i < o.grad.size(); ++i) {
                if (pa.requires_grad) pa.grad[i] += o.grad[i] * sv;
                if (ps.requires_grad) ps.grad[0] += o.grad[i] * pa.data[i];
            }
        };
    }
    return OpAccess::wrap(n);
}

Tensor shift(const Tensor& a, const Tensor& s) {
    check_defined(a, "shift");
    check_defined(s, "shift");
    if (s.numel() != 1) {
        throw DimensionError("shift: offset must have one element, got " +
                             Tensor::shape_str(s.shape()));
    }
    auto n = make_result(a.shape(), {np(a), np(s)});
    const auto& ad = np(a)->data;
    const double sv = np(s)->data[0];
    for (std::size_t i = 0; i < n->data.size(); ++i) n->data[i] = ad[i] + sv;
    if (n->requires_grad) {
        n->backward = [](TensorNode& o) {
            auto& pa = *o.parents[0];
            auto& ps = *o.parents[1];
            for (std::size_t i = 0; i < o.grad.size(); ++i) {
                if (pa.requires_grad) pa.grad[i] += o.grad[i];
                if (ps.requires_grad) ps.grad[0] += o.grad[i];
            }
        };
    }
    return OpAccess::wrap(n);
}

Tensor scale(const Tensor& a, double c) {
    check_defined(a, "scale");
    auto n = make_result(a.shape(), {np(a)});
    const auto& ad = np(a)->data;
    for (std::size_t i = 0; i < n->data.size(); ++i) n->data[i] = ad[i] * c;
    if (n->requires_grad) {
        n->backward = [c](TensorNode& o) {
            auto& p = *o.parents[0];
            for (std::size_t i = 0; i < o.grad.size(); ++i) p.grad[i] += o.grad[i] * c;
        };
    }
    return OpAccess::wrap(n);
}

Tensor shift(const Tensor& a, double c) {
    check_defined(a, "shift");
    auto n = make_result(a.shape(), {np(a)});
    const auto& ad = np(a)->data;
    for (std::size_t i = 0; i < n->data.size(); ++i) n->data[i] = ad[i] + c;
    if (n->requires_grad) {
        n->backward = [](TensorNode& o) {
            auto& p = *o.parents[0];
            for (std::size_t i = 0; i < o.grad.size(); ++i) p.grad[i] += o.grad[i];
        };
    }
    return OpAccess::wrap(n);
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    check_defined(a, "matmul");
    check_defined(b, "matmul");
    const auto& as = a.shape();
    const auto& bs = b.shape();
    if (as.size() != 2 || bs.size() != 2 || as[1] != bs[0]) {
        throw DimensionError("matmul: " + Tensor::shape_str(as) + " x " +
                             Tensor::shape_str(bs));
    }
    const int m = as[0], k = as[1], p = bs[1];
    auto n = make_result({m, p}, {np(a), np(b)});
    const auto& ad = np(a)->data;
    const auto& bd = np(b)->data;
    for (int i = 0; i < m; ++i) {
        for (int t = 0; t < k; ++t) {
            const double av = ad[i * k + t];
            if (av == 0.0) continue;
            for (int j = 0; j < p; ++j) n->data[i * p + j] += av * bd[t * p + j];
        }
    }
    if (n->requires_grad) {
        n->backward = [m, k, p](TensorNode& o) {
            auto& pa = *o.parents[0];
            auto& pb = *o.parents[1];
            if (pa.requires_grad) {
                for (int i = 0; i < m; ++i)
                    for (int t = 0; t < k; ++t) {
                        double acc = 0.0;
                        for (int j = 0; j < p; ++j)
                            acc += o.grad[i * p + j] * pb.data[t * p + j];
                        pa.grad[i * k + t] += acc;
                    }
            }
            if (pb.requires_grad) {
                for (int t = 0; t < k; ++t)
                    for (int j = 0; j < p; ++j) {
                        double acc = 0.0;
                        for (int i = 0; i < m; ++i)
                            acc += pa.data[i * k + t] * o.grad[i * p + j];
                        pb.grad[t * p + j] += acc;
                    }
            }
        };
    }
    return OpAccess::wrap(n);
}

Tensor conv1d_same(const Tensor& x, const Tensor& filters, const Tensor& bias) {
    check_defined(x, "conv1d_same");
    check_defined(filters, "conv1d_same");
    check_defined(bias, "conv1d_same");
    const auto& xs = x.shape();
    const auto& fs = filters.shape();
    const auto& bs = bias.shape();
    if (xs.size() != 2 || fs.size() != 3 || bs.size() != 1 || xs[1] != fs[1] ||
        bs[0] != fs[2]) {
        throw DimensionError("conv1d_same: input " + Tensor::shape_str(xs) +
                             ", filters " + Tensor::shape_str(fs) + ", bias " +
                             Tensor::shape_str(bs));
    }
    const int w = fs[0];
    if (w % 2 == 0) {
        throw ConfigError("conv1d_same: window must be odd, got " + std::to_string(w));
    }
    const int l = xs[0], din = xs[1], dout = fs[2];
    const int pad = (w - 1) / 2;
    auto n = make_result({l, dout}, {np(x), np(filters), np(bias)});
    const auto& xd = np(x)->data;
    const auto& fd = np(filters)->data;
    const auto& bd = np(bias)->data;
    for (int i = 0; i < l; ++i) {
        for (int o = 0; o < dout; ++o) n->data[i * dout + o] = bd[o];
        for (int t = 0; t < w; ++t) {
            const int j = i + t - pad;
            if (j < 0 || j >= l) continue;
            for (int c = 0; c < din; ++c) {
                const double xv = xd[j * din + c];
                if (xv == 0.0) continue;
                const double* frow = fd.data() + (t * din + c) * dout;
                for (int o = 0; o < dout; ++o) n->data[i * dout + o] += xv * frow[o];
            }
        }
    }
    if (n->requires_grad) {
        n->backward = [l, din, dout, w, pad](TensorNode& o) {
            auto& px = *o.parents[0];
            auto& pf = *o.parents[1];
            auto& pb = *o.parents[2];
            for (int i = 0; i < l; ++i) {
                const double* grow = o.grad.data() + i * dout;
                if (pb.requires_grad)
                    for (int u = 0; u < dout; ++u) pb.grad[u] += grow[u];
                for (int t = 0; t < w; ++t) {
                    const int j = i + t - pad;
                    if (j < 0 || j >= l) continue;
                    for (int c = 0; c < din; ++c) {
                        const std::size_t foff = (static_cast<std::size_t>(t) * din + c) * dout;
                        if (px.requires_grad) {
                            double acc = 0.0;
                            for (int u = 0; u < dout; ++u)
                                acc += grow[u] * pf.data[foff + u];
                            px.grad[j * din + c] += acc;
                        }
                        if (pf.requires_grad) {
                            const double xv = px.data[j * din + c];
                            for (int u = 0; u < dout; ++u)
                                pf.grad[foff + u] += xv * grow[u];
                        }
                    }
                }
            }
        };
    }
    return OpAccess::wrap(n);
}

Tensor relu(const Tensor& a) {
    check_defined(a, "relu");
    auto n = make_result(a.shape(), {np(a)});
    const auto& ad = np(a)->data;
    for (std::size_t i = 0; i < n->data.size(); ++i) n->data[i] = ad[i] > 0.0 ? ad[i] : 0.0;
    if (n->requires_grad) {
        n->backward = [](TensorNode& o) {
            auto& p = *o.parents[0];
            for (std::size_t i = 0; i < o.grad.size(); ++i)
                if (p.data[i] > 0.0) p.grad[i] += o.grad[i];
        };
    }
    return OpAccess::wrap(n);
}

Tensor tanh(const Tensor& a) {
    check_defined(a, "tanh");
    auto n = make_result(a.shape(), {np(a)});
    const auto& ad = np(a)->data;
    for (std::size_t i = 0; i < n->data.size(); ++i) n->data[i] = std::tanh(ad[i]);
    if (n->requires_grad) {
        n->backward = [](TensorNode& o) {
            auto& p = *o.parents[0];
            for (std::size_t i = 0; i < o.grad.size(); ++i)
                p.grad[i] += o.grad[i] * (1.0 - o.data[i] * o.data[i]);
        };
    }
    return OpAccess::wrap(n);
}

Tensor exp(const Tensor& a) {
    check_defined(a, "exp");
    auto n = make_result(a.shape(), {np(a)});
    const auto& ad = np(a)->data;
    for (std::size_t i = 0; i < n->data.size(); ++i) n->data[i] = std::exp(ad[i]);
    if (n->requires_grad) {
        n->backward = [](TensorNode& o) {
            auto& p = *o.parents[0];
            for (std::size_t i = 0; i < o.grad.size(); ++i)
                p.grad[i] += o.grad[i] * o.data[i];
        };
    }
    return OpAccess::wrap(n);
}

Tensor log(const Tensor& a) {
    check_defined(a, "log");
    auto n = make_result(a.shape(), {np(a)});
    const auto& ad = np(a)->data;
    for (std::size_t i = 0; i < n->data.size(); ++i) n->data[i] = std::log(ad[i]);
    if (n->requires_grad) {
        n->backward = [](TensorNode& o) {
            auto& p = *o.parents[0];
            for (std::size_t i = 0; i < o.grad.size(); ++i)
                p.grad[i] += o.grad[i] / p.data[i];
        };
    }
    return OpAccess::wrap(n);
}

Tensor sqrt(const Tensor& a) {
    check_defined(a, "sqrt");
    auto n = make_result(a.shape(), {np(a)});
    const auto& ad = np(a)->data;
    for (std::size_t i = 0; i < n->data.size(); ++i) n->data[i] = std::sqrt(ad[i]);
    if (n->requires_grad) {
        n->backward = [](TensorNode& o) {
            auto& p = *o.parents[0];
            for (std::size_t i = 0; i < o.grad.size(); ++i)
                p.grad[i] += o.grad[i] * 0.5 / o.data[i];
        };
    }
    return OpAccess::wrap(n);
}

Tensor clamp_min(const Tensor& a, double floor) {
    check_defined(a, "clamp_min");
    auto n = make_result(a.shape(), {np(a)});
    const auto& ad = np(a)->data;
    for (std::size_t i = 0; i < n->data.size(); ++i)
        n->data[i] = ad[i] > floor ? ad[i] : floor;
    if (n->requires_grad) {
        n->backward = [floor](TensorNode& o) {
            auto& p = *o.parents[0];
            for (std::size_t i = 0; i < o.grad.size(); ++i)
                if (p.data[i] > floor) p.grad[i] += o.grad[i];
        };
    }
    return OpAccess::wrap(n);
}

Tensor reciprocal(const Tensor& a) {
    check_defined(a, "reciprocal");
    auto n = make_result(a.shape(), {np(a)});
    const auto& ad = np(a)->data;
    for (std::size_t i = 0; i < n->data.size(); ++i) n->data[i] = 1.0 / ad[i];
    if (n->requires_grad) {
        n->backward = [](TensorNode& o) {
            auto& p = *o.parents[0];
            for (std::size_t i = 0; i < o.grad.size(); ++i)
                p.grad[i] -= o.grad[i] * o.data[i] * o.data[i];
        };
    }
    return OpAccess::wrap(n);
}

Tensor softmax(const Tensor& x, const std::vector<bool>* mask) {
    check_defined(x, "softmax");
    const auto& xs = x.shape();
    if (xs.size() != 1) {
        throw DimensionError("softmax: expected 1-D input, got " + Tensor::shape_str(xs));
    }
    const int l = xs[0];
    if (mask && static_cast<int>(mask->size()) != l) {
        throw DimensionError("softmax: mask length " + std::to_string(mask->size()) +
                             " vs input " + Tensor::shape_str(xs));
    }
    const auto& xd = np(x)->data;
    double mx = -std::numeric_limits<double>::infinity();
    int active = 0;
    for (int i = 0; i < l; ++i) {
        if (mask && !(*mask)[i]) continue;
        ++active;
        mx = std::max(mx, xd[i]);
    }
    if (active == 0) throw ContractError("softmax: all positions masked");
    auto n = make_result(xs, {np(x)});
    double total = 0.0;
    for (int i = 0; i < l; ++i) {
        if (mask && !(*mask)[i]) continue;
        n->data[i] = std::exp(xd[i] - mx);
        total += n->data[i];
    }
    for (int i = 0; i < l; ++i) n->data[i] /= total;
    if (n->requires_grad) {
        // Masked outputs are exactly 0, so the Jacobian-vector product below
        // leaves their inputs untouched without consulting the mask.
        n->backward = [](TensorNode& o) {
            auto& p = *o.parents[0];
            double gd = 0.0;
            for (std::size_t i = 0; i < o.grad.size(); ++i) gd += o.grad[i] * o.data[i];
            for (std::size_t i = 0; i < o.grad.size(); ++i)
                p.grad[i] += o.data[i] * (o.grad[i] - gd);
        };
    }
    return OpAccess::wrap(n);
}

Tensor sum(const Tensor& a) {
    check_defined(a, "sum");
    auto n = make_result({1}, {np(a)});
    const auto& ad = np(a)->data;
    double acc = 0.0;
    for (double v : ad) acc += v;
    n->data[0] = acc;
    if (n->requires_grad) {
        n->backward = [](TensorNode& o) {
            auto& p = *o.parents[0];
            for (std::size_t i = 0; i < p.grad.size(); ++i) p.grad[i] += o.grad[0];
        };
    }
    return OpAccess::wrap(n);
}

Tensor mean(const Tensor& a) {
    check_defined(a, "mean");
    auto n = make_result({1}, {np(a)});
    const auto& ad = np(a)->data;
    double acc = 0.0;
    for (double v : ad) acc += v;
    const double inv = 1.0 / static_cast<double>(ad.size());
    n->data[0] = acc * inv;
    if (n->requires_grad) {
        n->backward = [inv](TensorNode& o) {
            auto& p = *o.parents[0];
            for (std::size_t i = 0; i < p.grad.size(); ++i) p.grad[i] += o.grad[0] * inv;
        };
    }
    return OpAccess::wrap(n);
}

Tensor concat(const std::vector<Tensor>& parts, int axis) {
    if (parts.empty()) throw ContractError("concat: no inputs");
    std::vector<NodePtr> parents;
    parents.reserve(parts.size());
    for (const auto& p : parts) {
        check_defined(p, "concat");
        parents.push_back(np(p));
    }
    const auto& first = parts[0].shape();
    const int rank = static_cast<int>(first.size());
    if (rank < 1 || rank > 2 || axis < 0 || axis >= rank) {
        throw DimensionError("concat: axis " + std::to_string(axis) + " on rank-" +
                             std::to_string(rank) + " input " + Tensor::shape_str(first));
    }
    const int other = rank == 2 ? 1 - axis : -1;
    int total = 0;
    for (const auto& p : parts) {
        const auto& s = p.shape();
        if (static_cast<int>(s.size()) != rank || (other >= 0 && s[other] != first[other])) {
            throw DimensionError("concat: " + Tensor::shape_str(first) + " vs " +
                                 Tensor::shape_str(s));
        }
        total += s[axis];
    }
    std::vector<int> out_shape = first;
    out_shape[axis] = total;
    auto n = make_result(out_shape, parents);
    if (rank == 1 || axis == 0) {
        std::size_t off = 0;
        for (const auto& p : parts) {
            const auto& d = np(p)->data;
            std::copy(d.begin(), d.end(), n->data.begin() + off);
            off += d.size();
        }
    } else {
        const int rows = first[0];
        int col_off = 0;
        for (const auto& p : parts) {
            const auto& d = np(p)->data;
            const int cols = p.shape()[1];
            for (int r = 0; r < rows; ++r)
                std::copy(d.begin() + r * cols, d.begin() + (r + 1) * cols,
                          n->data.begin() + r * total + col_off);
            col_off += cols;
        }
    }
    if (n->requires_grad) {
        n->backward = [axis, total](TensorNode& o) {
            const int rank = static_cast<int>(o.shape.size());
            if (rank == 1 || axis == 0) {
                std::size_t off = 0;
                for (auto& pp : o.parents) {
                    auto& p = *pp;
                    if (p.requires_grad)
                        for (std::size_t i = 0; i < p.data.size(); ++i)
                            p.grad[i] += o.grad[off + i];
                    off += p.data.size();
                }
            } else {
                const int rows = o.shape[0];
                int col_off = 0;
                for (auto& pp : o.parents) {
                    auto& p = *pp;
                    const int cols = p.shape[1];
                    if (p.requires_grad)
                        for (int r = 0; r < rows; ++r)
                            for (int c = 0; c < cols; ++c)
                                p.grad[r * cols + c] += o.grad[r * total + col_off + c];
                    col_off += cols;
                }
            }
        };
    }
    return OpAccess::wrap(n);
}

Tensor mean_rows(const std::vector<Tensor>& rows) {
    if (rows.empty()) throw ContractError("mean_rows: no inputs");
    std::vector<NodePtr> parents;
    parents.reserve(rows.size());
    for (const auto& r : rows) {
        check_defined(r, "mean_rows");
        check_same_shape(rows[0], r, "mean_rows");
        parents.push_back(np(r));
    }
    const double inv = 1.0 / static_cast<double>(rows.size());
    auto n = make_result(rows[0].shape(), parents);
    std::vector<double> vals(rows.size());
    for (std::size_t i = 0; i < n->data.size(); ++i) {
        for (std::size_t k = 0; k < rows.size(); ++k) vals[k] = np(rows[k])->data[i];
        std::sort(vals.begin(), vals.end());
        double acc = 0.0;
        for (double v : vals) acc += v;
        n->data[i] = acc * inv;
    }
    if (n->requires_grad) {
        n->backward = [inv](TensorNode& o) {
            for (auto& pp : o.parents) {
                auto& p = *pp;
                if (!p.requires_grad) continue;
                for (std::size_t i = 0; i < o.grad.size(); ++i)
                    p.grad[i] += o.grad[i] * inv;
            }
        };
    }
    return OpAccess::wrap(n);
}

Tensor reshape(const Tensor& a, std::vector<int> shape) {
    check_defined(a, "reshape");
    std::size_t count = 1;
    for (int e : shape) {
        if (e <= 0) {
            throw DimensionError("reshape: invalid target " + Tensor::shape_str(shape));
        }
        count *= static_cast<std::size_t>(e);
    }
    if (count != np(a)->data.size()) {
        throw DimensionError("reshape: " + Tensor::shape_str(a.shape()) + " to " +
                             Tensor::shape_str(shape));
    }
    auto n = make_result(std::move(shape), {np(a)});
    n->data = np(a)->data;
    if (n->requires_grad) {
        n->backward = [](TensorNode& o) {
            auto& p = *o.parents[0];
            for (std::size_t i = 0; i < o.grad.size(); ++i) p.grad[i] += o.grad[i];
        };
    }
    return OpAccess::wrap(n);
}

Tensor dot(const Tensor& u, const Tensor& v) {
    check_defined(u, "dot");
    check_defined(v, "dot");
    check_same_shape(u, v, "dot");
    auto n = make_result({1}, {np(u), np(v)});
    const auto& ud = np(u)->data;
    const auto& vd = np(v)->data;
    double acc = 0.0;
    for (std::size_t i = 0; i < ud.size(); ++i) acc += ud[i] * vd[i];
    n->data[0] = acc;
    if (n->requires_grad) {
        n->backward = [](TensorNode& o) {
            auto& pu = *o.parents[0];
            auto& pv = *o.parents[1];
            const double g = o.grad[0];
            for (std::size_t i = 0; i < pu.data.size(); ++i) {
                if (pu.requires_grad) pu.grad[i] += g * pv.data[i];
                if (pv.requires_grad) pv.grad[i] += g * pu.data[i];
            }
        };
    }
    return OpAccess::wrap(n);
}

Tensor euclidean_distance(const Tensor& u, const Tensor& v) {
    check_defined(u, "euclidean_distance");
    check_defined(v, "euclidean_distance");
    check_same_shape(u, v, "euclidean_distance");
    auto n = make_result({1}, {np(u), np(v)});
    const auto& ud = np(u)->data;
    const auto& vd = np(v)->data;
    double acc = 0.0;
    for (std::size_t i = 0; i < ud.size(); ++i) {
        const double d = ud[i] - vd[i];
        acc += d * d;
    }
    n->data[0] = std::sqrt(acc);
    if (n->requires_grad) {
        // d/du_i = (u_i - v_i) / dist; the floor keeps the coincident case finite.
        n->backward = [](TensorNode& o) {
            auto& pu = *o.parents[0];
            auto& pv = *o.parents[1];
            const double g = o.grad[0] / std::max(o.data[0], 1e-12);
            for (std::size_t i = 0; i < pu.data.size(); ++i) {
                const double d = g * (pu.data[i] - pv.data[i]);
                if (pu.requires_grad) pu.grad[i] += d;
                if (pv.requires_grad) pv.grad[i] -= d;
            }
        };
    }
    return OpAccess::wrap(n);
}

Tensor cosine(const Tensor& u, const Tensor& v) {
    check_defined(u, "cosine");
    check_defined(v, "cosine");
    check_same_shape(u, v, "cosine");
    const auto& ud = np(u)->data;
    const auto& vd = np(v)->data;
    double uu = 0.0, vv = 0.0, uv = 0.0;
    for (std::size_t i = 0; i < ud.size(); ++i) {
        uu += ud[i] * ud[i];
        vv += vd[i] * vd[i];
        uv += ud[i] * vd[i];
    }
    const double nu = std::sqrt(uu), nv = std::sqrt(vv);
    // Degenerate vectors define similarity 0 with no gradient path.
    if (nu < 1e-12 || nv < 1e-12) return Tensor::scalar(0.0);
    auto n = make_result({1}, {np(u), np(v)});
    const double c = uv / (nu * nv);
    n->data[0] = c;
    if (n->requires_grad) {
        n->backward = [nu, nv, c](TensorNode& o) {
            auto& pu = *o.parents[0];
            auto& pv = *o.parents[1];
            const double g = o.grad[0];
            for (std::size_t i = 0; i < pu.data.size(); ++i) {
                if (pu.requires_grad)
                    pu.grad[i] += g * (pv.data[i] / (nu * nv) - c * pu.data[i] / (nu * nu));
                if (pv.requires_grad)
                    pv.grad[i] += g * (pu.data[i] / (nu * nv) - c * pv.data[i] / (nv * nv));
            }
        };
    }
    return OpAccess::wrap(n);
}

Tensor embedding_rows(const Tensor& matrix, const std::vector<int>& ids) {
    check_defined(matrix, "embedding_rows");
    const auto& ms = matrix.shape();
    if (ms.size() != 2) {
        throw DimensionError("embedding_rows: expected 2-D table, got " +
                             Tensor::shape_str(ms));
    }
    const int vocab = ms[0], dim = ms[1];
    for (int id : ids) {
        if (id >= vocab) {
            throw DimensionError("embedding_rows: id " + std::to_string(id) +
                                 " out of range for " + Tensor::shape_str(ms));
        }
    }
    const int l = static_cast<int>(ids.size());
    auto n = make_result({l, dim}, {np(matrix)});
    const auto& md = np(matrix)->data;
    for (int i = 0; i < l; ++i) {
        if (ids[i] < 0) continue;  // stays a zero row
        std::copy(md.begin() + ids[i] * dim, md.begin() + (ids[i] + 1) * dim,
                  n->data.begin() + i * dim);
    }
    if (n->requires_grad) {
        n->backward = [ids, dim](TensorNode& o) {
            auto& p = *o.parents[0];
            for (std::size_t i = 0; i < ids.size(); ++i) {
                if (ids[i] < 0) continue;
                for (int c = 0; c < dim; ++c)
                    p.grad[ids[i] * dim + c] += o.grad[i * dim + c];
            }
        };
    }
    return OpAccess::wrap(n);
}

}  // namespace fsacd
