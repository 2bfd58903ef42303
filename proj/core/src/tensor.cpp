#include "trigcm/tensor.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "trigcm/error.hpp"

namespace trigcm {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMatrix>;
using MutMap = Eigen::Map<RowMatrix>;

thread_local Tape* g_active_tape = nullptr;

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (a.shape() != b.shape()) {
        throw ShapeError(std::string(op) + ": shape mismatch " + shape_to_string(a.shape()) +
                         " vs " + shape_to_string(b.shape()));
    }
}

void require_rank2(const Tensor& a, const char* op) {
    if (a.rank() != 2) {
        throw ShapeError(std::string(op) + ": expected rank-2 tensor, got " +
                         shape_to_string(a.shape()));
    }
}

template <typename Fwd, typename Deriv>
Tensor unary(const Tensor& a, Fwd fwd, Deriv deriv) {
    std::vector<double> out(a.numel());
    auto x = a.data();
    std::transform(x.begin(), x.end(), out.begin(), fwd);
    return make_op({a}, a.shape(), std::move(out),
                   [a, deriv](std::span<const double> g, std::vector<std::span<double>>& in) {
                       auto x = a.data();
                       for (std::size_t i = 0; i < g.size(); ++i) in[0][i] += g[i] * deriv(x[i]);
                   });
}

}  // namespace

std::size_t shape_numel(const Shape& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_to_string(const Shape& shape) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
    os << ']';
    return os.str();
}

Tensor::Tensor() : node_(std::make_shared<detail::TensorNode>()) {
    node_->shape = {};
    node_->data = {0.0};
}

Tensor::Tensor(Shape shape, std::vector<double> data, bool requires_grad)
    : node_(std::make_shared<detail::TensorNode>()) {
    if (shape_numel(shape) != data.size()) {
        throw ShapeError("tensor: shape " + shape_to_string(shape) + " holds " +
                         std::to_string(shape_numel(shape)) + " values, got " +
                         std::to_string(data.size()));
    }
    node_->shape = std::move(shape);
    node_->data = std::move(data);
    node_->requires_grad = requires_grad;
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
    const std::size_t n = shape_numel(shape);
    return Tensor(std::move(shape), std::vector<double>(n, 0.0), requires_grad);
}

Tensor Tensor::scalar(double value) { return Tensor({}, {value}); }

Tensor Tensor::parameter(Shape shape, std::vector<double> data) {
    return Tensor(std::move(shape), std::move(data), true);
}

double Tensor::item() const {
    if (numel() != 1) throw ShapeError("item: tensor " + shape_to_string(shape()) + " is not scalar");
    return node_->data[0];
}

std::span<double> Tensor::mutable_grad() {
    if (node_->grad.empty()) node_->grad.assign(node_->data.size(), 0.0);
    return node_->grad;
}

void Tensor::zero_grad() { node_->grad.clear(); }

Tape* active_tape() { return g_active_tape; }

TapeScope::TapeScope(Tape& tape) : previous_(g_active_tape) { g_active_tape = &tape; }
TapeScope::~TapeScope() { g_active_tape = previous_; }

NoGradScope::NoGradScope() : previous_(g_active_tape) { g_active_tape = nullptr; }
NoGradScope::~NoGradScope() { g_active_tape = previous_; }

Tensor make_op(std::vector<Tensor> inputs, Shape shape, std::vector<double> data,
               BackwardFn backward) {
    Tape* tape = g_active_tape;
    const bool needs_grad =
        tape != nullptr &&
        std::any_of(inputs.begin(), inputs.end(), [](const Tensor& t) { return t.requires_grad(); });
    Tensor out(std::move(shape), std::move(data), needs_grad);
    if (needs_grad) {
        Tape::Entry entry;
        entry.inputs.reserve(inputs.size());
        for (auto& in : inputs) entry.inputs.push_back(in.node_);
        entry.output = out.node_;
        entry.backward = std::move(backward);
        tape->entries_.push_back(std::move(entry));
    }
    return out;
}

void Tape::backward(const Tensor& loss) {
    if (loss.numel() != 1) {
        throw ShapeError("backward: loss must be scalar, got " + shape_to_string(loss.shape()));
    }
    if (!loss.requires_grad()) return;

    detail::TensorNode* root = loss.node_.get();
    auto last = std::find_if(entries_.rbegin(), entries_.rend(),
                             [root](const Entry& e) { return e.output.get() == root; });
    if (last == entries_.rend()) {
        // Loss is itself a leaf parameter.
        if (root->grad.empty()) root->grad.assign(1, 0.0);
        root->grad[0] += 1.0;
        return;
    }

    const std::size_t end = static_cast<std::size_t>(entries_.rend() - last);
    std::unordered_set<const detail::TensorNode*> needed{root};
    std::vector<std::size_t> active;
    for (std::size_t i = end; i-- > 0;) {
        const Entry& e = entries_[i];
        if (!needed.contains(e.output.get())) continue;
        active.push_back(i);
        for (const auto& in : e.inputs) {
            if (in->requires_grad) needed.insert(in.get());
        }
    }

    for (std::size_t i : active) entries_[i].output->grad.assign(entries_[i].output->data.size(), 0.0);
    root->grad[0] = 1.0;

    std::vector<std::span<double>> spans;
    for (std::size_t i : active) {
        Entry& e = entries_[i];
        spans.clear();
        for (auto& in : e.inputs) {
            if (in->requires_grad) {
                if (in->grad.empty()) in->grad.assign(in->data.size(), 0.0);
                spans.emplace_back(in->grad);
            } else {
                spans.emplace_back();
            }
        }
        e.backward(e.output->grad, spans);
    }
}

namespace ops {

Tensor add(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "add");
    std::vector<double> out(a.numel());
    auto x = a.data(), y = b.data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] + y[i];
    return make_op({a, b}, a.shape(), std::move(out),
                   [](std::span<const double> g, std::vector<std::span<double>>& in) {
                       for (std::size_t k = 0; k < 2; ++k) {
                           if (in[k].empty()) continue;
                           for (std::size_t i = 0; i < g.size(); ++i) in[k][i] += g[i];
                       }
                   });
}

Tensor sub(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "sub");
    std::vector<double> out(a.numel());
    auto x = a.data(), y = b.data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] - y[i];
    return make_op({a, b}, a.shape(), std::move(out),
                   [](std::span<const double> g, std::vector<std::span<double>>& in) {
                       if (!in[0].empty())
                           for (std::size_t i = 0; i < g.size(); ++i) in[0][i] += g[i];
                       if (!in[1].empty())
                           for (std::size_t i = 0; i < g.size(); ++i) in[1][i] -= g[i];
                   });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "mul");
    std::vector<double> out(a.numel());
    auto x = a.data(), y = b.data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] * y[i];
    return make_op({a, b}, a.shape(), std::move(out),
                   [a, b](std::span<const double> g, std::vector<std::span<double>>& in) {
                       auto x = a.data(), y = b.data();
                       if (!in[0].empty())
                           for (std::size_t i = 0; i < g.size(); ++i) in[0][i] += g[i] * y[i];
                       if (!in[1].empty())
                           for (std::size_t i = 0; i < g.size(); ++i) in[1][i] += g[i] * x[i];
                   });
}

Tensor scale(const Tensor& a, double s) {
    std::vector<double> out(a.numel());
    auto x = a.data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = s * x[i];
    return make_op({a}, a.shape(), std::move(out),
                   [s](std::span<const double> g, std::vector<std::span<double>>& in) {
                       for (std::size_t i = 0; i < g.size(); ++i) in[0][i] += s * g[i];
                   });
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    require_rank2(a, "matmul");
    require_rank2(b, "matmul");
    const std::size_t n = a.dim(0), k = a.dim(1), m = b.dim(1);
    if (b.dim(0) != k) {
        throw ShapeError("matmul: inner dimensions differ " + shape_to_string(a.shape()) + " x " +
                         shape_to_string(b.shape()));
    }
    // Every output row goes through the same accumulation sequence, so the
    // product commutes exactly with row permutations of `a`. A blocked GEMM
    // treats trailing rows with different kernels and breaks that.
    std::vector<double> out(n * m, 0.0);
    {
        ConstMap A(a.data().data(), n, k), B(b.data().data(), k, m);
        MutMap C(out.data(), n, m);
        for (std::size_t i = 0; i < n; ++i) {
            auto row = C.row(i);
            for (std::size_t j = 0; j < k; ++j) row.noalias() += A(i, j) * B.row(j);
        }
    }
    return make_op({a, b}, {n, m}, std::move(out),
                   [a, b, n, k, m](std::span<const double> g, std::vector<std::span<double>>& in) {
                       ConstMap G(g.data(), n, m);
                       if (!in[0].empty()) {
                           MutMap(in[0].data(), n, k).noalias() +=
                               G * ConstMap(b.data().data(), k, m).transpose();
                       }
                       if (!in[1].empty()) {
                           MutMap(in[1].data(), k, m).noalias() +=
                               ConstMap(a.data().data(), n, k).transpose() * G;
                       }
                   });
}

Tensor add_row(const Tensor& a, const Tensor& row) {
    require_rank2(a, "add_row");
    const std::size_t n = a.dim(0), m = a.dim(1);
    const bool row_ok = (row.rank() == 1 && row.dim(0) == m) ||
                        (row.rank() == 2 && row.dim(0) == 1 && row.dim(1) == m);
    if (!row_ok) {
        throw ShapeError("add_row: cannot broadcast " + shape_to_string(row.shape()) + " onto " +
                         shape_to_string(a.shape()));
    }
    std::vector<double> out(a.data().begin(), a.data().end());
    auto r = row.data();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) out[i * m + j] += r[j];
    return make_op({a, row}, a.shape(), std::move(out),
                   [n, m](std::span<const double> g, std::vector<std::span<double>>& in) {
                       if (!in[0].empty())
                           for (std::size_t i = 0; i < g.size(); ++i) in[0][i] += g[i];
                       if (!in[1].empty())
                           for (std::size_t i = 0; i < n; ++i)
                               for (std::size_t j = 0; j < m; ++j) in[1][j] += g[i * m + j];
                   });
}

MaxResult max(const Tensor& a, std::size_t axis) {
    require_rank2(a, "max");
    if (axis > 1) throw ShapeError("max: axis " + std::to_string(axis) + " out of range for rank 2");
    const std::size_t n = a.dim(0), m = a.dim(1);
    if (n == 0 || m == 0) throw ShapeError("max: empty tensor " + shape_to_string(a.shape()));
    auto x = a.data();
    const std::size_t outer = axis == 0 ? m : n;
    const std::size_t inner = axis == 0 ? n : m;
    auto flat = [&](std::size_t o, std::size_t i) { return axis == 0 ? i * m + o : o * m + i; };

    std::vector<double> out(outer);
    std::vector<std::size_t> arg(outer);
    std::vector<std::size_t> src(outer);
    for (std::size_t o = 0; o < outer; ++o) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < inner; ++i) {
            if (x[flat(o, i)] > x[flat(o, best)]) best = i;
        }
        arg[o] = best;
        src[o] = flat(o, best);
        out[o] = x[src[o]];
    }
    Tensor values = make_op({a}, {outer}, std::move(out),
                            [src](std::span<const double> g, std::vector<std::span<double>>& in) {
                                for (std::size_t o = 0; o < g.size(); ++o) in[0][src[o]] += g[o];
                            });
    return {values, std::move(arg)};
}

Tensor sum(const Tensor& a) {
    auto x = a.data();
    double s = 0.0;
    for (double v : x) s += v;
    return make_op({a}, {}, {s}, [](std::span<const double> g, std::vector<std::span<double>>& in) {
        for (double& v : in[0]) v += g[0];
    });
}

Tensor mean(const Tensor& a) {
    if (a.numel() == 0) throw ShapeError("mean: empty tensor");
    auto x = a.data();
    double s = 0.0;
    for (double v : x) s += v;
    const double n = static_cast<double>(a.numel());
    return make_op({a}, {}, {s / n}, [n](std::span<const double> g, std::vector<std::span<double>>& in) {
        for (double& v : in[0]) v += g[0] / n;
    });
}

Tensor sum_squares(const Tensor& a) {
    auto x = a.data();
    double s = 0.0;
    for (double v : x) s += v * v;
    return make_op({a}, {}, {s}, [a](std::span<const double> g, std::vector<std::span<double>>& in) {
        auto x = a.data();
        for (std::size_t i = 0; i < x.size(); ++i) in[0][i] += 2.0 * x[i] * g[0];
    });
}

Tensor sin(const Tensor& a) {
    return unary(a, [](double v) { return std::sin(v); }, [](double v) { return std::cos(v); });
}

Tensor cos(const Tensor& a) {
    return unary(a, [](double v) { return std::cos(v); }, [](double v) { return -std::sin(v); });
}

Tensor tanh(const Tensor& a) {
    return unary(
        a, [](double v) { return std::tanh(v); },
        [](double v) {
            const double t = std::tanh(v);
            return 1.0 - t * t;
        });
}

Tensor silu(const Tensor& a) {
    return unary(
        a, [](double v) { return v / (1.0 + std::exp(-v)); },
        [](double v) {
            const double s = 1.0 / (1.0 + std::exp(-v));
            return s * (1.0 + v * (1.0 - s));
        });
}

Tensor reshape(const Tensor& a, Shape shape) {
    if (shape_numel(shape) != a.numel()) {
        throw ShapeError("reshape: cannot view " + shape_to_string(a.shape()) + " as " +
                         shape_to_string(shape));
    }
    std::vector<double> out(a.data().begin(), a.data().end());
    return make_op({a}, std::move(shape), std::move(out),
                   [](std::span<const double> g, std::vector<std::span<double>>& in) {
                       for (std::size_t i = 0; i < g.size(); ++i) in[0][i] += g[i];
                   });
}

}  // namespace ops

}  // namespace trigcm
