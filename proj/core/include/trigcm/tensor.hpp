#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace trigcm {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_to_string(const Shape& shape);

namespace detail {
struct TensorNode {
    Shape shape;
    std::vector<double> data;
    std::vector<double> grad;  // empty until first accumulation
    bool requires_grad = false;
};
}  // namespace detail

// Backward callback: receives the output gradient and one span per input.
// Spans for inputs that do not require gradients are empty.
using BackwardFn = std::function<void(std::span<const double>, std::vector<std::span<double>>&)>;

// Dense row-major array of doubles. A Tensor is a cheap handle; copies
// share storage. Values are fixed at construction, only the gradient
// accumulator changes afterwards.
class Tensor {
   public:
    Tensor();
    Tensor(Shape shape, std::vector<double> data, bool requires_grad = false);

    static Tensor zeros(Shape shape, bool requires_grad = false);
    static Tensor scalar(double value);
    // Trainable leaf.
    static Tensor parameter(Shape shape, std::vector<double> data);

    const Shape& shape() const { return node_->shape; }
    std::size_t rank() const { return node_->shape.size(); }
    std::size_t dim(std::size_t i) const { return node_->shape.at(i); }
    std::size_t numel() const { return node_->data.size(); }

    std::span<const double> data() const { return node_->data; }
    double item() const;
    double at(std::size_t i) const { return node_->data.at(i); }

    bool requires_grad() const { return node_->requires_grad; }
    bool has_grad() const { return !node_->grad.empty(); }
    // Empty span if no gradient has been accumulated yet.
    std::span<const double> grad() const { return node_->grad; }
    std::span<double> mutable_grad();
    void zero_grad();

    // In-place parameter update hook for the optimizer; bypasses the tape.
    std::span<double> mutable_data() { return node_->data; }

    bool same_node(const Tensor& other) const { return node_ == other.node_; }

   private:
    friend class Tape;
    friend Tensor make_op(std::vector<Tensor> inputs, Shape shape, std::vector<double> data,
                          BackwardFn backward);

    explicit Tensor(std::shared_ptr<detail::TensorNode> node) : node_(std::move(node)) {}

    std::shared_ptr<detail::TensorNode> node_;
};

// Records operations while installed as the thread's active tape (see
// TapeScope). One tape belongs to one thread.
class Tape {
   public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    // Reverse pass from a scalar loss. Intermediate gradients are rebuilt
    // from zero on every call; leaf gradients accumulate.
    void backward(const Tensor& loss);

    std::size_t size() const { return entries_.size(); }
    void clear() { entries_.clear(); }

   private:
    friend Tensor make_op(std::vector<Tensor> inputs, Shape shape, std::vector<double> data,
                          BackwardFn backward);

    struct Entry {
        std::vector<std::shared_ptr<detail::TensorNode>> inputs;
        std::shared_ptr<detail::TensorNode> output;
        BackwardFn backward;
    };
    std::vector<Entry> entries_;
};

// Installs a tape as the active one for the current thread.
class TapeScope {
   public:
    explicit TapeScope(Tape& tape);
    ~TapeScope();
    TapeScope(const TapeScope&) = delete;
    TapeScope& operator=(const TapeScope&) = delete;

   private:
    Tape* previous_;
};

// Suspends recording for the current thread (inference paths).
class NoGradScope {
   public:
    NoGradScope();
    ~NoGradScope();
    NoGradScope(const NoGradScope&) = delete;
    NoGradScope& operator=(const NoGradScope&) = delete;

   private:
    Tape* previous_;
};

Tape* active_tape();

// Builds an op result. When a tape is active and some input requires a
// gradient, the op is recorded with `backward`.
Tensor make_op(std::vector<Tensor> inputs, Shape shape, std::vector<double> data,
               BackwardFn backward);

struct MaxResult {
    Tensor values;
    std::vector<std::size_t> argmax;
};

namespace ops {

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);

// [n, k] x [k, m] -> [n, m]
Tensor matmul(const Tensor& a, const Tensor& b);

// a: [n, m], row: [m] or [1, m]; adds `row` to every row of `a`.
Tensor add_row(const Tensor& a, const Tensor& row);

// Max over `axis` of a rank-2 tensor, dropping that axis. Ties go to the
// lowest index; the gradient is routed to exactly one position.
MaxResult max(const Tensor& a, std::size_t axis);

Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);
Tensor sum_squares(const Tensor& a);

Tensor sin(const Tensor& a);
Tensor cos(const Tensor& a);
Tensor tanh(const Tensor& a);
// x * sigmoid(x)
Tensor silu(const Tensor& a);

Tensor reshape(const Tensor& a, Shape shape);

}  // namespace ops

}  // namespace trigcm
