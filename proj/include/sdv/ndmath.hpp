#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <memory>
#include <vector>

#include "sdv/errors.hpp"

namespace sdv {

namespace detail {
struct TensorImpl {
    std::vector<std::size_t> shape;
    std::vector<double> value;
    std::vector<double> grad; // sized like value iff requires_grad
    bool requires_grad = false;
    bool leaf = true; // false once produced by a tape operation
};
} // namespace detail

/// Dense row-major tensor of doubles. Tensors are cheap shared handles: copying a
/// Tensor aliases the same storage, which is what lets tape nodes and model parameter
/// structs refer to one buffer.
class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(std::vector<std::size_t> shape, bool requires_grad = false);
    static Tensor full(std::vector<std::size_t> shape, double fill, bool requires_grad = false);
    static Tensor from(std::vector<double> values, std::vector<std::size_t> shape,
                       bool requires_grad = false);
    static Tensor scalar(double v, bool requires_grad = false);
    static Tensor vector(std::vector<double> v, bool requires_grad = false);

    bool defined() const { return impl_ != nullptr; }
    const std::vector<std::size_t>& shape() const { return impl_->shape; }
    std::size_t ndim() const { return impl_->shape.size(); }
    std::size_t numel() const { return impl_->value.size(); }

    /// rows()/cols() view any tensor as a matrix: scalars are 1x1, length-n vectors n x 1.
    std::size_t rows() const;
    std::size_t cols() const;

    std::vector<double>& values() { return impl_->value; }
    const std::vector<double>& values() const { return impl_->value; }
    double item() const;
    double operator()(std::size_t r, std::size_t c) const;

    bool requires_grad() const { return impl_->requires_grad; }
    bool is_leaf() const { return impl_->leaf; }
    const std::vector<double>& grad() const;
    std::vector<double>& grad();
    void zero_grad();

    /// Deep copy of the values (fresh storage, grad not copied).
    Tensor clone() const;

    detail::TensorImpl* impl() const { return impl_.get(); }
    std::shared_ptr<detail::TensorImpl> handle() const { return impl_; }

private:
    explicit Tensor(std::shared_ptr<detail::TensorImpl> impl) : impl_(std::move(impl)) {}
    std::shared_ptr<detail::TensorImpl> impl_;
    friend class Tape;
};

/// Records each differentiable operation in execution order; backward() replays the
/// records in reverse, accumulating total derivatives into every requires_grad leaf.
/// Single-threaded per tape. Gradients of leaves persist across backward calls and are
/// zeroed explicitly by the caller (see Tensor::zero_grad / sgd_step).
class Tape {
public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    // -- elementwise --
    Tensor add(const Tensor& a, const Tensor& b);
    Tensor sub(const Tensor& a, const Tensor& b);
    Tensor mul(const Tensor& a, const Tensor& b);
    Tensor sigmoid(const Tensor& x);
    Tensor tanh(const Tensor& x);
    Tensor scale(const Tensor& x, double c);

    // -- linear algebra --
    /// 2-D x 2-D -> 2-D, or 2-D x 1-D (matrix . vector) -> 1-D.
    Tensor matmul(const Tensor& a, const Tensor& b);
    /// Row vector times matrix: v[r] . m[r x c] -> [c].
    Tensor vecmat(const Tensor& v, const Tensor& m);
    /// m[r x c] + bias[r], broadcast across columns.
    Tensor add_bias(const Tensor& m, const Tensor& bias);
    /// x[r x c] with column j scaled by s[j].
    Tensor colscale(const Tensor& x, const Tensor& s);

    // -- shape --
    Tensor stack_rows(const std::vector<Tensor>& rows); // T tensors [c] -> [T x c]
    Tensor row(const Tensor& m, std::size_t r);         // [T x c], r -> [c]

    // -- reductions / normalization --
    Tensor sum(const Tensor& x); // -> scalar
    Tensor softmax(const Tensor& x);      // 1-D
    Tensor softmax_cols(const Tensor& x); // 2-D, softmax over rows within each column

    /// Seeds dLoss/dLoss = 1 and replays the tape in reverse. Non-leaf gradients are
    /// scratch state reset per call; leaf gradients accumulate across calls.
    void backward(const Tensor& loss);

    void clear();
    std::size_t size() const { return nodes_.size(); }

private:
    struct Node {
        std::shared_ptr<detail::TensorImpl> out;
        std::function<void()> backprop;
    };
    std::vector<Node> nodes_;

    Tensor make_output(std::vector<std::size_t> shape, bool requires_grad);
    void record(const Tensor& out, std::function<void()> backprop);
};

/// Max over coordinates of |analytic - central difference| / max(1e-8, |analytic| + |numeric|)
/// for a scalar-valued function of one tensor. `point` must require gradients; its values
/// are perturbed in place and restored.
double grad_check(const std::function<Tensor(Tape&, Tensor&)>& f, Tensor& point,
                  double eps = 1e-5);

/// Raise glibc's trim/mmap thresholds so the tape's buffer churn stays inside the malloc
/// arena instead of bouncing pages off the kernel. No-op elsewhere.
void tune_allocator();

} // namespace sdv
