#include "sdv/ndmath.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <numeric>
#include <stdexcept>
#include <string>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

namespace sdv {

namespace {

using EigenMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<EigenMat>;
using ConstMatMap = Eigen::Map<const EigenMat>;

std::size_t shape_numel(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (a.shape() != b.shape())
        throw std::invalid_argument(std::string(op) + ": operand shapes differ");
}

// A finite accumulator implies every element is finite: any NaN poisons the sum and a
// lone +-Inf survives it. Element sums that overflow to Inf on their own are resolved
// by the exact rescan.
void check_finite(const std::vector<double>& v, const char* op) {
    double acc = Eigen::Map<const Eigen::ArrayXd>(v.data(), v.size()).sum();
    if (std::isfinite(acc)) return;
    for (double x : v)
        if (!std::isfinite(x))
            throw NumericError(std::string(op) + ": non-finite value produced");
}

// 64-byte-aligned scratch for the vectorized transcendentals. Writing into a buffer of
// fixed alignment keeps Eigen's scalar-peel/packet split identical from run to run;
// evaluating straight into heap vectors would make results depend on where malloc put
// them (the peeled scalar exp and the packet exp differ in the last ulp).
double* transcendental_scratch(std::size_t n) {
    thread_local double* buf = nullptr;
    thread_local std::size_t cap = 0;
    if (n > cap) {
        std::free(buf);
        void* p = nullptr;
        if (posix_memalign(&p, 64, n * sizeof(double)) != 0)
            throw std::bad_alloc();
        buf = static_cast<double*>(p);
        cap = n;
    }
    return buf;
}

} // namespace

// ---------------------------------------------------------------------------
// Tensor
// ---------------------------------------------------------------------------

Tensor Tensor::zeros(std::vector<std::size_t> shape, bool requires_grad) {
    auto impl = std::make_shared<detail::TensorImpl>();
    std::size_t n = shape_numel(shape);
    impl->shape = std::move(shape);
    impl->value.assign(n, 0.0);
    impl->requires_grad = requires_grad;
    if (requires_grad) impl->grad.assign(n, 0.0);
    return Tensor(std::move(impl));
}

Tensor Tensor::full(std::vector<std::size_t> shape, double fill, bool requires_grad) {
    Tensor t = zeros(std::move(shape), requires_grad);
    std::fill(t.values().begin(), t.values().end(), fill);
    return t;
}

Tensor Tensor::from(std::vector<double> values, std::vector<std::size_t> shape,
                    bool requires_grad) {
    if (values.size() != shape_numel(shape))
        throw std::invalid_argument("Tensor::from: value count does not match shape");
    auto impl = std::make_shared<detail::TensorImpl>();
    impl->shape = std::move(shape);
    impl->value = std::move(values);
    impl->requires_grad = requires_grad;
    if (requires_grad) impl->grad.assign(impl->value.size(), 0.0);
    check_finite(impl->value, "Tensor::from");
    return Tensor(std::move(impl));
}

Tensor Tensor::scalar(double v, bool requires_grad) {
    return from({v}, {}, requires_grad);
}

Tensor Tensor::vector(std::vector<double> v, bool requires_grad) {
    std::size_t n = v.size();
    return from(std::move(v), {n}, requires_grad);
}

std::size_t Tensor::rows() const {
    return impl_->shape.empty() ? 1 : impl_->shape[0];
}

std::size_t Tensor::cols() const {
    return impl_->shape.size() < 2 ? 1 : impl_->shape[1];
}

double Tensor::item() const {
    if (numel() != 1)
        throw std::invalid_argument("Tensor::item: tensor is not a scalar");
    return impl_->value[0];
}

double Tensor::operator()(std::size_t r, std::size_t c) const {
    return impl_->value[r * cols() + c];
}

const std::vector<double>& Tensor::grad() const {
    if (!impl_->requires_grad)
        throw std::invalid_argument("Tensor::grad: tensor does not require gradients");
    return impl_->grad;
}

std::vector<double>& Tensor::grad() {
    if (!impl_->requires_grad)
        throw std::invalid_argument("Tensor::grad: tensor does not require gradients");
    return impl_->grad;
}

void Tensor::zero_grad() {
    if (impl_->requires_grad)
        std::fill(impl_->grad.begin(), impl_->grad.end(), 0.0);
}

Tensor Tensor::clone() const {
    return Tensor::from(impl_->value, impl_->shape, impl_->requires_grad);
}

// ---------------------------------------------------------------------------
// Tape
// ---------------------------------------------------------------------------

Tensor Tape::make_output(std::vector<std::size_t> shape, bool requires_grad) {
    // grad buffers of intermediates are allocated by backward(); only leaves carry
    // theirs from construction
    auto impl = std::make_shared<detail::TensorImpl>();
    std::size_t n = shape_numel(shape);
    impl->shape = std::move(shape);
    impl->value.resize(n);
    impl->requires_grad = requires_grad;
    impl->leaf = false;
    return Tensor(std::move(impl));
}

void Tape::record(const Tensor& out, std::function<void()> backprop) {
    nodes_.push_back(Node{out.handle(), std::move(backprop)});
}

Tensor Tape::add(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "add");
    bool rg = a.requires_grad() || b.requires_grad();
    Tensor out = make_output(a.shape(), rg);
    const auto& av = a.values();
    const auto& bv = b.values();
    auto& ov = out.values();
    for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = av[i] + bv[i];
    check_finite(ov, "add");
    if (rg) {
        record(out, [a = a.handle(), b = b.handle(), o = out.handle()] {
            if (a->requires_grad)
                for (std::size_t i = 0; i < o->grad.size(); ++i) a->grad[i] += o->grad[i];
            if (b->requires_grad)
                for (std::size_t i = 0; i < o->grad.size(); ++i) b->grad[i] += o->grad[i];
        });
    }
    return out;
}

Tensor Tape::sub(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "sub");
    bool rg = a.requires_grad() || b.requires_grad();
    Tensor out = make_output(a.shape(), rg);
    const auto& av = a.values();
    const auto& bv = b.values();
    auto& ov = out.values();
    for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = av[i] - bv[i];
    check_finite(ov, "sub");
    if (rg) {
        record(out, [a = a.handle(), b = b.handle(), o = out.handle()] {
            if (a->requires_grad)
                for (std::size_t i = 0; i < o->grad.size(); ++i) a->grad[i] += o->grad[i];
            if (b->requires_grad)
                for (std::size_t i = 0; i < o->grad.size(); ++i) b->grad[i] -= o->grad[i];
        });
    }
    return out;
}

Tensor Tape::mul(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "mul");
    bool rg = a.requires_grad() || b.requires_grad();
    Tensor out = make_output(a.shape(), rg);
    const auto& av = a.values();
    const auto& bv = b.values();
    auto& ov = out.values();
    for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = av[i] * bv[i];
    check_finite(ov, "mul");
    if (rg) {
        record(out, [a = a.handle(), b = b.handle(), o = out.handle()] {
            if (a->requires_grad)
                for (std::size_t i = 0; i < o->grad.size(); ++i)
                    a->grad[i] += o->grad[i] * b->value[i];
            if (b->requires_grad)
                for (std::size_t i = 0; i < o->grad.size(); ++i)
                    b->grad[i] += o->grad[i] * a->value[i];
        });
    }
    return out;
}

Tensor Tape::sigmoid(const Tensor& x) {
    bool rg = x.requires_grad();
    Tensor out = make_output(x.shape(), rg);
    const auto& xv = x.values();
    auto& ov = out.values();
    std::size_t n = ov.size();
    double* tmp = transcendental_scratch(n);
    Eigen::Map<Eigen::ArrayXd, Eigen::Aligned64> T(tmp, n);
    T = 1.0 / (1.0 + (-Eigen::Map<const Eigen::ArrayXd>(xv.data(), n)).exp());
    std::memcpy(ov.data(), tmp, n * sizeof(double));
    check_finite(ov, "sigmoid");
    if (rg) {
        record(out, [x = x.handle(), o = out.handle()] {
            for (std::size_t i = 0; i < o->grad.size(); ++i) {
                double y = o->value[i];
                x->grad[i] += o->grad[i] * y * (1.0 - y);
            }
        });
    }
    return out;
}

Tensor Tape::tanh(const Tensor& x) {
    bool rg = x.requires_grad();
    Tensor out = make_output(x.shape(), rg);
    const auto& xv = x.values();
    auto& ov = out.values();
    // tanh through the vectorized exp; exact at 0, saturates to +-1 like std::tanh
    std::size_t n = ov.size();
    double* tmp = transcendental_scratch(n);
    Eigen::Map<Eigen::ArrayXd, Eigen::Aligned64> T(tmp, n);
    T = 1.0 - 2.0 / ((2.0 * Eigen::Map<const Eigen::ArrayXd>(xv.data(), n)).exp() + 1.0);
    std::memcpy(ov.data(), tmp, n * sizeof(double));
    check_finite(ov, "tanh");
    if (rg) {
        record(out, [x = x.handle(), o = out.handle()] {
            for (std::size_t i = 0; i < o->grad.size(); ++i) {
                double y = o->value[i];
                x->grad[i] += o->grad[i] * (1.0 - y * y);
            }
        });
    }
    return out;
}

Tensor Tape::scale(const Tensor& x, double c) {
    bool rg = x.requires_grad();
    Tensor out = make_output(x.shape(), rg);
    const auto& xv = x.values();
    auto& ov = out.values();
    for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = xv[i] * c;
    check_finite(ov, "scale");
    if (rg) {
        record(out, [x = x.handle(), o = out.handle(), c] {
            for (std::size_t i = 0; i < o->grad.size(); ++i) x->grad[i] += o->grad[i] * c;
        });
    }
    return out;
}

Tensor Tape::matmul(const Tensor& a, const Tensor& b) {
    if (a.ndim() != 2)
        throw std::invalid_argument("matmul: left operand must be 2-D");
    if (b.ndim() != 1 && b.ndim() != 2)
        throw std::invalid_argument("matmul: right operand must be 1-D or 2-D");
    std::size_t m = a.shape()[0], k = a.shape()[1];
    std::size_t k2 = b.shape()[0];
    std::size_t n = b.ndim() == 2 ? b.shape()[1] : 1;
    if (k != k2)
        throw std::invalid_argument("matmul: inner dimensions disagree");

    bool rg = a.requires_grad() || b.requires_grad();
    std::vector<std::size_t> out_shape =
        b.ndim() == 2 ? std::vector<std::size_t>{m, n} : std::vector<std::size_t>{m};
    Tensor out = make_output(std::move(out_shape), rg);

    ConstMatMap A(a.values().data(), m, k);
    ConstMatMap B(b.values().data(), k, n);
    MatMap O(out.values().data(), m, n);
    O.noalias() = A * B;
    check_finite(out.values(), "matmul");

    if (rg) {
        record(out, [a = a.handle(), b = b.handle(), o = out.handle(), m, k, n] {
            ConstMatMap G(o->grad.data(), m, n);
            if (a->requires_grad) {
                ConstMatMap B(b->value.data(), k, n);
                MatMap GA(a->grad.data(), m, k);
                GA.noalias() += G * B.transpose();
            }
            if (b->requires_grad) {
                ConstMatMap A(a->value.data(), m, k);
                MatMap GB(b->grad.data(), k, n);
                GB.noalias() += A.transpose() * G;
            }
        });
    }
    return out;
}

Tensor Tape::vecmat(const Tensor& v, const Tensor& m) {
    if (v.ndim() != 1 || m.ndim() != 2)
        throw std::invalid_argument("vecmat: expects 1-D vector and 2-D matrix");
    std::size_t r = m.shape()[0], c = m.shape()[1];
    if (v.shape()[0] != r)
        throw std::invalid_argument("vecmat: vector length does not match matrix rows");

    bool rg = v.requires_grad() || m.requires_grad();
    Tensor out = make_output({c}, rg);
    ConstMatMap V(v.values().data(), 1, r);
    ConstMatMap M(m.values().data(), r, c);
    MatMap O(out.values().data(), 1, c);
    O.noalias() = V * M;
    check_finite(out.values(), "vecmat");

    if (rg) {
        record(out, [v = v.handle(), m = m.handle(), o = out.handle(), r, c] {
            ConstMatMap G(o->grad.data(), 1, c);
            if (v->requires_grad) {
                ConstMatMap M(m->value.data(), r, c);
                MatMap GV(v->grad.data(), 1, r);
                GV.noalias() += G * M.transpose();
            }
            if (m->requires_grad) {
                ConstMatMap V(v->value.data(), 1, r);
                MatMap GM(m->grad.data(), r, c);
                GM.noalias() += V.transpose() * G;
            }
        });
    }
    return out;
}

Tensor Tape::add_bias(const Tensor& m, const Tensor& bias) {
    if (m.ndim() != 2 || bias.ndim() != 1)
        throw std::invalid_argument("add_bias: expects 2-D matrix and 1-D bias");
    std::size_t r = m.shape()[0], c = m.shape()[1];
    if (bias.shape()[0] != r)
        throw std::invalid_argument("add_bias: bias length does not match matrix rows");

    bool rg = m.requires_grad() || bias.requires_grad();
    Tensor out = make_output({r, c}, rg);
    const auto& mv = m.values();
    const auto& bv = bias.values();
    auto& ov = out.values();
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) ov[i * c + j] = mv[i * c + j] + bv[i];
    check_finite(ov, "add_bias");

    if (rg) {
        record(out, [m = m.handle(), b = bias.handle(), o = out.handle(), r, c] {
            if (m->requires_grad)
                for (std::size_t i = 0; i < r * c; ++i) m->grad[i] += o->grad[i];
            if (b->requires_grad)
                for (std::size_t i = 0; i < r; ++i) {
                    double s = 0.0;
                    for (std::size_t j = 0; j < c; ++j) s += o->grad[i * c + j];
                    b->grad[i] += s;
                }
        });
    }
    return out;
}

Tensor Tape::colscale(const Tensor& x, const Tensor& s) {
    if (x.ndim() != 2 || s.ndim() != 1)
        throw std::invalid_argument("colscale: expects 2-D matrix and 1-D scale");
    std::size_t r = x.shape()[0], c = x.shape()[1];
    if (s.shape()[0] != c)
        throw std::invalid_argument("colscale: scale length does not match matrix columns");

    bool rg = x.requires_grad() || s.requires_grad();
    Tensor out = make_output({r, c}, rg);
    const auto& xv = x.values();
    const auto& sv = s.values();
    auto& ov = out.values();
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) ov[i * c + j] = xv[i * c + j] * sv[j];
    check_finite(ov, "colscale");

    if (rg) {
        record(out, [x = x.handle(), s = s.handle(), o = out.handle(), r, c] {
            if (x->requires_grad)
                for (std::size_t i = 0; i < r; ++i)
                    for (std::size_t j = 0; j < c; ++j)
                        x->grad[i * c + j] += o->grad[i * c + j] * s->value[j];
            if (s->requires_grad)
                for (std::size_t j = 0; j < c; ++j) {
                    double acc = 0.0;
                    for (std::size_t i = 0; i < r; ++i)
                        acc += o->grad[i * c + j] * x->value[i * c + j];
                    s->grad[j] += acc;
                }
        });
    }
    return out;
}

Tensor Tape::stack_rows(const std::vector<Tensor>& rows) {
    if (rows.empty())
        throw std::invalid_argument("stack_rows: no rows given");
    std::size_t c = rows.front().numel();
    bool rg = false;
    for (const Tensor& t : rows) {
        if (t.ndim() != 1 || t.numel() != c)
            throw std::invalid_argument("stack_rows: rows must be 1-D of equal length");
        rg = rg || t.requires_grad();
    }
    std::size_t T = rows.size();
    Tensor out = make_output({T, c}, rg);
    auto& ov = out.values();
    for (std::size_t i = 0; i < T; ++i)
        std::copy(rows[i].values().begin(), rows[i].values().end(), ov.begin() + i * c);

    if (rg) {
        std::vector<std::shared_ptr<detail::TensorImpl>> handles;
        handles.reserve(T);
        for (const Tensor& t : rows) handles.push_back(t.handle());
        record(out, [handles = std::move(handles), o = out.handle(), c] {
            for (std::size_t i = 0; i < handles.size(); ++i)
                if (handles[i]->requires_grad)
                    for (std::size_t j = 0; j < c; ++j)
                        handles[i]->grad[j] += o->grad[i * c + j];
        });
    }
    return out;
}

Tensor Tape::row(const Tensor& m, std::size_t r) {
    if (m.ndim() != 2)
        throw std::invalid_argument("row: expects a 2-D tensor");
    std::size_t rows = m.shape()[0], c = m.shape()[1];
    if (r >= rows)
        throw std::invalid_argument("row: index out of range");
    bool rg = m.requires_grad();
    Tensor out = make_output({c}, rg);
    std::copy(m.values().begin() + r * c, m.values().begin() + (r + 1) * c,
              out.values().begin());
    if (rg) {
        record(out, [m = m.handle(), o = out.handle(), r, c] {
            for (std::size_t j = 0; j < c; ++j) m->grad[r * c + j] += o->grad[j];
        });
    }
    return out;
}

Tensor Tape::sum(const Tensor& x) {
    bool rg = x.requires_grad();
    Tensor out = make_output({}, rg);
    out.values()[0] = std::accumulate(x.values().begin(), x.values().end(), 0.0);
    check_finite(out.values(), "sum");
    if (rg) {
        record(out, [x = x.handle(), o = out.handle()] {
            double g = o->grad[0];
            for (double& gi : x->grad) gi += g;
        });
    }
    return out;
}

namespace {

// softmax over one contiguous-with-stride lane, max-subtracted for stability
void softmax_lane(const double* in, double* out, std::size_t n, std::size_t stride) {
    double mx = in[0];
    for (std::size_t i = 1; i < n; ++i) mx = std::max(mx, in[i * stride]);
    double denom = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double e = std::exp(in[i * stride] - mx);
        out[i * stride] = e;
        denom += e;
    }
    for (std::size_t i = 0; i < n; ++i) out[i * stride] /= denom;
}

void softmax_lane_backward(const double* y, const double* gout, double* gin, std::size_t n,
                           std::size_t stride) {
    double dot = 0.0;
    for (std::size_t i = 0; i < n; ++i) dot += gout[i * stride] * y[i * stride];
    for (std::size_t i = 0; i < n; ++i)
        gin[i * stride] += y[i * stride] * (gout[i * stride] - dot);
}

} // namespace

Tensor Tape::softmax(const Tensor& x) {
    if (x.ndim() != 1 || x.numel() == 0)
        throw std::invalid_argument("softmax: expects a non-empty 1-D tensor");
    bool rg = x.requires_grad();
    Tensor out = make_output(x.shape(), rg);
    softmax_lane(x.values().data(), out.values().data(), x.numel(), 1);
    check_finite(out.values(), "softmax");
    if (rg) {
        record(out, [x = x.handle(), o = out.handle()] {
            softmax_lane_backward(o->value.data(), o->grad.data(), x->grad.data(),
                                  o->value.size(), 1);
        });
    }
    return out;
}

Tensor Tape::softmax_cols(const Tensor& x) {
    if (x.ndim() != 2 || x.numel() == 0)
        throw std::invalid_argument("softmax_cols: expects a non-empty 2-D tensor");
    std::size_t r = x.shape()[0], c = x.shape()[1];
    bool rg = x.requires_grad();
    Tensor out = make_output(x.shape(), rg);
    for (std::size_t j = 0; j < c; ++j)
        softmax_lane(x.values().data() + j, out.values().data() + j, r, c);
    check_finite(out.values(), "softmax_cols");
    if (rg) {
        record(out, [x = x.handle(), o = out.handle(), r, c] {
            for (std::size_t j = 0; j < c; ++j)
                softmax_lane_backward(o->value.data() + j, o->grad.data() + j,
                                      x->grad.data() + j, r, c);
        });
    }
    return out;
}

void Tape::backward(const Tensor& loss) {
    if (!loss.defined() || loss.numel() != 1)
        throw std::invalid_argument("backward: loss must be a scalar tensor");
    if (nodes_.empty())
        throw std::invalid_argument("backward: tape is empty");
    if (loss.is_leaf() || !loss.requires_grad())
        throw std::invalid_argument("backward: loss was not produced on this tape");

    // Intermediate gradients are per-call scratch; only leaves accumulate across calls.
    for (Node& n : nodes_)
        if (!n.out->leaf && n.out->requires_grad)
            n.out->grad.assign(n.out->value.size(), 0.0);

    loss.impl()->grad[0] += 1.0;
    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) it->backprop();
}

void Tape::clear() {
    nodes_.clear();
}

// ---------------------------------------------------------------------------
// Gradient checking
// ---------------------------------------------------------------------------

void tune_allocator() {
#if defined(__GLIBC__)
    mallopt(M_TRIM_THRESHOLD, 1 << 30);
    mallopt(M_MMAP_THRESHOLD, 1 << 30);
#endif
}

double grad_check(const std::function<Tensor(Tape&, Tensor&)>& f, Tensor& point, double eps) {
    if (!point.requires_grad())
        throw std::invalid_argument("grad_check: point must require gradients");

    point.zero_grad();
    std::vector<double> analytic(point.numel(), 0.0);
    {
        Tape tape;
        Tensor out = f(tape, point);
        if (out.numel() != 1)
            throw std::invalid_argument("grad_check: function must be scalar-valued");
        if (out.requires_grad() && !out.is_leaf()) {
            tape.backward(out);
            analytic = point.grad();
        }
        // else: f is constant in `point`; the analytic gradient is identically zero
    }

    double worst = 0.0;
    auto& v = point.values();
    for (std::size_t i = 0; i < v.size(); ++i) {
        double orig = v[i];
        v[i] = orig + eps;
        Tape tp;
        double fp = f(tp, point).item();
        v[i] = orig - eps;
        Tape tm;
        double fm = f(tm, point).item();
        v[i] = orig;
        double numeric = (fp - fm) / (2.0 * eps);
        double err = std::abs(analytic[i] - numeric) /
                     std::max(1e-8, std::abs(analytic[i]) + std::abs(numeric));
        worst = std::max(worst, err);
    }
    point.zero_grad();
    return worst;
}

} // namespace sdv
