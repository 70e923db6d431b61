#include "advforge/tape.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <memory>
#include <stdexcept>

#include "advforge/rng.hpp"

namespace advforge::nn {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

Tape::Node& Tape::node(NodeId id) {
    if (id < 0 || id >= static_cast<NodeId>(nodes_.size()))
        throw std::invalid_argument("Tape: invalid node id " + std::to_string(id) +
                                    " (no forward pass recorded?)");
    return nodes_[static_cast<std::size_t>(id)];
}

const Tape::Node& Tape::node(NodeId id) const {
    if (id < 0 || id >= static_cast<NodeId>(nodes_.size()))
        throw std::invalid_argument("Tape: invalid node id " + std::to_string(id) +
                                    " (no forward pass recorded?)");
    return nodes_[static_cast<std::size_t>(id)];
}

NodeId Tape::push(Tensor value, std::function<void(Tape&, Node&)> back) {
    Node n;
    n.value = std::move(value);
    n.back = std::move(back);
    nodes_.push_back(std::move(n));
    return static_cast<NodeId>(nodes_.size()) - 1;
}

Tensor& Tape::grad_buf(NodeId id) {
    Node& n = node(id);
    if (n.grad.numel() == 0) n.grad = Tensor::zeros(n.value.shape);
    return n.grad;
}

const Tensor& Tape::value(NodeId id) const { return node(id).value; }
const Tensor& Tape::grad(NodeId id) const {
    const Node& n = node(id);
    if (n.grad.numel() == 0) throw std::runtime_error("Tape::grad: node has no gradient (run backward)");
    return n.grad;
}

NodeId Tape::constant(Tensor value) { return push(std::move(value), nullptr); }

NodeId Tape::param(ParamStore& store, const std::string& name) {
    NodeId id = push(store.value(name), nullptr);
    nodes_.back().store = &store;
    nodes_.back().param_name = name;
    return id;
}

static void check_same(const Tensor& a, const Tensor& b, const char* op) {
    if (!a.same_shape(b))
        throw std::invalid_argument(std::string(op) + ": shape mismatch " + a.shape_str() + " vs " +
                                    b.shape_str());
}

// -- elementwise --------------------------------------------------------------

NodeId Tape::add(NodeId a, NodeId b) {
    check_same(value(a), value(b), "add");
    Tensor out(value(a).shape, value(a).data + value(b).data);
    return push(std::move(out), [a, b](Tape& t, Node& n) {
        t.grad_buf(a).data += n.grad.data;
        t.grad_buf(b).data += n.grad.data;
    });
}

NodeId Tape::sub(NodeId a, NodeId b) {
    check_same(value(a), value(b), "sub");
    Tensor out(value(a).shape, value(a).data - value(b).data);
    return push(std::move(out), [a, b](Tape& t, Node& n) {
        t.grad_buf(a).data += n.grad.data;
        t.grad_buf(b).data -= n.grad.data;
    });
}

NodeId Tape::mul(NodeId a, NodeId b) {
    check_same(value(a), value(b), "mul");
    Tensor out(value(a).shape, value(a).data * value(b).data);
    return push(std::move(out), [a, b](Tape& t, Node& n) {
        t.grad_buf(a).data += n.grad.data * t.value(b).data;
        t.grad_buf(b).data += n.grad.data * t.value(a).data;
    });
}

NodeId Tape::div(NodeId a, NodeId b) {
    check_same(value(a), value(b), "div");
    Tensor out(value(a).shape, value(a).data / value(b).data);
    return push(std::move(out), [a, b](Tape& t, Node& n) {
        const auto& vb = t.value(b).data;
        t.grad_buf(a).data += n.grad.data / vb;
        t.grad_buf(b).data -= n.grad.data * t.value(a).data / (vb * vb);
    });
}

NodeId Tape::neg(NodeId a) {
    Tensor out(value(a).shape, -value(a).data);
    return push(std::move(out), [a](Tape& t, Node& n) { t.grad_buf(a).data -= n.grad.data; });
}

NodeId Tape::scale(NodeId a, double k) {
    Tensor out(value(a).shape, value(a).data * k);
    return push(std::move(out), [a, k](Tape& t, Node& n) { t.grad_buf(a).data += k * n.grad.data; });
}

NodeId Tape::add_scalar(NodeId a, double k) {
    Tensor out(value(a).shape, value(a).data + k);
    return push(std::move(out), [a](Tape& t, Node& n) { t.grad_buf(a).data += n.grad.data; });
}

NodeId Tape::square(NodeId a) {
    Tensor out(value(a).shape, value(a).data.square());
    return push(std::move(out), [a](Tape& t, Node& n) {
        t.grad_buf(a).data += 2.0 * n.grad.data * t.value(a).data;
    });
}

NodeId Tape::log(NodeId a) {
    Tensor out(value(a).shape, value(a).data.log());
    return push(std::move(out), [a](Tape& t, Node& n) {
        t.grad_buf(a).data += n.grad.data / t.value(a).data;
    });
}

NodeId Tape::exp(NodeId a) {
    Tensor out(value(a).shape, value(a).data.exp());
    return push(std::move(out), [a](Tape& t, Node& n) {
        t.grad_buf(a).data += n.grad.data * n.value.data;
    });
}

NodeId Tape::abs(NodeId a) {
    kink_margin_ = std::min(kink_margin_, value(a).data.abs().minCoeff());
    Tensor out(value(a).shape, value(a).data.abs());
    return push(std::move(out), [a](Tape& t, Node& n) {
        t.grad_buf(a).data += n.grad.data * t.value(a).data.sign();
    });
}

NodeId Tape::sigmoid(NodeId a) {
    Tensor out(value(a).shape, 1.0 / (1.0 + (-value(a).data).exp()));
    return push(std::move(out), [a](Tape& t, Node& n) {
        t.grad_buf(a).data += n.grad.data * n.value.data * (1.0 - n.value.data);
    });
}

NodeId Tape::softplus(NodeId a) {
    // stable: max(x,0) + log1p(exp(-|x|))
    const auto& x = value(a).data;
    Eigen::ArrayXd y = x.max(0.0) + (1.0 + (-x.abs()).exp()).log();
    return push(Tensor(value(a).shape, std::move(y)), [a](Tape& t, Node& n) {
        t.grad_buf(a).data += n.grad.data / (1.0 + (-t.value(a).data).exp());
    });
}

NodeId Tape::leaky_relu(NodeId a, double slope) {
    kink_margin_ = std::min(kink_margin_, value(a).data.abs().minCoeff());
    const auto& x = value(a).data;
    Eigen::ArrayXd y = (x >= 0.0).select(x, slope * x);
    return push(Tensor(value(a).shape, std::move(y)), [a, slope](Tape& t, Node& n) {
        const auto& x2 = t.value(a).data;
        t.grad_buf(a).data += n.grad.data * (x2 >= 0.0).select(
            Eigen::ArrayXd::Ones(x2.size()), Eigen::ArrayXd::Constant(x2.size(), slope));
    });
}

NodeId Tape::normal_cdf(NodeId a) {
    const auto& x = value(a).data;
    Eigen::ArrayXd y(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) y[i] = advforge::normal_cdf(x[i]);
    return push(Tensor(value(a).shape, std::move(y)), [a](Tape& t, Node& n) {
        const auto& x2 = t.value(a).data;
        Eigen::ArrayXd pdf(x2.size());
        for (Eigen::Index i = 0; i < x2.size(); ++i) pdf[i] = normal_pdf(x2[i]);
        t.grad_buf(a).data += n.grad.data * pdf;
    });
}

// -- reductions / layout ------------------------------------------------------

NodeId Tape::sum(NodeId a) {
    Tensor out = Tensor::scalar(value(a).data.sum());
    return push(std::move(out), [a](Tape& t, Node& n) { t.grad_buf(a).data += n.grad.data[0]; });
}

NodeId Tape::mean(NodeId a) {
    const double inv = 1.0 / static_cast<double>(value(a).numel());
    Tensor out = Tensor::scalar(value(a).data.mean());
    return push(std::move(out), [a, inv](Tape& t, Node& n) {
        t.grad_buf(a).data += n.grad.data[0] * inv;
    });
}

NodeId Tape::pick(NodeId a, int index) {
    const Tensor& v = value(a);
    if (v.ndim() != 1) throw std::invalid_argument("pick: expected 1-d tensor, got " + v.shape_str());
    if (index < 0 || index >= v.shape[0])
        throw std::invalid_argument("pick: index " + std::to_string(index) + " out of range " +
                                    v.shape_str());
    Tensor out = Tensor::scalar(v.data[index]);
    return push(std::move(out), [a, index](Tape& t, Node& n) {
        t.grad_buf(a).data[index] += n.grad.data[0];
    });
}

NodeId Tape::stack(const std::vector<NodeId>& scalars) {
    if (scalars.empty()) throw std::invalid_argument("stack: empty input");
    Tensor out({static_cast<int>(scalars.size())});
    for (std::size_t i = 0; i < scalars.size(); ++i) {
        if (value(scalars[i]).numel() != 1) throw std::invalid_argument("stack: inputs must be scalars");
        out.data[static_cast<Eigen::Index>(i)] = value(scalars[i]).data[0];
    }
    auto ids = scalars;
    return push(std::move(out), [ids](Tape& t, Node& n) {
        for (std::size_t i = 0; i < ids.size(); ++i)
            t.grad_buf(ids[i]).data[0] += n.grad.data[static_cast<Eigen::Index>(i)];
    });
}

NodeId Tape::logsumexp(NodeId a) {
    const Tensor& v = value(a);
    if (v.ndim() != 1) throw std::invalid_argument("logsumexp: expected 1-d tensor");
    const double m = v.data.maxCoeff();
    const double lse = m + std::log((v.data - m).exp().sum());
    return push(Tensor::scalar(lse), [a, lse](Tape& t, Node& n) {
        t.grad_buf(a).data += n.grad.data[0] * (t.value(a).data - lse).exp();
    });
}

NodeId Tape::softmax(NodeId a) {
    const Tensor& v = value(a);
    if (v.ndim() == 1) {
        const double m = v.data.maxCoeff();
        Eigen::ArrayXd e = (v.data - m).exp();
        e /= e.sum();
        return push(Tensor(v.shape, std::move(e)), [a](Tape& t, Node& n) {
            const auto& y = n.value.data;
            const double dot = (n.grad.data * y).sum();
            t.grad_buf(a).data += y * (n.grad.data - dot);
        });
    }
    if (v.ndim() == 2) {
        const int r = v.shape[0], c = v.shape[1];
        Tensor out(v.shape);
        for (int i = 0; i < r; ++i) {
            double m = -std::numeric_limits<double>::infinity();
            for (int j = 0; j < c; ++j) m = std::max(m, v.at2(i, j));
            double s = 0;
            for (int j = 0; j < c; ++j) s += std::exp(v.at2(i, j) - m);
            for (int j = 0; j < c; ++j) out.at2(i, j) = std::exp(v.at2(i, j) - m) / s;
        }
        return push(std::move(out), [a, r, c](Tape& t, Node& n) {
            Tensor& ga = t.grad_buf(a);
            for (int i = 0; i < r; ++i) {
                double dot = 0;
                for (int j = 0; j < c; ++j) dot += n.grad.at2(i, j) * n.value.at2(i, j);
                for (int j = 0; j < c; ++j)
                    ga.at2(i, j) += n.value.at2(i, j) * (n.grad.at2(i, j) - dot);
            }
        });
    }
    throw std::invalid_argument("softmax: expected 1-d or 2-d tensor, got " + v.shape_str());
}

NodeId Tape::log_softmax(NodeId a) {
    const Tensor& v = value(a);
    if (v.ndim() != 1) throw std::invalid_argument("log_softmax: expected 1-d tensor");
    const double m = v.data.maxCoeff();
    const double lse = m + std::log((v.data - m).exp().sum());
    Tensor out(v.shape, v.data - lse);
    return push(std::move(out), [a](Tape& t, Node& n) {
        // scalar exp: Eigen's vectorized exp clamps instead of underflowing to
        // zero, which would leak denormal gradients through saturated heads
        Eigen::ArrayXd p(n.value.data.size());
        for (Eigen::Index i = 0; i < p.size(); ++i) p[i] = std::exp(n.value.data[i]);
        const double s = n.grad.data.sum();
        t.grad_buf(a).data += n.grad.data - p * s;
    });
}

NodeId Tape::l2_normalize(NodeId a) {
    const Tensor& v = value(a);
    if (v.ndim() != 1) throw std::invalid_argument("l2_normalize: expected 1-d tensor");
    const double norm = std::sqrt(v.data.square().sum());
    if (norm < 1e-12) throw std::runtime_error("l2_normalize: zero-norm vector");
    Tensor out(v.shape, v.data / norm);
    return push(std::move(out), [a, norm](Tape& t, Node& n) {
        const auto& y = n.value.data;
        const double dot = (n.grad.data * y).sum();
        t.grad_buf(a).data += (n.grad.data - y * dot) / norm;
    });
}

NodeId Tape::l2_normalize_rows(NodeId a) {
    const Tensor& v = value(a);
    if (v.ndim() != 2) throw std::invalid_argument("l2_normalize_rows: expected 2-d tensor");
    const int r = v.shape[0], c = v.shape[1];
    Tensor out(v.shape);
    std::vector<double> norms(static_cast<std::size_t>(r));
    for (int i = 0; i < r; ++i) {
        double s = 0;
        for (int j = 0; j < c; ++j) s += v.at2(i, j) * v.at2(i, j);
        const double norm = std::sqrt(s);
        if (norm < 1e-12) throw std::runtime_error("l2_normalize_rows: zero-norm row " + std::to_string(i));
        norms[static_cast<std::size_t>(i)] = norm;
        for (int j = 0; j < c; ++j) out.at2(i, j) = v.at2(i, j) / norm;
    }
    return push(std::move(out), [a, r, c, norms](Tape& t, Node& n) {
        Tensor& ga = t.grad_buf(a);
        for (int i = 0; i < r; ++i) {
            double dot = 0;
            for (int j = 0; j < c; ++j) dot += n.grad.at2(i, j) * n.value.at2(i, j);
            for (int j = 0; j < c; ++j)
                ga.at2(i, j) += (n.grad.at2(i, j) - n.value.at2(i, j) * dot) /
                                norms[static_cast<std::size_t>(i)];
        }
    });
}

// -- nn building blocks --------------------------------------------------------

NodeId Tape::conv2d(NodeId x, NodeId w, NodeId b, int stride, int pad) {
    const Tensor& vx = value(x);
    const Tensor& vw = value(w);
    const Tensor& vb = value(b);
    if (vx.ndim() != 3 || vw.ndim() != 4)
        throw std::invalid_argument("conv2d: expected input [C,H,W] and weight [O,C,kh,kw], got " +
                                    vx.shape_str() + " and " + vw.shape_str());
    if (vw.shape[1] != vx.shape[0])
        throw std::invalid_argument("conv2d: input channels " + std::to_string(vx.shape[0]) +
                                    " != weight channels " + std::to_string(vw.shape[1]) +
                                    " (input " + vx.shape_str() + ", weight " + vw.shape_str() + ")");
    if (vw.shape[2] != vw.shape[3]) throw std::invalid_argument("conv2d: expected square kernel");
    if (stride < 1) throw std::invalid_argument("conv2d: stride must be >= 1");
    if (pad < 0) throw std::invalid_argument("conv2d: pad must be >= 0");
    if (vb.ndim() != 1 || vb.shape[0] != vw.shape[0])
        throw std::invalid_argument("conv2d: bias " + vb.shape_str() + " does not match out channels " +
                                    std::to_string(vw.shape[0]));
    const int C = vx.shape[0], H = vx.shape[1], W = vx.shape[2];
    const int O = vw.shape[0], K = vw.shape[2];
    if (H + 2 * pad < K || W + 2 * pad < K)
        throw std::invalid_argument("conv2d: kernel " + std::to_string(K) + " larger than padded input " +
                                    vx.shape_str());
    const int Ho = (H + 2 * pad - K) / stride + 1;
    const int Wo = (W + 2 * pad - K) / stride + 1;
    const int ckk = C * K * K;

    auto col = std::make_shared<Mat>(ckk, Ho * Wo);
    for (int oy = 0; oy < Ho; ++oy)
        for (int ox = 0; ox < Wo; ++ox) {
            const int oc = oy * Wo + ox;
            int r = 0;
            for (int c = 0; c < C; ++c)
                for (int ky = 0; ky < K; ++ky)
                    for (int kx = 0; kx < K; ++kx, ++r) {
                        const int iy = oy * stride + ky - pad;
                        const int ix = ox * stride + kx - pad;
                        (*col)(r, oc) =
                            (iy >= 0 && iy < H && ix >= 0 && ix < W) ? vx.at3(c, iy, ix) : 0.0;
                    }
        }

    Eigen::Map<const RowMat> Mw(vw.data.data(), O, ckk);
    Eigen::Map<const Vec> bvec(vb.data.data(), O);
    Tensor out({O, Ho, Wo});
    Eigen::Map<RowMat> Mo(out.data.data(), O, Ho * Wo);
    Mo.noalias() = Mw * (*col);
    Mo.colwise() += bvec;

    return push(std::move(out), [x, w, b, col, stride, pad, C, H, W, O, K, Ho, Wo, ckk](Tape& t, Node& n) {
        Eigen::Map<const RowMat> Mdout(n.grad.data.data(), O, Ho * Wo);
        // bias
        Tensor& gb = t.grad_buf(b);
        Eigen::Map<Vec> gbv(gb.data.data(), O);
        gbv += Mdout.rowwise().sum();
        // weights
        Tensor& gw = t.grad_buf(w);
        Eigen::Map<RowMat> Mgw(gw.data.data(), O, ckk);
        Mgw.noalias() += Mdout * col->transpose();
        // input via col2im
        Tensor& gx = t.grad_buf(x);
        Mat dcol(ckk, Ho * Wo);
        Eigen::Map<const RowMat> Mw2(t.value(w).data.data(), O, ckk);
        dcol.noalias() = Mw2.transpose() * Mdout;
        for (int oy = 0; oy < Ho; ++oy)
            for (int ox = 0; ox < Wo; ++ox) {
                const int oc = oy * Wo + ox;
                int r = 0;
                for (int c = 0; c < C; ++c)
                    for (int ky = 0; ky < K; ++ky)
                        for (int kx = 0; kx < K; ++kx, ++r) {
                            const int iy = oy * stride + ky - pad;
                            const int ix = ox * stride + kx - pad;
                            if (iy >= 0 && iy < H && ix >= 0 && ix < W)
                                gx.at3(c, iy, ix) += dcol(r, oc);
                        }
            }
    });
}

NodeId Tape::dense(NodeId x, NodeId w, NodeId b) {
    const Tensor& vx = value(x);
    const Tensor& vw = value(w);
    const Tensor& vb = value(b);
    if (vx.ndim() != 1 || vw.ndim() != 2 || vw.shape[1] != vx.shape[0])
        throw std::invalid_argument("dense: weight " + vw.shape_str() + " incompatible with input " +
                                    vx.shape_str());
    if (vb.ndim() != 1 || vb.shape[0] != vw.shape[0])
        throw std::invalid_argument("dense: bias " + vb.shape_str() + " incompatible with weight " +
                                    vw.shape_str());
    const int out_dim = vw.shape[0], in_dim = vw.shape[1];
    Eigen::Map<const RowMat> Mw(vw.data.data(), out_dim, in_dim);
    Eigen::Map<const Vec> xv(vx.data.data(), in_dim);
    Eigen::Map<const Vec> bv(vb.data.data(), out_dim);
    Tensor out({out_dim});
    Eigen::Map<Vec> ov(out.data.data(), out_dim);
    ov.noalias() = Mw * xv + bv;
    return push(std::move(out), [x, w, b, out_dim, in_dim](Tape& t, Node& n) {
        Eigen::Map<const Vec> dy(n.grad.data.data(), out_dim);
        Eigen::Map<const Vec> xv2(t.value(x).data.data(), in_dim);
        Eigen::Map<const RowMat> Mw2(t.value(w).data.data(), out_dim, in_dim);
        Eigen::Map<RowMat> gw(t.grad_buf(w).data.data(), out_dim, in_dim);
        gw.noalias() += dy * xv2.transpose();
        Eigen::Map<Vec> gb(t.grad_buf(b).data.data(), out_dim);
        gb += dy;
        Eigen::Map<Vec> gx(t.grad_buf(x).data.data(), in_dim);
        gx.noalias() += Mw2.transpose() * dy;
    });
}

NodeId Tape::matvec(NodeId w, NodeId x) {
    const Tensor& vx = value(x);
    const Tensor& vw = value(w);
    if (vx.ndim() != 1 || vw.ndim() != 2 || vw.shape[1] != vx.shape[0])
        throw std::invalid_argument("matvec: weight " + vw.shape_str() + " incompatible with input " +
                                    vx.shape_str());
    const int out_dim = vw.shape[0], in_dim = vw.shape[1];
    Eigen::Map<const RowMat> Mw(vw.data.data(), out_dim, in_dim);
    Eigen::Map<const Vec> xv(vx.data.data(), in_dim);
    Tensor out({out_dim});
    Eigen::Map<Vec> ov(out.data.data(), out_dim);
    ov.noalias() = Mw * xv;
    return push(std::move(out), [x, w, out_dim, in_dim](Tape& t, Node& n) {
        Eigen::Map<const Vec> dy(n.grad.data.data(), out_dim);
        Eigen::Map<const Vec> xv2(t.value(x).data.data(), in_dim);
        Eigen::Map<const RowMat> Mw2(t.value(w).data.data(), out_dim, in_dim);
        Eigen::Map<RowMat> gw(t.grad_buf(w).data.data(), out_dim, in_dim);
        gw.noalias() += dy * xv2.transpose();
        Eigen::Map<Vec> gx(t.grad_buf(x).data.data(), in_dim);
        gx.noalias() += Mw2.transpose() * dy;
    });
}

NodeId Tape::global_avg_pool(NodeId x) {
    const Tensor& vx = value(x);
    if (vx.ndim() != 3) throw std::invalid_argument("global_avg_pool: expected [C,H,W]");
    const int C = vx.shape[0], H = vx.shape[1], W = vx.shape[2];
    const double inv = 1.0 / static_cast<double>(H * W);
    Tensor out({C});
    for (int c = 0; c < C; ++c) {
        double s = 0;
        for (int y = 0; y < H; ++y)
            for (int xx = 0; xx < W; ++xx) s += vx.at3(c, y, xx);
        out.data[c] = s * inv;
    }
    return push(std::move(out), [x, C, H, W, inv](Tape& t, Node& n) {
        Tensor& gx = t.grad_buf(x);
        for (int c = 0; c < C; ++c) {
            const double g = n.grad.data[c] * inv;
            for (int y = 0; y < H; ++y)
                for (int xx = 0; xx < W; ++xx) gx.at3(c, y, xx) += g;
        }
    });
}

NodeId Tape::global_max_pool(NodeId x) {
    const Tensor& vx = value(x);
    if (vx.ndim() != 3) throw std::invalid_argument("global_max_pool: expected [C,H,W]");
    const int C = vx.shape[0], H = vx.shape[1], W = vx.shape[2];
    Tensor out({C});
    auto argmax = std::make_shared<std::vector<int>>(static_cast<std::size_t>(C));
    for (int c = 0; c < C; ++c) {
        double best = -std::numeric_limits<double>::infinity();
        int best_i = 0;
        for (int i = 0; i < H * W; ++i) {
            const double v = vx.data[c * H * W + i];
            if (v > best) {
                best = v;
                best_i = i;
            }
        }
        out.data[c] = best;
        (*argmax)[static_cast<std::size_t>(c)] = best_i;
    }
    return push(std::move(out), [x, C, H, W, argmax](Tape& t, Node& n) {
        Tensor& gx = t.grad_buf(x);
        for (int c = 0; c < C; ++c)
            gx.data[c * H * W + (*argmax)[static_cast<std::size_t>(c)]] += n.grad.data[c];
    });
}

NodeId Tape::concat(NodeId a, NodeId b) {
    const Tensor& va = value(a);
    const Tensor& vb = value(b);
    if (va.ndim() != 1 || vb.ndim() != 1)
        throw std::invalid_argument("concat: expected 1-d tensors");
    const int na = va.shape[0], nb = vb.shape[0];
    Tensor out({na + nb});
    out.data.head(na) = va.data;
    out.data.tail(nb) = vb.data;
    return push(std::move(out), [a, b, na, nb](Tape& t, Node& n) {
        t.grad_buf(a).data += n.grad.data.head(na);
        t.grad_buf(b).data += n.grad.data.tail(nb);
    });
}

// -- backward ------------------------------------------------------------------

void Tape::backward(NodeId loss) {
    if (nodes_.empty()) throw std::runtime_error("Tape::backward: no forward pass recorded");
    Node& ln = node(loss);
    if (ln.value.numel() != 1)
        throw std::invalid_argument("Tape::backward: loss must be scalar, got " + ln.value.shape_str());
    grad_buf(loss).data[0] = 1.0;
    for (NodeId id = loss; id >= 0; --id) {
        Node& n = nodes_[static_cast<std::size_t>(id)];
        if (n.grad.numel() == 0) continue;  // not reachable from the loss
        if (n.back) n.back(*this, n);
        if (n.store != nullptr) n.store->grad_or_alloc(n.param_name).data += n.grad.data;
    }
}

void Tape::backward(NodeId loss, ParamStore& params) {
    params.zero_grads();
    backward(loss);
}

}  // namespace advforge::nn
