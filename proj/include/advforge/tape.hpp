#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "advforge/param_store.hpp"
#include "advforge/tensor.hpp"

namespace advforge::nn {

using NodeId = int;

/// Reverse-mode tape over a static per-step graph. Ops append nodes eagerly
/// (values computed on the spot); backward() walks the nodes in reverse
/// creation order, which is a topological order by construction. One tape per
/// forward pass; tapes on disjoint ParamStores are safe to use concurrently.
class Tape {
public:
    NodeId constant(Tensor value);
    NodeId param(ParamStore& store, const std::string& name);

    const Tensor& value(NodeId id) const;
    const Tensor& grad(NodeId id) const;  // valid after backward
    std::size_t size() const { return nodes_.size(); }

    /// Smallest |input| seen at a kink (leaky_relu/abs) during forward; tests
    /// use it to reject instances where finite differences would straddle the
    /// kink.
    double kink_margin() const { return kink_margin_; }

    // elementwise (shapes must match)
    NodeId add(NodeId a, NodeId b);
    NodeId sub(NodeId a, NodeId b);
    NodeId mul(NodeId a, NodeId b);
    NodeId div(NodeId a, NodeId b);
    NodeId neg(NodeId a);
    NodeId scale(NodeId a, double k);
    NodeId add_scalar(NodeId a, double k);
    NodeId square(NodeId a);
    NodeId log(NodeId a);
    NodeId exp(NodeId a);
    NodeId abs(NodeId a);
    NodeId sigmoid(NodeId a);
    NodeId softplus(NodeId a);
    NodeId leaky_relu(NodeId a, double slope);
    NodeId normal_cdf(NodeId a);

    // reductions / layout
    NodeId sum(NodeId a);
    NodeId mean(NodeId a);
    NodeId pick(NodeId a, int index);         // 1-d -> scalar
    NodeId stack(const std::vector<NodeId>& scalars);  // k scalars -> [k]
    NodeId logsumexp(NodeId a);               // 1-d -> scalar

    // nn building blocks
    NodeId conv2d(NodeId x, NodeId w, NodeId b, int stride, int pad);
    NodeId dense(NodeId x, NodeId w, NodeId b);  // w [out,in], x [in]
    NodeId matvec(NodeId w, NodeId x);           // no bias
    NodeId global_avg_pool(NodeId x);            // [C,H,W] -> [C]
    NodeId global_max_pool(NodeId x);            // [C,H,W] -> [C]
    NodeId concat(NodeId a, NodeId b);           // 1-d ++ 1-d
    NodeId softmax(NodeId a);                    // 1-d, or row-wise on 2-d
    NodeId log_softmax(NodeId a);                // 1-d
    NodeId l2_normalize(NodeId a);               // 1-d
    NodeId l2_normalize_rows(NodeId a);          // 2-d

    /// Seed d(loss)=1 and sweep; accumulates into the bound stores' gradients
    /// (allocating them on demand).
    void backward(NodeId loss);
    /// zero_grads() on `params` first, so unreachable parameters end up zero.
    void backward(NodeId loss, ParamStore& params);

private:
    struct Node {
        Tensor value;
        Tensor grad;  // empty until backward touches it
        std::function<void(Tape&, Node&)> back;
        ParamStore* store = nullptr;
        std::string param_name;
    };

    NodeId push(Tensor value, std::function<void(Tape&, Node&)> back);
    Node& node(NodeId id);
    const Node& node(NodeId id) const;
    Tensor& grad_buf(NodeId id);  // allocate-on-demand gradient accumulator

    std::vector<Node> nodes_;
    double kink_margin_ = std::numeric_limits<double>::infinity();
};

}  // namespace advforge::nn
