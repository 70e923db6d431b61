#pragma once

#include <map>
#include <string>
#include <vector>

#include "advforge/tensor.hpp"

namespace advforge::nn {

/// Named parameter/gradient pairs for one network. Gradients start out
/// unallocated ("missing") until zero_grads() or a backward pass touches the
/// store; the optimizer refuses to step on missing gradients.
class ParamStore {
public:
    struct Entry {
        Tensor value;
        Tensor grad;  // empty shape == missing
    };

    Tensor& create(const std::string& name, Tensor init);

    bool contains(const std::string& name) const { return entries_.count(name) != 0; }
    Tensor& value(const std::string& name);
    const Tensor& value(const std::string& name) const;

    bool has_grad(const std::string& name) const;
    Tensor& grad(const std::string& name);              // throws if missing
    Tensor& grad_or_alloc(const std::string& name);     // zero-allocates on demand
    const Tensor& grad(const std::string& name) const;  // throws if missing

    void zero_grads();

    std::vector<std::string> names() const;
    std::size_t size() const { return entries_.size(); }
    Eigen::Index total_params() const;

    /// Versioned JSON checkpoint (magic header, name -> shape + values).
    void save(const std::string& path) const;
    static ParamStore load(const std::string& path);

private:
    Entry& entry(const std::string& name);
    const Entry& entry(const std::string& name) const;
    std::map<std::string, Entry> entries_;
};

}  // namespace advforge::nn
