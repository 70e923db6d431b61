#include "advforge/param_store.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace advforge::nn {

static constexpr const char* kCheckpointMagic = "ADVFORGE-CKPT";
static constexpr int kCheckpointVersion = 1;

ParamStore::Entry& ParamStore::entry(const std::string& name) {
    auto it = entries_.find(name);
    if (it == entries_.end()) throw std::invalid_argument("ParamStore: no parameter '" + name + "'");
    return it->second;
}

const ParamStore::Entry& ParamStore::entry(const std::string& name) const {
    auto it = entries_.find(name);
    if (it == entries_.end()) throw std::invalid_argument("ParamStore: no parameter '" + name + "'");
    return it->second;
}

Tensor& ParamStore::create(const std::string& name, Tensor init) {
    if (contains(name)) throw std::invalid_argument("ParamStore: duplicate parameter '" + name + "'");
    auto& e = entries_[name];
    e.value = std::move(init);
    return e.value;
}

Tensor& ParamStore::value(const std::string& name) { return entry(name).value; }
const Tensor& ParamStore::value(const std::string& name) const { return entry(name).value; }

bool ParamStore::has_grad(const std::string& name) const { return entry(name).grad.numel() > 0; }

Tensor& ParamStore::grad(const std::string& name) {
    auto& e = entry(name);
    if (e.grad.numel() == 0)
        throw std::runtime_error("ParamStore: missing gradient for '" + name + "'");
    return e.grad;
}

const Tensor& ParamStore::grad(const std::string& name) const {
    const auto& e = entry(name);
    if (e.grad.numel() == 0)
        throw std::runtime_error("ParamStore: missing gradient for '" + name + "'");
    return e.grad;
}

Tensor& ParamStore::grad_or_alloc(const std::string& name) {
    auto& e = entry(name);
    if (e.grad.numel() == 0) e.grad = Tensor::zeros(e.value.shape);
    return e.grad;
}

void ParamStore::zero_grads() {
    for (auto& [name, e] : entries_) {
        if (e.grad.numel() == 0) e.grad = Tensor::zeros(e.value.shape);
        else e.grad.data.setZero();
    }
}

std::vector<std::string> ParamStore::names() const {
    std::vector<std::string> out;
    out.reserve(entries_.size());
    for (const auto& [name, e] : entries_) out.push_back(name);
    return out;
}

Eigen::Index ParamStore::total_params() const {
    Eigen::Index n = 0;
    for (const auto& [name, e] : entries_) n += e.value.numel();
    return n;
}

void ParamStore::save(const std::string& path) const {
    nlohmann::json j;
    j["magic"] = kCheckpointMagic;
    j["version"] = kCheckpointVersion;
    nlohmann::json params = nlohmann::json::object();
    for (const auto& [name, e] : entries_) {
        nlohmann::json p;
        p["shape"] = e.value.shape;
        std::vector<double> vals(e.value.data.data(), e.value.data.data() + e.value.numel());
        p["data"] = vals;
        params[name] = std::move(p);
    }
    j["params"] = std::move(params);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("ParamStore::save: cannot open '" + path + "'");
    f << j.dump() << "\n";
}

ParamStore ParamStore::load(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("ParamStore::load: cannot open '" + path + "'");
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("ParamStore::load: '" + path + "' is not valid JSON: " + e.what());
    }
    if (!j.contains("magic") || j["magic"] != kCheckpointMagic)
        throw std::runtime_error("ParamStore::load: '" + path + "' lacks checkpoint magic header");
    if (!j.contains("version") || j["version"].get<int>() != kCheckpointVersion)
        throw std::runtime_error("ParamStore::load: unsupported checkpoint version in '" + path + "'");
    ParamStore store;
    for (auto& [name, p] : j.at("params").items()) {
        std::vector<int> shape = p.at("shape").get<std::vector<int>>();
        std::vector<double> vals = p.at("data").get<std::vector<double>>();
        Tensor t(shape);
        if (static_cast<Eigen::Index>(vals.size()) != t.numel())
            throw std::runtime_error("ParamStore::load: data/shape mismatch for '" + name + "'");
        for (Eigen::Index i = 0; i < t.numel(); ++i) t.data[i] = vals[static_cast<std::size_t>(i)];
        store.create(name, std::move(t));
    }
    return store;
}

}  // namespace advforge::nn
