#pragma once

#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "svgen/core/mat.hpp"

namespace svgen {

// One named parameter with its gradient and Adam moments,
// all shape-identical to the value.
template <typename Real>
struct Param {
    std::string name;
    Mat<Real> value;
    Mat<Real> grad;
    Mat<Real> m1;
    Mat<Real> m2;

    Param(std::string n, Mat<Real> v)
        : name(std::move(n)),
          value(std::move(v)),
          grad(value.rows, value.cols),
          m1(value.rows, value.cols),
          m2(value.rows, value.cols) {}
};

// Ordered collection of parameters. Iteration follows insertion order,
// which keeps updates, norms and checkpoints deterministic.
template <typename Real>
class ParamStore {
public:
    Param<Real>& add(const std::string& name, Mat<Real> init) {
        if (index_.count(name)) throw data_error("ParamStore: duplicate parameter name " + name);
        items_.push_back(std::make_unique<Param<Real>>(name, std::move(init)));
        index_[name] = static_cast<int>(items_.size()) - 1;
        return *items_.back();
    }

    bool has(const std::string& name) const { return index_.count(name) != 0; }

    Param<Real>& get(const std::string& name) {
        auto it = index_.find(name);
        if (it == index_.end()) throw data_error("ParamStore: unknown parameter " + name);
        return *items_[it->second];
    }
    const Param<Real>& get(const std::string& name) const {
        auto it = index_.find(name);
        if (it == index_.end()) throw data_error("ParamStore: unknown parameter " + name);
        return *items_[it->second];
    }

    size_t size() const { return items_.size(); }
    Param<Real>& at(size_t i) { return *items_[i]; }
    const Param<Real>& at(size_t i) const { return *items_[i]; }

    void zero_grads() {
        for (auto& p : items_) p->grad.fill(Real(0));
    }

    size_t value_count() const {
        size_t n = 0;
        for (const auto& p : items_) n += p->value.size();
        return n;
    }

private:
    std::vector<std::unique_ptr<Param<Real>>> items_;
    std::unordered_map<std::string, int> index_;
};

} // namespace svgen
