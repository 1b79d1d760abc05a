#include "pfrost/optim.hpp"

#include <cmath>

#include "pfrost/error.hpp"

namespace pfrost {

void Adam::step(ParameterRegistry& reg) {
    // State must describe exactly a subset of the current trainable set.
    for (const auto& [name, moments] : state_) {
        if (!reg.contains(name) || !reg.at(name).trainable) {
            throw OptimError("optimizer state exists for non-trainable parameter '" + name +
                             "'; discard moments when freezing");
        }
    }
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (Parameter& p : reg.params()) {
        if (!p.trainable || !p.materialized()) continue;
        auto& st = state_[p.name];
        const size_t n = p.numel();
        if (st.m.empty()) {
            st.m.assign(n, 0.0);
            st.v.assign(n, 0.0);
        } else if (st.m.size() != n) {
            throw OptimError("optimizer state size mismatch for '" + p.name + "'");
        }
        auto& data = p.tensor.data();
        const bool has_grad = p.tensor.has_grad();
        for (size_t i = 0; i < n; ++i) {
            const double g = has_grad ? p.tensor.grad()[i] : 0.0;
            st.m[i] = cfg_.beta1 * st.m[i] + (1.0 - cfg_.beta1) * g;
            st.v[i] = cfg_.beta2 * st.v[i] + (1.0 - cfg_.beta2) * g * g;
            const double mhat = st.m[i] / bc1;
            const double vhat = st.v[i] / bc2;
            data[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
        }
        if (has_grad) p.tensor.zero_grad();
    }
}

void Adam::drop(const std::vector<std::string>& names) {
    for (const std::string& n : names) state_.erase(n);
}

}  // namespace pfrost
