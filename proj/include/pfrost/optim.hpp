#pragma once

#include <map>
#include <string>
#include <vector>

#include "pfrost/tag.hpp"

namespace pfrost {

struct AdamConfig {
    double lr = 3e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Adam with bias correction. Moment buffers exist only for trainable
// parameters; frozen parameters are never touched. Gradients are consumed
// (zeroed) by step().
class Adam {
public:
    explicit Adam(AdamConfig cfg) : cfg_(cfg) {}

    void step(ParameterRegistry& reg);

    // Discards moment buffers, e.g. when a freeze schedule flips parameters
    // to untrainable mid-run.
    void drop(const std::vector<std::string>& names);

    bool has_state(const std::string& name) const { return state_.count(name) != 0; }
    long long steps() const { return t_; }

private:
    struct Moments {
        std::vector<double> m, v;
    };
    AdamConfig cfg_;
    std::map<std::string, Moments> state_;
    long long t_ = 0;
};

}  // namespace pfrost
