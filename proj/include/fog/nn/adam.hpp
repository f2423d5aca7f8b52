#pragma once

#include <cmath>
#include <vector>

#include "fog/error.hpp"
#include "fog/nn/param.hpp"

namespace fog {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-7;  // added outside the square root
};

// One bias-corrected Adam update over all parameters. t counts update steps
// and must start at 1 for the bias correction to be meaningful.
template <typename T>
inline void adam_step(const std::vector<ParamTensor<T>*>& params, const AdamConfig& cfg,
                      long long t) {
    if (t < 1) throw BadConfig("adam step index must be >= 1, got " + std::to_string(t));
    double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
    double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
    for (auto* p : params) {
        for (std::size_t i = 0; i < p->value.size(); ++i) {
            double g = static_cast<double>(p->grad.v[i]);
            double m = cfg.beta1 * p->m.v[i] + (1.0 - cfg.beta1) * g;
            double v = cfg.beta2 * p->v.v[i] + (1.0 - cfg.beta2) * g * g;
            p->m.v[i] = static_cast<T>(m);
            p->v.v[i] = static_cast<T>(v);
            double update = cfg.lr * (m / bc1) / (std::sqrt(v / bc2) + cfg.eps);
            p->value.v[i] = static_cast<T>(p->value.v[i] - update);
        }
    }
}

}  // namespace fog
