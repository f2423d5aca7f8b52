#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "fog/nn/param.hpp"

namespace fog {

struct GradCheckReport {
    double max_rel_err = 0.0;
    std::size_t checked = 0;
    std::string worst_param;

    bool passed(double tolerance) const { return checked > 0 && max_rel_err < tolerance; }
};

// Central-difference comparison of analytic gradients. loss_fn must rerun
// the full forward pass and return the loss; it is invoked with perturbed
// parameter values, so any internal randomness must be re-seeded identically
// on every call. grads must already hold the analytic result for the
// unperturbed parameters. coords selects which flat indices of each tensor
// to probe (empty = every coordinate). Relative error uses
// |fd - g| / max(|fd|, |g|, 1e-6) so near-zero gradients do not divide by
// finite-difference noise.
template <typename T>
inline GradCheckReport gradient_check(const std::vector<ParamTensor<T>*>& params,
                                      const std::function<double()>& loss_fn,
                                      const std::vector<std::vector<std::size_t>>& coords = {},
                                      double h = 1e-5) {
    static_assert(sizeof(T) >= sizeof(double),
                  "finite differences need double precision parameters");
    GradCheckReport report;
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        auto* p = params[pi];
        std::vector<std::size_t> all;
        const std::vector<std::size_t>* idx = nullptr;
        if (pi < coords.size() && !coords[pi].empty()) {
            idx = &coords[pi];
        } else {
            all.resize(p->value.size());
            for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
            idx = &all;
        }
        for (std::size_t i : *idx) {
            T saved = p->value.v[i];
            p->value.v[i] = saved + static_cast<T>(h);
            double up = loss_fn();
            p->value.v[i] = saved - static_cast<T>(h);
            double down = loss_fn();
            p->value.v[i] = saved;
            double fd = (up - down) / (2.0 * h);
            double g = static_cast<double>(p->grad.v[i]);
            double scale = std::max({std::abs(fd), std::abs(g), 1e-6});
            double rel = std::abs(fd - g) / scale;
            if (rel > report.max_rel_err) {
                report.max_rel_err = rel;
                report.worst_param = p->name + "[" + std::to_string(i) + "]";
            }
            ++report.checked;
        }
    }
    return report;
}

}  // namespace fog
