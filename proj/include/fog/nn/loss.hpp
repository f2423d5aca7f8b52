#pragma once

#include <cmath>
#include <vector>

#include "fog/error.hpp"
#include "fog/nn/param.hpp"
#include "fog/tensor.hpp"

namespace fog {

template <typename T>
struct LossResult {
    double loss = 0.0;
    Tensor<T> dlogits;
};

// Mean cross-entropy of softmax(logits) against one-hot targets, plus
// lambda * sum of squared weights over the l2-flagged parameters. Stabilized
// by row-max subtraction; dlogits = (softmax - onehot) / batch. The matching
// parameter-gradient term is applied separately by add_l2_gradients.
template <typename T>
inline LossResult<T> softmax_xent_loss(const Tensor<T>& logits, const Tensor<T>& onehot,
                                       const std::vector<ParamTensor<T>*>& params,
                                       double lambda) {
    require_same_shape(logits, onehot, "softmax_xent_loss");
    if (logits.rank != 2 || logits.n() < 1) {
        throw ShapeMismatch("softmax_xent_loss needs a non-empty rank-2 batch");
    }
    int n = logits.n(), c = logits.c();
    LossResult<T> res;
    res.dlogits = logits;
    double ce = 0.0;
    for (int r = 0; r < n; ++r) {
        double hi = static_cast<double>(logits.at(r, 0));
        for (int j = 1; j < c; ++j) hi = std::max(hi, static_cast<double>(logits.at(r, j)));
        double denom = 0.0;
        for (int j = 0; j < c; ++j) denom += std::exp(static_cast<double>(logits.at(r, j)) - hi);
        double log_denom = std::log(denom);
        for (int j = 0; j < c; ++j) {
            double logp = static_cast<double>(logits.at(r, j)) - hi - log_denom;
            double p = std::exp(logp);
            double target = static_cast<double>(onehot.at(r, j));
            ce -= target * logp;
            res.dlogits.at(r, j) = static_cast<T>((p - target) / n);
        }
    }
    double penalty = 0.0;
    for (const auto* p : params) {
        if (!p->l2) continue;
        for (T w : p->value.v) penalty += static_cast<double>(w) * static_cast<double>(w);
    }
    res.loss = ce / n + lambda * penalty;
    return res;
}

// d(lambda * ||w||^2)/dw = 2 lambda w, added onto the l2-flagged gradients.
// Call exactly once per backward pass, after the data gradients exist.
template <typename T>
inline void add_l2_gradients(const std::vector<ParamTensor<T>*>& params, double lambda) {
    if (lambda == 0.0) return;
    for (auto* p : params) {
        if (!p->l2) continue;
        for (std::size_t i = 0; i < p->value.size(); ++i) {
            p->grad.v[i] += static_cast<T>(2.0 * lambda) * p->value.v[i];
        }
    }
}

}  // namespace fog
