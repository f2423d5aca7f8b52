#pragma once

#include <string>
#include <utility>
#include <vector>

#include "fog/tensor.hpp"

namespace fog {

// A trainable tensor with its gradient and Adam moment estimates. grad, m,
// and v always share value's shape; m and v start at zero. l2 marks the
// parameters the weight-decay penalty applies to.
template <typename T>
struct ParamTensor {
    std::string name;
    Tensor<T> value;
    Tensor<T> grad;
    Tensor<T> m;
    Tensor<T> v;
    bool l2 = false;

    ParamTensor() = default;
    ParamTensor(std::string param_name, Tensor<T> initial, bool l2_penalty = false)
        : name(std::move(param_name)), value(std::move(initial)), l2(l2_penalty) {
        grad = value;
        std::fill(grad.v.begin(), grad.v.end(), T(0));
        m = grad;
        v = grad;
    }

    void zero_grad() { std::fill(grad.v.begin(), grad.v.end(), T(0)); }

    // Fresh optimizer state, as at construction.
    void reset_moments() {
        std::fill(m.v.begin(), m.v.end(), T(0));
        std::fill(v.v.begin(), v.v.end(), T(0));
    }
};

// Non-trainable named state (batchnorm running statistics): serialized and
// averaged alongside parameters but never touched by the optimizer.
template <typename T>
struct BufferRef {
    std::string name;
    Tensor<T>* tensor = nullptr;
};

}  // namespace fog
