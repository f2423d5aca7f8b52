#pragma once

#include <algorithm>
#include <cmath>
#include <cstring>
#include <memory>
#include <string>
#include <vector>

#include "fog/error.hpp"
#include "fog/nn/gemm.hpp"
#include "fog/nn/param.hpp"
#include "fog/rng.hpp"
#include "fog/tensor.hpp"

namespace fog {

// One network stage. forward caches whatever backward needs, so calls must
// alternate forward/backward on the same instance; rng is only consulted by
// stochastic layers in train mode.
template <typename T>
struct Layer {
    virtual ~Layer() = default;
    virtual Tensor<T> forward(const Tensor<T>& x, bool train, Rng* rng) = 0;
    virtual Tensor<T> backward(const Tensor<T>& dy) = 0;
    virtual void collect_params(std::vector<ParamTensor<T>*>& out) { (void)out; }
    virtual void collect_buffers(std::vector<BufferRef<T>>& out) { (void)out; }
};

// 3x3 convolution, stride 1, zero padding, NHWC. Weights are stored as a
// (9*in_c, filters) matrix whose row index runs over (kh, kw, ic) so that an
// im2col patch row multiplies it directly.
template <typename T>
class Conv2D : public Layer<T> {
  public:
    Conv2D(const std::string& name, int in_channels, int filters, bool l2_penalty = false)
        : in_c_(in_channels),
          filters_(filters),
          w_(name + "/w", Tensor<T>::zeros4(3, 3, in_channels, filters), l2_penalty),
          b_(name + "/b", Tensor<T>::zeros1(filters)) {}

    ParamTensor<T>& weights() { return w_; }
    ParamTensor<T>& bias() { return b_; }

    Tensor<T> forward(const Tensor<T>& x, bool, Rng*) override {
        if (x.rank != 4 || x.c() != in_c_) {
            throw ShapeMismatch(w_.name + ": expected rank-4 input with " +
                                std::to_string(in_c_) + " channels, got " +
                                shape_string(x.dims, x.rank));
        }
        x_ = x;
        int n = x.n(), h = x.h(), w = x.w();
        auto out = Tensor<T>::zeros4(n, h, w, filters_);
        std::vector<T> patches(static_cast<std::size_t>(h) * w * 9 * in_c_);
        for (int img = 0; img < n; ++img) {
            im2col(x, img, patches.data());
            // (h*w, 9c) x (9c, filters) lands directly in NHWC order.
            gemm<T>(Trans::no, Trans::no, h * w, filters_, 9 * in_c_, patches.data(), 9 * in_c_,
                    w_.value.v.data(), filters_,
                    out.v.data() + static_cast<std::size_t>(img) * h * w * filters_, filters_);
        }
        T* o = out.v.data();
        for (std::size_t i = 0; i < out.size(); i += filters_) {
            for (int f = 0; f < filters_; ++f) o[i + f] += b_.value.v[f];
        }
        return out;
    }

    Tensor<T> backward(const Tensor<T>& dy) override {
        int n = x_.n(), h = x_.h(), w = x_.w();
        if (dy.rank != 4 || dy.n() != n || dy.h() != h || dy.w() != w || dy.c() != filters_) {
            throw ShapeMismatch(w_.name + ": gradient shape mismatch");
        }
        auto dx = Tensor<T>::zeros4(n, h, w, in_c_);
        for (int f = 0; f < filters_; ++f) {
            double sum = 0.0;
            const T* p = dy.v.data() + f;
            for (std::size_t i = 0; i < dy.size(); i += filters_) sum += static_cast<double>(p[i]);
            b_.grad.v[f] += static_cast<T>(sum);
        }
        std::vector<T> patches(static_cast<std::size_t>(h) * w * 9 * in_c_);
        std::vector<T> dpatches(patches.size());
        for (int img = 0; img < n; ++img) {
            const T* dy_img = dy.v.data() + static_cast<std::size_t>(img) * h * w * filters_;
            im2col(x_, img, patches.data());
            // dw += patches^T (9c, h*w) x dy (h*w, filters)
            gemm<T>(Trans::yes, Trans::no, 9 * in_c_, filters_, h * w, patches.data(), 9 * in_c_,
                    dy_img, filters_, w_.grad.v.data(), filters_, true);
            // dpatches (h*w, 9c) = dy (h*w, filters) x w^T (filters, 9c)
            gemm<T>(Trans::no, Trans::yes, h * w, 9 * in_c_, filters_, dy_img, filters_,
                    w_.value.v.data(), filters_, dpatches.data(), 9 * in_c_);
            col2im(dpatches.data(), dx, img);
        }
        return dx;
    }

    void collect_params(std::vector<ParamTensor<T>*>& out) override {
        out.push_back(&w_);
        out.push_back(&b_);
    }

  private:
    // Patch matrix for one image: row (i*w + j) holds the 3x3 neighborhood
    // of output pixel (i,j) in (kh, kw, channel) order, zeros outside the
    // image.
    void im2col(const Tensor<T>& x, int img, T* out) const {
        int h = x.h(), w = x.w();
        std::size_t row_len = 9 * static_cast<std::size_t>(in_c_);
        const T* src = x.v.data() + static_cast<std::size_t>(img) * h * w * in_c_;
        for (int i = 0; i < h; ++i) {
            for (int j = 0; j < w; ++j) {
                T* row = out + (static_cast<std::size_t>(i) * w + j) * row_len;
                for (int kh = 0; kh < 3; ++kh) {
                    int si = i + kh - 1;
                    for (int kw = 0; kw < 3; ++kw) {
                        int sj = j + kw - 1;
                        T* cell = row + (static_cast<std::size_t>(kh) * 3 + kw) * in_c_;
                        if (si < 0 || si >= h || sj < 0 || sj >= w) {
                            std::memset(cell, 0, sizeof(T) * static_cast<std::size_t>(in_c_));
                        } else {
                            std::memcpy(cell,
                                        src + (static_cast<std::size_t>(si) * w + sj) * in_c_,
                                        sizeof(T) * static_cast<std::size_t>(in_c_));
                        }
                    }
                }
            }
        }
    }

    // Scatter-add of a patch-gradient matrix back onto the input image.
    void col2im(const T* dpatches, Tensor<T>& dx, int img) const {
        int h = dx.h(), w = dx.w();
        std::size_t row_len = 9 * static_cast<std::size_t>(in_c_);
        T* dst = dx.v.data() + static_cast<std::size_t>(img) * h * w * in_c_;
        for (int i = 0; i < h; ++i) {
            for (int j = 0; j < w; ++j) {
                const T* row = dpatches + (static_cast<std::size_t>(i) * w + j) * row_len;
                for (int kh = 0; kh < 3; ++kh) {
                    int si = i + kh - 1;
                    if (si < 0 || si >= h) continue;
                    for (int kw = 0; kw < 3; ++kw) {
                        int sj = j + kw - 1;
                        if (sj < 0 || sj >= w) continue;
                        const T* cell = row + (static_cast<std::size_t>(kh) * 3 + kw) * in_c_;
                        T* target = dst + (static_cast<std::size_t>(si) * w + sj) * in_c_;
                        for (int c = 0; c < in_c_; ++c) target[c] += cell[c];
                    }
                }
            }
        }
    }

    int in_c_;
    int filters_;
    ParamTensor<T> w_;
    ParamTensor<T> b_;
    Tensor<T> x_;
};

// Per-channel batch normalization over all non-channel axes. Train mode
// normalizes by biased batch statistics (eps 1e-5) and folds them into the
// running estimates with momentum 0.9; infer mode applies the running
// estimates. Running variance starts at 1 so an untrained network is a
// no-op scale.
template <typename T>
class BatchNorm : public Layer<T> {
  public:
    explicit BatchNorm(const std::string& name, int channels)
        : channels_(channels),
          gamma_(name + "/gamma", Tensor<T>::zeros1(channels)),
          beta_(name + "/beta", Tensor<T>::zeros1(channels)),
          running_mean_(Tensor<T>::zeros1(channels)),
          running_var_(Tensor<T>::zeros1(channels)),
          name_(name) {
        std::fill(gamma_.value.v.begin(), gamma_.value.v.end(), T(1));
        std::fill(running_var_.v.begin(), running_var_.v.end(), T(1));
    }

    Tensor<T> forward(const Tensor<T>& x, bool train, Rng*) override {
        if (x.c() != channels_) {
            throw ShapeMismatch(name_ + ": expected " + std::to_string(channels_) +
                                " channels, got " + shape_string(x.dims, x.rank));
        }
        std::size_t rows = x.size() / static_cast<std::size_t>(channels_);
        Tensor<T> out = x;
        if (train) {
            if (x.n() < 2) {
                throw DegenerateBatch(name_ + ": train-mode batch must be >= 2, got " +
                                      std::to_string(x.n()));
            }
            compute_batch_stats(x, rows);
            xhat_ = x;
            for (std::size_t r = 0; r < rows; ++r) {
                for (int c = 0; c < channels_; ++c) {
                    std::size_t i = r * channels_ + static_cast<std::size_t>(c);
                    T xh = static_cast<T>((x.v[i] - mean_[c]) * inv_std_[c]);
                    xhat_.v[i] = xh;
                    out.v[i] = gamma_.value.v[c] * xh + beta_.value.v[c];
                }
            }
            for (int c = 0; c < channels_; ++c) {
                running_mean_.v[c] =
                    static_cast<T>(0.9 * running_mean_.v[c] + 0.1 * mean_[c]);
                running_var_.v[c] = static_cast<T>(0.9 * running_var_.v[c] + 0.1 * var_[c]);
            }
        } else {
            for (std::size_t r = 0; r < rows; ++r) {
                for (int c = 0; c < channels_; ++c) {
                    std::size_t i = r * channels_ + static_cast<std::size_t>(c);
                    double inv = 1.0 / std::sqrt(static_cast<double>(running_var_.v[c]) + kEps);
                    out.v[i] = static_cast<T>(
                        gamma_.value.v[c] * ((x.v[i] - running_mean_.v[c]) * inv) +
                        beta_.value.v[c]);
                }
            }
        }
        return out;
    }

    Tensor<T> backward(const Tensor<T>& dy) override {
        require_same_shape(dy, xhat_, name_.c_str());
        std::size_t rows = dy.size() / static_cast<std::size_t>(channels_);
        double m = static_cast<double>(rows);
        std::vector<double> sum_dy(channels_, 0.0), sum_dy_xhat(channels_, 0.0);
        for (std::size_t r = 0; r < rows; ++r) {
            for (int c = 0; c < channels_; ++c) {
                std::size_t i = r * channels_ + static_cast<std::size_t>(c);
                sum_dy[c] += static_cast<double>(dy.v[i]);
                sum_dy_xhat[c] += static_cast<double>(dy.v[i]) * xhat_.v[i];
            }
        }
        for (int c = 0; c < channels_; ++c) {
            beta_.grad.v[c] += static_cast<T>(sum_dy[c]);
            gamma_.grad.v[c] += static_cast<T>(sum_dy_xhat[c]);
        }
        Tensor<T> dx = dy;
        for (std::size_t r = 0; r < rows; ++r) {
            for (int c = 0; c < channels_; ++c) {
                std::size_t i = r * channels_ + static_cast<std::size_t>(c);
                double term = static_cast<double>(dy.v[i]) - sum_dy[c] / m -
                              static_cast<double>(xhat_.v[i]) * sum_dy_xhat[c] / m;
                dx.v[i] = static_cast<T>(gamma_.value.v[c] * inv_std_[c] * term);
            }
        }
        return dx;
    }

    void collect_params(std::vector<ParamTensor<T>*>& out) override {
        out.push_back(&gamma_);
        out.push_back(&beta_);
    }
    void collect_buffers(std::vector<BufferRef<T>>& out) override {
        out.push_back({name_ + "/running_mean", &running_mean_});
        out.push_back({name_ + "/running_var", &running_var_});
    }

    static constexpr double kEps = 1e-5;

  private:
    void compute_batch_stats(const Tensor<T>& x, std::size_t rows) {
        mean_.assign(channels_, 0.0);
        var_.assign(channels_, 0.0);
        inv_std_.assign(channels_, 0.0);
        for (std::size_t r = 0; r < rows; ++r) {
            for (int c = 0; c < channels_; ++c) {
                mean_[c] += static_cast<double>(x.v[r * channels_ + static_cast<std::size_t>(c)]);
            }
        }
        double m = static_cast<double>(rows);
        for (int c = 0; c < channels_; ++c) mean_[c] /= m;
        for (std::size_t r = 0; r < rows; ++r) {
            for (int c = 0; c < channels_; ++c) {
                double d =
                    static_cast<double>(x.v[r * channels_ + static_cast<std::size_t>(c)]) -
                    mean_[c];
                var_[c] += d * d;
            }
        }
        for (int c = 0; c < channels_; ++c) {
            var_[c] /= m;  // biased, both for normalization and running stats
            inv_std_[c] = 1.0 / std::sqrt(var_[c] + kEps);
        }
    }

    int channels_;
    ParamTensor<T> gamma_;
    ParamTensor<T> beta_;
    Tensor<T> running_mean_;
    Tensor<T> running_var_;
    std::string name_;
    Tensor<T> xhat_;
    std::vector<double> mean_, var_, inv_std_;
};

template <typename T>
class ReLU : public Layer<T> {
  public:
    Tensor<T> forward(const Tensor<T>& x, bool, Rng*) override {
        Tensor<T> out = x;
        active_.assign(x.size(), 0);
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (x.v[i] > T(0)) {
                active_[i] = 1;
            } else {
                out.v[i] = T(0);
            }
        }
        return out;
    }

    Tensor<T> backward(const Tensor<T>& dy) override {
        Tensor<T> dx = dy;
        for (std::size_t i = 0; i < dx.size(); ++i) {
            if (!active_[i]) dx.v[i] = T(0);
        }
        return dx;
    }

  private:
    std::vector<std::uint8_t> active_;
};

// 2x2 max pooling, stride 2. Ties go to the first element in scan order
// (0,0),(0,1),(1,0),(1,1), and backward routes the gradient there.
template <typename T>
class MaxPool2x2 : public Layer<T> {
  public:
    Tensor<T> forward(const Tensor<T>& x, bool, Rng*) override {
        if (x.rank != 4 || x.h() % 2 != 0 || x.w() % 2 != 0) {
            throw OddDims("maxpool needs even spatial dims, got " + shape_string(x.dims, x.rank));
        }
        in_dims_ = x.dims;
        int n = x.n(), h = x.h(), w = x.w(), c = x.c();
        auto out = Tensor<T>::zeros4(n, h / 2, w / 2, c);
        argmax_.assign(out.size(), 0);
        std::size_t o = 0;
        for (int img = 0; img < n; ++img) {
            for (int i = 0; i < h; i += 2) {
                for (int j = 0; j < w; j += 2) {
                    for (int ch = 0; ch < c; ++ch, ++o) {
                        T best = x.at(img, i, j, ch);
                        std::uint8_t where = 0;
                        const T cands[3] = {x.at(img, i, j + 1, ch), x.at(img, i + 1, j, ch),
                                            x.at(img, i + 1, j + 1, ch)};
                        for (std::uint8_t k = 0; k < 3; ++k) {
                            if (cands[k] > best) {
                                best = cands[k];
                                where = static_cast<std::uint8_t>(k + 1);
                            }
                        }
                        out.v[o] = best;
                        argmax_[o] = where;
                    }
                }
            }
        }
        return out;
    }

    Tensor<T> backward(const Tensor<T>& dy) override {
        auto dx = Tensor<T>::zeros4(in_dims_[0], in_dims_[1], in_dims_[2], in_dims_[3]);
        int n = dx.n(), h = dx.h(), w = dx.w(), c = dx.c();
        if (dy.size() != static_cast<std::size_t>(n) * (h / 2) * (w / 2) * c) {
            throw ShapeMismatch("maxpool: gradient shape mismatch");
        }
        std::size_t o = 0;
        for (int img = 0; img < n; ++img) {
            for (int i = 0; i < h; i += 2) {
                for (int j = 0; j < w; j += 2) {
                    for (int ch = 0; ch < c; ++ch, ++o) {
                        int di = argmax_[o] >> 1, dj = argmax_[o] & 1;
                        dx.at(img, i + di, j + dj, ch) += dy.v[o];
                    }
                }
            }
        }
        return dx;
    }

  private:
    std::array<int, 4> in_dims_{};
    std::vector<std::uint8_t> argmax_;
};

// Inverted dropout: drops with probability rate in train mode and scales
// survivors by 1/(1-rate), so inference is the identity. Draw order is the
// flat element order, making masks reproducible under a seeded generator.
template <typename T>
class Dropout : public Layer<T> {
  public:
    explicit Dropout(double rate) : rate_(rate) {
        if (rate < 0.0 || rate >= 1.0) {
            throw BadRate("dropout rate must be in [0,1), got " + std::to_string(rate));
        }
    }

    Tensor<T> forward(const Tensor<T>& x, bool train, Rng* rng) override {
        if (!train || rate_ == 0.0) {
            scaled_mask_.clear();
            return x;
        }
        if (rng == nullptr) {
            throw BadConfig("dropout requires a generator in train mode");
        }
        Tensor<T> out = x;
        scaled_mask_.assign(x.size(), T(0));
        T scale = static_cast<T>(1.0 / (1.0 - rate_));
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (rng->uniform01() >= rate_) {
                scaled_mask_[i] = scale;
                out.v[i] = x.v[i] * scale;
            } else {
                out.v[i] = T(0);
            }
        }
        return out;
    }

    Tensor<T> backward(const Tensor<T>& dy) override {
        if (scaled_mask_.empty()) return dy;
        Tensor<T> dx = dy;
        for (std::size_t i = 0; i < dx.size(); ++i) dx.v[i] *= scaled_mask_[i];
        return dx;
    }

  private:
    double rate_;
    std::vector<T> scaled_mask_;
};

// Spatial mean per channel: (n, h, w, c) -> (n, c).
template <typename T>
class GlobalAvgPool : public Layer<T> {
  public:
    Tensor<T> forward(const Tensor<T>& x, bool, Rng*) override {
        if (x.rank != 4) {
            throw ShapeMismatch("global average pool needs rank-4 input, got " +
                                shape_string(x.dims, x.rank));
        }
        in_dims_ = x.dims;
        int n = x.n(), hw = x.h() * x.w(), c = x.c();
        auto out = Tensor<T>::zeros2(n, c);
        for (int img = 0; img < n; ++img) {
            const T* src = x.v.data() + static_cast<std::size_t>(img) * hw * c;
            for (int ch = 0; ch < c; ++ch) {
                double sum = 0.0;
                for (int p = 0; p < hw; ++p) {
                    sum += static_cast<double>(src[static_cast<std::size_t>(p) * c + ch]);
                }
                out.at(img, ch) = static_cast<T>(sum / hw);
            }
        }
        return out;
    }

    Tensor<T> backward(const Tensor<T>& dy) override {
        auto dx = Tensor<T>::zeros4(in_dims_[0], in_dims_[1], in_dims_[2], in_dims_[3]);
        int n = dx.n(), hw = dx.h() * dx.w(), c = dx.c();
        for (int img = 0; img < n; ++img) {
            T* dst = dx.v.data() + static_cast<std::size_t>(img) * hw * c;
            for (int ch = 0; ch < c; ++ch) {
                T g = dy.at(img, ch) / static_cast<T>(hw);
                for (int p = 0; p < hw; ++p) dst[static_cast<std::size_t>(p) * c + ch] = g;
            }
        }
        return dx;
    }

  private:
    std::array<int, 4> in_dims_{};
};

// Fully connected affine map on rank-2 input.
template <typename T>
class Dense : public Layer<T> {
  public:
    Dense(const std::string& name, int in_dim, int units, bool l2_penalty = false)
        : in_dim_(in_dim),
          units_(units),
          w_(name + "/w", Tensor<T>::zeros2(in_dim, units), l2_penalty),
          b_(name + "/b", Tensor<T>::zeros1(units)) {}

    ParamTensor<T>& weights() { return w_; }
    ParamTensor<T>& bias() { return b_; }

    Tensor<T> forward(const Tensor<T>& x, bool, Rng*) override {
        if (x.rank != 2 || x.c() != in_dim_) {
            throw ShapeMismatch(w_.name + ": expected rank-2 input with " +
                                std::to_string(in_dim_) + " features, got " +
                                shape_string(x.dims, x.rank));
        }
        x_ = x;
        int n = x.n();
        auto out = Tensor<T>::zeros2(n, units_);
        gemm<T>(Trans::no, Trans::no, n, units_, in_dim_, x.v.data(), in_dim_, w_.value.v.data(),
                units_, out.v.data(), units_);
        for (int r = 0; r < n; ++r) {
            for (int u = 0; u < units_; ++u) out.at(r, u) += b_.value.v[u];
        }
        return out;
    }

    Tensor<T> backward(const Tensor<T>& dy) override {
        int n = x_.n();
        if (dy.rank != 2 || dy.n() != n || dy.c() != units_) {
            throw ShapeMismatch(w_.name + ": gradient shape mismatch");
        }
        gemm<T>(Trans::yes, Trans::no, in_dim_, units_, n, x_.v.data(), in_dim_, dy.v.data(),
                units_, w_.grad.v.data(), units_, true);
        for (int u = 0; u < units_; ++u) {
            double sum = 0.0;
            for (int r = 0; r < n; ++r) sum += static_cast<double>(dy.at(r, u));
            b_.grad.v[u] += static_cast<T>(sum);
        }
        auto dx = Tensor<T>::zeros2(n, in_dim_);
        gemm<T>(Trans::no, Trans::yes, n, in_dim_, units_, dy.v.data(), units_,
                w_.value.v.data(), units_, dx.v.data(), in_dim_);
        return dx;
    }

    void collect_params(std::vector<ParamTensor<T>*>& out) override {
        out.push_back(&w_);
        out.push_back(&b_);
    }

  private:
    int in_dim_;
    int units_;
    ParamTensor<T> w_;
    ParamTensor<T> b_;
    Tensor<T> x_;
};

// Row-wise stable softmax on rank-2 input. Training uses the fused loss
// gradient instead of this layer's backward; the backward here exists for
// completeness and standalone probability pipelines.
template <typename T>
class Softmax : public Layer<T> {
  public:
    Tensor<T> forward(const Tensor<T>& x, bool, Rng*) override {
        if (x.rank != 2) {
            throw ShapeMismatch("softmax needs rank-2 input, got " +
                                shape_string(x.dims, x.rank));
        }
        y_ = x;
        int n = x.n(), c = x.c();
        for (int r = 0; r < n; ++r) {
            T hi = x.at(r, 0);
            for (int j = 1; j < c; ++j) hi = std::max(hi, x.at(r, j));
            double denom = 0.0;
            for (int j = 0; j < c; ++j) {
                denom += std::exp(static_cast<double>(x.at(r, j) - hi));
            }
            for (int j = 0; j < c; ++j) {
                y_.at(r, j) =
                    static_cast<T>(std::exp(static_cast<double>(x.at(r, j) - hi)) / denom);
            }
        }
        return y_;
    }

    Tensor<T> backward(const Tensor<T>& dy) override {
        require_same_shape(dy, y_, "softmax");
        Tensor<T> dx = dy;
        int n = y_.n(), c = y_.c();
        for (int r = 0; r < n; ++r) {
            double dot = 0.0;
            for (int j = 0; j < c; ++j) {
                dot += static_cast<double>(dy.at(r, j)) * y_.at(r, j);
            }
            for (int j = 0; j < c; ++j) {
                dx.at(r, j) = static_cast<T>((dy.at(r, j) - dot) * y_.at(r, j));
            }
        }
        return dx;
    }

  private:
    Tensor<T> y_;
};

}  // namespace fog
