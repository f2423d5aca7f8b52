#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "fog/error.hpp"
#include "fog/gaf.hpp"
#include "fog/ingest.hpp"
#include "fog/nn/adam.hpp"
#include "fog/nn/layers.hpp"
#include "fog/nn/loss.hpp"
#include "fog/parallel.hpp"
#include "fog/rng.hpp"
#include "fog/tensor.hpp"
#include "fog/text.hpp"
#include "fog/weights.hpp"
#include "fog/windowing.hpp"

namespace fog {

struct ModelConfig {
    std::vector<std::string> channels{std::string(kChannelNames[0]),
                                      std::string(kChannelNames[1]),
                                      std::string(kChannelNames[2])};
    int epochs = 60;
    int batch_size = 64;
    double l2_lambda = 0.001;
    std::uint64_t seed = 0;
    AngleSource angle_source = AngleSource::bipolar;
    int image_size = 64;
    AdamConfig adam{};
};

inline void validate_model_config(const ModelConfig& cfg) {
    if (cfg.channels.empty() || cfg.channels.size() > 3) {
        throw BadConfig("channel list must hold 1 to 3 channels, got " +
                        std::to_string(cfg.channels.size()));
    }
    for (std::size_t i = 0; i < cfg.channels.size(); ++i) {
        channel_index(cfg.channels[i]);
        for (std::size_t j = i + 1; j < cfg.channels.size(); ++j) {
            if (cfg.channels[i] == cfg.channels[j]) {
                throw BadConfig("duplicate channel in config: " + cfg.channels[i]);
            }
        }
    }
    if (cfg.epochs < 0) throw BadConfig("epochs must be non-negative");
    if (cfg.batch_size < 2) throw BadConfig("batch size must be at least 2");
    if (cfg.l2_lambda < 0.0) throw BadConfig("l2 penalty must be non-negative");
    if (cfg.image_size < 2) throw BadConfig("image size must be at least 2");
}

// Windows rendered to per-channel network inputs. images[c] has shape
// (N, n, n, 3) with the single-channel image replicated across the three
// planes; entries align with labels. Windows whose requested channels are not
// all functional are excluded and counted in skipped.
struct GafDataset {
    std::vector<std::string> channels;
    std::vector<Tensor<float>> images;
    std::vector<int> labels;
    std::vector<std::size_t> window_indices;
    std::size_t skipped = 0;

    std::size_t size() const { return labels.size(); }
};

inline GafDataset make_gaf_dataset(const WindowSet& ws, const std::vector<std::string>& channels,
                                   int image_size = 64,
                                   AngleSource source = AngleSource::bipolar) {
    GafDataset ds;
    ds.channels = channels;
    std::vector<int> channel_ids;
    for (const auto& name : channels) channel_ids.push_back(channel_index(name));

    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < ws.windows.size(); ++i) {
        bool ok = true;
        for (int c : channel_ids) ok = ok && ws.windows[i].channel_mask[c];
        if (ok) {
            kept.push_back(i);
        } else {
            ++ds.skipped;
        }
    }

    int n = image_size;
    for (std::size_t c = 0; c < channels.size(); ++c) {
        ds.images.push_back(Tensor<float>::zeros4(static_cast<int>(kept.size()), n, n, 3));
    }
    ds.labels.resize(kept.size());
    ds.window_indices = kept;

    parallel_for(kept.size(), [&](std::size_t k) {
        const Window& w = ws.windows[kept[k]];
        ds.labels[k] = w.label;
        for (std::size_t c = 0; c < channel_ids.size(); ++c) {
            auto img = gasf_from_series(w.data[static_cast<std::size_t>(channel_ids[c])],
                                        static_cast<std::size_t>(n), source);
            float* dst = ds.images[c].v.data() +
                         k * static_cast<std::size_t>(n) * static_cast<std::size_t>(n) * 3;
            for (std::size_t p = 0; p < img.matrix.size(); ++p) {
                auto v = static_cast<float>(img.matrix[p]);
                dst[p * 3] = v;
                dst[p * 3 + 1] = v;
                dst[p * 3 + 2] = v;
            }
        }
    });
    return ds;
}

// One branch per channel: three conv blocks (filters 32, 64, 128; dropout
// 0.2, 0.2, 0.4; L2 on blocks 2 and 3) into global average pooling, then a
// shared head of dense 128 (L2, dropout 0.4), dense 64 (dropout 0.2), and a
// width-2 output. Layer objects live behind stable pointers so parameter
// references survive moves of the enclosing model.
template <typename T = float>
class Model {
  public:
    explicit Model(const ModelConfig& cfg) : cfg_(cfg) {
        validate_model_config(cfg_);
        const int k = static_cast<int>(cfg_.channels.size());
        for (const auto& name : cfg_.channels) {
            branches_.push_back(std::make_unique<Branch>("branch_" + name));
        }
        head_ = std::make_unique<Head>(128 * k);
        for (auto& b : branches_) b->collect(params_, buffers_);
        head_->collect(params_, buffers_);
        for (auto* p : params_) {
            if (p->l2) l2_params_.push_back(p);
        }
        init_weights();
    }

    const ModelConfig& config() const { return cfg_; }
    std::size_t feature_width() const { return 128 * branches_.size(); }
    const std::vector<ParamTensor<T>*>& params() { return params_; }
    const std::vector<ParamTensor<T>*>& l2_params() { return l2_params_; }

    // xs holds one (B, n, n, 3) tensor per configured channel, in config
    // order. The dropout stream consumes layers in a fixed order, so a given
    // rng state yields one reproducible mask assignment.
    Tensor<T> logits(const std::vector<Tensor<T>>& xs, bool train, Rng* rng) {
        if (xs.size() != branches_.size()) {
            throw ShapeMismatch("expected " + std::to_string(branches_.size()) +
                                " channel inputs, got " + std::to_string(xs.size()));
        }
        std::vector<Tensor<T>> feats;
        for (std::size_t i = 0; i < branches_.size(); ++i) {
            feats.push_back(branches_[i]->forward(xs[i], train, rng));
        }
        auto h = concat_features(feats);
        return head_->forward(h, train, rng);
    }

    void backward(const Tensor<T>& dlogits) {
        auto dh = head_->backward(dlogits);
        const int width = 128;
        for (std::size_t i = 0; i < branches_.size(); ++i) {
            auto slice = Tensor<T>::zeros2(dh.n(), width);
            for (int r = 0; r < dh.n(); ++r) {
                for (int c = 0; c < width; ++c) {
                    slice.at(r, c) = dh.at(r, static_cast<int>(i) * width + c);
                }
            }
            branches_[i]->backward(slice);
        }
    }

    void zero_grads() {
        for (auto* p : params_) p->zero_grad();
    }

    // Snapshot covers parameters and batchnorm running statistics, in graph
    // order, as float32.
    std::vector<NamedTensor> snapshot() const {
        std::vector<NamedTensor> out;
        for (const auto* p : params_) {
            out.push_back({p->name, p->value.template cast<float>()});
        }
        for (const auto& b : buffers_) {
            out.push_back({b.name, b.tensor->template cast<float>()});
        }
        return out;
    }

    void restore(const std::vector<NamedTensor>& tensors) {
        std::size_t consumed = 0;
        auto take = [&](const std::string& name, auto& dst) {
            for (const auto& nt : tensors) {
                if (nt.name != name) continue;
                if (!nt.tensor.same_shape(dst) || nt.tensor.rank != dst.rank) {
                    throw ShapeMismatch("tensor " + name + ": stored shape " +
                                        shape_string(nt.tensor.dims, nt.tensor.rank) +
                                        " does not match graph shape " +
                                        shape_string(dst.dims, dst.rank));
                }
                for (std::size_t i = 0; i < dst.size(); ++i) {
                    dst.v[i] = static_cast<T>(nt.tensor.v[i]);
                }
                ++consumed;
                return;
            }
            throw ShapeMismatch("tensor " + name + " missing from container");
        };
        for (auto* p : params_) take(p->name, p->value);
        for (auto& b : buffers_) take(b.name, *b.tensor);
        if (consumed != tensors.size()) {
            throw ShapeMismatch("container holds " + std::to_string(tensors.size()) +
                                " tensors but the graph defines " + std::to_string(consumed));
        }
        for (auto* p : params_) p->reset_moments();
    }

    // Inference over a dataset in fixed-size slices; ties on the two class
    // probabilities resolve to class 0.
    std::vector<int> predict(const GafDataset& ds, int batch = 64) {
        if (ds.channels != cfg_.channels) {
            throw ShapeMismatch("dataset channels do not match model config");
        }
        std::vector<int> preds(ds.size());
        for (std::size_t begin = 0; begin < ds.size(); begin += static_cast<std::size_t>(batch)) {
            std::size_t end = std::min(ds.size(), begin + static_cast<std::size_t>(batch));
            auto xs = slice_inputs(ds, begin, end);
            auto out = logits(xs, false, nullptr);
            for (std::size_t r = 0; r < end - begin; ++r) {
                preds[begin + r] =
                    out.at(static_cast<int>(r), 1) > out.at(static_cast<int>(r), 0) ? 1 : 0;
            }
        }
        return preds;
    }

    std::vector<Tensor<T>> slice_inputs(const GafDataset& ds, std::size_t begin,
                                        std::size_t end) const {
        std::vector<Tensor<T>> xs;
        int n = cfg_.image_size;
        std::size_t stride = static_cast<std::size_t>(n) * static_cast<std::size_t>(n) * 3;
        for (std::size_t c = 0; c < ds.images.size(); ++c) {
            auto x = Tensor<T>::zeros4(static_cast<int>(end - begin), n, n, 3);
            const float* src = ds.images[c].v.data() + begin * stride;
            for (std::size_t i = 0; i < x.size(); ++i) x.v[i] = static_cast<T>(src[i]);
            xs.push_back(std::move(x));
        }
        return xs;
    }

  private:
    struct Branch {
        Conv2D<T> conv1, conv2, conv3;
        BatchNorm<T> bn1, bn2, bn3;
        ReLU<T> relu1, relu2, relu3;
        MaxPool2x2<T> pool1, pool2, pool3;
        Dropout<T> drop1, drop2, drop3;
        GlobalAvgPool<T> gap;

        explicit Branch(const std::string& prefix)
            : conv1(prefix + "/conv1", 3, 32),
              conv2(prefix + "/conv2", 32, 64, true),
              conv3(prefix + "/conv3", 64, 128, true),
              bn1(prefix + "/bn1", 32),
              bn2(prefix + "/bn2", 64),
              bn3(prefix + "/bn3", 128),
              drop1(0.2),
              drop2(0.2),
              drop3(0.4) {}

        Tensor<T> forward(const Tensor<T>& x, bool train, Rng* rng) {
            auto t = conv1.forward(x, train, rng);
            t = bn1.forward(t, train, rng);
            t = relu1.forward(t, train, rng);
            t = pool1.forward(t, train, rng);
            t = drop1.forward(t, train, rng);
            t = conv2.forward(t, train, rng);
            t = bn2.forward(t, train, rng);
            t = relu2.forward(t, train, rng);
            t = pool2.forward(t, train, rng);
            t = drop2.forward(t, train, rng);
            t = conv3.forward(t, train, rng);
            t = bn3.forward(t, train, rng);
            t = relu3.forward(t, train, rng);
            t = pool3.forward(t, train, rng);
            t = drop3.forward(t, train, rng);
            return gap.forward(t, train, rng);
        }

        void backward(const Tensor<T>& dfeat) {
            auto g = gap.backward(dfeat);
            g = drop3.backward(g);
            g = pool3.backward(g);
            g = relu3.backward(g);
            g = bn3.backward(g);
            g = conv3.backward(g);
            g = drop2.backward(g);
            g = pool2.backward(g);
            g = relu2.backward(g);
            g = bn2.backward(g);
            g = conv2.backward(g);
            g = drop1.backward(g);
            g = pool1.backward(g);
            g = relu1.backward(g);
            g = bn1.backward(g);
            conv1.backward(g);
        }

        void collect(std::vector<ParamTensor<T>*>& params, std::vector<BufferRef<T>>& buffers) {
            for (Layer<T>* l : std::initializer_list<Layer<T>*>{
                     &conv1, &bn1, &conv2, &bn2, &conv3, &bn3}) {
                l->collect_params(params);
                l->collect_buffers(buffers);
            }
        }
    };

    struct Head {
        Dense<T> dense128, dense64, dense2;
        ReLU<T> relu128, relu64;
        Dropout<T> drop128, drop64;

        explicit Head(int in_width)
            : dense128("head/dense128", in_width, 128, true),
              dense64("head/dense64", 128, 64),
              dense2("head/dense2", 64, 2),
              drop128(0.4),
              drop64(0.2) {}

        Tensor<T> forward(const Tensor<T>& h, bool train, Rng* rng) {
            auto t = dense128.forward(h, train, rng);
            t = relu128.forward(t, train, rng);
            t = drop128.forward(t, train, rng);
            t = dense64.forward(t, train, rng);
            t = relu64.forward(t, train, rng);
            t = drop64.forward(t, train, rng);
            return dense2.forward(t, train, rng);
        }

        Tensor<T> backward(const Tensor<T>& dlogits) {
            auto g = dense2.backward(dlogits);
            g = drop64.backward(g);
            g = relu64.backward(g);
            g = dense64.backward(g);
            g = drop128.backward(g);
            g = relu128.backward(g);
            return dense128.backward(g);
        }

        void collect(std::vector<ParamTensor<T>*>& params, std::vector<BufferRef<T>>& buffers) {
            for (Layer<T>* l :
                 std::initializer_list<Layer<T>*>{&dense128, &dense64, &dense2}) {
                l->collect_params(params);
                l->collect_buffers(buffers);
            }
        }
    };

    Tensor<T> concat_features(const std::vector<Tensor<T>>& feats) const {
        int rows = feats[0].n();
        auto out = Tensor<T>::zeros2(rows, static_cast<int>(feature_width()));
        for (std::size_t i = 0; i < feats.size(); ++i) {
            for (int r = 0; r < rows; ++r) {
                for (int c = 0; c < 128; ++c) {
                    out.at(r, static_cast<int>(i) * 128 + c) = feats[i].at(r, c);
                }
            }
        }
        return out;
    }

    // Weight tensors draw from a per-tensor stream seeded by the tensor name,
    // so initialization is independent of construction order. Scale is
    // sqrt(2 / fan_in) with fan_in read off the tensor shape.
    void init_weights() {
        for (auto* p : params_) {
            if (p->name.size() < 2 || p->name.substr(p->name.size() - 2) != "/w") continue;
            double fan_in = p->value.rank == 4
                                ? static_cast<double>(p->value.dims[0]) * p->value.dims[1] *
                                      p->value.dims[2]
                                : static_cast<double>(p->value.dims[0]);
            double stddev = std::sqrt(2.0 / fan_in);
            Rng rng(derive_seed(cfg_.seed, "init/" + p->name));
            for (auto& v : p->value.v) v = static_cast<T>(rng.normal() * stddev);
        }
    }

    ModelConfig cfg_;
    std::vector<std::unique_ptr<Branch>> branches_;
    std::unique_ptr<Head> head_;
    std::vector<ParamTensor<T>*> params_;
    std::vector<ParamTensor<T>*> l2_params_;
    std::vector<BufferRef<T>> buffers_;
};

namespace detail {

struct BinaryOutcome {
    std::optional<double> accuracy;
    std::optional<double> f1;
};

inline BinaryOutcome binary_outcome(const std::vector<int>& preds,
                                    const std::vector<int>& labels) {
    BinaryOutcome out;
    if (preds.size() != labels.size() || preds.empty()) return out;
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        if (preds[i] == 1 && labels[i] == 1) ++tp;
        if (preds[i] == 1 && labels[i] == 0) ++fp;
        if (preds[i] == 0 && labels[i] == 1) ++fn;
        if (preds[i] == 0 && labels[i] == 0) ++tn;
    }
    out.accuracy = static_cast<double>(tp + tn) / static_cast<double>(preds.size());
    if (tp + fp > 0 && tp + fn > 0) {
        double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
        double sensitivity = static_cast<double>(tp) / static_cast<double>(tp + fn);
        if (precision + sensitivity > 0) {
            out.f1 = 2.0 * precision * sensitivity / (precision + sensitivity);
        }
    }
    return out;
}

inline std::string format_optional(const std::optional<double>& v) {
    return v ? format_double(*v) : "nan";
}

}  // namespace detail

struct EpochRecord {
    int epoch = 0;
    double train_loss = 0.0;
    std::optional<double> val_accuracy;
    std::optional<double> val_f1;
};

struct TrainedModel {
    ModelConfig config;
    std::vector<NamedTensor> tensors;
    std::vector<EpochRecord> history;
    int epochs_trained = 0;
    std::optional<double> val_accuracy;
    std::optional<double> val_f1;
    std::optional<double> test_f1;
};

// Runs training epochs [epoch_begin, epoch_end) in place. Shuffle and dropout
// streams key off (train_seed, epoch index), and adam_t carries the optimizer
// step count across calls, so running epochs one at a time equals running
// them in one call. A trailing batch of one window is skipped: batchnorm
// cannot train on it. Returns the sample-weighted mean loss per epoch.
template <typename T>
inline std::vector<double> run_epochs(Model<T>& model, const GafDataset& ds, int epoch_begin,
                                      int epoch_end, std::uint64_t train_seed, int& adam_t) {
    const ModelConfig& cfg = model.config();
    std::vector<double> losses;
    std::vector<std::size_t> order(ds.size());
    for (int e = epoch_begin; e < epoch_end; ++e) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        Rng shuffle_rng(derive_seed(train_seed, "shuffle", static_cast<std::uint64_t>(e)));
        shuffle_rng.shuffle(order);

        double loss_sum = 0.0;
        std::size_t seen = 0;
        std::size_t batch_index = 0;
        for (std::size_t begin = 0; begin < order.size();
             begin += static_cast<std::size_t>(cfg.batch_size), ++batch_index) {
            std::size_t end =
                std::min(order.size(), begin + static_cast<std::size_t>(cfg.batch_size));
            std::size_t bn = end - begin;
            if (bn < 2) continue;

            std::vector<Tensor<T>> xs;
            int n = cfg.image_size;
            for (std::size_t c = 0; c < ds.images.size(); ++c) {
                xs.push_back(Tensor<T>::zeros4(static_cast<int>(bn), n, n, 3));
            }
            auto onehot = Tensor<T>::zeros2(static_cast<int>(bn), 2);
            std::size_t stride = static_cast<std::size_t>(n) * static_cast<std::size_t>(n) * 3;
            for (std::size_t r = 0; r < bn; ++r) {
                std::size_t src_row = order[begin + r];
                for (std::size_t c = 0; c < ds.images.size(); ++c) {
                    const float* src = ds.images[c].v.data() + src_row * stride;
                    T* dst = xs[c].v.data() + r * stride;
                    for (std::size_t i = 0; i < stride; ++i) dst[i] = static_cast<T>(src[i]);
                }
                onehot.at(static_cast<int>(r), ds.labels[src_row]) = T(1);
            }

            Rng dropout_rng(derive_seed(train_seed, "dropout", static_cast<std::uint64_t>(e),
                                        batch_index));
            auto out = model.logits(xs, true, &dropout_rng);
            auto res = softmax_xent_loss<T>(out, onehot, model.l2_params(), cfg.l2_lambda);
            model.zero_grads();
            model.backward(res.dlogits);
            add_l2_gradients<T>(model.l2_params(), cfg.l2_lambda);
            adam_step<T>(model.params(), cfg.adam, ++adam_t);

            loss_sum += res.loss * static_cast<double>(bn);
            seen += bn;
        }
        losses.push_back(seen > 0 ? loss_sum / static_cast<double>(seen)
                                  : std::numeric_limits<double>::quiet_NaN());
    }
    return losses;
}

inline std::uint64_t training_seed(const ModelConfig& cfg) {
    return derive_seed(cfg.seed, "train");
}

// on_epoch fires after each epoch's record is complete; it observes progress
// and must not mutate training state.
inline TrainedModel train_model(const ModelConfig& cfg, const WindowSet& train_ws,
                                const WindowSet& val_ws,
                                const std::function<void(const EpochRecord&)>& on_epoch = {}) {
    validate_model_config(cfg);
    auto train_ds = make_gaf_dataset(train_ws, cfg.channels, cfg.image_size, cfg.angle_source);
    if (train_ds.size() == 0) {
        throw EmptyTrainingSet("no usable training windows (input " +
                               std::to_string(train_ws.windows.size()) + ", skipped " +
                               std::to_string(train_ds.skipped) + ")");
    }
    auto val_ds = make_gaf_dataset(val_ws, cfg.channels, cfg.image_size, cfg.angle_source);

    Model<float> model(cfg);
    int adam_t = 0;
    std::uint64_t seed = training_seed(cfg);

    TrainedModel tm;
    tm.config = cfg;
    for (int e = 0; e < cfg.epochs; ++e) {
        auto losses = run_epochs(model, train_ds, e, e + 1, seed, adam_t);
        EpochRecord rec;
        rec.epoch = e;
        rec.train_loss = losses[0];
        if (val_ds.size() > 0) {
            auto preds = model.predict(val_ds);
            auto outcome = detail::binary_outcome(preds, val_ds.labels);
            rec.val_accuracy = outcome.accuracy;
            rec.val_f1 = outcome.f1;
        }
        tm.history.push_back(rec);
        if (on_epoch) on_epoch(rec);
    }
    tm.tensors = model.snapshot();
    tm.epochs_trained = static_cast<int>(tm.history.size());
    if (!tm.history.empty()) {
        tm.val_accuracy = tm.history.back().val_accuracy;
        tm.val_f1 = tm.history.back().val_f1;
    }
    return tm;
}

inline std::string history_to_csv(const std::vector<EpochRecord>& history) {
    std::string out = "epoch,train_loss,val_accuracy,val_f1\n";
    for (const auto& rec : history) {
        out += std::to_string(rec.epoch);
        out += ',';
        out += format_double(rec.train_loss);
        out += ',';
        out += detail::format_optional(rec.val_accuracy);
        out += ',';
        out += detail::format_optional(rec.val_f1);
        out += '\n';
    }
    return out;
}

inline std::string save_weights(const TrainedModel& m) {
    WeightContainer c;
    std::string channels;
    for (std::size_t i = 0; i < m.config.channels.size(); ++i) {
        if (i > 0) channels += ',';
        channels += m.config.channels[i];
    }
    c.metadata.emplace_back("channels", channels);
    c.metadata.emplace_back("angle_source", angle_source_name(m.config.angle_source));
    c.metadata.emplace_back("image_size", std::to_string(m.config.image_size));
    c.metadata.emplace_back("seed", std::to_string(m.config.seed));
    c.metadata.emplace_back("epochs", std::to_string(m.config.epochs));
    c.metadata.emplace_back("epochs_trained", std::to_string(m.epochs_trained));
    c.metadata.emplace_back("batch_size", std::to_string(m.config.batch_size));
    c.metadata.emplace_back("l2_lambda", format_double(m.config.l2_lambda));
    c.metadata.emplace_back("adam_lr", format_double(m.config.adam.lr));
    c.metadata.emplace_back("adam_beta1", format_double(m.config.adam.beta1));
    c.metadata.emplace_back("adam_beta2", format_double(m.config.adam.beta2));
    c.metadata.emplace_back("adam_eps", format_double(m.config.adam.eps));
    if (m.val_accuracy) c.metadata.emplace_back("val_accuracy", format_double(*m.val_accuracy));
    if (m.val_f1) c.metadata.emplace_back("val_f1", format_double(*m.val_f1));
    if (m.test_f1) c.metadata.emplace_back("test_f1", format_double(*m.test_f1));
    c.tensors = m.tensors;
    return serialize_weights(c);
}

inline TrainedModel load_weights(const std::string& bytes) {
    WeightContainer c = parse_weights(bytes);
    auto require = [&](std::string_view key) -> const std::string& {
        const std::string* v = c.find_meta(key);
        if (!v) throw ChecksumFailure("weight container missing metadata key " +
                                      std::string(key));
        return *v;
    };
    TrainedModel tm;
    tm.config.channels.clear();
    for (auto part : split_csv_line(require("channels"))) {
        tm.config.channels.emplace_back(part);
    }
    tm.config.angle_source = angle_source_from_name(require("angle_source"));
    tm.config.image_size = static_cast<int>(parse_int(require("image_size"), "image_size"));
    tm.config.seed = static_cast<std::uint64_t>(parse_int(require("seed"), "seed"));
    tm.config.epochs = static_cast<int>(parse_int(require("epochs"), "epochs"));
    tm.epochs_trained =
        static_cast<int>(parse_int(require("epochs_trained"), "epochs_trained"));
    tm.config.batch_size = static_cast<int>(parse_int(require("batch_size"), "batch_size"));
    tm.config.l2_lambda = parse_double(require("l2_lambda"), "l2_lambda");
    tm.config.adam.lr = parse_double(require("adam_lr"), "adam_lr");
    tm.config.adam.beta1 = parse_double(require("adam_beta1"), "adam_beta1");
    tm.config.adam.beta2 = parse_double(require("adam_beta2"), "adam_beta2");
    tm.config.adam.eps = parse_double(require("adam_eps"), "adam_eps");
    if (const auto* v = c.find_meta("val_accuracy")) {
        tm.val_accuracy = parse_double(*v, "val_accuracy");
    }
    if (const auto* v = c.find_meta("val_f1")) tm.val_f1 = parse_double(*v, "val_f1");
    if (const auto* v = c.find_meta("test_f1")) tm.test_f1 = parse_double(*v, "test_f1");

    // Rebuilding the graph and restoring validates names and shapes, and
    // canonicalizes tensor order for byte-stable re-serialization.
    Model<float> model(tm.config);
    model.restore(c.tensors);
    tm.tensors = model.snapshot();
    return tm;
}

template <typename T = float>
inline Model<T> instantiate(const TrainedModel& tm) {
    Model<T> model(tm.config);
    model.restore(tm.tensors);
    return model;
}

}  // namespace fog
