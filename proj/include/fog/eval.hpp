#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fog/error.hpp"
#include "fog/model.hpp"
#include "fog/text.hpp"
#include "fog/windowing.hpp"

namespace fog {

struct ConfusionCounts {
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;

    std::size_t total() const { return tp + fp + fn + tn; }
};

// Ratios with a zero denominator stay unset rather than defaulting to zero,
// so averaged summaries cannot silently absorb degenerate slices.
struct EvalReport {
    ConfusionCounts counts;
    std::optional<double> accuracy, precision, sensitivity, f1, fpr;
    std::string level;
};

namespace detail {

inline EvalReport report_from_counts(const ConfusionCounts& c, std::string level) {
    EvalReport r;
    r.counts = c;
    r.level = std::move(level);
    auto ratio = [](std::size_t num, std::size_t den) -> std::optional<double> {
        if (den == 0) return std::nullopt;
        return static_cast<double>(num) / static_cast<double>(den);
    };
    r.accuracy = ratio(c.tp + c.tn, c.total());
    r.precision = ratio(c.tp, c.tp + c.fp);
    r.sensitivity = ratio(c.tp, c.tp + c.fn);
    r.fpr = ratio(c.fp, c.fp + c.tn);
    if (r.precision && r.sensitivity && *r.precision + *r.sensitivity > 0.0) {
        r.f1 = 2.0 * *r.precision * *r.sensitivity / (*r.precision + *r.sensitivity);
    }
    return r;
}

}  // namespace detail

// Window-level confusion metrics; any nonzero entry counts as the positive
// class.
inline EvalReport window_metrics(const std::vector<int>& preds, const std::vector<int>& labels) {
    if (preds.size() != labels.size() || preds.empty()) {
        throw LengthMismatch("window_metrics needs equal non-empty sequences, got " +
                             std::to_string(preds.size()) + " and " +
                             std::to_string(labels.size()));
    }
    ConfusionCounts c;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        bool p = preds[i] != 0, l = labels[i] != 0;
        if (p && l) ++c.tp;
        if (p && !l) ++c.fp;
        if (!p && l) ++c.fn;
        if (!p && !l) ++c.tn;
    }
    return detail::report_from_counts(c, "window");
}

// One flagged position on the evaluation grid: windows are identified by
// subject and their position in that subject's window sequence.
struct WindowFlag {
    std::string subject_id;
    std::size_t grid_position = 0;
    int flag = 0;
};

// Inclusive run of consecutive flagged grid positions within one subject.
struct Episode {
    std::string subject_id;
    std::size_t start_index = 0;
    std::size_t end_index = 0;
};

inline bool operator==(const Episode& a, const Episode& b) {
    return a.subject_id == b.subject_id && a.start_index == b.start_index &&
           a.end_index == b.end_index;
}

inline std::vector<Episode> merge_episodes(const std::vector<WindowFlag>& stream) {
    for (std::size_t i = 1; i < stream.size(); ++i) {
        const auto& prev = stream[i - 1];
        const auto& cur = stream[i];
        bool ordered = prev.subject_id < cur.subject_id ||
                       (prev.subject_id == cur.subject_id &&
                        prev.grid_position < cur.grid_position);
        if (!ordered) {
            throw UnsortedInput("window stream must be strictly sorted by (subject, position); "
                                "offending index " +
                                std::to_string(i));
        }
    }
    std::vector<Episode> episodes;
    for (const auto& wf : stream) {
        if (wf.flag == 0) continue;
        if (!episodes.empty() && episodes.back().subject_id == wf.subject_id &&
            episodes.back().end_index + 1 == wf.grid_position) {
            episodes.back().end_index = wf.grid_position;
        } else {
            episodes.push_back({wf.subject_id, wf.grid_position, wf.grid_position});
        }
    }
    return episodes;
}

// Rebuilds the flag sequence for a grid from an episode list; inverse of
// merge_episodes over the same grid.
inline std::vector<int> explode_episodes(const std::vector<Episode>& episodes,
                                         const std::vector<WindowFlag>& grid) {
    std::vector<int> flags(grid.size(), 0);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        for (const auto& ep : episodes) {
            if (ep.subject_id == grid[i].subject_id && grid[i].grid_position >= ep.start_index &&
                grid[i].grid_position <= ep.end_index) {
                flags[i] = 1;
                break;
            }
        }
    }
    return flags;
}

namespace detail {

inline bool episodes_overlap(const Episode& a, const Episode& b) {
    return a.subject_id == b.subject_id && a.start_index <= b.end_index &&
           a.end_index >= b.start_index;
}

}  // namespace detail

// Episode-level confusion: a true episode overlapped by any predicted episode
// is a TP, a predicted episode with no true overlap is an FP, unmatched true
// episodes are FN, and grid positions outside every episode of either kind
// count as TN so a false-positive rate stays computable.
inline EvalReport episode_metrics(const std::vector<Episode>& pred_eps,
                                  const std::vector<Episode>& true_eps,
                                  const std::vector<WindowFlag>& pred_windows,
                                  const std::vector<WindowFlag>& true_windows) {
    if (pred_windows.size() != true_windows.size()) {
        throw GridMismatch("prediction and label streams differ in length: " +
                           std::to_string(pred_windows.size()) + " vs " +
                           std::to_string(true_windows.size()));
    }
    for (std::size_t i = 0; i < pred_windows.size(); ++i) {
        if (pred_windows[i].subject_id != true_windows[i].subject_id ||
            pred_windows[i].grid_position != true_windows[i].grid_position) {
            throw GridMismatch("streams disagree on grid entry " + std::to_string(i));
        }
    }
    ConfusionCounts c;
    for (const auto& te : true_eps) {
        bool matched = false;
        for (const auto& pe : pred_eps) matched = matched || detail::episodes_overlap(te, pe);
        if (matched) {
            ++c.tp;
        } else {
            ++c.fn;
        }
    }
    for (const auto& pe : pred_eps) {
        bool matched = false;
        for (const auto& te : true_eps) matched = matched || detail::episodes_overlap(pe, te);
        if (!matched) ++c.fp;
    }
    auto inside_any = [](const std::vector<Episode>& eps, const WindowFlag& wf) {
        for (const auto& ep : eps) {
            if (ep.subject_id == wf.subject_id && wf.grid_position >= ep.start_index &&
                wf.grid_position <= ep.end_index) {
                return true;
            }
        }
        return false;
    };
    for (const auto& wf : pred_windows) {
        if (!inside_any(pred_eps, wf) && !inside_any(true_eps, wf)) ++c.tn;
    }
    return detail::report_from_counts(c, "episode");
}

// Tie order for equal scores; this is a quality ranking, not the channel
// storage order.
inline int channel_rank_priority(std::string_view channel) {
    if (channel == "AccV") return 0;
    if (channel == "AccAP") return 1;
    if (channel == "AccML") return 2;
    throw BadConfig("unknown channel name: " + std::string(channel));
}

struct RankedChannel {
    std::string channel;
    std::size_t model_index = 0;
    double test_f1 = 0.0;
};

struct ChannelRanking {
    std::vector<RankedChannel> entries;
};

inline ChannelRanking rank_channels(const std::vector<TrainedModel>& models) {
    ChannelRanking ranking;
    for (std::size_t i = 0; i < models.size(); ++i) {
        const auto& m = models[i];
        if (m.config.channels.size() != 1) {
            throw BadConfig("ranking requires single-channel models; model " +
                            std::to_string(i) + " has " +
                            std::to_string(m.config.channels.size()) + " channels");
        }
        if (!m.test_f1) {
            throw MissingF1("model " + std::to_string(i) + " (" + m.config.channels[0] +
                            ") has no test F1 recorded");
        }
        channel_rank_priority(m.config.channels[0]);
        ranking.entries.push_back({m.config.channels[0], i, *m.test_f1});
    }
    std::stable_sort(ranking.entries.begin(), ranking.entries.end(),
                     [](const RankedChannel& a, const RankedChannel& b) {
                         if (a.test_f1 != b.test_f1) return a.test_f1 > b.test_f1;
                         return channel_rank_priority(a.channel) <
                                channel_rank_priority(b.channel);
                     });
    return ranking;
}

struct InferenceResult {
    int prediction = 0;
    std::string channel_used;
};

// Walks the ranking, picks the first channel whose mask is functional in the
// window, and predicts with that channel's model. Models are instantiated on
// first use only, so a model whose channel never wins is never touched.
class FallbackInferencer {
  public:
    FallbackInferencer(ChannelRanking ranking, const std::vector<TrainedModel>& models)
        : ranking_(std::move(ranking)), models_(&models) {}

    InferenceResult infer(const Window& w) {
        for (const auto& entry : ranking_.entries) {
            int ch = channel_index(entry.channel);
            if (!w.channel_mask[static_cast<std::size_t>(ch)]) continue;
            auto& model = loaded(entry.model_index);
            WindowSet ws;
            ws.windows.push_back(w);
            auto ds = make_gaf_dataset(ws, model.config().channels, model.config().image_size,
                                       model.config().angle_source);
            auto preds = model.predict(ds);
            return {preds.at(0), entry.channel};
        }
        throw AllChannelsFailed("window " + w.subject_id + ":" +
                                std::to_string(w.start_index) +
                                " has no functional ranked channel");
    }

    // Channels whose model has been instantiated, in first-use order.
    const std::vector<std::string>& loaded_channels() const { return loaded_order_; }

  private:
    Model<float>& loaded(std::size_t index) {
        auto it = cache_.find(index);
        if (it == cache_.end()) {
            it = cache_.emplace(index, instantiate((*models_)[index])).first;
            loaded_order_.push_back((*models_)[index].config.channels[0]);
        }
        return it->second;
    }

    ChannelRanking ranking_;
    const std::vector<TrainedModel>* models_;
    std::map<std::size_t, Model<float>> cache_;
    std::vector<std::string> loaded_order_;
};

inline InferenceResult infer_with_fallback(const ChannelRanking& ranking,
                                           const std::vector<TrainedModel>& models,
                                           const Window& w) {
    FallbackInferencer inferencer(ranking, models);
    return inferencer.infer(w);
}

inline std::string report_to_csv(const EvalReport& r) {
    std::string out = "level,tp,fp,fn,tn,accuracy,precision,sensitivity,f1,fpr\n";
    out += r.level;
    out += ',';
    out += std::to_string(r.counts.tp) + ',' + std::to_string(r.counts.fp) + ',' +
           std::to_string(r.counts.fn) + ',' + std::to_string(r.counts.tn);
    for (const auto& v : {r.accuracy, r.precision, r.sensitivity, r.f1, r.fpr}) {
        out += ',';
        out += detail::format_optional(v);
    }
    out += '\n';
    return out;
}

inline std::string report_to_text(const EvalReport& r) {
    auto show = [](const std::optional<double>& v) {
        return v ? format_double(*v) : std::string("undefined");
    };
    std::string out;
    out += r.level + "-level report\n";
    out += "  tp " + std::to_string(r.counts.tp) + "  fp " + std::to_string(r.counts.fp) +
           "  fn " + std::to_string(r.counts.fn) + "  tn " + std::to_string(r.counts.tn) + "\n";
    out += "  accuracy    " + show(r.accuracy) + "\n";
    out += "  precision   " + show(r.precision) + "\n";
    out += "  sensitivity " + show(r.sensitivity) + "\n";
    out += "  f1          " + show(r.f1) + "\n";
    out += "  fpr         " + show(r.fpr) + "\n";
    return out;
}

inline std::string episodes_to_csv(const std::vector<Episode>& episodes) {
    std::string out = "subject,start,end\n";
    for (const auto& ep : episodes) {
        out += ep.subject_id + ',' + std::to_string(ep.start_index) + ',' +
               std::to_string(ep.end_index) + '\n';
    }
    return out;
}

}  // namespace fog
