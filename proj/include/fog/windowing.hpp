#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "fog/error.hpp"
#include "fog/ingest.hpp"
#include "fog/numeric.hpp"

namespace fog {

// One fixed-length slice of a recording. data rows follow kChannelNames
// order; channel_mask[c] is true when channel c is functional (missing
// fraction within tolerance). label == 1 requires fog_fraction > 0.5,
// label == 0 requires fog_fraction == 0.
struct Window {
    std::string subject_id;
    std::int64_t start_index = 0;
    int length = 0;
    std::array<std::vector<double>, 3> data;
    int label = 0;
    double fog_fraction = 0.0;
    std::array<bool, 3> channel_mask = {true, true, true};
};

// Ordered window collection for one split. Sorted by (subject_id,
// start_index) with no duplicate keys.
struct WindowSet {
    std::vector<Window> windows;
    std::string split_tag;

    std::size_t size() const { return windows.size(); }
};

namespace detail {

// Builds a window at [start, start+len) from a recording. Channels whose
// missing fraction exceeds the tolerance are non-functional and keep their
// missing samples as NaN; functional channels with missing samples (only
// possible under a nonzero tolerance) have them filled with the mean of the
// present samples so downstream math never sees NaN.
inline Window cut_window(const LabeledRecording& rec, std::size_t start, int len, int label,
                         double fog_fraction, double missing_tolerance) {
    Window w;
    w.subject_id = rec.subject_id;
    w.start_index = static_cast<std::int64_t>(start);
    w.length = len;
    w.label = label;
    w.fog_fraction = fog_fraction;
    for (std::size_t c = 0; c < 3; ++c) {
        const auto& ch = rec.channels[c];
        auto& out = w.data[c];
        out.assign(ch.values.begin() + static_cast<std::ptrdiff_t>(start),
                   ch.values.begin() + static_cast<std::ptrdiff_t>(start + len));
        int missing = 0;
        for (std::size_t i = start; i < start + static_cast<std::size_t>(len); ++i) {
            missing += ch.missing[i];
        }
        w.channel_mask[c] =
            static_cast<double>(missing) <= missing_tolerance * static_cast<double>(len);
        if (w.channel_mask[c] && missing > 0) {
            double present_sum = 0.0;
            for (double v : out) {
                if (!std::isnan(v)) present_sum += v;
            }
            double fill = present_sum / static_cast<double>(len - missing);
            for (double& v : out) {
                if (std::isnan(v)) v = fill;
            }
        }
    }
    return w;
}

inline std::size_t count_fog(const LabeledRecording& rec, std::size_t start, int len) {
    std::size_t count = 0;
    for (std::size_t i = start; i < start + static_cast<std::size_t>(len); ++i) {
        count += rec.label[i];
    }
    return count;
}

}  // namespace detail

// Differential hopping segmentation for training data. Candidates are taken
// at stride len/2 across the whole recording; a candidate is kept
//   - with label 1 when its FOG fraction exceeds 1/2 (strict majority, so an
//     exact tie is discarded), or
//   - with label 0 when its FOG fraction is 0 and its start lies on the
//     stride-len grid.
// Everything else is impure and dropped. Net effect: no-FOG regions tile
// with 0% overlap, FOG regions with 50% overlap.
inline WindowSet segment_dhwt(const LabeledRecording& rec, int window_len = 256,
                              double missing_tolerance = 0.0) {
    if (window_len < 2 || window_len % 2 != 0) {
        throw BadConfig("window length must be even and positive, got " +
                        std::to_string(window_len));
    }
    if (rec.size() < static_cast<std::size_t>(window_len)) {
        throw RecordingTooShort("recording " + rec.subject_id + " has " +
                                std::to_string(rec.size()) + " samples, need " +
                                std::to_string(window_len));
    }
    std::size_t len = static_cast<std::size_t>(window_len);
    std::size_t stride = len / 2;
    WindowSet out;
    for (std::size_t start = 0; start + len <= rec.size(); start += stride) {
        std::size_t fog = detail::count_fog(rec, start, window_len);
        if (2 * fog > len) {
            out.windows.push_back(detail::cut_window(
                rec, start, window_len, 1, static_cast<double>(fog) / static_cast<double>(len),
                missing_tolerance));
        } else if (fog == 0 && start % len == 0) {
            out.windows.push_back(
                detail::cut_window(rec, start, window_len, 0, 0.0, missing_tolerance));
        }
    }
    return out;
}

// Non-overlapping segmentation for validation and test data: candidates at
// stride len, kept under the same purity rules as segment_dhwt (majority FOG
// becomes label 1, untouched regions become label 0, the rest is dropped).
inline WindowSet segment_nonoverlap(const LabeledRecording& rec, int window_len = 256,
                                    double missing_tolerance = 0.0) {
    if (window_len < 1) {
        throw BadConfig("window length must be positive, got " + std::to_string(window_len));
    }
    if (rec.size() < static_cast<std::size_t>(window_len)) {
        throw RecordingTooShort("recording " + rec.subject_id + " has " +
                                std::to_string(rec.size()) + " samples, need " +
                                std::to_string(window_len));
    }
    std::size_t len = static_cast<std::size_t>(window_len);
    WindowSet out;
    for (std::size_t start = 0; start + len <= rec.size(); start += len) {
        std::size_t fog = detail::count_fog(rec, start, window_len);
        if (2 * fog > len) {
            out.windows.push_back(detail::cut_window(
                rec, start, window_len, 1, static_cast<double>(fog) / static_cast<double>(len),
                missing_tolerance));
        } else if (fog == 0) {
            out.windows.push_back(
                detail::cut_window(rec, start, window_len, 0, 0.0, missing_tolerance));
        }
    }
    return out;
}

// Two-pass mean removal per functional channel: the second pass subtracts
// the residual mean left by rounding, so the centered sum stays below 1e-12
// even for long windows. Non-functional channels are untouched.
inline Window center_window(Window w) {
    for (std::size_t c = 0; c < 3; ++c) {
        if (!w.channel_mask[c]) continue;
        auto& x = w.data[c];
        if (x.empty()) continue;
        for (int pass = 0; pass < 2; ++pass) {
            double mu = compensated_sum(x) / static_cast<double>(x.size());
            for (double& v : x) v -= mu;
        }
    }
    return w;
}

inline std::pair<std::size_t, std::size_t> class_counts(const WindowSet& ws) {
    std::size_t n_fog = 0;
    for (const auto& w : ws.windows) n_fog += static_cast<std::size_t>(w.label == 1);
    return {n_fog, ws.windows.size() - n_fog};
}

// Assembles windows from many recordings into one ordered set. Windows are
// keyed by (subject_id, start_index); duplicates mean the same region was
// segmented twice and are rejected.
inline WindowSet make_window_set(std::vector<Window> windows, std::string split_tag) {
    std::sort(windows.begin(), windows.end(), [](const Window& a, const Window& b) {
        if (a.subject_id != b.subject_id) return a.subject_id < b.subject_id;
        return a.start_index < b.start_index;
    });
    for (std::size_t i = 1; i < windows.size(); ++i) {
        if (windows[i].subject_id == windows[i - 1].subject_id &&
            windows[i].start_index == windows[i - 1].start_index) {
            throw DataError("duplicate window key (" + windows[i].subject_id + ", " +
                            std::to_string(windows[i].start_index) + ")");
        }
    }
    WindowSet out;
    out.windows = std::move(windows);
    out.split_tag = std::move(split_tag);
    return out;
}

}  // namespace fog
