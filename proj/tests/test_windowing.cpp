#include "fog/windowing.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdint>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "fog/rng.hpp"

namespace {

fog::LabeledRecording make_rec(std::vector<std::uint8_t> labels, const std::string& subject = "s") {
    fog::LabeledRecording rec;
    rec.subject_id = subject;
    rec.sample_rate_hz = 64;
    std::size_t n = labels.size();
    rec.label = std::move(labels);
    fog::Rng rng(fog::derive_seed(17, subject));
    for (auto& ch : rec.channels) {
        ch.values.resize(n);
        ch.missing.assign(n, 0);
        for (auto& v : ch.values) v = rng.uniform(-10, 10);
    }
    return rec;
}

std::vector<std::uint8_t> run_labels(std::size_t n_zero_then_one, std::size_t n_total) {
    std::vector<std::uint8_t> l(n_total, 1);
    for (std::size_t i = 0; i < n_zero_then_one; ++i) l[i] = 0;
    return l;
}

// Independent keep-rule evaluation over explicitly enumerated candidates,
// written against the stated rules rather than sharing segment_dhwt's loop.
struct ExpectedWindow {
    std::size_t start;
    int label;
};
std::vector<ExpectedWindow> brute_force_dhwt(const std::vector<std::uint8_t>& labels,
                                             std::size_t len) {
    std::vector<ExpectedWindow> out;
    for (std::size_t start = 0; start + len <= labels.size(); start += len / 2) {
        std::size_t ones = 0;
        for (std::size_t i = start; i < start + len; ++i) ones += labels[i];
        double frac = static_cast<double>(ones) / static_cast<double>(len);
        if (frac > 0.5) {
            out.push_back({start, 1});
        } else if (ones == 0 && start % len == 0) {
            out.push_back({start, 0});
        }
    }
    return out;
}

TEST(SegmentDhwt, AllNoFogTilesWithoutOverlap) {
    auto ws = fog::segment_dhwt(make_rec(std::vector<std::uint8_t>(1024, 0)));
    ASSERT_EQ(ws.size(), 4u);
    std::vector<std::int64_t> starts;
    for (const auto& w : ws.windows) {
        EXPECT_EQ(w.label, 0);
        EXPECT_EQ(w.fog_fraction, 0.0);
        starts.push_back(w.start_index);
    }
    EXPECT_EQ(starts, (std::vector<std::int64_t>{0, 256, 512, 768}));
}

TEST(SegmentDhwt, AllFogTilesWithHalfOverlap) {
    auto ws = fog::segment_dhwt(make_rec(std::vector<std::uint8_t>(1024, 1)));
    ASSERT_EQ(ws.size(), 7u);
    std::vector<std::int64_t> starts;
    for (const auto& w : ws.windows) {
        EXPECT_EQ(w.label, 1);
        EXPECT_EQ(w.fog_fraction, 1.0);
        starts.push_back(w.start_index);
    }
    EXPECT_EQ(starts, (std::vector<std::int64_t>{0, 128, 256, 384, 512, 640, 768}));
}

TEST(SegmentDhwt, LowFractionWindowDiscarded) {
    // 77 of 256 samples are FOG: fraction just above 0.3, neither pure nor
    // majority, so the only candidate is dropped.
    std::vector<std::uint8_t> labels(256, 0);
    for (std::size_t i = 0; i < 77; ++i) labels[i] = 1;
    auto ws = fog::segment_dhwt(make_rec(labels));
    EXPECT_EQ(ws.size(), 0u);
}

TEST(SegmentDhwt, ExactTieDiscarded) {
    // Labels: 512 zeros then 512 ones. Candidate at 384 covers exactly 128
    // FOG samples of 256: a tie, which strict majority discards.
    auto ws = fog::segment_dhwt(make_rec(run_labels(512, 1024)));
    std::vector<std::int64_t> fog_starts, nofog_starts;
    for (const auto& w : ws.windows) {
        (w.label == 1 ? fog_starts : nofog_starts).push_back(w.start_index);
    }
    EXPECT_EQ(nofog_starts, (std::vector<std::int64_t>{0, 256}));
    EXPECT_EQ(fog_starts, (std::vector<std::int64_t>{512, 640, 768}));
}

TEST(SegmentDhwt, HalfAlignedPureZeroDiscarded) {
    // A pure no-FOG candidate off the stride-256 grid must not be emitted:
    // zeros tile without overlap.
    std::vector<std::uint8_t> labels(640, 0);
    for (std::size_t i = 384; i < 640; ++i) labels[i] = 1;
    auto ws = fog::segment_dhwt(make_rec(labels));
    // Candidates: 0 (pure 0, aligned), 128 (pure 0, unaligned), 256 (frac
    // 0.5 tie), 384 (pure 1).
    ASSERT_EQ(ws.size(), 2u);
    EXPECT_EQ(ws.windows[0].start_index, 0);
    EXPECT_EQ(ws.windows[0].label, 0);
    EXPECT_EQ(ws.windows[1].start_index, 384);
    EXPECT_EQ(ws.windows[1].label, 1);
}

TEST(SegmentDhwt, TooShortRecordingRejected) {
    EXPECT_THROW(fog::segment_dhwt(make_rec(std::vector<std::uint8_t>(255, 0))),
                 fog::RecordingTooShort);
}

TEST(SegmentDhwt, OddWindowLengthRejected) {
    EXPECT_THROW(fog::segment_dhwt(make_rec(std::vector<std::uint8_t>(1024, 0)), 255),
                 fog::BadConfig);
}

TEST(SegmentDhwt, MatchesBruteForceOnRandomLabelRuns) {
    fog::Rng rng(77);
    for (int trial = 0; trial < 50; ++trial) {
        // Random run-structured labels, mimicking episodic data.
        std::vector<std::uint8_t> labels;
        std::uint8_t cur = 0;
        while (labels.size() < 2048) {
            std::size_t run = 64 + rng.below(700);
            labels.insert(labels.end(), run, cur);
            cur = static_cast<std::uint8_t>(1 - cur);
        }
        labels.resize(2048);
        auto expected = brute_force_dhwt(labels, 256);
        auto ws = fog::segment_dhwt(make_rec(labels));
        ASSERT_EQ(ws.size(), expected.size()) << "trial " << trial;
        for (std::size_t i = 0; i < expected.size(); ++i) {
            EXPECT_EQ(static_cast<std::size_t>(ws.windows[i].start_index), expected[i].start);
            EXPECT_EQ(ws.windows[i].label, expected[i].label);
        }
    }
}

// Every emitted window satisfies the purity contract, and windows never
// cross the recording boundary.
TEST(SegmentDhwt, PurityAndBoundaryInvariants) {
    fog::Rng rng(123);
    for (int trial = 0; trial < 30; ++trial) {
        std::size_t n = 256 + rng.below(3000);
        std::vector<std::uint8_t> labels(n);
        for (auto& l : labels) l = static_cast<std::uint8_t>(rng.below(2));
        auto ws = fog::segment_dhwt(make_rec(labels));
        for (const auto& w : ws.windows) {
            EXPECT_EQ(w.length, 256);
            EXPECT_LE(w.start_index + 256, static_cast<std::int64_t>(n));
            if (w.label == 1) {
                EXPECT_GT(w.fog_fraction, 0.5);
            } else {
                EXPECT_EQ(w.fog_fraction, 0.0);
            }
        }
    }
}

TEST(SegmentDhwt, FogWindowCountFormulaForAllFogRecording) {
    fog::Rng rng(55);
    for (int trial = 0; trial < 30; ++trial) {
        std::size_t len = 256 + rng.below(4000);
        auto ws = fog::segment_dhwt(make_rec(std::vector<std::uint8_t>(len, 1)));
        EXPECT_EQ(ws.size(), (len - 256) / 128 + 1);
    }
}

TEST(SegmentDhwt, NoFogWindowCountFormula) {
    fog::Rng rng(56);
    for (int trial = 0; trial < 30; ++trial) {
        std::size_t len = 256 + rng.below(4000);
        auto ws = fog::segment_dhwt(make_rec(std::vector<std::uint8_t>(len, 0)));
        EXPECT_EQ(ws.size(), len / 256);
    }
}

TEST(SegmentDhwt, MissingSamplesMarkChannelNonFunctional) {
    auto rec = make_rec(std::vector<std::uint8_t>(512, 0));
    rec.channels[1].values[300] = std::numeric_limits<double>::quiet_NaN();
    rec.channels[1].missing[300] = 1;
    auto ws = fog::segment_dhwt(rec);
    ASSERT_EQ(ws.size(), 2u);
    EXPECT_TRUE(ws.windows[0].channel_mask[1]);
    EXPECT_FALSE(ws.windows[1].channel_mask[1]);
    EXPECT_TRUE(ws.windows[1].channel_mask[0]);
    EXPECT_TRUE(ws.windows[1].channel_mask[2]);
}

TEST(SegmentDhwt, MissingToleranceFillsAndKeepsChannel) {
    auto rec = make_rec(std::vector<std::uint8_t>(256, 0));
    rec.channels[0].values[10] = std::numeric_limits<double>::quiet_NaN();
    rec.channels[0].missing[10] = 1;
    auto ws = fog::segment_dhwt(rec, 256, 0.01);
    ASSERT_EQ(ws.size(), 1u);
    EXPECT_TRUE(ws.windows[0].channel_mask[0]);
    for (double v : ws.windows[0].data[0]) EXPECT_FALSE(std::isnan(v));
}

TEST(SegmentNonoverlap, MajorityKeepRulesAtFullStride) {
    // 512 zeros then 512 ones: candidates 0,256 pure zero; 512,768 pure one.
    auto ws = fog::segment_nonoverlap(make_rec(run_labels(512, 1024)));
    ASSERT_EQ(ws.size(), 4u);
    EXPECT_EQ(ws.windows[0].label, 0);
    EXPECT_EQ(ws.windows[1].label, 0);
    EXPECT_EQ(ws.windows[2].label, 1);
    EXPECT_EQ(ws.windows[3].label, 1);
    std::vector<std::int64_t> starts;
    for (const auto& w : ws.windows) starts.push_back(w.start_index);
    EXPECT_EQ(starts, (std::vector<std::int64_t>{0, 256, 512, 768}));
}

TEST(SegmentNonoverlap, MajorityFogCandidateKept) {
    // 320 zeros then 704 ones. Candidate [256,512) covers FOG samples
    // [320,512): 192 of 256, fraction 0.75, kept as label 1. Candidate
    // [0,256) is pure zero; [512,768) and [768,1024) are pure one.
    std::vector<std::uint8_t> labels = run_labels(320, 1024);
    auto ws = fog::segment_nonoverlap(make_rec(labels));
    ASSERT_EQ(ws.size(), 4u);
    EXPECT_EQ(ws.windows[0].start_index, 0);
    EXPECT_EQ(ws.windows[0].label, 0);
    EXPECT_EQ(ws.windows[1].start_index, 256);
    EXPECT_EQ(ws.windows[1].label, 1);
    EXPECT_DOUBLE_EQ(ws.windows[1].fog_fraction, 0.75);
    EXPECT_EQ(ws.windows[2].label, 1);
    EXPECT_EQ(ws.windows[3].label, 1);
}

TEST(SegmentNonoverlap, MinorityFogCandidateDiscarded) {
    // 192 zeros then 64 ones then zeros: candidate [0,256) has fraction
    // 0.25, impure in both directions, dropped.
    std::vector<std::uint8_t> labels(512, 0);
    for (std::size_t i = 192; i < 256; ++i) labels[i] = 1;
    auto ws = fog::segment_nonoverlap(make_rec(labels));
    ASSERT_EQ(ws.size(), 1u);
    EXPECT_EQ(ws.windows[0].start_index, 256);
    EXPECT_EQ(ws.windows[0].label, 0);
}

TEST(CenterWindow, ConstantChannelBecomesZero) {
    fog::Window w;
    w.length = 4;
    for (auto& ch : w.data) ch = {5, 5, 5, 5};
    auto out = fog::center_window(w);
    for (const auto& ch : out.data) {
        for (double v : ch) EXPECT_DOUBLE_EQ(v, 0.0);
    }
}

TEST(CenterWindow, ToyArithmetic) {
    fog::Window w;
    w.length = 3;
    for (auto& ch : w.data) ch = {1, 2, 3};
    auto out = fog::center_window(w);
    for (const auto& ch : out.data) {
        EXPECT_DOUBLE_EQ(ch[0], -1.0);
        EXPECT_DOUBLE_EQ(ch[1], 0.0);
        EXPECT_DOUBLE_EQ(ch[2], 1.0);
    }
}

TEST(CenterWindow, CenteredSumBelowTolerance) {
    fog::Rng rng(31);
    for (int trial = 0; trial < 100; ++trial) {
        fog::Window w;
        w.length = 256;
        for (auto& ch : w.data) {
            ch.resize(256);
            for (auto& v : ch) v = rng.uniform(-10, 10);
        }
        auto out = fog::center_window(w);
        for (const auto& ch : out.data) {
            double sum = 0.0;
            for (double v : ch) sum += v;
            EXPECT_LT(std::abs(sum), 1e-12);
        }
    }
}

TEST(CenterWindow, Idempotent) {
    fog::Rng rng(32);
    fog::Window w;
    w.length = 256;
    for (auto& ch : w.data) {
        ch.resize(256);
        for (auto& v : ch) v = rng.uniform(-100, 100);
    }
    auto once = fog::center_window(w);
    auto twice = fog::center_window(once);
    for (std::size_t c = 0; c < 3; ++c) {
        for (std::size_t i = 0; i < 256; ++i) {
            EXPECT_NEAR(twice.data[c][i], once.data[c][i], 1e-12);
        }
    }
}

TEST(CenterWindow, NonFunctionalChannelUntouched) {
    fog::Window w;
    w.length = 3;
    for (auto& ch : w.data) ch = {1, 2, 3};
    w.channel_mask = {true, false, true};
    auto out = fog::center_window(w);
    EXPECT_DOUBLE_EQ(out.data[1][0], 1.0);
    EXPECT_DOUBLE_EQ(out.data[1][1], 2.0);
    EXPECT_DOUBLE_EQ(out.data[1][2], 3.0);
    EXPECT_DOUBLE_EQ(out.data[0][0], -1.0);
}

TEST(ClassCounts, EmptyAndMixed) {
    fog::WindowSet empty;
    EXPECT_EQ(fog::class_counts(empty), (std::pair<std::size_t, std::size_t>{0, 0}));

    auto all_fog = fog::segment_dhwt(make_rec(std::vector<std::uint8_t>(1024, 1)));
    EXPECT_EQ(fog::class_counts(all_fog), (std::pair<std::size_t, std::size_t>{7, 0}));

    // Two FOG runs: [512,1024) and [1536,2048); zeros elsewhere.
    std::vector<std::uint8_t> labels(2048, 0);
    for (std::size_t i = 512; i < 1024; ++i) labels[i] = 1;
    for (std::size_t i = 1536; i < 2048; ++i) labels[i] = 1;
    auto expected = brute_force_dhwt(labels, 256);
    std::size_t exp_fog = 0;
    for (const auto& e : expected) exp_fog += static_cast<std::size_t>(e.label == 1);
    auto ws = fog::segment_dhwt(make_rec(labels));
    auto counts = fog::class_counts(ws);
    EXPECT_EQ(counts.first, exp_fog);
    EXPECT_EQ(counts.second, expected.size() - exp_fog);
}

TEST(MakeWindowSet, SortsBydSubjectThenStart) {
    std::vector<fog::Window> windows;
    fog::Window w;
    w.length = 1;
    for (auto& ch : w.data) ch = {0};
    w.subject_id = "b";
    w.start_index = 0;
    windows.push_back(w);
    w.subject_id = "a";
    w.start_index = 256;
    windows.push_back(w);
    w.subject_id = "a";
    w.start_index = 0;
    windows.push_back(w);
    auto ws = fog::make_window_set(std::move(windows), "train");
    EXPECT_EQ(ws.split_tag, "train");
    EXPECT_EQ(ws.windows[0].subject_id, "a");
    EXPECT_EQ(ws.windows[0].start_index, 0);
    EXPECT_EQ(ws.windows[1].subject_id, "a");
    EXPECT_EQ(ws.windows[1].start_index, 256);
    EXPECT_EQ(ws.windows[2].subject_id, "b");
}

TEST(MakeWindowSet, DuplicateKeyRejected) {
    std::vector<fog::Window> windows(2);
    for (auto& w : windows) {
        w.subject_id = "a";
        w.start_index = 128;
    }
    EXPECT_THROW(fog::make_window_set(std::move(windows), "train"), fog::DataError);
}

}  // namespace
