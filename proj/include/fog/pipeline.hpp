#pragma once

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "fog/archive.hpp"
#include "fog/config.hpp"
#include "fog/error.hpp"
#include "fog/eval.hpp"
#include "fog/federated.hpp"
#include "fog/ingest.hpp"
#include "fog/model.hpp"
#include "fog/text.hpp"
#include "fog/windowing.hpp"

namespace fog {

// Command line shape: <command> [--config PATH] [--seed N] [--out DIR]
// [positional...]. Flag values override the config file.
struct CliArgs {
    std::string command;
    std::optional<std::string> config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::vector<std::string> positional;
};

inline CliArgs parse_cli_args(const std::vector<std::string>& args) {
    CliArgs out;
    if (args.empty()) return out;
    out.command = args[0];
    std::size_t i = 1;
    auto value_of = [&](const std::string& flag) -> const std::string& {
        if (i + 1 >= args.size()) throw BadConfig(flag + " needs a value");
        return args[++i];
    };
    for (; i < args.size(); ++i) {
        const std::string& a = args[i];
        if (a == "--config") {
            out.config_path = value_of(a);
        } else if (a == "--seed") {
            const std::string& v = value_of(a);
            std::uint64_t seed = 0;
            auto res = std::from_chars(v.data(), v.data() + v.size(), seed);
            if (res.ec != std::errc{} || res.ptr != v.data() + v.size()) {
                throw BadConfig("--seed needs a nonnegative integer, got \"" + v + "\"");
            }
            out.seed = seed;
        } else if (a == "--out") {
            out.out_dir = value_of(a);
        } else if (a.rfind("--", 0) == 0) {
            throw BadConfig("unknown flag \"" + a + "\"");
        } else {
            out.positional.push_back(a);
        }
    }
    return out;
}

namespace detail {

inline std::filesystem::path rep_dir(const RunConfig& cfg, int rep) {
    return std::filesystem::path(cfg.out_dir) / ("rep" + std::to_string(rep));
}

inline std::filesystem::path split_archive_dir(const RunConfig& cfg, int rep,
                                               const std::string& split) {
    return rep_dir(cfg, rep) / "archives" / split;
}

inline std::filesystem::path model_dir(const RunConfig& cfg, int rep, const std::string& tag) {
    return rep_dir(cfg, rep) / "models" / tag;
}

inline std::filesystem::path federated_dir(const RunConfig& cfg, int rep,
                                           const std::string& tag) {
    return rep_dir(cfg, rep) / "federated" / tag;
}

inline std::string format_seconds(double s) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", s);
    return std::string(buf);
}

// Windows regain per-recording label streams by concatenating each subject's
// recording through one segmentation function.
template <typename Segment>
inline WindowSet segment_cohort(const std::vector<LabeledRecording>& cohort,
                                const std::vector<std::string>& subjects,
                                const std::string& split_tag, Segment segment) {
    std::vector<Window> windows;
    for (const auto& rec : cohort) {
        if (!std::binary_search(subjects.begin(), subjects.end(), rec.subject_id)) continue;
        auto ws = segment(rec);
        windows.insert(windows.end(), std::make_move_iterator(ws.windows.begin()),
                       std::make_move_iterator(ws.windows.end()));
    }
    return make_window_set(std::move(windows), split_tag);
}

inline std::string class_count_row(const std::string& name, const WindowSet& ws) {
    auto [fog_n, nofog_n] = class_counts(ws);
    return name + "," + std::to_string(fog_n) + "," + std::to_string(nofog_n) + "\n";
}

}  // namespace detail

// Reads every raw recording, splits subjects, segments each split, and
// persists window plus image archives per repetition. Returns the number of
// repetitions written.
inline int cmd_preprocess(const RunConfig& cfg, std::ostream& log) {
    if (cfg.data_dir.empty()) throw BadConfig("preprocess needs data_dir");
    std::filesystem::path data_dir(cfg.data_dir);
    if (!std::filesystem::is_directory(data_dir)) {
        throw DataError("data_dir is not a directory: " + cfg.data_dir);
    }
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(data_dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".csv") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw DataError("no .csv recordings in " + cfg.data_dir);

    std::vector<LabeledRecording> cohort;
    std::vector<std::string> registry;
    for (const auto& path : files) {
        auto rec = consolidate_labels(load_recording_file(path, cfg.sample_rate_hz));
        if (cfg.downsample_factor > 1) rec = downsample(rec, cfg.downsample_factor);
        registry.push_back(rec.subject_id);
        cohort.push_back(std::move(rec));
    }
    log << "loaded " << cohort.size() << " recordings from " << cfg.data_dir << "\n";

    for (int r = 0; r < cfg.repetitions; ++r) {
        auto split = split_subjects(registry, cfg.seed + static_cast<std::uint64_t>(r), r,
                                    cfg.split);
        auto dhwt = [&](const LabeledRecording& rec) {
            return segment_dhwt(rec, cfg.window_length, cfg.missing_tolerance);
        };
        auto nonoverlap = [&](const LabeledRecording& rec) {
            return segment_nonoverlap(rec, cfg.window_length, cfg.missing_tolerance);
        };
        auto train = detail::segment_cohort(cohort, split.train_subjects, "train", dhwt);
        auto train_base =
            detail::segment_cohort(cohort, split.train_subjects, "train", nonoverlap);
        auto val = detail::segment_cohort(cohort, split.val_subjects, "val", nonoverlap);
        auto test = detail::segment_cohort(cohort, split.test_subjects, "test", nonoverlap);

        for (const auto* ws : {&train, &val, &test}) {
            write_window_archive(detail::split_archive_dir(cfg, r, ws->split_tag), *ws);
            write_gaf_archive(
                detail::split_archive_dir(cfg, r, ws->split_tag + "_gaf"),
                build_gaf_archive(*ws, cfg.image_size, cfg.angle_source));
        }

        std::string subjects_csv = "subject_id,split\n";
        for (const auto& s : split.train_subjects) subjects_csv += s + ",train\n";
        for (const auto& s : split.val_subjects) subjects_csv += s + ",val\n";
        for (const auto& s : split.test_subjects) subjects_csv += s + ",test\n";
        detail::write_file(detail::rep_dir(cfg, r) / "subjects.csv", subjects_csv);

        std::string counts = "split,fog_windows,no_fog_windows\n";
        counts += detail::class_count_row("train_nonoverlap", train_base);
        counts += detail::class_count_row("train", train);
        counts += detail::class_count_row("val", val);
        counts += detail::class_count_row("test", test);
        detail::write_file(detail::rep_dir(cfg, r) / "class_counts.csv", counts);

        auto [train_fog, train_nofog] = class_counts(train);
        log << "rep " << r << ": train " << train.size() << " windows (" << train_fog
            << " FOG, " << train_nofog << " no-FOG), val " << val.size() << ", test "
            << test.size() << "\n";
    }
    return cfg.repetitions;
}

// Trains every configured channel combination per repetition and persists
// weights, the epoch history, and a wall-clock timing log (the only output
// whose bytes may differ between identical runs).
inline int cmd_train(const RunConfig& cfg, std::ostream& log) {
    int trained = 0;
    for (int r = 0; r < cfg.repetitions; ++r) {
        auto train_ws = read_window_archive(detail::split_archive_dir(cfg, r, "train"));
        auto val_ws = read_window_archive(detail::split_archive_dir(cfg, r, "val"));
        for (const auto& combo : cfg.combinations) {
            auto mc = model_config_for(cfg, combo, r);
            auto tag = combination_tag(combo);

            std::string timing;
            auto t_start = std::chrono::steady_clock::now();
            auto t_last = t_start;
            auto on_epoch = [&](const EpochRecord& rec) {
                auto now = std::chrono::steady_clock::now();
                timing += "epoch " + std::to_string(rec.epoch) + " " +
                          detail::format_seconds(
                              std::chrono::duration<double>(now - t_last).count()) +
                          "s\n";
                t_last = now;
            };
            auto tm = train_model(mc, train_ws, val_ws, on_epoch);
            timing += "total " +
                      detail::format_seconds(std::chrono::duration<double>(
                                                 std::chrono::steady_clock::now() - t_start)
                                                 .count()) +
                      "s\n";

            auto dir = detail::model_dir(cfg, r, tag);
            std::filesystem::create_directories(dir);
            detail::write_file(dir / "weights.bin", save_weights(tm));
            detail::write_file(dir / "history.csv", history_to_csv(tm.history));
            detail::write_file(dir / "timing.log", timing);
            ++trained;

            log << "rep " << r << " model " << tag << ": " << tm.epochs_trained << " epochs";
            if (tm.val_accuracy) log << ", val_accuracy " << format_double(*tm.val_accuracy);
            if (tm.val_f1) log << ", val_f1 " << format_double(*tm.val_f1);
            log << "\n";
        }
    }
    return trained;
}

// Federated counterpart of cmd_train: partitions the training subjects into
// client shards, runs weighted averaging rounds, and persists the global
// model plus the per-round history.
inline int cmd_federate(const RunConfig& cfg, std::ostream& log) {
    int trained = 0;
    for (int r = 0; r < cfg.repetitions; ++r) {
        auto train_ws = read_window_archive(detail::split_archive_dir(cfg, r, "train"));
        auto val_ws = read_window_archive(detail::split_archive_dir(cfg, r, "val"));
        for (const auto& combo : cfg.combinations) {
            auto mc = model_config_for(cfg, combo, r);
            auto rc = cfg.federated;
            rc.seed = mc.seed;
            auto tag = combination_tag(combo);

            auto shards = partition_clients(train_ws, rc.num_clients, rc.seed);
            auto val_ds = make_gaf_dataset(val_ws, mc.channels, mc.image_size, mc.angle_source);
            Model<float> seed_model(mc);
            auto run = run_rounds(mc, rc, shards, seed_model.snapshot(), val_ds);

            TrainedModel tm;
            tm.config = mc;
            tm.tensors = run.global;
            tm.epochs_trained = rc.rounds * rc.local_epochs;
            if (val_ds.size() > 0) {
                Model<float> probe(mc);
                probe.restore(run.global);
                auto outcome = detail::binary_outcome(probe.predict(val_ds), val_ds.labels);
                tm.val_accuracy = outcome.accuracy;
                tm.val_f1 = outcome.f1;
            }

            auto dir = detail::federated_dir(cfg, r, tag);
            std::filesystem::create_directories(dir);
            detail::write_file(dir / "weights.bin", save_weights(tm));
            detail::write_file(dir / "rounds.csv", round_history_to_csv(run.history));
            ++trained;

            log << "rep " << r << " federated " << tag << ": " << rc.rounds << " rounds x "
                << rc.num_clients << " clients";
            if (tm.val_f1) log << ", val_f1 " << format_double(*tm.val_f1);
            log << "\n";
        }
    }
    return trained;
}

namespace detail {

// Window-grid flags for the dataset rows actually evaluated. Positions are
// start_index / window_length, which is exact only for non-overlapping
// archives.
struct EvalGrids {
    std::vector<WindowFlag> pred;
    std::vector<WindowFlag> truth;
};

inline EvalGrids eval_grids(const WindowSet& ws, const GafDataset& ds,
                            const std::vector<int>& preds) {
    EvalGrids grids;
    for (std::size_t k = 0; k < ds.size(); ++k) {
        const Window& w = ws.windows[ds.window_indices[k]];
        if (w.length < 1 || w.start_index % w.length != 0) {
            throw DataError("episode grid needs non-overlapping windows; got start " +
                            std::to_string(w.start_index) + " with length " +
                            std::to_string(w.length));
        }
        auto pos = static_cast<std::size_t>(w.start_index / w.length);
        grids.pred.push_back({w.subject_id, pos, preds[k]});
        grids.truth.push_back({w.subject_id, pos, ds.labels[k]});
    }
    return grids;
}

struct ModelEvaluation {
    EvalReport window_report;
    EvalReport episode_report;
    std::vector<Episode> predicted_episodes;
    std::size_t windows_evaluated = 0;
    std::size_t windows_skipped = 0;
};

inline ModelEvaluation evaluate_model(const TrainedModel& tm, const WindowSet& test_ws) {
    auto ds = make_gaf_dataset(test_ws, tm.config.channels, tm.config.image_size,
                               tm.config.angle_source);
    if (ds.size() == 0) throw DataError("no usable test windows for this channel combination");
    auto model = instantiate<float>(tm);
    auto preds = model.predict(ds, tm.config.batch_size);

    ModelEvaluation ev;
    ev.windows_evaluated = ds.size();
    ev.windows_skipped = ds.skipped;
    ev.window_report = window_metrics(preds, ds.labels);
    auto grids = eval_grids(test_ws, ds, preds);
    ev.predicted_episodes = merge_episodes(grids.pred);
    auto true_episodes = merge_episodes(grids.truth);
    ev.episode_report =
        episode_metrics(ev.predicted_episodes, true_episodes, grids.pred, grids.truth);
    return ev;
}

inline void write_evaluation(const std::filesystem::path& dir, const ModelEvaluation& ev) {
    std::filesystem::create_directories(dir);
    write_file(dir / "window_report.csv", report_to_csv(ev.window_report));
    write_file(dir / "episode_report.csv", report_to_csv(ev.episode_report));
    write_file(dir / "episodes.csv", episodes_to_csv(ev.predicted_episodes));
    write_file(dir / "report.txt",
               report_to_text(ev.window_report) + "\n" + report_to_text(ev.episode_report));
}

// Mean over repetitions of each window-level metric, skipping undefined
// values; a metric undefined in every repetition stays empty.
inline std::string summary_csv(
    const std::vector<std::string>& tags,
    const std::vector<std::vector<ModelEvaluation>>& per_tag_evals) {
    std::string out = "combination,repetitions,accuracy,precision,sensitivity,f1,fpr\n";
    for (std::size_t t = 0; t < tags.size(); ++t) {
        const auto& evals = per_tag_evals[t];
        out += tags[t] + "," + std::to_string(evals.size());
        auto mean_of = [&](auto field) {
            double sum = 0.0;
            int n = 0;
            for (const auto& ev : evals) {
                const auto& v = ev.window_report.*field;
                if (v) {
                    sum += *v;
                    ++n;
                }
            }
            return n > 0 ? std::optional<double>(sum / n) : std::nullopt;
        };
        for (auto field : {&EvalReport::accuracy, &EvalReport::precision,
                           &EvalReport::sensitivity, &EvalReport::f1, &EvalReport::fpr}) {
            auto m = mean_of(field);
            out += ",";
            if (m) out += format_double(*m);
        }
        out += "\n";
    }
    return out;
}

inline std::string ranking_csv(const ChannelRanking& ranking,
                               const std::vector<std::string>& weight_paths) {
    std::string out = "rank,channel,test_f1,weights\n";
    for (std::size_t i = 0; i < ranking.entries.size(); ++i) {
        const auto& e = ranking.entries[i];
        out += std::to_string(i + 1) + "," + e.channel + "," + format_double(e.test_f1) + "," +
               weight_paths[e.model_index] + "\n";
    }
    return out;
}

}  // namespace detail

// With no explicit model paths: evaluates every trained combination of every
// repetition on its test archive, writes per-model reports, ranks the
// single-channel models per repetition, and averages window metrics across
// repetitions. With explicit paths: evaluates those weight files against
// repetition 0's test archive.
inline int cmd_evaluate(const RunConfig& cfg, const std::vector<std::string>& model_paths,
                        std::ostream& log) {
    if (!model_paths.empty()) {
        auto test_ws = read_window_archive(detail::split_archive_dir(cfg, 0, "test"));
        int i = 0;
        for (const auto& path : model_paths) {
            auto tm = load_weights(detail::read_file(path));
            auto ev = detail::evaluate_model(tm, test_ws);
            auto dir = std::filesystem::path(cfg.out_dir) / "eval" /
                       ("adhoc" + std::to_string(i++));
            detail::write_evaluation(dir, ev);
            log << path << ": windows " << ev.windows_evaluated;
            if (ev.window_report.accuracy) {
                log << ", accuracy " << format_double(*ev.window_report.accuracy);
            }
            if (ev.window_report.f1) log << ", f1 " << format_double(*ev.window_report.f1);
            log << "\n";
        }
        return i;
    }

    std::vector<std::string> tags;
    for (const auto& combo : cfg.combinations) tags.push_back(combination_tag(combo));
    std::vector<std::vector<detail::ModelEvaluation>> per_tag_evals(tags.size());

    for (int r = 0; r < cfg.repetitions; ++r) {
        auto test_ws = read_window_archive(detail::split_archive_dir(cfg, r, "test"));
        std::vector<TrainedModel> single_channel_models;
        std::vector<std::string> single_channel_paths;
        for (std::size_t t = 0; t < tags.size(); ++t) {
            auto weights_path = detail::model_dir(cfg, r, tags[t]) / "weights.bin";
            auto tm = load_weights(detail::read_file(weights_path));
            auto ev = detail::evaluate_model(tm, test_ws);
            detail::write_evaluation(detail::rep_dir(cfg, r) / "eval" / tags[t], ev);

            log << "rep " << r << " model " << tags[t] << ": windows "
                << ev.windows_evaluated;
            if (ev.window_report.accuracy) {
                log << ", accuracy " << format_double(*ev.window_report.accuracy);
            }
            if (ev.window_report.f1) log << ", f1 " << format_double(*ev.window_report.f1);
            log << "\n";

            if (tm.config.channels.size() == 1) {
                tm.test_f1 = ev.window_report.f1;
                single_channel_models.push_back(std::move(tm));
                single_channel_paths.push_back("../models/" + tags[t] + "/weights.bin");
            }
            per_tag_evals[t].push_back(std::move(ev));
        }

        if (!single_channel_models.empty()) {
            bool complete = true;
            for (const auto& m : single_channel_models) complete = complete && m.test_f1;
            if (complete) {
                auto ranking = rank_channels(single_channel_models);
                detail::write_file(detail::rep_dir(cfg, r) / "eval" / "ranking.csv",
                                   detail::ranking_csv(ranking, single_channel_paths));
            } else {
                log << "rep " << r << ": ranking skipped, a model has undefined F1\n";
            }
        }
    }

    detail::write_file(std::filesystem::path(cfg.out_dir) / "summary.csv",
                       detail::summary_csv(tags, per_tag_evals));
    return cfg.repetitions * static_cast<int>(tags.size());
}

namespace detail {

struct RankedModelFile {
    std::string channel;
    double test_f1 = 0.0;
    std::string weights_path;
};

// ranking.csv rows resolve weight paths relative to the ranking file itself.
inline std::vector<RankedModelFile> parse_ranking_csv(const std::filesystem::path& path) {
    auto text = read_file(path);
    auto lines = split_lines(text);
    if (lines.empty() || lines[0] != "rank,channel,test_f1,weights") {
        throw DataError("ranking file header mismatch in " + path.string());
    }
    std::vector<RankedModelFile> out;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        auto cells = split_csv_line(lines[i]);
        if (cells.size() != 4) {
            throw DataError("ranking row " + std::to_string(i + 1) + " needs 4 cells");
        }
        RankedModelFile m;
        m.channel = std::string(cells[1]);
        m.test_f1 = parse_double(cells[2], "test_f1");
        std::filesystem::path w{std::string(cells[3])};
        m.weights_path = w.is_absolute() ? w.string() : (path.parent_path() / w).string();
        out.push_back(std::move(m));
    }
    if (out.empty()) throw DataError("ranking file lists no models: " + path.string());
    return out;
}

}  // namespace detail

// Streams every window of an archive through ranked fallback inference and
// prints one CSV row per window.
inline int cmd_infer(const RunConfig& cfg, const std::vector<std::string>& positional,
                     std::ostream& log) {
    (void)cfg;
    if (positional.size() != 2) {
        throw BadConfig("infer needs <ranking.csv> <window-archive-dir>");
    }
    auto ranked_files = detail::parse_ranking_csv(positional[0]);
    std::vector<TrainedModel> models;
    for (const auto& rf : ranked_files) {
        auto tm = load_weights(detail::read_file(rf.weights_path));
        tm.test_f1 = rf.test_f1;
        models.push_back(std::move(tm));
    }
    auto ranking = rank_channels(models);
    FallbackInferencer inferencer(ranking, models);

    auto ws = read_window_archive(positional[1]);
    log << "subject_id,start_index,prediction,channel_used\n";
    for (const auto& w : ws.windows) {
        auto res = inferencer.infer(w);
        log << w.subject_id << "," << w.start_index << "," << res.prediction << ","
            << res.channel_used << "\n";
    }
    return static_cast<int>(ws.size());
}

namespace detail {

struct WindowKey {
    std::string subject_id;
    std::int64_t start_index = 0;
};

inline WindowKey parse_window_key(const std::string& text) {
    auto colon = text.rfind(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == text.size()) {
        throw BadConfig("window key must be subject:start, got \"" + text + "\"");
    }
    WindowKey key;
    key.subject_id = text.substr(0, colon);
    key.start_index = parse_int(std::string_view(text).substr(colon + 1), "start_index");
    return key;
}

inline std::size_t find_row(const GafArchive& archive, const WindowKey& key) {
    for (std::size_t i = 0; i < archive.rows.size(); ++i) {
        if (archive.rows[i].subject_id == key.subject_id &&
            archive.rows[i].start_index == key.start_index) {
            return i;
        }
    }
    throw DataError("window key not found: " + key.subject_id + ":" +
                    std::to_string(key.start_index));
}

// Absolute difference of two planes as an 8-bit image: 0 maps to 0 and the
// largest possible gap (2.0) maps to 255.
inline std::vector<unsigned char> diff_pixels(const GafImage& a, const GafImage& b) {
    if (a.n != b.n) {
        throw ShapeMismatch("difference map needs equal sizes, got " + std::to_string(a.n) +
                            " and " + std::to_string(b.n));
    }
    std::vector<unsigned char> px(a.matrix.size());
    for (std::size_t i = 0; i < px.size(); ++i) {
        double d = std::abs(a.matrix[i] - b.matrix[i]) / 2.0;
        px[i] = static_cast<unsigned char>(std::lround(std::clamp(d, 0.0, 1.0) * 255.0));
    }
    return px;
}

}  // namespace detail

// Exports the stored image planes of the requested windows as grayscale
// PNGs; with exactly two keys it also writes per-channel difference maps.
inline int cmd_gaf_export(const RunConfig& cfg, const std::vector<std::string>& positional,
                          std::ostream& log) {
    if (positional.size() < 2) {
        throw BadConfig("gaf-export needs <gaf-archive-dir> <subject:start>...");
    }
    auto archive = read_gaf_archive(positional[0]);
    std::vector<std::size_t> rows;
    for (std::size_t i = 1; i < positional.size(); ++i) {
        rows.push_back(detail::find_row(archive, detail::parse_window_key(positional[i])));
    }

    auto out_dir = std::filesystem::path(cfg.out_dir) / "gaf_export";
    std::filesystem::create_directories(out_dir);
    int written = 0;
    for (auto row : rows) {
        const auto& meta = archive.rows[row];
        for (std::size_t c = 0; c < 3; ++c) {
            if (!meta.channel_mask[c]) continue;
            auto img = archive.image(row, c);
            auto name = meta.subject_id + "_" + std::to_string(meta.start_index) + "_" +
                        img.channel_name + ".png";
            auto png = export_png(img);
            detail::write_file(out_dir / name,
                               std::string(reinterpret_cast<const char*>(png.data()),
                                           png.size()));
            log << "wrote " << (out_dir / name).string() << "\n";
            ++written;
        }
    }

    if (rows.size() == 2) {
        const auto& ma = archive.rows[rows[0]];
        const auto& mb = archive.rows[rows[1]];
        for (std::size_t c = 0; c < 3; ++c) {
            if (!ma.channel_mask[c] || !mb.channel_mask[c]) continue;
            auto a = archive.image(rows[0], c);
            auto b = archive.image(rows[1], c);
            auto px = detail::diff_pixels(a, b);
            auto png = encode_png_gray8(a.n, a.n, px);
            auto name = "diff_" + ma.subject_id + "_" + std::to_string(ma.start_index) +
                        "_vs_" + mb.subject_id + "_" + std::to_string(mb.start_index) + "_" +
                        a.channel_name + ".png";
            detail::write_file(out_dir / name,
                               std::string(reinterpret_cast<const char*>(png.data()),
                                           png.size()));
            log << "wrote " << (out_dir / name).string() << "\n";
            ++written;
        }
    }
    return written;
}

inline const char* kCliUsage =
    "usage: fogpipe <command> [--config PATH] [--seed N] [--out DIR] [args...]\n"
    "\n"
    "commands:\n"
    "  preprocess                        build window and image archives from raw CSVs\n"
    "  train                             train configured channel combinations\n"
    "  federate                          federated training over client shards\n"
    "  evaluate [weights.bin...]         score models; rank channels; summarize\n"
    "  infer <ranking.csv> <archive>     ranked fallback inference over an archive\n"
    "  gaf-export <archive> <subj:start>...  export image planes as PNGs\n"
    "\n"
    "flags override the config file; exit codes: 0 ok, 1 config, 2 data, 3 inference\n";

// Single process entry point. Maps the error hierarchy onto stable exit
// codes: 1 configuration, 2 data, 3 inference.
inline int run_cli(const std::vector<std::string>& raw, std::ostream& out, std::ostream& err) {
    try {
        auto args = parse_cli_args(raw);
        if (args.command.empty()) {
            err << kCliUsage;
            return 1;
        }
        if (args.command == "help" || args.command == "--help") {
            out << kCliUsage;
            return 0;
        }
        RunConfig cfg;
        if (args.config_path) cfg = load_run_config(*args.config_path);
        if (args.seed) cfg.seed = *args.seed;
        if (args.out_dir) cfg.out_dir = *args.out_dir;

        if (args.command == "preprocess") {
            cmd_preprocess(cfg, out);
        } else if (args.command == "train") {
            cmd_train(cfg, out);
        } else if (args.command == "federate") {
            cmd_federate(cfg, out);
        } else if (args.command == "evaluate") {
            cmd_evaluate(cfg, args.positional, out);
        } else if (args.command == "infer") {
            cmd_infer(cfg, args.positional, out);
        } else if (args.command == "gaf-export") {
            cmd_gaf_export(cfg, args.positional, out);
        } else {
            throw BadConfig("unknown command \"" + args.command + "\"");
        }
        return 0;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return 1;
    } catch (const InferenceError& e) {
        err << "inference error: " << e.what() << "\n";
        return 3;
    } catch (const DataError& e) {
        err << "data error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace fog
