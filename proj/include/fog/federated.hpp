#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fog/error.hpp"
#include "fog/model.hpp"
#include "fog/rng.hpp"
#include "fog/weights.hpp"
#include "fog/windowing.hpp"

namespace fog {

// One simulated client's training data: a subject-disjoint slice of the
// training window set. n_k is the window count and drives FedAvg weighting.
struct ClientShard {
    int client_id = 0;
    std::vector<std::string> subjects;
    WindowSet windows;
    std::size_t n_k = 0;
};

struct RoundConfig {
    int num_clients = 5;
    int local_epochs = 2;
    int rounds = 30;
    std::uint64_t seed = 0;
};

inline void validate_round_config(const RoundConfig& cfg) {
    if (cfg.num_clients < 1) throw BadConfig("num_clients must be at least 1");
    if (cfg.local_epochs < 1) throw BadConfig("local_epochs must be at least 1");
    if (cfg.rounds < 1) throw BadConfig("rounds must be at least 1");
}

// Subjects are shuffled under the seed and dealt round-robin, so shard sizes
// differ by at most one subject and the assignment is reproducible.
inline std::vector<ClientShard> partition_clients(const WindowSet& ws, int k,
                                                  std::uint64_t seed) {
    if (k < 1) throw BadConfig("client count must be at least 1");
    std::vector<std::string> subjects;
    for (const auto& w : ws.windows) subjects.push_back(w.subject_id);
    std::sort(subjects.begin(), subjects.end());
    subjects.erase(std::unique(subjects.begin(), subjects.end()), subjects.end());
    if (subjects.size() < static_cast<std::size_t>(k)) {
        throw TooFewSubjects("need at least " + std::to_string(k) + " subjects to fill " +
                             std::to_string(k) + " client shards, got " +
                             std::to_string(subjects.size()));
    }
    Rng rng(derive_seed(seed, "partition"));
    rng.shuffle(subjects);

    std::vector<ClientShard> shards(static_cast<std::size_t>(k));
    for (int c = 0; c < k; ++c) {
        shards[static_cast<std::size_t>(c)].client_id = c;
        shards[static_cast<std::size_t>(c)].windows.split_tag = ws.split_tag;
    }
    for (std::size_t i = 0; i < subjects.size(); ++i) {
        shards[i % static_cast<std::size_t>(k)].subjects.push_back(subjects[i]);
    }
    for (auto& shard : shards) {
        std::sort(shard.subjects.begin(), shard.subjects.end());
        for (const auto& w : ws.windows) {
            if (std::binary_search(shard.subjects.begin(), shard.subjects.end(),
                                   w.subject_id)) {
                shard.windows.windows.push_back(w);
            }
        }
        shard.n_k = shard.windows.windows.size();
    }
    return shards;
}

struct LocalUpdate {
    std::vector<NamedTensor> params;
    std::size_t n_k = 0;
    std::vector<double> epoch_losses;
};

// Trains a copy of the global parameters on one shard. Optimizer state starts
// fresh each call; the caller controls the training stream via train_seed.
inline LocalUpdate local_update(const ModelConfig& cfg, const std::vector<NamedTensor>& global,
                                const ClientShard& shard, int local_epochs,
                                std::uint64_t train_seed) {
    if (shard.windows.windows.empty()) {
        throw EmptyShard("client " + std::to_string(shard.client_id) + " holds no windows");
    }
    auto ds = make_gaf_dataset(shard.windows, cfg.channels, cfg.image_size, cfg.angle_source);
    if (ds.size() == 0) {
        throw EmptyShard("client " + std::to_string(shard.client_id) +
                         " has no usable windows (all " + std::to_string(ds.skipped) +
                         " skipped)");
    }
    Model<float> model(cfg);
    model.restore(global);
    LocalUpdate out;
    int adam_t = 0;
    out.epoch_losses = run_epochs(model, ds, 0, local_epochs, train_seed, adam_t);
    out.params = model.snapshot();
    out.n_k = shard.n_k;
    return out;
}

struct WeightedUpdate {
    std::vector<NamedTensor> params;
    double n_k = 0.0;
};

// Element-wise weighted mean with double accumulation in the given list
// order. Weights only enter as ratios, so scaling every n_k by a common
// factor leaves the result unchanged.
inline std::vector<NamedTensor> fedavg(const std::vector<WeightedUpdate>& updates) {
    if (updates.empty()) throw EmptyUpdateList("fedavg requires at least one update");
    double total = 0.0;
    for (const auto& u : updates) total += u.n_k;
    if (total <= 0.0) throw EmptyUpdateList("fedavg weights sum to zero");

    const auto& first = updates[0].params;
    for (const auto& u : updates) {
        if (u.params.size() != first.size()) {
            throw ShapeMismatch("update tensor counts differ: " +
                                std::to_string(u.params.size()) + " vs " +
                                std::to_string(first.size()));
        }
        for (std::size_t t = 0; t < first.size(); ++t) {
            if (u.params[t].name != first[t].name ||
                !u.params[t].tensor.same_shape(first[t].tensor)) {
                throw ShapeMismatch("update tensor " + std::to_string(t) +
                                    " disagrees in name or shape");
            }
        }
    }

    std::vector<NamedTensor> out = first;
    for (std::size_t t = 0; t < out.size(); ++t) {
        std::vector<double> acc(out[t].tensor.size(), 0.0);
        for (const auto& u : updates) {
            double w = u.n_k / total;
            const auto& v = u.params[t].tensor.v;
            for (std::size_t i = 0; i < acc.size(); ++i) {
                acc[i] += w * static_cast<double>(v[i]);
            }
        }
        for (std::size_t i = 0; i < acc.size(); ++i) {
            out[t].tensor.v[i] = static_cast<float>(acc[i]);
        }
    }
    return out;
}

struct RoundRecord {
    int round = 0;
    int client_id = 0;
    std::size_t n_k = 0;
    double local_loss = 0.0;
    std::optional<double> global_val_f1;
};

struct FederatedRun {
    std::vector<NamedTensor> global;
    std::vector<RoundRecord> history;
};

// rounds x (broadcast, local update per client, weighted average). Clients
// aggregate in ascending client_id order so the result is bit-stable; the
// local training stream is keyed by (seed, round, client_id).
inline FederatedRun run_rounds(const ModelConfig& model_cfg, const RoundConfig& round_cfg,
                               const std::vector<ClientShard>& shards,
                               const std::vector<NamedTensor>& init,
                               const GafDataset& val_ds) {
    validate_round_config(round_cfg);
    if (shards.size() != static_cast<std::size_t>(round_cfg.num_clients)) {
        throw BadConfig("config names " + std::to_string(round_cfg.num_clients) +
                        " clients but " + std::to_string(shards.size()) +
                        " shards were supplied");
    }
    std::vector<const ClientShard*> ordered;
    for (const auto& s : shards) ordered.push_back(&s);
    std::stable_sort(ordered.begin(), ordered.end(),
                     [](const ClientShard* a, const ClientShard* b) {
                         return a->client_id < b->client_id;
                     });

    FederatedRun run;
    run.global = init;
    for (int r = 0; r < round_cfg.rounds; ++r) {
        std::vector<WeightedUpdate> updates;
        std::vector<RoundRecord> round_rows;
        for (const ClientShard* shard : ordered) {
            std::uint64_t seed =
                derive_seed(round_cfg.seed, "train", static_cast<std::uint64_t>(r),
                            static_cast<std::uint64_t>(shard->client_id));
            auto lu = local_update(model_cfg, run.global, *shard, round_cfg.local_epochs, seed);
            RoundRecord row;
            row.round = r;
            row.client_id = shard->client_id;
            row.n_k = lu.n_k;
            row.local_loss = lu.epoch_losses.back();
            round_rows.push_back(row);
            updates.push_back({std::move(lu.params), static_cast<double>(lu.n_k)});
        }
        run.global = fedavg(updates);
        if (val_ds.size() > 0) {
            Model<float> probe(model_cfg);
            probe.restore(run.global);
            auto outcome = detail::binary_outcome(probe.predict(val_ds), val_ds.labels);
            for (auto& row : round_rows) row.global_val_f1 = outcome.f1;
        }
        for (auto& row : round_rows) run.history.push_back(row);
    }
    return run;
}

inline std::string round_history_to_csv(const std::vector<RoundRecord>& history) {
    std::string out = "round,client_id,n_k,local_loss,global_val_f1\n";
    for (const auto& row : history) {
        out += std::to_string(row.round);
        out += ',';
        out += std::to_string(row.client_id);
        out += ',';
        out += std::to_string(row.n_k);
        out += ',';
        out += format_double(row.local_loss);
        out += ',';
        out += detail::format_optional(row.global_val_f1);
        out += '\n';
    }
    return out;
}

}  // namespace fog
