#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "motsp/core.hpp"
#include "motsp/pointer_net.hpp"

namespace motsp {

struct TrainConfig {
    int subproblems = 100;  // N
    int batch = 200;        // T
    double lr = 1e-4;
    int epochs = 5;
    long instances_per_epoch = 100000;
    long iterations_override = 0;  // > 0: total Adam iterations across all subproblems
    int n_train = 40;
    int d_h = 128;
    std::uint64_t seed = 1;
    std::string family = "euclidean";
    double warm_share = 0.2;  // share of the budget spent on the first subproblem
    bool transfer = true;     // neighborhood parameter transfer (ablation switch)
    bool whiten = false;      // optional advantage whitening
    double grad_clip = 0.0;   // global-norm clip, 0 = off
    int first_city = 0;
    bool random_first_city = false;  // randomize rho_1 during training

    long total_iterations() const;
    /// Per-subproblem iteration budgets: warm-start share for the first, rest
    /// split evenly (deterministic remainder distribution).
    std::vector<long> budget_split() const;
    void validate() const;
};

struct TrainLogEntry {
    int subproblem = 0;
    long iteration = 0;
    double mean_reward = 0.0;
    double critic_loss = 0.0;
};

struct SubproblemModel {
    WeightVector lambda;
    ActorParams actor;
    CriticParams critic;
    std::vector<TrainLogEntry> log;
};

struct ModelBank {
    TrainConfig config;
    int d_input = 0;
    int M = 0;
    std::vector<ObjectiveSpec> specs;
    std::vector<SubproblemModel> models;
};

/// T instances with i.i.d. uniform [0,1] features and the family's specs.
std::vector<Instance> sample_instances(Rng& rng, const std::string& family, int n, int T);

/// R = -g^ws(tour | lambda): negative weighted-sum cost, higher is better.
double reward(const Instance& instance, const Tour& tour, const WeightVector& lambda);

using ProgressFn = std::function<void(const TrainLogEntry&)>;

/// Actor-critic training of one subproblem for `iterations` batches: sampled
/// rollouts, advantage (R - V) weighted log-prob ascent for the actor, mean
/// squared error descent for the critic, both via Adam.
SubproblemModel actor_critic_train(SubproblemModel model, const TrainConfig& config,
                                   long iterations, Rng& rng, const ProgressFn& progress = {});

struct TrainHooks {
    /// Called with each subproblem's parameters before its training starts
    /// (after transfer / fresh initialization).
    std::function<void(int, const SubproblemModel&)> on_subproblem_start;
};

/// Algorithm 1: Xavier-initialize the first subproblem, train it, then walk
/// the weight grid transferring each optimized parameter set to the next
/// subproblem as its starting point.
ModelBank train_drlmoa(const TrainConfig& config, const ProgressFn& progress = {},
                       const TrainHooks& hooks = {});

/// Greedy rollout of every subproblem model on a normalized instance,
/// filtered to the non-dominated set. Entries keep their subproblem index in
/// `origin`.
ParetoArchive infer_front(const ModelBank& bank, const Instance& instance);

/// Directory persistence: manifest.json plus one checkpoint per subproblem.
void save_model_bank(const std::filesystem::path& dir, const ModelBank& bank);
ModelBank load_model_bank(const std::filesystem::path& dir);

}  // namespace motsp
