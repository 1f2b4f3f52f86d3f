#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "motsp/core.hpp"
#include "motsp/tensor.hpp"

namespace motsp {

/// Pointer-network actor: per-city affine encoder, single-layer GRU decoder
/// and an additive attention head that points at the next city.
struct ActorParams {
    int d_h = 0;
    int d_input = 0;
    Tensor enc_W, enc_b;            // d_h x D_input, d_h
    GruParams gru;                  // all d_h-sized
    Tensor att_v, att_W1, att_W2;   // d_h, d_h x d_h, d_h x d_h
    Tensor g0;                      // learnable decoder start token

    static ActorParams init(Rng& rng, int d_h, int d_input);
    std::vector<Tensor*> parameters();
    std::vector<std::pair<std::string, const Tensor*>> named_parameters() const;
    std::vector<std::pair<std::string, Tensor*>> named_parameters();
};

/// Critic: four per-city affine layers D_input -> 128 -> 20 -> 20 -> 1 with
/// shared parameters across cities; per-city outputs summed into V.
struct CriticParams {
    int d_input = 0;
    Tensor W1, b1, W2, b2, W3, b3, W4, b4;

    static CriticParams init(Rng& rng, int d_input);
    std::vector<Tensor*> parameters();
    std::vector<std::pair<std::string, const Tensor*>> named_parameters() const;
    std::vector<std::pair<std::string, Tensor*>> named_parameters();
};

Tensor features_tensor(const Instance& instance);

/// Per-city embeddings e_1..e_n (n x d_h); no cross-city interaction.
Tensor encode(const ActorParams& params, const Instance& instance);

/// Selection distribution over cities at one decoding step: softmax of
/// u_j = v . tanh(W1 e_j + W2 d_t) over unvisited cities, exactly 0 elsewhere.
Tensor attention_probs(const ActorParams& params, const Tensor& d_t, const Tensor& e,
                       const std::vector<bool>& visited);

enum class DecodeMode { sample, greedy };

struct DecoderState {
    Tensor hidden;              // GRU hidden, zeros at start
    std::vector<bool> visited;
    Tour partial;
    double log_prob = 0.0;
    int gru_steps = 0;

    bool complete() const { return partial.size() == static_cast<int>(visited.size()); }
};

/// State after fixing the first city (no probability is charged for it).
DecoderState decoder_start(const Instance& instance, int first_city = 0);

/// Advance one step: the GRU consumes the previously selected city's
/// embedding (the learnable g0 on the first step), attention selects the next
/// city by sampling or greedy argmax (ties to the lowest index). Returns the
/// selected city. `rng` may be null in greedy mode.
int decode_step(const ActorParams& params, DecoderState& state, const Tensor& e, DecodeMode mode,
                Rng* rng);

/// Advance one step with the next city forced (used for likelihood evaluation).
void decode_forced(const ActorParams& params, DecoderState& state, const Tensor& e, int city);

struct RolloutResult {
    Tour tour;
    double log_prob = 0.0;
};

/// Full tour construction; first city is fixed (default 0), remaining cities
/// chosen by the policy. Greedy mode is deterministic.
RolloutResult rollout(const ActorParams& params, const Instance& instance, DecodeMode mode,
                      Rng* rng, int first_city = 0);

/// Log-probability the policy assigns to a given tour (tour[0] is the fixed
/// first city).
double forced_log_prob(const ActorParams& params, const Instance& instance, const Tour& tour);

/// Critic forward: per-city stack summed over cities.
double critic_value(const CriticParams& params, const Instance& instance);

// --- training path (tape-recorded versions of the above) -------------------

struct TrainRollout {
    Tour tour;
    Graph::Ref log_prob;
};

/// Rollout recorded on a graph so that d(log_prob)/d(actor) is available.
/// When `forced` is given its cities are taken instead of sampling.
TrainRollout rollout_training(Graph& g, ActorParams& params, const Instance& instance,
                              DecodeMode mode, Rng* rng, int first_city = 0,
                              const Tour* forced = nullptr);

Graph::Ref critic_value_training(Graph& g, CriticParams& params, const Instance& instance);

// --- checkpoint serialization ----------------------------------------------

struct CheckpointMeta {
    int d_h = 0;
    int d_input = 0;
    int M = 0;
    std::vector<ObjectiveSpec> specs;
    WeightVector lambda;
};

struct Checkpoint {
    CheckpointMeta meta;
    ActorParams actor;
    CriticParams critic;
};

/// Container file: text header line, JSON directory (names/shapes/offsets,
/// CRC32) and a little-endian float32 payload. Round-trips bit-exactly at
/// stored precision.
void save_checkpoint(const std::filesystem::path& path, const ActorParams& actor,
                     const CriticParams& critic, const CheckpointMeta& meta);

Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace motsp
