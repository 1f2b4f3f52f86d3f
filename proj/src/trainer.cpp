#include "motsp/trainer.hpp"

#include <cmath>
#include <fstream>
#include <memory>

#include "json.hpp"

namespace motsp {

long TrainConfig::total_iterations() const {
    if (iterations_override > 0) return iterations_override;
    return (static_cast<long>(epochs) * instances_per_epoch) / batch;
}

std::vector<long> TrainConfig::budget_split() const {
    const long total = total_iterations();
    const int N = subproblems;
    if (N == 1) return {total};
    long first = std::lround(warm_share * static_cast<double>(total));
    first = std::max<long>(1, std::min(first, total - (N - 1)));
    long rest = total - first;
    long base = rest / (N - 1);
    long extra = rest % (N - 1);
    std::vector<long> budgets(N, base);
    budgets[0] = first;
    for (long i = 0; i < extra; ++i) budgets[1 + i] += 1;
    return budgets;
}

void TrainConfig::validate() const {
    if (subproblems < 1) throw ConfigError("train config: subproblems must be >= 1");
    if (batch < 1) throw ConfigError("train config: batch must be >= 1");
    if (!(lr > 0.0)) throw ConfigError("train config: learning rate must be positive");
    if (n_train < 2) throw ConfigError("train config: n_train must be >= 2");
    if (d_h < 1) throw ConfigError("train config: d_h must be >= 1");
    if (warm_share <= 0.0 || warm_share > 1.0) throw ConfigError("train config: warm_share must be in (0,1]");
    if (total_iterations() < subproblems)
        throw ConfigError("train config: total iterations (" + std::to_string(total_iterations()) +
                          ") must cover all " + std::to_string(subproblems) + " subproblems");
    family_specs(family);  // throws on unknown family
    if (first_city < 0 || first_city >= n_train) throw ConfigError("train config: first_city out of range");
}

std::vector<Instance> sample_instances(Rng& rng, const std::string& family, int n, int T) {
    if (T < 1) throw ConfigError("sample_instances: T must be >= 1");
    std::vector<ObjectiveSpec> specs = family_specs(family);
    int d = 0;
    for (const auto& s : specs) d += s.feature_width;
    std::vector<Instance> out;
    out.reserve(T);
    for (int t = 0; t < T; ++t) {
        Instance inst;
        inst.n = n;
        inst.M = static_cast<int>(specs.size());
        inst.d_input = d;
        inst.specs = specs;
        inst.features.resize(static_cast<size_t>(n) * d);
        for (double& v : inst.features) v = rng.uniform();
        out.push_back(std::move(inst));
    }
    return out;
}

double reward(const Instance& instance, const Tour& tour, const WeightVector& lambda) {
    return -weighted_sum(lambda, evaluate_tour(instance, tour));
}

SubproblemModel actor_critic_train(SubproblemModel model, const TrainConfig& config,
                                   long iterations, Rng& rng, const ProgressFn& progress) {
    auto actor_params = model.actor.parameters();
    auto critic_params = model.critic.parameters();
    AdamState actor_adam = AdamState::init(config.lr, actor_params);
    AdamState critic_adam = AdamState::init(config.lr, critic_params);
    const double inv_T = 1.0 / config.batch;

    for (long iter = 1; iter <= iterations; ++iter) {
        std::vector<Instance> batch = sample_instances(rng, config.family, config.n_train, config.batch);
        zero_grads(actor_params);
        zero_grads(critic_params);

        double reward_sum = 0.0;
        double critic_loss_sum = 0.0;

        if (!config.whiten) {
            for (const Instance& inst : batch) {
                Graph g;
                int first = config.random_first_city ? rng.uniform_int(inst.n) : config.first_city;
                TrainRollout ro = rollout_training(g, model.actor, inst, DecodeMode::sample, &rng, first);
                auto V_ref = critic_value_training(g, model.critic, inst);
                double R = reward(inst, ro.tour, model.lambda);
                double V = g.scalar(V_ref);
                double adv = R - V;
                reward_sum += R;
                critic_loss_sum += adv * adv;
                auto actor_loss = g.affine(ro.log_prob, -adv * inv_T, 0.0);
                auto diff = g.affine(V_ref, 1.0, -R);
                auto critic_loss = g.affine(g.mul(diff, diff), inv_T, 0.0);
                g.backward(g.add(actor_loss, critic_loss));
            }
        } else {
            // Whitening needs all advantages before the backward pass; graphs
            // are kept alive for the batch (desk-scale memory).
            std::vector<std::unique_ptr<Graph>> graphs;
            std::vector<TrainRollout> rollouts;
            std::vector<Graph::Ref> v_refs;
            std::vector<double> rewards(batch.size()), values(batch.size());
            for (size_t k = 0; k < batch.size(); ++k) {
                graphs.push_back(std::make_unique<Graph>());
                Graph& g = *graphs.back();
                int first = config.random_first_city ? rng.uniform_int(batch[k].n) : config.first_city;
                rollouts.push_back(rollout_training(g, model.actor, batch[k], DecodeMode::sample, &rng, first));
                v_refs.push_back(critic_value_training(g, model.critic, batch[k]));
                rewards[k] = reward(batch[k], rollouts[k].tour, model.lambda);
                values[k] = g.scalar(v_refs[k]);
                reward_sum += rewards[k];
            }
            double mean = 0.0, sq = 0.0;
            for (size_t k = 0; k < batch.size(); ++k) mean += rewards[k] - values[k];
            mean /= static_cast<double>(batch.size());
            for (size_t k = 0; k < batch.size(); ++k) {
                double d = rewards[k] - values[k] - mean;
                sq += d * d;
            }
            double sd = std::sqrt(sq / static_cast<double>(batch.size())) + 1e-8;
            for (size_t k = 0; k < batch.size(); ++k) {
                Graph& g = *graphs[k];
                double adv = rewards[k] - values[k];
                critic_loss_sum += adv * adv;
                double white = (adv - mean) / sd;
                auto actor_loss = g.affine(rollouts[k].log_prob, -white * inv_T, 0.0);
                auto diff = g.affine(v_refs[k], 1.0, -rewards[k]);
                auto critic_loss = g.affine(g.mul(diff, diff), inv_T, 0.0);
                g.backward(g.add(actor_loss, critic_loss));
            }
        }

        double mean_reward = reward_sum * inv_T;
        double critic_loss = critic_loss_sum * inv_T;
        if (!std::isfinite(mean_reward) || !std::isfinite(critic_loss))
            throw TrainingError("actor_critic_train: non-finite loss at iteration " + std::to_string(iter));

        clip_gradients(actor_params, config.grad_clip);
        clip_gradients(critic_params, config.grad_clip);
        adam_step(actor_adam, actor_params);
        adam_step(critic_adam, critic_params);

        TrainLogEntry entry{0, iter, mean_reward, critic_loss};
        model.log.push_back(entry);
        if (progress) progress(entry);
    }
    return model;
}

ModelBank train_drlmoa(const TrainConfig& config, const ProgressFn& progress, const TrainHooks& hooks) {
    config.validate();
    ModelBank bank;
    bank.config = config;
    bank.specs = family_specs(config.family);
    bank.M = static_cast<int>(bank.specs.size());
    bank.d_input = 0;
    for (const auto& s : bank.specs) bank.d_input += s.feature_width;

    std::vector<WeightVector> weights = generate_weights(config.subproblems, bank.M);
    std::vector<long> budgets = config.budget_split();

    for (int i = 0; i < config.subproblems; ++i) {
        SubproblemModel model;
        model.lambda = weights[i];
        if (i == 0 || !config.transfer) {
            Rng init_rng(mix_seed(config.seed, 500 + i));
            model.actor = ActorParams::init(init_rng, config.d_h, bank.d_input);
            model.critic = CriticParams::init(init_rng, bank.d_input);
        } else {
            model.actor = bank.models[i - 1].actor;
            model.critic = bank.models[i - 1].critic;
            model.log.clear();
        }
        if (hooks.on_subproblem_start) hooks.on_subproblem_start(i, model);

        Rng train_rng(mix_seed(config.seed, 1000 + i));
        ProgressFn tagged;
        if (progress)
            tagged = [&progress, i](const TrainLogEntry& e) {
                TrainLogEntry copy = e;
                copy.subproblem = i;
                progress(copy);
            };
        model = actor_critic_train(std::move(model), config, budgets[i], train_rng, tagged);
        for (TrainLogEntry& e : model.log) e.subproblem = i;
        bank.models.push_back(std::move(model));
    }
    return bank;
}

ParetoArchive infer_front(const ModelBank& bank, const Instance& instance) {
    if (instance.d_input != bank.d_input)
        throw ConfigError("infer_front: instance D_input (" + std::to_string(instance.d_input) +
                          ") does not match the bank (" + std::to_string(bank.d_input) + ")");
    for (double v : instance.features)
        if (v < 0.0 || v > 1.0)
            throw ConfigError("infer_front: instance features must be normalized to [0,1]");
    std::vector<ArchiveEntry> entries;
    entries.reserve(bank.models.size());
    for (size_t i = 0; i < bank.models.size(); ++i) {
        RolloutResult r = rollout(bank.models[i].actor, instance, DecodeMode::greedy, nullptr,
                                  bank.config.first_city);
        ArchiveEntry e;
        e.objectives = evaluate_tour(instance, r.tour);
        e.tour = std::move(r.tour);
        e.origin = static_cast<int>(i);
        entries.push_back(std::move(e));
    }
    return nondominated_filter(entries);
}

namespace {

std::string checkpoint_name(int i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "sub_%03d.ckpt", i);
    return buf;
}

nlohmann::json config_to_json(const TrainConfig& c) {
    return {{"subproblems", c.subproblems},
            {"batch", c.batch},
            {"lr", c.lr},
            {"epochs", c.epochs},
            {"instances_per_epoch", c.instances_per_epoch},
            {"iterations_override", c.iterations_override},
            {"n_train", c.n_train},
            {"d_h", c.d_h},
            {"seed", c.seed},
            {"family", c.family},
            {"warm_share", c.warm_share},
            {"transfer", c.transfer},
            {"whiten", c.whiten},
            {"grad_clip", c.grad_clip},
            {"first_city", c.first_city},
            {"random_first_city", c.random_first_city}};
}

TrainConfig config_from_json(const nlohmann::json& j) {
    TrainConfig c;
    c.subproblems = j.at("subproblems").get<int>();
    c.batch = j.at("batch").get<int>();
    c.lr = j.at("lr").get<double>();
    c.epochs = j.at("epochs").get<int>();
    c.instances_per_epoch = j.at("instances_per_epoch").get<long>();
    c.iterations_override = j.at("iterations_override").get<long>();
    c.n_train = j.at("n_train").get<int>();
    c.d_h = j.at("d_h").get<int>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.family = j.at("family").get<std::string>();
    c.warm_share = j.at("warm_share").get<double>();
    c.transfer = j.at("transfer").get<bool>();
    c.whiten = j.at("whiten").get<bool>();
    c.grad_clip = j.at("grad_clip").get<double>();
    c.first_city = j.at("first_city").get<int>();
    c.random_first_city = j.at("random_first_city").get<bool>();
    return c;
}

}  // namespace

void save_model_bank(const std::filesystem::path& dir, const ModelBank& bank) {
    std::filesystem::create_directories(dir);
    nlohmann::json manifest;
    manifest["version"] = 1;
    manifest["N"] = static_cast<int>(bank.models.size());
    manifest["M"] = bank.M;
    manifest["d_input"] = bank.d_input;
    manifest["d_h"] = bank.config.d_h;
    manifest["family"] = bank.config.family;
    manifest["seed"] = bank.config.seed;
    manifest["config"] = config_to_json(bank.config);
    nlohmann::json lambdas = nlohmann::json::array();
    nlohmann::json names = nlohmann::json::array();
    for (size_t i = 0; i < bank.models.size(); ++i) {
        lambdas.push_back(bank.models[i].lambda);
        names.push_back(checkpoint_name(static_cast<int>(i)));
        CheckpointMeta meta;
        meta.d_h = bank.config.d_h;
        meta.d_input = bank.d_input;
        meta.M = bank.M;
        meta.specs = bank.specs;
        meta.lambda = bank.models[i].lambda;
        save_checkpoint(dir / checkpoint_name(static_cast<int>(i)), bank.models[i].actor,
                        bank.models[i].critic, meta);
    }
    manifest["lambdas"] = lambdas;
    manifest["checkpoints"] = names;
    std::ofstream out(dir / "manifest.json");
    if (!out) throw IoError("save_model_bank: cannot write manifest in '" + dir.string() + "'");
    out << manifest.dump(2) << "\n";
}

ModelBank load_model_bank(const std::filesystem::path& dir) {
    std::ifstream in(dir / "manifest.json");
    if (!in) throw IoError("load_model_bank: missing manifest.json in '" + dir.string() + "'");
    nlohmann::json manifest;
    try {
        in >> manifest;
    } catch (const std::exception& e) {
        throw IoError(std::string("load_model_bank: manifest parse failure: ") + e.what());
    }
    ModelBank bank;
    bank.config = config_from_json(manifest.at("config"));
    bank.M = manifest.at("M").get<int>();
    bank.d_input = manifest.at("d_input").get<int>();
    const auto& names = manifest.at("checkpoints");
    for (size_t i = 0; i < names.size(); ++i) {
        Checkpoint ckpt = load_checkpoint(dir / names[i].get<std::string>());
        if (i == 0) bank.specs = ckpt.meta.specs;
        if (ckpt.meta.M != bank.M || ckpt.meta.d_input != bank.d_input)
            throw IoError("load_model_bank: checkpoint '" + names[i].get<std::string>() +
                          "' metadata conflicts with manifest");
        SubproblemModel m;
        m.lambda = ckpt.meta.lambda;
        m.actor = std::move(ckpt.actor);
        m.critic = std::move(ckpt.critic);
        bank.models.push_back(std::move(m));
    }
    if (static_cast<int>(bank.models.size()) != manifest.at("N").get<int>())
        throw IoError("load_model_bank: checkpoint count does not match manifest N");
    return bank;
}

}  // namespace motsp
