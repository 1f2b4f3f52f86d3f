#include "motsp/pointer_net.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <fstream>

#include "json.hpp"
#include "motsp/kernels.hpp"

namespace motsp {

ActorParams ActorParams::init(Rng& rng, int d_h, int d_input) {
    if (d_h < 1 || d_input < 1) throw DomainError("ActorParams: d_h and d_input must be positive");
    ActorParams p;
    p.d_h = d_h;
    p.d_input = d_input;
    p.enc_W = xavier_init(rng, {d_h, d_input});
    p.enc_b = Tensor({d_h});
    p.gru = gru_init(rng, d_h);
    p.att_v = Tensor({d_h});
    p.att_W1 = xavier_init(rng, {d_h, d_h});
    p.att_W2 = xavier_init(rng, {d_h, d_h});
    p.g0 = Tensor({d_h});
    return p;
}

std::vector<Tensor*> ActorParams::parameters() {
    return {&enc_W, &enc_b, &gru.Wz, &gru.Uz, &gru.bz, &gru.Wr, &gru.Ur, &gru.br,
            &gru.Wh, &gru.Uh, &gru.bh, &att_v, &att_W1, &att_W2, &g0};
}

std::vector<std::pair<std::string, Tensor*>> ActorParams::named_parameters() {
    return {{"actor.enc_W", &enc_W},   {"actor.enc_b", &enc_b},   {"actor.gru.Wz", &gru.Wz},
            {"actor.gru.Uz", &gru.Uz}, {"actor.gru.bz", &gru.bz}, {"actor.gru.Wr", &gru.Wr},
            {"actor.gru.Ur", &gru.Ur}, {"actor.gru.br", &gru.br}, {"actor.gru.Wh", &gru.Wh},
            {"actor.gru.Uh", &gru.Uh}, {"actor.gru.bh", &gru.bh}, {"actor.att_v", &att_v},
            {"actor.att_W1", &att_W1}, {"actor.att_W2", &att_W2}, {"actor.g0", &g0}};
}

std::vector<std::pair<std::string, const Tensor*>> ActorParams::named_parameters() const {
    auto mut = const_cast<ActorParams*>(this)->named_parameters();
    return {mut.begin(), mut.end()};
}

CriticParams CriticParams::init(Rng& rng, int d_input) {
    if (d_input < 1) throw DomainError("CriticParams: d_input must be positive");
    CriticParams p;
    p.d_input = d_input;
    p.W1 = xavier_init(rng, {128, d_input});
    p.b1 = Tensor({128});
    p.W2 = xavier_init(rng, {20, 128});
    p.b2 = Tensor({20});
    p.W3 = xavier_init(rng, {20, 20});
    p.b3 = Tensor({20});
    p.W4 = xavier_init(rng, {1, 20});
    p.b4 = Tensor({1});
    return p;
}

std::vector<Tensor*> CriticParams::parameters() {
    return {&W1, &b1, &W2, &b2, &W3, &b3, &W4, &b4};
}

std::vector<std::pair<std::string, Tensor*>> CriticParams::named_parameters() {
    return {{"critic.W1", &W1}, {"critic.b1", &b1}, {"critic.W2", &W2}, {"critic.b2", &b2},
            {"critic.W3", &W3}, {"critic.b3", &b3}, {"critic.W4", &W4}, {"critic.b4", &b4}};
}

std::vector<std::pair<std::string, const Tensor*>> CriticParams::named_parameters() const {
    auto mut = const_cast<CriticParams*>(this)->named_parameters();
    return {mut.begin(), mut.end()};
}

Tensor features_tensor(const Instance& instance) {
    Tensor t({instance.n, instance.d_input});
    t.data = instance.features;
    return t;
}

Tensor encode(const ActorParams& params, const Instance& instance) {
    if (instance.d_input != params.d_input) throw DomainError("encode: instance D_input mismatch");
    return embed_cities(params.enc_W, params.enc_b, features_tensor(instance));
}

namespace {

// u_j = v . tanh(w1e_j + q) for unvisited j; w1e rows precomputed.
void attention_scores(const Tensor& v, const Tensor& w1e, const double* q,
                      const std::vector<bool>& visited, double* u) {
    const int n = w1e.rows();
    const int d = w1e.cols();
    for (int j = 0; j < n; ++j) {
        if (visited[j]) {
            u[j] = 0.0;
            continue;
        }
        const double* row = w1e.data.data() + static_cast<size_t>(j) * d;
        double acc = 0.0;
        for (int k = 0; k < d; ++k) acc += v[k] * fast_tanh(row[k] + q[k]);
        u[j] = acc;
    }
}

int count_unvisited(const std::vector<bool>& visited) {
    int c = 0;
    for (bool b : visited)
        if (!b) ++c;
    return c;
}

int select_city(const Tensor& probs, const std::vector<bool>& visited, DecodeMode mode, Rng* rng) {
    const int n = probs.size();
    if (mode == DecodeMode::greedy) {
        int best = -1;
        double best_p = -1.0;
        for (int j = 0; j < n; ++j) {
            if (visited[j]) continue;
            if (probs[j] > best_p) {
                best_p = probs[j];
                best = j;
            }
        }
        return best;
    }
    if (rng == nullptr) throw DomainError("decode: sampling requires an rng");
    return rng->categorical(std::span<const double>(probs.data.data(), probs.data.size()));
}

Tensor precompute_w1e(const ActorParams& params, const Tensor& e) {
    const int n = e.rows(), d = params.d_h;
    Tensor w1e({n, d});
    for (int i = 0; i < n; ++i)
        matvec(params.att_W1.data.data(), e.data.data() + static_cast<size_t>(i) * d,
               w1e.data.data() + static_cast<size_t>(i) * d, d, d);
    return w1e;
}

}  // namespace

Tensor attention_probs(const ActorParams& params, const Tensor& d_t, const Tensor& e,
                       const std::vector<bool>& visited) {
    const int n = e.rows();
    if (static_cast<int>(visited.size()) != n) throw DomainError("attention_probs: mask length mismatch");
    if (d_t.size() != params.d_h || e.cols() != params.d_h)
        throw DomainError("attention_probs: shape mismatch");
    if (count_unvisited(visited) == 0) throw DomainError("attention_probs: all cities visited");
    Tensor w1e = precompute_w1e(params, e);
    std::vector<double> q(params.d_h);
    matvec(params.att_W2.data.data(), d_t.data.data(), q.data(), params.d_h, params.d_h);
    Tensor u({n});
    attention_scores(params.att_v, w1e, q.data(), visited, u.data.data());
    return softmax(u, visited);
}

DecoderState decoder_start(const Instance& instance, int first_city) {
    if (first_city < 0 || first_city >= instance.n) throw DomainError("decoder_start: first city out of range");
    DecoderState s;
    s.hidden = Tensor({1});  // resized by first decode_step; d_h unknown here
    s.visited.assign(instance.n, false);
    s.visited[first_city] = true;
    s.partial.order.push_back(first_city);
    return s;
}

namespace {

// Shared one-step core for decode_step / decode_forced.
int step_core(const ActorParams& params, DecoderState& state, const Tensor& e, DecodeMode mode,
              Rng* rng, int forced_city) {
    if (state.complete()) throw DomainError("decode_step: decoding already complete");
    if (e.rows() != static_cast<int>(state.visited.size()) || e.cols() != params.d_h)
        throw DomainError("decode_step: embedding shape mismatch");
    if (state.gru_steps == 0) state.hidden = Tensor({params.d_h});
    Tensor input;
    if (state.gru_steps == 0) {
        input = params.g0;
    } else {
        int last = state.partial.order.back();
        input = Tensor({params.d_h});
        std::copy_n(e.data.data() + static_cast<size_t>(last) * params.d_h, params.d_h,
                    input.data.data());
    }
    Tensor d_t = gru_cell(params.gru, input, state.hidden);
    Tensor probs = attention_probs(params, d_t, e, state.visited);
    int city = forced_city;
    if (city < 0) {
        city = select_city(probs, state.visited, mode, rng);
    } else if (city >= static_cast<int>(state.visited.size()) || state.visited[city]) {
        throw DomainError("decode_forced: city invalid or already visited");
    }
    state.hidden = std::move(d_t);
    state.visited[city] = true;
    state.partial.order.push_back(city);
    state.log_prob += std::log(probs[city]);
    state.gru_steps += 1;
    return city;
}

}  // namespace

int decode_step(const ActorParams& params, DecoderState& state, const Tensor& e, DecodeMode mode,
                Rng* rng) {
    return step_core(params, state, e, mode, rng, -1);
}

void decode_forced(const ActorParams& params, DecoderState& state, const Tensor& e, int city) {
    step_core(params, state, e, DecodeMode::greedy, nullptr, city);
}

RolloutResult rollout(const ActorParams& params, const Instance& instance, DecodeMode mode,
                      Rng* rng, int first_city) {
    if (instance.d_input != params.d_input) throw DomainError("rollout: instance D_input mismatch");
    const int n = instance.n;
    const int d = params.d_h;
    Tensor e = encode(params, instance);
    Tensor w1e = precompute_w1e(params, e);

    std::vector<bool> visited(n, false);
    if (first_city < 0 || first_city >= n) throw DomainError("rollout: first city out of range");
    visited[first_city] = true;
    Tour tour;
    tour.order.reserve(n);
    tour.order.push_back(first_city);
    double log_prob = 0.0;

    Tensor h({d});
    Tensor x = params.g0;
    std::vector<double> q(d);
    Tensor u({n});
    for (int t = 1; t < n; ++t) {
        Tensor d_t = gru_cell(params.gru, x, h);
        matvec(params.att_W2.data.data(), d_t.data.data(), q.data(), d, d);
        attention_scores(params.att_v, w1e, q.data(), visited, u.data.data());
        Tensor probs = softmax(u, visited);
        int city = select_city(probs, visited, mode, rng);
        log_prob += std::log(probs[city]);
        visited[city] = true;
        tour.order.push_back(city);
        h = std::move(d_t);
        x = Tensor({d});
        std::copy_n(e.data.data() + static_cast<size_t>(city) * d, d, x.data.data());
    }
    return {std::move(tour), log_prob};
}

double forced_log_prob(const ActorParams& params, const Instance& instance, const Tour& tour) {
    if (!is_permutation_tour(tour, instance.n)) throw DomainError("forced_log_prob: invalid tour");
    Tensor e = encode(params, instance);
    DecoderState state = decoder_start(instance, tour.order[0]);
    for (int t = 1; t < instance.n; ++t) decode_forced(params, state, e, tour.order[t]);
    return state.log_prob;
}

double critic_value(const CriticParams& params, const Instance& instance) {
    if (instance.d_input != params.d_input) throw DomainError("critic_value: instance D_input mismatch");
    const int n = instance.n;
    std::array<std::vector<double>, 3> h = {std::vector<double>(128), std::vector<double>(20),
                                            std::vector<double>(20)};
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        const double* f = instance.row(i);
        matvec(params.W1.data.data(), f, h[0].data(), 128, params.d_input);
        for (int j = 0; j < 128; ++j) h[0][j] = fast_tanh(h[0][j] + params.b1[j]);
        matvec(params.W2.data.data(), h[0].data(), h[1].data(), 20, 128);
        for (int j = 0; j < 20; ++j) h[1][j] = fast_tanh(h[1][j] + params.b2[j]);
        matvec(params.W3.data.data(), h[1].data(), h[2].data(), 20, 20);
        for (int j = 0; j < 20; ++j) h[2][j] = fast_tanh(h[2][j] + params.b3[j]);
        double out = params.b4[0];
        for (int j = 0; j < 20; ++j) out += params.W4[j] * h[2][j];
        total += out;
    }
    return total;
}

// --- training path ----------------------------------------------------------

TrainRollout rollout_training(Graph& g, ActorParams& params, const Instance& instance,
                              DecodeMode mode, Rng* rng, int first_city, const Tour* forced) {
    if (instance.d_input != params.d_input)
        throw DomainError("rollout_training: instance D_input mismatch");
    const int n = instance.n;
    if (forced && !is_permutation_tour(*forced, n))
        throw DomainError("rollout_training: forced tour invalid");
    if (forced) first_city = forced->order[0];
    if (first_city < 0 || first_city >= n) throw DomainError("rollout_training: first city out of range");

    auto X = g.input(features_tensor(instance));
    auto enc_W = g.param(params.enc_W);
    auto enc_b = g.param(params.enc_b);
    auto E = g.linear_rows(X, enc_W, enc_b);
    auto W1 = g.param(params.att_W1);
    auto P = g.linear_rows(E, W1);
    auto W2 = g.param(params.att_W2);
    auto v = g.param(params.att_v);
    GruRefs gru = GruRefs::wrap(g, params.gru);

    std::vector<bool> visited(n, false);
    visited[first_city] = true;
    Tour tour;
    tour.order.push_back(first_city);

    auto h = g.input(Tensor({params.d_h}));
    auto x = g.param(params.g0);
    Graph::Ref log_prob;
    std::vector<double> probs(n);
    for (int t = 1; t < n; ++t) {
        auto d_t = gru_cell(g, gru, x, h);
        auto q = g.matvec(W2, d_t);
        auto scores = g.matvec(g.tanh(g.add_rowvec(P, q)), v);
        auto logp = g.masked_log_softmax(scores, visited);
        int city;
        if (forced) {
            city = forced->order[t];
            if (visited[city]) throw DomainError("rollout_training: forced tour revisits a city");
        } else {
            const Tensor& lp = g.value(logp);
            for (int j = 0; j < n; ++j) probs[j] = visited[j] ? 0.0 : fast_exp(lp[j]);
            Tensor pt = Tensor::from({n}, probs);
            city = select_city(pt, visited, mode, rng);
        }
        auto contrib = g.pick(logp, city);
        log_prob = log_prob.valid() ? g.add(log_prob, contrib) : contrib;
        visited[city] = true;
        tour.order.push_back(city);
        h = d_t;
        x = g.pick_row(E, city);
    }
    return {std::move(tour), log_prob};
}

Graph::Ref critic_value_training(Graph& g, CriticParams& params, const Instance& instance) {
    if (instance.d_input != params.d_input)
        throw DomainError("critic_value_training: instance D_input mismatch");
    auto X = g.input(features_tensor(instance));
    auto H1 = g.tanh(g.linear_rows(X, g.param(params.W1), g.param(params.b1)));
    auto H2 = g.tanh(g.linear_rows(H1, g.param(params.W2), g.param(params.b2)));
    auto H3 = g.tanh(g.linear_rows(H2, g.param(params.W3), g.param(params.b3)));
    auto O = g.linear_rows(H3, g.param(params.W4), g.param(params.b4));
    return g.sum(O);
}

// --- checkpoint serialization ----------------------------------------------

namespace {

constexpr const char* kMagic = "MOTSP-PTRNET v1";

std::uint32_t crc32(const std::uint8_t* data, size_t len) {
    static std::array<std::uint32_t, 256> table = [] {
        std::array<std::uint32_t, 256> t{};
        for (std::uint32_t i = 0; i < 256; ++i) {
            std::uint32_t c = i;
            for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
            t[i] = c;
        }
        return t;
    }();
    std::uint32_t c = 0xFFFFFFFFu;
    for (size_t i = 0; i < len; ++i) c = table[(c ^ data[i]) & 0xFFu] ^ (c >> 8);
    return c ^ 0xFFFFFFFFu;
}

nlohmann::json specs_to_json(const std::vector<ObjectiveSpec>& specs) {
    nlohmann::json arr = nlohmann::json::array();
    for (const ObjectiveSpec& s : specs)
        arr.push_back({{"kind", objective_kind_name(s.kind)},
                       {"offset", s.feature_offset},
                       {"width", s.feature_width}});
    return arr;
}

std::vector<ObjectiveSpec> specs_from_json(const nlohmann::json& arr) {
    std::vector<ObjectiveSpec> specs;
    for (const auto& j : arr) {
        ObjectiveSpec s;
        s.kind = objective_kind_from_name(j.at("kind").get<std::string>());
        s.feature_offset = j.at("offset").get<int>();
        s.feature_width = j.at("width").get<int>();
        specs.push_back(s);
    }
    return specs;
}

// Expected tensor shapes given the metadata; load rejects deviations.
std::vector<std::pair<std::string, std::vector<int>>> expected_shapes(int d_h, int d_input) {
    std::vector<std::pair<std::string, std::vector<int>>> s;
    s.push_back({"actor.enc_W", {d_h, d_input}});
    s.push_back({"actor.enc_b", {d_h}});
    for (const char* g : {"Wz", "Uz", "Wr", "Ur", "Wh", "Uh"})
        s.push_back({std::string("actor.gru.") + g, {d_h, d_h}});
    for (const char* g : {"bz", "br", "bh"}) s.push_back({std::string("actor.gru.") + g, {d_h}});
    s.push_back({"actor.att_v", {d_h}});
    s.push_back({"actor.att_W1", {d_h, d_h}});
    s.push_back({"actor.att_W2", {d_h, d_h}});
    s.push_back({"actor.g0", {d_h}});
    s.push_back({"critic.W1", {128, d_input}});
    s.push_back({"critic.b1", {128}});
    s.push_back({"critic.W2", {20, 128}});
    s.push_back({"critic.b2", {20}});
    s.push_back({"critic.W3", {20, 20}});
    s.push_back({"critic.b3", {20}});
    s.push_back({"critic.W4", {1, 20}});
    s.push_back({"critic.b4", {1}});
    return s;
}

void append_le_float(std::vector<std::uint8_t>& out, float f) {
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    out.push_back(static_cast<std::uint8_t>(bits & 0xFF));
    out.push_back(static_cast<std::uint8_t>((bits >> 8) & 0xFF));
    out.push_back(static_cast<std::uint8_t>((bits >> 16) & 0xFF));
    out.push_back(static_cast<std::uint8_t>((bits >> 24) & 0xFF));
}

double read_le_float(const std::uint8_t* p) {
    std::uint32_t bits = static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
                         (static_cast<std::uint32_t>(p[2]) << 16) |
                         (static_cast<std::uint32_t>(p[3]) << 24);
    float f;
    std::memcpy(&f, &bits, 4);
    return static_cast<double>(f);
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const ActorParams& actor,
                     const CriticParams& critic, const CheckpointMeta& meta) {
    std::vector<std::pair<std::string, const Tensor*>> tensors = actor.named_parameters();
    auto critic_named = critic.named_parameters();
    tensors.insert(tensors.end(), critic_named.begin(), critic_named.end());

    std::vector<std::uint8_t> payload;
    nlohmann::json dir = nlohmann::json::array();
    for (const auto& [name, t] : tensors) {
        nlohmann::json entry;
        entry["name"] = name;
        entry["shape"] = t->shape;
        entry["offset"] = payload.size();
        dir.push_back(entry);
        for (double v : t->data) append_le_float(payload, static_cast<float>(v));
    }

    nlohmann::json header;
    header["meta"] = {{"d_h", meta.d_h},
                      {"d_input", meta.d_input},
                      {"M", meta.M},
                      {"lambda", meta.lambda},
                      {"specs", specs_to_json(meta.specs)}};
    header["tensors"] = dir;
    header["payload_bytes"] = payload.size();
    header["crc32"] = crc32(payload.data(), payload.size());
    std::string header_str = header.dump();

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("save_checkpoint: cannot open '" + path.string() + "' for writing");
    out << kMagic << "\n" << header_str.size() << "\n" << header_str;
    out.write(reinterpret_cast<const char*>(payload.data()), static_cast<std::streamsize>(payload.size()));
    if (!out) throw IoError("save_checkpoint: write failed for '" + path.string() + "'");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("load_checkpoint: cannot open '" + path.string() + "'");
    std::string magic;
    std::getline(in, magic);
    if (magic != kMagic) throw IoError("load_checkpoint: bad magic line in '" + path.string() + "'");
    std::string len_line;
    std::getline(in, len_line);
    size_t header_len = 0;
    try {
        header_len = std::stoul(len_line);
    } catch (const std::exception&) {
        throw IoError("load_checkpoint: corrupt header length line");
    }
    std::string header_str(header_len, '\0');
    in.read(header_str.data(), static_cast<std::streamsize>(header_len));
    if (!in) throw IoError("load_checkpoint: truncated header");
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(header_str);
    } catch (const std::exception& e) {
        throw IoError(std::string("load_checkpoint: header is not valid JSON: ") + e.what());
    }

    Checkpoint ckpt;
    const auto& meta = header.at("meta");
    ckpt.meta.d_h = meta.at("d_h").get<int>();
    ckpt.meta.d_input = meta.at("d_input").get<int>();
    ckpt.meta.M = meta.at("M").get<int>();
    ckpt.meta.lambda = meta.at("lambda").get<WeightVector>();
    ckpt.meta.specs = specs_from_json(meta.at("specs"));

    size_t payload_bytes = header.at("payload_bytes").get<size_t>();
    std::vector<std::uint8_t> payload(payload_bytes);
    in.read(reinterpret_cast<char*>(payload.data()), static_cast<std::streamsize>(payload_bytes));
    if (!in) throw IoError("load_checkpoint: truncated payload");
    if (crc32(payload.data(), payload.size()) != header.at("crc32").get<std::uint32_t>())
        throw IoError("load_checkpoint: payload checksum mismatch in '" + path.string() + "'");

    auto expected = expected_shapes(ckpt.meta.d_h, ckpt.meta.d_input);
    Rng dummy(0);
    ckpt.actor = ActorParams::init(dummy, ckpt.meta.d_h, ckpt.meta.d_input);
    ckpt.critic = CriticParams::init(dummy, ckpt.meta.d_input);
    std::vector<std::pair<std::string, Tensor*>> tensors = ckpt.actor.named_parameters();
    auto critic_named = ckpt.critic.named_parameters();
    tensors.insert(tensors.end(), critic_named.begin(), critic_named.end());

    for (const auto& entry : header.at("tensors")) {
        std::string name = entry.at("name").get<std::string>();
        std::vector<int> shape = entry.at("shape").get<std::vector<int>>();
        size_t offset = entry.at("offset").get<size_t>();
        auto exp = std::find_if(expected.begin(), expected.end(),
                                [&](const auto& p) { return p.first == name; });
        if (exp == expected.end()) throw IoError("load_checkpoint: unknown tensor '" + name + "'");
        if (exp->second != shape)
            throw IoError("load_checkpoint: tensor '" + name + "' shape conflicts with metadata");
        auto dst = std::find_if(tensors.begin(), tensors.end(),
                                [&](const auto& p) { return p.first == name; });
        Tensor& t = *dst->second;
        size_t count = t.data.size();
        if (offset + 4 * count > payload.size())
            throw IoError("load_checkpoint: tensor '" + name + "' payload out of range");
        for (size_t i = 0; i < count; ++i) t.data[i] = read_le_float(payload.data() + offset + 4 * i);
        exp->first.clear();  // mark as seen
    }
    for (const auto& [name, shape] : expected)
        if (!name.empty()) throw IoError("load_checkpoint: tensor '" + name + "' missing from file");
    return ckpt;
}

}  // namespace motsp
