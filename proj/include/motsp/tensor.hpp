#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "motsp/errors.hpp"
#include "motsp/rng.hpp"

namespace motsp {

/// Dense row-major tensor of 64-bit reals. Parameters set requires_grad and
/// carry a same-shaped gradient accumulator.
struct Tensor {
    std::vector<int> shape;
    std::vector<double> data;
    bool requires_grad = false;
    std::vector<double> grad;

    Tensor() = default;
    explicit Tensor(std::vector<int> s, double fill = 0.0);
    static Tensor from(std::vector<int> s, std::vector<double> values);

    int size() const { return static_cast<int>(data.size()); }
    int rows() const { return shape.empty() ? 0 : shape[0]; }
    int cols() const { return shape.size() < 2 ? 1 : shape[1]; }
    double& operator[](int i) { return data[i]; }
    double operator[](int i) const { return data[i]; }

    void set_requires_grad();
    void zero_grad();
};

/// Uniform Xavier/Glorot init on +-sqrt(6/(fan_in+fan_out)) for tensors with
/// >= 2 dimensions; 1-D tensors (biases and the like) are zero-initialized.
Tensor xavier_init(Rng& rng, const std::vector<int>& shape);

/// Masked softmax over a 1-D tensor: masked entries are exactly 0, the rest
/// are proportional to exp(u_i - max). Throws if everything is masked.
Tensor softmax(const Tensor& u, const std::vector<bool>& mask);

struct GruParams {
    Tensor Wz, Uz, bz;  // update gate
    Tensor Wr, Ur, br;  // reset gate
    Tensor Wh, Uh, bh;  // candidate state
};

GruParams gru_init(Rng& rng, int d_h);

/// One GRU step, convention h' = (1-z) h + z h~ with
/// z = sigma(Wz x + Uz h + bz), r = sigma(Wr x + Ur h + br),
/// h~ = tanh(Wh x + Uh (r o h) + bh).
Tensor gru_cell(const GruParams& p, const Tensor& x, const Tensor& h);

/// Per-city affine embedding: row i of the result is W * features_i + b.
/// Parameters are shared across cities (kernel-size-1 convolution).
Tensor embed_cities(const Tensor& W, const Tensor& b, const Tensor& features);

/// Reverse-mode tape. Operations append nodes in topological order; backward
/// walks them in exact reverse, accumulating into the grad buffers of every
/// wrapped parameter. A graph belongs to a single worker.
class Graph {
public:
    struct Ref {
        int id = -1;
        bool valid() const { return id >= 0; }
    };

    /// Wrap an external parameter; backward accumulates into t.grad.
    Ref param(Tensor& t);
    /// Constant leaf (no gradient).
    Ref input(Tensor t);

    Ref add(Ref a, Ref b);
    Ref sub(Ref a, Ref b);
    Ref mul(Ref a, Ref b);
    /// Elementwise alpha * a + beta.
    Ref affine(Ref a, double alpha, double beta);
    Ref tanh(Ref a);
    Ref sigmoid(Ref a);
    /// W [m x n] * x [n] -> [m]; both arguments may carry gradients.
    Ref matvec(Ref W, Ref x);
    /// X [n x d] rows through W [m x d] (+ optional bias b [m]) -> [n x m].
    Ref linear_rows(Ref X, Ref W, Ref b = Ref{});
    /// X [n x m] + broadcast row r [m].
    Ref add_rowvec(Ref X, Ref r);
    /// Row `row` of a 2-D value as a vector.
    Ref pick_row(Ref X, int row);
    /// Element `index` of a 1-D value as a scalar.
    Ref pick(Ref v, int index);
    Ref sum(Ref v);
    /// Masked log-softmax; masked entries are -inf and receive no gradient.
    Ref masked_log_softmax(Ref u, const std::vector<bool>& mask);
    Ref masked_softmax(Ref u, const std::vector<bool>& mask);

    const Tensor& value(Ref r) const;
    double scalar(Ref r) const;

    /// Accumulate d(loss)/d(param) into every wrapped parameter's grad.
    /// `loss` must be scalar. Repeated calls keep accumulating.
    void backward(Ref loss);

    int node_count() const { return static_cast<int>(nodes_.size()); }

private:
    enum class Op : std::uint8_t {
        leaf, add, sub, mul, affine, tanh_, sigmoid_, matvec_, linear_rows, add_rowvec,
        pick_row, pick, sum_, log_softmax, softmax_
    };
    struct Node {
        Op op = Op::leaf;
        int a = -1, b = -1, c = -1;
        Tensor* ext = nullptr;  // wrapped parameter (leaf only)
        Tensor val;
        std::vector<double> grad;
        double alpha = 1.0, beta = 0.0;
        int index = -1;
        int mask = -1;  // index into masks_
    };

    const Tensor& val_of(int id) const { return nodes_[id].ext ? *nodes_[id].ext : nodes_[id].val; }
    Ref push(Node n);
    void check(Ref r) const;

    std::vector<Node> nodes_;
    std::vector<std::vector<std::uint8_t>> masks_;
};

/// GRU wired into a graph; parameter refs are created once per graph.
struct GruRefs {
    Graph::Ref Wz, Uz, bz, Wr, Ur, br, Wh, Uh, bh;
    static GruRefs wrap(Graph& g, GruParams& p);
};

Graph::Ref gru_cell(Graph& g, const GruRefs& p, Graph::Ref x, Graph::Ref h);

/// Canonical Adam with bias correction (beta1 0.9, beta2 0.999, eps 1e-8).
struct AdamState {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    long t = 0;
    std::vector<std::vector<double>> m, v;

    static AdamState init(double lr, const std::vector<Tensor*>& params);
};

/// One Adam update from the parameters' accumulated grads; increments t and
/// updates in place. Throws TrainingError on non-finite gradients.
void adam_step(AdamState& state, const std::vector<Tensor*>& params);

/// Zero the grad buffers of a parameter set.
void zero_grads(const std::vector<Tensor*>& params);

/// Global-norm gradient clipping; no-op when max_norm <= 0.
void clip_gradients(const std::vector<Tensor*>& params, double max_norm);

}  // namespace motsp
