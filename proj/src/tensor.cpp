#include "motsp/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "motsp/kernels.hpp"

namespace motsp {

namespace {

int shape_size(const std::vector<int>& s) {
    int n = 1;
    for (int d : s) {
        if (d <= 0) throw DomainError("tensor: non-positive dimension");
        n *= d;
    }
    return s.empty() ? 0 : n;
}

}  // namespace

Tensor::Tensor(std::vector<int> s, double fill) : shape(std::move(s)) {
    data.assign(shape_size(shape), fill);
}

Tensor Tensor::from(std::vector<int> s, std::vector<double> values) {
    Tensor t;
    t.shape = std::move(s);
    if (shape_size(t.shape) != static_cast<int>(values.size()))
        throw DomainError("tensor: data length does not match shape");
    t.data = std::move(values);
    return t;
}

void Tensor::set_requires_grad() {
    requires_grad = true;
    grad.assign(data.size(), 0.0);
}

void Tensor::zero_grad() {
    std::fill(grad.begin(), grad.end(), 0.0);
}

Tensor xavier_init(Rng& rng, const std::vector<int>& shape) {
    if (shape.empty()) throw DomainError("xavier_init: shape must have >= 1 dimension");
    Tensor t(shape);
    if (shape.size() >= 2) {
        double fan_out = shape[0];
        double fan_in = 1.0;
        for (size_t i = 1; i < shape.size(); ++i) fan_in *= shape[i];
        double bound = std::sqrt(6.0 / (fan_in + fan_out));
        for (double& v : t.data) v = rng.uniform(-bound, bound);
    }
    return t;  // 1-D tensors stay zero (bias convention)
}

namespace {

// Shared masked-softmax kernel with max subtraction. Returns log(sum exp)
// + max via *lse when requested.
void softmax_kernel(const double* u, const std::vector<bool>& mask, int n, double* out, double* lse) {
    double mx = -std::numeric_limits<double>::infinity();
    int unmasked = 0;
    for (int i = 0; i < n; ++i) {
        if (mask[i]) continue;
        ++unmasked;
        mx = std::max(mx, u[i]);
    }
    if (unmasked == 0) throw DomainError("softmax: all entries masked");
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        if (mask[i]) {
            out[i] = 0.0;
        } else {
            out[i] = fast_exp(u[i] - mx);
            sum += out[i];
        }
    }
    for (int i = 0; i < n; ++i)
        if (!mask[i]) out[i] /= sum;
    if (lse) *lse = mx + std::log(sum);
}

}  // namespace

Tensor softmax(const Tensor& u, const std::vector<bool>& mask) {
    if (u.shape.size() != 1) throw DomainError("softmax: expected a 1-D tensor");
    if (static_cast<int>(mask.size()) != u.size()) throw DomainError("softmax: mask length mismatch");
    Tensor out(u.shape);
    softmax_kernel(u.data.data(), mask, u.size(), out.data.data(), nullptr);
    return out;
}

GruParams gru_init(Rng& rng, int d_h) {
    GruParams p;
    p.Wz = xavier_init(rng, {d_h, d_h});
    p.Uz = xavier_init(rng, {d_h, d_h});
    p.bz = Tensor({d_h});
    p.Wr = xavier_init(rng, {d_h, d_h});
    p.Ur = xavier_init(rng, {d_h, d_h});
    p.br = Tensor({d_h});
    p.Wh = xavier_init(rng, {d_h, d_h});
    p.Uh = xavier_init(rng, {d_h, d_h});
    p.bh = Tensor({d_h});
    return p;
}

Tensor gru_cell(const GruParams& p, const Tensor& x, const Tensor& h) {
    const int d = h.size();
    if (x.size() != d || p.Wz.rows() != d) throw DomainError("gru_cell: shape mismatch");
    std::vector<double> zx(d), zh(d), rx(d), rh(d), hx(d), hh(d), rh_in(d);
    matvec(p.Wz.data.data(), x.data.data(), zx.data(), d, d);
    matvec(p.Uz.data.data(), h.data.data(), zh.data(), d, d);
    matvec(p.Wr.data.data(), x.data.data(), rx.data(), d, d);
    matvec(p.Ur.data.data(), h.data.data(), rh.data(), d, d);
    matvec(p.Wh.data.data(), x.data.data(), hx.data(), d, d);
    Tensor out({d});
    for (int i = 0; i < d; ++i) {
        double r = motsp::sigmoid(rx[i] + rh[i] + p.br[i]);
        rh_in[i] = r * h[i];
    }
    matvec(p.Uh.data.data(), rh_in.data(), hh.data(), d, d);
    for (int i = 0; i < d; ++i) {
        double z = motsp::sigmoid(zx[i] + zh[i] + p.bz[i]);
        double cand = fast_tanh(hx[i] + hh[i] + p.bh[i]);
        out[i] = (1.0 - z) * h[i] + z * cand;
    }
    return out;
}

Tensor embed_cities(const Tensor& W, const Tensor& b, const Tensor& features) {
    const int d_h = W.rows();
    const int d_in = W.cols();
    if (features.cols() != d_in || b.size() != d_h) throw DomainError("embed_cities: shape mismatch");
    const int n = features.rows();
    Tensor out({n, d_h});
    for (int i = 0; i < n; ++i) {
        matvec(W.data.data(), features.data.data() + static_cast<size_t>(i) * d_in,
               out.data.data() + static_cast<size_t>(i) * d_h, d_h, d_in);
        for (int j = 0; j < d_h; ++j) out.data[static_cast<size_t>(i) * d_h + j] += b[j];
    }
    return out;
}

// ---------------------------------------------------------------------------
// Graph

Graph::Ref Graph::push(Node n) {
    nodes_.push_back(std::move(n));
    return Ref{static_cast<int>(nodes_.size()) - 1};
}

void Graph::check(Ref r) const {
    if (r.id < 0 || r.id >= static_cast<int>(nodes_.size())) throw DomainError("graph: invalid node reference");
}

Graph::Ref Graph::param(Tensor& t) {
    if (!t.requires_grad) t.set_requires_grad();
    Node n;
    n.op = Op::leaf;
    n.ext = &t;
    return push(std::move(n));
}

Graph::Ref Graph::input(Tensor t) {
    Node n;
    n.op = Op::leaf;
    n.val = std::move(t);
    return push(std::move(n));
}

const Tensor& Graph::value(Ref r) const {
    check(r);
    return val_of(r.id);
}

double Graph::scalar(Ref r) const {
    const Tensor& t = value(r);
    if (t.size() != 1) throw DomainError("graph: node is not a scalar");
    return t[0];
}

Graph::Ref Graph::add(Ref a, Ref b) {
    check(a);
    check(b);
    const Tensor& ta = val_of(a.id);
    const Tensor& tb = val_of(b.id);
    if (ta.shape != tb.shape) throw DomainError("add: shape mismatch");
    Node n;
    n.op = Op::add;
    n.a = a.id;
    n.b = b.id;
    n.val = Tensor(ta.shape);
    for (int i = 0; i < ta.size(); ++i) n.val[i] = ta[i] + tb[i];
    return push(std::move(n));
}

Graph::Ref Graph::sub(Ref a, Ref b) {
    check(a);
    check(b);
    const Tensor& ta = val_of(a.id);
    const Tensor& tb = val_of(b.id);
    if (ta.shape != tb.shape) throw DomainError("sub: shape mismatch");
    Node n;
    n.op = Op::sub;
    n.a = a.id;
    n.b = b.id;
    n.val = Tensor(ta.shape);
    for (int i = 0; i < ta.size(); ++i) n.val[i] = ta[i] - tb[i];
    return push(std::move(n));
}

Graph::Ref Graph::mul(Ref a, Ref b) {
    check(a);
    check(b);
    const Tensor& ta = val_of(a.id);
    const Tensor& tb = val_of(b.id);
    if (ta.shape != tb.shape) throw DomainError("mul: shape mismatch");
    Node n;
    n.op = Op::mul;
    n.a = a.id;
    n.b = b.id;
    n.val = Tensor(ta.shape);
    for (int i = 0; i < ta.size(); ++i) n.val[i] = ta[i] * tb[i];
    return push(std::move(n));
}

Graph::Ref Graph::affine(Ref a, double alpha, double beta) {
    check(a);
    const Tensor& ta = val_of(a.id);
    Node n;
    n.op = Op::affine;
    n.a = a.id;
    n.alpha = alpha;
    n.beta = beta;
    n.val = Tensor(ta.shape);
    for (int i = 0; i < ta.size(); ++i) n.val[i] = alpha * ta[i] + beta;
    return push(std::move(n));
}

Graph::Ref Graph::tanh(Ref a) {
    check(a);
    const Tensor& ta = val_of(a.id);
    Node n;
    n.op = Op::tanh_;
    n.a = a.id;
    n.val = Tensor(ta.shape);
    for (int i = 0; i < ta.size(); ++i) n.val[i] = fast_tanh(ta[i]);
    return push(std::move(n));
}

Graph::Ref Graph::sigmoid(Ref a) {
    check(a);
    const Tensor& ta = val_of(a.id);
    Node n;
    n.op = Op::sigmoid_;
    n.a = a.id;
    n.val = Tensor(ta.shape);
    for (int i = 0; i < ta.size(); ++i) n.val[i] = motsp::sigmoid(ta[i]);
    return push(std::move(n));
}

Graph::Ref Graph::matvec(Ref W, Ref x) {
    check(W);
    check(x);
    const Tensor& tw = val_of(W.id);
    const Tensor& tx = val_of(x.id);
    if (tw.shape.size() != 2 || tx.shape.size() != 1 || tw.cols() != tx.size())
        throw DomainError("matvec: shape mismatch");
    Node n;
    n.op = Op::matvec_;
    n.a = W.id;
    n.b = x.id;
    n.val = Tensor({tw.rows()});
    motsp::matvec(tw.data.data(), tx.data.data(), n.val.data.data(), tw.rows(), tw.cols());
    return push(std::move(n));
}

Graph::Ref Graph::linear_rows(Ref X, Ref W, Ref b) {
    check(X);
    check(W);
    const Tensor& tx = val_of(X.id);
    const Tensor& tw = val_of(W.id);
    if (tx.shape.size() != 2 || tw.shape.size() != 2 || tx.cols() != tw.cols())
        throw DomainError("linear_rows: shape mismatch");
    const int rows = tx.rows(), m = tw.rows(), d = tw.cols();
    const double* bias = nullptr;
    if (b.valid()) {
        check(b);
        const Tensor& tb = val_of(b.id);
        if (tb.size() != m) throw DomainError("linear_rows: bias length mismatch");
        bias = tb.data.data();
    }
    Node n;
    n.op = Op::linear_rows;
    n.a = X.id;
    n.b = W.id;
    n.c = b.valid() ? b.id : -1;
    n.val = Tensor({rows, m});
    for (int r = 0; r < rows; ++r) {
        double* out = n.val.data.data() + static_cast<size_t>(r) * m;
        motsp::matvec(tw.data.data(), tx.data.data() + static_cast<size_t>(r) * d, out, m, d);
        if (bias)
            for (int j = 0; j < m; ++j) out[j] += bias[j];
    }
    return push(std::move(n));
}

Graph::Ref Graph::add_rowvec(Ref X, Ref r) {
    check(X);
    check(r);
    const Tensor& tx = val_of(X.id);
    const Tensor& tr = val_of(r.id);
    if (tx.shape.size() != 2 || tr.size() != tx.cols()) throw DomainError("add_rowvec: shape mismatch");
    Node n;
    n.op = Op::add_rowvec;
    n.a = X.id;
    n.b = r.id;
    n.val = Tensor(tx.shape);
    const int rows = tx.rows(), m = tx.cols();
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < m; ++j)
            n.val.data[static_cast<size_t>(i) * m + j] = tx.data[static_cast<size_t>(i) * m + j] + tr[j];
    return push(std::move(n));
}

Graph::Ref Graph::pick_row(Ref X, int row) {
    check(X);
    const Tensor& tx = val_of(X.id);
    if (tx.shape.size() != 2 || row < 0 || row >= tx.rows()) throw DomainError("pick_row: bad row");
    Node n;
    n.op = Op::pick_row;
    n.a = X.id;
    n.index = row;
    const int m = tx.cols();
    n.val = Tensor({m});
    std::copy_n(tx.data.data() + static_cast<size_t>(row) * m, m, n.val.data.data());
    return push(std::move(n));
}

Graph::Ref Graph::pick(Ref v, int index) {
    check(v);
    const Tensor& tv = val_of(v.id);
    if (tv.shape.size() != 1 || index < 0 || index >= tv.size()) throw DomainError("pick: bad index");
    Node n;
    n.op = Op::pick;
    n.a = v.id;
    n.index = index;
    n.val = Tensor({1});
    n.val[0] = tv[index];
    return push(std::move(n));
}

Graph::Ref Graph::sum(Ref v) {
    check(v);
    const Tensor& tv = val_of(v.id);
    Node n;
    n.op = Op::sum_;
    n.a = v.id;
    n.val = Tensor({1});
    double acc = 0.0;
    for (int i = 0; i < tv.size(); ++i) acc += tv[i];
    n.val[0] = acc;
    return push(std::move(n));
}

Graph::Ref Graph::masked_log_softmax(Ref u, const std::vector<bool>& mask) {
    check(u);
    const Tensor& tu = val_of(u.id);
    if (tu.shape.size() != 1 || static_cast<int>(mask.size()) != tu.size())
        throw DomainError("masked_log_softmax: shape mismatch");
    Node n;
    n.op = Op::log_softmax;
    n.a = u.id;
    n.mask = static_cast<int>(masks_.size());
    masks_.emplace_back(mask.begin(), mask.end());
    n.val = Tensor(tu.shape);
    std::vector<double> probs(tu.size());
    double lse = 0.0;
    softmax_kernel(tu.data.data(), mask, tu.size(), probs.data(), &lse);
    for (int i = 0; i < tu.size(); ++i)
        n.val[i] = mask[i] ? -std::numeric_limits<double>::infinity() : tu[i] - lse;
    return push(std::move(n));
}

Graph::Ref Graph::masked_softmax(Ref u, const std::vector<bool>& mask) {
    check(u);
    const Tensor& tu = val_of(u.id);
    if (tu.shape.size() != 1 || static_cast<int>(mask.size()) != tu.size())
        throw DomainError("masked_softmax: shape mismatch");
    Node n;
    n.op = Op::softmax_;
    n.a = u.id;
    n.mask = static_cast<int>(masks_.size());
    masks_.emplace_back(mask.begin(), mask.end());
    n.val = Tensor(tu.shape);
    softmax_kernel(tu.data.data(), mask, tu.size(), n.val.data.data(), nullptr);
    return push(std::move(n));
}

void Graph::backward(Ref loss) {
    check(loss);
    if (val_of(loss.id).size() != 1) throw DomainError("backward: loss must be a scalar");
    const int top = loss.id;
    for (int i = 0; i <= top; ++i) nodes_[i].grad.assign(val_of(i).size(), 0.0);
    nodes_[top].grad[0] = 1.0;

    for (int id = top; id >= 0; --id) {
        Node& n = nodes_[id];
        const std::vector<double>& g = n.grad;
        switch (n.op) {
            case Op::leaf:
                if (n.ext && n.ext->requires_grad)
                    for (size_t i = 0; i < g.size(); ++i) n.ext->grad[i] += g[i];
                break;
            case Op::add: {
                auto& ga = nodes_[n.a].grad;
                auto& gb = nodes_[n.b].grad;
                for (size_t i = 0; i < g.size(); ++i) {
                    ga[i] += g[i];
                    gb[i] += g[i];
                }
                break;
            }
            case Op::sub: {
                auto& ga = nodes_[n.a].grad;
                auto& gb = nodes_[n.b].grad;
                for (size_t i = 0; i < g.size(); ++i) {
                    ga[i] += g[i];
                    gb[i] -= g[i];
                }
                break;
            }
            case Op::mul: {
                const Tensor& va = val_of(n.a);
                const Tensor& vb = val_of(n.b);
                auto& ga = nodes_[n.a].grad;
                auto& gb = nodes_[n.b].grad;
                for (size_t i = 0; i < g.size(); ++i) {
                    ga[i] += g[i] * vb[static_cast<int>(i)];
                    gb[i] += g[i] * va[static_cast<int>(i)];
                }
                break;
            }
            case Op::affine: {
                auto& ga = nodes_[n.a].grad;
                for (size_t i = 0; i < g.size(); ++i) ga[i] += n.alpha * g[i];
                break;
            }
            case Op::tanh_: {
                auto& ga = nodes_[n.a].grad;
                for (size_t i = 0; i < g.size(); ++i) {
                    double y = n.val[static_cast<int>(i)];
                    ga[i] += g[i] * (1.0 - y * y);
                }
                break;
            }
            case Op::sigmoid_: {
                auto& ga = nodes_[n.a].grad;
                for (size_t i = 0; i < g.size(); ++i) {
                    double y = n.val[static_cast<int>(i)];
                    ga[i] += g[i] * y * (1.0 - y);
                }
                break;
            }
            case Op::matvec_: {
                const Tensor& W = val_of(n.a);
                const Tensor& x = val_of(n.b);
                auto& gW = nodes_[n.a].grad;
                auto& gx = nodes_[n.b].grad;
                const int m = W.rows(), d = W.cols();
                for (int i = 0; i < m; ++i) {
                    double gi = g[i];
                    if (gi == 0.0) continue;
                    double* gwrow = gW.data() + static_cast<size_t>(i) * d;
                    const double* wrow = W.data.data() + static_cast<size_t>(i) * d;
                    for (int j = 0; j < d; ++j) {
                        gwrow[j] += gi * x[j];
                        gx[j] += gi * wrow[j];
                    }
                }
                break;
            }
            case Op::linear_rows: {
                const Tensor& X = val_of(n.a);
                const Tensor& W = val_of(n.b);
                auto& gX = nodes_[n.a].grad;
                auto& gW = nodes_[n.b].grad;
                const int rows = X.rows(), m = W.rows(), d = W.cols();
                for (int r = 0; r < rows; ++r) {
                    const double* grow = g.data() + static_cast<size_t>(r) * m;
                    const double* xrow = X.data.data() + static_cast<size_t>(r) * d;
                    double* gxrow = gX.data() + static_cast<size_t>(r) * d;
                    for (int i = 0; i < m; ++i) {
                        double gi = grow[i];
                        if (gi == 0.0) continue;
                        const double* wrow = W.data.data() + static_cast<size_t>(i) * d;
                        double* gwrow = gW.data() + static_cast<size_t>(i) * d;
                        for (int j = 0; j < d; ++j) {
                            gwrow[j] += gi * xrow[j];
                            gxrow[j] += gi * wrow[j];
                        }
                    }
                    if (n.c >= 0) {
                        auto& gb = nodes_[n.c].grad;
                        for (int i = 0; i < m; ++i) gb[i] += grow[i];
                    }
                }
                break;
            }
            case Op::add_rowvec: {
                const Tensor& X = val_of(n.a);
                auto& gX = nodes_[n.a].grad;
                auto& gr = nodes_[n.b].grad;
                const int rows = X.rows(), m = X.cols();
                for (int i = 0; i < rows; ++i)
                    for (int j = 0; j < m; ++j) {
                        double gi = g[static_cast<size_t>(i) * m + j];
                        gX[static_cast<size_t>(i) * m + j] += gi;
                        gr[j] += gi;
                    }
                break;
            }
            case Op::pick_row: {
                const Tensor& X = val_of(n.a);
                auto& gX = nodes_[n.a].grad;
                const int m = X.cols();
                for (int j = 0; j < m; ++j) gX[static_cast<size_t>(n.index) * m + j] += g[j];
                break;
            }
            case Op::pick: {
                nodes_[n.a].grad[n.index] += g[0];
                break;
            }
            case Op::sum_: {
                auto& ga = nodes_[n.a].grad;
                for (size_t i = 0; i < ga.size(); ++i) ga[i] += g[0];
                break;
            }
            case Op::log_softmax: {
                const auto& mask = masks_[n.mask];
                auto& ga = nodes_[n.a].grad;
                double gsum = 0.0;
                for (size_t i = 0; i < g.size(); ++i)
                    if (!mask[i]) gsum += g[i];
                for (size_t i = 0; i < g.size(); ++i) {
                    if (mask[i]) continue;
                    double p = fast_exp(n.val[static_cast<int>(i)]);
                    ga[i] += g[i] - p * gsum;
                }
                break;
            }
            case Op::softmax_: {
                const auto& mask = masks_[n.mask];
                auto& ga = nodes_[n.a].grad;
                double dot = 0.0;
                for (size_t i = 0; i < g.size(); ++i)
                    if (!mask[i]) dot += g[i] * n.val[static_cast<int>(i)];
                for (size_t i = 0; i < g.size(); ++i) {
                    if (mask[i]) continue;
                    double y = n.val[static_cast<int>(i)];
                    ga[i] += y * (g[i] - dot);
                }
                break;
            }
        }
    }
}

GruRefs GruRefs::wrap(Graph& g, GruParams& p) {
    GruRefs r;
    r.Wz = g.param(p.Wz);
    r.Uz = g.param(p.Uz);
    r.bz = g.param(p.bz);
    r.Wr = g.param(p.Wr);
    r.Ur = g.param(p.Ur);
    r.br = g.param(p.br);
    r.Wh = g.param(p.Wh);
    r.Uh = g.param(p.Uh);
    r.bh = g.param(p.bh);
    return r;
}

Graph::Ref gru_cell(Graph& g, const GruRefs& p, Graph::Ref x, Graph::Ref h) {
    auto z = g.sigmoid(g.add(g.add(g.matvec(p.Wz, x), g.matvec(p.Uz, h)), p.bz));
    auto r = g.sigmoid(g.add(g.add(g.matvec(p.Wr, x), g.matvec(p.Ur, h)), p.br));
    auto cand = g.tanh(g.add(g.add(g.matvec(p.Wh, x), g.matvec(p.Uh, g.mul(r, h))), p.bh));
    return g.add(g.mul(g.affine(z, -1.0, 1.0), h), g.mul(z, cand));
}

AdamState AdamState::init(double lr, const std::vector<Tensor*>& params) {
    AdamState s;
    s.lr = lr;
    for (const Tensor* p : params) {
        s.m.emplace_back(p->data.size(), 0.0);
        s.v.emplace_back(p->data.size(), 0.0);
    }
    return s;
}

void adam_step(AdamState& state, const std::vector<Tensor*>& params) {
    if (state.m.size() != params.size()) throw DomainError("adam_step: state/parameter count mismatch");
    state.t += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
    for (size_t p = 0; p < params.size(); ++p) {
        Tensor& t = *params[p];
        if (t.grad.size() != t.data.size()) throw DomainError("adam_step: parameter has no gradient buffer");
        auto& m = state.m[p];
        auto& v = state.v[p];
        for (size_t i = 0; i < t.data.size(); ++i) {
            double g = t.grad[i];
            if (!std::isfinite(g)) throw TrainingError("adam_step: non-finite gradient");
            m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g;
            v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g * g;
            double m_hat = m[i] / bc1;
            double v_hat = v[i] / bc2;
            t.data[i] -= state.lr * m_hat / (std::sqrt(v_hat) + state.eps);
        }
    }
}

void zero_grads(const std::vector<Tensor*>& params) {
    for (Tensor* p : params) p->zero_grad();
}

void clip_gradients(const std::vector<Tensor*>& params, double max_norm) {
    if (max_norm <= 0.0) return;
    double sq = 0.0;
    for (const Tensor* p : params)
        for (double g : p->grad) sq += g * g;
    double norm = std::sqrt(sq);
    if (norm <= max_norm) return;
    double f = max_norm / norm;
    for (Tensor* p : params)
        for (double& g : p->grad) g *= f;
}

}  // namespace motsp
