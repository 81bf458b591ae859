#include "mm/policy.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

namespace mm {

namespace {

// Seed streams inside one training seed: 0 initializes the weights, 1 + e
// shuffles epoch e.
constexpr std::uint64_t kStreamWeightsInit = 0;
constexpr std::uint64_t kStreamEpochShuffleBase = 1;

constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEpsilon = 1e-8;

}  // namespace

Observation encode_observation(const Level& level, int x, int y, int crop_size) {
    if (!level.in_bounds(x, y)) {
        throw std::invalid_argument("mutation location out of bounds");
    }
    if (crop_size <= 0) throw std::invalid_argument("crop size must be positive");
    const int off = crop_size / 2 - 1;
    Observation obs;
    obs.size = crop_size;
    obs.cells.resize(static_cast<std::size_t>(crop_size) * crop_size);
    for (int i = 0; i < crop_size; ++i) {
        for (int j = 0; j < crop_size; ++j) {
            obs.cells[static_cast<std::size_t>(i) * crop_size + j] =
                level.at(x - off + j, y - off + i) == Tile::Solid ? 1.0f : 0.0f;
        }
    }
    return obs;
}

void NetworkShape::validate() const {
    if (input_size < 4 || input_size % 4 != 0) {
        throw std::invalid_argument("network input size must be a positive multiple of 4");
    }
    for (int c : conv_channels) {
        if (c <= 0) throw std::invalid_argument("conv channel counts must be positive");
    }
    if (dense_hidden <= 0) throw std::invalid_argument("dense hidden width must be positive");
    if (num_actions != kNumActions) {
        throw std::invalid_argument("network must output one logit per mutation action");
    }
}

std::vector<TensorSpec> tensor_layout(const NetworkShape& shape) {
    const auto [c1, c2, c3] = shape.conv_channels;
    const int flat = shape.flatten_len();
    std::vector<TensorSpec> specs = {
        {"conv1_w", {c1, 1, 3, 3}, 0, 0},
        {"conv1_b", {c1}, 0, 0},
        {"conv2_w", {c2, c1, 3, 3}, 0, 0},
        {"conv2_b", {c2}, 0, 0},
        {"conv3_w", {c3, c2, 3, 3}, 0, 0},
        {"conv3_b", {c3}, 0, 0},
        {"dense1_w", {shape.dense_hidden, flat}, 0, 0},
        {"dense1_b", {shape.dense_hidden}, 0, 0},
        {"dense2_w", {shape.num_actions, shape.dense_hidden}, 0, 0},
        {"dense2_b", {shape.num_actions}, 0, 0},
    };
    std::size_t offset = 0;
    for (auto& spec : specs) {
        spec.size = 1;
        for (int d : spec.dims) spec.size *= static_cast<std::size_t>(d);
        spec.offset = offset;
        offset += spec.size;
    }
    return specs;
}

std::size_t parameter_count(const NetworkShape& shape) {
    std::size_t total = 0;
    for (const auto& spec : tensor_layout(shape)) total += spec.size;
    return total;
}

namespace {

struct ParamOffsets {
    std::size_t conv_w[3], conv_b[3];
    std::size_t dense1_w, dense1_b, dense2_w, dense2_b;
    std::size_t total;
};

ParamOffsets param_offsets(const NetworkShape& shape) {
    const auto specs = tensor_layout(shape);
    ParamOffsets o{};
    o.conv_w[0] = specs[0].offset;
    o.conv_b[0] = specs[1].offset;
    o.conv_w[1] = specs[2].offset;
    o.conv_b[1] = specs[3].offset;
    o.conv_w[2] = specs[4].offset;
    o.conv_b[2] = specs[5].offset;
    o.dense1_w = specs[6].offset;
    o.dense1_b = specs[7].offset;
    o.dense2_w = specs[8].offset;
    o.dense2_b = specs[9].offset;
    o.total = specs.back().offset + specs.back().size;
    return o;
}

// The conv layers run over position-major patch matrices: row pos = y*size+x
// holds the zero-padded 3x3 neighbourhood of every input channel, flattened
// as k = ic*9 + ky*3 + kx (the kernel storage order). Each output value is
// then one contiguous dot product, which keeps the 4x4 and 2x2 layers out of
// short-loop territory.

void im2colT(const double* in, int in_ch, int size, double* patchesT) {
    const int plane = size * size;
    const int K = in_ch * 9;
    std::fill(patchesT, patchesT + static_cast<std::size_t>(plane) * K, 0.0);
    for (int ic = 0; ic < in_ch; ++ic) {
        const double* ip = in + static_cast<std::ptrdiff_t>(ic) * plane;
        for (int ky = 0; ky < 3; ++ky) {
            const int y0 = std::max(0, 1 - ky);
            const int y1 = std::min(size, size + 1 - ky);
            for (int kx = 0; kx < 3; ++kx) {
                const int x0 = std::max(0, 1 - kx);
                const int x1 = std::min(size, size + 1 - kx);
                const int k = ic * 9 + ky * 3 + kx;
                for (int y = y0; y < y1; ++y) {
                    const double* irow = ip + (y + ky - 1) * size + (kx - 1);
                    double* prow = patchesT + (static_cast<std::size_t>(y) * size) * K + k;
                    for (int x = x0; x < x1; ++x) {
                        prow[static_cast<std::size_t>(x) * K] = irow[x];
                    }
                }
            }
        }
    }
}

// Four fixed-order accumulator chains: breaks the FMA latency chain without
// handing the compiler reassociation freedom, so results stay deterministic.
double dot_mixed(const float* w, const double* p, int n) {
    double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
    int k = 0;
    for (; k + 4 <= n; k += 4) {
        a0 += static_cast<double>(w[k]) * p[k];
        a1 += static_cast<double>(w[k + 1]) * p[k + 1];
        a2 += static_cast<double>(w[k + 2]) * p[k + 2];
        a3 += static_cast<double>(w[k + 3]) * p[k + 3];
    }
    for (; k < n; ++k) a0 += static_cast<double>(w[k]) * p[k];
    return (a0 + a1) + (a2 + a3);
}

void conv_fwd(const float* w, const float* b, const double* patchesT, int K, int positions,
              double* out, int out_ch) {
    for (int oc = 0; oc < out_ch; ++oc) {
        const float* wk = w + static_cast<std::size_t>(oc) * K;
        double* op = out + static_cast<std::size_t>(oc) * positions;
        for (int pos = 0; pos < positions; ++pos) {
            op[pos] = b[oc] + dot_mixed(wk, patchesT + static_cast<std::size_t>(pos) * K, K);
        }
    }
}

// Accumulates dw/db from the output gradient g [oc][pos]; when dpatchesT is
// non-null also computes the patch gradient (zeroed first). ReLU masking
// leaves many zero rows in g, which short-circuits both inner loops.
void conv_bwd(const float* w, const double* g, const double* patchesT, int K, int positions,
              int out_ch, double* dw, double* db, double* dpatchesT) {
    if (dpatchesT) {
        std::fill(dpatchesT, dpatchesT + static_cast<std::size_t>(positions) * K, 0.0);
    }
    for (int oc = 0; oc < out_ch; ++oc) {
        const double* gp = g + static_cast<std::size_t>(oc) * positions;
        const float* wk = w + static_cast<std::size_t>(oc) * K;
        double* dwk = dw + static_cast<std::size_t>(oc) * K;
        double bias = 0.0;
        for (int pos = 0; pos < positions; ++pos) {
            const double go = gp[pos];
            bias += go;
            if (go == 0.0) continue;
            const double* pr = patchesT + static_cast<std::size_t>(pos) * K;
            for (int k = 0; k < K; ++k) dwk[k] += go * pr[k];
            if (dpatchesT) {
                double* dpr = dpatchesT + static_cast<std::size_t>(pos) * K;
                for (int k = 0; k < K; ++k) dpr[k] += go * static_cast<double>(wk[k]);
            }
        }
        db[oc] += bias;
    }
}

// Transpose of im2colT: scatter-adds the patch gradient back onto planes.
void col2imT(const double* dpatchesT, int in_ch, int size, double* din) {
    const int plane = size * size;
    const int K = in_ch * 9;
    std::fill(din, din + static_cast<std::size_t>(in_ch) * plane, 0.0);
    for (int ic = 0; ic < in_ch; ++ic) {
        double* dp = din + static_cast<std::ptrdiff_t>(ic) * plane;
        for (int ky = 0; ky < 3; ++ky) {
            const int y0 = std::max(0, 1 - ky);
            const int y1 = std::min(size, size + 1 - ky);
            for (int kx = 0; kx < 3; ++kx) {
                const int x0 = std::max(0, 1 - kx);
                const int x1 = std::min(size, size + 1 - kx);
                const int k = ic * 9 + ky * 3 + kx;
                for (int y = y0; y < y1; ++y) {
                    double* drow = dp + (y + ky - 1) * size + (kx - 1);
                    const double* prow =
                        dpatchesT + (static_cast<std::size_t>(y) * size) * K + k;
                    for (int x = x0; x < x1; ++x) {
                        drow[x] += prow[static_cast<std::size_t>(x) * K];
                    }
                }
            }
        }
    }
}

void relu_inplace(double* v, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        if (v[i] < 0.0) v[i] = 0.0;
    }
}

// 2x2 max pooling, stride 2. arg records the flat in-plane index of the
// winning cell (first max in scan order) for the backward scatter.
void maxpool2(const double* in, int ch, int size, double* out, int* arg) {
    const int osize = size / 2;
    const int plane = size * size;
    const int oplane = osize * osize;
    for (int c = 0; c < ch; ++c) {
        const double* ip = in + static_cast<std::ptrdiff_t>(c) * plane;
        double* op = out + static_cast<std::ptrdiff_t>(c) * oplane;
        int* ap = arg + static_cast<std::ptrdiff_t>(c) * oplane;
        for (int y = 0; y < osize; ++y) {
            for (int x = 0; x < osize; ++x) {
                int best_idx = (2 * y) * size + 2 * x;
                double best = ip[best_idx];
                const int candidates[3] = {(2 * y) * size + 2 * x + 1,
                                           (2 * y + 1) * size + 2 * x,
                                           (2 * y + 1) * size + 2 * x + 1};
                for (int idx : candidates) {
                    if (ip[idx] > best) {
                        best = ip[idx];
                        best_idx = idx;
                    }
                }
                op[y * osize + x] = best;
                ap[y * osize + x] = best_idx;
            }
        }
    }
}

void dense(const double* in, int in_n, const float* w, const float* b, double* out,
           int out_n) {
    for (int o = 0; o < out_n; ++o) {
        out[o] = b[o] + dot_mixed(w + static_cast<std::ptrdiff_t>(o) * in_n, in, in_n);
    }
}

struct ForwardBuffers {
    NetworkShape shape{};
    bool ready = false;
    std::vector<double> input, a1, p1, a2, p2, a3, d1;
    std::vector<double> px1, px2, px3;  // position-major conv input patches
    std::vector<int> p1_arg, p2_arg;
    std::array<double, kNumActions> logits{}, probs{};

    void prepare(const NetworkShape& s) {
        if (ready && shape == s) return;
        shape = s;
        const int S = s.input_size, S2 = S / 2, S4 = S / 4;
        const auto [c1, c2, c3] = s.conv_channels;
        input.resize(static_cast<std::size_t>(S) * S);
        px1.resize(static_cast<std::size_t>(S) * S * 9);
        a1.resize(static_cast<std::size_t>(c1) * S * S);
        p1.resize(static_cast<std::size_t>(c1) * S2 * S2);
        p1_arg.resize(p1.size());
        px2.resize(static_cast<std::size_t>(S2) * S2 * c1 * 9);
        a2.resize(static_cast<std::size_t>(c2) * S2 * S2);
        p2.resize(static_cast<std::size_t>(c2) * S4 * S4);
        p2_arg.resize(p2.size());
        px3.resize(static_cast<std::size_t>(S4) * S4 * c2 * 9);
        a3.resize(static_cast<std::size_t>(c3) * S4 * S4);
        d1.resize(static_cast<std::size_t>(s.dense_hidden));
        ready = true;
    }
};

void run_forward(const PolicyWeights& weights, const Observation& obs, ForwardBuffers& fb) {
    const NetworkShape& s = weights.shape;
    if (obs.size != s.input_size ||
        obs.cells.size() != static_cast<std::size_t>(s.input_size) * s.input_size) {
        throw std::invalid_argument("observation does not match the network input size");
    }
    fb.prepare(s);
    const auto off = param_offsets(s);
    const float* p = weights.params.data();
    const int S = s.input_size, S2 = S / 2, S4 = S / 4;
    const auto [c1, c2, c3] = s.conv_channels;

    for (std::size_t i = 0; i < obs.cells.size(); ++i) fb.input[i] = obs.cells[i];

    im2colT(fb.input.data(), 1, S, fb.px1.data());
    conv_fwd(p + off.conv_w[0], p + off.conv_b[0], fb.px1.data(), 9, S * S, fb.a1.data(), c1);
    relu_inplace(fb.a1.data(), fb.a1.size());
    maxpool2(fb.a1.data(), c1, S, fb.p1.data(), fb.p1_arg.data());

    im2colT(fb.p1.data(), c1, S2, fb.px2.data());
    conv_fwd(p + off.conv_w[1], p + off.conv_b[1], fb.px2.data(), c1 * 9, S2 * S2, fb.a2.data(),
             c2);
    relu_inplace(fb.a2.data(), fb.a2.size());
    maxpool2(fb.a2.data(), c2, S2, fb.p2.data(), fb.p2_arg.data());

    im2colT(fb.p2.data(), c2, S4, fb.px3.data());
    conv_fwd(p + off.conv_w[2], p + off.conv_b[2], fb.px3.data(), c2 * 9, S4 * S4, fb.a3.data(),
             c3);
    relu_inplace(fb.a3.data(), fb.a3.size());

    dense(fb.a3.data(), s.flatten_len(), p + off.dense1_w, p + off.dense1_b, fb.d1.data(),
          s.dense_hidden);
    relu_inplace(fb.d1.data(), fb.d1.size());

    dense(fb.d1.data(), s.dense_hidden, p + off.dense2_w, p + off.dense2_b, fb.logits.data(),
          kNumActions);

    const double m = *std::max_element(fb.logits.begin(), fb.logits.end());
    double total = 0.0;
    for (int i = 0; i < kNumActions; ++i) {
        fb.probs[i] = std::exp(fb.logits[i] - m);
        total += fb.probs[i];
    }
    for (int i = 0; i < kNumActions; ++i) fb.probs[i] /= total;
}

struct BackwardBuffers {
    std::vector<double> dd1, da3, dp2, da2, dp1, da1;
    std::vector<double> dpx3, dpx2;  // patch gradients

    void prepare(const ForwardBuffers& fb) {
        dd1.resize(fb.d1.size());
        da3.resize(fb.a3.size());
        dp2.resize(fb.p2.size());
        da2.resize(fb.a2.size());
        dp1.resize(fb.p1.size());
        da1.resize(fb.a1.size());
        dpx3.resize(fb.px3.size());
        dpx2.resize(fb.px2.size());
    }
};

// Cross-entropy loss for one example; adds the unscaled parameter gradient
// into grad (same flat layout as the weights).
double example_loss_and_grad(const PolicyWeights& weights, const Observation& obs, int label,
                             std::span<double> grad, ForwardBuffers& fb, BackwardBuffers& bb) {
    run_forward(weights, obs, fb);
    const NetworkShape& s = weights.shape;
    const auto off = param_offsets(s);
    const float* p = weights.params.data();
    double* g = grad.data();
    const int S = s.input_size, S2 = S / 2, S4 = S / 4;
    const auto [c1, c2, c3] = s.conv_channels;
    const int flat = s.flatten_len();
    const int hidden = s.dense_hidden;
    bb.prepare(fb);

    std::array<double, kNumActions> dlogits = fb.probs;
    dlogits[label] -= 1.0;

    // dense2
    for (int o = 0; o < kNumActions; ++o) {
        g[off.dense2_b + o] += dlogits[o];
        double* dw = g + off.dense2_w + static_cast<std::ptrdiff_t>(o) * hidden;
        for (int i = 0; i < hidden; ++i) dw[i] += dlogits[o] * fb.d1[i];
    }
    for (int i = 0; i < hidden; ++i) {
        double sum = 0.0;
        for (int o = 0; o < kNumActions; ++o) {
            sum += dlogits[o] * static_cast<double>(p[off.dense2_w + static_cast<std::ptrdiff_t>(o) * hidden + i]);
        }
        bb.dd1[i] = fb.d1[i] > 0.0 ? sum : 0.0;
    }

    // dense1
    std::fill(bb.da3.begin(), bb.da3.end(), 0.0);
    for (int o = 0; o < hidden; ++o) {
        const double go = bb.dd1[o];
        g[off.dense1_b + o] += go;
        if (go == 0.0) continue;
        double* dw = g + off.dense1_w + static_cast<std::ptrdiff_t>(o) * flat;
        const float* wr = p + off.dense1_w + static_cast<std::ptrdiff_t>(o) * flat;
        for (int i = 0; i < flat; ++i) {
            dw[i] += go * fb.a3[i];
            bb.da3[i] += go * static_cast<double>(wr[i]);
        }
    }
    for (int i = 0; i < flat; ++i) {
        if (fb.a3[i] <= 0.0) bb.da3[i] = 0.0;
    }

    // conv3
    conv_bwd(p + off.conv_w[2], bb.da3.data(), fb.px3.data(), c2 * 9, S4 * S4, c3,
             g + off.conv_w[2], g + off.conv_b[2], bb.dpx3.data());
    col2imT(bb.dpx3.data(), c2, S4, bb.dp2.data());

    // pool2 scatter + relu mask at conv2 output
    std::fill(bb.da2.begin(), bb.da2.end(), 0.0);
    {
        const int oplane = S4 * S4, plane = S2 * S2;
        for (int c = 0; c < c2; ++c) {
            for (int i = 0; i < oplane; ++i) {
                bb.da2[static_cast<std::size_t>(c) * plane + fb.p2_arg[static_cast<std::size_t>(c) * oplane + i]] +=
                    bb.dp2[static_cast<std::size_t>(c) * oplane + i];
            }
        }
    }
    for (std::size_t i = 0; i < bb.da2.size(); ++i) {
        if (fb.a2[i] <= 0.0) bb.da2[i] = 0.0;
    }

    // conv2
    conv_bwd(p + off.conv_w[1], bb.da2.data(), fb.px2.data(), c1 * 9, S2 * S2, c2,
             g + off.conv_w[1], g + off.conv_b[1], bb.dpx2.data());
    col2imT(bb.dpx2.data(), c1, S2, bb.dp1.data());

    // pool1 scatter + relu mask at conv1 output
    std::fill(bb.da1.begin(), bb.da1.end(), 0.0);
    {
        const int oplane = S2 * S2, plane = S * S;
        for (int c = 0; c < c1; ++c) {
            for (int i = 0; i < oplane; ++i) {
                bb.da1[static_cast<std::size_t>(c) * plane + fb.p1_arg[static_cast<std::size_t>(c) * oplane + i]] +=
                    bb.dp1[static_cast<std::size_t>(c) * oplane + i];
            }
        }
    }
    for (std::size_t i = 0; i < bb.da1.size(); ++i) {
        if (fb.a1[i] <= 0.0) bb.da1[i] = 0.0;
    }

    // conv1 (no input gradient needed)
    conv_bwd(p + off.conv_w[0], bb.da1.data(), fb.px1.data(), 9, S * S, c1,
             g + off.conv_w[0], g + off.conv_b[0], nullptr);

    return -std::log(std::max(fb.probs[label], 1e-300));
}

}  // namespace

PolicyWeights init_network(std::uint64_t seed, const NetworkShape& shape) {
    shape.validate();
    PolicyWeights weights;
    weights.shape = shape;
    weights.params.assign(parameter_count(shape), 0.0f);
    Rng rng = Rng::derived(seed, kStreamWeightsInit);
    for (const auto& spec : tensor_layout(shape)) {
        if (spec.dims.size() == 1) continue;  // biases stay zero
        const std::size_t fan_in = spec.dims.size() == 4
                                       ? static_cast<std::size_t>(spec.dims[1]) * spec.dims[2] * spec.dims[3]
                                       : static_cast<std::size_t>(spec.dims[1]);
        const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
        for (std::size_t i = 0; i < spec.size; ++i) {
            weights.params[spec.offset + i] =
                static_cast<float>((2.0 * rng.uniform_real() - 1.0) * limit);
        }
    }
    return weights;
}

ActionDistribution forward(const PolicyWeights& weights, const Observation& obs) {
    // The buffer cache only avoids reallocation; forward stays a pure function.
    thread_local ForwardBuffers fb;
    run_forward(weights, obs, fb);
    ActionDistribution dist;
    dist.probabilities = fb.probs;
    return dist;
}

MutationAction pick_action(const ActionDistribution& dist, double u) {
    double cum = dist.probabilities[0];
    if (u < cum) return MutationAction::NoChange;
    cum += dist.probabilities[1];
    if (u < cum) return MutationAction::ChangeToEmpty;
    return MutationAction::ChangeToSolid;
}

MutationAction sample_action(const ActionDistribution& dist, Rng& rng) {
    return pick_action(dist, rng.uniform_real());
}

void TrainHyperparams::validate() const {
    if (learning_rate <= 0.0) throw std::invalid_argument("learning rate must be positive");
    if (batch_size <= 0) throw std::invalid_argument("batch size must be positive");
    if (epochs < 0) throw std::invalid_argument("epoch count must be non-negative");
}

double compute_batch_gradients(const PolicyWeights& weights, const TrainingDataset& dataset,
                               std::span<const std::size_t> indices, std::vector<double>& grad,
                               ExecMode mode, GradWorkspace* workspace) {
    if (indices.empty()) throw std::invalid_argument("gradient batch is empty");
    const std::size_t P = weights.params.size();
    grad.assign(P, 0.0);
    const std::size_t B = indices.size();
    double loss_sum = 0.0;

    // Both paths are bit-identical (tested); with one thread the serial path
    // skips the per-example buffers.
    if (mode == ExecMode::Parallel && max_threads() == 1) mode = ExecMode::Serial;

    if (mode == ExecMode::Serial) {
        ForwardBuffers fb;
        BackwardBuffers bb;
        std::vector<double> scratch(P);
        for (std::size_t k = 0; k < B; ++k) {
            std::fill(scratch.begin(), scratch.end(), 0.0);
            const TrainingExample& ex = dataset.examples[indices[k]];
            loss_sum += example_loss_and_grad(weights, ex.observation,
                                              static_cast<int>(ex.action), scratch, fb, bb);
            for (std::size_t i = 0; i < P; ++i) grad[i] += scratch[i];
        }
    } else {
        GradWorkspace local;
        GradWorkspace& ws = workspace ? *workspace : local;
        ws.per_example.resize(B);
        ws.losses.assign(B, 0.0);
        const auto n = static_cast<std::ptrdiff_t>(B);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
        for (std::ptrdiff_t k = 0; k < n; ++k) {
            ws.per_example[k].assign(P, 0.0);
            ForwardBuffers fb;
            BackwardBuffers bb;
            const TrainingExample& ex = dataset.examples[indices[k]];
            ws.losses[k] = example_loss_and_grad(weights, ex.observation,
                                                 static_cast<int>(ex.action),
                                                 ws.per_example[k], fb, bb);
        }
        // Reduce in example order per parameter; bit-equal to the serial path.
        const auto np = static_cast<std::ptrdiff_t>(P);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
        for (std::ptrdiff_t i = 0; i < np; ++i) {
            double sum = 0.0;
            for (std::size_t k = 0; k < B; ++k) sum += ws.per_example[k][i];
            grad[i] += sum;
        }
        for (std::size_t k = 0; k < B; ++k) loss_sum += ws.losses[k];
    }

    const double inv = 1.0 / static_cast<double>(B);
    for (std::size_t i = 0; i < P; ++i) grad[i] *= inv;
    return loss_sum * inv;
}

double compute_batch_loss(const PolicyWeights& weights, const TrainingDataset& dataset,
                          std::span<const std::size_t> indices) {
    if (indices.empty()) throw std::invalid_argument("loss batch is empty");
    ForwardBuffers fb;
    double loss_sum = 0.0;
    for (std::size_t idx : indices) {
        const TrainingExample& ex = dataset.examples[idx];
        run_forward(weights, ex.observation, fb);
        loss_sum += -std::log(std::max(fb.probs[static_cast<int>(ex.action)], 1e-300));
    }
    return loss_sum / static_cast<double>(indices.size());
}

TrainResult train(const TrainingDataset& dataset, const TrainHyperparams& hyper, ExecMode mode) {
    hyper.validate();
    if (dataset.empty()) throw std::invalid_argument("training dataset is empty");

    NetworkShape shape;
    shape.input_size = dataset.examples.front().observation.size;
    for (const auto& ex : dataset.examples) {
        if (ex.observation.size != shape.input_size) {
            throw std::invalid_argument("training observations have mixed sizes");
        }
    }

    TrainResult result;
    result.weights = init_network(hyper.seed, shape);
    const std::size_t P = result.weights.params.size();
    const std::size_t N = dataset.size();
    const std::size_t B = static_cast<std::size_t>(hyper.batch_size);

    std::vector<double> grad, m(P, 0.0), v(P, 0.0);
    GradWorkspace workspace;
    std::vector<std::size_t> order(N);
    long step = 0;

    for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        Rng shuffle_rng = Rng::derived(hyper.seed, kStreamEpochShuffleBase + epoch);
        shuffle_rng.shuffle(order);

        double epoch_loss_sum = 0.0;
        for (std::size_t start = 0; start < N; start += B) {
            const std::size_t count = std::min(B, N - start);
            std::span<const std::size_t> batch(order.data() + start, count);
            const double loss = compute_batch_gradients(result.weights, dataset, batch, grad,
                                                        mode, &workspace);
            epoch_loss_sum += loss * static_cast<double>(count);

            ++step;
            const double bc1 = 1.0 - std::pow(kAdamBeta1, step);
            const double bc2 = 1.0 - std::pow(kAdamBeta2, step);
            float* w = result.weights.params.data();
            const auto np = static_cast<std::ptrdiff_t>(P);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (mode == ExecMode::Parallel)
#endif
            for (std::ptrdiff_t i = 0; i < np; ++i) {
                const double g = grad[i];
                m[i] = kAdamBeta1 * m[i] + (1.0 - kAdamBeta1) * g;
                v[i] = kAdamBeta2 * v[i] + (1.0 - kAdamBeta2) * g * g;
                const double mhat = m[i] / bc1;
                const double vhat = v[i] / bc2;
                w[i] = static_cast<float>(static_cast<double>(w[i]) -
                                          hyper.learning_rate * mhat / (std::sqrt(vhat) + kAdamEpsilon));
            }
        }
        result.epoch_loss.push_back(epoch_loss_sum / static_cast<double>(N));
    }
    return result;
}

namespace {

void put_u32(std::string& out, std::uint32_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
    out.push_back(static_cast<char>((v >> 16) & 0xff));
    out.push_back(static_cast<char>((v >> 24) & 0xff));
}

struct Reader {
    const std::string& data;
    std::size_t pos = 0;

    std::uint32_t u32() {
        if (pos + 4 > data.size()) throw WeightsMalformedError("weights file is truncated");
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) {
            v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data[pos + i])) << (8 * i);
        }
        pos += 4;
        return v;
    }
};

constexpr char kWeightsMagic[4] = {'M', 'M', 'P', 'W'};

}  // namespace

void save_weights(const PolicyWeights& weights, const std::string& path) {
    const auto specs = tensor_layout(weights.shape);
    std::string out;
    out.reserve(64 + weights.params.size() * 4);
    out.append(kWeightsMagic, 4);
    put_u32(out, kWeightsFormatVersion);
    put_u32(out, static_cast<std::uint32_t>(specs.size()));
    for (const auto& spec : specs) {
        put_u32(out, static_cast<std::uint32_t>(spec.dims.size()));
        for (int d : spec.dims) put_u32(out, static_cast<std::uint32_t>(d));
    }
    for (float f : weights.params) put_u32(out, std::bit_cast<std::uint32_t>(f));

    std::ofstream file(path, std::ios::binary);
    if (!file) throw WeightsIoError("cannot open " + path + " for writing");
    file.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!file) throw WeightsIoError("failed writing " + path);
}

PolicyWeights load_weights(const std::string& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) throw WeightsIoError("cannot open " + path);
    std::string data((std::istreambuf_iterator<char>(file)), std::istreambuf_iterator<char>());

    if (data.size() < 4 || std::memcmp(data.data(), kWeightsMagic, 4) != 0) {
        throw WeightsMalformedError("not a policy weights file: " + path);
    }
    Reader r{data, 4};
    const std::uint32_t version = r.u32();
    if (version != kWeightsFormatVersion) {
        throw WeightsVersionError("unsupported weights format version " + std::to_string(version));
    }
    const std::uint32_t n_tensors = r.u32();
    if (n_tensors != 10) {
        throw WeightsShapeError("expected 10 tensors, found " + std::to_string(n_tensors));
    }
    std::vector<std::vector<int>> dims(n_tensors);
    for (auto& d : dims) {
        const std::uint32_t ndim = r.u32();
        if (ndim == 0 || ndim > 4) throw WeightsShapeError("tensor rank out of range");
        d.resize(ndim);
        for (auto& v : d) {
            v = static_cast<int>(r.u32());
            if (v <= 0 || v > (1 << 24)) throw WeightsShapeError("tensor dimension out of range");
        }
    }

    // Reconstruct the architecture from the table, then demand an exact match.
    if (dims[0].size() != 4 || dims[4].size() != 4 || dims[6].size() != 2 || dims[8].size() != 2) {
        throw WeightsShapeError("tensor table does not describe the expected architecture");
    }
    NetworkShape shape;
    shape.conv_channels = {dims[0][0], dims[2].size() == 4 ? dims[2][0] : 0, dims[4][0]};
    shape.dense_hidden = dims[6][0];
    shape.num_actions = dims[8][0];
    const int c3 = shape.conv_channels[2];
    const int flat = dims[6][1];
    if (c3 <= 0 || flat % c3 != 0) throw WeightsShapeError("flatten length inconsistent with conv channels");
    const int pooled_sq = flat / c3;
    const int pooled = static_cast<int>(std::lround(std::sqrt(static_cast<double>(pooled_sq))));
    if (pooled * pooled != pooled_sq) throw WeightsShapeError("flatten length is not a square grid");
    shape.input_size = pooled * 4;
    try {
        shape.validate();
    } catch (const std::invalid_argument& e) {
        throw WeightsShapeError(e.what());
    }
    const auto specs = tensor_layout(shape);
    for (std::size_t i = 0; i < specs.size(); ++i) {
        if (std::vector<int>(specs[i].dims) != dims[i]) {
            throw WeightsShapeError("tensor " + specs[i].name + " has unexpected dimensions");
        }
    }

    const std::size_t count = parameter_count(shape);
    if (data.size() - r.pos != count * 4) {
        throw WeightsMalformedError("weights blob has wrong length");
    }
    PolicyWeights weights;
    weights.shape = shape;
    weights.params.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        weights.params[i] = std::bit_cast<float>(r.u32());
    }
    return weights;
}

}  // namespace mm
