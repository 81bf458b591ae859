#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mm/dataset.hpp"
#include "mm/exec.hpp"
#include "mm/observation.hpp"
#include "mm/rng.hpp"

namespace mm {

struct ActionDistribution {
    // Ordered (NoChange, ChangeToEmpty, ChangeToSolid); sums to 1.
    std::array<double, kNumActions> probabilities{};
};

// Conv(3x3, same, ReLU) -> maxpool(2) -> conv -> maxpool(2) -> conv ->
// flatten -> dense(ReLU) -> dense -> softmax. Spatial sizes for the default
// 8x8 input: 8 -> 8 -> 4 -> 4 -> 2 -> 2, flatten 512.
struct NetworkShape {
    int input_size = kCropSize;
    std::array<int, 3> conv_channels{32, 64, 128};
    int dense_hidden = 256;
    int num_actions = kNumActions;

    int pooled_size() const { return input_size / 4; }
    int flatten_len() const { return conv_channels[2] * pooled_size() * pooled_size(); }
    void validate() const;

    bool operator==(const NetworkShape&) const = default;
};

struct TensorSpec {
    std::string name;
    std::vector<int> dims;
    std::size_t offset = 0;
    std::size_t size = 0;
};

// Fixed parameter order: conv1 w/b, conv2 w/b, conv3 w/b, dense1 w/b,
// dense2 w/b. Conv kernels are [out][in][ky][kx], dense rows are [out][in].
std::vector<TensorSpec> tensor_layout(const NetworkShape& shape);
std::size_t parameter_count(const NetworkShape& shape);

// Parameters as one flat float32 vector in tensor_layout order. All network
// arithmetic runs in double; float32 is the storage and file contract.
struct PolicyWeights {
    NetworkShape shape;
    std::vector<float> params;

    std::size_t parameter_count() const { return params.size(); }
    bool operator==(const PolicyWeights&) const = default;
};

// Fan-in-scaled uniform weights, zero biases; deterministic per seed.
PolicyWeights init_network(std::uint64_t seed, const NetworkShape& shape = {});

// Softmax output over the three actions (max-subtraction stabilized).
// Throws std::invalid_argument when the observation does not match the
// network input size.
ActionDistribution forward(const PolicyWeights& weights, const Observation& obs);

// Categorical sample resolved from a pre-drawn uniform in [0, 1).
MutationAction pick_action(const ActionDistribution& dist, double u);
MutationAction sample_action(const ActionDistribution& dist, Rng& rng);

struct TrainHyperparams {
    double learning_rate = 1e-4;
    int batch_size = 32;
    int epochs = 2;
    std::uint64_t seed = 0;

    void validate() const;
};

struct TrainResult {
    PolicyWeights weights;
    std::vector<double> epoch_loss;  // mean cross-entropy per epoch
};

// Minibatch SGD with Adam (betas 0.9/0.999, epsilon 1e-8) minimizing mean
// categorical cross-entropy. Fresh weights from init_network(hyper.seed);
// each epoch reshuffles with a per-epoch stream of the training seed; the
// last partial batch is kept. Deterministic for a fixed dataset and seed in
// both exec modes. Throws std::invalid_argument on an empty dataset.
TrainResult train(const TrainingDataset& dataset, const TrainHyperparams& hyper,
                  ExecMode mode = ExecMode::Parallel);

// --- gradient internals, exposed for the finite-difference check and the
// --- serial-vs-parallel kernel tests

// Per-example gradient scratch for the parallel batch kernel.
struct GradWorkspace {
    std::vector<std::vector<double>> per_example;
    std::vector<double> losses;
};

// Mean cross-entropy over the index view of the dataset; writes the mean
// gradient (same flat layout as params) into grad. Serial mode accumulates
// example by example through one scratch buffer; parallel mode fills
// per-example buffers and reduces them in index order. Both orders perform
// the identical addition sequence, so the results are bit-equal.
double compute_batch_gradients(const PolicyWeights& weights, const TrainingDataset& dataset,
                               std::span<const std::size_t> indices, std::vector<double>& grad,
                               ExecMode mode, GradWorkspace* workspace = nullptr);

// Forward-only mean cross-entropy, used as the loss oracle for finite
// differences.
double compute_batch_loss(const PolicyWeights& weights, const TrainingDataset& dataset,
                          std::span<const std::size_t> indices);

// --- weights file I/O

inline constexpr std::uint32_t kWeightsFormatVersion = 1;

struct WeightsIoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct WeightsMalformedError : WeightsIoError {
    using WeightsIoError::WeightsIoError;
};
struct WeightsVersionError : WeightsIoError {
    using WeightsIoError::WeightsIoError;
};
struct WeightsShapeError : WeightsIoError {
    using WeightsIoError::WeightsIoError;
};

// Versioned binary container: magic, format version, tensor shape table,
// little-endian float32 parameter blob in tensor_layout order.
// load_weights(save_weights(w)) == w exactly.
void save_weights(const PolicyWeights& weights, const std::string& path);
PolicyWeights load_weights(const std::string& path);

}  // namespace mm
