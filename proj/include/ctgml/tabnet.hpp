#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ctgml/dataset.hpp"
#include "ctgml/matrix.hpp"
#include "ctgml/rng.hpp"

namespace ctgml {

struct TabNetConfig {
    std::size_t n_steps = 3;
    std::size_t n_d = 8;
    std::size_t n_a = 8;
    double gamma = 1.3;        // prior relaxation, >= 1
    double lambda = 1e-3;      // sparsity weight
    std::size_t batch_size = 128;
    double learning_rate = 0.02;
    double lr_decay = 0.95;    // multiplicative, per epoch
    std::size_t epochs = 200;
    double val_fraction = 0.1;  // 0 disables early stopping
    std::size_t patience = 30;
    double bn_momentum = 0.9;  // weight kept by the running statistics
    std::uint64_t seed = 1;

    void validate() const;  // throws ArgumentError
};

struct BnLayer {
    Matrix gamma;  // 1 x width
    Matrix beta;   // 1 x width
    std::vector<double> running_mean;
    std::vector<double> running_var;
};

struct GluBlock {
    Matrix w;  // in x 2*width
    Matrix b;  // 1 x 2*width
    BnLayer bn;
};

// The affine map is shared across every use site; batch norm is not, because
// each site sees a different activation distribution (unmasked initial pass
// vs per-step masked features). bn[0] belongs to the initial attention stack,
// bn[1 + s] to decision step s.
struct SharedGluBlock {
    Matrix w;  // in x 2*width
    Matrix b;  // 1 x 2*width
    std::vector<BnLayer> bn;  // n_steps + 1 instances
};

struct AttentiveLayer {
    Matrix w;  // n_a x d_in
    Matrix b;  // 1 x d_in
    BnLayer bn;
};

struct TabNetParams {
    std::size_t d_in = 0;
    std::vector<double> input_mean;  // statistics-only input normalization
    std::vector<double> input_var;
    std::vector<SharedGluBlock> shared;           // 2 blocks, affine reused every step
    std::vector<std::vector<GluBlock>> per_step;  // n_steps x 2 blocks
    std::vector<AttentiveLayer> attentive;        // n_steps
    Matrix head_w;  // n_d x 3
    Matrix head_b;  // 1 x 3
};

struct ForwardTrace {
    Matrix logits;                  // n x 3
    std::vector<Matrix> masks;      // n_steps of n x d_in
    std::vector<Matrix> decisions;  // n_steps of n x n_d, rectified
    double sparsity_penalty = 0.0;  // mean over steps and batch
};

TabNetParams tabnet_init(std::size_t d_in, const TabNetConfig& cfg, Rng& rng);

// Train mode normalizes with batch statistics and updates the stored running
// statistics; eval mode reads the running statistics and leaves params alone.
ForwardTrace tabnet_forward(const Matrix& x, TabNetParams& params, const TabNetConfig& cfg, bool train);
ForwardTrace tabnet_forward(const Matrix& x, const TabNetParams& params, const TabNetConfig& cfg);

// Mean cross-entropy + lambda * sparsity penalty.
double tabnet_loss(const ForwardTrace& trace, const std::vector<ClassLabel>& y, double lambda);

struct TrainLogEntry {
    std::size_t epoch = 0;
    double train_loss = 0.0;
    double val_accuracy = 0.0;  // NaN when no validation slice
};

struct TabNetFitResult {
    TabNetParams params;
    std::vector<TrainLogEntry> log;
};

TabNetFitResult tabnet_fit(const Matrix& x, const std::vector<ClassLabel>& y, const TabNetConfig& cfg);

std::vector<ClassLabel> tabnet_predict(const TabNetParams& params, const TabNetConfig& cfg, const Matrix& x);

// Loss and analytic gradient for one train-mode batch. The gradient is laid
// out in the same fixed tensor order the optimizer and flatten/assign use.
// Updates running batch-norm statistics as a side effect (train mode).
double tabnet_loss_gradient(const Matrix& x, const std::vector<ClassLabel>& y, TabNetParams& params,
                            const TabNetConfig& cfg, std::vector<double>* grad);
std::vector<double> flatten_tabnet_params(const TabNetParams& params);
void assign_tabnet_params(TabNetParams& params, std::span<const double> flat);

// Aggregate importance: sum over steps of (total rectified decision output)
// times the step mask, row-normalized. Degenerate all-zero rows come back
// uniform and append a warning when `warnings` is given.
Matrix feature_importance(const ForwardTrace& trace, std::vector<std::string>* warnings = nullptr);

void save_tabnet_params(const TabNetParams& params, const std::filesystem::path& path);
TabNetParams load_tabnet_params(const std::filesystem::path& path);

void write_training_log(const std::vector<TrainLogEntry>& log, const std::filesystem::path& path);

}  // namespace ctgml
