#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "qstab/rng.hpp"

namespace qstab {

// Bag of per-layer tensors. The same shape is used for parameters, gradients
// and Adam moment accumulators.
struct LayerStack {
  std::vector<Eigen::MatrixXd> w;  // (out x in)
  std::vector<Eigen::VectorXd> b;

  static LayerStack zeros_like(const LayerStack& other);
  void set_zero();
  bool all_finite() const;
  std::size_t param_count() const;
};

// Semi-orthogonal matrix scaled by gain (rows of a random Gaussian matrix
// orthonormalized via QR, sign-fixed by the R diagonal).
Eigen::MatrixXd orthogonal_matrix(int rows, int cols, double gain,
                                  RandomStream& rng);

// input -> hidden... -> output with tanh on hidden layers, linear output.
// Hidden layers use hidden_gain, the output layer out_gain; biases start at 0.
LayerStack make_mlp(int input_dim, const std::vector<int>& hidden, int output_dim,
                    double hidden_gain, double out_gain, RandomStream& rng);

// All-zero network of the same architecture; as a policy it acts uniformly at
// random regardless of the observation.
LayerStack make_zero_mlp(int input_dim, const std::vector<int>& hidden,
                         int output_dim);

// Activations recorded by the forward pass; act[0] is the input.
struct ForwardCache {
  std::vector<Eigen::VectorXd> act;
};

Eigen::VectorXd mlp_forward(const LayerStack& params, const Eigen::VectorXd& x);
Eigen::VectorXd mlp_forward(const LayerStack& params, const Eigen::VectorXd& x,
                            ForwardCache& cache);

// Exact reverse-mode gradients of the forward map, accumulated into grads
// (callers zero grads when starting a fresh batch).
void mlp_backward(const LayerStack& params, const ForwardCache& cache,
                  const Eigen::VectorXd& out_grad, LayerStack& grads);

struct AdamState {
  LayerStack m, v;
  long step = 0;
  double lr = 2.5e-4;
  double beta1 = 0.9;
  double beta2 = 0.9;
  double eps = 1e-8;

  static AdamState init(const LayerStack& params, double lr, double beta1,
                        double beta2);
};

// Bias-corrected Adam update. Throws TrainingError on non-finite gradients.
void adam_step(LayerStack& params, const LayerStack& grads, AdamState& state);

// l2 norm over every parameter gradient in the given stacks.
double global_grad_norm(const std::vector<const LayerStack*>& stacks);
void scale_grads(std::vector<LayerStack*> stacks, double factor);

// Max-subtraction stabilized log-softmax.
Eigen::VectorXd log_softmax(const Eigen::VectorXd& logits);

struct SampleResult {
  int action = 0;
  double logprob = 0.0;
};
SampleResult categorical_sample(const Eigen::VectorXd& logits, RandomStream& rng);

double categorical_entropy(const Eigen::VectorXd& logits);

// d(log p(a)) / d logits and d(entropy) / d logits.
Eigen::VectorXd logprob_grad(const Eigen::VectorXd& logits, int action);
Eigen::VectorXd entropy_grad(const Eigen::VectorXd& logits);

// Binary checkpoint, layout documented in docs/FORMATS.md.
void save_params(const LayerStack& params, const std::string& path);
LayerStack load_params(const std::string& path);

}  // namespace qstab
