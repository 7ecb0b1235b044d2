#include "qstab/mlp.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "qstab/errors.hpp"

namespace qstab {

LayerStack LayerStack::zeros_like(const LayerStack& other) {
  LayerStack z;
  z.w.reserve(other.w.size());
  z.b.reserve(other.b.size());
  for (const auto& m : other.w) z.w.push_back(Eigen::MatrixXd::Zero(m.rows(), m.cols()));
  for (const auto& v : other.b) z.b.push_back(Eigen::VectorXd::Zero(v.size()));
  return z;
}

void LayerStack::set_zero() {
  for (auto& m : w) m.setZero();
  for (auto& v : b) v.setZero();
}

bool LayerStack::all_finite() const {
  for (const auto& m : w)
    if (!m.allFinite()) return false;
  for (const auto& v : b)
    if (!v.allFinite()) return false;
  return true;
}

std::size_t LayerStack::param_count() const {
  std::size_t n = 0;
  for (const auto& m : w) n += static_cast<std::size_t>(m.size());
  for (const auto& v : b) n += static_cast<std::size_t>(v.size());
  return n;
}

Eigen::MatrixXd orthogonal_matrix(int rows, int cols, double gain,
                                  RandomStream& rng) {
  const bool flip = rows < cols;
  const int r = flip ? cols : rows;
  const int c = flip ? rows : cols;
  Eigen::MatrixXd a(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) a(i, j) = rng.gaussian();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(r, c);
  const Eigen::VectorXd diag = qr.matrixQR().diagonal().head(c);
  for (int j = 0; j < c; ++j)
    if (diag(j) < 0.0) q.col(j) = -q.col(j);
  if (flip) return gain * q.transpose();
  return gain * q;
}

LayerStack make_mlp(int input_dim, const std::vector<int>& hidden, int output_dim,
                    double hidden_gain, double out_gain, RandomStream& rng) {
  LayerStack p;
  int in = input_dim;
  for (int h : hidden) {
    p.w.push_back(orthogonal_matrix(h, in, hidden_gain, rng));
    p.b.push_back(Eigen::VectorXd::Zero(h));
    in = h;
  }
  p.w.push_back(orthogonal_matrix(output_dim, in, out_gain, rng));
  p.b.push_back(Eigen::VectorXd::Zero(output_dim));
  return p;
}

LayerStack make_zero_mlp(int input_dim, const std::vector<int>& hidden,
                         int output_dim) {
  LayerStack p;
  int in = input_dim;
  for (int h : hidden) {
    p.w.push_back(Eigen::MatrixXd::Zero(h, in));
    p.b.push_back(Eigen::VectorXd::Zero(h));
    in = h;
  }
  p.w.push_back(Eigen::MatrixXd::Zero(output_dim, in));
  p.b.push_back(Eigen::VectorXd::Zero(output_dim));
  return p;
}

Eigen::VectorXd mlp_forward(const LayerStack& params, const Eigen::VectorXd& x) {
  const int layers = static_cast<int>(params.w.size());
  if (x.size() != params.w[0].cols())
    throw ContractError("mlp_forward: input width mismatch");
  Eigen::VectorXd h = x;
  for (int l = 0; l < layers; ++l) {
    h = (params.w[l] * h + params.b[l]).eval();
    if (l + 1 < layers) h = h.array().tanh();
  }
  return h;
}

Eigen::VectorXd mlp_forward(const LayerStack& params, const Eigen::VectorXd& x,
                            ForwardCache& cache) {
  const int layers = static_cast<int>(params.w.size());
  if (x.size() != params.w[0].cols())
    throw ContractError("mlp_forward: input width mismatch");
  cache.act.assign(1, x);
  for (int l = 0; l < layers; ++l) {
    Eigen::VectorXd h = params.w[l] * cache.act.back() + params.b[l];
    if (l + 1 < layers) h = h.array().tanh();
    cache.act.push_back(std::move(h));
  }
  return cache.act.back();
}

void mlp_backward(const LayerStack& params, const ForwardCache& cache,
                  const Eigen::VectorXd& out_grad, LayerStack& grads) {
  const int layers = static_cast<int>(params.w.size());
  if (static_cast<int>(cache.act.size()) != layers + 1)
    throw ContractError("mlp_backward: cache does not match network depth");
  if (out_grad.size() != params.b[layers - 1].size())
    throw ContractError("mlp_backward: output gradient width mismatch");

  Eigen::VectorXd delta = out_grad;  // gradient wrt current layer pre-activation
  for (int l = layers - 1; l >= 0; --l) {
    // hidden activations are tanh; act[l+1] stores tanh(z), so dz = (1 - a^2)
    if (l + 1 < layers)
      delta = (delta.array() *
               (1.0 - cache.act[l + 1].array().square()))
                  .matrix();
    grads.w[l].noalias() += delta * cache.act[l].transpose();
    grads.b[l] += delta;
    if (l > 0) delta = (params.w[l].transpose() * delta).eval();
  }
}

AdamState AdamState::init(const LayerStack& params, double lr, double beta1,
                          double beta2) {
  AdamState s;
  s.m = LayerStack::zeros_like(params);
  s.v = LayerStack::zeros_like(params);
  s.lr = lr;
  s.beta1 = beta1;
  s.beta2 = beta2;
  return s;
}

namespace {
void adam_update_tensor(Eigen::Ref<Eigen::MatrixXd> p,
                        const Eigen::Ref<const Eigen::MatrixXd>& g,
                        Eigen::Ref<Eigen::MatrixXd> m,
                        Eigen::Ref<Eigen::MatrixXd> v, const AdamState& s,
                        double bc1, double bc2) {
  m = s.beta1 * m + (1.0 - s.beta1) * g;
  v = (s.beta2 * v.array() + (1.0 - s.beta2) * g.array().square()).matrix();
  p.array() -= s.lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + s.eps);
}
}  // namespace

void adam_step(LayerStack& params, const LayerStack& grads, AdamState& state) {
  if (!grads.all_finite())
    throw TrainingError("adam_step: non-finite gradient");
  state.step += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t l = 0; l < params.w.size(); ++l) {
    adam_update_tensor(params.w[l], grads.w[l], state.m.w[l], state.v.w[l],
                       state, bc1, bc2);
    adam_update_tensor(params.b[l], grads.b[l], state.m.b[l], state.v.b[l],
                       state, bc1, bc2);
  }
}

double global_grad_norm(const std::vector<const LayerStack*>& stacks) {
  double sq = 0.0;
  for (const LayerStack* s : stacks) {
    for (const auto& m : s->w) sq += m.squaredNorm();
    for (const auto& v : s->b) sq += v.squaredNorm();
  }
  return std::sqrt(sq);
}

void scale_grads(std::vector<LayerStack*> stacks, double factor) {
  for (LayerStack* s : stacks) {
    for (auto& m : s->w) m *= factor;
    for (auto& v : s->b) v *= factor;
  }
}

Eigen::VectorXd log_softmax(const Eigen::VectorXd& logits) {
  const double mx = logits.maxCoeff();
  const double lse = mx + std::log((logits.array() - mx).exp().sum());
  return logits.array() - lse;
}

SampleResult categorical_sample(const Eigen::VectorXd& logits,
                                RandomStream& rng) {
  const Eigen::VectorXd lsm = log_softmax(logits);
  const double u = rng.uniform();
  double acc = 0.0;
  const int n = static_cast<int>(lsm.size());
  for (int i = 0; i < n; ++i) {
    acc += std::exp(lsm(i));
    if (u < acc) return {i, lsm(i)};
  }
  return {n - 1, lsm(n - 1)};  // guard against roundoff in the cumulative sum
}

double categorical_entropy(const Eigen::VectorXd& logits) {
  const Eigen::VectorXd lsm = log_softmax(logits);
  return -(lsm.array().exp() * lsm.array()).sum();
}

Eigen::VectorXd logprob_grad(const Eigen::VectorXd& logits, int action) {
  Eigen::VectorXd g = -log_softmax(logits).array().exp();
  g(action) += 1.0;
  return g;
}

Eigen::VectorXd entropy_grad(const Eigen::VectorXd& logits) {
  const Eigen::VectorXd lsm = log_softmax(logits);
  const Eigen::VectorXd p = lsm.array().exp();
  const double h = -(p.array() * lsm.array()).sum();
  // dH/dz_j = -p_j (log p_j + H)
  return (-p.array() * (lsm.array() + h)).matrix();
}

namespace {
constexpr char kMagic[8] = {'Q', 'S', 'T', 'A', 'B', 'N', 'E', 'T'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ofstream& f, const T& v) {
  f.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& f) {
  T v{};
  f.read(reinterpret_cast<char*>(&v), sizeof(T));
  return v;
}
}  // namespace

void save_params(const LayerStack& params, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("save_params: cannot open " + path);
  f.write(kMagic, sizeof(kMagic));
  write_pod(f, kVersion);
  write_pod(f, static_cast<std::uint32_t>(params.w.size()));
  for (const auto& m : params.w) {
    write_pod(f, static_cast<std::uint32_t>(m.rows()));
    write_pod(f, static_cast<std::uint32_t>(m.cols()));
  }
  for (std::size_t l = 0; l < params.w.size(); ++l) {
    const auto& m = params.w[l];
    for (int i = 0; i < m.rows(); ++i)
      for (int j = 0; j < m.cols(); ++j) write_pod(f, m(i, j));
    for (int i = 0; i < params.b[l].size(); ++i) write_pod(f, params.b[l](i));
  }
  if (!f) throw ConfigError("save_params: write failed for " + path);
}

LayerStack load_params(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("load_params: cannot open " + path);
  char magic[8];
  f.read(magic, sizeof(magic));
  if (!f || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw ConfigError("load_params: bad magic in " + path);
  if (read_pod<std::uint32_t>(f) != kVersion)
    throw ConfigError("load_params: unsupported version in " + path);
  const auto layers = read_pod<std::uint32_t>(f);
  if (layers == 0 || layers > 1024)
    throw ConfigError("load_params: implausible layer count in " + path);
  std::vector<std::pair<std::uint32_t, std::uint32_t>> shapes(layers);
  for (auto& sh : shapes) {
    sh.first = read_pod<std::uint32_t>(f);
    sh.second = read_pod<std::uint32_t>(f);
  }
  LayerStack p;
  for (auto [rows, cols] : shapes) {
    Eigen::MatrixXd m(rows, cols);
    for (std::uint32_t i = 0; i < rows; ++i)
      for (std::uint32_t j = 0; j < cols; ++j) m(i, j) = read_pod<double>(f);
    Eigen::VectorXd b(rows);
    for (std::uint32_t i = 0; i < rows; ++i) b(i) = read_pod<double>(f);
    p.w.push_back(std::move(m));
    p.b.push_back(std::move(b));
  }
  if (!f) throw ConfigError("load_params: truncated file " + path);
  return p;
}

}  // namespace qstab
