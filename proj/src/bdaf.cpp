#include "rauf/bdaf.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "rauf/errors.hpp"
#include "rauf/rng.hpp"

namespace rauf {

FeatureMap FeatureMap::zeros(std::size_t height, std::size_t width,
                             std::size_t channels) {
  return {height, width, channels,
          std::vector<double>(height * width * channels, 0.0)};
}

void FeatureMap::validate() const {
  if (height == 0 || width == 0 || channels == 0)
    throw ConfigError("feature map: dimensions must be positive");
  if (data.size() != height * width * channels)
    throw ConfigError("feature map: data extent disagrees with dimensions");
}

Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd out(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const Eigen::RowVectorXd shifted =
        logits.row(i).array() - logits.row(i).maxCoeff();
    const Eigen::RowVectorXd exps = shifted.array().exp();
    out.row(i) = exps / exps.sum();
  }
  return out;
}

Eigen::MatrixXd softmax_rows_backward(const Eigen::MatrixXd& softmax_out,
                                      const Eigen::MatrixXd& upstream) {
  Eigen::MatrixXd out(softmax_out.rows(), softmax_out.cols());
  for (Eigen::Index i = 0; i < softmax_out.rows(); ++i) {
    const double dot = upstream.row(i).dot(softmax_out.row(i));
    out.row(i) = softmax_out.row(i).array() * (upstream.row(i).array() - dot);
  }
  return out;
}

Eigen::MatrixXd softplus(const Eigen::MatrixXd& x) {
  return x.unaryExpr([](double v) {
    return std::max(v, 0.0) + std::log1p(std::exp(-std::abs(v)));
  });
}

Eigen::MatrixXd sigmoid(const Eigen::MatrixXd& x) {
  return x.unaryExpr([](double v) {
    if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
    const double e = std::exp(v);
    return e / (1.0 + e);
  });
}

Eigen::MatrixXd positional_encoding(std::size_t tokens, std::size_t channels) {
  Eigen::MatrixXd pe(tokens, channels);
  for (std::size_t t = 0; t < tokens; ++t)
    for (std::size_t c = 0; c < channels; ++c) {
      const double rate = std::pow(
          10000.0, static_cast<double>(c / 2 * 2) / static_cast<double>(channels));
      const double phase = static_cast<double>(t) / rate;
      pe(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(c)) =
          c % 2 == 0 ? std::sin(phase) : std::cos(phase);
    }
  return pe;
}

TokenSequence patchify(const FeatureMap& f, std::size_t patch, bool positional) {
  f.validate();
  if (patch == 0 || f.height % patch != 0 || f.width % patch != 0)
    throw ConfigError("patchify: patch size must divide height and width");
  const std::size_t rows = f.height / patch, cols = f.width / patch;
  const std::size_t token_channels = patch * patch * f.channels;
  TokenSequence tokens(rows * cols, token_channels);
  for (std::size_t py = 0; py < rows; ++py)
    for (std::size_t px = 0; px < cols; ++px) {
      const auto t = static_cast<Eigen::Index>(py * cols + px);
      for (std::size_t c = 0; c < f.channels; ++c)
        for (std::size_t dy = 0; dy < patch; ++dy)
          for (std::size_t dx = 0; dx < patch; ++dx)
            tokens(t, static_cast<Eigen::Index>((c * patch + dy) * patch + dx)) =
                f.at(py * patch + dy, px * patch + dx, c);
    }
  if (positional)
    tokens += positional_encoding(rows * cols, token_channels);
  return tokens;
}

FeatureMap unpatchify(const TokenSequence& tokens, std::size_t height,
                      std::size_t width, std::size_t channels,
                      std::size_t patch) {
  if (patch == 0 || height % patch != 0 || width % patch != 0)
    throw ConfigError("unpatchify: patch size must divide height and width");
  const std::size_t rows = height / patch, cols = width / patch;
  if (static_cast<std::size_t>(tokens.rows()) != rows * cols ||
      static_cast<std::size_t>(tokens.cols()) != patch * patch * channels)
    throw ConfigError("unpatchify: token extents disagree with the target map");
  FeatureMap f = FeatureMap::zeros(height, width, channels);
  for (std::size_t py = 0; py < rows; ++py)
    for (std::size_t px = 0; px < cols; ++px) {
      const auto t = static_cast<Eigen::Index>(py * cols + px);
      for (std::size_t c = 0; c < channels; ++c)
        for (std::size_t dy = 0; dy < patch; ++dy)
          for (std::size_t dx = 0; dx < patch; ++dx)
            f.at(py * patch + dy, px * patch + dx, c) =
                tokens(t, static_cast<Eigen::Index>((c * patch + dy) * patch + dx));
    }
  return f;
}

namespace {

std::size_t bottleneck_mid(std::size_t channels) {
  return std::max<std::size_t>(1, channels / 2);
}

void check_shape(const Eigen::MatrixXd& m, std::size_t rows, std::size_t cols,
                 const char* name) {
  if (static_cast<std::size_t>(m.rows()) != rows ||
      static_cast<std::size_t>(m.cols()) != cols)
    throw ConfigError(std::string("weights: ") + name + " has wrong shape");
  if (!m.allFinite())
    throw ConfigError(std::string("weights: ") + name + " is not finite");
}

Eigen::MatrixXd random_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rng.uniform(-0.1, 0.1);
  return m;
}

}  // namespace

AttentionWeights AttentionWeights::zeros(std::size_t channels, std::size_t d_k) {
  if (channels == 0 || d_k == 0)
    throw ConfigError("weights: channels and d_k must be positive");
  const std::size_t mid = bottleneck_mid(channels);
  AttentionWeights w;
  w.channels = channels;
  w.d_k = d_k;
  const auto zero = [](std::size_t r, std::size_t c) {
    return Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(r),
                                 static_cast<Eigen::Index>(c));
  };
  w.w_s_query = zero(channels, d_k);
  w.w_d_key = zero(channels, d_k);
  w.w_d_value = zero(channels, d_k);
  w.w_d_query = zero(channels, d_k);
  w.w_s_key = zero(channels, d_k);
  w.w_s_value = zero(channels, d_k);
  w.fuse_doppler = {zero(channels + d_k, channels),
                    Eigen::VectorXd::Zero(static_cast<Eigen::Index>(channels)),
                    zero(channels, channels),
                    Eigen::VectorXd::Zero(static_cast<Eigen::Index>(channels))};
  w.projection = {zero(channels, mid),
                  Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mid)),
                  zero(mid, channels),
                  Eigen::VectorXd::Zero(static_cast<Eigen::Index>(channels))};
  w.fuse_spatial = w.fuse_doppler;
  return w;
}

AttentionWeights AttentionWeights::random(std::size_t channels, std::size_t d_k,
                                          std::uint64_t seed) {
  AttentionWeights w = zeros(channels, d_k);
  Rng rng(seed);
  const std::size_t mid = bottleneck_mid(channels);
  w.w_s_query = random_matrix(channels, d_k, rng);
  w.w_d_key = random_matrix(channels, d_k, rng);
  w.w_d_value = random_matrix(channels, d_k, rng);
  w.w_d_query = random_matrix(channels, d_k, rng);
  w.w_s_key = random_matrix(channels, d_k, rng);
  w.w_s_value = random_matrix(channels, d_k, rng);
  w.fuse_doppler.w1 = random_matrix(channels + d_k, channels, rng);
  w.fuse_doppler.b1 = random_matrix(channels, 1, rng);
  w.fuse_doppler.w2 = random_matrix(channels, channels, rng);
  w.fuse_doppler.b2 = random_matrix(channels, 1, rng);
  w.projection.p1 = random_matrix(channels, mid, rng);
  w.projection.c1 = random_matrix(mid, 1, rng);
  w.projection.p2 = random_matrix(mid, channels, rng);
  w.projection.c2 = random_matrix(channels, 1, rng);
  w.fuse_spatial.w1 = random_matrix(channels + d_k, channels, rng);
  w.fuse_spatial.b1 = random_matrix(channels, 1, rng);
  w.fuse_spatial.w2 = random_matrix(channels, channels, rng);
  w.fuse_spatial.b2 = random_matrix(channels, 1, rng);
  return w;
}

void AttentionWeights::validate() const {
  if (channels == 0 || d_k == 0)
    throw ConfigError("weights: channels and d_k must be positive");
  const std::size_t mid = bottleneck_mid(channels);
  check_shape(w_s_query, channels, d_k, "w_s_query");
  check_shape(w_d_key, channels, d_k, "w_d_key");
  check_shape(w_d_value, channels, d_k, "w_d_value");
  check_shape(w_d_query, channels, d_k, "w_d_query");
  check_shape(w_s_key, channels, d_k, "w_s_key");
  check_shape(w_s_value, channels, d_k, "w_s_value");
  for (const auto* fuse : {&fuse_doppler, &fuse_spatial}) {
    check_shape(fuse->w1, channels + d_k, channels, "fusion w1");
    check_shape(fuse->b1, channels, 1, "fusion b1");
    check_shape(fuse->w2, channels, channels, "fusion w2");
    check_shape(fuse->b2, channels, 1, "fusion b2");
  }
  check_shape(projection.p1, channels, mid, "projection p1");
  check_shape(projection.c1, mid, 1, "projection c1");
  check_shape(projection.p2, mid, channels, "projection p2");
  check_shape(projection.c2, channels, 1, "projection c2");
}

TokenSequence cross_attention(const TokenSequence& q_tokens,
                              const TokenSequence& kv_tokens,
                              const Eigen::MatrixXd& w_query,
                              const Eigen::MatrixXd& w_key,
                              const Eigen::MatrixXd& w_value) {
  if (q_tokens.cols() != w_query.rows() || kv_tokens.cols() != w_key.rows() ||
      kv_tokens.cols() != w_value.rows() || w_query.cols() != w_key.cols())
    throw ConfigError("attention: token channels do not match the projections");
  const Eigen::MatrixXd q = q_tokens * w_query;
  const Eigen::MatrixXd k = kv_tokens * w_key;
  const Eigen::MatrixXd v = kv_tokens * w_value;
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(w_query.cols()));
  return softmax_rows(q * k.transpose() * inv_sqrt_d) * v;
}

namespace {

// fusion block forward: out = x + softplus([x y] w1 + b1) w2 + b2
struct FusionCache {
  Eigen::MatrixXd concat;  // [x y]
  Eigen::MatrixXd pre;     // [x y] w1 + b1
  Eigen::MatrixXd hidden;  // softplus(pre)
};

TokenSequence fuse_forward(const TokenSequence& x, const TokenSequence& y,
                           const FusionBlock& f, FusionCache& cache) {
  cache.concat.resize(x.rows(), x.cols() + y.cols());
  cache.concat << x, y;
  cache.pre = ((cache.concat * f.w1).rowwise() + f.b1.transpose()).eval();
  cache.hidden = softplus(cache.pre);
  return x + ((cache.hidden * f.w2).rowwise() + f.b2.transpose());
}

struct FusionGradients {
  Eigen::MatrixXd w1, w2;
  Eigen::VectorXd b1, b2;
  Eigen::MatrixXd x, y;  // input gradients (x excludes the residual path)
};

FusionGradients fuse_backward(const FusionBlock& f, const FusionCache& cache,
                              const Eigen::MatrixXd& upstream,
                              Eigen::Index x_cols) {
  FusionGradients g;
  g.w2 = cache.hidden.transpose() * upstream;
  g.b2 = upstream.colwise().sum();
  const Eigen::MatrixXd d_hidden = upstream * f.w2.transpose();
  const Eigen::MatrixXd d_pre = d_hidden.cwiseProduct(sigmoid(cache.pre));
  g.w1 = cache.concat.transpose() * d_pre;
  g.b1 = d_pre.colwise().sum();
  const Eigen::MatrixXd d_concat = d_pre * f.w1.transpose();
  g.x = d_concat.leftCols(x_cols);
  g.y = d_concat.rightCols(d_concat.cols() - x_cols);
  return g;
}

struct BottleneckCache {
  Eigen::MatrixXd pre;     // x p1 + c1
  Eigen::MatrixXd hidden;  // softplus(pre)
};

TokenSequence bottleneck_forward(const TokenSequence& x,
                                 const BottleneckBlock& b,
                                 BottleneckCache& cache) {
  cache.pre = ((x * b.p1).rowwise() + b.c1.transpose()).eval();
  cache.hidden = softplus(cache.pre);
  return x + ((cache.hidden * b.p2).rowwise() + b.c2.transpose());
}

struct BottleneckGradients {
  Eigen::MatrixXd p1, p2;
  Eigen::VectorXd c1, c2;
  Eigen::MatrixXd x;  // excludes the residual path
};

BottleneckGradients bottleneck_backward(const BottleneckBlock& b,
                                        const Eigen::MatrixXd& x,
                                        const BottleneckCache& cache,
                                        const Eigen::MatrixXd& upstream) {
  BottleneckGradients g;
  g.p2 = cache.hidden.transpose() * upstream;
  g.c2 = upstream.colwise().sum();
  const Eigen::MatrixXd d_hidden = upstream * b.p2.transpose();
  const Eigen::MatrixXd d_pre = d_hidden.cwiseProduct(sigmoid(cache.pre));
  g.p1 = x.transpose() * d_pre;
  g.c1 = d_pre.colwise().sum();
  g.x = d_pre * b.p1.transpose();
  return g;
}

struct AttentionCache {
  Eigen::MatrixXd q, k, v;
  Eigen::MatrixXd weights_rows;  // softmax output
  double inv_sqrt_d = 1.0;
};

TokenSequence attention_forward(const TokenSequence& q_tokens,
                                const TokenSequence& kv_tokens,
                                const Eigen::MatrixXd& w_query,
                                const Eigen::MatrixXd& w_key,
                                const Eigen::MatrixXd& w_value,
                                AttentionCache& cache) {
  cache.q = q_tokens * w_query;
  cache.k = kv_tokens * w_key;
  cache.v = kv_tokens * w_value;
  cache.inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(w_query.cols()));
  cache.weights_rows =
      softmax_rows(cache.q * cache.k.transpose() * cache.inv_sqrt_d);
  return cache.weights_rows * cache.v;
}

struct AttentionGradients {
  Eigen::MatrixXd w_query, w_key, w_value;
  Eigen::MatrixXd q_tokens, kv_tokens;
};

AttentionGradients attention_backward(const TokenSequence& q_tokens,
                                      const TokenSequence& kv_tokens,
                                      const Eigen::MatrixXd& w_query,
                                      const Eigen::MatrixXd& w_key,
                                      const Eigen::MatrixXd& w_value,
                                      const AttentionCache& cache,
                                      const Eigen::MatrixXd& upstream) {
  const Eigen::MatrixXd d_weights = upstream * cache.v.transpose();
  const Eigen::MatrixXd d_v = cache.weights_rows.transpose() * upstream;
  const Eigen::MatrixXd d_logits =
      softmax_rows_backward(cache.weights_rows, d_weights);
  const Eigen::MatrixXd d_q = d_logits * cache.k * cache.inv_sqrt_d;
  const Eigen::MatrixXd d_k = d_logits.transpose() * cache.q * cache.inv_sqrt_d;

  AttentionGradients g;
  g.w_query = q_tokens.transpose() * d_q;
  g.w_key = kv_tokens.transpose() * d_k;
  g.w_value = kv_tokens.transpose() * d_v;
  g.q_tokens = d_q * w_query.transpose();
  g.kv_tokens = d_k * w_key.transpose() + d_v * w_value.transpose();
  return g;
}

struct ForwardCache {
  AttentionCache attn1, attn2;
  FusionCache fuse_d, fuse_s;
  BottleneckCache bottleneck;
  TokenSequence d_prime, d_tilde, d_proj, s_prime;
};

void check_bdaf_inputs(const TokenSequence& spatial,
                       const TokenSequence& doppler,
                       const AttentionWeights& w) {
  w.validate();
  if (spatial.rows() != doppler.rows() || spatial.cols() != doppler.cols())
    throw ConfigError("fusion: spatial and Doppler token shapes differ");
  if (static_cast<std::size_t>(spatial.cols()) != w.channels)
    throw ConfigError("fusion: token channels do not match the weights");
}

BdafOutput forward_impl(const TokenSequence& spatial,
                        const TokenSequence& doppler,
                        const AttentionWeights& w, ForwardCache& cache) {
  cache.d_prime = attention_forward(spatial, doppler, w.w_s_query, w.w_d_key,
                                    w.w_d_value, cache.attn1);
  cache.d_tilde =
      fuse_forward(doppler, cache.d_prime, w.fuse_doppler, cache.fuse_d);
  cache.d_proj =
      bottleneck_forward(cache.d_tilde, w.projection, cache.bottleneck);
  cache.s_prime = attention_forward(cache.d_proj, spatial, w.w_d_query,
                                    w.w_s_key, w.w_s_value, cache.attn2);
  BdafOutput out;
  out.spatial = fuse_forward(spatial, cache.s_prime, w.fuse_spatial, cache.fuse_s);
  out.doppler = cache.d_tilde;
  return out;
}

}  // namespace

TokenSequence domain_projection(const TokenSequence& tokens,
                                const BottleneckBlock& block) {
  if (tokens.cols() != block.p1.rows())
    throw ConfigError("projection: token channels do not match the block");
  BottleneckCache cache;
  return bottleneck_forward(tokens, block, cache);
}

BdafOutput bdaf_forward(const TokenSequence& spatial,
                        const TokenSequence& doppler,
                        const AttentionWeights& w) {
  check_bdaf_inputs(spatial, doppler, w);
  ForwardCache cache;
  return forward_impl(spatial, doppler, w, cache);
}

BdafGradients bdaf_backward(const TokenSequence& spatial,
                            const TokenSequence& doppler,
                            const AttentionWeights& w,
                            const TokenSequence& g_spatial,
                            const TokenSequence& g_doppler) {
  check_bdaf_inputs(spatial, doppler, w);
  ForwardCache cache;
  forward_impl(spatial, doppler, w, cache);

  BdafGradients g;
  g.weights = AttentionWeights::zeros(w.channels, w.d_k);
  g.spatial = TokenSequence::Zero(spatial.rows(), spatial.cols());
  g.doppler = TokenSequence::Zero(doppler.rows(), doppler.cols());

  // spatial fusion: Fs = spatial + mlp([spatial, S'])
  const FusionGradients fs =
      fuse_backward(w.fuse_spatial, cache.fuse_s, g_spatial, spatial.cols());
  g.weights.fuse_spatial = {fs.w1, fs.b1, fs.w2, fs.b2};
  g.spatial += g_spatial + fs.x;  // residual + concat path

  // stage-2 attention: S' = attn(Dpp; spatial)
  const AttentionGradients a2 =
      attention_backward(cache.d_proj, spatial, w.w_d_query, w.w_s_key,
                         w.w_s_value, cache.attn2, fs.y);
  g.weights.w_d_query = a2.w_query;
  g.weights.w_s_key = a2.w_key;
  g.weights.w_s_value = a2.w_value;
  g.spatial += a2.kv_tokens;

  // bottleneck: Dpp = Dt + mlp(Dt); upstream reaches Dt through the output
  // loss on d_tilde, the bottleneck body, and its residual skip
  const BottleneckGradients bn = bottleneck_backward(
      w.projection, cache.d_tilde, cache.bottleneck, a2.q_tokens);
  g.weights.projection = {bn.p1, bn.c1, bn.p2, bn.c2};
  const Eigen::MatrixXd d_tilde_grad = g_doppler + a2.q_tokens + bn.x;

  // Doppler fusion: Dt = doppler + mlp([doppler, D'])
  const FusionGradients fd =
      fuse_backward(w.fuse_doppler, cache.fuse_d, d_tilde_grad, doppler.cols());
  g.weights.fuse_doppler = {fd.w1, fd.b1, fd.w2, fd.b2};
  g.doppler += d_tilde_grad + fd.x;

  // stage-1 attention: D' = attn(spatial; doppler)
  const AttentionGradients a1 = attention_backward(
      spatial, doppler, w.w_s_query, w.w_d_key, w.w_d_value, cache.attn1, fd.y);
  g.weights.w_s_query = a1.w_query;
  g.weights.w_d_key = a1.w_key;
  g.weights.w_d_value = a1.w_value;
  g.spatial += a1.q_tokens;
  g.doppler += a1.kv_tokens;
  return g;
}

namespace {

// Uniform views over every parameter of a weight set, in file order.
std::vector<Eigen::MatrixXd*> weight_matrices(AttentionWeights& w) {
  return {&w.w_s_query,       &w.w_d_key,        &w.w_d_value,
          &w.w_d_query,       &w.w_s_key,        &w.w_s_value,
          &w.fuse_doppler.w1, &w.fuse_doppler.w2, &w.projection.p1,
          &w.projection.p2,   &w.fuse_spatial.w1, &w.fuse_spatial.w2};
}

std::vector<Eigen::VectorXd*> weight_vectors(AttentionWeights& w) {
  return {&w.fuse_doppler.b1, &w.fuse_doppler.b2, &w.projection.c1,
          &w.projection.c2,   &w.fuse_spatial.b1, &w.fuse_spatial.b2};
}

}  // namespace

GradientCheckReport bdaf_gradient_check(std::size_t tokens,
                                        std::size_t channels, std::size_t d_k,
                                        std::uint64_t seed, double step) {
  if (tokens == 0) throw ConfigError("gradient check: needs at least one token");
  AttentionWeights w = AttentionWeights::random(channels, d_k, seed);
  Rng rng = Rng(seed).derive(1);
  const auto rows = static_cast<Eigen::Index>(tokens);
  const auto cols = static_cast<Eigen::Index>(channels);
  TokenSequence spatial(rows, cols), doppler(rows, cols);
  TokenSequence g_spatial(rows, cols), g_doppler(rows, cols);
  for (auto* m : {&spatial, &doppler, &g_spatial, &g_doppler})
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j) (*m)(i, j) = rng.uniform(-1.0, 1.0);

  const auto loss = [&](const AttentionWeights& weights) {
    const BdafOutput out = bdaf_forward(spatial, doppler, weights);
    return out.spatial.cwiseProduct(g_spatial).sum() +
           out.doppler.cwiseProduct(g_doppler).sum();
  };

  BdafGradients analytic =
      bdaf_backward(spatial, doppler, w, g_spatial, g_doppler);

  GradientCheckReport report;
  const auto compare = [&report](double analytic_value, double numeric) {
    const double denom =
        std::max({std::abs(analytic_value), std::abs(numeric), 1e-6});
    report.max_relative_error = std::max(
        report.max_relative_error, std::abs(analytic_value - numeric) / denom);
    ++report.checks;
  };

  const auto check_param = [&](double& param, double analytic_value) {
    const double saved = param;
    param = saved + step;
    const double up = loss(w);
    param = saved - step;
    const double down = loss(w);
    param = saved;
    compare(analytic_value, (up - down) / (2.0 * step));
  };

  const auto mats = weight_matrices(w);
  auto analytic_mats = weight_matrices(analytic.weights);
  for (std::size_t m = 0; m < mats.size(); ++m)
    for (Eigen::Index i = 0; i < mats[m]->rows(); ++i)
      for (Eigen::Index j = 0; j < mats[m]->cols(); ++j)
        check_param((*mats[m])(i, j), (*analytic_mats[m])(i, j));
  const auto vecs = weight_vectors(w);
  auto analytic_vecs = weight_vectors(analytic.weights);
  for (std::size_t v = 0; v < vecs.size(); ++v)
    for (Eigen::Index i = 0; i < vecs[v]->size(); ++i)
      check_param((*vecs[v])(i), (*analytic_vecs[v])(i));

  // input gradients, via the same central differences
  const auto check_input = [&](TokenSequence& input, const TokenSequence& grad) {
    for (Eigen::Index i = 0; i < input.rows(); ++i)
      for (Eigen::Index j = 0; j < input.cols(); ++j) {
        const double saved = input(i, j);
        input(i, j) = saved + step;
        const double up = loss(w);
        input(i, j) = saved - step;
        const double down = loss(w);
        input(i, j) = saved;
        compare(grad(i, j), (up - down) / (2.0 * step));
      }
  };
  check_input(spatial, analytic.spatial);
  check_input(doppler, analytic.doppler);
  return report;
}

namespace {

constexpr std::uint32_t kWeightsVersion = 1;

void write_matrix(std::ostream& out, const Eigen::MatrixXd& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const double v = m(i, j);
      out.write(reinterpret_cast<const char*>(&v), sizeof(v));
    }
}

void read_matrix(std::istream& in, Eigen::MatrixXd& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      double v;
      in.read(reinterpret_cast<char*>(&v), sizeof(v));
      m(i, j) = v;
    }
}

}  // namespace

void write_weights(const std::filesystem::path& path, const AttentionWeights& w,
                   std::uint32_t token_count) {
  w.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write("BDAF", 4);
  const auto put_u32 = [&out](std::uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
  };
  put_u32(kWeightsVersion);
  put_u32(token_count);
  put_u32(static_cast<std::uint32_t>(w.channels));
  put_u32(static_cast<std::uint32_t>(w.d_k));
  write_matrix(out, w.w_s_query);
  write_matrix(out, w.w_d_key);
  write_matrix(out, w.w_d_value);
  write_matrix(out, w.w_d_query);
  write_matrix(out, w.w_s_key);
  write_matrix(out, w.w_s_value);
  write_matrix(out, w.fuse_doppler.w1);
  write_matrix(out, w.fuse_doppler.b1);
  write_matrix(out, w.fuse_doppler.w2);
  write_matrix(out, w.fuse_doppler.b2);
  write_matrix(out, w.projection.p1);
  write_matrix(out, w.projection.c1);
  write_matrix(out, w.projection.p2);
  write_matrix(out, w.projection.c2);
  write_matrix(out, w.fuse_spatial.w1);
  write_matrix(out, w.fuse_spatial.b1);
  write_matrix(out, w.fuse_spatial.w2);
  write_matrix(out, w.fuse_spatial.b2);
  if (!out) throw IoError("failed writing " + path.string());
}

std::pair<AttentionWeights, std::uint32_t> read_weights(
    const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "BDAF", 4) != 0)
    throw IoError(path.string() + ": bad magic, expected BDAF");
  const auto get_u32 = [&in]() {
    std::uint32_t v;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    return v;
  };
  const std::uint32_t version = get_u32();
  if (version != kWeightsVersion)
    throw IoError(path.string() + ": unsupported version " +
                  std::to_string(version));
  const std::uint32_t token_count = get_u32();
  const std::uint32_t channels = get_u32();
  const std::uint32_t d_k = get_u32();
  if (!in) throw IoError(path.string() + ": truncated header");

  AttentionWeights w = AttentionWeights::zeros(channels, d_k);
  const auto read_vector = [&in](Eigen::VectorXd& v) {
    in.read(reinterpret_cast<char*>(v.data()),
            static_cast<std::streamsize>(sizeof(double)) * v.size());
  };
  read_matrix(in, w.w_s_query);
  read_matrix(in, w.w_d_key);
  read_matrix(in, w.w_d_value);
  read_matrix(in, w.w_d_query);
  read_matrix(in, w.w_s_key);
  read_matrix(in, w.w_s_value);
  read_matrix(in, w.fuse_doppler.w1);
  read_vector(w.fuse_doppler.b1);
  read_matrix(in, w.fuse_doppler.w2);
  read_vector(w.fuse_doppler.b2);
  read_matrix(in, w.projection.p1);
  read_vector(w.projection.c1);
  read_matrix(in, w.projection.p2);
  read_vector(w.projection.c2);
  read_matrix(in, w.fuse_spatial.w1);
  read_vector(w.fuse_spatial.b1);
  read_matrix(in, w.fuse_spatial.w2);
  read_vector(w.fuse_spatial.b2);
  if (!in) throw IoError(path.string() + ": truncated payload");
  w.validate();
  return {std::move(w), token_count};
}

}  // namespace rauf
