#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace rauf {

/// L tokens (rows) by C channels (columns).
using TokenSequence = Eigen::MatrixXd;

/// Dense H x W x C feature map, row-major with channels innermost.
struct FeatureMap {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 0;
  std::vector<double> data;

  static FeatureMap zeros(std::size_t height, std::size_t width,
                          std::size_t channels);

  double& at(std::size_t y, std::size_t x, std::size_t c) {
    return data[(y * width + x) * channels + c];
  }
  double at(std::size_t y, std::size_t x, std::size_t c) const {
    return data[(y * width + x) * channels + c];
  }

  /// Throws ConfigError when the data extent disagrees with the dimensions.
  void validate() const;
};

/// Numerically stable row-wise softmax (row-max subtraction); every output
/// row sums to 1.
Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits);

/// Backward of softmax_rows: given the forward output and the upstream
/// gradient, returns the gradient w.r.t. the logits,
/// dz = p .* (dp - rowwise <dp, p>).
Eigen::MatrixXd softmax_rows_backward(const Eigen::MatrixXd& softmax_out,
                                      const Eigen::MatrixXd& upstream);

/// log(1 + e^x) elementwise, overflow-safe, and its derivative (the
/// logistic sigmoid).
Eigen::MatrixXd softplus(const Eigen::MatrixXd& x);
Eigen::MatrixXd sigmoid(const Eigen::MatrixXd& x);

/// Fixed sinusoidal positional encoding table, tokens x channels:
/// pe(t, 2i) = sin(t / 10000^(2i/C)), pe(t, 2i+1) = cos(same).
Eigen::MatrixXd positional_encoding(std::size_t tokens, std::size_t channels);

/// Non-overlapping p x p patches in row-major patch order; each token is
/// the patch flattened channel-major (entry index c*p*p + dy*p + dx), so the
/// token channel count is p*p*C and L = (H/p)*(W/p) = H*W/p*p. Sinusoidal
/// positional encoding is added when requested. Throws ConfigError when p
/// does not divide both H and W.
TokenSequence patchify(const FeatureMap& f, std::size_t patch,
                       bool positional = false);

/// Inverse of patchify with positional encoding disabled. Throws
/// ConfigError on inconsistent dimensions.
FeatureMap unpatchify(const TokenSequence& tokens, std::size_t height,
                      std::size_t width, std::size_t channels,
                      std::size_t patch);

/// Residual fusion of a token sequence X with companion features Y:
/// out = X + softplus([X Y] w1 + b1) w2 + b2. All-zero parameters make the
/// block an exact identity in X.
struct FusionBlock {
  Eigen::MatrixXd w1;  // (C + d) x C
  Eigen::VectorXd b1;  // C
  Eigen::MatrixXd w2;  // C x C
  Eigen::VectorXd b2;  // C
};

/// Residual bottleneck out = X + softplus(X p1 + c1) p2 + c2 squeezing
/// C -> max(1, C/2) -> C. All-zero parameters give the identity.
struct BottleneckBlock {
  Eigen::MatrixXd p1;  // C x C_mid
  Eigen::VectorXd c1;  // C_mid
  Eigen::MatrixXd p2;  // C_mid x C
  Eigen::VectorXd c2;  // C
};

/// All parameters of the two-stage fusion. Stage 1 sends spatial queries
/// into the Doppler tokens, stage 2 sends projected Doppler queries back
/// into the spatial tokens.
struct AttentionWeights {
  std::size_t channels = 0;  // token channel count C
  std::size_t d_k = 0;       // attention projection width

  Eigen::MatrixXd w_s_query, w_d_key, w_d_value;  // stage 1, each C x d_k
  Eigen::MatrixXd w_d_query, w_s_key, w_s_value;  // stage 2, each C x d_k
  FusionBlock fuse_doppler;
  BottleneckBlock projection;
  FusionBlock fuse_spatial;

  static AttentionWeights zeros(std::size_t channels, std::size_t d_k);
  /// Entries uniform on [-0.1, 0.1]; small enough to keep every softmax far
  /// from saturation. Deterministic per seed.
  static AttentionWeights random(std::size_t channels, std::size_t d_k,
                                 std::uint64_t seed);

  /// Throws ConfigError on shape inconsistencies or non-finite entries.
  void validate() const;
};

/// Single-head cross-attention Softmax(Q K^T / sqrt(d_k)) V with Q projected
/// from q_tokens and K, V from kv_tokens. Throws ConfigError when the
/// channel counts do not match the projection rows.
TokenSequence cross_attention(const TokenSequence& q_tokens,
                              const TokenSequence& kv_tokens,
                              const Eigen::MatrixXd& w_query,
                              const Eigen::MatrixXd& w_key,
                              const Eigen::MatrixXd& w_value);

/// Residual bottleneck applied per token.
TokenSequence domain_projection(const TokenSequence& tokens,
                                const BottleneckBlock& block);

struct BdafOutput {
  TokenSequence spatial;  // fused spatial tokens
  TokenSequence doppler;  // fused Doppler tokens (pre-projection)
};

/// Two-stage bidirectional fusion:
///   stage 1: D' = attention(Q from S; K,V from D), Dt = fuse_doppler(D, D'),
///            Dpp = domain_projection(Dt)
///   stage 2: S' = attention(Q from Dpp; K,V from S), Fs = fuse_spatial(S, S')
/// returning (Fs, Dt). Throws ConfigError when the two sequences disagree in
/// shape or do not match the weights.
BdafOutput bdaf_forward(const TokenSequence& spatial,
                        const TokenSequence& doppler,
                        const AttentionWeights& w);

/// Gradients of the scalar loss <g_spatial, out.spatial> +
/// <g_doppler, out.doppler> (Frobenius inner products) with respect to every
/// weight and both inputs.
struct BdafGradients {
  AttentionWeights weights;  // same shapes as the forward weights
  TokenSequence spatial;
  TokenSequence doppler;
};

BdafGradients bdaf_backward(const TokenSequence& spatial,
                            const TokenSequence& doppler,
                            const AttentionWeights& w,
                            const TokenSequence& g_spatial,
                            const TokenSequence& g_doppler);

struct GradientCheckReport {
  double max_relative_error = 0.0;
  std::size_t checks = 0;  // scalar parameters compared
};

/// Compares bdaf_backward against central finite differences of the scalar
/// loss on one seeded random instance (inputs, weights, and loss
/// projections all drawn from the seed). Relative error uses
/// |a - n| / max(|a|, |n|, 1e-6). The default step balances truncation
/// against roundoff: the loss sums O(100) output entries, so smaller steps
/// drown near-zero gradient entries in cancellation noise.
GradientCheckReport bdaf_gradient_check(std::size_t tokens,
                                        std::size_t channels, std::size_t d_k,
                                        std::uint64_t seed, double step = 1e-4);

// Weight bundle file, little-endian: magic "BDAF", u32 version = 1,
// u32 token count (recorded for bookkeeping only), u32 C, u32 d_k, then
// every matrix as f64 row-major in declaration order: the six projections,
// fuse_doppler (w1 b1 w2 b2), projection (p1 c1 p2 c2), fuse_spatial
// (w1 b1 w2 b2).
void write_weights(const std::filesystem::path& path,
                   const AttentionWeights& w, std::uint32_t token_count);
std::pair<AttentionWeights, std::uint32_t> read_weights(
    const std::filesystem::path& path);

}  // namespace rauf
