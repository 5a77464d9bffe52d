#include <algorithm>
#include <cmath>

#include "kernels.hpp"
#include "s2p/error.hpp"
#include "s2p/nn/layer.hpp"

namespace s2p::nn {

namespace {

std::string dim_error(const std::string& layer, const std::string& what, const Shape& got) {
  return "layer '" + layer + "': " + what + ", got input " + shape_string(got);
}

void check_input(const Layer& layer, const Tensor& input) {
  layer.output_shape(input.shape());
  require_finite(input, "layer '" + layer.name() + "' input");
}

/// He-style uniform: U(-b, b) with b = sqrt(6 / fan_in).
void he_uniform(Tensor& t, std::size_t fan_in, std::mt19937_64& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(std::max<std::size_t>(fan_in, 1)));
  for (double& v : t.data()) v = (2.0 * uniform01(rng) - 1.0) * bound;
}

}  // namespace

std::string_view to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::conv2d: return "conv2d";
    case LayerKind::batchnorm: return "batchnorm";
    case LayerKind::relu: return "relu";
    case LayerKind::dropout: return "dropout";
    case LayerKind::dense: return "dense";
    case LayerKind::flatten: return "flatten";
  }
  return "unknown";
}

bool Layer::has_trainable_parameters() const {
  return std::any_of(params_.begin(), params_.end(), [](const Parameter& p) { return p.trainable; });
}

void Layer::check_cache(const Cache& cache, const Tensor& upstream, const Shape& expected_upstream) const {
  if (cache.owner != this) {
    throw ContractError("layer '" + name_ + "': backward called with a cache from a different layer");
  }
  if (upstream.shape() != expected_upstream) {
    throw ShapeError("layer '" + name_ + "': upstream gradient " + shape_string(upstream.shape()) +
                     " does not match output " + shape_string(expected_upstream));
  }
}

// ---------------------------------------------------------------- Conv2d

Conv2d::Conv2d(std::string name, Conv2dConfig cfg) : Layer(std::move(name)), cfg_(cfg) {
  if (cfg_.in_channels == 0 || cfg_.out_channels == 0 || cfg_.kernel_h == 0 || cfg_.kernel_w == 0 ||
      cfg_.stride_h == 0 || cfg_.stride_w == 0) {
    throw ConfigError("conv2d '" + name_ + "': channels, kernel extents and strides must be positive");
  }
  params_.push_back({name_ + ".weight", Tensor({cfg_.out_channels, cfg_.in_channels, cfg_.kernel_h, cfg_.kernel_w})});
  if (cfg_.bias) params_.push_back({name_ + ".bias", Tensor({cfg_.out_channels})});
}

Shape Conv2d::output_shape(const Shape& input) const {
  if (input.size() != 4 || input[1] != cfg_.in_channels) {
    throw ShapeError(dim_error(name_, "expected (N, " + std::to_string(cfg_.in_channels) + ", H, W)", input));
  }
  const std::size_t h = input[2] + cfg_.padding.top + cfg_.padding.bottom;
  const std::size_t w = input[3] + cfg_.padding.left + cfg_.padding.right;
  if (h < cfg_.kernel_h || w < cfg_.kernel_w) {
    throw ShapeError(dim_error(name_, "padded input smaller than the " + std::to_string(cfg_.kernel_h) + "x" +
                                          std::to_string(cfg_.kernel_w) + " kernel",
                               input));
  }
  return {input[0], cfg_.out_channels, (h - cfg_.kernel_h) / cfg_.stride_h + 1, (w - cfg_.kernel_w) / cfg_.stride_w + 1};
}

namespace {

// Per-thread work buffers for the conv kernels. They only grow, so a
// training loop stops allocating after its first batch.
struct ConvScratch {
  std::vector<double> cols, cols_t, prod, dy, w_t, dcols;
};

ConvScratch& scratch() {
  thread_local ConvScratch s;
  return s;
}

// Column matrix of shape (C*kh*kw, N*Ho*Wo); column index is n*P + p.
void im2col(const Tensor& x, const Conv2dConfig& c, std::size_t ho, std::size_t wo, std::vector<double>& out) {
  const std::size_t n = x.dim(0), ch = x.dim(1), h = x.dim(2), w = x.dim(3);
  const std::size_t p_count = ho * wo;
  const std::size_t cols = n * p_count;
  out.assign(ch * c.kernel_h * c.kernel_w * cols, 0.0);
  const double* src = x.data().data();
  for (std::size_t ci = 0; ci < ch; ++ci) {
    for (std::size_t ky = 0; ky < c.kernel_h; ++ky) {
      for (std::size_t kx = 0; kx < c.kernel_w; ++kx) {
        double* row = out.data() + ((ci * c.kernel_h + ky) * c.kernel_w + kx) * cols;
        for (std::size_t b = 0; b < n; ++b) {
          const double* plane = src + (b * ch + ci) * h * w;
          for (std::size_t oy = 0; oy < ho; ++oy) {
            const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * c.stride_h + ky) -
                                      static_cast<std::ptrdiff_t>(c.padding.top);
            if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(h)) continue;
            for (std::size_t ox = 0; ox < wo; ++ox) {
              const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox * c.stride_w + kx) -
                                        static_cast<std::ptrdiff_t>(c.padding.left);
              if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(w)) continue;
              row[b * p_count + oy * wo + ox] = plane[iy * w + ix];
            }
          }
        }
      }
    }
  }
}

void col2im_add(const std::vector<double>& cols_mat, const Conv2dConfig& c, std::size_t ho, std::size_t wo, Tensor& dx) {
  const std::size_t n = dx.dim(0), ch = dx.dim(1), h = dx.dim(2), w = dx.dim(3);
  const std::size_t p_count = ho * wo;
  const std::size_t cols = n * p_count;
  double* dst = dx.data().data();
  for (std::size_t ci = 0; ci < ch; ++ci) {
    for (std::size_t ky = 0; ky < c.kernel_h; ++ky) {
      for (std::size_t kx = 0; kx < c.kernel_w; ++kx) {
        const double* row = cols_mat.data() + ((ci * c.kernel_h + ky) * c.kernel_w + kx) * cols;
        for (std::size_t b = 0; b < n; ++b) {
          double* plane = dst + (b * ch + ci) * h * w;
          for (std::size_t oy = 0; oy < ho; ++oy) {
            const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * c.stride_h + ky) -
                                      static_cast<std::ptrdiff_t>(c.padding.top);
            if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(h)) continue;
            for (std::size_t ox = 0; ox < wo; ++ox) {
              const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox * c.stride_w + kx) -
                                        static_cast<std::ptrdiff_t>(c.padding.left);
              if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(w)) continue;
              plane[iy * w + ix] += row[b * p_count + oy * wo + ox];
            }
          }
        }
      }
    }
  }
}

}  // namespace

ForwardResult Conv2d::forward(const Tensor& input, Mode mode, std::optional<std::uint64_t>) const {
  check_input(*this, input);
  const Shape out_shape = output_shape(input.shape());
  const std::size_t n = out_shape[0], co = out_shape[1], ho = out_shape[2], wo = out_shape[3];
  const std::size_t p_count = ho * wo;
  const std::size_t k = cfg_.in_channels * cfg_.kernel_h * cfg_.kernel_w;

  ConvScratch& s = scratch();
  im2col(input, cfg_, ho, wo, s.cols);
  std::vector<double>& prod = s.prod;
  prod.resize(co * n * p_count);
  kernels::gemm(co, n * p_count, k, weight().data().data(), s.cols.data(), prod.data(), false);

  Tensor out(out_shape);
  double* y = out.data().data();
  for (std::size_t b = 0; b < n; ++b) {
    for (std::size_t c = 0; c < co; ++c) {
      const double bias = cfg_.bias ? params_[1].value[c] : 0.0;
      const double* src = prod.data() + c * n * p_count + b * p_count;
      double* dst = y + (b * co + c) * p_count;
      for (std::size_t p = 0; p < p_count; ++p) dst[p] = src[p] + bias;
    }
  }
  Cache cache{this, mode, input.shape(), {}};
  cache.saved.push_back(input);
  return {std::move(out), std::move(cache)};
}

BackwardResult Conv2d::backward(const Cache& cache, const Tensor& upstream) const {
  check_cache(cache, upstream, output_shape(cache.input_shape));
  const Tensor& input = cache.saved.at(0);
  const std::size_t n = upstream.dim(0), co = upstream.dim(1), ho = upstream.dim(2), wo = upstream.dim(3);
  const std::size_t p_count = ho * wo;
  const std::size_t cols_n = n * p_count;
  const std::size_t k = cfg_.in_channels * cfg_.kernel_h * cfg_.kernel_w;

  ConvScratch& s = scratch();
  // Upstream as (Cout, N*P).
  std::vector<double>& dy = s.dy;
  dy.resize(co * cols_n);
  const double* g = upstream.data().data();
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t c = 0; c < co; ++c)
      std::copy_n(g + (b * co + c) * p_count, p_count, dy.data() + c * cols_n + b * p_count);

  im2col(input, cfg_, ho, wo, s.cols);
  s.cols_t.resize(s.cols.size());
  kernels::transpose(k, cols_n, s.cols.data(), s.cols_t.data());

  BackwardResult result;
  Tensor dw(weight().shape());
  kernels::gemm(co, k, cols_n, dy.data(), s.cols_t.data(), dw.data().data(), false);
  result.param_grads.push_back(std::move(dw));
  if (cfg_.bias) {
    Tensor db({co});
    for (std::size_t c = 0; c < co; ++c) {
      double s = 0.0;
      const double* row = dy.data() + c * cols_n;
      for (std::size_t j = 0; j < cols_n; ++j) s += row[j];
      db[c] = s;
    }
    result.param_grads.push_back(std::move(db));
  }

  s.w_t.resize(k * co);
  kernels::transpose(co, k, weight().data().data(), s.w_t.data());
  s.dcols.resize(k * cols_n);
  kernels::gemm(k, cols_n, co, s.w_t.data(), dy.data(), s.dcols.data(), false);
  result.input_grad = Tensor(cache.input_shape);
  col2im_add(s.dcols, cfg_, ho, wo, result.input_grad);
  return result;
}

void Conv2d::initialize(std::mt19937_64& rng) {
  he_uniform(params_[0].value, cfg_.in_channels * cfg_.kernel_h * cfg_.kernel_w, rng);
  if (cfg_.bias) params_[1].value.fill(0.0);
}

nlohmann::json Conv2d::config() const {
  return {{"kind", "conv2d"},
          {"name", name_},
          {"in_channels", cfg_.in_channels},
          {"out_channels", cfg_.out_channels},
          {"kernel", {cfg_.kernel_h, cfg_.kernel_w}},
          {"stride", {cfg_.stride_h, cfg_.stride_w}},
          {"padding", {cfg_.padding.top, cfg_.padding.bottom, cfg_.padding.left, cfg_.padding.right}},
          {"bias", cfg_.bias}};
}

// ------------------------------------------------------------- BatchNorm

BatchNorm::BatchNorm(std::string name, std::size_t channels, double momentum, double epsilon)
    : Layer(std::move(name)), channels_(channels), momentum_(momentum), epsilon_(epsilon) {
  if (channels_ == 0) throw ConfigError("batchnorm '" + name_ + "': channel count must be positive");
  if (!(momentum_ >= 0.0 && momentum_ <= 1.0)) throw ConfigError("batchnorm '" + name_ + "': momentum outside [0,1]");
  if (!(epsilon_ > 0.0)) throw ConfigError("batchnorm '" + name_ + "': epsilon must be positive");
  params_.push_back({name_ + ".gamma", Tensor({channels_}, 1.0)});
  params_.push_back({name_ + ".beta", Tensor({channels_}, 0.0)});
  buffers_.push_back({name_ + ".running_mean", Tensor({channels_}, 0.0), false});
  buffers_.push_back({name_ + ".running_var", Tensor({channels_}, 1.0), false});
}

Shape BatchNorm::output_shape(const Shape& input) const {
  if ((input.size() != 2 && input.size() != 4) || input[1] != channels_) {
    throw ShapeError(dim_error(name_, "expected (N, " + std::to_string(channels_) + ") or (N, " +
                                          std::to_string(channels_) + ", H, W)",
                               input));
  }
  return input;
}

namespace {

struct ChannelLayout {
  std::size_t n, c, inner;
};

ChannelLayout layout_of(const Shape& s) { return {s[0], s[1], s.size() == 4 ? s[2] * s[3] : 1}; }

}  // namespace

// Saved tensors: [0] xhat, [1] inv_std, [2] batch mean, [3] batch variance (train only).
ForwardResult BatchNorm::forward(const Tensor& input, Mode mode, std::optional<std::uint64_t>) const {
  check_input(*this, input);
  const auto [n, c, inner] = layout_of(input.shape());
  const double m = static_cast<double>(n * inner);
  const Tensor& gamma = params_[0].value;
  const Tensor& beta = params_[1].value;

  Tensor mean({c}), var({c}), inv_std({c});
  if (mode == Mode::train) {
    for (std::size_t ch = 0; ch < c; ++ch) {
      double s = 0.0;
      for (std::size_t b = 0; b < n; ++b) {
        const double* x = input.data().data() + (b * c + ch) * inner;
        for (std::size_t i = 0; i < inner; ++i) s += x[i];
      }
      const double mu = s / m;
      double sq = 0.0;
      for (std::size_t b = 0; b < n; ++b) {
        const double* x = input.data().data() + (b * c + ch) * inner;
        for (std::size_t i = 0; i < inner; ++i) sq += (x[i] - mu) * (x[i] - mu);
      }
      mean[ch] = mu;
      var[ch] = sq / m;
    }
  } else {
    mean = buffers_[0].value;
    var = buffers_[1].value;
  }
  for (std::size_t ch = 0; ch < c; ++ch) inv_std[ch] = 1.0 / std::sqrt(var[ch] + epsilon_);

  Tensor xhat(input.shape()), out(input.shape());
  for (std::size_t b = 0; b < n; ++b) {
    for (std::size_t ch = 0; ch < c; ++ch) {
      const std::size_t off = (b * c + ch) * inner;
      for (std::size_t i = 0; i < inner; ++i) {
        const double xh = (input[off + i] - mean[ch]) * inv_std[ch];
        xhat[off + i] = xh;
        out[off + i] = gamma[ch] * xh + beta[ch];
      }
    }
  }
  Cache cache{this, mode, input.shape(), {}};
  cache.saved = {std::move(xhat), std::move(inv_std)};
  if (mode == Mode::train) {
    cache.saved.push_back(std::move(mean));
    cache.saved.push_back(std::move(var));
  }
  return {std::move(out), std::move(cache)};
}

BackwardResult BatchNorm::backward(const Cache& cache, const Tensor& upstream) const {
  check_cache(cache, upstream, cache.input_shape);
  const Tensor& xhat = cache.saved.at(0);
  const Tensor& inv_std = cache.saved.at(1);
  const auto [n, c, inner] = layout_of(cache.input_shape);
  const double m = static_cast<double>(n * inner);
  const Tensor& gamma = params_[0].value;

  Tensor dgamma({c}), dbeta({c});
  for (std::size_t ch = 0; ch < c; ++ch) {
    double sg = 0.0, sb = 0.0;
    for (std::size_t b = 0; b < n; ++b) {
      const std::size_t off = (b * c + ch) * inner;
      for (std::size_t i = 0; i < inner; ++i) {
        sg += upstream[off + i] * xhat[off + i];
        sb += upstream[off + i];
      }
    }
    dgamma[ch] = sg;
    dbeta[ch] = sb;
  }

  Tensor dx(cache.input_shape);
  for (std::size_t b = 0; b < n; ++b) {
    for (std::size_t ch = 0; ch < c; ++ch) {
      const std::size_t off = (b * c + ch) * inner;
      if (cache.mode == Mode::train) {
        const double scale = gamma[ch] * inv_std[ch] / m;
        for (std::size_t i = 0; i < inner; ++i) {
          dx[off + i] = scale * (m * upstream[off + i] - dbeta[ch] - xhat[off + i] * dgamma[ch]);
        }
      } else {
        const double scale = gamma[ch] * inv_std[ch];
        for (std::size_t i = 0; i < inner; ++i) dx[off + i] = scale * upstream[off + i];
      }
    }
  }
  BackwardResult result;
  result.input_grad = std::move(dx);
  result.param_grads = {std::move(dgamma), std::move(dbeta)};
  return result;
}

void BatchNorm::update_statistics(const Cache& cache) {
  if (cache.owner != this) throw ContractError("batchnorm '" + name_ + "': statistics from a different layer");
  if (cache.mode != Mode::train) return;
  const Tensor& mean = cache.saved.at(2);
  const Tensor& var = cache.saved.at(3);
  const auto [n, c, inner] = layout_of(cache.input_shape);
  const double m = static_cast<double>(n * inner);
  const double unbias = m > 1.0 ? m / (m - 1.0) : 1.0;
  Tensor& rm = buffers_[0].value;
  Tensor& rv = buffers_[1].value;
  for (std::size_t ch = 0; ch < c; ++ch) {
    rm[ch] = (1.0 - momentum_) * rm[ch] + momentum_ * mean[ch];
    rv[ch] = (1.0 - momentum_) * rv[ch] + momentum_ * var[ch] * unbias;
  }
}

void BatchNorm::initialize(std::mt19937_64&) {
  params_[0].value.fill(1.0);
  params_[1].value.fill(0.0);
  buffers_[0].value.fill(0.0);
  buffers_[1].value.fill(1.0);
}

nlohmann::json BatchNorm::config() const {
  return {{"kind", "batchnorm"}, {"name", name_}, {"channels", channels_}, {"momentum", momentum_}, {"epsilon", epsilon_}};
}

// ------------------------------------------------------------------ Relu

ForwardResult Relu::forward(const Tensor& input, Mode mode, std::optional<std::uint64_t>) const {
  require_finite(input, "layer '" + name_ + "' input");
  Tensor out(input.shape());
  for (std::size_t i = 0; i < input.size(); ++i) out[i] = input[i] > 0.0 ? input[i] : 0.0;
  Cache cache{this, mode, input.shape(), {}};
  cache.saved.push_back(input);
  return {std::move(out), std::move(cache)};
}

BackwardResult Relu::backward(const Cache& cache, const Tensor& upstream) const {
  check_cache(cache, upstream, cache.input_shape);
  const Tensor& x = cache.saved.at(0);
  Tensor dx(cache.input_shape);
  for (std::size_t i = 0; i < dx.size(); ++i) dx[i] = x[i] > 0.0 ? upstream[i] : 0.0;
  return {std::move(dx), {}};
}

nlohmann::json Relu::config() const { return {{"kind", "relu"}, {"name", name_}}; }

// --------------------------------------------------------------- Dropout

Dropout::Dropout(std::string name, double rate) : Layer(std::move(name)), rate_(rate) {
  if (!(rate_ >= 0.0 && rate_ < 1.0)) {
    throw ConfigError("dropout '" + name_ + "': rate must lie in [0, 1), got " + std::to_string(rate_));
  }
}

ForwardResult Dropout::forward(const Tensor& input, Mode mode, std::optional<std::uint64_t> seed) const {
  require_finite(input, "layer '" + name_ + "' input");
  Cache cache{this, mode, input.shape(), {}};
  if (mode == Mode::infer || rate_ == 0.0) return {input, std::move(cache)};
  if (!seed) throw ContractError("dropout '" + name_ + "': train-mode forward requires an rng seed");

  std::mt19937_64 rng(*seed);
  const double keep_scale = 1.0 / (1.0 - rate_);
  Tensor mask(input.shape());
  Tensor out(input.shape());
  for (std::size_t i = 0; i < input.size(); ++i) {
    mask[i] = uniform01(rng) >= rate_ ? keep_scale : 0.0;
    out[i] = input[i] * mask[i];
  }
  cache.saved.push_back(std::move(mask));
  return {std::move(out), std::move(cache)};
}

BackwardResult Dropout::backward(const Cache& cache, const Tensor& upstream) const {
  check_cache(cache, upstream, cache.input_shape);
  if (cache.saved.empty()) return {upstream, {}};
  const Tensor& mask = cache.saved[0];
  Tensor dx(cache.input_shape);
  for (std::size_t i = 0; i < dx.size(); ++i) dx[i] = upstream[i] * mask[i];
  return {std::move(dx), {}};
}

nlohmann::json Dropout::config() const { return {{"kind", "dropout"}, {"name", name_}, {"rate", rate_}}; }

// ----------------------------------------------------------------- Dense

Dense::Dense(std::string name, std::size_t in_features, std::size_t out_features, bool bias)
    : Layer(std::move(name)), in_(in_features), out_(out_features), bias_(bias) {
  if (in_ == 0 || out_ == 0) throw ConfigError("dense '" + name_ + "': feature counts must be positive");
  params_.push_back({name_ + ".weight", Tensor({out_, in_})});
  if (bias_) params_.push_back({name_ + ".bias", Tensor({out_})});
}

Shape Dense::output_shape(const Shape& input) const {
  if (input.size() != 2 || input[1] != in_) {
    throw ShapeError(dim_error(name_, "expected (N, " + std::to_string(in_) + ")", input));
  }
  return {input[0], out_};
}

ForwardResult Dense::forward(const Tensor& input, Mode mode, std::optional<std::uint64_t>) const {
  check_input(*this, input);
  const std::size_t n = input.dim(0);
  std::vector<double> x_t(in_ * n);
  kernels::transpose(n, in_, input.data().data(), x_t.data());
  std::vector<double> y_t(out_ * n);
  kernels::gemm(out_, n, in_, weight().data().data(), x_t.data(), y_t.data(), false);

  Tensor out({n, out_});
  for (std::size_t o = 0; o < out_; ++o) {
    const double bias = bias_ ? params_[1].value[o] : 0.0;
    for (std::size_t b = 0; b < n; ++b) out[b * out_ + o] = y_t[o * n + b] + bias;
  }
  Cache cache{this, mode, input.shape(), {}};
  cache.saved.push_back(input);
  return {std::move(out), std::move(cache)};
}

BackwardResult Dense::backward(const Cache& cache, const Tensor& upstream) const {
  check_cache(cache, upstream, output_shape(cache.input_shape));
  const Tensor& x = cache.saved.at(0);
  const std::size_t n = x.dim(0);

  std::vector<double> g_t(out_ * n);
  kernels::transpose(n, out_, upstream.data().data(), g_t.data());

  BackwardResult result;
  Tensor dw({out_, in_});
  kernels::gemm(out_, in_, n, g_t.data(), x.data().data(), dw.data().data(), false);
  result.param_grads.push_back(std::move(dw));
  if (bias_) {
    Tensor db({out_});
    for (std::size_t o = 0; o < out_; ++o) {
      double s = 0.0;
      for (std::size_t b = 0; b < n; ++b) s += g_t[o * n + b];
      db[o] = s;
    }
    result.param_grads.push_back(std::move(db));
  }
  result.input_grad = Tensor({n, in_});
  kernels::gemm(n, in_, out_, upstream.data().data(), weight().data().data(), result.input_grad.data().data(), false);
  return result;
}

void Dense::initialize(std::mt19937_64& rng) {
  he_uniform(params_[0].value, in_, rng);
  if (bias_) params_[1].value.fill(0.0);
}

nlohmann::json Dense::config() const {
  return {{"kind", "dense"}, {"name", name_}, {"in_features", in_}, {"out_features", out_}, {"bias", bias_}};
}

// --------------------------------------------------------------- Flatten

Shape Flatten::output_shape(const Shape& input) const {
  if (input.size() < 2) throw ShapeError(dim_error(name_, "expected at least (N, F)", input));
  return {input[0], shape_size(input) / std::max<std::size_t>(input[0], 1)};
}

ForwardResult Flatten::forward(const Tensor& input, Mode mode, std::optional<std::uint64_t>) const {
  require_finite(input, "layer '" + name_ + "' input");
  Cache cache{this, mode, input.shape(), {}};
  return {input.reshaped(output_shape(input.shape())), std::move(cache)};
}

BackwardResult Flatten::backward(const Cache& cache, const Tensor& upstream) const {
  check_cache(cache, upstream, output_shape(cache.input_shape));
  return {upstream.reshaped(cache.input_shape), {}};
}

nlohmann::json Flatten::config() const { return {{"kind", "flatten"}, {"name", name_}}; }

}  // namespace s2p::nn
