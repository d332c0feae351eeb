#include "otas/alignment.hpp"

#include <algorithm>
#include <cmath>

#include "otas/error.hpp"

namespace otas {
namespace {

double dot(std::span<const float> a, std::span<const float> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += static_cast<double>(a[i]) * b[i];
  return acc;
}

}  // namespace

TextEmbedding TextEmbedding::from_values(std::string prompt, std::vector<float> values) {
  if (values.empty()) throw ValidationError("text embedding for '" + prompt + "' is empty");
  double sq = 0.0;
  for (float v : values) {
    if (!std::isfinite(v)) throw ValidationError("text embedding for '" + prompt + "' is not finite");
    sq += static_cast<double>(v) * v;
  }
  if (std::sqrt(sq) < kZeroNorm) throw ValidationError("text embedding for '" + prompt + "' is zero");
  l2_normalize_inplace(values);
  return TextEmbedding{std::move(prompt), std::move(values)};
}

void PromptSet::validate() const {
  if (positives.empty()) throw ValidationError("prompt set needs at least one positive prompt");
  const std::size_t dims = positives.front().dims();
  auto check = [&](const TextEmbedding& t) {
    if (t.dims() != dims) {
      throw ValidationError("prompt '" + t.prompt + "' has " + std::to_string(t.dims()) + " dims, expected " +
                            std::to_string(dims));
    }
  };
  std::for_each(positives.begin(), positives.end(), check);
  std::for_each(negatives.begin(), negatives.end(), check);
}

PooledGrid masked_average_pool(const TokenGrid& vl_tokens, const MaskSet& masks, std::size_t view) {
  if (vl_tokens.d != masks.d) {
    throw ValidationError("token grid side " + std::to_string(vl_tokens.d) + " does not match mask side " +
                          std::to_string(masks.d));
  }
  if (view >= masks.n_views) {
    throw ValidationError("view " + std::to_string(view) + " out of range for " + std::to_string(masks.n_views) +
                          " views");
  }
  const std::size_t cells = vl_tokens.cells();
  const std::size_t ch = vl_tokens.channels;
  const std::vector<std::size_t> labels = masks.labels(view);

  std::vector<double> sums(masks.k * ch, 0.0);
  std::vector<std::size_t> counts(masks.k, 0);
  for (std::size_t c = 0; c < cells; ++c) {
    const std::size_t m = labels[c];
    ++counts[m];
    auto src = vl_tokens.cell(c);
    double* acc = sums.data() + m * ch;
    for (std::size_t j = 0; j < ch; ++j) acc[j] += src[j];
  }

  PooledGrid out;
  out.d = vl_tokens.d;
  out.channels = ch;
  out.view_index = view;
  out.data.resize(cells * ch);
  std::vector<float> means(masks.k * ch, 0.0f);
  for (std::size_t m = 0; m < masks.k; ++m) {
    if (counts[m] == 0) continue;
    for (std::size_t j = 0; j < ch; ++j) {
      means[m * ch + j] = static_cast<float>(sums[m * ch + j] / static_cast<double>(counts[m]));
    }
  }
  for (std::size_t c = 0; c < cells; ++c) {
    const float* mean = means.data() + labels[c] * ch;
    std::copy(mean, mean + ch, out.data.begin() + static_cast<std::ptrdiff_t>(c * ch));
  }
  return out;
}

PooledGrid normalize_pooled(PooledGrid pooled) {
  for (std::size_t c = 0; c < pooled.cells(); ++c) l2_normalize_inplace(pooled.cell(c));
  pooled.normalized = true;
  return pooled;
}

SimilarityMap similarity_map(const PooledGrid& pooled, const TextEmbedding& text) {
  if (!pooled.normalized) throw ValidationError("similarity requires a normalized pooled grid");
  if (pooled.channels != text.dims()) {
    throw ValidationError("pooled features have " + std::to_string(pooled.channels) + " channels, prompt '" +
                          text.prompt + "' has " + std::to_string(text.dims()));
  }
  SimilarityMap s;
  s.d = pooled.d;
  s.data.resize(pooled.cells());
  for (std::size_t c = 0; c < pooled.cells(); ++c) s.data[c] = static_cast<float>(dot(pooled.cell(c), text.vector));
  return s;
}

std::vector<float> combined_similarity(std::span<const float> features, std::size_t channels,
                                       const PromptSet& prompts) {
  prompts.validate();
  if (channels != prompts.dims()) {
    throw ValidationError("features have " + std::to_string(channels) + " channels, prompts have " +
                          std::to_string(prompts.dims()));
  }
  const std::size_t rows = channels == 0 ? 0 : features.size() / channels;
  std::vector<float> out(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const std::span<const float> f = features.subspan(r * channels, channels);
    double acc = 0.0;
    for (const TextEmbedding& t : prompts.positives) acc += dot(f, t.vector);
    for (const TextEmbedding& t : prompts.negatives) acc -= dot(f, t.vector);
    out[r] = static_cast<float>(acc);
  }
  return out;
}

SimilarityMap combined_similarity(const PooledGrid& pooled, const PromptSet& prompts) {
  if (!pooled.normalized) throw ValidationError("similarity requires a normalized pooled grid");
  SimilarityMap s;
  s.d = pooled.d;
  s.data = combined_similarity(pooled.data, pooled.channels, prompts);
  return s;
}

std::vector<float> normalize_min_max(std::vector<float> values) {
  if (values.empty()) return values;
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  if (!(hi > lo)) {
    std::fill(values.begin(), values.end(), 0.5f);
    return values;
  }
  const double range = hi - lo;
  for (float& v : values) v = static_cast<float>(std::clamp((v - lo) / range, 0.0, 1.0));
  return values;
}

SimilarityMap normalize_similarity(SimilarityMap s) {
  s.data = normalize_min_max(std::move(s.data));
  s.normalized = true;
  return s;
}

}  // namespace otas
