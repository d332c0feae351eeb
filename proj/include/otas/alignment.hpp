#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "otas/clustering.hpp"
#include "otas/tensor.hpp"

namespace otas {

/// Language-grounded d x d feature map of one view after masked average pooling.
struct PooledGrid {
  std::size_t d = 0;
  std::size_t channels = 0;
  std::size_t view_index = 0;
  bool normalized = false;
  std::vector<float> data;

  std::size_t cells() const { return d * d; }
  std::span<const float> cell(std::size_t index) const { return {data.data() + index * channels, channels}; }
  std::span<float> cell(std::size_t index) { return {data.data() + index * channels, channels}; }
};

/// Unit-norm text embedding of one prompt.
struct TextEmbedding {
  std::string prompt;
  std::vector<float> vector;

  /// Normalizes `values`; throws ValidationError for empty, zero or non-finite input.
  static TextEmbedding from_values(std::string prompt, std::vector<float> values);
  std::size_t dims() const { return vector.size(); }
};

struct PromptSet {
  std::vector<TextEmbedding> positives;
  std::vector<TextEmbedding> negatives;

  /// Throws ValidationError if there are no positives or dimensions disagree.
  void validate() const;
  std::size_t dims() const { return positives.empty() ? 0 : positives.front().dims(); }
};

struct SimilarityMap {
  std::size_t d = 0;
  bool normalized = false;
  std::vector<float> data;  // d x d, row-major
};

/// Replaces every cell by the mean vision-language feature of its mask within `view`.
PooledGrid masked_average_pool(const TokenGrid& vl_tokens, const MaskSet& masks, std::size_t view);

PooledGrid normalize_pooled(PooledGrid pooled);

/// Cosine similarity of every (unit) cell vector with the text embedding.
SimilarityMap similarity_map(const PooledGrid& pooled, const TextEmbedding& text);

/// Sum of positive-prompt similarities minus sum of negative-prompt similarities.
SimilarityMap combined_similarity(const PooledGrid& pooled, const PromptSet& prompts);

/// Same score for an arbitrary row-major set of feature vectors.
std::vector<float> combined_similarity(std::span<const float> features, std::size_t channels,
                                       const PromptSet& prompts);

/// Min-max rescale to [0, 1]; a constant map becomes 0.5 everywhere.
SimilarityMap normalize_similarity(SimilarityMap s);
std::vector<float> normalize_min_max(std::vector<float> values);

}  // namespace otas
