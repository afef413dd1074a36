#pragma once

#include <memory>
#include <string>
#include <vector>

namespace agentcodec {

/// Maps text to a fixed-dimension unit vector.
class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::vector<double> embed(const std::string& text) const = 0;
  virtual std::size_t dimension() const = 0;
};

using EmbedderPtr = std::shared_ptr<Embedder>;

/// Deterministic offline embedder: hashed bag of word unigrams and bigrams,
/// L2-normalized. Byte-identical across platforms and runs.
class HashEmbedder final : public Embedder {
 public:
  explicit HashEmbedder(std::size_t dim = 64) : dim_(dim) {}
  std::vector<double> embed(const std::string& text) const override;
  std::size_t dimension() const override { return dim_; }

 private:
  std::size_t dim_;
};

/// Client for an OpenAI-compatible /embeddings endpoint.
class HttpEmbedder final : public Embedder {
 public:
  HttpEmbedder(std::string endpoint_url, std::string model_id, std::size_t dim,
               std::string api_key_env = "AGENTCODEC_API_KEY");
  std::vector<double> embed(const std::string& text) const override;
  std::size_t dimension() const override { return dim_; }

 private:
  std::string endpoint_url_;
  std::string model_id_;
  std::size_t dim_;
  std::string api_key_env_;
};

/// Cosine similarity; 0 when either vector is all-zero.
double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace agentcodec
