#include "agentcodec/embedding.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>

#include <httplib.h>

#include "agentcodec/errors.hpp"
#include "json.hpp"
#include "rng.hpp"

namespace agentcodec {

namespace {

std::vector<std::string> tokenize_lower(const std::string& text) {
  std::vector<std::string> words;
  std::string cur;
  for (char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else if (!cur.empty()) {
      words.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) words.push_back(cur);
  return words;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

void add_feature(std::vector<double>& vec, const std::string& token) {
  std::uint64_t h = detail::splitmix64(fnv1a(token));
  std::size_t idx = h % vec.size();
  double sign = ((h >> 63) & 1) ? -1.0 : 1.0;  // signed hashing reduces collision bias
  vec[idx] += sign;
}

void l2_normalize(std::vector<double>& vec) {
  double norm = 0.0;
  for (double v : vec) norm += v * v;
  norm = std::sqrt(norm);
  if (norm > 0.0)
    for (double& v : vec) v /= norm;
}

}  // namespace

std::vector<double> HashEmbedder::embed(const std::string& text) const {
  std::vector<double> vec(dim_, 0.0);
  auto words = tokenize_lower(text);
  for (const auto& w : words) add_feature(vec, w);
  for (std::size_t i = 0; i + 1 < words.size(); ++i)
    add_feature(vec, words[i] + "_" + words[i + 1]);
  l2_normalize(vec);
  return vec;
}

HttpEmbedder::HttpEmbedder(std::string endpoint_url, std::string model_id, std::size_t dim,
                           std::string api_key_env)
    : endpoint_url_(std::move(endpoint_url)),
      model_id_(std::move(model_id)),
      dim_(dim),
      api_key_env_(std::move(api_key_env)) {}

std::vector<double> HttpEmbedder::embed(const std::string& text) const {
  nlohmann::json body{{"model", model_id_}, {"input", text}};
  httplib::Headers headers;
  if (const char* key = std::getenv(api_key_env_.c_str()))
    headers.emplace("Authorization", std::string("Bearer ") + key);

  httplib::Client client(endpoint_url_);
  client.set_read_timeout(60, 0);
  auto res = client.Post("/embeddings", headers, body.dump(), "application/json");
  if (!res) throw TransportError("embedding endpoint unreachable");
  if (res->status >= 400)
    throw TransportError("embedding request failed with status " + std::to_string(res->status));

  auto reply = nlohmann::json::parse(res->body);
  std::vector<double> vec =
      reply.at("data").at(0).at("embedding").get<std::vector<double>>();
  if (vec.size() != dim_)
    throw ValidationError("embedding dimension mismatch: got " + std::to_string(vec.size()) +
                          ", expected " + std::to_string(dim_));
  l2_normalize(vec);
  return vec;
}

double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size())
    throw ValidationError("cosine_similarity dimension mismatch");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace agentcodec
