//
// Copyright 2026 The dpmix Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dpmix/prob_dist.h"

namespace dpmix {

using TokenSeq = std::vector<std::int32_t>;

enum class TokenMode { kChar, kWord };

// Ordered token set shared by every model in an ensemble. Token ids are
// positions in the sorted token list, so identical corpora produce identical
// vocabularies.
class Vocabulary {
 public:
  Vocabulary(std::vector<std::string> tokens, TokenMode mode);

  static Vocabulary build(std::span<const std::string> documents, TokenMode mode);

  std::size_t size() const { return tokens_.size(); }
  TokenMode mode() const { return mode_; }
  const std::vector<std::string>& tokens() const { return tokens_; }
  const std::string& token(std::int32_t id) const;
  std::optional<std::int32_t> id_of(const std::string& token) const;

  // Tokenizes and maps to ids; throws std::invalid_argument naming the first
  // out-of-vocabulary token.
  TokenSeq encode(const std::string& text) const;

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.mode_ == b.mode_ && a.tokens_ == b.tokens_;
  }

 private:
  TokenMode mode_;
  std::vector<std::string> tokens_;
  std::map<std::string, std::int32_t> ids_;
};

// Splits raw text into tokens: single characters, or maximal runs separated
// by whitespace.
std::vector<std::string> split_tokens(const std::string& text, TokenMode mode);

// Anything that can answer "distribution of the next token after this
// context". Implementations are immutable once built and safe to query
// concurrently; predictions are deterministic for a fixed state and context.
class DistributionProvider {
 public:
  virtual ~DistributionProvider() = default;
  virtual ProbDist predict(std::span<const std::int32_t> context) const = 0;
  virtual std::size_t vocab_size() const = 0;
};

// Additively smoothed n-gram model over token ids. Contexts are the last
// order-1 tokens; unseen contexts predict the uniform distribution. The
// smoothing mass guarantees full support, so every prediction is a valid
// ProbDist.
class NGramModel : public DistributionProvider {
 public:
  static NGramModel train(std::span<const TokenSeq> documents, int order,
                          double smoothing_alpha, Vocabulary vocab);

  ProbDist predict(std::span<const std::int32_t> context) const override;
  std::size_t vocab_size() const override { return vocab_.size(); }

  int order() const { return order_; }
  double smoothing_alpha() const { return smoothing_; }
  const Vocabulary& vocabulary() const { return vocab_; }

  void save(const std::string& path) const;
  static NGramModel load(const std::string& path);

 private:
  struct ContextCounts {
    std::int64_t total = 0;
    std::map<std::int32_t, std::int64_t> by_token;
  };

  NGramModel(int order, double smoothing, Vocabulary vocab)
      : order_(order), smoothing_(smoothing), vocab_(std::move(vocab)) {}

  int order_;
  double smoothing_;
  Vocabulary vocab_;
  std::map<TokenSeq, ContextCounts> counts_;
};

// Replays recorded next-token distributions keyed by exact context. Lets
// recorded model outputs (from this library or anything external) stand in
// for a live model without touching the decoder.
class FileBackedProvider : public DistributionProvider {
 public:
  static FileBackedProvider load(const std::string& path);
  static void save_table(
      const std::string& path, std::size_t vocab_size,
      const std::vector<std::pair<TokenSeq, ProbDist>>& entries);

  // Throws std::out_of_range for a context that was never recorded.
  ProbDist predict(std::span<const std::int32_t> context) const override;
  std::size_t vocab_size() const override { return vocab_size_; }

 private:
  FileBackedProvider(std::size_t vocab_size, std::map<TokenSeq, ProbDist> table)
      : vocab_size_(vocab_size), table_(std::move(table)) {}

  std::size_t vocab_size_;
  std::map<TokenSeq, ProbDist> table_;
};

// Documents grouped into pairwise-disjoint shards, plus the assignment of
// original document ids per shard.
struct ShardedCorpus {
  std::vector<std::vector<TokenSeq>> shards;
  std::vector<std::vector<std::size_t>> shard_manifest;
};

// Seeded shuffle followed by round-robin assignment into n_shards groups.
// Every document lands in exactly one shard and no shard is empty.
// Throws when there are fewer documents than shards.
ShardedCorpus partition_corpus(std::span<const TokenSeq> documents,
                               std::size_t n_shards, std::uint64_t seed);

}  // namespace dpmix
