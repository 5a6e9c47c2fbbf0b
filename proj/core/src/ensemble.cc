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

#include "dpmix/ensemble.h"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <set>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "dpmix/random.h"

namespace dpmix {
namespace {

using json = nlohmann::ordered_json;

constexpr int kNGramFormatVersion = 1;
constexpr int kDistTableFormatVersion = 1;

std::string token_mode_name(TokenMode mode) {
  return mode == TokenMode::kChar ? "char" : "word";
}

TokenMode token_mode_from_name(const std::string& name) {
  if (name == "char") return TokenMode::kChar;
  if (name == "word") return TokenMode::kWord;
  throw std::invalid_argument("unknown token mode '" + name + "'");
}

json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  json doc;
  in >> doc;
  return doc;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace

std::vector<std::string> split_tokens(const std::string& text, TokenMode mode) {
  std::vector<std::string> out;
  if (mode == TokenMode::kChar) {
    out.reserve(text.size());
    for (char c : text) out.emplace_back(1, c);
    return out;
  }
  std::string current;
  for (char c : text) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      if (!current.empty()) out.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

Vocabulary::Vocabulary(std::vector<std::string> tokens, TokenMode mode)
    : mode_(mode), tokens_(std::move(tokens)) {
  if (tokens_.empty()) throw std::invalid_argument("Vocabulary: no tokens");
  if (!std::is_sorted(tokens_.begin(), tokens_.end())) {
    throw std::invalid_argument("Vocabulary: tokens must be sorted");
  }
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!ids_.emplace(tokens_[i], static_cast<std::int32_t>(i)).second) {
      throw std::invalid_argument("Vocabulary: duplicate token '" + tokens_[i] + "'");
    }
  }
}

Vocabulary Vocabulary::build(std::span<const std::string> documents, TokenMode mode) {
  std::set<std::string> unique;
  for (const std::string& doc : documents) {
    for (std::string& tok : split_tokens(doc, mode)) unique.insert(std::move(tok));
  }
  return Vocabulary(std::vector<std::string>(unique.begin(), unique.end()), mode);
}

const std::string& Vocabulary::token(std::int32_t id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
    throw std::out_of_range("Vocabulary: token id out of range");
  }
  return tokens_[static_cast<std::size_t>(id)];
}

std::optional<std::int32_t> Vocabulary::id_of(const std::string& token) const {
  auto it = ids_.find(token);
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

TokenSeq Vocabulary::encode(const std::string& text) const {
  TokenSeq out;
  for (const std::string& tok : split_tokens(text, mode_)) {
    auto id = id_of(tok);
    if (!id.has_value()) {
      throw std::invalid_argument("Vocabulary: out-of-vocabulary token '" + tok + "'");
    }
    out.push_back(*id);
  }
  return out;
}

NGramModel NGramModel::train(std::span<const TokenSeq> documents, int order,
                             double smoothing_alpha, Vocabulary vocab) {
  if (order < 1) throw std::invalid_argument("NGramModel: order must be >= 1");
  if (!(smoothing_alpha > 0.0)) {
    throw std::invalid_argument("NGramModel: smoothing_alpha must be positive");
  }
  std::size_t total_tokens = 0;
  for (const TokenSeq& doc : documents) total_tokens += doc.size();
  if (documents.empty() || total_tokens == 0) {
    throw std::invalid_argument("NGramModel: empty shard");
  }

  NGramModel model(order, smoothing_alpha, std::move(vocab));
  const auto vocab_limit = static_cast<std::int32_t>(model.vocab_.size());
  const std::size_t context_len = static_cast<std::size_t>(order - 1);
  for (const TokenSeq& doc : documents) {
    for (std::size_t t = 0; t < doc.size(); ++t) {
      if (doc[t] < 0 || doc[t] >= vocab_limit) {
        throw std::invalid_argument("NGramModel: token id outside vocabulary");
      }
      const std::size_t len = std::min(context_len, t);
      TokenSeq context(doc.begin() + static_cast<std::ptrdiff_t>(t - len),
                       doc.begin() + static_cast<std::ptrdiff_t>(t));
      ContextCounts& cc = model.counts_[context];
      cc.total += 1;
      cc.by_token[doc[t]] += 1;
    }
  }
  return model;
}

ProbDist NGramModel::predict(std::span<const std::int32_t> context) const {
  const auto vocab_limit = static_cast<std::int32_t>(vocab_.size());
  for (std::int32_t id : context) {
    if (id < 0 || id >= vocab_limit) {
      throw std::invalid_argument("NGramModel: out-of-vocabulary token in context");
    }
  }
  const std::size_t context_len =
      std::min(static_cast<std::size_t>(order_ - 1), context.size());
  const TokenSeq key(context.end() - static_cast<std::ptrdiff_t>(context_len),
                     context.end());

  const double v = static_cast<double>(vocab_.size());
  auto it = counts_.find(key);
  if (it == counts_.end()) {
    return ProbDist::uniform(vocab_.size());
  }
  const ContextCounts& cc = it->second;
  const double denom = static_cast<double>(cc.total) + smoothing_ * v;
  std::vector<double> probs(vocab_.size(), smoothing_ / denom);
  for (const auto& [token, count] : cc.by_token) {
    probs[static_cast<std::size_t>(token)] =
        (static_cast<double>(count) + smoothing_) / denom;
  }
  return ProbDist(std::move(probs));
}

void NGramModel::save(const std::string& path) const {
  json doc;
  doc["format"] = "dpmix-ngram";
  doc["version"] = kNGramFormatVersion;
  doc["order"] = order_;
  doc["smoothing"] = smoothing_;
  doc["token_mode"] = token_mode_name(vocab_.mode());
  doc["vocab"] = vocab_.tokens();
  json contexts = json::array();
  for (const auto& [context, cc] : counts_) {
    json entry;
    entry["ctx"] = context;
    entry["total"] = cc.total;
    json counts = json::array();
    for (const auto& [token, count] : cc.by_token) {
      counts.push_back(json::array({token, count}));
    }
    entry["counts"] = std::move(counts);
    contexts.push_back(std::move(entry));
  }
  doc["contexts"] = std::move(contexts);
  write_text_file(path, doc.dump());
}

NGramModel NGramModel::load(const std::string& path) {
  const json doc = read_json_file(path);
  if (doc.at("format") != "dpmix-ngram") {
    throw std::runtime_error(path + ": not an n-gram model file");
  }
  if (doc.at("version").get<int>() != kNGramFormatVersion) {
    throw std::runtime_error(path + ": unsupported model format version");
  }
  Vocabulary vocab(doc.at("vocab").get<std::vector<std::string>>(),
                   token_mode_from_name(doc.at("token_mode").get<std::string>()));
  NGramModel model(doc.at("order").get<int>(), doc.at("smoothing").get<double>(),
                   std::move(vocab));
  for (const json& entry : doc.at("contexts")) {
    ContextCounts cc;
    cc.total = entry.at("total").get<std::int64_t>();
    for (const json& pair : entry.at("counts")) {
      cc.by_token[pair.at(0).get<std::int32_t>()] = pair.at(1).get<std::int64_t>();
    }
    model.counts_[entry.at("ctx").get<TokenSeq>()] = std::move(cc);
  }
  return model;
}

FileBackedProvider FileBackedProvider::load(const std::string& path) {
  const json doc = read_json_file(path);
  if (doc.at("format") != "dpmix-dist-table") {
    throw std::runtime_error(path + ": not a distribution table file");
  }
  if (doc.at("version").get<int>() != kDistTableFormatVersion) {
    throw std::runtime_error(path + ": unsupported table format version");
  }
  const auto vocab_size = doc.at("vocab_size").get<std::size_t>();
  std::map<TokenSeq, ProbDist> table;
  for (const json& entry : doc.at("entries")) {
    ProbDist dist(entry.at("probs").get<std::vector<double>>());
    if (dist.size() != vocab_size) {
      throw std::runtime_error(path + ": entry dimension mismatch");
    }
    table.emplace(entry.at("ctx").get<TokenSeq>(), std::move(dist));
  }
  return FileBackedProvider(vocab_size, std::move(table));
}

void FileBackedProvider::save_table(
    const std::string& path, std::size_t vocab_size,
    const std::vector<std::pair<TokenSeq, ProbDist>>& entries) {
  json doc;
  doc["format"] = "dpmix-dist-table";
  doc["version"] = kDistTableFormatVersion;
  doc["vocab_size"] = vocab_size;
  json list = json::array();
  for (const auto& [context, dist] : entries) {
    json entry;
    entry["ctx"] = context;
    entry["probs"] = std::vector<double>(dist.values().begin(), dist.values().end());
    list.push_back(std::move(entry));
  }
  doc["entries"] = std::move(list);
  write_text_file(path, doc.dump());
}

ProbDist FileBackedProvider::predict(std::span<const std::int32_t> context) const {
  auto it = table_.find(TokenSeq(context.begin(), context.end()));
  if (it == table_.end()) {
    throw std::out_of_range("FileBackedProvider: no recorded distribution for context");
  }
  return it->second;
}

ShardedCorpus partition_corpus(std::span<const TokenSeq> documents,
                               std::size_t n_shards, std::uint64_t seed) {
  if (n_shards == 0) {
    throw std::invalid_argument("partition_corpus: n_shards must be positive");
  }
  if (documents.size() < n_shards) {
    throw std::invalid_argument("partition_corpus: fewer documents (" +
                                std::to_string(documents.size()) + ") than shards (" +
                                std::to_string(n_shards) + ")");
  }
  std::vector<std::size_t> ids(documents.size());
  std::iota(ids.begin(), ids.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(ids);

  ShardedCorpus corpus;
  corpus.shards.resize(n_shards);
  corpus.shard_manifest.resize(n_shards);
  for (std::size_t pos = 0; pos < ids.size(); ++pos) {
    const std::size_t shard = pos % n_shards;
    corpus.shard_manifest[shard].push_back(ids[pos]);
    corpus.shards[shard].push_back(documents[ids[pos]]);
  }
  return corpus;
}

}  // namespace dpmix
