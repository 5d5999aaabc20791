// Copyright 2026 The fedprint Authors.
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

#ifndef FEDPRINT_CORPUS_H_
#define FEDPRINT_CORPUS_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "fedprint/langmodel.h"

namespace fedprint {

using Sentence = std::vector<TokenId>;

// Sentences longer than this are truncated before windowing.
inline constexpr std::size_t kMaxSentenceTokens = 40;

class Vocab {
 public:
  static constexpr TokenId kPad = 0;
  static constexpr TokenId kUnk = 1;

  Vocab();

  // Returns the id of `token`, adding it if new.
  TokenId add(std::string_view token, std::size_t count = 0);

  // kUnk for unknown tokens.
  TokenId id(std::string_view token) const;
  const std::string& token(TokenId id) const;
  bool contains(std::string_view token) const;
  std::size_t count(std::string_view token) const;
  std::size_t size() const { return tokens_.size(); }

  Sentence encode(std::span<const std::string> words) const;
  std::vector<std::string> decode(std::span<const TokenId> ids) const;

 private:
  std::vector<std::string> tokens_;
  std::vector<std::size_t> counts_;
  std::unordered_map<std::string, TokenId> index_;
};

struct ClientShard {
  int client_id = 0;
  std::vector<Sentence> train;
  std::vector<Sentence> valid;
};

struct Corpus {
  Vocab vocab;
  std::vector<ClientShard> shards;
};

// Parameters of the topic-partitioned generator. Each client owns a private
// topic vocabulary with its own Markov transition structure; with
// probability `overlap` a position is instead drawn uniformly from a shared
// vocabulary common to all clients.
struct SyntheticSpec {
  std::size_t n_clients = 3;
  std::size_t train_sentences = 64;
  std::size_t valid_sentences = 8;
  std::size_t min_length = 8;
  std::size_t max_length = 16;
  std::size_t topic_vocab_size = 24;
  std::size_t shared_vocab_size = 24;
  double overlap = 0.0;

  void validate() const;
};

Corpus generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed);

struct TextLoadOptions {
  std::size_t train_sentences = 64;
  std::size_t valid_sentences = 8;
  std::size_t min_count = 2;  // tokens seen fewer times map to UNK
};

// One file per client, one sentence per line. Tokens are lowercased and split
// on whitespace. The vocabulary is built from the train splits only. Train is
// the leading lines, valid the trailing ones.
Corpus load_text_shards(std::span<const std::filesystem::path> paths,
                        const TextLoadOptions& options = {});

std::vector<std::string> tokenize(std::string_view line);

// Every (window, next token) pair of the sentences, in order, after
// truncation to kMaxSentenceTokens.
Batch windows_of(std::span<const Sentence> sentences, std::size_t context);

// Windows of the sentences in a seeded shuffled order, split into batches of
// `batch_size`. The last batch may be smaller.
std::vector<Batch> batch_iter(std::span<const Sentence> sentences,
                              std::size_t batch_size, std::size_t context,
                              std::uint64_t seed);

}  // namespace fedprint

#endif  // FEDPRINT_CORPUS_H_
