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

#include "fedprint/corpus.h"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <map>
#include <numeric>

#include "fedprint/errors.h"
#include "fedprint/rng.h"

namespace fedprint {

Vocab::Vocab() {
  add("<pad>");
  add("<unk>");
}

TokenId Vocab::add(std::string_view token, std::size_t count) {
  auto it = index_.find(std::string(token));
  if (it != index_.end()) {
    counts_[static_cast<std::size_t>(it->second)] += count;
    return it->second;
  }
  const auto id = static_cast<TokenId>(tokens_.size());
  tokens_.emplace_back(token);
  counts_.push_back(count);
  index_.emplace(std::string(token), id);
  return id;
}

TokenId Vocab::id(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnk : it->second;
}

const std::string& Vocab::token(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
    throw UsageError("Vocab::token: id " + std::to_string(id) + " out of range");
  }
  return tokens_[static_cast<std::size_t>(id)];
}

bool Vocab::contains(std::string_view token) const {
  return index_.contains(std::string(token));
}

std::size_t Vocab::count(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? 0 : counts_[static_cast<std::size_t>(it->second)];
}

Sentence Vocab::encode(std::span<const std::string> words) const {
  Sentence out;
  out.reserve(words.size());
  for (const auto& w : words) out.push_back(id(w));
  return out;
}

std::vector<std::string> Vocab::decode(std::span<const TokenId> ids) const {
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (TokenId t : ids) out.push_back(token(t));
  return out;
}

void SyntheticSpec::validate() const {
  if (n_clients < 2) throw ConfigError("fed.clients: synthetic data needs at least 2 clients");
  if (train_sentences < 1) {
    throw ConfigError("data.synthetic.train_sentences: must be >= 1");
  }
  if (min_length < 1 || max_length < min_length) {
    throw ConfigError("data.synthetic.min_length/max_length: need 1 <= min <= max");
  }
  if (!(overlap >= 0.0 && overlap <= 1.0)) {
    throw ConfigError("data.synthetic.overlap: must lie in [0, 1]");
  }
  if (overlap < 1.0 && topic_vocab_size < 1) {
    throw ConfigError("data.synthetic.topic_vocab_size: must be >= 1");
  }
  if (overlap > 0.0 && shared_vocab_size < 1) {
    throw ConfigError("data.synthetic.shared_vocab_size: must be >= 1");
  }
}

Corpus generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
  spec.validate();
  Corpus corpus;
  std::vector<TokenId> shared(spec.shared_vocab_size);
  for (std::size_t j = 0; j < spec.shared_vocab_size; ++j) {
    shared[j] = corpus.vocab.add("s" + std::to_string(j));
  }

  // Each private token prefers a few successors, which gives every client
  // its own bigram statistics on top of its own token set.
  constexpr std::size_t kSuccessors = 3;
  constexpr double kFollowProbability = 0.7;

  for (std::size_t c = 0; c < spec.n_clients; ++c) {
    Rng rng = Rng::stream(seed, "corpus", c);
    std::vector<TokenId> topic(spec.topic_vocab_size);
    for (std::size_t j = 0; j < spec.topic_vocab_size; ++j) {
      topic[j] = corpus.vocab.add("c" + std::to_string(c) + "w" + std::to_string(j));
    }
    std::vector<std::array<std::size_t, kSuccessors>> successors(topic.size());
    for (auto& s : successors) {
      for (auto& n : s) n = rng.uniform_index(topic.size());
    }

    auto make_sentence = [&] {
      const std::size_t len =
          spec.min_length + rng.uniform_index(spec.max_length - spec.min_length + 1);
      Sentence s;
      s.reserve(len);
      std::size_t state = topic.empty() ? 0 : rng.uniform_index(topic.size());
      bool first_private = true;
      for (std::size_t k = 0; k < len; ++k) {
        if (topic.empty() || rng.bernoulli(spec.overlap)) {
          s.push_back(shared[rng.uniform_index(shared.size())]);
          continue;
        }
        if (!first_private) {
          state = rng.bernoulli(kFollowProbability)
                      ? successors[state][rng.uniform_index(kSuccessors)]
                      : rng.uniform_index(topic.size());
        }
        first_private = false;
        s.push_back(topic[state]);
      }
      return s;
    };

    ClientShard shard;
    shard.client_id = static_cast<int>(c);
    for (std::size_t i = 0; i < spec.train_sentences; ++i) {
      shard.train.push_back(make_sentence());
    }
    for (std::size_t i = 0; i < spec.valid_sentences; ++i) {
      shard.valid.push_back(make_sentence());
    }
    corpus.shards.push_back(std::move(shard));
  }

  for (const auto& shard : corpus.shards) {
    for (const auto& s : shard.train) {
      for (TokenId t : s) corpus.vocab.add(corpus.vocab.token(t), 1);
    }
  }
  return corpus;
}

std::vector<std::string> tokenize(std::string_view line) {
  std::vector<std::string> out;
  std::string current;
  for (char ch : line) {
    if (std::isspace(static_cast<unsigned char>(ch))) {
      if (!current.empty()) out.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

Corpus load_text_shards(std::span<const std::filesystem::path> paths,
                        const TextLoadOptions& options) {
  if (paths.empty()) throw InputError("load_text_shards: no client files given");

  struct Split {
    std::vector<std::vector<std::string>> train, valid;
  };
  std::vector<Split> splits;
  std::map<std::string, std::size_t> counts;

  for (const auto& path : paths) {
    std::ifstream in(path);
    if (!in) throw InputError(path.string() + ": cannot open client file");
    std::vector<std::vector<std::string>> lines;
    std::string line;
    while (std::getline(in, line)) {
      auto words = tokenize(line);
      if (!words.empty()) lines.push_back(std::move(words));
    }
    if (lines.empty()) throw InputError(path.string() + ": client file is empty");

    // Trailing lines form the validation split; train keeps at least one.
    const std::size_t n_valid = std::min(options.valid_sentences, lines.size() - 1);
    const std::size_t n_train =
        std::min(options.train_sentences, lines.size() - n_valid);
    Split s;
    s.train.assign(lines.begin(), lines.begin() + static_cast<std::ptrdiff_t>(n_train));
    s.valid.assign(lines.end() - static_cast<std::ptrdiff_t>(n_valid), lines.end());
    for (const auto& sentence : s.train) {
      for (const auto& w : sentence) ++counts[w];
    }
    splits.push_back(std::move(s));
  }

  // Frequent tokens first, ties alphabetical, so ids are reproducible.
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });

  Corpus corpus;
  std::size_t unk = 0;
  for (const auto& [token, n] : ranked) {
    if (n >= options.min_count) {
      corpus.vocab.add(token, n);
    } else {
      unk += n;
    }
  }
  corpus.vocab.add("<unk>", unk);

  for (std::size_t c = 0; c < splits.size(); ++c) {
    ClientShard shard;
    shard.client_id = static_cast<int>(c);
    for (const auto& s : splits[c].train) shard.train.push_back(corpus.vocab.encode(s));
    for (const auto& s : splits[c].valid) shard.valid.push_back(corpus.vocab.encode(s));
    corpus.shards.push_back(std::move(shard));
  }
  return corpus;
}

Batch windows_of(std::span<const Sentence> sentences, std::size_t context) {
  Batch out(context);
  for (const auto& s : sentences) {
    const std::size_t len = std::min(s.size(), kMaxSentenceTokens);
    for (std::size_t end = context; end < len; ++end) {
      out.add(std::span<const TokenId>(s.data() + end - context, context), s[end]);
    }
  }
  return out;
}

std::vector<Batch> batch_iter(std::span<const Sentence> sentences,
                              std::size_t batch_size, std::size_t context,
                              std::uint64_t seed) {
  if (batch_size < 1) throw UsageError("batch_iter: batch_size must be >= 1");
  const Batch all = windows_of(sentences, context);
  std::vector<std::size_t> order(all.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  for (std::size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[rng.uniform_index(i)]);
  }
  std::vector<Batch> batches;
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    Batch b(context);
    const std::size_t stop = std::min(order.size(), start + batch_size);
    for (std::size_t k = start; k < stop; ++k) b.add(all.window(order[k]), all.target(order[k]));
    batches.push_back(std::move(b));
  }
  return batches;
}

}  // namespace fedprint
