// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>

#include "deepforge/common/error.hpp"

namespace deepforge {

class TokenizerFailure : public Error {
 public:
  explicit TokenizerFailure(const std::string& detail) : Error("TokenizerFailure", detail) {}
};

class Tokenizer {
 public:
  virtual ~Tokenizer() = default;
  virtual std::size_t count(std::string_view text) const = 0;
};

/// Defined for every byte string: each run of ASCII letters and digits costs
/// ceil(len / 4) tokens, every other non-space ASCII byte and every non-ASCII
/// code point costs 1, whitespace is free.
class ApproximateTokenizer : public Tokenizer {
 public:
  std::size_t count(std::string_view text) const override;
};

/// Greedy longest-match over a vocabulary file with one token per line.
/// Bytes that start no vocabulary entry cost one token each; whitespace
/// bytes are free unless the vocabulary lists them.
class VocabTokenizer : public Tokenizer {
 public:
  explicit VocabTokenizer(const std::filesystem::path& vocab_path);
  std::size_t count(std::string_view text) const override;
  std::size_t vocab_size() const noexcept { return vocab_.size(); }

 private:
  std::unordered_map<std::string, bool> vocab_;
  std::size_t max_len_ = 0;
};

enum class TokenizerMode { Approximate, VocabFile };

struct TokenizerHandle {
  TokenizerMode mode = TokenizerMode::Approximate;
  std::filesystem::path path;  // VocabFile only
};

/// Throws TokenizerFailure when a vocabulary file is missing or empty.
std::shared_ptr<const Tokenizer> make_tokenizer(const TokenizerHandle& handle);

}  // namespace deepforge
