// SPDX-License-Identifier: Apache-2.0
#include "deepforge/curation/tokenizer.hpp"

#include <fstream>

#include "deepforge/common/text.hpp"

namespace deepforge {

namespace {

bool is_alnum(unsigned char c) { return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

}  // namespace

std::size_t ApproximateTokenizer::count(std::string_view s) const {
  std::size_t tokens = 0;
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    if (is_alnum(c)) {
      std::size_t run = 0;
      while (i < s.size() && is_alnum(static_cast<unsigned char>(s[i]))) {
        ++run;
        ++i;
      }
      tokens += (run + 3) / 4;
    } else if (c < 0x80) {
      if (!text::is_ascii_space(s[i])) ++tokens;
      ++i;
    } else {
      text::next_code_point(s, i);
      ++tokens;
    }
  }
  return tokens;
}

VocabTokenizer::VocabTokenizer(const std::filesystem::path& vocab_path) {
  std::ifstream in(vocab_path, std::ios::binary);
  if (!in) throw TokenizerFailure("cannot open vocabulary " + vocab_path.string());
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    max_len_ = std::max(max_len_, line.size());
    vocab_.emplace(std::move(line), true);
  }
  if (vocab_.empty()) throw TokenizerFailure("vocabulary " + vocab_path.string() + " is empty");
}

std::size_t VocabTokenizer::count(std::string_view s) const {
  std::size_t tokens = 0;
  std::size_t i = 0;
  while (i < s.size()) {
    std::size_t matched = 0;
    for (std::size_t len = std::min(max_len_, s.size() - i); len > 0; --len) {
      if (vocab_.count(std::string(s.substr(i, len)))) {
        matched = len;
        break;
      }
    }
    if (matched > 0) {
      ++tokens;
      i += matched;
    } else {
      if (!text::is_ascii_space(s[i])) ++tokens;
      ++i;
    }
  }
  return tokens;
}

std::shared_ptr<const Tokenizer> make_tokenizer(const TokenizerHandle& handle) {
  if (handle.mode == TokenizerMode::VocabFile) return std::make_shared<VocabTokenizer>(handle.path);
  return std::make_shared<ApproximateTokenizer>();
}

}  // namespace deepforge
