#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace factuality::conllu {

struct Token {
  int id = 0;    // 1-based
  std::string form;
  std::string lemma;
  std::string upos;
  std::string xpos;
  int head = 0;  // 0 = root
  std::string deprel;
};

struct Sentence {
  std::optional<std::string> sent_id;
  std::optional<std::string> text;
  std::vector<Token> tokens;

  /// 0-based indices of the tokens whose head is `index` (0-based).
  std::vector<std::size_t> children(std::size_t index) const;
  /// 0-based indices of the subtree rooted at `index`, sorted ascending.
  std::vector<std::size_t> subtree(std::size_t index) const;
};

/// Reads CoNLL-U. Multiword-token ranges ("3-4") and empty nodes ("5.1") are
/// skipped; `# sent_id =` and `# text =` comments are kept.
std::vector<Sentence> parse(std::string_view text, const std::string& source);
std::vector<Sentence> read(const std::filesystem::path& path);

/// Universal relation without its subtype ("ccomp:xyz" -> "ccomp").
std::string base_relation(std::string_view deprel);

}  // namespace factuality::conllu
