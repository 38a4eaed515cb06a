#include "factuality/conllu.hpp"

#include <algorithm>
#include <sstream>

#include "factuality/core.hpp"
#include "factuality/io.hpp"

namespace factuality::conllu {

std::vector<std::size_t> Sentence::children(std::size_t index) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i].head == static_cast<int>(index) + 1) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> Sentence::subtree(std::size_t index) const {
  std::vector<std::size_t> out{index};
  std::vector<std::size_t> stack{index};
  std::vector<bool> seen(tokens.size(), false);
  seen[index] = true;
  while (!stack.empty()) {
    const auto cur = stack.back();
    stack.pop_back();
    for (auto child : children(cur)) {
      if (seen[child]) continue;
      seen[child] = true;
      out.push_back(child);
      stack.push_back(child);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string base_relation(std::string_view deprel) {
  return std::string(deprel.substr(0, deprel.find(':')));
}

std::vector<Sentence> parse(std::string_view text, const std::string& source) {
  std::vector<Sentence> sentences;
  Sentence current;
  std::size_t line_no = 0;

  auto flush = [&] {
    if (!current.tokens.empty()) {
      const int n = static_cast<int>(current.tokens.size());
      for (const auto& t : current.tokens) {
        if (t.head < 0 || t.head > n) {
          throw Error(source + ": sentence " + current.sent_id.value_or("?") +
                      ": head index out of range for token " + std::to_string(t.id));
        }
      }
      sentences.push_back(std::move(current));
    }
    current = Sentence{};
  };

  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (io::trim(line).empty()) {
      flush();
      continue;
    }
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq != std::string::npos) {
        const auto key = io::trim(std::string_view(line).substr(1, eq - 1));
        const auto value = io::trim(std::string_view(line).substr(eq + 1));
        if (key == "sent_id") current.sent_id = value;
        if (key == "text") current.text = value;
      }
      continue;
    }
    const auto where = source + ":" + std::to_string(line_no);
    std::vector<std::string> cols;
    std::size_t start = 0;
    while (true) {
      const auto tab = line.find('\t', start);
      cols.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (cols.size() != 10) {
      throw Error(where + ": expected 10 tab-separated columns, found " + std::to_string(cols.size()));
    }
    if (cols[0].find_first_of("-.") != std::string::npos) continue;

    Token t;
    t.id = static_cast<int>(io::parse_int(cols[0], where));
    if (t.id != static_cast<int>(current.tokens.size()) + 1) {
      throw Error(where + ": token ids must be consecutive starting at 1");
    }
    t.form = cols[1];
    t.lemma = cols[2];
    t.upos = cols[3];
    t.xpos = cols[4];
    t.head = cols[6] == "_" ? 0 : static_cast<int>(io::parse_int(cols[6], where));
    t.deprel = cols[7];
    current.tokens.push_back(std::move(t));
  }
  flush();
  return sentences;
}

std::vector<Sentence> read(const std::filesystem::path& path) {
  return parse(io::read_file(path), path.string());
}

}  // namespace factuality::conllu
