#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "factuality/core.hpp"

namespace testing_support {

inline std::filesystem::path fixture(const std::string& name) {
  return std::filesystem::path(FACTUALITY_FIXTURE_DIR) / name;
}

inline std::filesystem::path golden(const std::string& name) {
  return std::filesystem::path(FACTUALITY_GOLDEN_DIR) / name;
}

/// Fresh scratch directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("factuality-" + tag + "-" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }
  const std::filesystem::path& path() const { return path_; }

  std::filesystem::path write(const std::string& name, const std::string& content) const {
    const auto p = path_ / name;
    std::ofstream(p, std::ios::binary) << content;
    return p;
  }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Minimal embedded-event record for tests.
inline factuality::EventRecord make_item(std::string id, factuality::Dataset d, double gold,
                                         std::string verb = "know", std::string frame = "V_that_S",
                                         factuality::Polarity pol = factuality::Polarity::Positive,
                                         factuality::Split split = factuality::Split::Test) {
  factuality::EventRecord r;
  r.id = std::move(id);
  r.dataset = d;
  r.split = split;
  r.sentence = "x";
  r.tokens = {"x"};
  r.event_span = {0, 1};
  r.gold = factuality::Score(gold);
  r.annotations = {gold};
  r.verb = std::move(verb);
  r.frame = factuality::Frame(frame);
  r.polarity = pol;
  r.environment = pol == factuality::Polarity::Positive ? factuality::Environment::None
                                                        : factuality::Environment::Negation;
  return r;
}

}  // namespace testing_support
