#pragma once

#include <string>
#include <utility>
#include <vector>

namespace capekit {

/// Flat "key = value" records, order preserving. '#' starts a comment.
class KeyValueFile {
public:
  KeyValueFile() = default;

  static KeyValueFile parse_file(const std::string& path);
  static KeyValueFile parse_text(const std::string& text, const std::string& origin = "<text>");

  void set(const std::string& key, const std::string& value);
  void set_double(const std::string& key, double value);

  bool has(const std::string& key) const;
  const std::string& get(const std::string& key) const;          // throws config error if absent
  std::string get_or(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double_or(const std::string& key, double fallback) const;

  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

  std::string to_text() const;
  void write_file(const std::string& path) const;

private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

}  // namespace capekit
