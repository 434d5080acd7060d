#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "adnet/model/model.hpp"

namespace adnet {
namespace {

using nlohmann::json;

class ValueParser {
 public:
  ValueParser(std::string_view text, std::size_t line) : text_(text), line_(line) {}

  json parse() {
    json v = value();
    skip_space();
    if (pos_ != text_.size()) error("trailing characters after value");
    return v;
  }

 private:
  [[noreturn]] void error(const std::string& what) const {
    fail(ErrorCode::ParseError, "line " + std::to_string(line_) + ": " + what);
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  json value() {
    skip_space();
    if (pos_ >= text_.size()) error("missing value");
    const char c = text_[pos_];
    if (c == '[') return array();
    if (c == '"') return string();
    if (text_.substr(pos_, 4) == "true") {
      pos_ += 4;
      return true;
    }
    if (text_.substr(pos_, 5) == "false") {
      pos_ += 5;
      return false;
    }
    return number();
  }

  json array() {
    ++pos_;
    json out = json::array();
    for (;;) {
      skip_space();
      if (pos_ >= text_.size()) error("unterminated array");
      if (text_[pos_] == ']') {
        ++pos_;
        return out;
      }
      out.push_back(value());
      skip_space();
      if (pos_ < text_.size() && text_[pos_] == ',') {
        ++pos_;
        continue;
      }
      skip_space();
      if (pos_ >= text_.size() || text_[pos_] != ']') error("expected ',' or ']' in array");
    }
  }

  json string() {
    ++pos_;
    std::string out;
    while (pos_ < text_.size() && text_[pos_] != '"') {
      char c = text_[pos_++];
      if (c == '\\') {
        if (pos_ >= text_.size()) error("bad escape");
        const char e = text_[pos_++];
        switch (e) {
          case 'n': c = '\n'; break;
          case 't': c = '\t'; break;
          case '"': c = '"'; break;
          case '\\': c = '\\'; break;
          default: error("unsupported escape");
        }
      }
      out.push_back(c);
    }
    if (pos_ >= text_.size()) error("unterminated string");
    ++pos_;
    return out;
  }

  json number() {
    std::size_t end = pos_;
    while (end < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[end])) || text_[end] == '.' ||
            text_[end] == '-' || text_[end] == '+'))
      ++end;
    std::string_view token = text_.substr(pos_, end - pos_);
    if (token.empty()) error("expected a value");
    if (!token.empty() && token.front() == '+') token.remove_prefix(1);
    const bool integral = token.find_first_of(".eE") == std::string_view::npos &&
                          token != "inf" && token != "nan";
    if (integral) {
      long long v = 0;
      const auto [p, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
      if (ec != std::errc() || p != token.data() + token.size())
        error("bad number '" + std::string(token) + "'");
      pos_ = end;
      return v;
    }
    double v = 0.0;
    const auto [p, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (ec != std::errc() || p != token.data() + token.size() || !std::isfinite(v))
      error("bad number '" + std::string(token) + "'");
    pos_ = end;
    return v;
  }

  std::string_view text_;
  std::size_t line_;
  std::size_t pos_ = 0;
};

std::string strip_comment(const std::string& line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (c == '\\' && in_string) {
      ++i;
      continue;
    }
    if (c == '"') in_string = !in_string;
    if (c == '#' && !in_string) return line.substr(0, i);
  }
  return line;
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

bool valid_key(const std::string& key) {
  if (key.empty()) return false;
  for (const char c : key)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) return false;
  return true;
}

std::vector<std::string> split_path(const std::string& path, std::size_t line) {
  std::vector<std::string> parts;
  std::string part;
  std::stringstream ss(path);
  while (std::getline(ss, part, '.')) {
    part = trim(part);
    if (!valid_key(part))
      fail(ErrorCode::ParseError, "line " + std::to_string(line) + ": bad table name '" + path + "'");
    parts.push_back(part);
  }
  if (parts.empty())
    fail(ErrorCode::ParseError, "line " + std::to_string(line) + ": empty table name");
  return parts;
}

int bracket_balance(const std::string& s) {
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '\\' && in_string) {
      ++i;
      continue;
    }
    if (s[i] == '"') in_string = !in_string;
    if (in_string) continue;
    if (s[i] == '[') ++depth;
    if (s[i] == ']') --depth;
  }
  return depth;
}

// Descends into nested objects; the last element of an array of tables is
// the active one.
json& descend(json& root, const std::vector<std::string>& parts, std::size_t count,
              std::size_t line) {
  json* node = &root;
  for (std::size_t i = 0; i < count; ++i) {
    json& child = (*node)[parts[i]];
    if (child.is_null()) child = json::object();
    if (child.is_array()) {
      if (child.empty() || !child.back().is_object())
        fail(ErrorCode::ParseError, "line " + std::to_string(line) + ": '" + parts[i] +
                                        "' is not a table");
      node = &child.back();
    } else if (child.is_object()) {
      node = &child;
    } else {
      fail(ErrorCode::ParseError,
           "line " + std::to_string(line) + ": '" + parts[i] + "' is not a table");
    }
  }
  return *node;
}

}  // namespace

nlohmann::json parse_model_text(const std::string& text) {
  json root = json::object();
  json* current = &root;
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  std::vector<std::vector<std::string>> defined_tables;

  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;

    if (line.rfind("[[", 0) == 0) {
      if (line.size() < 4 || line.substr(line.size() - 2) != "]]")
        fail(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": malformed [[table]]");
      const auto parts = split_path(line.substr(2, line.size() - 4), line_no);
      json& parent = descend(root, parts, parts.size() - 1, line_no);
      json& arr = parent[parts.back()];
      if (arr.is_null()) arr = json::array();
      if (!arr.is_array())
        fail(ErrorCode::ParseError,
             "line " + std::to_string(line_no) + ": '" + parts.back() + "' is not an array");
      arr.push_back(json::object());
      current = &arr.back();
      continue;
    }
    if (line.front() == '[') {
      if (line.back() != ']')
        fail(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": malformed [table]");
      const auto parts = split_path(line.substr(1, line.size() - 2), line_no);
      for (const auto& d : defined_tables)
        if (d == parts)
          fail(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": table defined twice");
      defined_tables.push_back(parts);
      current = &descend(root, parts, parts.size(), line_no);
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos)
      fail(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (!valid_key(key))
      fail(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": bad key '" + key + "'");
    std::string value_text = trim(line.substr(eq + 1));
    const std::size_t start_line = line_no;
    while (bracket_balance(value_text) > 0) {
      if (!std::getline(in, raw))
        fail(ErrorCode::ParseError,
             "line " + std::to_string(start_line) + ": unterminated array value");
      ++line_no;
      value_text += ' ' + trim(strip_comment(raw));
    }
    if (current->contains(key))
      fail(ErrorCode::ParseError,
           "line " + std::to_string(start_line) + ": duplicate key '" + key + "'");
    (*current)[key] = ValueParser(value_text, start_line).parse();
  }
  return root;
}

nlohmann::json load_model_document(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open model file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  if (path.size() >= 5 && path.substr(path.size() - 5) == ".json") {
    try {
      return json::parse(text);
    } catch (const json::parse_error& e) {
      fail(ErrorCode::ParseError, std::string("invalid JSON model: ") + e.what());
    }
  }
  return parse_model_text(text);
}

ValidatedModel load_model(const std::string& path) {
  return require_valid(load_model_document(path));
}

}  // namespace adnet
