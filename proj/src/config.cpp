#include "phmc/config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <vector>

#include "phmc/error.hpp"

namespace phmc {

namespace {

class TomlParser {
 public:
  explicit TomlParser(const std::string& text) : s_(text) {}

  nlohmann::json parse() {
    nlohmann::json root = nlohmann::json::object();
    nlohmann::json* table = &root;
    while (true) {
      skip_ws_comments_newlines();
      if (eof()) break;
      if (peek() == '[') {
        if (at("[[")) fail("arrays of tables are not supported");
        ++i_;
        skip_inline_ws();
        auto path = parse_key_path();
        skip_inline_ws();
        expect(']');
        table = &root;
        for (const auto& k : path) {
          nlohmann::json& next = (*table)[k];
          if (next.is_null()) next = nlohmann::json::object();
          if (!next.is_object()) fail("key '" + k + "' is not a table");
          table = &next;
        }
      } else {
        auto path = parse_key_path();
        skip_inline_ws();
        expect('=');
        skip_inline_ws();
        assign(*table, path, parse_value());
      }
      end_of_line();
    }
    return root;
  }

 private:
  bool eof() const { return i_ >= s_.size(); }
  char peek() const { return eof() ? '\0' : s_[i_]; }
  bool at(const char* lit) const { return s_.compare(i_, std::char_traits<char>::length(lit), lit) == 0; }

  [[noreturn]] void fail(const std::string& msg) const {
    std::size_t line = 1;
    for (std::size_t k = 0; k < i_ && k < s_.size(); ++k)
      if (s_[k] == '\n') ++line;
    throw ConfigError("toml", "line " + std::to_string(line) + ": " + msg);
  }

  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++i_;
  }

  void skip_inline_ws() {
    while (!eof() && (peek() == ' ' || peek() == '\t')) ++i_;
  }

  void skip_comment() {
    if (peek() == '#')
      while (!eof() && peek() != '\n') ++i_;
  }

  void skip_ws_comments_newlines() {
    while (!eof()) {
      const char c = peek();
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        ++i_;
      } else if (c == '#') {
        skip_comment();
      } else {
        break;
      }
    }
  }

  void end_of_line() {
    skip_inline_ws();
    skip_comment();
    if (peek() == '\r') ++i_;
    if (!eof() && peek() != '\n') fail("unexpected trailing characters");
  }

  std::string parse_key() {
    if (peek() == '"') return parse_basic_string();
    if (peek() == '\'') return parse_literal_string();
    const std::size_t start = i_;
    while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' || peek() == '-')) ++i_;
    if (start == i_) fail("expected a key");
    return s_.substr(start, i_ - start);
  }

  std::vector<std::string> parse_key_path() {
    std::vector<std::string> path{parse_key()};
    while (true) {
      skip_inline_ws();
      if (peek() != '.') break;
      ++i_;
      skip_inline_ws();
      path.push_back(parse_key());
    }
    return path;
  }

  void assign(nlohmann::json& table, const std::vector<std::string>& path, nlohmann::json value) {
    nlohmann::json* t = &table;
    for (std::size_t k = 0; k + 1 < path.size(); ++k) {
      nlohmann::json& next = (*t)[path[k]];
      if (next.is_null()) next = nlohmann::json::object();
      if (!next.is_object()) fail("key '" + path[k] + "' is not a table");
      t = &next;
    }
    if (t->contains(path.back())) fail("duplicate key '" + path.back() + "'");
    (*t)[path.back()] = std::move(value);
  }

  std::string parse_basic_string() {
    expect('"');
    std::string out;
    while (true) {
      if (eof() || peek() == '\n') fail("unterminated string");
      char c = s_[i_++];
      if (c == '"') break;
      if (c != '\\') {
        out += c;
        continue;
      }
      if (eof()) fail("unterminated escape");
      c = s_[i_++];
      switch (c) {
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        case 'r': out += '\r'; break;
        case '"': out += '"'; break;
        case '\\': out += '\\'; break;
        default: fail(std::string("unsupported escape \\") + c);
      }
    }
    return out;
  }

  std::string parse_literal_string() {
    expect('\'');
    const std::size_t start = i_;
    while (!eof() && peek() != '\'' && peek() != '\n') ++i_;
    if (peek() != '\'') fail("unterminated string");
    std::string out = s_.substr(start, i_ - start);
    ++i_;
    return out;
  }

  nlohmann::json parse_number() {
    const std::size_t start = i_;
    while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '+' ||
                      peek() == '-' || peek() == '.' || peek() == '_'))
      ++i_;
    std::string tok;
    for (char c : s_.substr(start, i_ - start))
      if (c != '_') tok += c;
    if (tok.empty()) fail("expected a value");
    std::string body = tok;
    double sign = 1.0;
    if (body[0] == '+' || body[0] == '-') {
      sign = body[0] == '-' ? -1.0 : 1.0;
      body = body.substr(1);
    }
    if (body == "inf") return sign * std::numeric_limits<double>::infinity();
    if (body == "nan") return std::numeric_limits<double>::quiet_NaN();
    const bool is_float = tok.find_first_of(".eE") != std::string::npos;
    std::size_t used = 0;
    try {
      if (is_float) {
        const double v = std::stod(tok, &used);
        if (used == tok.size()) return v;
      } else {
        const long long v = std::stoll(tok, &used, 10);
        if (used == tok.size()) return v;
      }
    } catch (const std::exception&) {
    }
    fail("invalid value '" + tok + "'");
  }

  nlohmann::json parse_array() {
    expect('[');
    nlohmann::json arr = nlohmann::json::array();
    while (true) {
      skip_ws_comments_newlines();
      if (peek() == ']') {
        ++i_;
        return arr;
      }
      arr.push_back(parse_value());
      skip_ws_comments_newlines();
      if (peek() == ',') {
        ++i_;
      } else if (peek() != ']') {
        fail("expected ',' or ']' in array");
      }
    }
  }

  nlohmann::json parse_inline_table() {
    expect('{');
    nlohmann::json t = nlohmann::json::object();
    skip_inline_ws();
    if (peek() == '}') {
      ++i_;
      return t;
    }
    while (true) {
      skip_inline_ws();
      auto path = parse_key_path();
      skip_inline_ws();
      expect('=');
      skip_inline_ws();
      assign(t, path, parse_value());
      skip_inline_ws();
      if (peek() == ',') {
        ++i_;
      } else if (peek() == '}') {
        ++i_;
        return t;
      } else {
        fail("expected ',' or '}' in inline table");
      }
    }
  }

  nlohmann::json parse_value() {
    const char c = peek();
    if (c == '"') {
      if (at("\"\"\"")) fail("multi-line strings are not supported");
      return parse_basic_string();
    }
    if (c == '\'') return parse_literal_string();
    if (c == '[') return parse_array();
    if (c == '{') return parse_inline_table();
    if (at("true")) {
      i_ += 4;
      return true;
    }
    if (at("false")) {
      i_ += 5;
      return false;
    }
    return parse_number();
  }

  const std::string& s_;
  std::size_t i_ = 0;
};

}  // namespace

nlohmann::json parse_toml(const std::string& text) { return TomlParser(text).parse(); }

nlohmann::json load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config", "cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  if (path.extension() == ".toml") return parse_toml(text);
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config", std::string("invalid JSON: ") + e.what());
  }
}

}  // namespace phmc
