// Copyright (c) the tfac contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "tfac/errors.hpp"
#include "tfac/types.hpp"

namespace tfac {

// All reports are emitted through one fixed-order streaming writer so that
// identical runs produce byte-identical files: no locale dependence, no map
// iteration order, floats always printed with 17 significant digits.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "null";
  if (std::isinf(v)) return v > 0.0 ? "1e999" : "-1e999";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string csv_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0.0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

class JsonWriter {
 public:
  void begin_object() {
    comma();
    out_ += '{';
    stack_.push_back(true);
  }
  void end_object() {
    out_ += '}';
    stack_.pop_back();
    after_value();
  }
  void begin_array() {
    comma();
    out_ += '[';
    stack_.push_back(true);
  }
  void end_array() {
    out_ += ']';
    stack_.pop_back();
    after_value();
  }
  void key(const std::string& k) {
    comma();
    write_string(k);
    out_ += ':';
    have_key_ = true;
  }
  void value(double v) {
    comma();
    out_ += format_double(v);
    after_value();
  }
  void value(int v) {
    comma();
    out_ += std::to_string(v);
    after_value();
  }
  void value(long long v) {
    comma();
    out_ += std::to_string(v);
    after_value();
  }
  void value(bool v) {
    comma();
    out_ += v ? "true" : "false";
    after_value();
  }
  void value(const std::string& v) {
    comma();
    write_string(v);
    after_value();
  }
  void value(const char* v) { value(std::string(v)); }
  void null_value() {
    comma();
    out_ += "null";
    after_value();
  }
  void complex_value(Complex z) {
    begin_object();
    key("re");
    value(z.real());
    key("im");
    value(z.imag());
    end_object();
  }
  // Shorthand for the ubiquitous "key": value pairs.
  void field(const std::string& k, double v) { key(k); value(v); }
  void field(const std::string& k, int v) { key(k); value(v); }
  void field(const std::string& k, bool v) { key(k); value(v); }
  void field(const std::string& k, const std::string& v) { key(k); value(v); }
  void field(const std::string& k, const char* v) { key(k); value(v); }
  void field(const std::string& k, Complex v) { key(k); complex_value(v); }

  const std::string& str() const { return out_; }

 private:
  void comma() {
    if (have_key_) {
      have_key_ = false;
      return;
    }
    if (!stack_.empty() && !stack_.back()) out_ += ',';
    if (!stack_.empty()) stack_.back() = false;
  }
  void after_value() {
    if (!stack_.empty()) stack_.back() = false;
  }
  void write_string(const std::string& s) {
    out_ += '"';
    for (char c : s) {
      switch (c) {
        case '"': out_ += "\\\""; break;
        case '\\': out_ += "\\\\"; break;
        case '\n': out_ += "\\n"; break;
        case '\r': out_ += "\\r"; break;
        case '\t': out_ += "\\t"; break;
        default:
          if (static_cast<unsigned char>(c) < 0x20) {
            char buf[8];
            std::snprintf(buf, sizeof(buf), "\\u%04x", c);
            out_ += buf;
          } else {
            out_ += c;
          }
      }
    }
    out_ += '"';
  }

  std::string out_;
  std::vector<bool> stack_;  // true = container still empty
  bool have_key_ = false;
};

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open output file " + path);
  f.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!f) throw ConfigError("failed writing output file " + path);
}

}  // namespace tfac
