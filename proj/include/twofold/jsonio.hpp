#pragma once

#include <cstddef>
#include <cstdio>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace twofold {

// 17 significant digits round-trips IEEE doubles exactly and pins the byte
// output, which the runner's determinism contract depends on.
inline std::string fmt_g17(double v) {
  if (!(v == v) || v == std::numeric_limits<double>::infinity() ||
      v == -std::numeric_limits<double>::infinity())
    return "null";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Insertion-ordered JSON writer. Only what the scenario outputs need: objects
// keep key order, numbers print via fmt_g17, non-finite values become null.
class Json {
 public:
  enum class Type { Null, Bool, Int, Num, Str, Arr, Obj };

  Json() : type_(Type::Null) {}
  Json(bool b) : type_(Type::Bool), bool_(b) {}
  Json(int v) : type_(Type::Int), int_(v) {}
  Json(long v) : type_(Type::Int), int_(v) {}
  Json(long long v) : type_(Type::Int), int_(v) {}
  Json(size_t v) : type_(Type::Int), int_(static_cast<long long>(v)) {}
  Json(double v) : type_(Type::Num), num_(v) {}
  Json(const char* s) : type_(Type::Str), str_(s) {}
  Json(std::string s) : type_(Type::Str), str_(std::move(s)) {}

  static Json object() {
    Json j;
    j.type_ = Type::Obj;
    return j;
  }
  static Json array() {
    Json j;
    j.type_ = Type::Arr;
    return j;
  }

  Json& operator[](const std::string& key) {
    for (auto& kv : members_)
      if (kv.first == key) return kv.second;
    members_.emplace_back(key, Json());
    return members_.back().second;
  }

  void push(Json v) { items_.push_back(std::move(v)); }
  bool empty() const { return items_.empty() && members_.empty(); }
  size_t size() const { return type_ == Type::Arr ? items_.size() : members_.size(); }

  std::string dump(int indent = 2) const {
    std::string out;
    write(out, indent, 0);
    out.push_back('\n');
    return out;
  }

 private:
  static void escape(std::string& out, const std::string& s) {
    out.push_back('"');
    for (char c : s) {
      switch (c) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        case '\t': out += "\\t"; break;
        case '\r': out += "\\r"; break;
        default:
          if (static_cast<unsigned char>(c) < 0x20) {
            char buf[8];
            std::snprintf(buf, sizeof buf, "\\u%04x", c);
            out += buf;
          } else {
            out.push_back(c);
          }
      }
    }
    out.push_back('"');
  }

  void write(std::string& out, int indent, int depth) const {
    std::string pad(static_cast<size_t>(indent) * (depth + 1), ' ');
    std::string pad0(static_cast<size_t>(indent) * depth, ' ');
    switch (type_) {
      case Type::Null: out += "null"; break;
      case Type::Bool: out += bool_ ? "true" : "false"; break;
      case Type::Int: out += std::to_string(int_); break;
      case Type::Num: out += fmt_g17(num_); break;
      case Type::Str: escape(out, str_); break;
      case Type::Arr:
        if (items_.empty()) {
          out += "[]";
          break;
        }
        out += "[\n";
        for (size_t i = 0; i < items_.size(); ++i) {
          out += pad;
          items_[i].write(out, indent, depth + 1);
          if (i + 1 < items_.size()) out.push_back(',');
          out.push_back('\n');
        }
        out += pad0 + "]";
        break;
      case Type::Obj:
        if (members_.empty()) {
          out += "{}";
          break;
        }
        out += "{\n";
        for (size_t i = 0; i < members_.size(); ++i) {
          out += pad;
          escape(out, members_[i].first);
          out += ": ";
          members_[i].second.write(out, indent, depth + 1);
          if (i + 1 < members_.size()) out.push_back(',');
          out.push_back('\n');
        }
        out += pad0 + "}";
        break;
    }
  }

  Type type_;
  bool bool_ = false;
  long long int_ = 0;
  double num_ = 0.0;
  std::string str_;
  std::vector<Json> items_;
  std::vector<std::pair<std::string, Json>> members_;
};

}  // namespace twofold
