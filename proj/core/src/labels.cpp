#include "hateclf/labels.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "hateclf/error.hpp"

namespace hateclf {

std::string_view to_string(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::Binary: return "BINARY";
    case SchemeKind::Fine: return "FINE";
    case SchemeKind::Ternary: return "TERNARY";
  }
  return "?";
}

SchemeKind scheme_kind_from_string(std::string_view name) {
  const std::string n = normalize_label(name);
  if (n == "BINARY") return SchemeKind::Binary;
  if (n == "FINE") return SchemeKind::Fine;
  if (n == "TERNARY") return SchemeKind::Ternary;
  throw Error(ErrorKind::Config, "unknown label scheme '" + std::string(name) + "'");
}

std::string normalize_label(std::string_view raw) {
  auto is_blank = [](unsigned char c) { return std::isspace(c) != 0; };
  std::size_t b = 0;
  std::size_t e = raw.size();
  while (b < e && is_blank(static_cast<unsigned char>(raw[b]))) ++b;
  while (e > b && is_blank(static_cast<unsigned char>(raw[e - 1]))) --e;
  std::string out(raw.substr(b, e - b));
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return out;
}

std::string binary_from_fine(std::string_view fine_label) {
  return normalize_label(fine_label) == label::kNone ? std::string(label::kNot)
                                                     : std::string(label::kHof);
}

LabelScheme::LabelScheme(SchemeKind kind, std::vector<std::string> labels)
    : kind_(kind), labels_(std::move(labels)) {
  std::set<std::string> seen;
  for (auto& l : labels_) {
    l = normalize_label(l);
    if (l.empty()) throw Error(ErrorKind::Config, "empty label in scheme");
    if (!seen.insert(l).second) {
      throw Error(ErrorKind::Config, "duplicate label '" + l + "' in scheme");
    }
  }
  if (labels_.size() < 2) throw Error(ErrorKind::Config, "a label scheme needs at least 2 labels");
}

LabelScheme LabelScheme::binary() {
  return {SchemeKind::Binary, {std::string(label::kHof), std::string(label::kNot)}};
}

LabelScheme LabelScheme::fine() {
  return {SchemeKind::Fine,
          {std::string(label::kNone), std::string(label::kHate), std::string(label::kOffn),
           std::string(label::kPrfn)}};
}

LabelScheme LabelScheme::ternary() {
  return {SchemeKind::Ternary,
          {std::string(label::kHate), std::string(label::kOffn), std::string(label::kPrfn)}};
}

LabelScheme LabelScheme::of(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::Binary: return binary();
    case SchemeKind::Fine: return fine();
    case SchemeKind::Ternary: return ternary();
  }
  throw Error(ErrorKind::Config, "unknown scheme kind");
}

std::optional<std::size_t> LabelScheme::index_of(std::string_view raw) const {
  const std::string n = normalize_label(raw);
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] == n) return i;
  }
  return std::nullopt;
}

std::optional<std::string> LabelScheme::canonical(std::string_view raw) const {
  if (auto i = index_of(raw)) return labels_[*i];
  return std::nullopt;
}

}  // namespace hateclf
