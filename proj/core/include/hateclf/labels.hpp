#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hateclf {

namespace label {
inline constexpr std::string_view kHof = "HOF";
inline constexpr std::string_view kNot = "NOT";
inline constexpr std::string_view kNone = "NONE";
inline constexpr std::string_view kHate = "HATE";
inline constexpr std::string_view kOffn = "OFFN";
inline constexpr std::string_view kPrfn = "PRFN";
}  // namespace label

enum class SchemeKind { Binary, Fine, Ternary };

std::string_view to_string(SchemeKind kind);
SchemeKind scheme_kind_from_string(std::string_view name);

/// Ordered, duplicate-free label set. Position in `labels()` is the class index
/// used by every model and metric.
class LabelScheme {
 public:
  LabelScheme(SchemeKind kind, std::vector<std::string> labels);

  static LabelScheme binary();   // HOF, NOT
  static LabelScheme fine();     // NONE, HATE, OFFN, PRFN
  static LabelScheme ternary();  // HATE, OFFN, PRFN
  static LabelScheme of(SchemeKind kind);

  SchemeKind kind() const { return kind_; }
  std::string_view name() const { return to_string(kind_); }
  const std::vector<std::string>& labels() const { return labels_; }
  std::size_t size() const { return labels_.size(); }
  const std::string& label(std::size_t index) const { return labels_.at(index); }

  // Lookup is case-insensitive and ignores surrounding whitespace.
  std::optional<std::size_t> index_of(std::string_view raw) const;
  std::optional<std::string> canonical(std::string_view raw) const;
  bool contains(std::string_view raw) const { return index_of(raw).has_value(); }

  friend bool operator==(const LabelScheme&, const LabelScheme&) = default;

 private:
  SchemeKind kind_;
  std::vector<std::string> labels_;
};

// Upper-cases ASCII and strips ASCII/Unicode-agnostic blank padding.
std::string normalize_label(std::string_view raw);

// Binary label implied by a fine-grained label: NONE -> NOT, otherwise HOF.
std::string binary_from_fine(std::string_view fine_label);

}  // namespace hateclf
