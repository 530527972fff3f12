#include "hateclf/dataset.hpp"

#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_set>

#include "hateclf/delimited.hpp"
#include "hateclf/error.hpp"
#include "hateclf/rng.hpp"

namespace hateclf {
namespace {

bool is_blank_text(std::string_view s) {
  std::int32_t i = 0;
  const auto n = static_cast<std::int32_t>(s.size());
  while (i < n) {
    UChar32 c;
    U8_NEXT(s.data(), i, n, c);
    if (c < 0 || !u_isUWhiteSpace(c)) return false;
  }
  return true;
}

const std::optional<std::string>& label_slot(const LabeledExample& e, SchemeKind kind) {
  return kind == SchemeKind::Binary ? e.binary_label : e.fine_label;
}

std::string row_ref(const std::filesystem::path& path, std::size_t line) {
  return path.filename().string() + ":" + std::to_string(line);
}

}  // namespace

Dataset::Dataset(std::string split_name, LabelScheme scheme,
                 std::vector<LabeledExample> examples, bool labeled)
    : split_name_(std::move(split_name)),
      scheme_(std::move(scheme)),
      examples_(std::move(examples)),
      labeled_(labeled) {
  for (std::size_t i = 0; i < examples_.size(); ++i) {
    const auto& e = examples_[i];
    if (is_blank_text(e.text)) {
      throw Error(ErrorKind::Validation, "example '" + e.id + "' has empty text");
    }
    if (!labeled_) continue;
    const auto& slot = label_slot(e, scheme_.kind());
    if (!slot || !scheme_.contains(*slot)) {
      throw Error(ErrorKind::Validation,
                  "example '" + e.id + "' lacks a " + std::string(scheme_.name()) + " label");
    }
  }
}

const std::string& Dataset::label(std::size_t i) const {
  if (!labeled_) throw Error(ErrorKind::Schema, "dataset '" + split_name_ + "' is unlabeled");
  return *label_slot(examples_.at(i), scheme_.kind());
}

std::size_t Dataset::label_index(std::size_t i) const { return *scheme_.index_of(label(i)); }

std::vector<std::string> Dataset::labels() const {
  std::vector<std::string> out;
  out.reserve(size());
  for (std::size_t i = 0; i < size(); ++i) out.push_back(label(i));
  return out;
}

std::vector<std::string> Dataset::texts() const {
  std::vector<std::string> out;
  out.reserve(size());
  for (const auto& e : examples_) out.push_back(e.text);
  return out;
}

std::vector<std::string> Dataset::ids() const {
  std::vector<std::string> out;
  out.reserve(size());
  for (const auto& e : examples_) out.push_back(e.id);
  return out;
}

Dataset load_dataset(const std::filesystem::path& path, const LabelScheme& scheme,
                     const std::optional<std::string>& task_column, const ColumnNames& columns) {
  const DelimitedTable table = read_delimited(path);

  auto require = [&](const std::string& name) {
    auto idx = table.column(name);
    if (!idx) {
      throw Error(ErrorKind::Schema,
                  path.filename().string() + ": missing column '" + name + "'");
    }
    return *idx;
  };
  const std::size_t id_col = require(columns.id);
  const std::size_t text_col = require(columns.text);
  std::optional<std::size_t> task_col;
  if (task_column) task_col = require(*task_column);

  std::optional<std::size_t> binary_col;
  if (task_col && scheme.kind() != SchemeKind::Binary) {
    binary_col = table.column(columns.binary);
    if (binary_col == task_col) binary_col.reset();
  }

  if (table.rows.empty()) {
    throw Error(ErrorKind::EmptyData, path.filename().string() + ": no data rows");
  }

  const LabelScheme binary = LabelScheme::binary();
  std::vector<LabeledExample> examples;
  examples.reserve(table.rows.size());
  std::unordered_set<std::string> ids;

  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::size_t line = table.line_numbers[r];
    auto cell = [&](std::size_t col) -> const std::string& {
      if (col >= row.size()) {
        throw Error(ErrorKind::Validation,
                    row_ref(path, line) + ": row has " + std::to_string(row.size()) +
                        " fields, expected " + std::to_string(table.header.size()));
      }
      return row[col];
    };

    LabeledExample e;
    e.id = cell(id_col);
    e.text = cell(text_col);
    if (e.id.empty()) throw Error(ErrorKind::Validation, row_ref(path, line) + ": empty id");
    if (!ids.insert(e.id).second) {
      throw Error(ErrorKind::Validation,
                  row_ref(path, line) + ": duplicate id '" + e.id + "'");
    }
    if (is_blank_text(e.text)) {
      throw Error(ErrorKind::Validation, row_ref(path, line) + ": empty text");
    }
    if (task_col) {
      const std::string& raw = cell(*task_col);
      auto canon = scheme.canonical(raw);
      if (!canon) {
        throw Error(ErrorKind::Validation,
                    row_ref(path, line) + ": label '" + raw + "' is not in the " +
                        std::string(scheme.name()) + " scheme");
      }
      if (scheme.kind() == SchemeKind::Binary) {
        e.binary_label = *canon;
      } else {
        e.fine_label = *canon;
      }
      if (binary_col) {
        const std::string& raw_bin = cell(*binary_col);
        auto bin = binary.canonical(raw_bin);
        if (!bin) {
          throw Error(ErrorKind::Validation, row_ref(path, line) + ": binary label '" +
                                                 raw_bin + "' is not HOF/NOT");
        }
        if ((*bin == label::kNot) != (*canon == label::kNone)) {
          throw Error(ErrorKind::Validation, row_ref(path, line) + ": binary label " + *bin +
                                                 " contradicts fine label " + *canon);
        }
        e.binary_label = *bin;
      }
    }
    examples.push_back(std::move(e));
  }
  return Dataset(path.stem().string(), scheme, std::move(examples), task_col.has_value());
}

void save_dataset(const Dataset& d, const std::filesystem::path& path,
                  const ColumnNames& columns) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write '" + path.string() + "'");
  const bool binary = d.scheme().kind() == SchemeKind::Binary;
  bool with_binary = false;
  bool with_fine = false;
  if (d.labeled()) {
    with_binary = binary || std::all_of(d.examples().begin(), d.examples().end(),
                                        [](const auto& e) { return e.binary_label.has_value(); });
    with_fine = !binary;
  }
  std::vector<std::string> header{columns.id, columns.text};
  if (with_binary) header.push_back(columns.binary);
  if (with_fine) header.push_back(columns.fine);
  write_delimited_row(out, header);
  for (const auto& e : d.examples()) {
    std::vector<std::string> row{e.id, e.text};
    if (with_binary) row.push_back(*e.binary_label);
    if (with_fine) row.push_back(*e.fine_label);
    write_delimited_row(out, row);
  }
  if (!out) throw Error(ErrorKind::Io, "failed writing '" + path.string() + "'");
}

std::size_t ClassDistribution::at(std::string_view label) const {
  auto i = scheme.index_of(label);
  if (!i) throw Error(ErrorKind::Schema, "label '" + std::string(label) + "' not in scheme");
  return counts[*i];
}

std::size_t ClassDistribution::total() const {
  std::size_t t = 0;
  for (auto c : counts) t += c;
  return t;
}

std::string ClassDistribution::to_json() const {
  std::ostringstream out;
  out << '{';
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (i) out << ',';
    out << '"' << scheme.label(i) << "\":" << counts[i];
  }
  out << '}';
  return out.str();
}

ClassDistribution class_distribution(const Dataset& d) {
  if (!d.labeled()) {
    throw Error(ErrorKind::Schema,
                "class distribution requires labels; '" + d.split_name() + "' is unlabeled");
  }
  ClassDistribution dist{d.scheme(), std::vector<std::size_t>(d.scheme().size(), 0)};
  for (std::size_t i = 0; i < d.size(); ++i) ++dist.counts[d.label_index(i)];
  return dist;
}

Dataset binary_view(const Dataset& d) {
  if (d.scheme().kind() == SchemeKind::Binary) return d;
  std::vector<LabeledExample> out = d.examples();
  if (d.labeled()) {
    for (auto& e : out) {
      if (!e.binary_label) e.binary_label = binary_from_fine(*e.fine_label);
    }
  }
  return Dataset(d.split_name(), LabelScheme::binary(), std::move(out), d.labeled());
}

std::pair<Dataset, Dataset> stratified_split(const Dataset& d, double val_fraction,
                                             std::uint64_t seed) {
  if (!(val_fraction > 0.0 && val_fraction < 1.0)) {
    throw Error(ErrorKind::Config, "val_fraction must lie in (0, 1)");
  }
  if (!d.labeled()) throw Error(ErrorKind::Schema, "cannot stratify an unlabeled dataset");

  std::vector<std::vector<std::size_t>> by_class(d.scheme().size());
  for (std::size_t i = 0; i < d.size(); ++i) by_class[d.label_index(i)].push_back(i);

  Rng rng(seed);
  std::vector<bool> in_val(d.size(), false);
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    auto& members = by_class[c];
    if (members.empty()) continue;
    if (members.size() < 2) {
      throw Error(ErrorKind::Validation, "stratification error: class " + d.scheme().label(c) +
                                             " has fewer than 2 examples");
    }
    const auto n = static_cast<double>(members.size());
    auto take = static_cast<std::size_t>(std::llround(n * val_fraction));
    take = std::clamp<std::size_t>(take, 1, members.size() - 1);
    rng.shuffle(members);
    for (std::size_t k = 0; k < take; ++k) in_val[members[k]] = true;
  }

  std::vector<LabeledExample> train;
  std::vector<LabeledExample> val;
  for (std::size_t i = 0; i < d.size(); ++i) (in_val[i] ? val : train).push_back(d[i]);
  return {Dataset(d.split_name() + "-train", d.scheme(), std::move(train)),
          Dataset(d.split_name() + "-val", d.scheme(), std::move(val))};
}

Dataset filter_non_none(const Dataset& d) {
  if (d.scheme().kind() != SchemeKind::Fine || !d.labeled()) {
    throw Error(ErrorKind::Schema, "filter_non_none requires a FINE-labeled dataset, got " +
                                       std::string(d.scheme().name()) +
                                       (d.labeled() ? "" : " (unlabeled)"));
  }
  std::vector<LabeledExample> kept;
  for (const auto& e : d.examples()) {
    if (*e.fine_label != label::kNone) kept.push_back(e);
  }
  return Dataset(d.split_name() + "-ternary", LabelScheme::ternary(), std::move(kept));
}

Dataset oversample_minority(const Dataset& d, std::uint64_t seed) {
  const auto dist = class_distribution(d);
  const std::size_t target = *std::max_element(dist.counts.begin(), dist.counts.end());
  std::vector<std::vector<std::size_t>> by_class(d.scheme().size());
  for (std::size_t i = 0; i < d.size(); ++i) by_class[d.label_index(i)].push_back(i);

  Rng rng(seed);
  std::vector<LabeledExample> out = d.examples();
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    const auto& members = by_class[c];
    if (members.empty()) continue;
    for (std::size_t k = members.size(); k < target; ++k) {
      LabeledExample copy = d[members[rng.uniform_index(members.size())]];
      copy.id += "#dup" + std::to_string(k);
      out.push_back(std::move(copy));
    }
  }
  return Dataset(d.split_name() + "-oversampled", d.scheme(), std::move(out));
}

}  // namespace hateclf
