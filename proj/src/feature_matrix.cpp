#include "phyto/feature_matrix.hpp"

#include <map>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "phyto/error.hpp"
#include "phyto/text.hpp"

namespace phyto {

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::Leaf: return "leaf";
    case Provenance::Stem: return "stem";
    case Provenance::Combined: return "combined";
  }
  return "unknown";
}

void FeatureMatrix::check() const {
  if (labels.size() != values.rows() || row_ids.size() != values.rows()) {
    throw Error(ErrorCode::LengthMismatch, "labels/row ids do not match row count");
  }
  if (values.rows() > 0 && values.cols() != column_names.size()) {
    throw Error(ErrorCode::ColumnMismatch, "column names do not match matrix width");
  }
}

FeatureMatrix FeatureMatrix::select_rows(std::span<const std::size_t> indices) const {
  FeatureMatrix out;
  out.column_names = column_names;
  out.provenance = provenance;
  out.values = values.select_rows(indices);
  for (auto i : indices) {
    out.row_ids.push_back(row_ids[i]);
    out.labels.push_back(labels[i]);
  }
  return out;
}

FeatureMatrix FeatureMatrix::select_columns(std::span<const std::size_t> indices) const {
  FeatureMatrix out;
  out.row_ids = row_ids;
  out.labels = labels;
  out.provenance = provenance;
  out.values = values.select_cols(indices);
  for (auto j : indices) out.column_names.push_back(column_names[j]);
  return out;
}

FeatureMatrix FeatureMatrix::select_columns(const std::vector<std::string>& names) const {
  std::vector<std::size_t> idx;
  idx.reserve(names.size());
  for (const auto& n : names) idx.push_back(column_index(n));
  return select_columns(idx);
}

std::size_t FeatureMatrix::column_index(const std::string& name) const {
  auto it = std::find(column_names.begin(), column_names.end(), name);
  if (it == column_names.end()) throw Error(ErrorCode::ColumnMismatch, "unknown column '" + name + "'");
  return static_cast<std::size_t>(it - column_names.begin());
}

std::string exposition_of(const std::string& row_id) {
  for (auto suffix : {kStimulusSuffix, kPrestimulusSuffix}) {
    if (row_id.size() > suffix.size() && std::string_view(row_id).ends_with(suffix)) {
      return row_id.substr(0, row_id.size() - suffix.size());
    }
  }
  return row_id;
}

Groups groups_of(const FeatureMatrix& m) {
  std::map<std::string, std::size_t> index;
  Groups groups;
  groups.reserve(m.row_ids.size());
  for (const auto& id : m.row_ids) {
    groups.push_back(index.emplace(exposition_of(id), index.size()).first->second);
  }
  return groups;
}

ConstantRemoval remove_constant(const FeatureMatrix& m) {
  m.check();
  if (m.rows() == 0) throw Error(ErrorCode::Empty, "feature matrix has no rows");
  std::vector<std::size_t> keep;
  ConstantRemoval result;
  for (std::size_t j = 0; j < m.cols(); ++j) {
    const double first = m.values(0, j);
    bool constant = true;
    for (std::size_t i = 1; i < m.rows() && constant; ++i) constant = m.values(i, j) == first;
    if (constant) {
      result.dropped.push_back(m.column_names[j]);
    } else {
      keep.push_back(j);
    }
  }
  if (keep.empty()) throw Error(ErrorCode::AllColumnsConstant, "every column is constant");
  result.matrix = m.select_columns(keep);
  return result;
}

FeatureMatrix combine_channels(const FeatureMatrix& leaf, const FeatureMatrix& stem) {
  leaf.check();
  stem.check();
  std::unordered_map<std::string, std::size_t> stem_rows;
  for (std::size_t i = 0; i < stem.rows(); ++i) stem_rows.emplace(stem.row_ids[i], i);

  FeatureMatrix combined;
  combined.provenance = Provenance::Combined;
  for (const auto& n : leaf.column_names) combined.column_names.push_back("leaf__" + n);
  for (const auto& n : stem.column_names) combined.column_names.push_back("stem__" + n);

  std::vector<double> row;
  for (std::size_t i = 0; i < leaf.rows(); ++i) {
    auto it = stem_rows.find(leaf.row_ids[i]);
    if (it == stem_rows.end()) continue;
    if (stem.labels[it->second] != leaf.labels[i]) {
      throw Error(ErrorCode::LabelMismatch, "row '" + leaf.row_ids[i] + "' has different labels per channel");
    }
    row.assign(leaf.values.row(i).begin(), leaf.values.row(i).end());
    auto s = stem.values.row(it->second);
    row.insert(row.end(), s.begin(), s.end());
    combined.values.append_row(row);
    combined.row_ids.push_back(leaf.row_ids[i]);
    combined.labels.push_back(leaf.labels[i]);
  }
  if (combined.rows() == 0) throw Error(ErrorCode::NoCommonExpositions, "leaf and stem share no rows");
  return remove_constant(combined).matrix;
}

void write_feature_matrix(std::ostream& out, const FeatureMatrix& m) {
  m.check();
  out << "exposition_id,label";
  for (const auto& n : m.column_names) out << ',' << n;
  out << '\n';
  for (std::size_t i = 0; i < m.rows(); ++i) {
    out << m.row_ids[i] << ',' << m.labels[i];
    for (double v : m.values.row(i)) out << ',' << format_double(v);
    out << '\n';
  }
}

void save_feature_matrix(const std::filesystem::path& path, const FeatureMatrix& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::FileMissing, "cannot write " + path.string());
  write_feature_matrix(out, m);
}

FeatureMatrix read_feature_matrix(std::istream& in, Provenance provenance) {
  FeatureMatrix m;
  m.provenance = provenance;
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::MalformedHeader, "empty feature matrix file");
  auto header = split(trim(line), ',');
  if (header.size() < 3 || header[0] != "exposition_id" || header[1] != "label") {
    throw Error(ErrorCode::MalformedHeader, "expected 'exposition_id,label,<features...>'");
  }
  for (std::size_t j = 2; j < header.size(); ++j) m.column_names.emplace_back(header[j]);
  std::vector<double> row(m.column_names.size());
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    auto text = trim(line);
    if (text.empty()) continue;
    auto cells = split(text, ',');
    if (cells.size() != header.size()) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + " has wrong field count");
    }
    auto label = parse_int(cells[1]);
    if (!label || (*label != 0 && *label != 1)) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": label must be 0 or 1");
    }
    for (std::size_t j = 0; j < row.size(); ++j) {
      auto v = parse_double(cells[j + 2]);
      if (!v) throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": bad number");
      row[j] = *v;
    }
    m.row_ids.emplace_back(cells[0]);
    m.labels.push_back(static_cast<int>(*label));
    m.values.append_row(row);
  }
  if (m.rows() == 0) m.values = Matrix(0, m.column_names.size());
  return m;
}

FeatureMatrix load_feature_matrix(const std::filesystem::path& path, Provenance provenance) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileMissing, path.string());
  return read_feature_matrix(in, provenance);
}

}  // namespace phyto
